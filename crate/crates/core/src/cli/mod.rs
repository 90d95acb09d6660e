//! The `waring` command line. Every command prints JSON by default and a
//! short human summary under `--pretty`.

pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::apolarity::{hilbert_function, minimal_generators};
use crate::bounds::{best_bound, cactus_bound, improved_bound};
use crate::certificate::BoundCertificate;
use crate::construct::{certify_explicit_quintic, certify_ruleout, construct_odd_degree, RuleoutPolicy, QUINTIC};
use crate::decompose::{binary_rank, numerical_decompose, verify_decomposition, Decomposition, NumericOptions, Term};
use crate::error::{Error, Result};
use crate::polyring::{parse_form, Form};
use crate::verify::check_certificate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "waring", version, about = "Exact apolarity invariants and Waring-rank certificates")]
pub struct Cli {
    /// Human-readable output.
    #[arg(long, global = true, conflicts_with = "json")]
    pub pretty: bool,
    /// JSON output (the default).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generic, monomial and lower-bound rows for n = 3 or 4.
    Table { n: usize, dmax: u32 },
    /// Lower-bound certificate for a form.
    Bound {
        form: String,
        #[arg(long)]
        nvars: Option<usize>,
        /// Linear dual form, e.g. "a" or "a + 2*c"; default tries coordinates and random forms.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 5)]
        extra_alphas: usize,
        #[arg(long, env = "WARING_SEED", default_value_t = 0)]
        seed: u64,
        /// Cactus bound al(F) - al(alpha∘F); conditional, needs --alpha.
        #[arg(long, requires = "alpha")]
        cactus: bool,
        /// Also attempt the subtract-a-power rule-out on each coordinate.
        #[arg(long)]
        ruleout: bool,
        /// Replay the certificate before printing it.
        #[arg(long)]
        check: bool,
    },
    /// Odd-degree form with rank above algen(n-1, d-1).
    Construct {
        n: usize,
        d: u32,
        #[arg(long, env = "WARING_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = crate::construct::DEFAULT_MAX_TRIES)]
        max_tries: usize,
        /// Require a Nullstellensatz certificate; never fall back to sampling.
        #[arg(long, conflicts_with = "randomized")]
        exact_ruleout: bool,
        /// Use only the sampled (non-rigorous) rule-out.
        #[arg(long)]
        randomized: bool,
        #[arg(long)]
        check: bool,
    },
    /// Check an exact decomposition file against a form.
    Verify {
        form: String,
        file: PathBuf,
        #[arg(long)]
        nvars: Option<usize>,
    },
    /// Full certificate for x*y*z^3 + y^4*z: lower bound 10 and a rank-10 fit.
    Quintic {
        #[arg(long, env = "WARING_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long)]
        check: bool,
    },
    /// Hilbert function, apolar length and minimal generator degrees.
    Hilbert {
        form: String,
        #[arg(long)]
        nvars: Option<usize>,
    },
    /// Exact rank of a binary form.
    BinaryRank { form: String },
    /// Numerical power-sum fit (evidence, not a certificate).
    Decompose {
        form: String,
        #[arg(long)]
        nvars: Option<usize>,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, env = "WARING_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Replay a certificate file.
    Check { file: PathBuf },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CheckFailed(_) => EXIT_CHECK_FAILED,
        Error::Inconclusive(_) | Error::ConstructionFailed { .. } | Error::Genericity(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_INPUT,
    }
}

/// Number of variables named in `text`: `x, y, z, w` / `a, b, c, d` are
/// 0..3 and `x7` / `a7` is 7.
pub fn infer_nvars(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut max = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let index = if j > i + 1 {
                chars[i + 1..j].iter().collect::<String>().parse::<usize>().ok()
            } else {
                "xyzw".find(c).or_else(|| "abcd".find(c))
            };
            if let Some(k) = index {
                max = max.max(k + 1);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    max.max(1)
}

fn read_form(text: &str, nvars: Option<usize>) -> Result<Form> {
    parse_form(text, nvars.unwrap_or_else(|| infer_nvars(text)))
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn replay(cert: &BoundCertificate) -> Result<()> {
    let back: BoundCertificate =
        serde_json::from_str(&cert.to_json()).map_err(|e| Error::CheckFailed(e.to_string()))?;
    check_certificate(&back)
}

fn certificate_text(c: &BoundCertificate) -> String {
    let mut s = format!("form  {}\nalpha {}\nkind  {:?}\n", c.form, c.alpha, c.kind);
    for step in &c.steps {
        s += &format!("  {:<22} {:?} -> {}\n", step.name, step.values, step.bound);
    }
    s += &format!("r(F) >= {}", c.bound);
    if !c.rigorous {
        s += " (sampled rule-out, not rigorous)";
    }
    if c.conditional {
        s += " (cactus bound, conditional)";
    }
    s
}

struct Output {
    json: serde_json::Value,
    text: String,
    code: i32,
}

impl Output {
    fn ok(value: impl Serialize, text: String) -> Self {
        Self { json: serde_json::to_value(value).expect("serializable"), text, code: EXIT_OK }
    }
}

fn execute(cmd: Command) -> Result<Output> {
    match cmd {
        Command::Table { n, dmax } => {
            if !(3..=4).contains(&n) {
                return Err(Error::InvalidInput("table needs n = 3 or 4".into()));
            }
            let rows = table::table(n, dmax);
            let mut text = format!("{:>3} {:>8} {:>9} {:>6} {:>13} {:>6}\n", "d", "generic", "monomial", "lower", "source", "upper");
            for r in &rows {
                let upper = r.upper_literature.map_or("-".to_string(), |u| u.to_string());
                text += &format!(
                    "{:>3} {:>8} {:>9} {:>6} {:>13} {:>6}\n",
                    r.d,
                    r.generic,
                    r.monomial_max,
                    r.lower,
                    format!("{:?}", r.lower_source).to_lowercase(),
                    upper
                );
            }
            text += "upper bounds are literature values, not computed";
            Ok(Output::ok(json!({ "n": n, "rows": rows }), text))
        }
        Command::Bound { form, nvars, alpha, extra_alphas, seed, cactus, ruleout, check } => {
            let f = read_form(&form, nvars)?;
            if f.is_zero() {
                return Err(Error::InvalidInput("the zero form".into()));
            }
            let mut cert = match &alpha {
                Some(a) => {
                    let a = parse_form(a, f.nvars())?;
                    if cactus {
                        cactus_bound(&f, &a)?
                    } else {
                        improved_bound(&f, &a)?
                    }
                }
                None => best_bound(&f, extra_alphas, seed)?,
            };
            if ruleout {
                for var in 0..f.nvars() {
                    let c = certify_ruleout(&f, var, RuleoutPolicy::ExactThenRandomized, seed)?;
                    if c.bound > cert.bound {
                        cert = c;
                    }
                }
            }
            if check {
                replay(&cert)?;
            }
            Ok(Output::ok(&cert, certificate_text(&cert)))
        }
        Command::Construct { n, d, seed, max_tries, exact_ruleout, randomized, check } => {
            let policy = if exact_ruleout {
                RuleoutPolicy::ExactOnly
            } else if randomized {
                RuleoutPolicy::Randomized
            } else {
                RuleoutPolicy::ExactThenRandomized
            };
            let c = construct_odd_degree(n, d, seed, max_tries, policy)?;
            if check {
                replay(&c.certificate)?;
            }
            let data = &c.data;
            let text = format!(
                "{}\nG   = {}\nK   = {}\npsi = {}\ntries {}",
                certificate_text(&c.certificate),
                data.g,
                data.k_form,
                data.psi.to_dual_string(),
                data.tries
            );
            Ok(Output::ok(&c.certificate, text))
        }
        Command::Verify { form, file, nvars } => {
            let f = read_form(&form, nvars)?;
            let raw = read_file(&file)?;
            let terms: Vec<Term> = serde_json::from_str::<Vec<Term>>(&raw)
                .or_else(|_| serde_json::from_str::<Decomposition>(&raw).map(|d| d.terms))
                .map_err(|e| Error::InvalidInput(format!("decomposition file: {e}")))?;
            let dec = Decomposition::from_terms(f.degree(), terms);
            let valid = verify_decomposition(&f, &dec)?;
            let text = if valid {
                format!("valid: r(F) <= {}", dec.len())
            } else {
                "invalid: the terms do not expand to F".into()
            };
            let mut out = Output::ok(
                json!({ "valid": valid, "terms": dec.len(), "upper_bound": valid.then_some(dec.len()) }),
                text,
            );
            if !valid {
                out.code = EXIT_CHECK_FAILED;
            }
            Ok(out)
        }
        Command::Quintic { seed, restarts, check } => {
            let cert = certify_explicit_quintic()?;
            if check {
                replay(&cert)?;
            }
            let f = parse_form(QUINTIC, 3)?;
            let opts = NumericOptions { restarts, ..Default::default() };
            let fit = numerical_decompose(&f, 10, seed, &opts)?;
            let fitted = fit.residual <= opts.tol;
            let upper = fitted.then_some(10);
            let text = format!(
                "{}\nrank-10 numerical fit: residual {:.3e} ({})",
                certificate_text(&cert),
                fit.residual,
                if fitted { "r(F) <= 10 numerically" } else { "no fit below tolerance" }
            );
            let mut out = Output::ok(
                json!({
                    "form": QUINTIC,
                    "lower_bound": cert.bound,
                    "upper_bound": upper,
                    "rank": upper.filter(|&u| u == cert.bound),
                    "certificate": cert,
                    "upper_witness": {
                        "kind": "numerical",
                        "residual": fit.residual,
                        "tol": opts.tol,
                        "decomposition": fit.decomposition,
                    },
                }),
                text,
            );
            if !fitted {
                out.code = EXIT_INCONCLUSIVE;
            }
            Ok(out)
        }
        Command::Hilbert { form, nvars } => {
            let f = read_form(&form, nvars)?;
            let hf = hilbert_function(&f)?;
            let degrees: Vec<u32> = minimal_generators(&f, f.degree() + 1).iter().map(|g| g.0).collect();
            let text = format!(
                "hilbert function {:?}\napolar length    {}\ngenerator degrees {:?}",
                hf.values,
                hf.length(),
                degrees
            );
            Ok(Output::ok(
                json!({ "hilbert_function": hf.values, "apolar_length": hf.length(), "generator_degrees": degrees }),
                text,
            ))
        }
        Command::BinaryRank { form } => {
            let f = parse_form(&form, 2)?;
            let r = binary_rank(&f)?;
            let text = format!(
                "rank {} (generator degrees {:?}){}",
                r.rank,
                r.generator_degrees,
                if r.witness.is_some() { ", exact witness attached" } else { "" }
            );
            Ok(Output::ok(&r, text))
        }
        Command::Decompose { form, nvars, rank, tol, seed, restarts } => {
            let f = read_form(&form, nvars)?;
            let opts = NumericOptions { tol, restarts, ..Default::default() };
            let fit = numerical_decompose(&f, rank, seed, &opts)?;
            let within = fit.residual <= tol;
            let text = format!("rank {rank}: residual {:.3e} ({})", fit.residual, if within { "within tolerance" } else { "above tolerance" });
            let mut out = Output::ok(
                json!({ "rank": rank, "residual": fit.residual, "tol": tol, "within_tol": within, "decomposition": fit.decomposition }),
                text,
            );
            if !within {
                out.code = EXIT_INCONCLUSIVE;
            }
            Ok(out)
        }
        Command::Check { file } => {
            let raw = read_file(&file)?;
            let value: serde_json::Value =
                serde_json::from_str(&raw).map_err(|e| Error::InvalidInput(format!("certificate file: {e}")))?;
            // `quintic` output nests the certificate.
            let inner = value.get("certificate").cloned().unwrap_or(value);
            let cert: BoundCertificate =
                serde_json::from_value(inner).map_err(|e| Error::InvalidInput(format!("certificate file: {e}")))?;
            check_certificate(&cert)?;
            let text = format!("certificate accepted: r(F) >= {}", cert.bound);
            Ok(Output::ok(json!({ "accepted": true, "bound": cert.bound, "rigorous": cert.rigorous }), text))
        }
    }
}

/// Parses `args`, runs the command and writes to `out` / `err`. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            let rendered = if cli.pretty {
                o.text
            } else {
                serde_json::to_string(&o.json).expect("serializable")
            };
            let _ = writeln!(out, "{rendered}");
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
