//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;
use waring::bounds::{algen, best_bound, generic_rank, max_monomial_rank, monomial_rank};
use waring::certificate::BoundCertificate;
use waring::construct::{certify_ruleout, RuleoutPolicy};
use waring::decompose::{binary_rank, ci_rank, verify_decomposition, Decomposition};
use waring::polyring::{monomial_basis, parse_form, Form};
use waring::rational::{q, q_frac};
use waring::verify::check_certificate;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cli(args: &[&str]) -> (i32, Value) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = waring::cli::run(std::iter::once("waring").chain(args.iter().copied()), &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let value = serde_json::from_str(&text).unwrap_or_else(|_| Value::String(String::from_utf8(err).unwrap()));
    (code, value)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn column(rows: &Value, key: &str) -> Vec<u64> {
    rows.as_array().unwrap().iter().map(|r| r[key].as_u64().unwrap()).collect()
}

fn table_rows() -> Outcome {
    let start = Instant::now();
    let (c3, t3) = cli(&["table", "3", "12"]);
    let (c4, t4) = cli(&["table", "4", "10"]);
    let elapsed = start.elapsed();
    ensure(c3 == 0 && c4 == 0, "table exited nonzero")?;
    let (g3, m3) = (column(&t3["rows"], "generic"), column(&t3["rows"], "monomial_max"));
    let (g4, m4) = (column(&t4["rows"], "generic"), column(&t4["rows"], "monomial_max"));
    ensure(g3 == [4, 6, 7, 10, 12, 15, 19, 22, 26, 31], format!("n=3 generic {g3:?}"))?;
    ensure(m3 == [4, 6, 9, 12, 16, 20, 25, 30, 36, 42], format!("n=3 monomial {m3:?}"))?;
    ensure(g4 == [5, 10, 14, 21, 30, 42, 55, 72], format!("n=4 generic {g4:?}"))?;
    ensure(m4 == [4, 8, 12, 18, 27, 36, 48, 64], format!("n=4 monomial {m4:?}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("n=3 d=3..12 and n=4 d=3..10 rows exact in {elapsed:.2?}"))
}

fn step<'a>(cert: &'a Value, name: &str) -> Option<&'a Value> {
    cert["steps"].as_array()?.iter().find(|s| s["name"] == name).map(|s| &s["values"])
}

fn quintic() -> Outcome {
    let start = Instant::now();
    let cert = waring::construct::certify_explicit_quintic().map_err(|e| e.to_string())?;
    let exact_time = start.elapsed();
    check_certificate(&cert).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (code, out) = cli(&["quintic", "--check"]);
    let total = start.elapsed();
    ensure(code == 0, format!("quintic exited {code}: {out}"))?;
    let c = &out["certificate"];
    ensure(step(c, "hilbert_function") == Some(&serde_json::json!([1, 3, 5, 5, 3, 1])), "hilbert function")?;
    ensure(step(c, "al(F)") == Some(&serde_json::json!([18])), "al(F)")?;
    ensure(step(c, "al(alpha∘F)") == Some(&serde_json::json!([8])), "al(alpha∘F)")?;
    ensure(step(c, "al(alpha^2∘F)") == Some(&serde_json::json!([0])), "al(alpha^2∘F)")?;
    ensure(c["ruleout"]["mode"] == "exact_nullstellensatz" && c["rigorous"] == true, "rule-out not exact")?;
    ensure(c["bound"] == 10 && out["lower_bound"] == 10, "bound is not 10")?;
    let residual = out["upper_witness"]["residual"].as_f64().unwrap();
    let terms = out["upper_witness"]["decomposition"]["terms"].as_array().unwrap().len();
    ensure(residual <= 1e-8 && terms == 10, format!("fit residual {residual:e} with {terms} terms"))?;
    ensure(exact_time < Duration::from_secs(10), format!("exact chain {exact_time:?}"))?;
    ensure(total < Duration::from_secs(60), format!("fit {total:?}"))?;
    Ok(format!("r >= 10 exact in {exact_time:.2?}; rank-10 residual {residual:.1e}, total {total:.2?}"))
}

fn constructions() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (n, d, expected) in [(3, 5, 10), (3, 7, 17), (3, 9, 26), (4, 5, 15)] {
        let (ns, ds) = (n.to_string(), d.to_string());
        let (code, out) = cli(&["construct", &ns, &ds, "--seed", "1", "--max-tries", "50", "--check"]);
        ensure(code == 0, format!("construct {n} {d} exited {code}: {out}"))?;
        let cert: BoundCertificate = serde_json::from_value(out).map_err(|e| e.to_string())?;
        check_certificate(&cert).map_err(|e| format!("({n},{d}) replay: {e}"))?;
        ensure(cert.bound == expected, format!("({n},{d}) bound {}", cert.bound))?;
        ensure(cert.bound as u64 == algen(n - 1, d - 1) + 1, "bound differs from algen + 1")?;
        let tries = cert.construction.as_ref().map_or(0, |c| c.tries);
        ensure((1..=50).contains(&tries), format!("({n},{d}) tries {tries}"))?;
        notes.push(format!("({n},{d})={}{}", cert.bound, if cert.rigorous { "" } else { "*" }));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:.2?}", notes.join(" ")))
}

fn monomials() -> Outcome {
    ensure(monomial_rank(&[1, 2, 2]) == Ok(9), "rank (1,2,2)")?;
    ensure(monomial_rank(&[1, 1, 1]) == Ok(4), "rank (1,1,1)")?;
    for d in 3..=15u64 {
        let expected = if d % 2 == 1 { d.div_ceil(2).pow(2) } else { d * (d + 2) / 4 };
        let got = max_monomial_rank(3, d as u32);
        ensure(got == expected, format!("max monomial d={d}: {got} vs {expected}"))?;
    }
    Ok("(1,2,2)=9, (1,1,1)=4, closed forms for d=3..15".into())
}

fn run_suite<S, F>(cases: u32, strategy: S, check: F) -> Result<(), String>
where
    S: proptest::strategy::Strategy,
    F: Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

fn identities() -> Outcome {
    run_suite(200, arb_form(4, 1, 7), |f| check_gorenstein(&f)).map_err(|e| format!("symmetry: {e}"))?;
    run_suite(100, arb_form_and_dual(), |(f, t)| check_colon(&f, &t)).map_err(|e| format!("colon: {e}"))?;
    run_suite(50, arb_disjoint_pair(), |(g, h)| check_tensor(&g, &h)).map_err(|e| format!("tensor: {e}"))?;
    for d in (3..=21).step_by(2) {
        ensure(algen(3, d - 1) == generic_rank(4, d), format!("algen(3,{}) != generic(4,{d})", d - 1))?;
    }
    run_suite(100, arb_psi(), |(p, d)| check_surjective(&p, d)).map_err(|e| format!("surjectivity: {e}"))?;
    Ok("symmetry 200, colon 100, tensor 50, algen odd d<=21, surjectivity 100".into())
}

/// Every rigorous, unconditional lower bound we can certify for `f`.
fn lower_bounds(f: &Form) -> Vec<i64> {
    let mut out = Vec::new();
    if let Ok(c) = best_bound(f, 3, 0) {
        out.push(c.bound);
    }
    for var in 0..f.nvars() {
        if let Ok(c) = certify_ruleout(f, var, RuleoutPolicy::ExactOnly, 0) {
            if c.rigorous && !c.conditional {
                out.push(c.bound);
            }
        }
    }
    out
}

fn soundness() -> Outcome {
    let p = |s: &str| parse_form(s, 3).unwrap();
    let split = Decomposition::from_exact(5, &[(q_frac(1, 10), lin(&[0, 1, 1])), (q_frac(-1, 10), lin(&[0, 1, -1]))]);
    let cubes = Decomposition::from_exact(
        3,
        &[
            (q_frac(1, 24), lin(&[1, 1, 1])),
            (q_frac(-1, 24), lin(&[1, 1, -1])),
            (q_frac(-1, 24), lin(&[1, -1, 1])),
            (q_frac(1, 24), lin(&[1, -1, -1])),
        ],
    );
    let piece1 = p("y^4*z + 2*y^2*z^3 + 1/5*z^5");
    let piece2 = p("x*y*z^3 - 2*y^2*z^3 - 1/5*z^5");
    ensure(verify_decomposition(&piece1, &split) == Ok(true), "split witness rejected")?;
    ensure(verify_decomposition(&p("x*y*z"), &cubes) == Ok(true), "four cubes rejected")?;
    let ci = ci_rank(&piece2).ok_or("no ci rank")?.rank;
    // Upper bounds: verified witnesses, the monomial formula, the
    // complete-intersection rank and subadditivity over the split.
    let mut corpus: Vec<(Form, u64)> =
        vec![(p("x*y*z^3 + y^4*z"), 2 + ci), (piece1, 2), (piece2, ci), (p("x*y*z"), 4)];
    for n in 1..=3usize {
        for d in 1..=7u32 {
            for e in monomial_basis(n, d) {
                if e.contains(&0) {
                    continue;
                }
                let r = monomial_rank(&e).unwrap();
                corpus.push((Form::monomial(e, q(1)), r));
            }
        }
    }
    let mut checked = 0;
    for (f, upper) in &corpus {
        for lower in lower_bounds(f) {
            ensure(lower as u64 <= *upper, format!("{f}: lower {lower} > upper {upper}"))?;
            checked += 1;
        }
    }
    let mut binary = 0;
    for d in 1..=5u32 {
        let basis = monomial_basis(2, d);
        let total = 3usize.pow(basis.len() as u32);
        for code in 0..total {
            let mut c = code;
            let terms: Vec<_> = basis
                .iter()
                .map(|e| {
                    let v = (c % 3) as i64 - 1;
                    c /= 3;
                    (e.clone(), q(v))
                })
                .collect();
            let f = Form::from_terms(2, Some(d), terms).unwrap();
            if f.is_zero() {
                continue;
            }
            let ours = binary_rank(&f).map_err(|e| format!("{f}: {e}"))?;
            let oracle = binary_rank_oracle(&f);
            ensure(ours.rank == oracle, format!("{f}: binary_rank {} vs oracle {oracle}", ours.rank))?;
            if let Some(w) = &ours.witness {
                ensure(verify_decomposition(&f, w) == Ok(true), format!("{f}: bad witness"))?;
            }
            binary += 1;
        }
    }
    Ok(format!("{checked} lower/upper pairs over {} forms; {binary} binary forms match the oracle", corpus.len()))
}

fn witnesses() -> Outcome {
    let p = |s: &str| parse_form(s, 3).unwrap();
    let cubes = Decomposition::from_exact(
        3,
        &[
            (q_frac(1, 24), lin(&[1, 1, 1])),
            (q_frac(-1, 24), lin(&[1, 1, -1])),
            (q_frac(-1, 24), lin(&[1, -1, 1])),
            (q_frac(1, 24), lin(&[1, -1, -1])),
        ],
    );
    ensure(verify_decomposition(&p("x*y*z"), &cubes) == Ok(true), "xyz four cubes")?;
    let split = Decomposition::from_exact(5, &[(q_frac(1, 10), lin(&[0, 1, 1])), (q_frac(-1, 10), lin(&[0, 1, -1]))]);
    ensure(verify_decomposition(&p("y^4*z + 2*y^2*z^3 + 1/5*z^5"), &split) == Ok(true), "rank-2 split witness")?;
    let ci = ci_rank(&p("x*y*z^3 - 2*y^2*z^3 - 1/5*z^5")).ok_or("ci_rank returned nothing")?;
    ensure(ci.rank == 8 && ci.degrees == vec![2, 2, 4], format!("ci_rank {} {:?}", ci.rank, ci.degrees))?;
    Ok("xyz r<=4, split piece r<=2, ci_rank 8 with degrees (2,2,4)".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 table reproduction", table_rows),
        ("2 quintic certificate", quintic),
        ("3 constructions", constructions),
        ("4 monomial ranks", monomials),
        ("5 identity suites", identities),
        ("6 soundness coupling", soundness),
        ("7 upper-bound witnesses", witnesses),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
