//! Odd-degree forms `F = x1*G + K` whose rank provably exceeds
//! `algen(n-1, d-1)`, and the fixed quintic `xyz^3 + y^4 z`.

pub mod ruleout;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apolarity::{apolar_graded_piece, catalecticant, differentiation_map, hilbert_function};
use crate::bounds::{hseq_capped, push_improved_chain};
use crate::certificate::{BoundCertificate, BoundKind, ConstructionData, RuleoutMode, RuleoutRecord};
use crate::error::{Error, Result};
use crate::polyring::{apply, binomial, dim_forms, monomial_basis, parse_form, power_sum_in, Form, LinearForm};
use crate::rational::Q;

pub use ruleout::{failing_degree, parametric_ruleout, verify_ruleout, RuleoutOutcome};

pub const DEFAULT_MAX_TRIES: usize = 50;

/// The explicit quintic of rank 10.
pub const QUINTIC: &str = "x*y*z^3 + y^4*z";

/// How the rule-out step is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleoutPolicy {
    /// Nullstellensatz identity; fall back to sampling if the search is
    /// inconclusive.
    ExactThenRandomized,
    /// Nullstellensatz identity or an `Inconclusive` error.
    ExactOnly,
    Randomized,
}

fn random_small(rng: &mut ChaCha8Rng) -> i64 {
    rng.gen_range(-9..=9)
}

fn random_power_sum_with(n: usize, d: u32, s: usize, rng: &mut ChaCha8Rng) -> Result<(Form, Vec<LinearForm>)> {
    let points: Vec<LinearForm> = (0..s)
        .map(|_| loop {
            let c: Vec<i64> = (0..n).map(|_| random_small(rng)).collect();
            if c.iter().any(|&x| x != 0) {
                break LinearForm::from_i64(&c);
            }
        })
        .collect();
    let terms: Vec<(Q, LinearForm)> = points.iter().map(|l| (Q::from_integer(1.into()), l.clone())).collect();
    Ok((power_sum_in(n, &terms, d)?, points))
}

/// Sum of `s` powers `l^d` of random linear forms with coefficients in
/// `[-9, 9]`.
pub fn random_power_sum(n: usize, d: u32, s: usize, rng_seed: u64) -> Result<Form> {
    if n == 0 || d == 0 || s == 0 {
        return Err(Error::InvalidInput("n, d and s must be positive".into()));
    }
    Ok(random_power_sum_with(n, d, s, &mut ChaCha8Rng::seed_from_u64(rng_seed))?.0)
}

/// The degree-`k` generator of `G^⊥` not involving the first dual variable,
/// as a primitive integer form. `G` must not involve `x1`.
pub fn find_psi(g: &Form, k: u32) -> Result<Form> {
    let sub = g
        .remove_var(0)
        .map_err(|_| Error::Precondition("G must not involve the first variable".into()))?;
    let piece = apolar_graded_piece(&sub, k);
    if piece.dim() != 1 {
        return Err(Error::Genericity(format!(
            "degree-{k} piece of the apolar ideal has dimension {}, expected 1",
            piece.dim()
        )));
    }
    Ok(piece.basis[0].primitive().insert_var(0))
}

/// True iff `psi ∘ K` is outside `T_(k-1) ∘ G`.
pub fn check_k(g: &Form, psi: &Form, k_form: &Form, k: u32) -> bool {
    let target = apply(psi, k_form);
    if target.is_zero() {
        return false;
    }
    let span = catalecticant(g, k - 1);
    !span.in_row_space(&target.coeff_vector()).unwrap_or(true)
}

/// Random form of degree `d` in `x2..xn` (embedded in `n` variables).
fn random_k(n: usize, d: u32, rng: &mut ChaCha8Rng) -> Form {
    let terms: Vec<_> = monomial_basis(n - 1, d)
        .into_iter()
        .map(|e| (e, Q::from_integer(random_small(rng).into())))
        .collect();
    Form::from_terms(n - 1, Some(d), terms).expect("homogeneous").insert_var(0)
}

/// Ternary case. Here `S'_(k+1) / (T_(k-1) ∘ G)` is 2-dimensional, as is
/// the family of `l`, so a random `K` fails for some complex `l`. Writing
/// `G = l_1^(2k) + ... + l_k^(2k)`, the class of `l^(k+1)` modulo
/// `T_(k-1) ∘ G` is a bijective function of `[l]`, and as `l -> l_1` it tends
/// to the class of `l_1^k m`, which no `l` with `Psi(l) != 0` reaches. So `K`
/// is drawn with `Psi ∘ K` in that class plus a random element of
/// `T_(k-1) ∘ G`, then a random element of `ker(Psi ∘ -)` is added.
fn tangent_k(g_sub: &Form, points: &[LinearForm], psi_sub: &Form, d: u32, k: u32, rng: &mut ChaCha8Rng) -> Result<Form> {
    let m = loop {
        let c = LinearForm::from_i64(&[random_small(rng), random_small(rng)]);
        if !c.is_zero() && !c.is_proportional(&points[0]) {
            break c;
        }
    };
    let mut target = points[0].to_form().pow(k).mul(&m.to_form());
    let w = catalecticant(g_sub, k - 1);
    for row in w.row_vecs() {
        let v = Form::from_coeff_vector(2, k + 1, &row)?;
        target = target.add(&v.scale(&Q::from_integer(random_small(rng).into())))?;
    }
    let dmap = differentiation_map(psi_sub, d);
    let base = dmap
        .solve(&target.coeff_vector())?
        .ok_or_else(|| Error::Genericity("differentiation by Psi is not surjective".into()))?;
    let mut coeffs = base;
    for v in dmap.kernel_basis() {
        let c = Q::from_integer(random_small(rng).into());
        for (x, y) in coeffs.iter_mut().zip(&v) {
            *x += &c * y;
        }
    }
    Ok(Form::from_coeff_vector(2, d, &coeffs)?.primitive().insert_var(0))
}

/// `rank Cat_i(F) = dim T_i - dim T_(i-2)`, i.e. `(F^⊥)_i = (alpha^2)_i`
/// when `alpha^2 ∘ F = 0`.
fn piece_is_alpha_squared(f: &Form, i: u32) -> bool {
    let n = f.nvars();
    let want = dim_forms(n, i64::from(i)) - dim_forms(n, i64::from(i) - 2);
    catalecticant(f, i).rank() as u64 == want
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionCertificate {
    pub data: ConstructionData,
    pub bound: i64,
    pub rigorous: bool,
    /// The shared certificate record, with `data` embedded.
    pub certificate: BoundCertificate,
}

impl ConstructionCertificate {
    pub fn to_json(&self) -> String {
        self.certificate.to_json()
    }
}

enum TryOutcome {
    Done(Box<ConstructionCertificate>),
    Failed(&'static str),
}

fn run_ruleout(f: &Form, alpha: &Form, k: u32, policy: RuleoutPolicy, seed: u64) -> Result<RuleoutOutcome> {
    match policy {
        RuleoutPolicy::Randomized => parametric_ruleout(f, alpha, k, RuleoutMode::Randomized, seed),
        RuleoutPolicy::ExactOnly => {
            let out = parametric_ruleout(f, alpha, k, RuleoutMode::ExactNullstellensatz, seed)?;
            if let RuleoutOutcome::Inconclusive { degree } = out {
                return Err(Error::Inconclusive(format!(
                    "no Nullstellensatz identity within the degree cap in degree {degree}"
                )));
            }
            Ok(out)
        }
        RuleoutPolicy::ExactThenRandomized => {
            match parametric_ruleout(f, alpha, k, RuleoutMode::ExactNullstellensatz, seed)? {
                RuleoutOutcome::Inconclusive { .. } => {
                    parametric_ruleout(f, alpha, k, RuleoutMode::Randomized, seed)
                }
                out => Ok(out),
            }
        }
    }
}

fn push_ruleout_step(cert: &mut BoundCertificate, record: RuleoutRecord, base: i64) {
    let rigorous = record.mode == RuleoutMode::ExactNullstellensatz;
    cert.push(
        "parametric_ruleout",
        vec![1, i64::from(rigorous), i64::from(record.k), base],
        base + 2,
    );
    cert.rigorous &= rigorous;
    cert.ruleout = Some(record);
}

fn construction_try(
    n: usize,
    d: u32,
    seed: u64,
    attempt: usize,
    policy: RuleoutPolicy,
) -> Result<TryOutcome> {
    let k = (d - 1) / 2;
    let s = binomial((n + k as usize - 2) as u64, u64::from(k)) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);

    let (g_sub, points) = random_power_sum_with(n - 1, d - 1, s as usize, &mut rng)?;
    let hf_g = hilbert_function(&g_sub)?;
    if hf_g.values != hseq_capped(n - 1, d - 1, s) {
        return Ok(TryOutcome::Failed("hilbert_function(G)"));
    }
    let g = g_sub.insert_var(0);
    let psi = match find_psi(&g, k) {
        Ok(p) => p,
        Err(Error::Genericity(_)) => return Ok(TryOutcome::Failed("find_psi")),
        Err(e) => return Err(e),
    };
    let k_form = if n == 3 {
        match tangent_k(&g_sub, &points, &psi.remove_var(0)?, d, k, &mut rng) {
            Ok(kf) => kf,
            Err(Error::Genericity(_)) => return Ok(TryOutcome::Failed("find_K")),
            Err(e) => return Err(e),
        }
    } else {
        random_k(n, d, &mut rng)
    };
    if !check_k(&g, &psi, &k_form, k) {
        return Ok(TryOutcome::Failed("check_K"));
    }
    let f = Form::var(n, 0).mul(&g).add(&k_form)?;
    if !(1..=k).all(|i| piece_is_alpha_squared(&f, i)) {
        return Ok(TryOutcome::Failed("F_perp"));
    }
    let hf_f = hilbert_function(&f)?;
    let al_f = hf_f.length() as i64;
    let al_g = hf_g.length() as i64;
    let alpha = Form::var(n, 0);
    let record = match run_ruleout(&f, &alpha, k, policy, seed ^ attempt as u64)? {
        RuleoutOutcome::Passed(r) => r,
        RuleoutOutcome::Failed { .. } => return Ok(TryOutcome::Failed("parametric_ruleout")),
        RuleoutOutcome::Inconclusive { .. } => return Ok(TryOutcome::Failed("parametric_ruleout_inconclusive")),
    };

    let mut cert = BoundCertificate::new(&f, &alpha, BoundKind::Construction);
    cert.push("hilbert_function(G)", hf_g.values.iter().map(|&v| v as i64).collect(), 0);
    cert.push("hilbert_function", hf_f.values.iter().map(|&v| v as i64).collect(), 0);
    cert.push("check_K", vec![1], 0);
    push_improved_chain(&mut cert, al_f, al_g, 0);
    push_ruleout_step(&mut cert, record, al_g);
    let data = ConstructionData {
        n,
        d,
        k,
        s,
        g,
        k_form,
        f,
        psi,
        rng_seed: seed,
        tries: attempt + 1,
    };
    cert.construction = Some(data.clone());
    Ok(TryOutcome::Done(Box::new(ConstructionCertificate {
        data,
        bound: cert.bound,
        rigorous: cert.rigorous,
        certificate: cert,
    })))
}

/// Samples `G` and `K` until every check passes, at most `max_tries` times.
/// Attempt `t` draws from stream `t` of the seeded generator.
pub fn construct_odd_degree(
    n: usize,
    d: u32,
    rng_seed: u64,
    max_tries: usize,
    policy: RuleoutPolicy,
) -> Result<ConstructionCertificate> {
    if n < 3 {
        return Err(Error::InvalidInput("need n >= 3".into()));
    }
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "degree must be odd and at least 3, got {d}; even-degree lower bounds come from monomials"
        )));
    }
    let mut failures: BTreeMap<&'static str, usize> = BTreeMap::new();
    for attempt in 0..max_tries {
        match construction_try(n, d, rng_seed, attempt, policy)? {
            TryOutcome::Done(c) => return Ok(*c),
            TryOutcome::Failed(why) => *failures.entry(why).or_default() += 1,
        }
    }
    let reason = failures
        .iter()
        .max_by_key(|(_, &c)| c)
        .map_or("no tries".to_string(), |(w, c)| format!("{w} ({c} times)"));
    Err(Error::ConstructionFailed { tries: max_tries, reason })
}

/// Lower-bound chain for `f` with respect to the coordinate dual `alpha`:
/// Derksen, the +1 improvement, and when `al(F) >= 2 al(alpha∘F) + 2` and
/// `alpha^2 ∘ F = 0` the rule-out that adds one more.
pub fn certify_ruleout(f: &Form, var: usize, policy: RuleoutPolicy, seed: u64) -> Result<BoundCertificate> {
    let n = f.nvars();
    if var >= n {
        return Err(Error::VariableOutOfRange { index: var, nvars: n });
    }
    let alpha = Form::var(n, var);
    let g = apply(&alpha, f);
    let g2 = apply(&alpha, &g);
    let hf = hilbert_function(f)?;
    let al_f = hf.length() as i64;
    let al_g = crate::apolarity::apolar_length(&g) as i64;
    let al_g2 = crate::apolarity::apolar_length(&g2) as i64;
    let mut cert = BoundCertificate::new(f, &alpha, BoundKind::Derksen);
    cert.push("hilbert_function", hf.values.iter().map(|&v| v as i64).collect(), 0);
    push_improved_chain(&mut cert, al_f, al_g, al_g2);
    if cert.bound > al_g - al_g2 {
        cert.kind = BoundKind::Improved;
    }
    let d = f.degree();
    if !g2.is_zero() || d.is_multiple_of(2) || al_f < 2 * al_g + 2 {
        return Ok(cert);
    }
    match run_ruleout(f, &alpha, (d - 1) / 2, policy, seed)? {
        RuleoutOutcome::Passed(record) => {
            push_ruleout_step(&mut cert, record, al_g);
            cert.kind = BoundKind::RuledOut;
        }
        RuleoutOutcome::Failed { .. } | RuleoutOutcome::Inconclusive { .. } => {}
    }
    Ok(cert)
}

/// The full chain for `xyz^3 + y^4 z`, with an exact rule-out.
pub fn certify_explicit_quintic() -> Result<BoundCertificate> {
    let f = parse_form(QUINTIC, 3)?;
    certify_ruleout(&f, 0, RuleoutPolicy::ExactOnly, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apolarity::apolar_length;
    use crate::bounds::{algen, derksen_bound, generic_rank, max_monomial_rank};

    fn f3(s: &str) -> Form {
        parse_form(s, 3).unwrap()
    }

    #[test]
    fn power_sum_hilbert_functions() {
        let one = random_power_sum(3, 5, 1, 2).unwrap();
        assert_eq!(hilbert_function(&one).unwrap().values, vec![1; 6]);
        let g = random_power_sum(2, 4, 2, 3).unwrap();
        assert_eq!(hilbert_function(&g).unwrap().values, hseq_capped(2, 4, 2));
        assert_eq!(hseq_capped(2, 4, 2), vec![1, 2, 2, 2, 1]);
        assert!(random_power_sum(0, 4, 2, 3).is_err());
    }

    #[test]
    fn psi_of_yz3() {
        let g = f3("y*z^3");
        let psi = find_psi(&g, 2).unwrap();
        assert_eq!(psi, f3("b^2"));
        assert!(apply(&psi, &g).is_zero());
        assert!(matches!(find_psi(&f3("y^4"), 2), Err(Error::Genericity(_))));
        assert!(find_psi(&f3("x*y^3"), 2).is_err());
    }

    #[test]
    fn check_k_examples() {
        let g = f3("y*z^3");
        let psi = f3("b^2");
        assert!(check_k(&g, &psi, &f3("y^4*z"), 2));
        assert!(!check_k(&g, &psi, &Form::zero(3, 5), 2));
        // y * G has psi ∘ (yG) = 2 z^3, inside T_1 ∘ G
        assert!(!check_k(&g, &psi, &f3("y^2*z^3"), 2));
    }

    #[test]
    fn quintic_chain() {
        let c = certify_explicit_quintic().unwrap();
        assert_eq!(c.bound, 10);
        assert_eq!(c.kind, BoundKind::RuledOut);
        assert!(c.rigorous);
        let by_name = |n: &str| c.steps.iter().find(|s| s.name == n).unwrap().clone();
        assert_eq!(by_name("hilbert_function").values, vec![1, 3, 5, 5, 3, 1]);
        assert_eq!(by_name("al(F)").values, vec![18]);
        assert_eq!(by_name("al(alpha∘F)").values, vec![8]);
        assert_eq!(by_name("al(alpha^2∘F)").values, vec![0]);
        assert_eq!(by_name("derksen").bound, 8);
        assert_eq!(by_name("improved").bound, 9);
        assert_eq!(by_name("parametric_ruleout").bound, 10);
    }

    #[test]
    fn construct_3_5() {
        let c = construct_odd_degree(3, 5, 7, DEFAULT_MAX_TRIES, RuleoutPolicy::ExactOnly).unwrap();
        let data = &c.data;
        assert_eq!(c.bound, 10);
        assert!(c.rigorous);
        assert_eq!(data.k, 2);
        assert_eq!(data.s, 2);
        assert_eq!(data.f, Form::var(3, 0).mul(&data.g).add(&data.k_form).unwrap());
        assert_eq!(apolar_length(&data.g) as u64, algen(2, 4) - 1);
        assert_eq!(apolar_length(&data.f) as u64, 2 * algen(2, 4));
        assert_eq!(derksen_bound(&data.f, &Form::var(3, 0)).unwrap().bound as u64, algen(2, 4) - 1);
        assert!(c.bound as u64 > max_monomial_rank(3, 5));
        // deterministic
        let again = construct_odd_degree(3, 5, 7, DEFAULT_MAX_TRIES, RuleoutPolicy::ExactOnly).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn construct_rejects_bad_input() {
        assert!(matches!(construct_odd_degree(3, 6, 1, 5, RuleoutPolicy::Randomized), Err(Error::InvalidInput(_))));
        assert!(construct_odd_degree(2, 5, 1, 5, RuleoutPolicy::Randomized).is_err());
        assert!(matches!(
            construct_odd_degree(3, 5, 1, 0, RuleoutPolicy::Randomized),
            Err(Error::ConstructionFailed { .. })
        ));
    }

    #[test]
    fn bounds_beat_monomials_and_generic() {
        for d in [5u32, 7, 9, 11, 13] {
            let b = algen(2, d - 1) + 1;
            assert!(b > max_monomial_rank(3, d), "d = {d}");
            let b4 = algen(3, d - 1) + 1;
            assert!(b4 > generic_rank(4, d), "d = {d}");
        }
    }
}
