//! Closed-form rank quantities and the apolar-length lower bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apolarity::apolar_length;
use crate::certificate::{BoundCertificate, BoundKind};
use crate::error::{Error, Result};
use crate::polyring::{apply, binomial, dim_forms, Form};
use crate::rational::Q;

/// Generic Waring rank of forms of degree `d` in `n` variables.
pub fn generic_rank(n: usize, d: u32) -> u64 {
    if n <= 1 || d <= 1 {
        return 1;
    }
    if d == 2 {
        return n as u64;
    }
    let n64 = n as u64;
    let dim = binomial(n64 + u64::from(d) - 1, n64 - 1);
    let base = dim.div_ceil(n64);
    let exceptional = matches!((n, d), (3, 4) | (4, 4) | (5, 4) | (5, 3));
    base + u64::from(exceptional)
}

/// The maximal Hilbert function `H(n,d)(i) = min(dim T_i, dim T_{d-i})`.
pub fn hseq(n: usize, d: u32) -> Vec<u64> {
    (0..=d as i64)
        .map(|i| dim_forms(n, i).min(dim_forms(n, d as i64 - i)))
        .collect()
}

/// `H(n,d,s)(i) = min(dim T_i, dim T_{d-i}, s)`.
pub fn hseq_capped(n: usize, d: u32, s: u64) -> Vec<u64> {
    hseq(n, d).into_iter().map(|h| h.min(s)).collect()
}

/// Apolar length of a general form of degree `d` in `n` variables.
pub fn algen(n: usize, d: u32) -> u64 {
    let n64 = n as u64;
    let lo = u64::from(d.saturating_sub(1) / 2);
    let hi = u64::from(d.saturating_sub(1).div_ceil(2));
    binomial(n64 + lo, n64) + binomial(n64 + hi, n64)
}

/// Apolar length for Hilbert function `H(n,d,s)`, by the closed formula
/// `2*C(n+i, i) + s*(d-2i-1)` where `dim T_i <= s < dim T_{i+1}`, `i < d/2`.
/// Falls back to summing the sequence when no such `i` exists.
pub fn al_capped(n: usize, d: u32, s: u64) -> u64 {
    let n64 = n as u64;
    let valid = (0..d.div_ceil(2)).find(|&i| {
        2 * i < d && dim_forms(n, i as i64) <= s && s < dim_forms(n, i as i64 + 1)
    });
    match valid {
        Some(i) => {
            2 * binomial(n64 + u64::from(i), u64::from(i)) + s * u64::from(d - 2 * i - 1)
        }
        None => hseq_capped(n, d, s).iter().sum(),
    }
}

/// Waring rank of the monomial with the given exponents: the product of
/// `a_i + 1` over all but one minimal exponent.
pub fn monomial_rank(exponents: &[u32]) -> Result<u64> {
    if exponents.is_empty() {
        return Err(Error::InvalidInput("monomial_rank of an empty exponent list".into()));
    }
    if exponents.contains(&0) {
        return Err(Error::InvalidInput("monomial exponents must be positive".into()));
    }
    let min_pos = exponents.iter().enumerate().min_by_key(|(_, &a)| a).map(|(i, _)| i).unwrap();
    Ok(exponents
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != min_pos)
        .map(|(_, &a)| u64::from(a) + 1)
        .product())
}

/// Largest monomial rank among monomials of degree `d` in at most `n`
/// variables.
pub fn max_monomial_rank(n: usize, d: u32) -> u64 {
    fn rec(parts_left: usize, rest: u32, max_part: u32, cur: &mut Vec<u32>, best: &mut u64) {
        if rest == 0 {
            if let Ok(r) = monomial_rank(cur) {
                *best = (*best).max(r);
            }
            return;
        }
        if parts_left == 0 {
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            cur.push(p);
            rec(parts_left - 1, rest - p, p, cur, best);
            cur.pop();
        }
    }
    let mut best = 0;
    if d == 0 {
        return 1;
    }
    rec(n, d, d, &mut Vec::new(), &mut best);
    best
}

fn check_linear(alpha: &Form, f: &Form) -> Result<()> {
    if alpha.degree() != 1 || alpha.is_zero() {
        return Err(Error::Precondition("alpha must be a nonzero linear form".into()));
    }
    if alpha.nvars() != f.nvars() {
        return Err(Error::DimensionMismatch { expected: f.nvars(), got: alpha.nvars() });
    }
    Ok(())
}

struct Lengths {
    al_f: i64,
    al1: i64,
    al2: i64,
}

fn lengths(f: &Form, alpha: &Form) -> Lengths {
    let d1 = apply(alpha, f);
    let d2 = apply(alpha, &d1);
    Lengths {
        al_f: apolar_length(f) as i64,
        al1: apolar_length(&d1) as i64,
        al2: apolar_length(&d2) as i64,
    }
}

/// `r(F) >= al(alpha∘F) - al(alpha^2∘F)`.
pub fn derksen_bound(f: &Form, alpha: &Form) -> Result<BoundCertificate> {
    check_linear(alpha, f)?;
    let l = lengths(f, alpha);
    let mut cert = BoundCertificate::new(f, alpha, BoundKind::Derksen);
    cert.push("al(alpha∘F)", vec![l.al1], 0);
    cert.push("al(alpha^2∘F)", vec![l.al2], 0);
    cert.push("derksen", vec![l.al1, l.al2], l.al1 - l.al2);
    Ok(cert)
}

/// The Derksen bound, raised by one when
/// `al(F) - al(alpha∘F) > al(alpha∘F) - al(alpha^2∘F)`.
pub fn improved_bound(f: &Form, alpha: &Form) -> Result<BoundCertificate> {
    check_linear(alpha, f)?;
    let l = lengths(f, alpha);
    let mut cert = BoundCertificate::new(f, alpha, BoundKind::Derksen);
    push_improved_chain(&mut cert, l.al_f, l.al1, l.al2);
    if cert.bound > l.al1 - l.al2 {
        cert.kind = BoundKind::Improved;
    }
    Ok(cert)
}

pub(crate) fn push_improved_chain(cert: &mut BoundCertificate, al_f: i64, al1: i64, al2: i64) {
    let base = al1 - al2;
    let applies = al_f - al1 > base;
    cert.push("al(F)", vec![al_f], 0);
    cert.push("al(alpha∘F)", vec![al1], 0);
    cert.push("al(alpha^2∘F)", vec![al2], 0);
    cert.push("derksen", vec![al1, al2], base);
    cert.push("improved", vec![al_f, al1, al2, i64::from(applies)], base + i64::from(applies));
}

/// `al(F) - al(alpha∘F)`: a cactus-rank bound valid only when no point of
/// the apolar scheme lies on the hyperplane of `alpha`, which holds for
/// general `alpha`. The certificate is marked conditional.
pub fn cactus_bound(f: &Form, alpha: &Form) -> Result<BoundCertificate> {
    check_linear(alpha, f)?;
    let l = lengths(f, alpha);
    let mut cert = BoundCertificate::new(f, alpha, BoundKind::Cactus);
    cert.conditional = true;
    cert.push("al(F)", vec![l.al_f], 0);
    cert.push("al(alpha∘F)", vec![l.al1], 0);
    cert.push("cactus", vec![l.al_f, l.al1], l.al_f - l.al1);
    Ok(cert)
}

/// Random nonzero linear dual form with integer coefficients in `[-9, 9]`.
pub fn random_linear_dual(nvars: usize, rng: &mut ChaCha8Rng) -> Form {
    loop {
        let coeffs: Vec<i64> = (0..nvars).map(|_| rng.gen_range(-9..=9)).collect();
        if coeffs.iter().any(|&c| c != 0) {
            let terms = (0..nvars).map(|i| {
                let mut e = vec![0; nvars];
                e[i] = 1;
                (e, Q::from_integer(coeffs[i].into()))
            });
            return Form::from_terms(nvars, Some(1), terms).expect("linear");
        }
    }
}

/// Maximizes [`improved_bound`] over the coordinate duals and
/// `extra_alphas` random linear duals. Ties keep the earliest candidate.
pub fn best_bound(f: &Form, extra_alphas: usize, rng_seed: u64) -> Result<BoundCertificate> {
    let n = f.nvars();
    let mut candidates: Vec<Form> = (0..n).map(|i| Form::var(n, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    candidates.extend((0..extra_alphas).map(|_| random_linear_dual(n, &mut rng)));
    let mut best: Option<BoundCertificate> = None;
    for alpha in &candidates {
        let cert = improved_bound(f, alpha)?;
        if best.as_ref().is_none_or(|b| cert.bound > b.bound) {
            best = Some(cert);
        }
    }
    best.ok_or_else(|| Error::InvalidInput("form in zero variables".into()))
}
