//! The subtract-a-power rule-out: certify that for every linear form `l`
//! with `alpha ∘ l = 0`, the pieces `((F - l^d)^⊥)_i` for `1 <= i <= k` are
//! exactly `(alpha^2)_i`.
//!
//! In degree `i` the catalecticant of `F - l^d`, with the `alpha^2`-divisible
//! rows dropped, is `M0 - u(a) w(a)^T` where `a` are the coefficients of `l`.
//! Reducing `[M0 | I]` to echelon form gives `E M0 = R` with pivot columns
//! `P`; the maximal minors of `E M(a)` are then
//! `g0 = 1 - w_P . (E u)` and `m_(i,j) = -(E u)_i * w2_j`, where
//! `w2_j = w_j - sum_i R[i][j] w_(P_i)` runs over the non-pivot columns.
//! `E` is invertible, so these generate the same ideal as the minors of
//! `M(a)`. A polynomial identity `sum p_m * m = 1` shows they never vanish
//! together, i.e. the rank never drops.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apolarity::catalecticant;
use crate::certificate::{NullstellensatzRecord, ParamPolyRepr, RuleoutMode, RuleoutRecord};
use crate::error::{Error, Result};
use crate::polyring::{apply, dim_forms, monomial_basis, Exponent, Form, LinearForm};
use crate::qlinalg::QMatrix;
use crate::rational::{fmt_q, parse_q, Q};

/// Random samples tried in randomized mode and in witness searches.
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleoutOutcome {
    Passed(RuleoutRecord),
    /// Some `l` makes the rank drop in the given degree.
    Failed { witness: LinearForm, degree: u32 },
    /// No identity found below the degree cap, and no witness either.
    Inconclusive { degree: u32 },
}

impl RuleoutOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, RuleoutOutcome::Passed(_))
    }
}

/// Inhomogeneous polynomial in the parameters of `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Q>,
}

impl Poly {
    fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    fn monomial(e: Exponent, c: Q) -> Self {
        let mut p = Self::zero(e.len());
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|(e, c)| e.iter().all(|&x| x == 0) && c.is_one())
    }

    fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_scaled(&mut self, other: &Poly, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (e, x) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert_with(Q::zero);
            *entry += x * c;
            if entry.is_zero() {
                self.terms.remove(e);
            }
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out: BTreeMap<Exponent, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Poly { nvars: self.nvars, terms: out }
    }

    fn to_repr(&self) -> ParamPolyRepr {
        self.terms.iter().map(|(e, c)| (e.clone(), fmt_q(c))).collect()
    }

    fn from_repr(nvars: usize, repr: &ParamPolyRepr) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in repr {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_scaled(&Self::monomial(e.clone(), Q::one()), &parse_q(c)?);
        }
        Ok(p)
    }
}

/// Exponents of total degree at most `max` in `nvars` variables.
fn monomials_up_to(nvars: usize, max: u32) -> Vec<Exponent> {
    (0..=max).flat_map(|t| monomial_basis(nvars, t)).collect()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// The minors of the parametric catalecticant in one degree, in the
/// canonical form described in the module docs.
pub(crate) struct DegreeSystem {
    g0: Poly,
    w1: Vec<Poly>,
    u1: Vec<Poly>,
    w2: Vec<Poly>,
}

impl DegreeSystem {
    /// `[g0, m_(0,0), m_(0,1), ..., m_(r-1, c-1)]`.
    fn minors(&self) -> Vec<Poly> {
        let mut out = vec![self.g0.clone()];
        let minus_one = -Q::one();
        for u in &self.u1 {
            for w in &self.w2 {
                let mut m = Poly::zero(u.nvars);
                m.add_scaled(&u.mul(w), &minus_one);
                out.push(m);
            }
        }
        out
    }
}

/// Parameter layout: `l = sum_p a_p x_(params[p])`, skipping `var`.
fn params_of(nvars: usize, var: usize) -> Vec<usize> {
    (0..nvars).filter(|&j| j != var).collect()
}

fn restrict(e: &[u32], params: &[usize]) -> Exponent {
    params.iter().map(|&j| e[j]).collect()
}

/// `None` when the rank already drops at `l = 0`.
pub(crate) fn build_system(f: &Form, var: usize, i: u32) -> Option<DegreeSystem> {
    let n = f.nvars();
    let d = f.degree();
    let params = params_of(n, var);
    let m = params.len();
    let rows_all = monomial_basis(n, i);
    let cols = monomial_basis(n, d - i);
    let cat = catalecticant(f, i);
    let keep: Vec<usize> = (0..rows_all.len()).filter(|&t| rows_all[t][var] <= 1).collect();
    let r = keep.len();
    let ncols = cols.len();

    let mut aug = QMatrix::zeros(r, ncols + r);
    for (row, &t) in keep.iter().enumerate() {
        for c in 0..ncols {
            aug[(row, c)] = cat[(t, c)].clone();
        }
        aug[(row, ncols + row)] = Q::one();
    }
    let red = aug.rref();
    if red.pivot_cols.iter().any(|&p| p >= ncols) || red.rank < r {
        return None;
    }
    let pivots = red.pivot_cols;
    let scale = Q::from_integer(factorial(d) / factorial(d - i));
    let u: Vec<Poly> = keep
        .iter()
        .map(|&t| {
            let th = &rows_all[t];
            if th[var] == 1 {
                Poly::zero(m)
            } else {
                Poly::monomial(restrict(th, &params), scale.clone())
            }
        })
        .collect();
    let w: Vec<Poly> = cols
        .iter()
        .map(|e| {
            if e[var] > 0 {
                Poly::zero(m)
            } else {
                let multinom = factorial(d - i) / e.iter().map(|&x| factorial(x)).product::<BigInt>();
                Poly::monomial(restrict(e, &params), Q::from_integer(multinom))
            }
        })
        .collect();
    let u1: Vec<Poly> = (0..r)
        .map(|row| {
            let mut acc = Poly::zero(m);
            for (t, ut) in u.iter().enumerate() {
                acc.add_scaled(ut, &red.reduced[(row, ncols + t)]);
            }
            acc
        })
        .collect();
    let w1: Vec<Poly> = pivots.iter().map(|&p| w[p].clone()).collect();
    let is_pivot: Vec<bool> = (0..ncols).map(|c| pivots.contains(&c)).collect();
    let w2: Vec<Poly> = (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|c| {
            let mut acc = w[c].clone();
            for (row, &p) in pivots.iter().enumerate() {
                acc.add_scaled(&w[p], &-red.reduced[(row, c)].clone());
            }
            acc
        })
        .collect();
    let mut g0 = Poly::constant(m, Q::one());
    for (wi, ui) in w1.iter().zip(&u1) {
        g0.add_scaled(&wi.mul(ui), &-Q::one());
    }
    Some(DegreeSystem { g0, w1, u1, w2 })
}

mod modp {
    use super::Q;
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive, Zero};

    pub const P: u64 = (1 << 61) - 1;

    pub fn mul(a: u64, b: u64) -> u64 {
        ((u128::from(a) * u128::from(b)) % u128::from(P)) as u64
    }

    #[cfg(test)]
    pub fn add(a: u64, b: u64) -> u64 {
        (a + b) % P
    }

    pub fn sub(a: u64, b: u64) -> u64 {
        (a + P - b) % P
    }

    pub fn inv(a: u64) -> u64 {
        let (mut base, mut exp, mut acc) = (a, P - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn reduce(x: &BigInt) -> u64 {
        let r = (x.abs() % BigInt::from(P)).to_u64().expect("below p");
        if x.is_negative() {
            (P - r) % P
        } else {
            r
        }
    }

    /// `None` when the denominator vanishes mod p.
    pub fn from_q(x: &Q) -> Option<u64> {
        let den = reduce(x.denom());
        if den.is_zero() {
            return None;
        }
        Some(mul(reduce(x.numer()), inv(den)))
    }

    /// In-place reduced row echelon form over `ncols` columns; returns the
    /// pivot columns.
    pub fn rref(m: &mut [Vec<u64>], ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
                continue;
            };
            m.swap(r, p);
            let iv = inv(m[r][c]);
            for x in m[r].iter_mut() {
                *x = mul(*x, iv);
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = row[c];
                    for (x, &y) in row.iter_mut().zip(&pivot_row) {
                        if y != 0 {
                            *x = sub(*x, mul(f, y));
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

}

/// Searches `h0 g0 + sum_j h_j w2_j = 1` with products of degree at most
/// `T`, for increasing `T <= cap`, and returns the minor multipliers.
fn find_identity(sys: &DegreeSystem, m: usize, cap: u32) -> Option<(u32, Vec<Poly>)> {
    let mut gens: Vec<(usize, &Poly)> = vec![(0, &sys.g0)];
    gens.extend(sys.w2.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(j, w)| (j + 1, w)));
    for t in 0..=cap {
        let rows = monomials_up_to(m, t);
        let row_index: HashMap<&Exponent, usize> = rows.iter().enumerate().map(|(i, e)| (e, i)).collect();
        // Unknowns: (generator, multiplier monomial).
        let mut unknowns: Vec<(usize, Exponent)> = Vec::new();
        for &(g, poly) in &gens {
            if let Some(dg) = poly.degree() {
                if dg <= t {
                    unknowns.extend(monomials_up_to(m, t - dg).into_iter().map(|e| (g, e)));
                }
            }
        }
        if unknowns.is_empty() {
            continue;
        }
        let gen_poly = |g: usize| if g == 0 { &sys.g0 } else { &sys.w2[g - 1] };
        // Sparse exact columns.
        let columns: Vec<Vec<(usize, Q)>> = unknowns
            .iter()
            .map(|(g, mu)| {
                gen_poly(*g)
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let prod: Exponent = e.iter().zip(mu).map(|(a, b)| a + b).collect();
                        (row_index[&prod], c.clone())
                    })
                    .collect()
            })
            .collect();
        let nunk = unknowns.len();
        let mut dense = vec![vec![0u64; nunk + 1]; rows.len()];
        let mut bad_prime = false;
        for (c, col) in columns.iter().enumerate() {
            for (r, x) in col {
                match modp::from_q(x) {
                    Some(v) => dense[*r][c] = v,
                    None => bad_prime = true,
                }
            }
        }
        if bad_prime {
            return None;
        }
        let const_row = row_index[&vec![0u32; m]];
        dense[const_row][nunk] = 1;
        let pivots = modp::rref(&mut dense, nunk + 1);
        if pivots.last() == Some(&nunk) {
            continue;
        }
        // Choose independent rows of the selected columns.
        let mut transposed: Vec<Vec<u64>> = vec![vec![0u64; rows.len()]; pivots.len()];
        for (k, &c) in pivots.iter().enumerate() {
            for (r, x) in &columns[c] {
                transposed[k][*r] = modp::from_q(x).expect("checked");
            }
        }
        let row_sel = modp::rref(&mut transposed, rows.len());
        let mut a = QMatrix::zeros(row_sel.len(), pivots.len());
        let mut b = vec![Q::zero(); row_sel.len()];
        let pos: HashMap<usize, usize> = row_sel.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        for (k, &c) in pivots.iter().enumerate() {
            for (r, x) in &columns[c] {
                if let Some(&i) = pos.get(r) {
                    a[(i, k)] = x.clone();
                }
            }
        }
        if let Some(&i) = pos.get(&const_row) {
            b[i] = Q::one();
        }
        let Ok(Some(x)) = a.solve(&b) else { continue };
        let mut h: Vec<Poly> = vec![Poly::zero(m); sys.w2.len() + 1];
        for (k, &c) in pivots.iter().enumerate() {
            let (g, mu) = &unknowns[c];
            h[*g].add_scaled(&Poly::monomial(mu.clone(), Q::one()), &x[k]);
        }
        let mut p0 = h[0].clone();
        for (j, w) in sys.w2.iter().enumerate() {
            p0.add_scaled(&h[j + 1].mul(w), &Q::one());
        }
        let mut multipliers = vec![p0];
        for w1i in &sys.w1 {
            for j in 0..sys.w2.len() {
                let mut p = Poly::zero(m);
                p.add_scaled(&h[j + 1].mul(w1i), &-Q::one());
                multipliers.push(p);
            }
        }
        if identity_holds(&sys.minors(), &multipliers) {
            let deg = multipliers.iter().filter_map(Poly::degree).max().unwrap_or(0);
            return Some((deg, multipliers));
        }
    }
    None
}

fn identity_holds(minors: &[Poly], multipliers: &[Poly]) -> bool {
    if minors.len() != multipliers.len() {
        return false;
    }
    let nvars = minors.first().map_or(0, |p| p.nvars);
    let mut acc = Poly::zero(nvars);
    for (m, p) in minors.iter().zip(multipliers) {
        if !p.is_zero() && !m.is_zero() {
            acc.add_scaled(&m.mul(p), &Q::one());
        }
    }
    acc.is_one()
}

/// `(alpha index, k)` after checking the preconditions.
fn validate(f: &Form, alpha: &Form, k: u32) -> Result<usize> {
    if alpha.nvars() != f.nvars() {
        return Err(Error::DimensionMismatch { expected: f.nvars(), got: alpha.nvars() });
    }
    let var = match (alpha.degree(), alpha.num_terms()) {
        (1, 1) => alpha.support_vars()[0],
        _ => {
            return Err(Error::Precondition(
                "alpha must be a coordinate dual variable".into(),
            ))
        }
    };
    let d = f.degree();
    if f.is_zero() || d.is_multiple_of(2) || k != (d - 1) / 2 {
        return Err(Error::Precondition(format!(
            "need a nonzero form of odd degree 2k+1 with k = {k}, got degree {d}"
        )));
    }
    if !apply(&alpha.pow(2), f).is_zero() {
        return Err(Error::Precondition("alpha^2 ∘ F must vanish".into()));
    }
    if f.nvars() < 2 {
        return Err(Error::Precondition("need at least two variables".into()));
    }
    Ok(var)
}

/// Direct test at one `l`: `rank Cat_i(F - l^d) = dim T_i - dim T_(i-2)` for
/// every `1 <= i <= k`. Returns the first failing degree.
pub fn failing_degree(f: &Form, ell: &LinearForm, k: u32) -> Option<u32> {
    let n = f.nvars();
    let d = f.degree();
    let g = f.sub(&ell.to_form().pow(d)).expect("same ring");
    (1..=k).find(|&i| {
        let want = dim_forms(n, i64::from(i)) - dim_forms(n, i64::from(i) - 2);
        catalecticant(&g, i).rank() as u64 != want
    })
}

fn random_ell(n: usize, var: usize, rng: &mut ChaCha8Rng) -> LinearForm {
    let c: Vec<i64> = (0..n).map(|j| if j == var { 0 } else { rng.gen_range(-9..=9) }).collect();
    LinearForm::from_i64(&c)
}

fn coordinate_ells(n: usize, var: usize) -> impl Iterator<Item = LinearForm> {
    (0..n).filter(move |&j| j != var).map(move |j| {
        let mut c = vec![0; n];
        c[j] = 1;
        LinearForm::from_i64(&c)
    })
}

/// Coordinate forms, then random ones, then `l = 0`.
fn search_witness(f: &Form, var: usize, k: u32, samples: usize, seed: u64) -> Option<(LinearForm, u32)> {
    let n = f.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    coordinate_ells(n, var)
        .chain((0..samples).map(|_| random_ell(n, var, &mut rng)))
        .chain(std::iter::once(LinearForm::from_i64(&vec![0; n])))
        .find_map(|ell| failing_degree(f, &ell, k).map(|deg| (ell, deg)))
}

fn randomized_passes(f: &Form, var: usize, k: u32, samples: usize, seed: u64) -> Option<(LinearForm, u32)> {
    let n = f.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    coordinate_ells(n, var)
        .chain((0..samples).map(|_| random_ell(n, var, &mut rng)))
        .find_map(|ell| failing_degree(f, &ell, k).map(|deg| (ell, deg)))
}

/// Runs the rule-out in the requested mode. `seed` drives the random
/// samples (randomized mode and witness search).
pub fn parametric_ruleout(
    f: &Form,
    alpha: &Form,
    k: u32,
    mode: RuleoutMode,
    seed: u64,
) -> Result<RuleoutOutcome> {
    let var = validate(f, alpha, k)?;
    let n = f.nvars();
    match mode {
        RuleoutMode::Randomized => {
            if let Some((witness, degree)) = randomized_passes(f, var, k, DEFAULT_SAMPLES, seed) {
                return Ok(RuleoutOutcome::Failed { witness, degree });
            }
            Ok(RuleoutOutcome::Passed(RuleoutRecord {
                mode,
                var,
                k,
                nullstellensatz: Vec::new(),
                samples: Some(DEFAULT_SAMPLES),
                sample_seed: Some(seed),
            }))
        }
        RuleoutMode::ExactNullstellensatz => {
            let cap = 2 * f.degree();
            let mut records = Vec::new();
            for i in 1..=k {
                let found = build_system(f, var, i).and_then(|sys| find_identity(&sys, n - 1, cap));
                match found {
                    Some((deg, mults)) => records.push(NullstellensatzRecord {
                        degree: i,
                        multiplier_degree: deg,
                        multipliers: mults.iter().map(Poly::to_repr).collect(),
                    }),
                    None => {
                        return Ok(match search_witness(f, var, k, DEFAULT_SAMPLES, seed) {
                            Some((witness, degree)) => RuleoutOutcome::Failed { witness, degree },
                            None => RuleoutOutcome::Inconclusive { degree: i },
                        })
                    }
                }
            }
            Ok(RuleoutOutcome::Passed(RuleoutRecord {
                mode,
                var,
                k,
                nullstellensatz: records,
                samples: None,
                sample_seed: None,
            }))
        }
    }
}

/// Replays a rule-out record against `f`: rebuilds the minors and checks
/// each identity exactly, or reruns the sampled test.
pub fn verify_ruleout(f: &Form, record: &RuleoutRecord) -> Result<()> {
    let alpha = Form::var(f.nvars(), record.var.min(f.nvars().saturating_sub(1)));
    if record.var >= f.nvars() {
        return Err(Error::CheckFailed("rule-out variable out of range".into()));
    }
    let var = validate(f, &alpha, record.k)?;
    match record.mode {
        RuleoutMode::Randomized => {
            let samples = record.samples.unwrap_or(DEFAULT_SAMPLES);
            let seed = record.sample_seed.unwrap_or(0);
            match randomized_passes(f, var, record.k, samples, seed) {
                None => Ok(()),
                Some((ell, deg)) => Err(Error::CheckFailed(format!(
                    "sampled form {:?} drops rank in degree {deg}",
                    ell.coeffs.iter().map(fmt_q).collect::<Vec<_>>()
                ))),
            }
        }
        RuleoutMode::ExactNullstellensatz => {
            let degrees: Vec<u32> = record.nullstellensatz.iter().map(|r| r.degree).collect();
            if degrees != (1..=record.k).collect::<Vec<_>>() {
                return Err(Error::CheckFailed(format!(
                    "identities cover degrees {degrees:?}, need 1..={}",
                    record.k
                )));
            }
            for rec in &record.nullstellensatz {
                let sys = build_system(f, var, rec.degree).ok_or_else(|| {
                    Error::CheckFailed(format!("rank drops at l = 0 in degree {}", rec.degree))
                })?;
                let mults: Vec<Poly> = rec
                    .multipliers
                    .iter()
                    .map(|r| Poly::from_repr(f.nvars() - 1, r))
                    .collect::<Result<_>>()?;
                if !identity_holds(&sys.minors(), &mults) {
                    return Err(Error::CheckFailed(format!(
                        "minor identity fails in degree {}",
                        rec.degree
                    )));
                }
            }
            Ok(())
        }
    }
}
