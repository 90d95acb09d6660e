//! Strategies and independent oracles shared by the property and acceptance
//! suites. The oracles build their matrices from `apply` directly rather
//! than going through the apolarity module.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use waring::apolarity::{apolar_length, colon_piece, differentiation_map, hilbert_function};
use waring::polyring::{apply, dim_forms, monomial_basis, Form, LinearForm};
use waring::qlinalg::QMatrix;
use waring::rational::{q, Q};

pub fn form_from(nvars: usize, degree: u32, picks: &[(usize, i64)]) -> Form {
    let basis = monomial_basis(nvars, degree);
    let terms = picks.iter().map(|&(i, c)| (basis[i % basis.len()].clone(), q(c)));
    Form::from_terms(nvars, Some(degree), terms).unwrap()
}

/// Nonzero sparse forms with small integer coefficients.
pub fn arb_form(max_n: usize, min_d: u32, max_d: u32) -> impl Strategy<Value = Form> {
    (1..=max_n, min_d..=max_d)
        .prop_flat_map(|(n, d)| {
            let picks = prop::collection::vec((0usize..1000, -5i64..=5), 1..=6);
            (Just(n), Just(d), picks)
        })
        .prop_map(|(n, d, picks)| form_from(n, d, &picks))
        .prop_filter("nonzero", |f| !f.is_zero())
}

/// `(f, theta)` with `deg theta <= deg f` in the same ring.
pub fn arb_form_and_dual() -> impl Strategy<Value = (Form, Form)> {
    (1usize..=3, 2u32..=5)
        .prop_flat_map(|(n, d)| {
            (
                Just(n),
                Just(d),
                1..=d,
                prop::collection::vec((0usize..1000, -4i64..=4), 1..=5),
                prop::collection::vec((0usize..1000, -3i64..=3), 1..=3),
            )
        })
        .prop_map(|(n, d, e, fp, tp)| (form_from(n, d, &fp), form_from(n, e, &tp)))
        .prop_filter("nonzero", |(f, t)| !f.is_zero() && !t.is_zero())
}

/// Matrix whose columns are the coefficient vectors of `m ∘ f` over the
/// monomials `m` of degree `i`.
fn action_matrix(f: &Form, i: u32, post: impl Fn(&Form) -> Form) -> QMatrix {
    let n = f.nvars();
    let basis = monomial_basis(n, i);
    let cols: Vec<Vec<Q>> = basis
        .iter()
        .map(|e| {
            let g = post(&Form::monomial(e.clone(), q(1)));
            let image = apply(&g, f);
            let out_deg = f.degree().saturating_sub(g.degree());
            if image.is_zero() {
                vec![q(0); monomial_basis(n, out_deg).len()]
            } else {
                image.coeff_vector()
            }
        })
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    let mut m = QMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (r, v) in c.iter().enumerate() {
            m[(r, j)] = v.clone();
        }
    }
    m
}

/// Hilbert function of `A^f` as ranks of the action matrices.
pub fn hilbert_oracle(f: &Form) -> Vec<u64> {
    (0..=f.degree()).map(|i| action_matrix(f, i, |m| m.clone()).rank() as u64).collect()
}

/// `{phi in T_i : phi * theta ∘ f = 0}` as coefficient vectors.
pub fn colon_preimage(f: &Form, theta: &Form, i: u32) -> Vec<Vec<Q>> {
    if i + theta.degree() > f.degree() {
        return QMatrix::identity(monomial_basis(f.nvars(), i).len()).row_vecs();
    }
    action_matrix(f, i, |m| m.mul(theta)).kernel_basis()
}

fn same_span(a: &[Vec<Q>], b: &[Vec<Q>], cols: usize) -> bool {
    let ma = QMatrix::from_rows(a, cols).unwrap();
    let mb = QMatrix::from_rows(b, cols).unwrap();
    ma.rank() == mb.rank() && b.iter().all(|v| ma.in_row_space(v).unwrap())
}

pub fn check_gorenstein(f: &Form) -> Result<(), TestCaseError> {
    let hf = hilbert_function(f).unwrap();
    prop_assert!(hf.is_symmetric(), "{:?} for {}", hf.values, f);
    prop_assert_eq!(&hf.values, &hilbert_oracle(f));
    prop_assert_eq!(hf.values[0], 1);
    Ok(())
}

pub fn check_colon(f: &Form, theta: &Form) -> Result<(), TestCaseError> {
    for i in 0..=f.degree() {
        let piece = colon_piece(f, theta, i).unwrap();
        let ours: Vec<Vec<Q>> = piece.basis.iter().map(Form::coeff_vector).collect();
        let brute = colon_preimage(f, theta, i);
        let cols = monomial_basis(f.nvars(), i).len();
        prop_assert!(same_span(&ours, &brute, cols), "degree {} for f = {}, theta = {}", i, f, theta);
    }
    Ok(())
}

/// `(g, h)` in disjoint variable blocks of one ring.
pub fn arb_disjoint_pair() -> impl Strategy<Value = (Form, Form)> {
    (arb_form(2, 1, 4), arb_form(2, 1, 4)).prop_map(|(g, h)| {
        let (ng, nh) = (g.nvars(), h.nvars());
        let mut gg = g;
        for _ in 0..nh {
            gg = gg.insert_var(gg.nvars());
        }
        let mut hh = h;
        for _ in 0..ng {
            hh = hh.insert_var(0);
        }
        (gg, hh)
    })
}

pub fn check_tensor(g: &Form, h: &Form) -> Result<(), TestCaseError> {
    let prod = g.mul(h);
    prop_assert_eq!(apolar_length(&prod), apolar_length(g) * apolar_length(h), "g = {}, h = {}", g, h);
    Ok(())
}

/// Nonzero `psi` of degree `b` with `d >= b`.
pub fn arb_psi() -> impl Strategy<Value = (Form, u32)> {
    (2usize..=4, 1u32..=3, 0u32..=4)
        .prop_flat_map(|(n, b, extra)| (Just(n), Just(b), Just(b + extra), prop::collection::vec((0usize..1000, -6i64..=6), 1..=4)))
        .prop_map(|(n, b, d, picks)| (form_from(n, b, &picks), d))
        .prop_filter("nonzero", |(p, _)| !p.is_zero())
}

pub fn check_surjective(psi: &Form, d: u32) -> Result<(), TestCaseError> {
    let m = differentiation_map(psi, d);
    let target = dim_forms(psi.nvars(), i64::from(d) - i64::from(psi.degree()));
    prop_assert_eq!(m.rank() as u64, target, "psi = {}, d = {}", psi, d);
    Ok(())
}

/// Univariate polynomial helpers for the binary-rank oracle, lowest degree first.
fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().is_some_and(|c| *c == q(0)) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let factor = r.last().unwrap() / b.last().unwrap();
        for (j, c) in b.iter().enumerate() {
            r[shift + j] = &r[shift + j] - &factor * c;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd_degree(a: &[Q], b: &[Q]) -> usize {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a.len().saturating_sub(1)
}

/// Squarefree test for a binary form given by its coefficients of
/// `x^(e - j) y^j`, via the chart `x = 1` plus the multiplicity at infinity.
pub fn binary_squarefree(coeffs: &[Q]) -> bool {
    let e = coeffs.len() - 1;
    // p(t) = phi(1, t)
    let p = trim(coeffs.to_vec());
    if p.is_empty() {
        return false;
    }
    if e - (p.len() - 1) > 1 {
        return false;
    }
    let dp: Vec<Q> = p.iter().enumerate().skip(1).map(|(j, c)| c * q(j as i64)).collect();
    p.len() == 1 || poly_gcd_degree(&p, &dp) == 0
}

/// Smallest `r` whose apolar piece `(f^⊥)_r` contains a squarefree form,
/// testing basis vectors and seeded random combinations.
pub fn binary_rank_oracle(f: &Form) -> u32 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for r in 1..=f.degree() {
        let ker = action_matrix(f, r, |m| m.clone()).kernel_basis();
        if ker.is_empty() {
            continue;
        }
        // monomial_basis(2, r) lists x^r first; reorder to powers of y.
        let basis = monomial_basis(2, r);
        let as_coeffs = |v: &[Q]| {
            let mut c = vec![q(0); r as usize + 1];
            for (e, x) in basis.iter().zip(v) {
                c[e[1] as usize] = x.clone();
            }
            c
        };
        let mut candidates: Vec<Vec<Q>> = ker.clone();
        for _ in 0..8 {
            let mut comb = vec![q(0); basis.len()];
            for v in &ker {
                let w = q(rng.gen_range(-1000..=1000));
                for (c, x) in comb.iter_mut().zip(v) {
                    *c += &w * x;
                }
            }
            candidates.push(comb);
        }
        if candidates.iter().any(|v| binary_squarefree(&as_coeffs(v))) {
            return r;
        }
    }
    f.degree() + 1
}

pub fn lin(c: &[i64]) -> LinearForm {
    LinearForm::from_i64(c)
}
