//! Catalecticants, Hilbert functions and graded pieces of apolar ideals.
//!
//! Everything here reduces to ranks and kernels of catalecticant matrices:
//! `h_i = rank Cat_i(F)` and `(F^⊥)_i = ker Cat_i(F)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{apply, basis_index, falling_product, monomial_basis, Form};
use crate::qlinalg::QMatrix;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertFunction {
    pub values: Vec<u64>,
}

impl HilbertFunction {
    pub fn length(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.values.iter().eq(self.values.iter().rev())
    }
}

/// A basis of one graded piece of an ideal in the dual ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPiece {
    pub degree: u32,
    pub nvars: usize,
    pub basis: Vec<Form>,
}

impl GradedPiece {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// All of `T_i`, as monomials.
    pub fn full(nvars: usize, degree: u32) -> Self {
        let basis = monomial_basis(nvars, degree)
            .into_iter()
            .map(|e| Form::monomial(e, Q::from_integer(1.into())))
            .collect();
        Self { degree, nvars, basis }
    }

    pub fn as_matrix(&self) -> QMatrix {
        let rows: Vec<Vec<Q>> = self.basis.iter().map(Form::coeff_vector).collect();
        let cols = monomial_basis(self.nvars, self.degree).len();
        QMatrix::from_rows(&rows, cols).expect("consistent piece")
    }

    pub fn contains(&self, theta: &Form) -> bool {
        if theta.is_zero() {
            return true;
        }
        theta.degree() == self.degree
            && self.as_matrix().in_row_space(&theta.coeff_vector()).expect("same ring")
    }

    fn from_vectors(nvars: usize, degree: u32, vecs: Vec<Vec<Q>>) -> Self {
        let cols = monomial_basis(nvars, degree).len();
        let echelon = QMatrix::from_rows(&vecs, cols).expect("consistent").row_space_basis();
        let basis = echelon
            .iter()
            .map(|v| Form::from_coeff_vector(nvars, degree, v).expect("sized"))
            .collect();
        Self { degree, nvars, basis }
    }
}

/// Matrix of `T_i -> S_{d-i}, theta -> theta ∘ f`: rows indexed by
/// `monomial_basis(n, i)`, columns by `monomial_basis(n, d - i)`.
pub fn catalecticant(f: &Form, i: u32) -> QMatrix {
    let n = f.nvars();
    let rows = monomial_basis(n, i);
    if i > f.degree() {
        return QMatrix::zeros(rows.len(), 0);
    }
    let cols = monomial_basis(n, f.degree() - i);
    let row_idx = basis_index(&rows);
    let col_idx = basis_index(&cols);
    let mut m = QMatrix::zeros(rows.len(), cols.len());
    for (e, c) in f.terms() {
        for t in &rows {
            if t.iter().zip(e).any(|(a, b)| a > b) {
                continue;
            }
            let rest: Vec<u32> = e.iter().zip(t).map(|(a, b)| a - b).collect();
            let v = c * Q::from_integer(falling_product(e, t));
            m[(row_idx[t], col_idx[&rest])] += v;
        }
    }
    m
}

pub fn hilbert_function(f: &Form) -> Result<HilbertFunction> {
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero form has no apolar algebra".into()));
    }
    let values = (0..=f.degree()).map(|i| catalecticant(f, i).rank() as u64).collect();
    Ok(HilbertFunction { values })
}

/// `dim Diff(f)`; zero for the zero form.
pub fn apolar_length(f: &Form) -> u64 {
    hilbert_function(f).map_or(0, |h| h.length())
}

/// `(f^⊥)_i` as an echelonized basis. Degrees above `d` give all of `T_i`.
pub fn apolar_graded_piece(f: &Form, i: u32) -> GradedPiece {
    if i > f.degree() || f.is_zero() {
        return GradedPiece::full(f.nvars(), i);
    }
    let kernel = catalecticant(f, i).transpose().kernel_basis();
    GradedPiece::from_vectors(f.nvars(), i, kernel)
}

/// Matrix of `S_d -> S_(d-b), g -> psi ∘ g` for `psi` of degree `b`:
/// rows indexed by `monomial_basis(n, d - b)`, columns by
/// `monomial_basis(n, d)`.
pub fn differentiation_map(psi: &Form, d: u32) -> QMatrix {
    let n = psi.nvars();
    let cols = monomial_basis(n, d);
    let rows = monomial_basis(n, d.saturating_sub(psi.degree()));
    if psi.degree() > d {
        return QMatrix::zeros(0, cols.len());
    }
    let index = basis_index(&rows);
    let mut m = QMatrix::zeros(rows.len(), cols.len());
    for (c, e) in cols.iter().enumerate() {
        let img = apply(psi, &Form::monomial(e.clone(), Q::from_integer(1.into())));
        for (r, x) in img.terms() {
            m[(index[r], c)] = x.clone();
        }
    }
    m
}

/// `T_1 · piece`, as coordinate vectors in degree `piece.degree + 1`.
fn products_with_linear(piece: &GradedPiece) -> Vec<Vec<Q>> {
    let n = piece.nvars;
    let mut out = Vec::with_capacity(n * piece.basis.len());
    for g in &piece.basis {
        for j in 0..n {
            out.push(g.mul(&Form::var(n, j)).coeff_vector());
        }
    }
    out
}

/// Minimal generators of `f^⊥` in degrees `0..=up_to`: for each degree, the
/// echelon basis elements of `(f^⊥)_i` not in the span of `T_1 · (f^⊥)_{i-1}`
/// and the previously chosen ones.
pub fn minimal_generators(f: &Form, up_to: u32) -> Vec<(u32, Form)> {
    let n = f.nvars();
    let mut gens = Vec::new();
    if f.is_zero() {
        gens.push((0, Form::one(n)));
        return gens;
    }
    let mut prev = apolar_graded_piece(f, 0);
    for i in 1..=up_to {
        let piece = apolar_graded_piece(f, i);
        let cols = monomial_basis(n, i).len();
        let mut span = products_with_linear(&prev);
        let mut rank = QMatrix::from_rows(&span, cols).expect("sized").rank();
        if rank < piece.dim() {
            for g in &piece.basis {
                span.push(g.coeff_vector());
                let r = QMatrix::from_rows(&span, cols).expect("sized").rank();
                if r > rank {
                    rank = r;
                    gens.push((i, g.clone()));
                    if rank == piece.dim() {
                        break;
                    }
                } else {
                    span.pop();
                }
            }
        }
        prev = piece;
    }
    gens
}

/// `((theta ∘ f)^⊥)_i`, which equals `(f^⊥ : theta)_i`.
pub fn colon_piece(f: &Form, theta: &Form, i: u32) -> Result<GradedPiece> {
    if theta.is_zero() {
        return Err(Error::Precondition("colon by the zero form".into()));
    }
    if theta.nvars() != f.nvars() {
        return Err(Error::DimensionMismatch { expected: f.nvars(), got: theta.nvars() });
    }
    let g = apply(theta, f);
    if g.is_zero() {
        return Ok(GradedPiece::full(f.nvars(), i));
    }
    Ok(apolar_graded_piece(&g, i))
}

/// `length(T / (f^⊥ + theta)) = al(f) - al(theta ∘ f)`.
pub fn quotient_length(f: &Form, theta: &Form) -> Result<u64> {
    if theta.is_zero() {
        return Err(Error::Precondition("quotient by the zero form".into()));
    }
    Ok(apolar_length(f) - apolar_length(&apply(theta, f)))
}
