//! Numerical power-sum fitting. Results are evidence only: they carry
//! `exact = false` and never feed a certificate.
//!
//! Each restart alternates an exact least-squares solve for the scalars
//! `c_i` with a damped Gauss-Newton step on the points `l_i`, using the
//! Jacobian of the residual projected off the span of the current powers.
//! Steps that do not reduce the residual are retried with more damping.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::decompose::{Decomposition, Scalar, Term};
use crate::error::{Error, Result};
use crate::polyring::{monomial_basis, Exponent, Form};
use crate::rational::to_f64;

#[derive(Debug, Clone)]
pub struct NumericOptions {
    pub tol: f64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self { tol: 1e-8, restarts: 20, max_iters: 3000 }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    /// `|f - sum c_i l_i^d| / |f|` on coefficient vectors.
    pub residual: f64,
    pub decomposition: Decomposition,
    /// Index of the restart that produced the result.
    pub restart: usize,
}

struct Model {
    n: usize,
    d: u32,
    basis: Vec<Exponent>,
    multinomial: Vec<f64>,
}

impl Model {
    fn new(n: usize, d: u32) -> Self {
        let basis = monomial_basis(n, d);
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let multinomial = basis.iter().map(|e| fact(d) / e.iter().map(|&x| fact(x)).product::<f64>()).collect();
        Self { n, d, basis, multinomial }
    }

    fn power(&self, l: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().zip(&self.multinomial).map(|(e, m)| {
                m * e.iter().zip(l).map(|(&k, &x)| x.powi(k as i32)).product::<f64>()
            }),
        )
    }

    /// Derivative of the coefficient vector of `l^d` with respect to `l_j`.
    fn power_derivative(&self, l: &[f64], j: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().zip(&self.multinomial).map(|(e, m)| {
                if e[j] == 0 {
                    return 0.0;
                }
                let rest: f64 = e
                    .iter()
                    .zip(l)
                    .enumerate()
                    .map(|(k, (&p, &x))| if k == j { x.powi(p as i32 - 1) } else { x.powi(p as i32) })
                    .product();
                m * f64::from(e[j]) * rest
            }),
        )
    }

    fn design(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = points.iter().map(|l| self.power(l)).collect();
        DMatrix::from_columns(&cols)
    }
}

struct State {
    points: Vec<Vec<f64>>,
    coefs: DVector<f64>,
    residual: DVector<f64>,
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().svd(true, true).solve(b, 1e-13).expect("svd with u and v")
}

fn evaluate(model: &Model, target: &DVector<f64>, points: Vec<Vec<f64>>) -> State {
    let a = model.design(&points);
    let coefs = least_squares(&a, target);
    let residual = &a * &coefs - target;
    State { points, coefs, residual }
}

/// Rescales each point to unit length, moving the scale into its scalar.
fn normalize(model: &Model, s: &mut State) {
    for (i, l) in s.points.iter_mut().enumerate() {
        let norm = l.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            l.iter_mut().for_each(|x| *x /= norm);
            s.coefs[i] *= norm.powi(model.d as i32);
        }
    }
}

/// One restart. Returns the final state and the residual norm after every
/// iteration (non-increasing by construction).
fn fit_once(model: &Model, target: &DVector<f64>, r: usize, seed: u64, stream: u64, max_iters: usize) -> (State, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let points: Vec<Vec<f64>> =
        (0..r).map(|_| (0..model.n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let scale = target.norm().max(f64::MIN_POSITIVE);
    let mut state = evaluate(model, target, points);
    normalize(model, &mut state);
    let mut history = vec![state.residual.norm()];
    let mut lambda = 1e-3;
    let np = r * model.n;
    for _ in 0..max_iters {
        let current = state.residual.norm();
        if current / scale < 1e-15 {
            break;
        }
        let a = model.design(&state.points);
        let mut jl = DMatrix::<f64>::zeros(model.basis.len(), np);
        for (i, l) in state.points.iter().enumerate() {
            for j in 0..model.n {
                jl.set_column(i * model.n + j, &(model.power_derivative(l, j) * state.coefs[i]));
            }
        }
        let svd = a.clone().svd(true, true);
        let proj = svd.solve(&jl, 1e-13).expect("svd with u and v");
        let jac = &jl - &a * proj;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &state.residual;
        let mut accepted = false;
        while lambda < 1e12 {
            let mut sys = jtj.clone();
            for k in 0..np {
                sys[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let Some(step) = sys.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 2.0;
                continue;
            };
            let moved: Vec<Vec<f64>> = state
                .points
                .iter()
                .enumerate()
                .map(|(i, l)| l.iter().enumerate().map(|(j, x)| x + step[i * model.n + j]).collect())
                .collect();
            let trial = evaluate(model, target, moved);
            let norm = trial.residual.norm();
            if norm.is_finite() && norm < current {
                state = trial;
                normalize(model, &mut state);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 2.0;
        }
        if !accepted {
            break;
        }
        history.push(state.residual.norm().min(*history.last().unwrap()));
    }
    (state, history)
}

fn to_decomposition(d: u32, s: &State) -> Decomposition {
    Decomposition {
        degree: d,
        terms: s
            .points
            .iter()
            .enumerate()
            .map(|(i, l)| Term {
                coef: Scalar::Float(s.coefs[i]),
                point: l.iter().map(|&x| Scalar::Float(x)).collect(),
            })
            .collect(),
        exact: false,
    }
}

/// Best fit of `f` by `r` powers over `opts.restarts` seeded restarts, run
/// in parallel. Restart `t` uses stream `t` of the seeded generator, so the
/// result depends only on `seed` and `opts`.
pub fn numerical_decompose(f: &Form, r: usize, seed: u64, opts: &NumericOptions) -> Result<FitReport> {
    if r == 0 {
        return Err(Error::InvalidInput("rank must be at least 1".into()));
    }
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero form".into()));
    }
    let model = Model::new(f.nvars(), f.degree());
    let target = DVector::from_iterator(model.basis.len(), f.coeff_vector().iter().map(to_f64));
    let scale = target.norm();
    let runs: Vec<(usize, f64, Decomposition)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|t| {
            let (state, _) = fit_once(&model, &target, r, seed, t as u64, opts.max_iters);
            (t, state.residual.norm() / scale, to_decomposition(f.degree(), &state))
        })
        .collect();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    Ok(FitReport { residual: best.1, decomposition: best.2, restart: best.0 })
}

/// Relative residual of a floating-point decomposition against `f`.
pub fn residual_of(f: &Form, dec: &Decomposition) -> f64 {
    let model = Model::new(f.nvars(), f.degree());
    let target = DVector::from_iterator(model.basis.len(), f.coeff_vector().iter().map(to_f64));
    let mut acc = DVector::zeros(model.basis.len());
    for t in &dec.terms {
        let l: Vec<f64> = t.point.iter().map(Scalar::as_f64).collect();
        acc += model.power(&l) * t.coef.as_f64();
    }
    (acc - &target).norm() / target.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_form;

    #[test]
    fn xyz_fits_with_four() {
        let f = parse_form("x*y*z", 3).unwrap();
        let rep = numerical_decompose(&f, 4, 1, &NumericOptions::default()).unwrap();
        assert!(rep.residual < 1e-10, "{}", rep.residual);
        assert!((residual_of(&f, &rep.decomposition) - rep.residual).abs() < 1e-9);
        assert!(!rep.decomposition.exact);
    }

    #[test]
    fn residual_history_is_monotone() {
        let f = parse_form("x*y^2*z^2 + 3*x^5 - y^4*z", 3).unwrap();
        let model = Model::new(3, 5);
        let target = DVector::from_iterator(21, f.coeff_vector().iter().map(to_f64));
        for stream in 0..3 {
            let (_, hist) = fit_once(&model, &target, 6, 9, stream, 200);
            assert!(hist.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    fn max_coef(dec: &Decomposition) -> f64 {
        dec.terms.iter().map(|t| t.coef.as_f64().abs()).fold(0.0, f64::max)
    }

    #[test]
    fn quintic_fits_with_ten_and_degenerates_below() {
        let f = parse_form("x*y*z^3 + y^4*z", 3).unwrap();
        let opts = NumericOptions { restarts: 8, ..Default::default() };
        let ten = numerical_decompose(&f, 10, 1, &opts).unwrap();
        assert!(ten.residual < 1e-8, "{}", ten.residual);
        // Every ternary quintic is a limit of sums of 7 powers, so fewer
        // terms can only approach f with growing scalars.
        let seven = numerical_decompose(&f, 7, 1, &opts).unwrap();
        assert!(seven.residual > 100.0 * ten.residual.max(1e-15));
        assert!(max_coef(&seven.decomposition) > 10.0 * max_coef(&ten.decomposition));
    }

    #[test]
    fn too_few_terms_do_not_fit() {
        // x*y has rank 2; a single power cannot fit it.
        let f = parse_form("x*y", 2).unwrap();
        let rep = numerical_decompose(&f, 1, 1, &NumericOptions { restarts: 4, ..Default::default() }).unwrap();
        assert!(rep.residual > 0.1);
    }
}
