//! Upper bounds on rank: exact power-sum witnesses, binary forms, complete
//! intersections, and a numerical fitter.

mod numeric;
pub mod univariate;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::apolarity::{apolar_graded_piece, apolar_length, minimal_generators};
use crate::error::{Error, Result};
use crate::polyring::{power_sum_in, Form, LinearForm};
use crate::qlinalg::QMatrix;
use crate::rational::{fmt_q, parse_q, to_f64, Q};
use univariate::UPoly;

pub use numeric::{numerical_decompose, residual_of, FitReport, NumericOptions};

/// A coefficient in a decomposition: exact rationals serialize as `"p/q"`
/// strings, floats as JSON numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => to_f64(q),
            Scalar::Float(x) => *x,
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => s.serialize_str(&fmt_q(q)),
            Scalar::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
            Num(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse_q(&s).map(Scalar::Exact).map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Scalar::Exact(Q::from_integer(i.into()))),
            Raw::Num(x) => Ok(Scalar::Float(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: Scalar,
    pub point: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub degree: u32,
    pub terms: Vec<Term>,
    pub exact: bool,
}

impl Decomposition {
    pub fn from_exact(degree: u32, terms: &[(Q, LinearForm)]) -> Self {
        Self {
            degree,
            terms: terms
                .iter()
                .map(|(c, l)| Term {
                    coef: Scalar::Exact(c.clone()),
                    point: l.coeffs.iter().cloned().map(Scalar::Exact).collect(),
                })
                .collect(),
            exact: true,
        }
    }

    /// Builds from a bare term list; exact iff every scalar is.
    pub fn from_terms(degree: u32, terms: Vec<Term>) -> Self {
        let exact = terms.iter().all(|t| {
            matches!(t.coef, Scalar::Exact(_)) && t.point.iter().all(|x| matches!(x, Scalar::Exact(_)))
        });
        Self { degree, terms, exact }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The exact `(coefficient, point)` pairs; `None` if any scalar is a float.
    pub fn exact_terms(&self) -> Option<Vec<(Q, LinearForm)>> {
        self.terms
            .iter()
            .map(|t| {
                let c = match &t.coef {
                    Scalar::Exact(q) => q.clone(),
                    Scalar::Float(_) => return None,
                };
                let p = t
                    .point
                    .iter()
                    .map(|x| match x {
                        Scalar::Exact(q) => Some(q.clone()),
                        Scalar::Float(_) => None,
                    })
                    .collect::<Option<Vec<_>>>()?;
                Some((c, LinearForm::new(p)))
            })
            .collect()
    }
}

/// True iff the terms expand exactly to `f`. Errors on inexact input, on
/// points in the wrong ring, and on proportional or zero points.
pub fn verify_decomposition(f: &Form, dec: &Decomposition) -> Result<bool> {
    let terms = dec
        .exact_terms()
        .filter(|_| dec.exact)
        .ok_or_else(|| Error::Precondition("only exact decompositions can be verified".into()))?;
    for (_, l) in &terms {
        if l.nvars() != f.nvars() {
            return Err(Error::DimensionMismatch { expected: f.nvars(), got: l.nvars() });
        }
        if l.is_zero() {
            return Err(Error::InvalidInput("a point of the decomposition is zero".into()));
        }
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if terms[i].1.is_proportional(&terms[j].1) {
                return Err(Error::InvalidInput(format!("points {i} and {j} are proportional")));
            }
        }
    }
    if dec.degree != f.degree() {
        return Ok(false);
    }
    Ok(power_sum_in(f.nvars(), &terms, dec.degree)? == f.clone() || (f.is_zero() && terms.is_empty()))
}

fn require_binary(f: &Form) -> Result<()> {
    if f.nvars() != 2 {
        return Err(Error::InvalidInput(format!("expected a binary form, got {} variables", f.nvars())));
    }
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero form".into()));
    }
    Ok(())
}

/// True iff the binary form has no repeated linear factor.
pub fn squarefree_binary(f: &Form) -> Result<bool> {
    require_binary(f)?;
    Ok(UPoly::dehomogenize(f, 0).is_squarefree() && UPoly::dehomogenize(f, 1).is_squarefree())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryRank {
    pub rank: u32,
    pub generator_degrees: (u32, u32),
    /// Present when a generator of degree `rank` splits over Q.
    pub witness: Option<Decomposition>,
}

/// Points `l` with `phi(l) = 0`, when `phi` is squarefree and splits into
/// rational linear factors.
fn rational_zeros(phi: &Form) -> Option<Vec<LinearForm>> {
    let p = UPoly::dehomogenize(phi, 0);
    let roots = p.rational_roots()?;
    let mut pts: Vec<LinearForm> =
        roots.into_iter().map(|t| LinearForm::new(vec![t, Q::from_integer(1.into())])).collect();
    if p.degree().unwrap_or(0) < phi.degree() as usize {
        pts.push(LinearForm::from_i64(&[1, 0]));
    }
    (pts.len() == phi.degree() as usize).then_some(pts)
}

/// Exact coefficients for `f = sum c_i l_i^d`, if they exist.
fn solve_coefficients(f: &Form, points: &[LinearForm]) -> Option<Vec<(Q, LinearForm)>> {
    let d = f.degree();
    let cols: Vec<Vec<Q>> = points.iter().map(|l| l.to_form().pow(d).coeff_vector()).collect();
    let nrows = f.coeff_vector().len();
    let mut a = QMatrix::zeros(nrows, points.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            a[(i, j)] = x.clone();
        }
    }
    let c = a.solve(&f.coeff_vector()).ok()??;
    Some(c.into_iter().zip(points.iter().cloned()).collect())
}

fn witness_from(f: &Form, phi: &Form) -> Option<Decomposition> {
    if !squarefree_binary(phi).ok()? {
        return None;
    }
    let pts = rational_zeros(phi)?;
    let terms = solve_coefficients(f, &pts)?;
    let dec = Decomposition::from_exact(f.degree(), &terms);
    verify_decomposition(f, &dec).ok()?.then_some(dec)
}

/// Sylvester's theorem: with minimal generators of degrees `d1 <= d2`,
/// the rank is `d1` if some element of `(f^⊥)_(d1)` is squarefree and
/// `d2` otherwise. When `d1 < d2` that piece is spanned by one generator;
/// when `d1 = d2` the two generators have no common root and a general
/// member of the pencil is squarefree.
pub fn binary_rank(f: &Form) -> Result<BinaryRank> {
    require_binary(f)?;
    let d = f.degree();
    if d == 0 {
        return Ok(BinaryRank {
            rank: 1,
            generator_degrees: (1, 1),
            witness: Some(Decomposition::from_exact(0, &[(f.coeff(&[0, 0]), LinearForm::from_i64(&[1, 0]))])),
        });
    }
    let gens = minimal_generators(f, d + 1);
    if gens.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "binary apolar ideal with {} minimal generators",
            gens.len()
        )));
    }
    let (d1, phi1) = (gens[0].0, &gens[0].1);
    let (d2, phi2) = (gens[1].0, &gens[1].1);
    if d1 == d2 {
        let witness = (0i64..12).find_map(|t| {
            let t = if t % 2 == 0 { t / 2 } else { -(t + 1) / 2 };
            let member = phi1.add(&phi2.scale(&Q::from_integer(t.into()))).ok()?;
            witness_from(f, &member)
        });
        return Ok(BinaryRank { rank: d1, generator_degrees: (d1, d2), witness });
    }
    if squarefree_binary(phi1)? {
        Ok(BinaryRank { rank: d1, generator_degrees: (d1, d2), witness: witness_from(f, phi1) })
    } else {
        Ok(BinaryRank { rank: d2, generator_degrees: (d1, d2), witness: None })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CiRank {
    pub rank: u64,
    pub degrees: Vec<u32>,
    /// The square of a linear form among the generators, in dual variables.
    pub square: String,
}

/// Symmetric matrix of a quadric; rank 1 iff it is the square of a linear
/// form (up to scale).
fn is_rank_one_quadric(q: &Form) -> bool {
    let n = q.nvars();
    let mut m = QMatrix::zeros(n, n);
    for (e, c) in q.terms() {
        let idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, e[i] as usize)).collect();
        if idx[0] == idx[1] {
            m[(idx[0], idx[0])] += c;
        } else {
            let half = c / Q::from_integer(2.into());
            m[(idx[0], idx[1])] += &half;
            m[(idx[1], idx[0])] += &half;
        }
    }
    m.rank() == 1
}

/// Rank of `f` when `f^⊥` is a complete intersection of `n` generators of
/// degrees `2 = d1 <= ... <= dn` and some square `alpha^2` of a linear form
/// lies in `(f^⊥)_2`: then `r(f) = d2 * ... * dn`. Square search covers the
/// echelon basis of `(f^⊥)_2` and the coordinate squares.
pub fn ci_rank(f: &Form) -> Option<CiRank> {
    if f.is_zero() {
        return None;
    }
    let n = f.nvars();
    let gens = minimal_generators(f, f.degree() + 1);
    if gens.len() != n {
        return None;
    }
    let degrees: Vec<u32> = gens.iter().map(|(d, _)| *d).collect();
    let product: u64 = degrees.iter().map(|&d| u64::from(d)).product();
    if apolar_length(f) != product || degrees[0] != 2 {
        return None;
    }
    let piece = apolar_graded_piece(f, 2);
    let coordinate_squares = (0..n).map(|i| Form::var(n, i).pow(2));
    let square = piece
        .basis
        .iter().filter(|&x| is_rank_one_quadric(x)).cloned()
        .chain(coordinate_squares.filter(|s| piece.contains(s)))
        .next()?;
    Some(CiRank {
        rank: degrees[1..].iter().map(|&d| u64::from(d)).product(),
        degrees,
        square: square.primitive().to_dual_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_form;
    use crate::rational::{q, q_frac};

    fn f3(s: &str) -> Form {
        parse_form(s, 3).unwrap()
    }
    fn f2(s: &str) -> Form {
        parse_form(s, 2).unwrap()
    }

    pub(crate) fn four_cubes() -> Decomposition {
        // 24 xyz = (x+y+z)^3 - (x+y-z)^3 - (x-y+z)^3 + (x-y-z)^3
        let t = |c: i64, p: [i64; 3]| (q_frac(c, 24), LinearForm::from_i64(&p));
        Decomposition::from_exact(
            3,
            &[t(1, [1, 1, 1]), t(-1, [1, 1, -1]), t(-1, [1, -1, 1]), t(1, [1, -1, -1])],
        )
    }

    #[test]
    fn verify_examples() {
        assert!(verify_decomposition(&f3("x*y*z"), &four_cubes()).unwrap());
        let split = Decomposition::from_exact(
            5,
            &[(q_frac(1, 10), LinearForm::from_i64(&[0, 1, 1])), (q_frac(-1, 10), LinearForm::from_i64(&[0, 1, -1]))],
        );
        assert!(verify_decomposition(&f3("y^4*z + 2*y^2*z^3 + 1/5*z^5"), &split).unwrap());
        let wrong = Decomposition::from_exact(
            3,
            &[(q(1), LinearForm::from_i64(&[1, 2, 0])), (q(2), LinearForm::from_i64(&[0, 1, 3])), (q(-1), LinearForm::from_i64(&[1, 0, 1]))],
        );
        assert!(!verify_decomposition(&f3("x*y*z"), &wrong).unwrap());
        let prop = Decomposition::from_exact(
            3,
            &[(q(1), LinearForm::from_i64(&[1, 2, 0])), (q(1), LinearForm::from_i64(&[2, 4, 0]))],
        );
        assert!(verify_decomposition(&f3("x^3"), &prop).is_err());
        let mut float = four_cubes();
        float.exact = false;
        assert!(verify_decomposition(&f3("x*y*z"), &float).is_err());
    }

    #[test]
    fn json_format() {
        let dec = four_cubes();
        let js = serde_json::to_string(&dec.terms).unwrap();
        assert!(js.starts_with(r#"[{"coef":"1/24","point":["1","1","1"]}"#), "{js}");
        let back: Vec<Term> = serde_json::from_str(&js).unwrap();
        assert_eq!(Decomposition::from_terms(3, back), dec);
        let mixed: Vec<Term> = serde_json::from_str(r#"[{"coef":0.5,"point":[1,"2/3"]}]"#).unwrap();
        assert!(!Decomposition::from_terms(1, mixed).exact);
    }

    #[test]
    fn squarefree_examples() {
        assert!(squarefree_binary(&f2("a^2 - b^2")).unwrap());
        assert!(!squarefree_binary(&f2("a^2")).unwrap());
        assert!(!squarefree_binary(&f2("a*b^2")).unwrap());
        let prod = f2("a - 2*b").mul(&f2("3*a + b")).mul(&f2("a + 5*b")).mul(&f2("b"));
        assert!(squarefree_binary(&prod).unwrap());
        assert!(!squarefree_binary(&prod.mul(&f2("b"))).unwrap());
        assert!(squarefree_binary(&f3("a")).is_err());
    }

    #[test]
    fn binary_rank_examples() {
        let r = binary_rank(&f2("x^4*y + 2*x^2*y^3 + 1/5*y^5")).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.generator_degrees, (2, 5));
        let w = r.witness.unwrap();
        assert!(verify_decomposition(&f2("x^4*y + 2*x^2*y^3 + 1/5*y^5"), &w).unwrap());
        for d in 1..7 {
            let f = parse_form(&format!("x^{d}"), 2).unwrap();
            let r = binary_rank(&f).unwrap();
            assert_eq!(r.rank, 1);
            assert!(verify_decomposition(&f, &r.witness.unwrap()).unwrap());
        }
        assert_eq!(binary_rank(&f2("x*y^3")).unwrap().rank, 4);
        assert_eq!(binary_rank(&f2("x*y")).unwrap().rank, 2);
        assert_eq!(binary_rank(&f2("x^2*y^2")).unwrap().rank, 3);
    }

    #[test]
    fn ci_rank_examples() {
        let c = ci_rank(&f3("x*y*z^3 - 2*y^2*z^3 - 1/5*z^5")).unwrap();
        assert_eq!(c.rank, 8);
        assert_eq!(c.degrees, vec![2, 2, 4]);
        let c = ci_rank(&f3("x*y^2*z^2")).unwrap();
        assert_eq!(c.rank, 9);
        assert_eq!(c.degrees, vec![2, 3, 3]);
        let generic = f3("x^3 + 2*y^3 - z^3 + x*y*z + 3*x^2*z - y*z^2");
        assert!(ci_rank(&generic).is_none());
        assert!(is_rank_one_quadric(&f3("a^2 + 2*a*b + b^2")));
        assert!(!is_rank_one_quadric(&f3("a*b")));
    }
}
