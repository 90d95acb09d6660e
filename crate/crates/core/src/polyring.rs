//! Homogeneous forms over the rationals and the differentiation action of the
//! dual ring.
//!
//! A single [`Form`] type represents elements of both the polynomial ring `S`
//! (variables `x, y, z, w`) and its dual `T` (variables `a, b, c, d`, acting as
//! partial derivatives). Which ring a form lives in is a matter of context.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Q};

pub type Exponent = Vec<u32>;

const PRIMAL_NAMES: [char; 4] = ['x', 'y', 'z', 'w'];
const DUAL_NAMES: [char; 4] = ['a', 'b', 'c', 'd'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    nvars: usize,
    degree: u32,
    coeffs: BTreeMap<Exponent, Q>,
}

impl Form {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Self { nvars, degree, coeffs: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars], Q::one())
    }

    pub fn monomial(exp: Exponent, coef: Q) -> Self {
        let nvars = exp.len();
        let degree = exp.iter().sum();
        let mut coeffs = BTreeMap::new();
        if !coef.is_zero() {
            coeffs.insert(exp, coef);
        }
        Self { nvars, degree, coeffs }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    /// Builds a form from terms, summing duplicates and dropping zeros.
    /// `degree` is required only when every coefficient cancels.
    pub fn from_terms<I>(nvars: usize, degree: Option<u32>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Q)>,
    {
        let mut coeffs: BTreeMap<Exponent, Q> = BTreeMap::new();
        let mut seen_degree = degree;
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            if c.is_zero() {
                continue;
            }
            let d: u32 = e.iter().sum();
            match seen_degree {
                Some(s) if s != d => return Err(Error::Inhomogeneous { first: s, second: d }),
                _ => seen_degree = Some(d),
            }
            *coeffs.entry(e).or_insert_with(Q::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Self { nvars, degree: seen_degree.unwrap_or(0), coeffs })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Q)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.coeffs.get(e).cloned().unwrap_or_else(Q::zero)
    }

    /// Indices of variables that occur with a nonzero exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.coeffs.keys().any(|e| e[i] > 0)).collect()
    }

    pub fn scale(&self, c: &Q) -> Form {
        if c.is_zero() {
            return Form::zero(self.nvars, self.degree);
        }
        Form {
            nvars: self.nvars,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.check_compatible(other)?;
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            *coeffs.entry(e.clone()).or_insert_with(Q::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Form { nvars: self.nvars, degree: self.degree, coeffs })
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.scale(&-Q::one()))
    }

    fn check_compatible(&self, other: &Form) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: other.nvars });
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::Inhomogeneous { first: self.degree, second: other.degree });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Form) -> Form {
        assert_eq!(self.nvars, other.nvars, "multiplying forms in different rings");
        let mut coeffs: BTreeMap<Exponent, Q> = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *coeffs.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Form { nvars: self.nvars, degree: self.degree + other.degree, coeffs }
    }

    pub fn pow(&self, k: u32) -> Form {
        let mut acc = Form::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coordinates in `monomial_basis(nvars, degree)`.
    pub fn coeff_vector(&self) -> Vec<Q> {
        monomial_basis(self.nvars, self.degree).iter().map(|e| self.coeff(e)).collect()
    }

    pub fn from_coeff_vector(nvars: usize, degree: u32, v: &[Q]) -> Result<Form> {
        let basis = monomial_basis(nvars, degree);
        if basis.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: v.len() });
        }
        Form::from_terms(nvars, Some(degree), basis.into_iter().zip(v.iter().cloned()))
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        self.coeffs.iter().fold(Q::zero(), |acc, (e, c)| {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc + t
        })
    }

    /// Inserts a new variable at position `at` that does not occur in the form.
    pub fn insert_var(&self, at: usize) -> Form {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| {
                let mut e = e.clone();
                e.insert(at, 0);
                (e, c.clone())
            })
            .collect();
        Form { nvars: self.nvars + 1, degree: self.degree, coeffs }
    }

    /// Removes variable `at`; fails if it occurs.
    pub fn remove_var(&self, at: usize) -> Result<Form> {
        let mut coeffs = BTreeMap::new();
        for (e, c) in &self.coeffs {
            if e[at] != 0 {
                return Err(Error::InvalidInput(format!("variable {at} occurs in the form")));
            }
            let mut e = e.clone();
            e.remove(at);
            coeffs.insert(e, c.clone());
        }
        Ok(Form { nvars: self.nvars - 1, degree: self.degree, coeffs })
    }

    /// Rescales to coprime integer coefficients with a positive leading
    /// (highest in graded-lex) coefficient.
    pub fn primitive(&self) -> Form {
        let basis = monomial_basis(self.nvars, self.degree);
        let v: Vec<Q> = basis.iter().map(|e| self.coeff(e)).collect();
        let ints = crate::rational::primitive_integer_vector(&v);
        Form::from_terms(
            self.nvars,
            Some(self.degree),
            basis.into_iter().zip(ints.into_iter().map(Q::from_integer)),
        )
        .expect("same shape")
    }

    /// Renders with primal variable names (`x, y, z, w` or `x0, x1, ...`).
    pub fn to_primal_string(&self) -> String {
        self.render(false)
    }

    /// Renders with dual variable names (`a, b, c, d` or `a0, a1, ...`).
    pub fn to_dual_string(&self) -> String {
        self.render(true)
    }

    fn render(&self, dual: bool) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !abs.is_one() || e.iter().all(|&k| k == 0) {
                factors.push(fmt_q(&abs));
            }
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = var_name(self.nvars, v, dual);
                factors.push(if k == 1 { name } else { format!("{name}^{k}") });
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_primal_string())
    }
}

fn var_name(nvars: usize, i: usize, dual: bool) -> String {
    match (nvars <= 4, dual) {
        (true, false) => PRIMAL_NAMES[i].to_string(),
        (true, true) => DUAL_NAMES[i].to_string(),
        (false, false) => format!("x{i}"),
        (false, true) => format!("a{i}"),
    }
}

/// JSON shape: `{"nvars": n, "degree": d, "terms": [[[e0, e1, ...], "p/q"], ...]}`.
#[derive(Serialize, Deserialize)]
struct FormRepr {
    nvars: usize,
    degree: u32,
    terms: Vec<(Exponent, String)>,
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormRepr {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.coeffs.iter().rev().map(|(e, c)| (e.clone(), fmt_q(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FormRepr::deserialize(d)?;
        let terms = r
            .terms
            .into_iter()
            .map(|(e, c)| parse_q(&c).map(|c| (e, c)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Form::from_terms(r.nvars, Some(r.degree), terms).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    #[serde(with = "crate::rational::serde_q::vec")]
    pub coeffs: Vec<Q>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Q>) -> Self {
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self { coeffs: coeffs.iter().map(|&c| Q::from_integer(c.into())).collect() }
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn to_form(&self) -> Form {
        let n = self.nvars();
        Form::from_terms(
            n,
            Some(1),
            (0..n).map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, self.coeffs[i].clone())
            }),
        )
        .expect("linear form")
    }

    /// True iff the two forms span the same line.
    pub fn is_proportional(&self, other: &LinearForm) -> bool {
        let n = self.nvars();
        if n != other.nvars() {
            return false;
        }
        for i in 0..n {
            for j in i + 1..n {
                if &self.coeffs[i] * &other.coeffs[j] != &self.coeffs[j] * &other.coeffs[i] {
                    return false;
                }
            }
        }
        true
    }
}

/// Exponent vectors of degree `degree` in `nvars` variables, in graded
/// lexicographic order (`x^2 > xy > y^2`).
pub fn monomial_basis(nvars: usize, degree: u32) -> Vec<Exponent> {
    fn rec(i: usize, left: u32, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        let n = cur.len();
        if i == n - 1 {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    if nvars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, degree, &mut vec![0; nvars], &mut out);
    out
}

/// Position lookup for a monomial basis.
pub fn basis_index(basis: &[Exponent]) -> HashMap<Exponent, usize> {
    basis.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect()
}

/// `C(n+d-1, n-1)`, the dimension of the degree-`d` piece in `n` variables.
pub fn dim_forms(nvars: usize, degree: i64) -> u64 {
    if degree < 0 || nvars == 0 {
        return u64::from(nvars == 0 && degree == 0);
    }
    binomial(nvars as u64 + degree as u64 - 1, nvars as u64 - 1)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r as u64
}

/// `e!/(e-t)!` over all coordinates: the constant produced by differentiating
/// `x^e` by `a^t`.
pub(crate) fn falling_product(e: &[u32], t: &[u32]) -> BigInt {
    let mut r = BigInt::one();
    for (&ei, &ti) in e.iter().zip(t) {
        for j in 0..ti {
            r *= ei - j;
        }
    }
    r
}

/// `theta ∘ f`: each dual variable acts as the corresponding partial
/// derivative. If `theta` has larger degree than `f` the result is the zero
/// form of degree 0.
pub fn apply(theta: &Form, f: &Form) -> Form {
    assert_eq!(theta.nvars, f.nvars, "theta and f live in rings of different dimension");
    if theta.degree > f.degree {
        return Form::zero(f.nvars, 0);
    }
    let mut coeffs: BTreeMap<Exponent, Q> = BTreeMap::new();
    for (t, ct) in &theta.coeffs {
        for (e, cf) in &f.coeffs {
            if t.iter().zip(e).any(|(a, b)| a > b) {
                continue;
            }
            let r: Exponent = e.iter().zip(t).map(|(a, b)| a - b).collect();
            let k = Q::from_integer(falling_product(e, t));
            *coeffs.entry(r).or_insert_with(Q::zero) += ct * cf * k;
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    Form { nvars: f.nvars, degree: f.degree - theta.degree, coeffs }
}

/// Exact expansion of `sum c_i * l_i^d`.
pub fn power_sum(terms: &[(Q, LinearForm)], d: u32) -> Result<Form> {
    let Some(first) = terms.first() else {
        return Err(Error::InvalidInput("empty power sum needs an explicit ring".into()));
    };
    let n = first.1.nvars();
    power_sum_in(n, terms, d)
}

/// Like [`power_sum`] but with the ring given, so that an empty list yields
/// the zero form of degree `d`.
pub fn power_sum_in(nvars: usize, terms: &[(Q, LinearForm)], d: u32) -> Result<Form> {
    let mut acc = Form::zero(nvars, d);
    for (c, l) in terms {
        if l.nvars() != nvars {
            return Err(Error::DimensionMismatch { expected: nvars, got: l.nvars() });
        }
        acc = acc.add(&l.to_form().pow(d).scale(c))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses a form in `nvars` variables. `"0"` gives the zero form of degree 0;
/// use [`parse_form_with_degree`] to fix its degree.
pub fn parse_form(text: &str, nvars: usize) -> Result<Form> {
    parse_form_with_degree(text, nvars, None)
}

pub fn parse_form_with_degree(text: &str, nvars: usize, degree: Option<u32>) -> Result<Form> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, nvars };
    let terms = p.terms()?;
    let f = Form::from_terms(nvars, degree, terms)?;
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn terms(&mut self) -> Result<Vec<(Exponent, Q)>> {
        let mut out = Vec::new();
        let mut sign = Q::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return self.err("empty input"),
            _ => {}
        }
        loop {
            let (e, c) = self.term()?;
            out.push((e, c * &sign));
            match self.peek() {
                None => break,
                Some(b'+') => sign = Q::one(),
                Some(b'-') => sign = -Q::one(),
                Some(c) => return self.err(format!("unexpected character {:?}", c as char)),
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Exponent, Q)> {
        let mut exp = vec![0u32; self.nvars];
        let mut coef = Q::one();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coef *= self.number()?,
                Some(c) if c.is_ascii_alphabetic() => {
                    let v = self.variable()?;
                    let k = if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.skip_ws();
                        self.unsigned()?
                    } else {
                        1
                    };
                    exp[v] += k;
                }
                _ => return self.err("expected a coefficient or a variable"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok((exp, coef));
            }
        }
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii")
    }

    fn unsigned(&mut self) -> Result<u32> {
        let s = self.digits().to_string();
        match s.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err("expected a nonnegative integer exponent"),
        }
    }

    fn number(&mut self) -> Result<Q> {
        let num: BigInt = self.digits().parse().expect("digits");
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den: BigInt = match self.digits().parse() {
                Ok(d) => d,
                Err(_) => return self.err("expected a denominator"),
            };
            if den.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(Q::new(num, den));
        }
        Ok(Q::from_integer(num))
    }

    fn variable(&mut self) -> Result<usize> {
        let c = self.src[self.pos] as char;
        self.pos += 1;
        let indexed = self.pos < self.src.len() && self.src[self.pos].is_ascii_digit();
        if indexed {
            if c != 'x' && c != 'a' {
                return self.err(format!("unknown indexed variable prefix {c:?}"));
            }
            let i = self.unsigned()? as usize;
            if i >= self.nvars {
                return Err(Error::VariableOutOfRange { index: i, nvars: self.nvars });
            }
            return Ok(i);
        }
        let i = PRIMAL_NAMES
            .iter()
            .position(|&n| n == c)
            .or_else(|| DUAL_NAMES.iter().position(|&n| n == c));
        match i {
            Some(i) if i < self.nvars && self.nvars <= 4 => Ok(i),
            Some(i) => Err(Error::VariableOutOfRange { index: i, nvars: self.nvars }),
            None => self.err(format!("unknown variable {c:?}")),
        }
    }
}
