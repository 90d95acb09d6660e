//! Dense univariate polynomials over Q, for dehomogenized binary forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::polyring::Form;
use crate::rational::{primitive_integer_vector, Q};

/// Coefficients in increasing degree, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly(pub Vec<Q>);

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Self(c)
    }

    /// `f(t, 1)` for a binary form (`chart = 0`) or `f(1, t)` (`chart = 1`).
    pub fn dehomogenize(f: &Form, chart: usize) -> Self {
        let mut c = vec![Q::zero(); f.degree() as usize + 1];
        for (e, x) in f.terms() {
            let j = if chart == 0 { e[0] } else { e[1] } as usize;
            c[j] += x;
        }
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(i.into())).collect(),
        )
    }

    pub fn rem(&self, m: &Self) -> Self {
        let dm = m.degree().expect("division by zero polynomial");
        let lead = m.0[dm].clone();
        let mut r = self.0.clone();
        while r.len() > dm && !r.is_empty() {
            let top = r.len() - 1;
            let q = &r[top] / &lead;
            for (i, c) in m.0.iter().enumerate() {
                r[top - dm + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Self::new(r)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        match a.0.last().cloned() {
            Some(l) => Self::new(a.0.iter().map(|c| c / &l).collect()),
            None => a,
        }
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }

    /// True iff the polynomial has no repeated root.
    pub fn is_squarefree(&self) -> bool {
        if self.degree().unwrap_or(0) == 0 {
            return true;
        }
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Distinct rational roots, or `None` when the leading or trailing
    /// coefficient is too large to enumerate divisors of.
    pub fn rational_roots(&self) -> Option<Vec<Q>> {
        if self.is_zero() {
            return None;
        }
        let ints = primitive_integer_vector(&self.0);
        let low = ints.iter().position(|c| !c.is_zero())?;
        let mut roots = Vec::new();
        if low > 0 {
            roots.push(Q::zero());
        }
        let a0 = ints[low].abs().to_u64()?;
        let an = ints.last()?.abs().to_u64()?;
        const LIMIT: u64 = 1 << 40;
        if a0 > LIMIT || an > LIMIT {
            return None;
        }
        for p in divisors(a0) {
            for q in divisors(an) {
                if p.gcd(&q) != 1 {
                    continue;
                }
                for sign in [1i64, -1] {
                    let t = Q::new(BigInt::from(p) * sign, BigInt::from(q));
                    if self.eval(&t).is_zero() && !roots.contains(&t) {
                        roots.push(t);
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

/// `true` when every coefficient is an integer multiple of the leading one
/// over a unit; used only in tests.
#[cfg(test)]
fn is_monic(p: &UPoly) -> bool {
    p.0.last().is_some_and(num_traits::One::is_one)
}
