//! Rows of generic, monomial and lower/upper bounds on the maximum rank.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{algen, generic_rank, max_monomial_rank};

const LITERATURE: &str = include_str!("../../data/literature.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerSource {
    Known,
    Construction,
    Monomial,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub d: u32,
    pub generic: u64,
    pub monomial_max: u64,
    pub lower: u64,
    pub lower_source: LowerSource,
    /// From the bundled literature file, never computed.
    pub upper_literature: Option<u64>,
}

#[derive(Deserialize)]
struct Entry {
    n: usize,
    d: u32,
    value: u64,
}

#[derive(Deserialize)]
struct Literature {
    known_maximum: Vec<Entry>,
    upper_bound: Vec<Entry>,
}

fn literature() -> Literature {
    serde_json::from_str(LITERATURE).expect("bundled literature file parses")
}

fn lookup(entries: &[Entry], n: usize, d: u32) -> Option<u64> {
    entries.iter().find(|e| e.n == n && e.d == d).map(|e| e.value)
}

/// One row. Sources are ranked known > construction > monomial > generic on
/// ties; the construction value `algen(n-1, d-1) + 1` applies to odd `d`.
pub fn table_row(n: usize, d: u32) -> TableRow {
    let lit = literature();
    let generic = generic_rank(n, d);
    let monomial_max = max_monomial_rank(n, d);
    let mut candidates = Vec::new();
    if let Some(v) = lookup(&lit.known_maximum, n, d) {
        candidates.push((v, LowerSource::Known));
    }
    if d % 2 == 1 && d >= 3 && n >= 3 {
        candidates.push((algen(n - 1, d - 1) + 1, LowerSource::Construction));
    }
    candidates.push((monomial_max, LowerSource::Monomial));
    candidates.push((generic, LowerSource::Generic));
    let (lower, lower_source) = candidates
        .iter()
        .copied()
        .reduce(|best, c| if c.0 > best.0 { c } else { best })
        .expect("nonempty");
    TableRow {
        d,
        generic,
        monomial_max,
        lower,
        lower_source,
        upper_literature: lookup(&lit.upper_bound, n, d),
    }
}

/// Rows for `3 <= d <= dmax`, computed in parallel.
pub fn table(n: usize, dmax: u32) -> Vec<TableRow> {
    (3..=dmax).into_par_iter().map(|d| table_row(n, d)).collect()
}
