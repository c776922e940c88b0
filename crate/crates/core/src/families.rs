//! Parametric digraph families with known synchronizing ratios.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::census::{census_with, CensusOptions, CensusResult};
use crate::digraph::{Digraph, MAX_DEGREE, MAX_VERTICES};
use crate::error::{Error, Result};

/// Underlying digraph of the Cerny automaton: `i -> {i, i+1}` for
/// `i < n-1` and `n-1 -> {0, 0}`.
pub fn cerny_digraph(n: usize) -> Result<Digraph> {
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(Error::Domain(format!(
            "cerny needs 2 <= n <= {MAX_VERTICES}, got n = {n}"
        )));
    }
    let rows = (0..n)
        .map(|i| {
            if i + 1 < n {
                vec![i, i + 1]
            } else {
                vec![0, 0]
            }
        })
        .collect();
    Digraph::from_rows(n, 2, rows)
}

/// The 6-vertex 2-out-regular digraph with 30 synchronizing colorings out of 64.
pub fn g30() -> Digraph {
    // 1-indexed: 1,2 -> {3,6}; 3,4 -> {2,5}; 5,6 -> {1,4}
    Digraph::from_rows(
        6,
        2,
        vec![
            vec![2, 5],
            vec![2, 5],
            vec![1, 4],
            vec![1, 4],
            vec![0, 3],
            vec![0, 3],
        ],
    )
    .expect("fixed table is valid")
}

fn check_k(k: usize) -> Result<()> {
    if !(2..=MAX_DEGREE).contains(&k) {
        return Err(Error::Domain(format!(
            "k must lie in 2..={MAX_DEGREE}, got k = {k}"
        )));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::Domain(format!(
            "n must be at most {MAX_VERTICES}, got n = {n}"
        )));
    }
    Ok(())
}

/// Edges `(0,1)` and `(1,2)` once, `(1,1)` and `(0,2)` with multiplicity
/// `k-1`, then the path `2 -> 3 -> ... -> n-1 -> 0` with multiplicity `k`.
/// Ratio `(k-1)/k`.
pub fn gnk(n: usize, k: usize) -> Result<Digraph> {
    if n <= 3 {
        return Err(Error::Domain(format!("gnk needs n > 3, got n = {n}")));
    }
    check_n(n)?;
    check_k(k)?;
    let mut rows = vec![Vec::with_capacity(k); n];
    rows[0].push(1);
    rows[0].extend(std::iter::repeat_n(2, k - 1));
    rows[1].extend(std::iter::repeat_n(1, k - 1));
    rows[1].push(2);
    for (i, row) in rows.iter_mut().enumerate().skip(2) {
        row.extend(std::iter::repeat_n((i + 1) % n, k));
    }
    Digraph::from_unsorted_rows(n, k, rows)
}

/// `(i, i+1)` with multiplicity `k-1` for `i < 2d`, a loop on every odd
/// `2i+1 < 2d`, a shortcut `(2i, 2i+2)` for every `i < d`, and the path
/// `2d -> ... -> n-1 -> 0` with multiplicity `k`. Ratio `1 - 1/k^d`.
pub fn hdnk(d: usize, n: usize, k: usize) -> Result<Digraph> {
    if d == 0 {
        return Err(Error::Domain("hdnk needs d >= 1".into()));
    }
    if n < 3 * d {
        return Err(Error::Domain(format!(
            "hdnk needs n >= 3d, got n = {n}, d = {d}"
        )));
    }
    check_n(n)?;
    check_k(k)?;
    let mut rows = vec![Vec::with_capacity(k); n];
    for (i, row) in rows.iter_mut().enumerate() {
        if i < 2 * d {
            row.extend(std::iter::repeat_n(i + 1, k - 1));
            if i % 2 == 1 {
                row.push(i);
            } else {
                row.push(i + 2);
            }
        } else {
            row.extend(std::iter::repeat_n((i + 1) % n, k));
        }
    }
    Digraph::from_unsorted_rows(n, k, rows)
}

/// A family member with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Cerny { n: usize },
    G30,
    Gnk { n: usize, k: usize },
    Hdnk { d: usize, n: usize, k: usize },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Digraph> {
        match *self {
            FamilySpec::Cerny { n } => cerny_digraph(n),
            FamilySpec::G30 => Ok(g30()),
            FamilySpec::Gnk { n, k } => gnk(n, k),
            FamilySpec::Hdnk { d, n, k } => hdnk(d, n, k),
        }
    }

    /// Closed-form synchronizing ratio.
    pub fn expected_ratio(&self) -> Ratio<u128> {
        match *self {
            FamilySpec::Cerny { .. } => Ratio::from_integer(1),
            FamilySpec::G30 => Ratio::new(30, 64),
            FamilySpec::Gnk { k, .. } => Ratio::new(k as u128 - 1, k as u128),
            FamilySpec::Hdnk { d, k, .. } => {
                let p = (k as u128).pow(d as u32);
                Ratio::new(p - 1, p)
            }
        }
    }

    /// Builds the digraph and compares its census ratio to the closed form.
    pub fn self_check(&self, opts: &CensusOptions) -> Result<SelfCheck> {
        let digraph = self.build()?;
        let census = census_with(&digraph, opts)?;
        Ok(SelfCheck {
            spec: *self,
            expected: self.expected_ratio(),
            passed: census.ratio == self.expected_ratio(),
            census,
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Cerny { n } => write!(f, "cerny(n={n})"),
            FamilySpec::G30 => write!(f, "g30"),
            FamilySpec::Gnk { n, k } => write!(f, "gnk(n={n}, k={k})"),
            FamilySpec::Hdnk { d, n, k } => write!(f, "hdnk(d={d}, n={n}, k={k})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelfCheck {
    pub spec: FamilySpec,
    pub expected: Ratio<u128>,
    pub census: CensusResult,
    pub passed: bool,
}
