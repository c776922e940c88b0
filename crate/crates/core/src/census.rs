//! Exact counting of synchronizing colorings of one digraph.
//!
//! Colorings are counted over distinguishable edges, so a digraph has
//! `(k!)^n` of them. Parallel edges make many colorings produce the same
//! transition table: every distinct automaton stands for exactly
//! `W = prod_v prod_i m_{v,i}!` colorings, where `m_{v,i}` are the
//! multiplicities of `v`'s destinations. The census therefore enumerates
//! distinct automata only and scales by `W`.
//!
//! Permuting colors preserves synchronization. When some pivot vertex has
//! `k` distinct destinations the color group acts freely on distinct
//! automata, so fixing the pivot's row to its sorted arrangement visits one
//! automaton per orbit of size `k!`.

use std::fmt;
use std::ops::Range;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::sink_reduction;
use crate::digraph::{Automaton, Digraph};
use crate::error::{Error, Result};
use crate::sync::SyncChecker;

pub const DEFAULT_AUTOMATA_BUDGET: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    Full,
    #[default]
    SymmetryReduced,
}

#[derive(Debug, Clone, Copy)]
pub struct CensusOptions {
    pub mode: CensusMode,
    /// Upper bound on the number of distinct automata of a digraph.
    pub budget: u128,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            mode: CensusMode::SymmetryReduced,
            budget: DEFAULT_AUTOMATA_BUDGET,
        }
    }
}

impl CensusOptions {
    pub fn with_mode(mode: CensusMode) -> Self {
        CensusOptions {
            mode,
            ..Default::default()
        }
    }
}

pub fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Exact synchronizing-coloring counts for one digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CensusRecord", into = "CensusRecord")]
pub struct CensusResult {
    pub sync_colorings: u128,
    pub total_colorings: u128,
    pub distinct_automata: u128,
    pub weight: u128,
    pub sync_automata: u128,
    pub ratio: Ratio<u128>,
}

impl CensusResult {
    fn new(
        sync_automata: u128,
        distinct_automata: u128,
        weight: u128,
        total_colorings: u128,
    ) -> Self {
        assert_eq!(
            distinct_automata.checked_mul(weight),
            Some(total_colorings),
            "distinct automata times weight must equal (k!)^n"
        );
        let sync_colorings = sync_automata * weight;
        CensusResult {
            sync_colorings,
            total_colorings,
            distinct_automata,
            weight,
            sync_automata,
            ratio: Ratio::new(sync_colorings, total_colorings),
        }
    }

    pub fn is_totally_synchronizing(&self) -> bool {
        self.sync_colorings == self.total_colorings
    }

    pub fn ratio_f64(&self) -> f64 {
        *self.ratio.numer() as f64 / *self.ratio.denom() as f64
    }
}

/// JSON form: exact integers as decimal strings.
#[derive(Serialize, Deserialize)]
struct CensusRecord {
    sync_colorings: String,
    total_colorings: String,
    distinct_automata: String,
    weight: String,
    sync_automata: String,
    ratio: String,
    ratio_float: f64,
}

impl From<CensusResult> for CensusRecord {
    fn from(c: CensusResult) -> Self {
        CensusRecord {
            sync_colorings: c.sync_colorings.to_string(),
            total_colorings: c.total_colorings.to_string(),
            distinct_automata: c.distinct_automata.to_string(),
            weight: c.weight.to_string(),
            sync_automata: c.sync_automata.to_string(),
            ratio: format!("{}/{}", c.ratio.numer(), c.ratio.denom()),
            ratio_float: (c.ratio_f64() * 1e6).round() / 1e6,
        }
    }
}

impl TryFrom<CensusRecord> for CensusResult {
    type Error = String;

    fn try_from(r: CensusRecord) -> std::result::Result<Self, String> {
        let num = |s: &str| s.parse::<u128>().map_err(|e| format!("{s:?}: {e}"));
        let res = CensusResult::new(
            num(&r.sync_automata)?,
            num(&r.distinct_automata)?,
            num(&r.weight)?,
            num(&r.total_colorings)?,
        );
        if res.sync_colorings != num(&r.sync_colorings)? {
            return Err("sync_colorings inconsistent with sync_automata * weight".into());
        }
        Ok(res)
    }
}

impl fmt::Display for CensusResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} colorings synchronizing (ratio {})",
            self.sync_colorings, self.total_colorings, self.ratio
        )
    }
}

/// Lexicographic next permutation; false when `xs` was the last one.
fn next_permutation(xs: &mut [u8]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// All distinct transition tables of a digraph, indexed in mixed radix
/// (vertex 0 most significant, rows in lexicographic order).
#[derive(Debug, Clone)]
pub struct AutomatonSpace {
    n: usize,
    k: usize,
    /// Flat arrangements (rows of length k) per vertex.
    rows: Vec<Vec<u8>>,
    radix: Vec<u128>,
    total: u128,
}

impl AutomatonSpace {
    pub fn new(d: &Digraph) -> Result<Self> {
        Self::build(d, None)
    }

    /// Space with `pivot`'s row restricted to its sorted arrangement.
    fn pinned(d: &Digraph, pivot: usize) -> Result<Self> {
        Self::build(d, Some(pivot))
    }

    fn build(d: &Digraph, pinned: Option<usize>) -> Result<Self> {
        let (n, k) = (d.n(), d.k());
        let mut rows = Vec::with_capacity(n);
        let mut radix = Vec::with_capacity(n);
        let mut total: u128 = 1;
        for v in 0..n {
            let mut row = d.row(v).to_vec();
            let mut flat = row.clone();
            if pinned != Some(v) {
                while next_permutation(&mut row) {
                    flat.extend_from_slice(&row);
                }
            }
            let count = (flat.len() / k) as u128;
            total = total
                .checked_mul(count)
                .ok_or_else(|| Error::Overflow("distinct automata count exceeds u128".into()))?;
            rows.push(flat);
            radix.push(count);
        }
        Ok(AutomatonSpace {
            n,
            k,
            rows,
            radix,
            total,
        })
    }

    pub fn len(&self) -> u128 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn digits(&self, mut index: u128) -> Vec<usize> {
        let mut digits = vec![0usize; self.n];
        for v in (0..self.n).rev() {
            digits[v] = (index % self.radix[v]) as usize;
            index /= self.radix[v];
        }
        digits
    }

    fn write_row(&self, v: usize, digit: usize, delta: &mut [u8]) {
        let k = self.k;
        delta[v * k..(v + 1) * k].copy_from_slice(&self.rows[v][digit * k..(digit + 1) * k]);
    }

    /// Visits the tables with indices in `range`, in order. The visitor
    /// returns false to stop early; the return value is false iff stopped.
    pub fn for_each_in(&self, range: Range<u128>, mut visit: impl FnMut(&[u8]) -> bool) -> bool {
        let end = range.end.min(self.total);
        if range.start >= end {
            return true;
        }
        let mut digits = self.digits(range.start);
        let mut delta = vec![0u8; self.n * self.k];
        for v in 0..self.n {
            self.write_row(v, digits[v], &mut delta);
        }
        let mut index = range.start;
        loop {
            if !visit(&delta) {
                return false;
            }
            index += 1;
            if index == end {
                return true;
            }
            // odometer, last vertex fastest
            let mut v = self.n - 1;
            loop {
                digits[v] += 1;
                if (digits[v] as u128) < self.radix[v] {
                    self.write_row(v, digits[v], &mut delta);
                    break;
                }
                digits[v] = 0;
                self.write_row(v, 0, &mut delta);
                v -= 1;
            }
        }
    }

    pub fn automaton(&self, index: u128) -> Option<Automaton> {
        if index >= self.total {
            return None;
        }
        let digits = self.digits(index);
        let mut delta = vec![0u8; self.n * self.k];
        for v in 0..self.n {
            self.write_row(v, digits[v], &mut delta);
        }
        Some(Automaton::from_flat(self.n, self.k, delta))
    }

    /// Synchronizing tables among the indices in `range`.
    pub fn count_sync(&self, range: Range<u128>) -> u128 {
        let mut checker = SyncChecker::new();
        let mut count = 0u128;
        self.for_each_in(range, |delta| {
            if checker.check(self.n, self.k, delta) {
                count += 1;
            }
            true
        });
        count
    }
}

/// Iterator over the distinct automata of a digraph.
pub struct DistinctAutomata {
    space: AutomatonSpace,
    next: u128,
}

impl Iterator for DistinctAutomata {
    type Item = Automaton;

    fn next(&mut self) -> Option<Automaton> {
        let a = self.space.automaton(self.next)?;
        self.next += 1;
        Some(a)
    }
}

/// Streams each distinct transition table consistent with `d` once, rows in
/// lexicographic order, vertices ascending.
pub fn enumerate_distinct_automata(d: &Digraph, budget: u128) -> Result<DistinctAutomata> {
    let space = AutomatonSpace::new(d)?;
    check_budget(space.len(), budget)?;
    Ok(DistinctAutomata { space, next: 0 })
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::Budget {
            what: "distinct automata",
            needed,
            budget,
        });
    }
    Ok(())
}

/// `prod_v k! / prod_i m_{v,i}!`.
pub fn distinct_automata_count(d: &Digraph) -> Result<u128> {
    let kf = factorial(d.k());
    (0..d.n()).try_fold(1u128, |acc, v| {
        acc.checked_mul(kf / vertex_weight(d, v))
            .ok_or_else(|| Error::Overflow("distinct automata count exceeds u128".into()))
    })
}

fn vertex_weight(d: &Digraph, v: usize) -> u128 {
    d.profile(v).iter().map(|&(_, m)| factorial(m)).product()
}

/// `prod_v prod_i m_{v,i}!`.
pub fn coloring_weight(d: &Digraph) -> u128 {
    (0..d.n()).map(|v| vertex_weight(d, v)).product()
}

/// `(k!)^n`.
pub fn total_colorings(d: &Digraph) -> Result<u128> {
    factorial(d.k())
        .checked_pow(d.n() as u32)
        .ok_or_else(|| Error::Overflow(format!("({}!)^{} exceeds u128", d.k(), d.n())))
}

/// First vertex with `k` pairwise-distinct destinations.
pub fn free_pivot(d: &Digraph) -> Option<usize> {
    (0..d.n()).find(|&v| d.row(v).windows(2).all(|w| w[0] != w[1]))
}

/// Plan for one census: the automaton space to scan and the scale factor
/// turning synchronizing tables found there into distinct automata.
struct Plan {
    space: AutomatonSpace,
    orbit: u128,
    distinct: u128,
    weight: u128,
    total: u128,
}

fn plan(d: &Digraph, opts: &CensusOptions) -> Result<Plan> {
    let total = total_colorings(d)?;
    let distinct = distinct_automata_count(d)?;
    check_budget(distinct, opts.budget)?;
    let weight = coloring_weight(d);
    let pivot = match opts.mode {
        CensusMode::Full => None,
        CensusMode::SymmetryReduced => free_pivot(d),
    };
    let (space, orbit) = match pivot {
        Some(p) => (AutomatonSpace::pinned(d, p)?, factorial(d.k())),
        None => (AutomatonSpace::new(d)?, 1),
    };
    debug_assert_eq!(space.len() * orbit, distinct);
    Ok(Plan {
        space,
        orbit,
        distinct,
        weight,
        total,
    })
}

/// Exact census of one digraph, single-threaded.
pub fn census(d: &Digraph, mode: CensusMode) -> Result<CensusResult> {
    census_with(d, &CensusOptions::with_mode(mode))
}

pub fn census_with(d: &Digraph, opts: &CensusOptions) -> Result<CensusResult> {
    let p = plan(d, opts)?;
    let found = p.space.count_sync(0..p.space.len());
    Ok(CensusResult::new(
        found * p.orbit,
        p.distinct,
        p.weight,
        p.total,
    ))
}

/// Census with the automaton stream split into fixed lexicographic chunks
/// counted on the rayon pool. Chunk boundaries do not depend on the pool.
pub fn census_chunked(d: &Digraph, opts: &CensusOptions, chunk: u128) -> Result<CensusResult> {
    let p = plan(d, opts)?;
    let chunk = chunk.max(1);
    let len = p.space.len();
    let chunks: Vec<Range<u128>> = (0..len.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(len))
        .collect();
    let found: u128 = chunks.into_par_iter().map(|r| p.space.count_sync(r)).sum();
    Ok(CensusResult::new(
        found * p.orbit,
        p.distinct,
        p.weight,
        p.total,
    ))
}

/// Every coloring synchronizes; stops at the first one that does not.
pub fn is_totally_synchronizing(d: &Digraph) -> Result<bool> {
    let p = plan(d, &CensusOptions::default())?;
    let mut checker = SyncChecker::new();
    let (n, k) = (d.n(), d.k());
    Ok(p.space
        .for_each_in(0..p.space.len(), |delta| checker.check(n, k, delta)))
}

/// Census through the unique sink component.
///
/// Every coloring of `d` restricts to a coloring of its sink component and
/// is synchronizing iff that restriction is, so both share the same ratio.
/// With several sink components nothing synchronizes.
pub fn count_via_sink(d: &Digraph, opts: &CensusOptions) -> Result<CensusResult> {
    let total = total_colorings(d)?;
    let distinct = distinct_automata_count(d)?;
    let weight = coloring_weight(d);
    let Some(reduction) = sink_reduction(d) else {
        return Ok(CensusResult::new(0, distinct, weight, total));
    };
    let inner = census_with(&reduction.induced, opts)?;
    // Tables outside the sink component are free.
    let outside = distinct / inner.distinct_automata;
    Ok(CensusResult::new(
        inner.sync_automata * outside,
        distinct,
        weight,
        total,
    ))
}
