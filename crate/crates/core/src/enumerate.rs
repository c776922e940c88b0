//! Enumeration of nonisomorphic primitive k-out-regular digraphs.
//!
//! Seeded mode starts from one representative of every simple graph on `n`
//! vertices, generates every digraph whose underlying simple graph is that
//! seed (orient each edge, give each direction a multiplicity, pad with
//! loops) and deduplicates per seed by canonical key. The underlying simple
//! graph is an isomorphism invariant, so different seeds never produce
//! isomorphic digraphs.
//!
//! Direct mode scans every labeled destination table and deduplicates
//! globally. It serves as the cross-check for seeded mode.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::is_primitive;
use crate::canon::{
    canonical_form, enumerate_simple_graphs, CanonicalKey, SimpleGraph, MAX_SIMPLE_VERTICES,
};
use crate::digraph::{Digraph, MAX_DEGREE};
use crate::error::{Error, Result};

/// Default cap on labeled tables scanned by direct mode.
pub const DEFAULT_CANDIDATE_BUDGET: u128 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    #[default]
    Seeded,
    Direct,
}

/// One isomorphism class: its key and canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMember {
    pub key: CanonicalKey,
    pub digraph: Digraph,
}

fn check_params(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::Domain("enumeration needs n >= 1 and k >= 1".into()));
    }
    if k > MAX_DEGREE {
        return Err(Error::SizeLimit {
            what: "out-degree",
            value: k,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Calls `visit` with the flat sorted table of every digraph whose
/// underlying simple graph is exactly `g`.
///
/// Edges are processed in sorted order; for edge `{u, v}` the pair
/// `(a, b)` of multiplicities `u -> v` and `v -> u` runs over `a` then `b`
/// ascending with `a + b >= 1`.
pub fn for_each_orientation(g: &SimpleGraph, k: usize, mut visit: impl FnMut(&[u8])) {
    let n = g.n();
    let edges = g.edges();
    let mut out: Vec<Vec<u8>> = vec![Vec::with_capacity(k); n];
    let mut table = vec![0u8; n * k];
    fn rec(
        i: usize,
        edges: &[(usize, usize)],
        k: usize,
        out: &mut Vec<Vec<u8>>,
        table: &mut [u8],
        visit: &mut dyn FnMut(&[u8]),
    ) {
        if i == edges.len() {
            for (v, dests) in out.iter().enumerate() {
                let row = &mut table[v * k..(v + 1) * k];
                row[..dests.len()].copy_from_slice(dests);
                row[dests.len()..].fill(v as u8);
                row.sort_unstable();
            }
            visit(table);
            return;
        }
        let (u, v) = edges[i];
        let cap_u = k - out[u].len();
        let cap_v = k - out[v].len();
        for a in 0..=cap_u {
            for b in 0..=cap_v {
                if a + b == 0 {
                    continue;
                }
                out[u].extend(std::iter::repeat_n(v as u8, a));
                out[v].extend(std::iter::repeat_n(u as u8, b));
                rec(i + 1, edges, k, out, table, visit);
                let lu = out[u].len() - a;
                out[u].truncate(lu);
                let lv = out[v].len() - b;
                out[v].truncate(lv);
            }
        }
    }
    rec(0, &edges, k, &mut out, &mut table, &mut visit);
}

/// Checks `(n, k)` for seeded mode.
pub fn check_seeded(n: usize, k: usize) -> Result<()> {
    check_params(n, k)?;
    if n > MAX_SIMPLE_VERTICES {
        return Err(Error::SizeLimit {
            what: "vertices for seeded enumeration",
            value: n,
            max: MAX_SIMPLE_VERTICES,
        });
    }
    Ok(())
}

/// Every digraph with underlying simple graph `g`, in generation order.
pub fn orient_and_multiply(g: &SimpleGraph, k: usize) -> Result<Vec<Digraph>> {
    check_params(g.n().max(1), k)?;
    let mut out = Vec::new();
    for_each_orientation(g, k, |t| {
        out.push(Digraph::from_flat_sorted(g.n(), k, t.to_vec()))
    });
    Ok(out)
}

/// Primitive classes generated from one seed, in generation order.
pub fn classes_of_seed(g: &SimpleGraph, k: usize) -> Vec<ClassMember> {
    let n = g.n();
    let mut seen = HashSet::new();
    let mut members = Vec::new();
    let mut scratch = Digraph::from_flat_sorted(n, k, vec![0; n * k]);
    for_each_orientation(g, k, |t| {
        scratch.flat_mut().copy_from_slice(t);
        if !is_primitive(&scratch) {
            return;
        }
        let (key, digraph) =
            canonical_form(&scratch).expect("seed sizes are within canonical limits");
        if seen.insert(key.clone()) {
            members.push(ClassMember { key, digraph });
        }
    });
    members
}

/// Simple-graph seeds for `n` vertices in canonical order.
pub fn seeds(n: usize) -> Result<Vec<SimpleGraph>> {
    enumerate_simple_graphs(n)
}

/// Concatenates per-seed results, checking that no key repeats across seeds.
pub fn merge_seed_results(parts: Vec<Vec<ClassMember>>) -> Vec<ClassMember> {
    let mut all = HashSet::new();
    let mut out = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for part in parts {
        for m in part {
            assert!(
                all.insert(m.key.clone()),
                "digraphs from nonisomorphic seeds collided on key {}",
                m.key
            );
            out.push(m);
        }
    }
    out
}

/// All labeled sorted rows of length `k` over `0..n`, lexicographic.
fn all_rows(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut rows = Vec::new();
    let mut row = vec![0u8; k];
    loop {
        rows.push(row.clone());
        // next non-decreasing sequence
        let mut i = k;
        loop {
            if i == 0 {
                return rows;
            }
            i -= 1;
            if (row[i] as usize) < n - 1 {
                row[i] += 1;
                let x = row[i];
                row[i + 1..].fill(x);
                break;
            }
        }
    }
}

/// Number of labeled tables direct mode scans: `C(n+k-1, k)^n`.
pub fn direct_candidates(n: usize, k: usize) -> u128 {
    let rows = (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 + i) / (i + 1));
    rows.checked_pow(n as u32).unwrap_or(u128::MAX)
}

fn direct_chunk(
    n: usize,
    k: usize,
    rows: &[Vec<u8>],
    first: usize,
) -> BTreeMap<CanonicalKey, Digraph> {
    let mut found = BTreeMap::new();
    let mut digits = vec![0usize; n];
    digits[0] = first;
    let mut d = Digraph::from_flat_sorted(n, k, vec![0; n * k]);
    for v in 0..n {
        d.flat_mut()[v * k..(v + 1) * k].copy_from_slice(&rows[digits[v]]);
    }
    loop {
        if is_primitive(&d) {
            let (key, rep) = canonical_form(&d).expect("direct sizes are within canonical limits");
            found.entry(key).or_insert(rep);
        }
        // odometer over vertices 1..n, last fastest
        let mut v = n;
        loop {
            if v == 1 {
                return found;
            }
            v -= 1;
            digits[v] += 1;
            if digits[v] < rows.len() {
                d.flat_mut()[v * k..(v + 1) * k].copy_from_slice(&rows[digits[v]]);
                break;
            }
            digits[v] = 0;
            d.flat_mut()[v * k..(v + 1) * k].copy_from_slice(&rows[0]);
        }
    }
}

/// One representative per isomorphism class of primitive k-out-regular
/// digraphs on `n` vertices.
///
/// Seeded output lists seeds in canonical order and each seed's classes in
/// generation order; direct output is sorted by key. Work is spread over the
/// current rayon pool; the result does not depend on its size.
pub fn enumerate_primitive_digraphs(
    n: usize,
    k: usize,
    mode: EnumerationMode,
) -> Result<Vec<ClassMember>> {
    enumerate_with_budget(n, k, mode, DEFAULT_CANDIDATE_BUDGET)
}

pub fn enumerate_with_budget(
    n: usize,
    k: usize,
    mode: EnumerationMode,
    candidate_budget: u128,
) -> Result<Vec<ClassMember>> {
    check_params(n, k)?;
    match mode {
        EnumerationMode::Seeded => {
            check_seeded(n, k)?;
            let seeds = seeds(n)?;
            let parts: Vec<Vec<ClassMember>> =
                seeds.par_iter().map(|g| classes_of_seed(g, k)).collect();
            Ok(merge_seed_results(parts))
        }
        EnumerationMode::Direct => {
            let needed = direct_candidates(n, k);
            if needed > candidate_budget {
                return Err(Error::Budget {
                    what: "labeled candidates",
                    needed,
                    budget: candidate_budget,
                });
            }
            let rows = all_rows(n, k);
            let parts: Vec<BTreeMap<CanonicalKey, Digraph>> = (0..rows.len())
                .into_par_iter()
                .map(|first| direct_chunk(n, k, &rows, first))
                .collect();
            let mut merged = BTreeMap::new();
            for part in parts {
                merged.extend(part);
            }
            Ok(merged
                .into_iter()
                .map(|(key, digraph)| ClassMember { key, digraph })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_orientations() {
        let g = SimpleGraph::new(2, &[(0, 1)]).unwrap();
        let rows: Vec<Vec<Vec<usize>>> = orient_and_multiply(&g, 1)
            .unwrap()
            .iter()
            .map(|d| d.rows())
            .collect();
        assert_eq!(
            rows,
            vec![
                vec![vec![0], vec![0]],
                vec![vec![1], vec![1]],
                vec![vec![1], vec![0]],
            ]
        );
        let mut count = 0;
        for_each_orientation(&g, 2, |_| count += 1);
        // (a, b) with a, b in 0..=2, not both zero
        assert_eq!(count, 8);
    }

    #[test]
    fn empty_seed_gives_all_loops() {
        let g = SimpleGraph::new(3, &[]).unwrap();
        let ds = orient_and_multiply(&g, 2).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].rows(), vec![vec![0, 0], vec![1, 1], vec![2, 2]]);
    }

    #[test]
    fn rows_and_candidates() {
        assert_eq!(all_rows(3, 2).len(), 6);
        assert_eq!(direct_candidates(3, 2), 216);
        assert_eq!(direct_candidates(5, 3), 35u128.pow(5));
    }

    #[test]
    fn small_class_counts_match_table() {
        for (n, k, expected) in [
            (2, 2, 2),
            (3, 2, 12),
            (2, 3, 5),
            (4, 2, 100),
            (2, 4, 9),
            (2, 5, 14),
        ] {
            for mode in [EnumerationMode::Seeded, EnumerationMode::Direct] {
                let got = enumerate_primitive_digraphs(n, k, mode).unwrap();
                assert_eq!(got.len(), expected, "n={n} k={k} {mode:?}");
                assert!(got.iter().all(|m| is_primitive(&m.digraph)));
            }
        }
    }

    #[test]
    fn budget_and_limits() {
        assert!(matches!(
            enumerate_with_budget(4, 2, EnumerationMode::Direct, 10),
            Err(Error::Budget { .. })
        ));
        assert!(enumerate_primitive_digraphs(8, 2, EnumerationMode::Seeded).is_err());
        assert!(enumerate_primitive_digraphs(0, 2, EnumerationMode::Seeded).is_err());
    }
}
