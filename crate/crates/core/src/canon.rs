//! Canonical forms under vertex relabeling.
//!
//! Vertices are split into classes by iterated count refinement (loops,
//! then edge counts into and out of every current class, until stable).
//! When classes remain non-singleton, each vertex of the first such class is
//! individualized in turn and the search recurses. Every leaf is a labeling;
//! the canonical form is the smallest code over all leaves. The search tree
//! depends only on the isomorphism class, so equal codes characterize
//! isomorphic inputs.
//!
//! For digraphs the code is the relabeled, row-sorted destination table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`canonical_key`].
pub const MAX_CANON_VERTICES: usize = 9;

const MAXN: usize = 16;

/// Multiplicity matrix `m[u][v]` = number of edges `u -> v`.
#[derive(Clone)]
struct Adjacency {
    n: usize,
    m: [[u8; MAXN]; MAXN],
}

impl Adjacency {
    fn of_digraph(d: &Digraph) -> Self {
        let mut m = [[0u8; MAXN]; MAXN];
        for v in 0..d.n() {
            for &w in d.row(v) {
                m[v][w as usize] += 1;
            }
        }
        Adjacency { n: d.n(), m }
    }
}

type Labels = [u8; MAXN];

/// Refines `color` (values `0..cells`) to a stable partition; returns the
/// new number of cells. Cells keep their relative order.
fn refine(adj: &Adjacency, color: &mut Labels, mut cells: usize) -> usize {
    let n = adj.n;
    // signature: [color, loops, out-counts per cell, in-counts per cell]
    const SIG: usize = 2 + 2 * MAXN;
    let mut sig = [[0u8; SIG]; MAXN];
    let mut order: [u8; MAXN] = [0; MAXN];
    loop {
        for v in 0..n {
            let s = &mut sig[v];
            s.fill(0);
            s[0] = color[v];
            s[1] = adj.m[v][v];
            for w in 0..n {
                if w != v {
                    s[2 + color[w] as usize] += adj.m[v][w];
                    s[2 + MAXN + color[w] as usize] += adj.m[w][v];
                }
            }
        }
        for (i, o) in order.iter_mut().enumerate().take(n) {
            *o = i as u8;
        }
        // insertion sort by signature
        for i in 1..n {
            let mut j = i;
            while j > 0 && sig[order[j - 1] as usize] > sig[order[j] as usize] {
                order.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut next = 0u8;
        color[order[0] as usize] = 0;
        for i in 1..n {
            if sig[order[i] as usize] != sig[order[i - 1] as usize] {
                next += 1;
            }
            color[order[i] as usize] = next;
        }
        let new_cells = next as usize + 1;
        if new_cells == cells || new_cells == n {
            return new_cells;
        }
        cells = new_cells;
    }
}

/// Calls `leaf` with the labeling at every leaf of the search tree.
fn search(adj: &Adjacency, mut color: Labels, cells: usize, leaf: &mut impl FnMut(&Labels)) {
    let n = adj.n;
    let cells = refine(adj, &mut color, cells);
    if cells == n {
        leaf(&color);
        return;
    }
    let mut size = [0u8; MAXN];
    for &c in &color[..n] {
        size[c as usize] += 1;
    }
    let target = (0..cells)
        .find(|&c| size[c] > 1)
        .expect("non-discrete partition") as u8;
    for v in 0..n {
        if color[v] != target {
            continue;
        }
        let mut child = color;
        for (u, c) in child.iter_mut().enumerate().take(n) {
            if *c > target || (*c == target && u != v) {
                *c += 1;
            }
        }
        search(adj, child, cells + 1, leaf);
    }
}

/// Smallest code over all leaves, with the number of leaves attaining it.
fn canonical_labeling<C: Ord + Copy>(
    adj: &Adjacency,
    code: impl Fn(&Labels) -> C,
) -> (C, Labels, u64) {
    let mut best: Option<(C, Labels, u64)> = None;
    search(adj, [0u8; MAXN], 1, &mut |labels| {
        let c = code(labels);
        match &mut best {
            Some((b, _, count)) if c == *b => *count += 1,
            Some((b, _, _)) if c > *b => {}
            _ => best = Some((c, *labels, 1)),
        }
    });
    best.expect("search visits at least one leaf")
}

/// Byte string characterizing a digraph's isomorphism class:
/// `[n, k, relabeled destination table...]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if !s.len().is_multiple_of(2) {
            return Err(Error::Domain(format!("odd-length key {s:?}")));
        }
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map(CanonicalKey)
            .map_err(|e| Error::Domain(format!("bad key {s:?}: {e}")))
    }

    /// The canonical representative this key encodes.
    pub fn digraph(&self) -> Digraph {
        let (n, k) = (self.0[0] as usize, self.0[1] as usize);
        Digraph::from_flat_sorted(n, k, self.0[2..].to_vec())
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalKey::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

const MAX_TABLE: usize = MAX_CANON_VERTICES * crate::digraph::MAX_DEGREE;

fn table_code(d: &Digraph, labels: &Labels) -> [u8; MAX_TABLE] {
    let (n, k) = (d.n(), d.k());
    let mut inv = [0u8; MAXN];
    for v in 0..n {
        inv[labels[v] as usize] = v as u8;
    }
    let mut out = [0u8; MAX_TABLE];
    for new in 0..n {
        let row = &mut out[new * k..(new + 1) * k];
        for (slot, &w) in row.iter_mut().zip(d.row(inv[new] as usize)) {
            *slot = labels[w as usize];
        }
        row.sort_unstable();
    }
    out
}

/// Canonical key together with the canonical representative.
pub fn canonical_form(d: &Digraph) -> Result<(CanonicalKey, Digraph)> {
    if d.n() > MAX_CANON_VERTICES {
        return Err(Error::SizeLimit {
            what: "vertices for canonical form",
            value: d.n(),
            max: MAX_CANON_VERTICES,
        });
    }
    let adj = Adjacency::of_digraph(d);
    let (code, _, _) = canonical_labeling(&adj, |labels| table_code(d, labels));
    let (n, k) = (d.n(), d.k());
    let mut bytes = Vec::with_capacity(2 + n * k);
    bytes.push(n as u8);
    bytes.push(k as u8);
    bytes.extend_from_slice(&code[..n * k]);
    let rep = Digraph::from_flat_sorted(n, k, code[..n * k].to_vec());
    Ok((CanonicalKey(bytes), rep))
}

pub fn canonical_key(d: &Digraph) -> Result<CanonicalKey> {
    canonical_form(d).map(|(k, _)| k)
}

/// Number of vertex permutations mapping `d` to itself.
///
/// Leaves of the search are distinct labelings closed under automorphisms,
/// and two leaves give the same code exactly when they differ by one.
pub fn automorphism_count(d: &Digraph) -> Result<u64> {
    if d.n() > MAX_CANON_VERTICES {
        return Err(Error::SizeLimit {
            what: "vertices for canonical form",
            value: d.n(),
            max: MAX_CANON_VERTICES,
        });
    }
    let (_, _, count) =
        canonical_labeling(&Adjacency::of_digraph(d), |labels| table_code(d, labels));
    Ok(count)
}

/// Undirected loop-free graph without parallel edges.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleGraph {
    n: usize,
    /// Neighbor bitmask per vertex.
    adj: Vec<u16>,
}

/// Largest vertex count for simple-graph enumeration.
pub const MAX_SIMPLE_VERTICES: usize = 7;

impl SimpleGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAXN {
            return Err(Error::SizeLimit {
                what: "simple graph vertices",
                value: n,
                max: MAXN,
            });
        }
        let mut adj = vec![0u16; n];
        for &(u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(Error::Domain(format!("bad simple-graph edge ({u}, {v})")));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(SimpleGraph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn adjacency(&self) -> Adjacency {
        let mut m = [[0u8; MAXN]; MAXN];
        for u in 0..self.n {
            for v in 0..self.n {
                m[u][v] = self.has_edge(u, v) as u8;
            }
        }
        Adjacency { n: self.n, m }
    }

    /// Canonical code and representative.
    pub fn canonical(&self) -> (u128, SimpleGraph) {
        let n = self.n;
        let (code, labels, _) = canonical_labeling(&self.adjacency(), |labels| {
            let mut rel = [0u16; MAXN];
            for u in 0..n {
                for v in 0..n {
                    if self.has_edge(u, v) {
                        rel[labels[u] as usize] |= 1 << labels[v];
                    }
                }
            }
            pair_code(n, &rel)
        });
        let mut adj = vec![0u16; n];
        for u in 0..n {
            for v in 0..n {
                if self.has_edge(u, v) {
                    adj[labels[u] as usize] |= 1 << labels[v];
                }
            }
        }
        (code, SimpleGraph { n, adj })
    }
}

/// Upper-triangle bits, row by row, first pair most significant.
fn pair_code(n: usize, adj: &[u16]) -> u128 {
    let mut code = 0u128;
    for u in 0..n {
        for v in u + 1..n {
            code = code << 1 | (adj[u] >> v & 1) as u128;
        }
    }
    code
}

impl fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimpleGraph(n={}, {:?})", self.n, self.edges())
    }
}

/// One representative per isomorphism class of simple graphs on `n`
/// vertices, ordered by canonical code.
///
/// Labeled graphs are scanned over all edge subsets; only those whose degree
/// sequence is non-increasing are canonicalized, since every class has such
/// a labeling.
pub fn enumerate_simple_graphs(n: usize) -> Result<Vec<SimpleGraph>> {
    if n > MAX_SIMPLE_VERTICES {
        return Err(Error::SizeLimit {
            what: "simple graph vertices",
            value: n,
            max: MAX_SIMPLE_VERTICES,
        });
    }
    if n == 0 {
        return Ok(vec![SimpleGraph { n: 0, adj: vec![] }]);
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut found = std::collections::BTreeMap::new();
    let mut adj = vec![0u16; n];
    for mask in 0u64..(1u64 << pairs.len()) {
        adj.iter_mut().for_each(|a| *a = 0);
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
        if adj
            .windows(2)
            .any(|w| w[0].count_ones() < w[1].count_ones())
        {
            continue;
        }
        let g = SimpleGraph {
            n,
            adj: adj.clone(),
        };
        let (code, rep) = g.canonical();
        found.entry(code).or_insert(rep);
    }
    Ok(found.into_values().collect())
}
