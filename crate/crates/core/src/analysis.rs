//! Structural predicates: strong connectivity, aperiodicity, sink components.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::digraph::Digraph;
use crate::error::{Error, Result};

/// Strongly connected components with their condensation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    /// Component id of every vertex.
    pub component_of: Vec<usize>,
    /// Vertices of every component, ascending.
    pub components: Vec<Vec<usize>>,
    /// Distinct condensation edges `(from, to)`, `from != to`, sorted.
    pub condensation_edges: Vec<(usize, usize)>,
    /// Ids of components without outgoing condensation edges.
    pub sinks: Vec<usize>,
    /// `reachable_from_all[c]`: every vertex has a path into component `c`.
    pub reachable_from_all: Vec<bool>,
}

impl SccDecomposition {
    /// Tarjan's algorithm with an explicit call stack.
    pub fn new(d: &Digraph) -> Self {
        let n = d.n();
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        let mut component_of = vec![UNSEEN; n];
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut counter = 0;
        // (vertex, next edge slot)
        let mut calls: Vec<(usize, usize)> = Vec::with_capacity(n);

        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            calls.push((root, 0));
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut slot)) = calls.last_mut() {
                if *slot < d.k() {
                    let w = d.row(v)[*slot] as usize;
                    *slot += 1;
                    if index[w] == UNSEEN {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        calls.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let id = components.len();
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component_of[w] = id;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.sort_unstable();
                    components.push(members);
                }
            }
        }

        let mut edges = BTreeSet::new();
        for v in 0..n {
            for &w in d.row(v) {
                let (a, b) = (component_of[v], component_of[w as usize]);
                if a != b {
                    edges.insert((a, b));
                }
            }
        }
        let condensation_edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let c = components.len();
        let mut has_out = vec![false; c];
        for &(a, _) in &condensation_edges {
            has_out[a] = true;
        }
        let sinks: Vec<usize> = (0..c).filter(|&i| !has_out[i]).collect();

        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); c];
        for &(a, b) in &condensation_edges {
            preds[b].push(a);
        }
        let reachable_from_all = (0..c)
            .map(|target| {
                let mut seen = vec![false; c];
                seen[target] = true;
                let mut queue = vec![target];
                while let Some(x) = queue.pop() {
                    for &p in &preds[x] {
                        if !seen[p] {
                            seen[p] = true;
                            queue.push(p);
                        }
                    }
                }
                seen.into_iter().all(|s| s)
            })
            .collect();

        SccDecomposition {
            component_of,
            components,
            condensation_edges,
            sinks,
            reachable_from_all,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Forward and backward reachability from vertex 0 over bitmasks.
pub fn is_strongly_connected(d: &Digraph) -> bool {
    let n = d.n();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut succ = [0u32; 32];
    let mut pred = [0u32; 32];
    for v in 0..n {
        for &w in d.row(v) {
            succ[v] |= 1 << w;
            pred[w as usize] |= 1 << v;
        }
    }
    closure(&succ) == full && closure(&pred) == full
}

fn closure(adj: &[u32; 32]) -> u32 {
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}

/// Period of a strongly connected digraph: the gcd of all cycle lengths.
///
/// Uses BFS levels from vertex 0; the period is the gcd over all edges
/// `u -> v` of `level(u) + 1 - level(v)`.
pub fn period(d: &Digraph) -> Result<usize> {
    if !is_strongly_connected(d) {
        return Err(Error::NotStronglyConnected);
    }
    let n = d.n();
    const UNSEEN: u8 = u8::MAX;
    let mut level = [UNSEEN; 32];
    let mut queue = [0u8; 32];
    level[0] = 0;
    let (mut head, mut tail) = (0, 1);
    while head < tail {
        let v = queue[head] as usize;
        head += 1;
        for &w in d.row(v) {
            if level[w as usize] == UNSEEN {
                level[w as usize] = level[v] + 1;
                queue[tail] = w;
                tail += 1;
            }
        }
    }
    let mut g = 0usize;
    for v in 0..n {
        for &w in d.row(v) {
            let diff = (level[v] as usize + 1).abs_diff(level[w as usize] as usize);
            g = g.gcd(&diff);
        }
    }
    Ok(g)
}

/// True iff the gcd of the cycle lengths is 1. Requires strong connectivity.
pub fn is_aperiodic(d: &Digraph) -> Result<bool> {
    period(d).map(|p| p == 1)
}

/// Strongly connected and aperiodic.
pub fn is_primitive(d: &Digraph) -> bool {
    matches!(period(d), Ok(1))
}

/// Digraph induced by the unique sink component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkReduction {
    pub induced: Digraph,
    /// `vertex_map[new] = old`.
    pub vertex_map: Vec<usize>,
}

/// Restricts `d` to its sink component when there is exactly one.
///
/// Returns `None` when there are several sink components; such a digraph
/// has no synchronizing coloring.
pub fn sink_reduction(d: &Digraph) -> Option<SinkReduction> {
    let scc = SccDecomposition::new(d);
    if scc.sinks.len() != 1 {
        return None;
    }
    let vertex_map = scc.components[scc.sinks[0]].clone();
    let mut new_index = vec![usize::MAX; d.n()];
    for (new, &old) in vertex_map.iter().enumerate() {
        new_index[old] = new;
    }
    let mut dests = Vec::with_capacity(vertex_map.len() * d.k());
    for &old in &vertex_map {
        // rows stay sorted since the renumbering is monotone
        dests.extend(d.row(old).iter().map(|&w| new_index[w as usize] as u8));
    }
    Some(SinkReduction {
        induced: Digraph::from_flat_sorted(vertex_map.len(), d.k(), dests),
        vertex_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dg(n: usize, k: usize, rows: &[&[usize]]) -> Digraph {
        Digraph::from_rows(n, k, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn g30() -> Digraph {
        dg(
            6,
            2,
            &[&[2, 5], &[2, 5], &[1, 4], &[1, 4], &[0, 3], &[0, 3]],
        )
    }

    /// Brute-force pairwise reachability.
    fn reach_all(d: &Digraph) -> bool {
        (0..d.n()).all(|s| {
            let mut seen = vec![false; d.n()];
            seen[s] = true;
            let mut q = vec![s];
            while let Some(v) = q.pop() {
                for &w in d.row(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        q.push(w as usize);
                    }
                }
            }
            seen.iter().all(|&x| x)
        })
    }

    /// gcd of all simple cycle lengths by DFS from each minimal start.
    fn cycle_gcd(d: &Digraph) -> usize {
        fn dfs(
            d: &Digraph,
            start: usize,
            v: usize,
            depth: usize,
            on: &mut Vec<bool>,
            g: &mut usize,
        ) {
            for &w in d.row(v) {
                let w = w as usize;
                if w == start {
                    *g = g.gcd(&(depth + 1));
                } else if w > start && !on[w] {
                    on[w] = true;
                    dfs(d, start, w, depth + 1, on, g);
                    on[w] = false;
                }
            }
        }
        let mut g = 0;
        for s in 0..d.n() {
            let mut on = vec![false; d.n()];
            on[s] = true;
            dfs(d, s, s, 0, &mut on, &mut g);
        }
        g
    }

    #[test]
    fn connectivity_examples() {
        let two_cycle = dg(2, 1, &[&[1], &[0]]);
        assert!(is_strongly_connected(&two_cycle));
        assert!(!is_strongly_connected(&dg(2, 2, &[&[1, 1], &[1, 1]])));
        assert!(is_strongly_connected(&g30()));
        assert!(reach_all(&g30()));
    }

    #[test]
    fn aperiodicity_examples() {
        let two_cycle = dg(2, 1, &[&[1], &[0]]);
        assert!(!is_aperiodic(&two_cycle).unwrap());
        assert_eq!(period(&two_cycle).unwrap(), 2);
        assert!(is_aperiodic(&dg(3, 2, &[&[0, 1], &[2, 2], &[0, 0]])).unwrap());
        assert!(is_aperiodic(&g30()).unwrap());
        assert_eq!(cycle_gcd(&g30()), 1);
        assert!(matches!(
            is_aperiodic(&dg(2, 2, &[&[1, 1], &[1, 1]])),
            Err(Error::NotStronglyConnected)
        ));
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&g30()));
        assert!(!is_primitive(&dg(2, 1, &[&[1], &[0]])));
        assert!(is_primitive(&dg(1, 1, &[&[0]])));
        assert!(is_primitive(&dg(1, 3, &[&[0, 0, 0]])));
    }

    #[test]
    fn sink_reduction_examples() {
        let d = g30();
        let r = sink_reduction(&d).unwrap();
        assert_eq!(r.induced, d);
        assert_eq!(r.vertex_map, (0..6).collect::<Vec<_>>());

        let r = sink_reduction(&dg(3, 1, &[&[1], &[2], &[2]])).unwrap();
        assert_eq!(r.induced, dg(1, 1, &[&[0]]));
        assert_eq!(r.vertex_map, vec![2]);

        assert!(sink_reduction(&dg(4, 1, &[&[1], &[1], &[3], &[3]])).is_none());
    }

    #[test]
    fn scc_structure() {
        // 0 -> {1,2}, 1 <-> 2, 2 -> 3, 3 loop
        let d = dg(4, 2, &[&[1, 2], &[2, 2], &[1, 3], &[3, 3]]);
        let scc = SccDecomposition::new(&d);
        assert_eq!(scc.len(), 3);
        assert_eq!(scc.component_of[1], scc.component_of[2]);
        assert_eq!(scc.sinks.len(), 1);
        assert_eq!(scc.components[scc.sinks[0]], vec![3]);
        assert!(scc.reachable_from_all[scc.sinks[0]]);
        assert!(!scc.reachable_from_all[scc.component_of[0]]);
        for &(a, b) in &scc.condensation_edges {
            assert!(a > b);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_digraph(max_n: usize, max_k: usize) -> impl Strategy<Value = Digraph> {
            (1..=max_n, 1..=max_k).prop_flat_map(|(n, k)| {
                proptest::collection::vec(0..n, n * k).prop_map(move |flat| {
                    let rows = flat.chunks(k).map(|c| c.to_vec()).collect();
                    Digraph::from_unsorted_rows(n, k, rows).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn bfs_gcd_matches_cycle_enumeration(d in arb_digraph(6, 3)) {
                prop_assert_eq!(is_strongly_connected(&d), reach_all(&d));
                if is_strongly_connected(&d) {
                    prop_assert_eq!(period(&d).unwrap(), cycle_gcd(&d));
                }
            }

            #[test]
            fn tarjan_agrees_with_bitmask_reachability(d in arb_digraph(8, 3)) {
                let scc = SccDecomposition::new(&d);
                prop_assert_eq!(scc.len() == 1, is_strongly_connected(&d));
                let mut all: Vec<usize> = scc.components.concat();
                all.sort_unstable();
                prop_assert_eq!(all, (0..d.n()).collect::<Vec<_>>());
                for &s in &scc.sinks {
                    prop_assert!(scc.condensation_edges.iter().all(|&(a, _)| a != s));
                }
                if scc.sinks.len() == 1 {
                    prop_assert!(scc.reachable_from_all[scc.sinks[0]]);
                    let r = sink_reduction(&d).unwrap();
                    prop_assert!(is_strongly_connected(&r.induced));
                }
            }
        }
    }
}
