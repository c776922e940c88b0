//! Synchronization tests.
//!
//! [`is_synchronizing`] runs the quadratic pair-automaton test: an automaton
//! is synchronizing iff every pair of states can be merged, and the mergeable
//! pairs are exactly those that reach a one-step-mergeable pair. They are
//! found by backward BFS over reversed transitions.
//!
//! [`shortest_reset_word`] is the exponential subset-BFS oracle.

use crate::digraph::Automaton;
use crate::error::{Error, Result};

/// Largest state count accepted by the subset oracle.
pub const MAX_ORACLE_STATES: usize = 20;

/// Reusable scratch space for the pair test.
#[derive(Debug, Default, Clone)]
pub struct SyncChecker {
    pre_start: Vec<u16>,
    pre_list: Vec<u8>,
    fill: Vec<u16>,
    marked: Vec<bool>,
    queue: Vec<(u8, u8)>,
}

impl SyncChecker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pair test on a flat table `delta[v * k + a]`.
    pub fn check(&mut self, n: usize, k: usize, delta: &[u8]) -> bool {
        debug_assert_eq!(delta.len(), n * k);
        if n <= 1 {
            return true;
        }
        let pairs = n * (n - 1) / 2;

        // Preimages per (color, state) in CSR form.
        let buckets = k * n;
        self.pre_start.clear();
        self.pre_start.resize(buckets + 1, 0);
        for v in 0..n {
            for a in 0..k {
                let t = delta[v * k + a] as usize;
                self.pre_start[a * n + t + 1] += 1;
            }
        }
        for i in 0..buckets {
            self.pre_start[i + 1] += self.pre_start[i];
        }
        self.pre_list.clear();
        self.pre_list.resize(n * k, 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.pre_start[..buckets]);
        for v in 0..n {
            for a in 0..k {
                let b = a * n + delta[v * k + a] as usize;
                self.pre_list[self.fill[b] as usize] = v as u8;
                self.fill[b] += 1;
            }
        }

        self.marked.clear();
        self.marked.resize(n * n, false);
        self.queue.clear();
        let mut count = 0usize;

        // Seeds: pairs merged by a single letter.
        for a in 0..k {
            for t in 0..n {
                let b = a * n + t;
                let pre =
                    &self.pre_list[self.pre_start[b] as usize..self.pre_start[b + 1] as usize];
                for i in 0..pre.len() {
                    for j in i + 1..pre.len() {
                        let (p, q) = order(pre[i], pre[j]);
                        let idx = p as usize * n + q as usize;
                        if !self.marked[idx] {
                            self.marked[idx] = true;
                            self.queue.push((p, q));
                            count += 1;
                        }
                    }
                }
            }
        }
        if count == pairs {
            return true;
        }

        let mut head = 0;
        while head < self.queue.len() {
            let (r, s) = self.queue[head];
            head += 1;
            for a in 0..k {
                let br = a * n + r as usize;
                let bs = a * n + s as usize;
                let pr = self.pre_start[br] as usize..self.pre_start[br + 1] as usize;
                let ps = self.pre_start[bs] as usize..self.pre_start[bs + 1] as usize;
                for i in pr {
                    for j in ps.clone() {
                        let (p, q) = order(self.pre_list[i], self.pre_list[j]);
                        let idx = p as usize * n + q as usize;
                        if !self.marked[idx] {
                            self.marked[idx] = true;
                            self.queue.push((p, q));
                            count += 1;
                            if count == pairs {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

#[inline]
fn order(a: u8, b: u8) -> (u8, u8) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// True iff some word maps every state to one state.
pub fn is_synchronizing(a: &Automaton) -> bool {
    SyncChecker::new().check(a.n(), a.k(), a.flat())
}

fn image(a: &Automaton, mask: u32, color: usize) -> u32 {
    let mut out = 0u32;
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        out |= 1 << a.step(v, color);
    }
    out
}

/// A shortest reset word by BFS over state subsets, or `None`.
///
/// BFS starts from the full state set and tries colors in ascending order,
/// so among shortest words the one found first in that order is returned.
pub fn shortest_reset_word(a: &Automaton) -> Result<Option<Vec<usize>>> {
    let n = a.n();
    if n > MAX_ORACLE_STATES {
        return Err(Error::SizeLimit {
            what: "states",
            value: n,
            max: MAX_ORACLE_STATES,
        });
    }
    let full: u32 = (1u32 << n) - 1;
    if n == 1 {
        return Ok(Some(Vec::new()));
    }
    const NONE: u32 = u32::MAX;
    let mut parent = vec![NONE; 1usize << n];
    let mut via = vec![0u8; 1usize << n];
    parent[full as usize] = full;
    let mut queue = std::collections::VecDeque::from([full]);
    while let Some(mask) = queue.pop_front() {
        for c in 0..a.k() {
            let next = image(a, mask, c);
            if parent[next as usize] != NONE {
                continue;
            }
            parent[next as usize] = mask;
            via[next as usize] = c as u8;
            if next.count_ones() == 1 {
                let mut word = Vec::new();
                let mut cur = next;
                while cur != full {
                    word.push(via[cur as usize] as usize);
                    cur = parent[cur as usize];
                }
                word.reverse();
                return Ok(Some(word));
            }
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// Length of a shortest reset word, or `None` when not synchronizing.
pub fn reset_threshold(a: &Automaton) -> Result<Option<usize>> {
    Ok(shortest_reset_word(a)?.map(|w| w.len()))
}
