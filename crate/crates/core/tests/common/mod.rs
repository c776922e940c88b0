//! Brute-force references that share no code with the library.

#![allow(dead_code)]

/// Subset BFS from the full state set; `table[q][a]` is the successor.
pub fn naive_is_synchronizing(table: &[Vec<usize>]) -> bool {
    let n = table.len();
    if n <= 1 {
        return true;
    }
    let k = table[0].len();
    let full: u32 = (1u32 << n) - 1;
    let mut seen = vec![false; 1 << n];
    seen[full as usize] = true;
    let mut queue = std::collections::VecDeque::from([full]);
    while let Some(s) = queue.pop_front() {
        if s.count_ones() == 1 {
            return true;
        }
        for a in 0..k {
            let mut t = 0u32;
            for (q, row) in table.iter().enumerate() {
                if s >> q & 1 == 1 {
                    t |= 1 << row[a];
                }
            }
            if !seen[t as usize] {
                seen[t as usize] = true;
                queue.push_back(t);
            }
        }
    }
    false
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..k {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Synchronizing edge colorings of `rows` counted over all `(k!)^n`
/// assignments of colors to individual edges: `(sync, total)`.
pub fn naive_census(rows: &[Vec<usize>]) -> (u128, u128) {
    let n = rows.len();
    let k = rows[0].len();
    let perms = permutations(k);
    let mut digits = vec![0usize; n];
    let (mut sync, mut total) = (0u128, 0u128);
    let mut table = vec![vec![0usize; k]; n];
    loop {
        for v in 0..n {
            for (slot, &color) in perms[digits[v]].iter().enumerate() {
                table[v][color] = rows[v][slot];
            }
        }
        total += 1;
        sync += naive_is_synchronizing(&table) as u128;
        let mut v = 0;
        loop {
            if v == n {
                return (sync, total);
            }
            digits[v] += 1;
            if digits[v] < perms.len() {
                break;
            }
            digits[v] = 0;
            v += 1;
        }
    }
}

/// Strongly connected and aperiodic, by matrix powers of the 0/1
/// adjacency: some power is all positive (Wielandt bound `(n-1)^2 + 1`).
pub fn naive_is_primitive(rows: &[Vec<usize>]) -> bool {
    let n = rows.len();
    let mut adj = vec![vec![false; n]; n];
    for (u, row) in rows.iter().enumerate() {
        for &v in row {
            adj[u][v] = true;
        }
    }
    let mut power = adj.clone();
    for _ in 0..(n - 1) * (n - 1) + 1 {
        if power.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        let mut next = vec![vec![false; n]; n];
        for u in 0..n {
            for w in 0..n {
                if power[u][w] {
                    for v in 0..n {
                        next[u][v] |= adj[w][v];
                    }
                }
            }
        }
        power = next;
    }
    power.iter().all(|r| r.iter().all(|&x| x))
}
