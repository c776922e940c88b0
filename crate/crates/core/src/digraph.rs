//! k-out-regular multidigraphs with loops, and their colorings.
//!
//! A [`Digraph`] stores, for every vertex, the sorted multiset of its `k`
//! destinations. Edge identity inside a bundle of parallel edges is not kept;
//! the census recovers colorings over distinguishable edges through the
//! per-vertex multiplicities.
//!
//! The text format is 1-indexed:
//!
//! ```text
//! # comment
//! 6 2
//! 3 6
//! 3 6
//! 2 5
//! 2 5
//! 1 4
//! 1 4
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 15;
/// Largest supported out-degree.
pub const MAX_DEGREE: usize = 6;

/// First violated invariant of a candidate digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    NoEdges,
    TooManyVertices {
        n: usize,
    },
    DegreeTooLarge {
        k: usize,
    },
    RowCount {
        expected: usize,
        found: usize,
    },
    RowLength {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    DestinationOutOfRange {
        vertex: usize,
        dest: usize,
    },
    Unsorted {
        vertex: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "n must be positive"),
            Violation::NoEdges => write!(f, "k must be positive"),
            Violation::TooManyVertices { n } => {
                write!(f, "n = {n} exceeds the limit {MAX_VERTICES}")
            }
            Violation::DegreeTooLarge { k } => {
                write!(f, "k = {k} exceeds the limit {MAX_DEGREE}")
            }
            Violation::RowCount { expected, found } => {
                write!(f, "expected {expected} destination rows, found {found}")
            }
            Violation::RowLength {
                vertex,
                expected,
                found,
            } => write!(
                f,
                "vertex {vertex} has {found} outgoing edges, expected {expected}"
            ),
            Violation::DestinationOutOfRange { vertex, dest } => {
                write!(f, "vertex {vertex} has destination {dest} out of range")
            }
            Violation::Unsorted { vertex } => {
                write!(f, "destinations of vertex {vertex} are not sorted")
            }
        }
    }
}

/// Checks every digraph invariant on raw 0-indexed rows.
pub fn validate(n: usize, k: usize, rows: &[Vec<usize>]) -> std::result::Result<(), Violation> {
    if n == 0 {
        return Err(Violation::NoVertices);
    }
    if k == 0 {
        return Err(Violation::NoEdges);
    }
    if n > MAX_VERTICES {
        return Err(Violation::TooManyVertices { n });
    }
    if k > MAX_DEGREE {
        return Err(Violation::DegreeTooLarge { k });
    }
    if rows.len() != n {
        return Err(Violation::RowCount {
            expected: n,
            found: rows.len(),
        });
    }
    for (vertex, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Violation::RowLength {
                vertex,
                expected: k,
                found: row.len(),
            });
        }
        if let Some(&dest) = row.iter().find(|&&w| w >= n) {
            return Err(Violation::DestinationOutOfRange { vertex, dest });
        }
        if row.windows(2).any(|w| w[0] > w[1]) {
            return Err(Violation::Unsorted { vertex });
        }
    }
    Ok(())
}

/// A k-out-regular multidigraph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DigraphRecord", into = "DigraphRecord")]
pub struct Digraph {
    n: usize,
    k: usize,
    dests: Vec<u8>,
}

/// JSON shape of a digraph: `{"n":..,"k":..,"dests":[[..],..]}`, 0-indexed.
#[derive(Serialize, Deserialize)]
struct DigraphRecord {
    n: usize,
    k: usize,
    dests: Vec<Vec<usize>>,
}

impl TryFrom<DigraphRecord> for Digraph {
    type Error = Error;

    fn try_from(r: DigraphRecord) -> Result<Self> {
        Digraph::from_rows(r.n, r.k, r.dests)
    }
}

impl From<Digraph> for DigraphRecord {
    fn from(d: Digraph) -> Self {
        DigraphRecord {
            n: d.n,
            k: d.k,
            dests: d.rows(),
        }
    }
}

impl Digraph {
    /// Builds a digraph from sorted 0-indexed rows.
    pub fn from_rows(n: usize, k: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        validate(n, k, &rows).map_err(Error::Invalid)?;
        let dests = rows.into_iter().flatten().map(|w| w as u8).collect();
        Ok(Digraph { n, k, dests })
    }

    /// Builds a digraph from rows in any order; each row is sorted first.
    pub fn from_unsorted_rows(n: usize, k: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        for row in &mut rows {
            row.sort_unstable();
        }
        Self::from_rows(n, k, rows)
    }

    /// Builds a digraph from a flat row-major table, sorting each row.
    pub(crate) fn from_flat_unsorted(n: usize, k: usize, mut dests: Vec<u8>) -> Self {
        debug_assert_eq!(dests.len(), n * k);
        for row in dests.chunks_mut(k) {
            row.sort_unstable();
        }
        Digraph { n, k, dests }
    }

    /// Flat constructor for already-sorted, in-range tables.
    pub(crate) fn from_flat_sorted(n: usize, k: usize, dests: Vec<u8>) -> Self {
        debug_assert!(dests.chunks(k).all(|r| r.windows(2).all(|w| w[0] <= w[1])));
        Digraph { n, k, dests }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sorted destinations of `v`.
    #[inline]
    pub fn row(&self, v: usize) -> &[u8] {
        &self.dests[v * self.k..(v + 1) * self.k]
    }

    /// Flat row-major destination table.
    pub fn flat(&self) -> &[u8] {
        &self.dests
    }

    /// Callers must keep every row sorted and in range.
    pub(crate) fn flat_mut(&mut self) -> &mut [u8] {
        &mut self.dests
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.dests
            .chunks(self.k)
            .map(|r| r.iter().map(|&w| w as usize).collect())
            .collect()
    }

    /// `(destination, multiplicity)` pairs of `v` with strictly increasing
    /// destinations.
    pub fn profile(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(self.k);
        for &w in self.row(v) {
            match out.last_mut() {
                Some((last, m)) if *last == w as usize => *m += 1,
                _ => out.push((w as usize, 1)),
            }
        }
        out
    }

    /// Number of edges `u -> v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.row(u).iter().filter(|&&w| w as usize == v).count()
    }

    pub fn loops(&self, v: usize) -> usize {
        self.multiplicity(v, v)
    }

    /// Applies the vertex bijection `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Digraph {
        assert_eq!(perm.len(), self.n);
        let mut dests = vec![0u8; self.n * self.k];
        for old in 0..self.n {
            let new = perm[old];
            let row = &mut dests[new * self.k..(new + 1) * self.k];
            for (slot, &w) in row.iter_mut().zip(self.row(old)) {
                *slot = perm[w as usize] as u8;
            }
            row.sort_unstable();
        }
        Digraph {
            n: self.n,
            k: self.k,
            dests,
        }
    }

    /// Parses the 1-indexed text format.
    pub fn parse(text: &str) -> Result<Digraph> {
        parse_digraph(text)
    }

    /// Renders the 1-indexed text format.
    pub fn to_text(&self) -> String {
        format_digraph(self)
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digraph(n={}, k={}, {:?})", self.n, self.k, self.rows())
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Tokens of one non-blank line: (line number, [(column, token)]).
fn tokenize(text: &str) -> Vec<(usize, Vec<(usize, &str)>)> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (pos, ch) in body.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    toks.push((s + 1, &body[s..pos]));
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            toks.push((s + 1, &body[s..]));
        }
        if !toks.is_empty() {
            lines.push((idx + 1, toks));
        }
    }
    lines
}

fn parse_number(line: usize, column: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| {
        parse_err(
            line,
            column,
            format!("expected a non-negative integer, found {tok:?}"),
        )
    })
}

/// Parses `n k` followed by `n` lines of `k` 1-indexed destinations.
///
/// Rows need not be sorted; they are sorted on input.
pub fn parse_digraph(text: &str) -> Result<Digraph> {
    let lines = tokenize(text);
    let mut it = lines.iter();
    let (hline, header) = it
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty input, expected header \"n k\""))?;
    if header.len() != 2 {
        let col = header.get(2).map_or(1, |t| t.0);
        return Err(parse_err(*hline, col, "header must be exactly \"n k\""));
    }
    let n = parse_number(*hline, header[0].0, header[0].1)?;
    let k = parse_number(*hline, header[1].0, header[1].1)?;
    if n == 0 || n > MAX_VERTICES {
        return Err(parse_err(
            *hline,
            header[0].0,
            format!("n must lie in 1..={MAX_VERTICES}"),
        ));
    }
    if k == 0 || k > MAX_DEGREE {
        return Err(parse_err(
            *hline,
            header[1].0,
            format!("k must lie in 1..={MAX_DEGREE}"),
        ));
    }
    let mut rows = Vec::with_capacity(n);
    for v in 0..n {
        let (lno, toks) = it.next().ok_or_else(|| {
            let last = lines.last().map_or(1, |l| l.0);
            parse_err(last + 1, 1, format!("missing row for vertex {}", v + 1))
        })?;
        if toks.len() != k {
            let col = toks.get(k).map_or(toks.last().map_or(1, |t| t.0), |t| t.0);
            return Err(parse_err(
                *lno,
                col,
                format!("expected {k} destinations, found {}", toks.len()),
            ));
        }
        let mut row = Vec::with_capacity(k);
        for &(col, tok) in toks {
            let w = parse_number(*lno, col, tok)?;
            if w == 0 || w > n {
                return Err(parse_err(
                    *lno,
                    col,
                    format!("destination {w} outside 1..={n}"),
                ));
            }
            row.push(w - 1);
        }
        row.sort_unstable();
        rows.push(row);
    }
    if let Some((lno, toks)) = it.next() {
        return Err(parse_err(
            *lno,
            toks[0].0,
            "unexpected content after the last row",
        ));
    }
    Digraph::from_rows(n, k, rows)
}

pub fn format_digraph(d: &Digraph) -> String {
    let mut out = format!("{} {}\n", d.n, d.k);
    for v in 0..d.n {
        let row: Vec<String> = d
            .row(v)
            .iter()
            .map(|&w| (w as usize + 1).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// A coloring of a digraph: a complete deterministic transition table.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AutomatonRecord", into = "AutomatonRecord")]
pub struct Automaton {
    n: usize,
    k: usize,
    delta: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct AutomatonRecord {
    n: usize,
    k: usize,
    delta: Vec<Vec<usize>>,
}

impl TryFrom<AutomatonRecord> for Automaton {
    type Error = Error;

    fn try_from(r: AutomatonRecord) -> Result<Self> {
        Automaton::new(r.n, r.k, r.delta)
    }
}

impl From<Automaton> for AutomatonRecord {
    fn from(a: Automaton) -> Self {
        AutomatonRecord {
            n: a.n,
            k: a.k,
            delta: a.table(),
        }
    }
}

/// Automata are not bound by the census limits, but states must fit a byte.
const MAX_STATES: usize = 255;

impl Automaton {
    /// `table[v][a]` is the state reached from `v` by color `a`.
    pub fn new(n: usize, k: usize, table: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::Domain("automaton needs n >= 1 and k >= 1".into()));
        }
        if n > MAX_STATES {
            return Err(Error::SizeLimit {
                what: "states",
                value: n,
                max: MAX_STATES,
            });
        }
        if table.len() != n {
            return Err(Error::Invalid(Violation::RowCount {
                expected: n,
                found: table.len(),
            }));
        }
        let mut delta = Vec::with_capacity(n * k);
        for (vertex, row) in table.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Invalid(Violation::RowLength {
                    vertex,
                    expected: k,
                    found: row.len(),
                }));
            }
            for &w in row {
                if w >= n {
                    return Err(Error::Invalid(Violation::DestinationOutOfRange {
                        vertex,
                        dest: w,
                    }));
                }
                delta.push(w as u8);
            }
        }
        Ok(Automaton { n, k, delta })
    }

    pub(crate) fn from_flat(n: usize, k: usize, delta: Vec<u8>) -> Self {
        debug_assert_eq!(delta.len(), n * k);
        Automaton { n, k, delta }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn step(&self, state: usize, color: usize) -> usize {
        self.delta[state * self.k + color] as usize
    }

    /// Flat row-major table, `flat()[v * k + a] = delta(v, a)`.
    pub fn flat(&self) -> &[u8] {
        &self.delta
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.delta
            .chunks(self.k)
            .map(|r| r.iter().map(|&w| w as usize).collect())
            .collect()
    }

    /// Image of a state under a word.
    pub fn run(&self, state: usize, word: &[usize]) -> usize {
        word.iter().fold(state, |s, &a| self.step(s, a))
    }

    /// Underlying digraph; fails only if `n`/`k` exceed the digraph limits.
    pub fn digraph(&self) -> Result<Digraph> {
        digraph_of_automaton(self)
    }
}

impl fmt::Debug for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Automaton(n={}, k={}, {:?})",
            self.n,
            self.k,
            self.table()
        )
    }
}

/// Forgets the colors: each state's row becomes its sorted destination multiset.
pub fn digraph_of_automaton(a: &Automaton) -> Result<Digraph> {
    if a.n > MAX_VERTICES {
        return Err(Error::Invalid(Violation::TooManyVertices { n: a.n }));
    }
    if a.k > MAX_DEGREE {
        return Err(Error::Invalid(Violation::DegreeTooLarge { k: a.k }));
    }
    Ok(Digraph::from_flat_unsorted(a.n, a.k, a.delta.clone()))
}
