//! Shift spaces given by finite graph presentations.
//!
//! A [`Presentation`] is a directed multigraph whose edges carry symbols. The
//! presented shift is the set of label sequences of bi-infinite paths; its
//! language is the set of label sequences of finite paths once the graph is
//! essential. Three flavours share the representation:
//!
//! * vertex SFT: states and symbols coincide and every edge is labeled by its
//!   destination, so words are sequences of consecutive vertices;
//! * edge SFT: every edge carries its own symbol;
//! * labeled sofic: arbitrary labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::blockcode::SlidingBlockCode;
use crate::config::Limits;
use crate::graph;
use crate::{Error, Result};

/// Symbols are dense indices into an alphabet.
pub type Symbol = usize;
/// A finite block of symbols.
pub type Word = Vec<Symbol>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    VertexSft,
    EdgeSft,
    LabeledSofic,
}

impl Kind {
    pub fn is_sft(self) -> bool {
        matches!(self, Kind::VertexSft | Kind::EdgeSft)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    alphabet: Vec<String>,
    states: Vec<String>,
    edges: Vec<Edge>,
    kind: Kind,
    out: Vec<Vec<usize>>,
}

impl Presentation {
    /// Validates and builds a presentation. Does not trim.
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        mut edges: Vec<Edge>,
        kind: Kind,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidPresentation(m));
        if states.is_empty() {
            return bad("no states".into());
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s) {
                return bad(format!("duplicate state name {s:?}"));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &alphabet {
            if !seen.insert(a) {
                return bad(format!("duplicate symbol name {a:?}"));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.src >= states.len() || e.dst >= states.len() {
                return bad(format!("edge {i} refers to a missing state"));
            }
            if e.label >= alphabet.len() {
                return bad(format!(
                    "edge {i} has label index {} outside alphabet of size {}",
                    e.label,
                    alphabet.len()
                ));
            }
        }
        match kind {
            Kind::VertexSft => {
                if alphabet.len() != states.len() {
                    return bad("vertex SFT needs one symbol per state".into());
                }
                let mut pairs = BTreeSet::new();
                for (i, e) in edges.iter().enumerate() {
                    if e.label != e.dst {
                        return bad(format!("edge {i} of a vertex SFT must carry its destination's symbol"));
                    }
                    if !pairs.insert((e.src, e.dst)) {
                        return bad(format!("edge {i} duplicates a vertex transition"));
                    }
                }
            }
            Kind::EdgeSft => {
                if alphabet.len() != edges.len() {
                    return bad("edge SFT needs one symbol per edge".into());
                }
                let labels: BTreeSet<_> = edges.iter().map(|e| e.label).collect();
                if labels.len() != edges.len() {
                    return bad("edge SFT labels must be distinct".into());
                }
            }
            Kind::LabeledSofic => {}
        }
        edges.sort();
        let mut out = vec![Vec::new(); states.len()];
        for (i, e) in edges.iter().enumerate() {
            out[e.src].push(i);
        }
        Ok(Presentation {
            alphabet,
            states,
            edges,
            kind,
            out,
        })
    }

    /// Vertex SFT on the given symbols with the allowed transitions.
    pub fn vertex_sft<S: Into<String>>(
        alphabet: impl IntoIterator<Item = S>,
        transitions: &[(usize, usize)],
    ) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let states = alphabet.clone();
        let edges = transitions
            .iter()
            .map(|&(src, dst)| Edge { src, dst, label: dst })
            .collect();
        Presentation::new(alphabet, states, edges, Kind::VertexSft)
    }

    /// Full shift on the given symbols, as a vertex SFT.
    pub fn full_shift<S: Into<String>>(alphabet: impl IntoIterator<Item = S>) -> Self {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let n = alphabet.len();
        let t: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        Presentation::vertex_sft(alphabet, &t).expect("full shift is valid")
    }

    /// Golden mean shift: binary sequences with no two consecutive 1s.
    pub fn golden_mean() -> Self {
        Presentation::vertex_sft(["0", "1"], &[(0, 0), (0, 1), (1, 0)]).expect("valid")
    }

    /// Labeled graph with states named `s0, s1, ...`.
    pub fn labeled<S: Into<String>>(
        alphabet: impl IntoIterator<Item = S>,
        n_states: usize,
        edges: &[(usize, usize, Symbol)],
    ) -> Result<Self> {
        let alphabet = alphabet.into_iter().map(Into::into).collect();
        let states = (0..n_states).map(|i| format!("s{i}")).collect();
        let edges = edges
            .iter()
            .map(|&(src, dst, label)| Edge { src, dst, label })
            .collect();
        Presentation::new(alphabet, states, edges, Kind::LabeledSofic)
    }

    /// Even shift: runs of 0s between consecutive 1s have even length.
    pub fn even_shift() -> Self {
        Presentation::labeled(["0", "1"], 2, &[(0, 0, 1), (0, 1, 0), (1, 0, 0)]).expect("valid")
    }

    /// SFT given by a list of forbidden words, recoded to a vertex SFT at
    /// window `max(longest forbidden word - 1, 1)`. Symbols of the result are
    /// the allowed words of that length.
    pub fn from_forbidden<S: Into<String>>(
        alphabet: impl IntoIterator<Item = S>,
        forbidden: &[Word],
        limits: &Limits,
    ) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let full = Presentation::full_shift(alphabet.clone());
        let window = forbidden.iter().map(|w| w.len()).max().unwrap_or(2).max(2) - 1;
        let avoids = |u: &[Symbol]| {
            !forbidden
                .iter()
                .any(|f| f.len() <= u.len() && u.windows(f.len()).any(|x| x == f.as_slice()))
        };
        let blocks: Vec<Word> = enumerate_words(&full, window, limits)?
            .into_iter()
            .filter(|u| avoids(u))
            .collect();
        let index: HashMap<&Word, usize> = blocks.iter().enumerate().map(|(i, u)| (u, i)).collect();
        let mut transitions = Vec::new();
        for u in &blocks {
            for a in 0..alphabet.len() {
                let mut ext = u.clone();
                ext.push(a);
                if !avoids(&ext) {
                    continue;
                }
                if let Some(&j) = index.get(&ext[1..].to_vec()) {
                    transitions.push((index[u], j));
                }
            }
        }
        let names = blocks.iter().map(|u| join_names(&alphabet, u)).collect::<Vec<_>>();
        let p = Presentation::vertex_sft(names, &transitions)?;
        trim_essential(&p)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    /// Outgoing edges of a state.
    pub fn out_edges(&self, state: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[state].iter().map(move |&i| &self.edges[i])
    }

    /// Underlying state graph as adjacency lists (parallel edges collapsed).
    pub fn state_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for e in &self.edges {
            adj[e.src].push(e.dst);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub fn symbol_index(&self, name: &str) -> Option<Symbol> {
        self.alphabet.iter().position(|a| a == name)
    }

    /// Sorted set of states reached from `from` by one edge labeled `label`.
    pub fn step(&self, from: &[usize], label: Symbol) -> Vec<usize> {
        let mut next: Vec<usize> = from
            .iter()
            .flat_map(|&s| self.out_edges(s))
            .filter(|e| e.label == label)
            .map(|e| e.dst)
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    /// Whether the word labels some path.
    pub fn accepts(&self, w: &[Symbol]) -> bool {
        let mut cur: Vec<usize> = (0..self.states.len()).collect();
        for &a in w {
            if a >= self.alphabet.len() {
                return false;
            }
            cur = self.step(&cur, a);
            if cur.is_empty() {
                return false;
            }
        }
        true
    }

    /// No state has two outgoing edges with the same label.
    pub fn is_right_resolving(&self) -> bool {
        (0..self.states.len()).all(|s| {
            let labels: Vec<_> = self.out_edges(s).map(|e| e.label).collect();
            let set: BTreeSet<_> = labels.iter().collect();
            set.len() == labels.len()
        })
    }

    pub fn is_essential(&self) -> bool {
        let mut has_in = vec![false; self.states.len()];
        let mut has_out = vec![false; self.states.len()];
        for e in &self.edges {
            has_out[e.src] = true;
            has_in[e.dst] = true;
        }
        has_in.iter().zip(&has_out).all(|(a, b)| *a && *b)
    }

    /// Successor symbols of a vertex-SFT symbol.
    pub fn vertex_successors(&self, a: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        debug_assert_eq!(self.kind, Kind::VertexSft);
        self.out_edges(a).map(|e| e.dst)
    }

    /// Human-readable rendering of a word.
    pub fn render(&self, w: &[Symbol]) -> String {
        join_names(&self.alphabet, w)
    }

    /// Edge SFT on the edges of this graph; symbol `i` is edge `i`.
    pub fn edge_sft(&self) -> Presentation {
        let alphabet = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{}.{}.{}", self.states[e.src], self.alphabet[e.label], i))
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| Edge {
                src: e.src,
                dst: e.dst,
                label: i,
            })
            .collect();
        Presentation::new(alphabet, self.states.clone(), edges, Kind::EdgeSft)
            .expect("edge SFT of a valid graph is valid")
    }

    /// Same graph with every label replaced through `map` into a new alphabet.
    pub fn relabel(&self, map: &[Symbol], alphabet: Vec<String>) -> Result<Presentation> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                label: map[e.label],
                ..*e
            })
            .collect();
        Presentation::new(alphabet, self.states.clone(), edges, Kind::LabeledSofic)
    }
}

/// Joins symbol names: plain concatenation when every name is one character,
/// otherwise dot-separated.
pub fn join_names(alphabet: &[String], w: &[Symbol]) -> String {
    let single = w.iter().all(|&a| alphabet[a].chars().count() == 1);
    let parts: Vec<&str> = w.iter().map(|&a| alphabet[a].as_str()).collect();
    if single {
        parts.concat()
    } else {
        parts.join(".")
    }
}

/// Removes states that lie on no bi-infinite path and drops symbols that no
/// longer occur. Idempotent.
pub fn trim_essential(p: &Presentation) -> Result<Presentation> {
    let n = p.states.len();
    let mut alive = vec![true; n];
    loop {
        let mut has_in = vec![false; n];
        let mut has_out = vec![false; n];
        for e in &p.edges {
            if alive[e.src] && alive[e.dst] {
                has_out[e.src] = true;
                has_in[e.dst] = true;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if alive[s] && !(has_in[s] && has_out[s]) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !alive.iter().any(|&a| a) {
        return Err(Error::EmptyShift);
    }
    if alive.iter().all(|&a| a) && {
        let used: BTreeSet<_> = p.edges.iter().map(|e| e.label).collect();
        used.len() == p.alphabet.len()
    } {
        return Ok(p.clone());
    }
    let state_map: Vec<Option<usize>> = {
        let mut next = 0;
        alive
            .iter()
            .map(|&a| {
                a.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let kept: Vec<&Edge> = p
        .edges
        .iter()
        .filter(|e| alive[e.src] && alive[e.dst])
        .collect();
    let used: BTreeSet<Symbol> = kept.iter().map(|e| e.label).collect();
    let label_map: BTreeMap<Symbol, Symbol> = used.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let alphabet = used.iter().map(|&l| p.alphabet[l].clone()).collect();
    let states = (0..n)
        .filter(|&s| alive[s])
        .map(|s| p.states[s].clone())
        .collect();
    let edges = kept
        .iter()
        .map(|e| Edge {
            src: state_map[e.src].unwrap(),
            dst: state_map[e.dst].unwrap(),
            label: label_map[&e.label],
        })
        .collect();
    Presentation::new(alphabet, states, edges, p.kind)
}

/// Strong connectivity of the underlying graph.
pub fn is_irreducible(p: &Presentation) -> bool {
    graph::is_strongly_connected(&p.state_adjacency())
}

/// Gcd of cycle lengths of an irreducible presentation.
pub fn period(p: &Presentation) -> Result<usize> {
    if !is_irreducible(p) {
        return Err(Error::NotIrreducible);
    }
    Ok(graph::period(&p.state_adjacency()))
}

/// All words of length `len`, each once, in lexicographic order.
pub fn enumerate_words(p: &Presentation, len: usize, limits: &Limits) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    if len == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    let all: Vec<usize> = (0..p.num_states()).collect();
    let mut word = Vec::with_capacity(len);
    enumerate_rec(p, &all, len, &mut word, &mut out, limits.max_words)?;
    Ok(out)
}

fn enumerate_rec(
    p: &Presentation,
    cur: &[usize],
    len: usize,
    word: &mut Word,
    out: &mut Vec<Word>,
    cap: usize,
) -> Result<()> {
    if word.len() == len {
        if out.len() >= cap {
            return Err(Error::ResourceLimit {
                what: "word count",
                limit: cap,
            });
        }
        out.push(word.clone());
        return Ok(());
    }
    for a in 0..p.num_symbols() {
        let next = p.step(cur, a);
        if next.is_empty() {
            continue;
        }
        word.push(a);
        enumerate_rec(p, &next, len, word, out, cap)?;
        word.pop();
    }
    Ok(())
}

/// Number of distinct words of length `len`, by dynamic programming over the
/// subset automaton (no cap on the count itself).
pub fn count_words(p: &Presentation, len: usize) -> u128 {
    let mut layer: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
    layer.insert((0..p.num_states()).collect(), 1);
    for _ in 0..len {
        let mut next: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
        for (set, c) in &layer {
            for a in 0..p.num_symbols() {
                let s = p.step(set, a);
                if !s.is_empty() {
                    *next.entry(s).or_default() += c;
                }
            }
        }
        layer = next;
    }
    layer.values().sum()
}

/// `N`-th higher block recoding. Returns the recoded presentation, the
/// conjugacy into it (memory 0, anticipation `N - 1`) and its 1-block
/// inverse. SFT inputs become vertex SFTs on their `N`-blocks; sofic inputs
/// become labeled graphs on paths of length `N - 1`.
pub fn higher_block(
    p: &Presentation,
    n: usize,
    limits: &Limits,
) -> Result<(Presentation, SlidingBlockCode, SlidingBlockCode)> {
    if n == 0 {
        return Err(Error::InvalidPresentation("window must be at least 1".into()));
    }
    if n == 1 && p.kind != Kind::EdgeSft {
        let id = SlidingBlockCode::identity(p, limits)?;
        return Ok((p.clone(), id.clone(), id));
    }
    let blocks = enumerate_words(p, n, limits)?;
    if blocks.len() > limits.max_states {
        return Err(Error::ResourceLimit {
            what: "higher block symbols",
            limit: limits.max_states,
        });
    }
    let index: HashMap<&Word, usize> = blocks.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let names: Vec<String> = blocks.iter().map(|u| join_names(&p.alphabet, u)).collect();
    let recoded = if p.kind.is_sft() {
        let mut transitions = Vec::new();
        for w in enumerate_words(p, n + 1, limits)? {
            transitions.push((index[&w[..n].to_vec()], index[&w[1..].to_vec()]));
        }
        Presentation::vertex_sft(names.clone(), &transitions)?
    } else {
        sofic_higher_block(p, n, &index, names.clone(), limits)?
    };
    let table: BTreeMap<Word, Symbol> = blocks
        .iter()
        .enumerate()
        .map(|(i, u)| (u.clone(), i))
        .collect();
    let conj = SlidingBlockCode::new(p.clone(), names, 0, n - 1, table, limits)?;
    let inv_table = blocks
        .iter()
        .enumerate()
        .map(|(i, u)| (vec![i], u[0]))
        .collect();
    let inv = SlidingBlockCode::new(recoded.clone(), p.alphabet.clone(), 0, 0, inv_table, limits)?;
    Ok((recoded, conj, inv))
}

fn sofic_higher_block(
    p: &Presentation,
    n: usize,
    index: &HashMap<&Word, usize>,
    names: Vec<String>,
    limits: &Limits,
) -> Result<Presentation> {
    // states: edge paths of length n-1; edges: edge paths of length n
    let mut paths: Vec<Vec<usize>> = (0..p.edges.len()).map(|e| vec![e]).collect();
    for _ in 1..n - 1 {
        let mut next = Vec::new();
        for path in &paths {
            let last = p.edges[*path.last().unwrap()];
            for &e in &p.out[last.dst] {
                let mut q = path.clone();
                q.push(e);
                next.push(q);
            }
        }
        if next.len() > limits.max_states {
            return Err(Error::ResourceLimit {
                what: "higher block states",
                limit: limits.max_states,
            });
        }
        paths = next;
    }
    let state_of: HashMap<&Vec<usize>, usize> = paths.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let mut edges = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let last = p.edges[*path.last().unwrap()];
        for &e in &p.out[last.dst] {
            let mut full = path.clone();
            full.push(e);
            let label_word: Word = full.iter().map(|&x| p.edges[x].label).collect();
            let dst = state_of[&full[1..].to_vec()];
            edges.push(Edge {
                src: i,
                dst,
                label: index[&label_word],
            });
        }
    }
    let states = (0..paths.len()).map(|i| format!("q{i}")).collect();
    Presentation::new(names, states, edges, Kind::LabeledSofic)
}
