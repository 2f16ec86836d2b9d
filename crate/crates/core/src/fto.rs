//! Finite-to-one codes: diamonds, degree, and periodic fibers.
//!
//! Everything here runs on the normalized form of a code (a 1-block code on
//! a vertex SFT). For a 1-block code on a 1-step SFT, the symbols that occur
//! at position `i` among the preimages of a word `w` are the intersection of
//! the symbols reachable at `i` from the left along `w[..=i]` and those
//! co-reachable from the right along `w[i..]`. The degree is the minimum of
//! that count over all words and positions. Both one-sided sets live in a
//! finite closure, so the minimum is computed exactly by breadth-first search
//! over the closure; the per-length minimum `m_L` falls out of the same
//! search.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::bitset::BitSet;
use crate::blockcode::{normalize, OneBlockCode, SlidingBlockCode};
use crate::config::{AnalysisConfig, Limits};
use crate::graph;
use crate::shiftspace::{join_names, Symbol, Word};
use crate::{Error, Result};

/// Two distinct paths with the same endpoints and the same image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diamond {
    pub upper: Word,
    pub lower: Word,
    pub image: Word,
    pub upper_text: String,
    pub lower_text: String,
    pub image_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteToOne {
    pub finite_to_one: bool,
    pub diamond: Option<Diamond>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeWitness {
    pub word: Word,
    pub position: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub finite_to_one: bool,
    pub degree: Option<usize>,
    pub witness: Option<DegreeWitness>,
    pub diamond: Option<Diamond>,
    /// `trace[i]` is `m_{i+1}`: the least symbol count over words of length
    /// at most `i + 1`.
    pub trace: Vec<usize>,
    pub plateau: usize,
    /// First length `L` with `m_L = m_{L+s}` inside the trace.
    pub stabilized_at: Option<usize>,
    /// The closure saturated, so the degree is exact and not only a plateau.
    pub exact: bool,
    pub witness_extension_stable: bool,
}

/// Decides finite-to-one by searching the pair graph for a diamond.
pub fn is_finite_to_one(pi: &SlidingBlockCode, limits: &Limits) -> Result<FiniteToOne> {
    let nc = normalize(pi, limits)?;
    let code = OneBlockCode::new(&nc.code)?;
    let diamond = find_diamond(&code).map(|(upper, lower)| {
        let image = code.image_word(&upper);
        Diamond {
            upper_text: join_names(nc.domain.alphabet(), &upper),
            lower_text: join_names(nc.domain.alphabet(), &lower),
            image_text: join_names(pi.codomain(), &image),
            upper,
            lower,
            image,
        }
    });
    Ok(FiniteToOne {
        finite_to_one: diamond.is_none(),
        diamond,
    })
}

/// Breadth-first search over off-diagonal pairs from every diagonal pair;
/// the first return to the diagonal closes a diamond.
pub(crate) fn find_diamond(code: &OneBlockCode) -> Option<(Word, Word)> {
    let n = code.num_symbols();
    let mut parent: HashMap<(Symbol, Symbol), Option<(Symbol, Symbol)>> = HashMap::new();
    let mut origin: HashMap<(Symbol, Symbol), Symbol> = HashMap::new();
    let mut queue = VecDeque::new();
    for a in 0..n {
        for &c in code.succ(a) {
            for &d in code.succ(a) {
                if c != d && code.image(c) == code.image(d) && !parent.contains_key(&(c, d)) {
                    parent.insert((c, d), None);
                    origin.insert((c, d), a);
                    queue.push_back((c, d));
                }
            }
        }
    }
    while let Some((c, d)) = queue.pop_front() {
        for &e in code.succ(c) {
            for &f in code.succ(d) {
                if code.image(e) != code.image(f) {
                    continue;
                }
                if e == f {
                    let mut upper = vec![e];
                    let mut lower = vec![e];
                    let mut cur = Some((c, d));
                    let mut first = (c, d);
                    while let Some(p) = cur {
                        upper.push(p.0);
                        lower.push(p.1);
                        first = p;
                        cur = parent[&p];
                    }
                    let a = origin[&first];
                    upper.push(a);
                    lower.push(a);
                    upper.reverse();
                    lower.reverse();
                    return Some((upper, lower));
                }
                if let std::collections::hash_map::Entry::Vacant(v) = parent.entry((e, f)) {
                    v.insert(Some((c, d)));
                    origin.insert((e, f), origin[&(c, d)]);
                    queue.push_back((e, f));
                }
            }
        }
    }
    None
}

/// Domain symbols at position `i` among the preimages of `w`.
pub fn symbols_at(code: &OneBlockCode, w: &[Symbol], i: usize) -> BitSet {
    let n = code.num_symbols();
    let mut fwd = BitSet::from_indices(n, code.fiber(w[0]).iter().copied());
    for &y in &w[1..=i] {
        fwd = step_forward(code, &fwd, y);
    }
    let last = w.len() - 1;
    let mut bwd = BitSet::from_indices(n, code.fiber(w[last]).iter().copied());
    for &y in w[i..last].iter().rev() {
        bwd = step_backward(code, &bwd, y);
    }
    fwd.intersect_with(&bwd);
    fwd
}

pub(crate) fn step_forward(code: &OneBlockCode, set: &BitSet, y: Symbol) -> BitSet {
    let n = code.num_symbols();
    BitSet::from_indices(
        n,
        code.fiber(y)
            .iter()
            .copied()
            .filter(|&b| code.pred(b).iter().any(|&a| set.contains(a))),
    )
}

pub(crate) fn step_backward(code: &OneBlockCode, set: &BitSet, y: Symbol) -> BitSet {
    let n = code.num_symbols();
    BitSet::from_indices(
        n,
        code.fiber(y)
            .iter()
            .copied()
            .filter(|&a| code.succ(a).iter().any(|&b| set.contains(b))),
    )
}

/// One-sided reachable sets with the length and shortlex-first word that
/// realizes each.
struct SideClosure {
    /// per letter: (set, minimal word)
    by_letter: Vec<Vec<(BitSet, Word)>>,
}

fn side_closure(code: &OneBlockCode, forward: bool, limits: &Limits) -> Result<SideClosure> {
    let n = code.num_symbols();
    let k = code.num_image_symbols();
    let mut seen: HashMap<(Symbol, BitSet), ()> = HashMap::new();
    let mut by_letter = vec![Vec::new(); k];
    let mut queue = VecDeque::new();
    for (y, bucket) in by_letter.iter_mut().enumerate() {
        let set = BitSet::from_indices(n, code.fiber(y).iter().copied());
        seen.insert((y, set.clone()), ());
        bucket.push((set.clone(), vec![y]));
        queue.push_back((y, set, vec![y]));
    }
    while let Some((_, set, word)) = queue.pop_front() {
        for (z, bucket) in by_letter.iter_mut().enumerate() {
            let next = if forward {
                step_forward(code, &set, z)
            } else {
                step_backward(code, &set, z)
            };
            if next.is_empty() || seen.contains_key(&(z, next.clone())) {
                continue;
            }
            if seen.len() >= limits.max_states {
                return Err(Error::ResourceLimit {
                    what: "degree closure size",
                    limit: limits.max_states,
                });
            }
            let mut w = word.clone();
            if forward {
                w.push(z);
            } else {
                w.insert(0, z);
            }
            seen.insert((z, next.clone()), ());
            bucket.push((next.clone(), w.clone()));
            queue.push_back((z, next, w));
        }
    }
    Ok(SideClosure { by_letter })
}

/// Degree of a finite-to-one code with its witness and plateau trace.
pub fn degree(pi: &SlidingBlockCode, cfg: &AnalysisConfig) -> Result<DegreeReport> {
    let nc = normalize(pi, &cfg.limits)?;
    let code = OneBlockCode::new(&nc.code)?;
    if find_diamond(&code).is_some() {
        return Err(Error::NotFiniteToOne);
    }
    let plateau = cfg
        .degree_plateau
        .unwrap_or(nc.domain.num_states() * nc.domain.num_states());
    let (d, witness, best_by_len) = degree_search(&code, &cfg.limits)?;
    let first = best_by_len.iter().position(|&m| m == Some(d)).expect("attained") + 1;
    let trace_len = first + plateau;
    let mut trace = Vec::with_capacity(trace_len);
    let mut cur = usize::MAX;
    for l in 1..=trace_len {
        if let Some(Some(m)) = best_by_len.get(l - 1) {
            cur = cur.min(*m);
        }
        trace.push(cur);
    }
    let stabilized_at = (1..=trace_len.saturating_sub(plateau))
        .find(|&l| trace[l - 1] == trace[l - 1 + plateau] && trace[l - 1] != usize::MAX);
    let stable = extension_stable(&code, &witness.0, witness.1, d);
    Ok(DegreeReport {
        finite_to_one: true,
        degree: Some(d),
        witness: Some(DegreeWitness {
            text: join_names(pi.codomain(), &witness.0),
            word: witness.0,
            position: witness.1,
        }),
        diamond: None,
        trace,
        plateau,
        stabilized_at,
        exact: true,
        witness_extension_stable: stable,
    })
}

/// Degree report that records infinite-to-one codes instead of failing.
pub fn degree_report(pi: &SlidingBlockCode, cfg: &AnalysisConfig) -> Result<DegreeReport> {
    let fto = is_finite_to_one(pi, &cfg.limits)?;
    if !fto.finite_to_one {
        return Ok(DegreeReport {
            finite_to_one: false,
            degree: None,
            witness: None,
            diamond: fto.diamond,
            trace: Vec::new(),
            plateau: 0,
            stabilized_at: None,
            exact: false,
            witness_extension_stable: false,
        });
    }
    degree(pi, cfg)
}

type DegreeSearch = (usize, (Word, usize), Vec<Option<usize>>);

/// Minimum of `|F ∩ B|` over compatible one-sided sets, the tie-broken
/// witness, and the least count achievable at each exact combined length.
fn degree_search(code: &OneBlockCode, limits: &Limits) -> Result<DegreeSearch> {
    let fwd = side_closure(code, true, limits)?;
    let bwd = side_closure(code, false, limits)?;
    let mut best: Option<(usize, usize, usize, Word)> = None;
    let mut by_len: Vec<Option<usize>> = Vec::new();
    for y in 0..code.num_image_symbols() {
        for (f, fw) in &fwd.by_letter[y] {
            for (b, bw) in &bwd.by_letter[y] {
                let count = f.intersection_len(b);
                if count == 0 {
                    continue;
                }
                let len = fw.len() + bw.len() - 1;
                if by_len.len() < len {
                    by_len.resize(len, None);
                }
                let slot = &mut by_len[len - 1];
                *slot = Some(slot.map_or(count, |m| m.min(count)));
                let mut word = fw.clone();
                word.extend_from_slice(&bw[1..]);
                let cand = (count, len, fw.len() - 1, word);
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
    }
    let (d, _, pos, word) = best.ok_or(Error::EmptyShift)?;
    Ok((d, (word, pos), by_len))
}

/// Whether every one-symbol extension of the witness keeps the count.
fn extension_stable(code: &OneBlockCode, w: &[Symbol], i: usize, d: usize) -> bool {
    let k = code.num_image_symbols();
    for z in 0..k {
        let mut left = vec![z];
        left.extend_from_slice(w);
        let s = symbols_at(code, &left, i + 1);
        if in_language(code, &left) && s.len() != d {
            return false;
        }
        let mut right = w.to_vec();
        right.push(z);
        let s = symbols_at(code, &right, i);
        if in_language(code, &right) && s.len() != d {
            return false;
        }
    }
    true
}

pub(crate) fn in_language(code: &OneBlockCode, w: &[Symbol]) -> bool {
    !symbols_at(code, w, 0).is_empty()
}

/// Number of periodic points mapping to `y^∞`.
pub fn periodic_fiber_count(pi: &SlidingBlockCode, y: &[Symbol], limits: &Limits) -> Result<usize> {
    if y.is_empty() || y.iter().any(|&s| s >= pi.codomain().len()) {
        return Err(Error::NotInLanguage(format!("{y:?}")));
    }
    let nc = normalize(pi, limits)?;
    let code = OneBlockCode::new(&nc.code)?;
    let p = y.len();
    // phase graph on (symbol, phase)
    let mut id = HashMap::new();
    let mut nodes = Vec::new();
    for (i, &letter) in y.iter().enumerate() {
        for &a in code.fiber(letter) {
            id.insert((a, i), nodes.len());
            nodes.push((a, i));
        }
    }
    if nodes.len() > limits.max_states {
        return Err(Error::ResourceLimit {
            what: "phase graph nodes",
            limit: limits.max_states,
        });
    }
    let adj: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&(a, i)| {
            code.succ(a)
                .iter()
                .filter_map(|&b| id.get(&(b, (i + 1) % p)).copied())
                .collect()
        })
        .collect();
    let (comp, ncomp) = graph::scc(&adj);
    let mut size = vec![0usize; ncomp];
    let mut internal = vec![0usize; ncomp];
    for (u, out) in adj.iter().enumerate() {
        size[comp[u]] += 1;
        internal[comp[u]] += out.iter().filter(|&&v| comp[v] == comp[u]).count();
    }
    let mut count = 0;
    let mut any_cycle = false;
    for c in 0..ncomp {
        if internal[c] == 0 {
            continue;
        }
        any_cycle = true;
        if internal[c] != size[c] {
            return Err(Error::NotFiniteToOne);
        }
        count += nodes
            .iter()
            .enumerate()
            .filter(|&(u, &(_, i))| comp[u] == c && i == 0)
            .count();
    }
    if !any_cycle {
        return Err(Error::NotInLanguage(join_names(pi.codomain(), y)));
    }
    Ok(count)
}
