//! Routability, transition blocks and class degree.
//!
//! All operations take a 1-block code on a vertex SFT. A preimage `u` of `w`
//! is routable through `a` at `n` when some preimage agrees with `u` at both
//! ends and carries `a` at `n`; this depends on `(u_0, u_last)` only, so the
//! analysis works with routing sets `R(s, t)` indexed by endpoint pairs.
//!
//! For the class degree, a word `w` with cut `n` is summarized by the
//! relation `F` of its prefix `w[..=n]` (which first symbols reach which
//! middle symbols) and the relation `B` of its suffix `w[n..]`. The routing
//! sets, hence the minimal depth at that cut, depend on `(F, B)` only. Word
//! relations form a finite set closed under extension, so a breadth-first
//! search over them enumerates every achievable depth with the shortest word
//! realizing it. When the search saturates the minimum is exact; a value of 1
//! is exact as soon as it is seen.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::bitset::BitSet;
use crate::blockcode::{normalize, OneBlockCode, SlidingBlockCode};
use crate::config::{AnalysisConfig, Limits};
use crate::fto::{step_backward, step_forward, symbols_at};
use crate::hitting::{min_hitting_set, min_hitting_set_at_most};
use crate::shiftspace::{join_names, Kind, Symbol, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionBlock {
    pub w: Word,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: Vec<Symbol>,
    pub depth: usize,
    pub certified: bool,
}

/// Routing sets of a word at a cut, keyed by realizable endpoint pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingTable {
    pub w: Word,
    pub n: usize,
    pub sets: BTreeMap<(Symbol, Symbol), Vec<Symbol>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassDegreeStatus {
    /// The relation closure was exhausted or the value is 1.
    Exact,
    /// The search stopped early but the trace shows the plateau.
    UpperBoundStabilized,
    /// No plateau within the explored lengths.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDegreeReport {
    pub class_degree: usize,
    pub witness: TransitionBlock,
    /// `trace[i]` is `c_{i+3}`.
    pub trace: Vec<usize>,
    pub plateau: usize,
    pub stabilized_at: Option<usize>,
    pub status: ClassDegreeStatus,
    /// Number of distinct word relations explored.
    pub relations: usize,
    pub witness_text: String,
    pub m_text: Vec<String>,
}

fn one_block(pi: &SlidingBlockCode) -> Result<OneBlockCode> {
    if !pi.is_one_block() || pi.domain().kind() != Kind::VertexSft {
        return Err(Error::InvalidCode(
            "expected a 1-block code on a vertex SFT; normalize first".into(),
        ));
    }
    OneBlockCode::new(pi)
}

fn check_position(w: &[Symbol], n: usize) -> Result<()> {
    if n == 0 || n + 1 >= w.len() {
        return Err(Error::BadPosition { n, len: w.len() });
    }
    Ok(())
}

fn check_image_word(pi: &SlidingBlockCode, w: &[Symbol]) -> Result<()> {
    if w.iter().any(|&y| y >= pi.codomain().len()) {
        return Err(Error::NotInLanguage(format!("{w:?}")));
    }
    Ok(())
}

/// All preimages of `w`, in lexicographic order.
pub fn preimage_words(pi: &SlidingBlockCode, w: &[Symbol], limits: &Limits) -> Result<Vec<Word>> {
    let code = one_block(pi)?;
    check_image_word(pi, w)?;
    preimages(&code, w, limits)
}

pub(crate) fn preimages(code: &OneBlockCode, w: &[Symbol], limits: &Limits) -> Result<Vec<Word>> {
    if w.is_empty() {
        return Ok(vec![Vec::new()]);
    }
    // alive[i]: symbols at i that extend to a full preimage of w[i..]
    let n = code.num_symbols();
    let mut alive = vec![BitSet::new(n); w.len()];
    let last = w.len() - 1;
    alive[last] = BitSet::from_indices(n, code.fiber(w[last]).iter().copied());
    for i in (0..last).rev() {
        alive[i] = BitSet::from_indices(
            n,
            code.fiber(w[i])
                .iter()
                .copied()
                .filter(|&a| code.succ(a).iter().any(|&b| alive[i + 1].contains(b))),
        );
    }
    let mut out = Vec::new();
    let mut stack: Vec<Word> = alive[0].iter().map(|a| vec![a]).collect();
    stack.reverse();
    while let Some(u) = stack.pop() {
        if u.len() == w.len() {
            if out.len() >= limits.max_words {
                return Err(Error::ResourceLimit {
                    what: "preimage words",
                    limit: limits.max_words,
                });
            }
            out.push(u);
            continue;
        }
        let i = u.len();
        let mut next: Vec<Symbol> = code
            .succ(*u.last().unwrap())
            .iter()
            .copied()
            .filter(|&b| alive[i].contains(b))
            .collect();
        next.sort_unstable();
        for &b in next.iter().rev() {
            let mut v = u.clone();
            v.push(b);
            stack.push(v);
        }
    }
    Ok(out)
}

/// Whether preimage `u` of `w` is routable through `a` at time `n`.
pub fn routable_through(
    pi: &SlidingBlockCode,
    w: &[Symbol],
    n: usize,
    u: &[Symbol],
    a: Symbol,
) -> Result<bool> {
    let code = one_block(pi)?;
    check_image_word(pi, w)?;
    check_position(w, n)?;
    if u.len() != w.len() || !code.is_path(u) || code.image_word(u) != w {
        return Err(Error::NotAPreimage);
    }
    Ok(routing_set(&code, w, n, u[0], u[u.len() - 1]).contains(a))
}

/// Symbols at `n` reachable from `s` along preimages of `w[..=n]`.
fn forward_from(code: &OneBlockCode, w: &[Symbol], n: usize, s: Symbol) -> BitSet {
    let mut fwd = BitSet::from_indices(code.num_symbols(), [s]);
    for &y in &w[1..=n] {
        fwd = step_forward(code, &fwd, y);
    }
    fwd
}

/// Symbols at `n` that reach `t` along preimages of `w[n..]`.
fn backward_from(code: &OneBlockCode, w: &[Symbol], n: usize, t: Symbol) -> BitSet {
    let mut bwd = BitSet::from_indices(code.num_symbols(), [t]);
    for &y in w[n..w.len() - 1].iter().rev() {
        bwd = step_backward(code, &bwd, y);
    }
    bwd
}

/// Middle symbols a path over `w` from `s` to `t` can carry at `n`.
fn routing_set(code: &OneBlockCode, w: &[Symbol], n: usize, s: Symbol, t: Symbol) -> BitSet {
    let mut fwd = forward_from(code, w, n, s);
    fwd.intersect_with(&backward_from(code, w, n, t));
    fwd
}

fn table_for(code: &OneBlockCode, w: &[Symbol], n: usize) -> RoutingTable {
    let mut sets = BTreeMap::new();
    if !symbols_at(code, w, 0).is_empty() {
        let fwd: Vec<(Symbol, BitSet)> =
            code.fiber(w[0]).iter().map(|&s| (s, forward_from(code, w, n, s))).filter(|(_, f)| !f.is_empty()).collect();
        let bwd: Vec<(Symbol, BitSet)> = code
            .fiber(w[w.len() - 1])
            .iter()
            .map(|&t| (t, backward_from(code, w, n, t)))
            .filter(|(_, b)| !b.is_empty())
            .collect();
        for (s, f) in &fwd {
            for (t, b) in &bwd {
                if f.intersects(b) {
                    let mut r = f.clone();
                    r.intersect_with(b);
                    sets.insert((*s, *t), r.iter().collect());
                }
            }
        }
    }
    RoutingTable {
        w: w.to_vec(),
        n,
        sets,
    }
}

/// Whether `m` meets every nonempty routing set of `(w, n)`, and one exists.
fn hits_every_route(code: &OneBlockCode, w: &[Symbol], n: usize, m: &[Symbol]) -> bool {
    if symbols_at(code, w, 0).is_empty() {
        return false;
    }
    let m = BitSet::from_indices(code.num_symbols(), m.iter().copied());
    let fwd: Vec<BitSet> =
        code.fiber(w[0]).iter().map(|&s| forward_from(code, w, n, s)).filter(|f| !f.is_empty()).collect();
    let bwd: Vec<BitSet> = code
        .fiber(w[w.len() - 1])
        .iter()
        .map(|&t| backward_from(code, w, n, t))
        .filter(|b| !b.is_empty())
        .collect();
    let mut routed = false;
    for f in &fwd {
        for b in &bwd {
            let mut r = f.clone();
            r.intersect_with(b);
            if !r.is_empty() {
                routed = true;
                if !r.intersects(&m) {
                    return false;
                }
            }
        }
    }
    routed
}

pub fn routing_table(pi: &SlidingBlockCode, w: &[Symbol], n: usize) -> Result<RoutingTable> {
    let code = one_block(pi)?;
    check_image_word(pi, w)?;
    check_position(w, n)?;
    Ok(table_for(&code, w, n))
}

/// Whether `(w, n, M)` is a transition block.
pub fn is_transition_block(pi: &SlidingBlockCode, w: &[Symbol], n: usize, m: &[Symbol]) -> Result<bool> {
    let table = routing_table(pi, w, n)?;
    let fiber_ok = m.iter().all(|&a| a < pi.domain().num_symbols() && pi.lookup(&[a]) == Some(w[n]));
    Ok(fiber_ok
        && !table.sets.is_empty()
        && table.sets.values().all(|r| r.iter().any(|a| m.contains(a))))
}

/// Minimum hitting set of a routing table, as domain symbols.
fn table_depth(code: &OneBlockCode, table: &RoutingTable) -> Option<Vec<Symbol>> {
    let fiber = code.fiber(table.w[table.n]);
    let family: Vec<BitSet> = table
        .sets
        .values()
        .map(|r| BitSet::from_indices(fiber.len(), r.iter().map(|&a| code.local(a))))
        .collect();
    if family.is_empty() {
        return None;
    }
    min_hitting_set(fiber.len(), &family).map(|m| m.into_iter().map(|i| fiber[i]).collect())
}

/// Least-depth cut of `w`: smallest `n` among ties, then lexicographic `M`.
pub fn minimal_depth_for_word(pi: &SlidingBlockCode, w: &[Symbol]) -> Result<(usize, Vec<Symbol>)> {
    let code = one_block(pi)?;
    check_image_word(pi, w)?;
    if w.len() < 3 {
        return Err(Error::BadPosition { n: 1, len: w.len() });
    }
    let mut best: Option<(usize, usize, Vec<Symbol>)> = None;
    for n in 1..w.len() - 1 {
        let table = table_for(&code, w, n);
        let Some(m) = table_depth(&code, &table) else {
            return Err(Error::NotInLanguage(join_names(pi.codomain(), w)));
        };
        let cand = (m.len(), n, m);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    let (_, n, m) = best.expect("|w| >= 3");
    Ok((n, m))
}

/// The unique symbol of `tb.M` that `u` routes through.
pub fn unique_routing_symbol(pi: &SlidingBlockCode, tb: &TransitionBlock, u: &[Symbol]) -> Result<Symbol> {
    let code = one_block(pi)?;
    check_position(&tb.w, tb.n)?;
    if u.len() != tb.w.len() || !code.is_path(u) || code.image_word(u) != tb.w {
        return Err(Error::NotAPreimage);
    }
    unique_in(&code, tb, u[0], u[u.len() - 1])
}

pub(crate) fn unique_in(code: &OneBlockCode, tb: &TransitionBlock, s: Symbol, t: Symbol) -> Result<Symbol> {
    let r = routing_set(code, &tb.w, tb.n, s, t);
    let hits: Vec<Symbol> = tb.m.iter().copied().filter(|&a| r.contains(a)).collect();
    match hits.as_slice() {
        [a] => Ok(*a),
        _ => Err(Error::NotMinimal(format!(
            "endpoint pair ({s}, {t}) routes through {} symbols of M",
            hits.len()
        ))),
    }
}

/// Checks unique routing for every realizable endpoint pair of `tb`.
pub(crate) fn check_unique_routing(code: &OneBlockCode, tb: &TransitionBlock) -> Result<()> {
    let table = table_for(code, &tb.w, tb.n);
    for &(s, t) in table.sets.keys() {
        unique_in(code, tb, s, t)?;
    }
    Ok(())
}

/// Relation of a word of length at least 2: pairs (first symbol, last
/// symbol) joined by a preimage path, as positions inside the two fibers.
/// Pair `(i, j)` is bit `i * |fiber(last)| + j`.
struct RelationNode {
    rel: BitSet,
    first: Symbol,
    last: Symbol,
    word: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    depth: usize,
    len: usize,
    n: usize,
    m: Vec<Symbol>,
    w: Word,
}

struct Search {
    best: Option<Candidate>,
    /// least depth at each exact combined length (index = length)
    by_len: Vec<Option<usize>>,
    /// every length up to this one has been fully evaluated
    complete_len: usize,
    saturated: bool,
    limited: bool,
    relations: usize,
    /// candidates longer than this never become the witness
    len_cap: usize,
}

type RelationKey = (Symbol, Symbol, BitSet);

struct Closure<'a> {
    code: &'a OneBlockCode,
    nodes: Vec<RelationNode>,
    index: HashMap<RelationKey, usize>,
    ending: Vec<Vec<usize>>,
    starting: Vec<Vec<usize>>,
    /// family -> (largest cap tried, answer within it)
    cache: HashMap<Vec<BitSet>, (usize, Option<Vec<usize>>)>,
}

impl<'a> Closure<'a> {
    fn new(code: &'a OneBlockCode) -> Self {
        let k = code.num_image_symbols();
        Closure {
            code,
            nodes: Vec::new(),
            index: HashMap::new(),
            ending: vec![Vec::new(); k],
            starting: vec![Vec::new(); k],
            cache: HashMap::new(),
        }
    }

    fn width(&self, y: Symbol) -> usize {
        self.code.fiber(y).len()
    }

    /// Relation of a two-letter word.
    fn pair_relation(&self, y0: Symbol, y1: Symbol) -> BitSet {
        let w1 = self.width(y1);
        let mut rel = BitSet::new(self.width(y0) * w1);
        for (i, &s) in self.code.fiber(y0).iter().enumerate() {
            for &t in self.code.succ(s) {
                if self.code.image(t) == y1 {
                    rel.insert(i * w1 + self.code.local(t));
                }
            }
        }
        rel
    }

    fn extend(&self, node: &RelationNode, z: Symbol) -> BitSet {
        let wl = self.width(node.last);
        let wz = self.width(z);
        let mut rel = BitSet::new(self.width(node.first) * wz);
        for bit in node.rel.iter() {
            let (i, j) = (bit / wl, bit % wl);
            let t = self.code.fiber(node.last)[j];
            for &u in self.code.succ(t) {
                if self.code.image(u) == z {
                    rel.insert(i * wz + self.code.local(u));
                }
            }
        }
        rel
    }

    fn contains(&self, first: Symbol, last: Symbol, rel: &BitSet) -> bool {
        self.index.contains_key(&(first, last, rel.clone()))
    }

    fn insert(&mut self, rel: BitSet, first: Symbol, last: Symbol, word: Word) -> Option<usize> {
        let key = (first, last, rel);
        if self.index.contains_key(&key) {
            return None;
        }
        let id = self.nodes.len();
        let rel = key.2.clone();
        self.index.insert(key, id);
        self.ending[last].push(id);
        self.starting[first].push(id);
        self.nodes.push(RelationNode {
            rel,
            first,
            last,
            word,
        });
        Some(id)
    }

    /// Depth of the cut joining prefix relation `f` and suffix relation `b`,
    /// when it is at most `cap`.
    fn pair_depth(&mut self, f: usize, b: usize, cap: usize) -> Option<Vec<Symbol>> {
        let (fnode, bnode) = (&self.nodes[f], &self.nodes[b]);
        let middle = self.code.fiber(fnode.last);
        let wm = middle.len();
        let wt = self.width(bnode.last);
        // equal rows or columns give equal routing sets
        let mut rows: Vec<BitSet> = (0..self.width(fnode.first))
            .map(|i| BitSet::from_indices(wm, (0..wm).filter(|&k| fnode.rel.contains(i * wm + k))))
            .filter(|r| !r.is_empty())
            .collect();
        rows.sort();
        rows.dedup();
        let mut cols: Vec<BitSet> = (0..wt)
            .map(|j| BitSet::from_indices(wm, (0..wm).filter(|&k| bnode.rel.contains(k * wt + j))))
            .filter(|c| !c.is_empty())
            .collect();
        cols.sort();
        cols.dedup();
        // one symbol on every route: the smallest such symbol is the lex-min hitting set
        let mut common: Option<BitSet> = None;
        'scan: for r in &rows {
            for c in &cols {
                if !r.intersects(c) {
                    continue;
                }
                let m = common.get_or_insert_with(|| r.clone());
                m.intersect_with(r);
                m.intersect_with(c);
                if m.is_empty() {
                    break 'scan;
                }
            }
        }
        if let Some(a) = common.as_ref()?.first() {
            return Some(vec![middle[a]]);
        }
        let mut family = Vec::new();
        for r in &rows {
            for c in &cols {
                if r.intersects(c) {
                    let mut x = r.clone();
                    x.intersect_with(c);
                    family.push(x);
                }
            }
        }
        family.sort();
        family.dedup();
        if cap < 2 {
            return None;
        }
        let hit = match self.cache.get(&family) {
            Some((_, Some(h))) => Some(h.clone()),
            Some((tried, None)) if *tried >= cap => None,
            _ => {
                let h = min_hitting_set_at_most(wm, &family, cap);
                let tried = if h.is_some() { wm } else { cap };
                self.cache.insert(family, (tried, h.clone()));
                h
            }
        }?;
        (hit.len() <= cap).then(|| hit.into_iter().map(|i| middle[i]).collect())
    }
}

/// Breadth-first search over word relations, evaluating every compatible
/// prefix/suffix pair as soon as both are known.
fn relation_search(
    code: &OneBlockCode,
    max_word_len: Option<usize>,
    stop_at_one: bool,
    limits: &Limits,
) -> Result<Search> {
    let mut cl = Closure::new(code);
    let k = code.num_image_symbols();
    let mut level: Vec<usize> = Vec::new();
    for y0 in 0..k {
        for y1 in 0..k {
            let rel = cl.pair_relation(y0, y1);
            if !rel.is_empty() {
                if let Some(id) = cl.insert(rel, y0, y1, vec![y0, y1]) {
                    level.push(id);
                }
            }
        }
    }
    let mut search = Search {
        best: None,
        by_len: Vec::new(),
        complete_len: 2,
        saturated: false,
        limited: false,
        relations: 0,
        len_cap: max_word_len.unwrap_or(usize::MAX),
    };
    let mut word_len = 2;
    loop {
        // pair every new relation with every known one, in both roles
        for &id in &level {
            let last = cl.nodes[id].last;
            let first = cl.nodes[id].first;
            let suffixes = cl.starting[last].clone();
            for b in suffixes {
                evaluate(&mut cl, &mut search, id, b);
            }
            let prefixes = cl.ending[first].clone();
            for f in prefixes {
                // pairs of two new relations were handled above
                if f < level[0] {
                    evaluate(&mut cl, &mut search, f, id);
                }
            }
        }
        // all pairs of combined length <= word_len + 1 are now evaluated
        search.complete_len = word_len + 1;
        search.relations = cl.nodes.len();
        if stop_at_one
            && search
                .best
                .as_ref()
                .is_some_and(|b| b.depth == 1 && b.len <= search.complete_len)
        {
            return Ok(search);
        }
        if max_word_len.is_some_and(|m| word_len + 1 >= m) {
            return Ok(search);
        }
        let mut next = Vec::new();
        for &id in &level {
            for z in 0..k {
                let rel = cl.extend(&cl.nodes[id], z);
                let first = cl.nodes[id].first;
                if rel.is_empty() || cl.contains(first, z, &rel) {
                    continue;
                }
                if cl.nodes.len() >= limits.max_states {
                    search.limited = true;
                    return Ok(search);
                }
                let mut word = cl.nodes[id].word.clone();
                word.push(z);
                if let Some(nid) = cl.insert(rel, first, z, word) {
                    next.push(nid);
                }
            }
        }
        if next.is_empty() {
            search.saturated = true;
            return Ok(search);
        }
        level = next;
        word_len += 1;
    }
}

fn evaluate(cl: &mut Closure, search: &mut Search, f: usize, b: usize) {
    let len = cl.nodes[f].word.len() + cl.nodes[b].word.len() - 1;
    let n = cl.nodes[f].word.len() - 1;
    // only depths that lower the trace or beat the current witness matter
    let trace_cap = match search.by_len.get(len) {
        Some(Some(d)) => d - 1,
        _ => usize::MAX,
    };
    let best_cap = match &search.best {
        _ if len > search.len_cap => 0,
        None => usize::MAX,
        Some(b) if (len, n) <= (b.len, b.n) => b.depth,
        Some(b) => b.depth - 1,
    };
    let cap = trace_cap.max(best_cap);
    if cap == 0 {
        return;
    }
    let Some(m) = cl.pair_depth(f, b, cap) else {
        return;
    };
    let (fw, bw) = (&cl.nodes[f].word, &cl.nodes[b].word);
    if search.by_len.len() <= len {
        search.by_len.resize(len + 1, None);
    }
    let slot = &mut search.by_len[len];
    *slot = Some(slot.map_or(m.len(), |d| d.min(m.len())));
    let mut w = fw.clone();
    w.extend_from_slice(&bw[1..]);
    let cand = Candidate {
        depth: m.len(),
        len,
        n,
        m,
        w,
    };
    if len <= search.len_cap && search.best.as_ref().is_none_or(|b| cand < *b) {
        search.best = Some(cand);
    }
}

fn trace_from(by_len: &[Option<usize>], upto: usize) -> Vec<usize> {
    let mut cur = usize::MAX;
    (3..=upto)
        .map(|l| {
            if let Some(Some(d)) = by_len.get(l) {
                cur = cur.min(*d);
            }
            cur
        })
        .collect()
}

fn stabilized(trace: &[usize], plateau: usize) -> Option<usize> {
    (0..trace.len())
        .find(|&i| i + plateau < trace.len() && trace[i] == trace[i + plateau] && trace[i] != usize::MAX)
        .map(|i| i + 3)
}

fn report(
    pi: &SlidingBlockCode,
    code: &OneBlockCode,
    s: Search,
    trace: Vec<usize>,
    plateau: usize,
    status: ClassDegreeStatus,
) -> Result<ClassDegreeReport> {
    let best = s.best.ok_or(Error::EmptyShift)?;
    let certified = hits_every_route(code, &best.w, best.n, &best.m);
    let names = pi.domain().alphabet();
    Ok(ClassDegreeReport {
        class_degree: best.depth,
        stabilized_at: match status {
            // the trace can only stay at its final value
            ClassDegreeStatus::Exact => trace.iter().position(|&d| d == best.depth).map(|i| i + 3),
            _ => stabilized(&trace, plateau),
        },
        witness_text: join_names(pi.codomain(), &best.w),
        m_text: best.m.iter().map(|&a| names[a].clone()).collect(),
        witness: TransitionBlock {
            depth: best.depth,
            w: best.w,
            n: best.n,
            m: best.m,
            certified,
        },
        trace,
        plateau,
        status,
        relations: s.relations,
    })
}

/// `c_L` over words of length at most `max_len`, with trace `c_3..c_L`.
pub fn class_degree_upper(pi: &SlidingBlockCode, max_len: usize, cfg: &AnalysisConfig) -> Result<ClassDegreeReport> {
    let code = one_block(pi)?;
    if max_len < 3 {
        return Err(Error::BadPosition { n: 1, len: max_len });
    }
    let s = relation_search(&code, Some(max_len), false, &cfg.limits)?;
    if s.limited {
        return Err(Error::ResourceLimit {
            what: "class degree relations",
            limit: cfg.limits.max_states,
        });
    }
    let plateau = cfg.class_degree_plateau.unwrap_or(code.num_symbols() * code.num_symbols());
    let trace = trace_from(&s.by_len, max_len);
    let status = if s.saturated || s.best.as_ref().is_some_and(|b| b.depth == 1) {
        ClassDegreeStatus::Exact
    } else if stabilized(&trace, plateau).is_some() {
        ClassDegreeStatus::UpperBoundStabilized
    } else {
        ClassDegreeStatus::Inconclusive
    };
    report(pi, &code, s, trace, plateau, status)
}

/// Class degree of a code (normalized internally), with the tie-broken
/// minimal transition block on the normalized domain. Depth 1 ends the
/// search as soon as it is seen.
pub fn class_degree(pi: &SlidingBlockCode, cfg: &AnalysisConfig) -> Result<ClassDegreeReport> {
    let nc = normalize(pi, &cfg.limits)?;
    class_degree_normalized(&nc.code, cfg)
}

pub(crate) fn class_degree_normalized(pi: &SlidingBlockCode, cfg: &AnalysisConfig) -> Result<ClassDegreeReport> {
    let code = one_block(pi)?;
    let plateau = cfg.class_degree_plateau.unwrap_or(code.num_symbols() * code.num_symbols());
    let s = relation_search(&code, None, true, &cfg.limits)?;
    let exact = s.saturated || s.best.as_ref().is_some_and(|b| b.depth == 1);
    let (trace, status) = if exact {
        let first = s.best.as_ref().map_or(3, |b| b.len.max(3));
        (trace_from(&s.by_len, first.max(s.complete_len)), ClassDegreeStatus::Exact)
    } else {
        let t = trace_from(&s.by_len, s.complete_len);
        let st = if stabilized(&t, plateau).is_some() {
            ClassDegreeStatus::UpperBoundStabilized
        } else {
            ClassDegreeStatus::Inconclusive
        };
        (t, st)
    };
    report(pi, &code, s, trace, plateau, status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shiftspace::{enumerate_words, Presentation};

    fn lim() -> Limits {
        Limits::default()
    }

    fn merge() -> SlidingBlockCode {
        let x = Presentation::full_shift(["a", "b", "c"]);
        SlidingBlockCode::one_block(x, vec!["0".into(), "1".into()], &[0, 1, 1], &lim()).unwrap()
    }

    fn xor_normalized() -> SlidingBlockCode {
        let table = [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 0)]
            .into_iter()
            .collect();
        let full = Presentation::full_shift(["0", "1"]);
        let xor = SlidingBlockCode::new(full, vec!["0".into(), "1".into()], 0, 1, table, &lim()).unwrap();
        normalize(&xor, &lim()).unwrap().code
    }

    fn identity() -> SlidingBlockCode {
        SlidingBlockCode::identity(&Presentation::full_shift(["0", "1"]), &lim()).unwrap()
    }

    /// Oracle straight from the definition: scan all preimages.
    fn brute_routable(pi: &SlidingBlockCode, w: &[Symbol], n: usize, u: &[Symbol], a: Symbol) -> bool {
        let len = w.len();
        enumerate_words(pi.domain(), len, &lim())
            .unwrap()
            .into_iter()
            .filter(|v| pi.apply_unchecked(v).unwrap() == w)
            .any(|v| v[0] == u[0] && v[len - 1] == u[len - 1] && v[n] == a)
    }

    fn brute_depth(pi: &SlidingBlockCode, w: &[Symbol]) -> usize {
        let len = w.len();
        let pre: Vec<Word> = enumerate_words(pi.domain(), len, &lim())
            .unwrap()
            .into_iter()
            .filter(|v| pi.apply_unchecked(v).unwrap() == w)
            .collect();
        let mut best = usize::MAX;
        for n in 1..len - 1 {
            let fiber: Vec<Symbol> = (0..pi.domain().num_symbols())
                .filter(|&a| pi.lookup(&[a]) == Some(w[n]))
                .collect();
            for mask in 1u32..(1 << fiber.len()) {
                let m: Vec<Symbol> = (0..fiber.len()).filter(|&i| mask >> i & 1 == 1).map(|i| fiber[i]).collect();
                if pre.iter().all(|u| m.iter().any(|&a| brute_routable(pi, w, n, u, a))) {
                    best = best.min(m.len());
                }
            }
        }
        best
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(preimage_words(&merge(), &[0, 1], &lim()).unwrap(), vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(preimage_words(&identity(), &[0, 1, 1, 0], &lim()).unwrap(), vec![vec![0, 1, 1, 0]]);
        let x = xor_normalized();
        let pre = preimage_words(&x, &[0, 0], &lim()).unwrap();
        assert_eq!(pre.len(), 2);
        for u in &pre {
            assert_eq!(u[0], u[1]);
        }
    }

    #[test]
    fn routability_examples() {
        let m = merge();
        assert!(routable_through(&m, &[1, 1, 1], 1, &[1, 2, 1], 1).unwrap());
        assert!(routable_through(&m, &[0, 1, 0], 1, &[0, 1, 0], 2).unwrap());
        let x = xor_normalized();
        // symbol 0 is block 00 (track 0), symbol 3 is block 11 (track 1)
        assert!(!routable_through(&x, &[0, 0, 0], 1, &[0, 0, 0], 3).unwrap());
        assert_eq!(
            routable_through(&m, &[1, 1, 1], 0, &[1, 1, 1], 1),
            Err(Error::BadPosition { n: 0, len: 3 })
        );
        assert_eq!(routable_through(&m, &[1, 1, 1], 1, &[0, 1, 1], 1), Err(Error::NotAPreimage));
    }

    #[test]
    fn transition_block_examples() {
        let m = merge();
        assert!(is_transition_block(&m, &[0, 0, 0], 1, &[0]).unwrap());
        assert!(is_transition_block(&m, &[1, 1, 1], 1, &[1]).unwrap());
        let x = xor_normalized();
        assert!(!is_transition_block(&x, &[0, 0, 0], 1, &[0]).unwrap());
        assert!(is_transition_block(&x, &[0, 0, 0], 1, &[0, 3]).unwrap());
    }

    #[test]
    fn minimal_depth_examples() {
        assert_eq!(minimal_depth_for_word(&merge(), &[0, 0, 0]).unwrap(), (1, vec![0]));
        assert_eq!(minimal_depth_for_word(&merge(), &[1, 1, 1]).unwrap(), (1, vec![1]));
        let x = xor_normalized();
        for w in enumerate_words(&Presentation::full_shift(["0", "1"]), 3, &lim()).unwrap() {
            assert_eq!(minimal_depth_for_word(&x, &w).unwrap().1.len(), 2);
        }
        assert!(matches!(minimal_depth_for_word(&merge(), &[0, 0]), Err(Error::BadPosition { .. })));
    }

    #[test]
    fn minimal_depth_matches_definition() {
        let y = Presentation::full_shift(["0", "1"]);
        for pi in [merge(), xor_normalized(), identity()] {
            for len in 3..=5 {
                for w in enumerate_words(&y, len, &lim()).unwrap() {
                    let (_, m) = minimal_depth_for_word(&pi, &w).unwrap();
                    assert_eq!(m.len(), brute_depth(&pi, &w), "{w:?}");
                }
            }
        }
    }

    #[test]
    fn class_degree_examples() {
        let cfg = AnalysisConfig::default();
        let r = class_degree_upper(&merge(), 3, &cfg).unwrap();
        assert_eq!(r.class_degree, 1);
        assert_eq!((r.witness.w.clone(), r.witness.n, r.witness.m.clone()), (vec![0, 0, 0], 1, vec![0]));
        let r = class_degree_upper(&xor_normalized(), 6, &cfg).unwrap();
        assert_eq!(r.class_degree, 2);
        assert_eq!(r.trace, vec![2, 2, 2, 2]);
        assert_eq!(class_degree_upper(&identity(), 3, &cfg).unwrap().class_degree, 1);

        let r = class_degree(&merge(), &cfg).unwrap();
        assert_eq!(r.status, ClassDegreeStatus::Exact);
        assert!(r.witness.certified);
        let r = class_degree(&xor_normalized(), &cfg).unwrap();
        assert_eq!((r.class_degree, r.status), (2, ClassDegreeStatus::Exact));
        assert!(r.stabilized_at.is_some());
    }

    #[test]
    fn trace_matches_word_sweep() {
        let cfg = AnalysisConfig::default();
        let y = Presentation::full_shift(["0", "1"]);
        for pi in [merge(), xor_normalized(), identity()] {
            let r = class_degree_upper(&pi, 6, &cfg).unwrap();
            let mut cur = usize::MAX;
            for len in 3..=6 {
                for w in enumerate_words(&y, len, &lim()).unwrap() {
                    if let Ok((_, m)) = minimal_depth_for_word(&pi, &w) {
                        cur = cur.min(m.len());
                    }
                }
                assert_eq!(r.trace[len - 3], cur);
            }
        }
    }

    #[test]
    fn unique_routing_examples() {
        let m = merge();
        let tb = TransitionBlock { w: vec![0, 0, 0], n: 1, m: vec![0], depth: 1, certified: true };
        assert_eq!(unique_routing_symbol(&m, &tb, &[0, 0, 0]).unwrap(), 0);
        let tb = TransitionBlock { w: vec![1, 1, 1], n: 1, m: vec![1], depth: 1, certified: true };
        assert_eq!(unique_routing_symbol(&m, &tb, &[2, 2, 2]).unwrap(), 1);
        let x = xor_normalized();
        let r = class_degree(&x, &AnalysisConfig::default()).unwrap();
        let tb = r.witness;
        for u in preimage_words(&x, &tb.w, &lim()).unwrap() {
            let a = unique_routing_symbol(&x, &tb, &u).unwrap();
            assert_eq!(a, u[tb.n]);
        }
        // a non-minimal block violates uniqueness
        let tb = TransitionBlock { w: vec![1, 1, 1], n: 1, m: vec![1, 2], depth: 2, certified: true };
        assert!(matches!(unique_routing_symbol(&m, &tb, &[1, 1, 1]), Err(Error::NotMinimal(_))));
    }
}
