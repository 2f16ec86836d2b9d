//! Sliding block codes between shift spaces.
//!
//! A [`SlidingBlockCode`] with memory `m` and anticipation `a` maps a point
//! `x` to `y` with `y_i = table[x_{[i-m, i+a]}]`. On finite words it shortens
//! by `m + a` symbols. Every analysis downstream works on a 1-block code over
//! a vertex SFT; [`normalize`] produces one, and [`OneBlockCode`] is the
//! compact adjacency form the algorithms iterate over.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::config::Limits;
use crate::graph;
use crate::shiftspace::{
    enumerate_words, higher_block, is_irreducible, trim_essential, Kind, Presentation, Symbol, Word,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlidingBlockCode {
    domain: Presentation,
    codomain: Vec<String>,
    memory: usize,
    anticipation: usize,
    table: BTreeMap<Word, Symbol>,
}

impl SlidingBlockCode {
    /// Builds a code, checking that the table is total on the domain's
    /// language of window length, that it has no foreign keys, and that every
    /// codomain symbol is attained.
    pub fn new(
        domain: Presentation,
        codomain: Vec<String>,
        memory: usize,
        anticipation: usize,
        table: BTreeMap<Word, Symbol>,
        limits: &Limits,
    ) -> Result<Self> {
        let window = memory + 1 + anticipation;
        let words = enumerate_words(&domain, window, limits)?;
        if words.len() != table.len() {
            return Err(Error::InvalidCode(format!(
                "table has {} entries but the domain has {} words of length {window}",
                table.len(),
                words.len()
            )));
        }
        let mut attained = vec![false; codomain.len()];
        for w in &words {
            match table.get(w) {
                Some(&s) if s < codomain.len() => attained[s] = true,
                Some(&s) => {
                    return Err(Error::InvalidCode(format!(
                        "table maps {} to symbol index {s} outside the codomain",
                        domain.render(w)
                    )))
                }
                None => {
                    return Err(Error::InvalidCode(format!(
                        "table is missing domain word {}",
                        domain.render(w)
                    )))
                }
            }
        }
        if let Some(i) = attained.iter().position(|&a| !a) {
            return Err(Error::InvalidCode(format!(
                "codomain symbol {:?} is never attained",
                codomain[i]
            )));
        }
        Ok(SlidingBlockCode {
            domain,
            codomain,
            memory,
            anticipation,
            table,
        })
    }

    pub fn identity(p: &Presentation, limits: &Limits) -> Result<Self> {
        let map: Vec<Symbol> = (0..p.num_symbols()).collect();
        SlidingBlockCode::one_block(p.clone(), p.alphabet().to_vec(), &map, limits)
    }

    /// 1-block code sending domain symbol `i` to `map[i]`.
    pub fn one_block(
        domain: Presentation,
        codomain: Vec<String>,
        map: &[Symbol],
        limits: &Limits,
    ) -> Result<Self> {
        if map.len() != domain.num_symbols() {
            return Err(Error::InvalidCode("1-block map must cover the domain alphabet".into()));
        }
        let table = map.iter().enumerate().map(|(a, &b)| (vec![a], b)).collect();
        SlidingBlockCode::new(domain, codomain, 0, 0, table, limits)
    }

    pub fn domain(&self) -> &Presentation {
        &self.domain
    }

    pub fn codomain(&self) -> &[String] {
        &self.codomain
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn anticipation(&self) -> usize {
        self.anticipation
    }

    pub fn window(&self) -> usize {
        self.memory + 1 + self.anticipation
    }

    pub fn table(&self) -> &BTreeMap<Word, Symbol> {
        &self.table
    }

    pub fn is_one_block(&self) -> bool {
        self.memory == 0 && self.anticipation == 0
    }

    pub fn lookup(&self, block: &[Symbol]) -> Option<Symbol> {
        self.table.get(block).copied()
    }

    /// Slides the block map over `w` without checking membership.
    pub fn apply_unchecked(&self, w: &[Symbol]) -> Option<Word> {
        if w.len() < self.window() {
            return Some(Vec::new());
        }
        w.windows(self.window()).map(|b| self.lookup(b)).collect()
    }

    pub fn apply_to_word(&self, w: &[Symbol]) -> Result<Word> {
        if w.len() < self.window() {
            return Err(Error::WordTooShort {
                len: w.len(),
                window: self.window(),
            });
        }
        if !self.domain.accepts(w) {
            return Err(Error::NotInLanguage(self.domain.render(w)));
        }
        self.apply_unchecked(w)
            .ok_or_else(|| Error::NotInLanguage(self.domain.render(w)))
    }

    /// Copy of this code with one table entry replaced, re-validated.
    pub fn with_entry(&self, block: Word, symbol: Symbol, limits: &Limits) -> Result<Self> {
        let mut table = self.table.clone();
        table.insert(block, symbol);
        SlidingBlockCode::new(
            self.domain.clone(),
            self.codomain.clone(),
            self.memory,
            self.anticipation,
            table,
            limits,
        )
    }

    /// Codomain symbol index for each domain symbol of a 1-block code.
    pub fn symbol_map(&self) -> Option<Vec<Symbol>> {
        if !self.is_one_block() {
            return None;
        }
        (0..self.domain.num_symbols())
            .map(|a| self.lookup(&[a]))
            .collect()
    }
}

/// `outer ∘ inner`. Memories and anticipations add. Symbols are matched by
/// name between `inner`'s codomain and `outer`'s domain alphabet.
pub fn compose(
    outer: &SlidingBlockCode,
    inner: &SlidingBlockCode,
    limits: &Limits,
) -> Result<SlidingBlockCode> {
    let rename: Vec<Symbol> = inner
        .codomain
        .iter()
        .map(|name| {
            outer.domain.symbol_index(name).ok_or_else(|| {
                Error::AlphabetMismatch(format!("symbol {name:?} is not in the outer code's domain"))
            })
        })
        .collect::<Result<_>>()?;
    let window = inner.window() + outer.window() - 1;
    let mut table = BTreeMap::new();
    for u in enumerate_words(&inner.domain, window, limits)? {
        let mid: Word = inner
            .apply_unchecked(&u)
            .expect("inner table is total")
            .into_iter()
            .map(|s| rename[s])
            .collect();
        let s = outer.lookup(&mid).ok_or_else(|| {
            Error::AlphabetMismatch(format!(
                "inner image {} is not in the outer code's domain language",
                outer.domain.render(&mid)
            ))
        })?;
        table.insert(u, s);
    }
    // the composite may miss outer symbols only if inner is not onto outer's domain
    let used: std::collections::BTreeSet<Symbol> = table.values().copied().collect();
    if used.len() != outer.codomain.len() {
        return Err(Error::AlphabetMismatch(
            "inner code does not cover the outer code's domain".into(),
        ));
    }
    SlidingBlockCode::new(
        inner.domain.clone(),
        outer.codomain.clone(),
        inner.memory + outer.memory,
        inner.anticipation + outer.anticipation,
        table,
        limits,
    )
}

/// Whether two codes on the same domain define the same map of points.
/// Decided exactly by comparing every domain block spanning both windows.
pub fn codes_agree(a: &SlidingBlockCode, b: &SlidingBlockCode, limits: &Limits) -> Result<bool> {
    if a.domain != b.domain {
        return Err(Error::AlphabetMismatch("codes have different domains".into()));
    }
    let rename = codomain_rename(b, a)?;
    let m = a.memory.max(b.memory);
    let ant = a.anticipation.max(b.anticipation);
    for u in enumerate_words(&a.domain, m + 1 + ant, limits)? {
        let sa = a.lookup(&u[m - a.memory..m + a.anticipation + 1]);
        let sb = b.lookup(&u[m - b.memory..m + b.anticipation + 1]).map(|s| rename[s]);
        if sa != sb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compares two codes on the same domain word by word, streaming every
/// word up to `max_len` without storing it. Returns whether they agree and
/// the longest length fully compared, or the length of the first
/// disagreeing word found. Lengths whose cumulative word count exceeds
/// `limits.max_visited` are skipped.
pub fn agree_on_words(
    a: &SlidingBlockCode,
    b: &SlidingBlockCode,
    max_len: usize,
    limits: &Limits,
) -> Result<(bool, usize)> {
    if a.domain != b.domain {
        return Err(Error::AlphabetMismatch("codes have different domains".into()));
    }
    let rename = codomain_rename(b, a)?;
    let m = a.memory.max(b.memory);
    let ant = a.anticipation.max(b.anticipation);
    let mut len = 0;
    let mut visited: u128 = 0;
    while len < max_len {
        let next = visited + crate::shiftspace::count_words(&a.domain, len + 1);
        if next > limits.max_visited as u128 {
            break;
        }
        visited = next;
        len += 1;
    }
    if len < m + 1 + ant {
        return Ok((true, 0));
    }
    let all: Vec<usize> = (0..a.domain.num_states()).collect();
    let mut word = Vec::with_capacity(len);
    Ok(match agree_rec(a, b, &rename, (m, ant), len, &all, &mut word) {
        Some(bad) => (false, bad),
        None => (true, len),
    })
}

/// Checks the output position completed by the last symbol of each prefix;
/// returns the length of a disagreeing word.
fn agree_rec(
    a: &SlidingBlockCode,
    b: &SlidingBlockCode,
    rename: &[Symbol],
    (m, ant): (usize, usize),
    len: usize,
    cur: &[usize],
    word: &mut Word,
) -> Option<usize> {
    let d = word.len();
    if d > m + ant {
        let c = d - 1 - ant;
        let ya = a.lookup(&word[c - a.memory..=c + a.anticipation]);
        let yb = b.lookup(&word[c - b.memory..=c + b.anticipation]);
        match (ya, yb) {
            (Some(x), Some(y)) if x == rename[y] => {}
            _ => return Some(d),
        }
    }
    if d == len {
        return None;
    }
    for s in 0..a.domain.num_symbols() {
        let next = a.domain.step(cur, s);
        if next.is_empty() {
            continue;
        }
        word.push(s);
        let bad = agree_rec(a, b, rename, (m, ant), len, &next, word);
        word.pop();
        if bad.is_some() {
            return bad;
        }
    }
    None
}

fn codomain_rename(from: &SlidingBlockCode, to: &SlidingBlockCode) -> Result<Vec<Symbol>> {
    from.codomain
        .iter()
        .map(|n| {
            to.codomain
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::AlphabetMismatch(format!("codomain symbol {n:?} missing")))
        })
        .collect()
}

/// A code recoded to a 1-block code on a vertex SFT, with the conjugacies
/// relating the original domain to the recoded one.
#[derive(Debug, Clone)]
pub struct NormalizedCode {
    pub domain: Presentation,
    pub code: SlidingBlockCode,
    /// Original domain to recoded domain; memory and anticipation match the
    /// original code so that `code ∘ to_normal = original` as point maps.
    pub to_normal: SlidingBlockCode,
    /// Recoded domain back to the original domain (1-block).
    pub from_normal: SlidingBlockCode,
}

/// Recodes the domain at the code's window so the code becomes 1-block and
/// the domain 1-step. Already-normal codes come back unchanged.
pub fn normalize(pi: &SlidingBlockCode, limits: &Limits) -> Result<NormalizedCode> {
    let x = pi.domain();
    if !x.kind().is_sft() {
        return Err(Error::InvalidCode("the domain of a factor code must be an SFT".into()));
    }
    if pi.is_one_block() && x.kind() == Kind::VertexSft {
        let id = SlidingBlockCode::identity(x, limits)?;
        return Ok(NormalizedCode {
            domain: x.clone(),
            code: pi.clone(),
            to_normal: id.clone(),
            from_normal: id,
        });
    }
    let (recoded, conj, inv) = higher_block(x, pi.window(), limits)?;
    // symbol i of the recoded domain is the block conj maps to i
    let mut map = vec![0; recoded.num_symbols()];
    for (block, &i) in conj.table() {
        map[i] = pi.lookup(block).expect("total");
    }
    let code = SlidingBlockCode::one_block(recoded.clone(), pi.codomain().to_vec(), &map, limits)?;
    let to_normal = SlidingBlockCode::new(
        x.clone(),
        conj.codomain().to_vec(),
        pi.memory(),
        pi.anticipation(),
        conj.table().clone(),
        limits,
    )?;
    Ok(NormalizedCode {
        domain: recoded,
        code,
        to_normal,
        from_normal: inv,
    })
}

/// Right-resolving presentation of `π(X)` for a 1-block code on a 1-step
/// SFT: relabel the graph through the code, determinize, and keep the
/// follower-set-minimal irreducible component.
pub fn image_presentation(pi: &SlidingBlockCode, limits: &Limits) -> Result<Presentation> {
    let x = pi.domain();
    let map = match (x.kind().is_sft(), pi.symbol_map()) {
        (true, Some(m)) => m,
        _ => {
            return Err(Error::InvalidCode(
                "image presentation needs a 1-block code on a 1-step SFT; normalize first".into(),
            ))
        }
    };
    let relabeled = x.relabel(&map, pi.codomain().to_vec())?;
    fischer_cover(&relabeled, limits)
}

/// Image presentation of an arbitrary code (normalizes first).
pub fn image_of(pi: &SlidingBlockCode, limits: &Limits) -> Result<Presentation> {
    let nc = normalize(pi, limits)?;
    image_presentation(&nc.code, limits)
}

/// Minimal right-resolving presentation (Fischer cover) of an irreducible
/// sofic shift. Subset construction from the full state set, follower-set
/// partition refinement, then the unique terminal strongly connected
/// component.
pub fn fischer_cover(p: &Presentation, limits: &Limits) -> Result<Presentation> {
    let p = trim_essential(p)?;
    if !is_irreducible(&p) {
        return Err(Error::NotIrreducible);
    }
    let k = p.num_symbols();
    let start: Vec<usize> = (0..p.num_states()).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut row = vec![None; k];
        for (a, slot) in row.iter_mut().enumerate() {
            let next = p.step(&subsets[i], a);
            if next.is_empty() {
                continue;
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= limits.max_states {
                        return Err(Error::ResourceLimit {
                            what: "subset construction states",
                            limit: limits.max_states,
                        });
                    }
                    subsets.push(next.clone());
                    index.insert(next, subsets.len() - 1);
                    subsets.len() - 1
                }
            };
            *slot = Some(id);
        }
        trans.push(row);
        i += 1;
    }

    let class = refine_partition(&trans);
    let nclass = class.iter().max().map_or(0, |m| m + 1);
    let mut qtrans = vec![vec![None; k]; nclass];
    for (s, row) in trans.iter().enumerate() {
        for (a, t) in row.iter().enumerate() {
            qtrans[class[s]][a] = t.map(|t| class[t]);
        }
    }
    let adj: Vec<Vec<usize>> = qtrans.iter().map(|r| r.iter().flatten().copied().collect()).collect();
    let (comp, ncomp) = graph::scc(&adj);
    let mut terminal = vec![true; ncomp];
    for (u, out) in adj.iter().enumerate() {
        if out.iter().any(|&v| comp[v] != comp[u]) {
            terminal[comp[u]] = false;
        }
    }
    let terminals: Vec<usize> = (0..ncomp).filter(|&c| terminal[c]).collect();
    if terminals.len() != 1 {
        return Err(Error::NotIrreducible);
    }
    let target = terminals[0];
    let root = (0..nclass).find(|&c| comp[c] == target).expect("nonempty");
    // number states in BFS order from the root, labels ascending
    let mut order = vec![usize::MAX; nclass];
    let mut queue = VecDeque::from([root]);
    let mut names = Vec::new();
    order[root] = 0;
    names.push(root);
    while let Some(c) = queue.pop_front() {
        for t in qtrans[c].iter().flatten() {
            if order[*t] == usize::MAX {
                order[*t] = names.len();
                names.push(*t);
                queue.push_back(*t);
            }
        }
    }
    let mut edges = Vec::new();
    for &c in &names {
        for (a, t) in qtrans[c].iter().enumerate() {
            if let Some(t) = t {
                edges.push((order[c], order[*t], a));
            }
        }
    }
    let cover = Presentation::labeled(p.alphabet().to_vec(), names.len(), &edges)?;
    trim_essential(&cover)
        .map(|c| if c.num_symbols() == p.num_symbols() { cover } else { c })
}

/// Moore-style partition refinement of a partial deterministic automaton in
/// which every state accepts. Returns class ids numbered by first occurrence.
fn refine_partition(trans: &[Vec<Option<usize>>]) -> Vec<usize> {
    let n = trans.len();
    let mut class = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<Option<usize>>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig = (class[s], trans[s].iter().map(|t| t.map(|t| class[t])).collect());
            let len = ids.len();
            next[s] = *ids.entry(sig).or_insert(len);
        }
        let new_count = ids.len();
        class = next;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}

/// Minimal right-resolving presentation and the 1-block code from the edge
/// SFT of that presentation onto the presented shift.
pub fn minimal_right_resolving(
    p: &Presentation,
    limits: &Limits,
) -> Result<(Presentation, SlidingBlockCode)> {
    let cover = fischer_cover(p, limits)?;
    let code = cover_code(&cover, limits)?;
    Ok((cover, code))
}

/// 1-block code from the edge SFT of a labeled graph to its labels.
pub fn cover_code(cover: &Presentation, limits: &Limits) -> Result<SlidingBlockCode> {
    let edge_shift = cover.edge_sft();
    let map: Vec<Symbol> = cover.edges().iter().map(|e| e.label).collect();
    SlidingBlockCode::one_block(edge_shift, cover.alphabet().to_vec(), &map, limits)
}

/// Exact equality of two irreducible sofic shifts: their Fischer covers are
/// isomorphic as labeled graphs (labels matched by name).
pub fn same_shift(p: &Presentation, q: &Presentation, limits: &Limits) -> Result<bool> {
    let a = fischer_cover(p, limits)?;
    let b = fischer_cover(q, limits)?;
    Ok(right_resolving_isomorphic(&a, &b))
}

fn right_resolving_isomorphic(a: &Presentation, b: &Presentation) -> bool {
    if a.num_states() != b.num_states() || a.edges().len() != b.edges().len() {
        return false;
    }
    let Some(rename): Option<Vec<Symbol>> = b.alphabet().iter().map(|n| a.symbol_index(n)).collect()
    else {
        return false;
    };
    let k = a.num_symbols();
    let table = |p: &Presentation, rename: &dyn Fn(Symbol) -> Symbol| {
        let mut t = vec![vec![None; k]; p.num_states()];
        for e in p.edges() {
            t[e.src][rename(e.label)] = Some(e.dst);
        }
        t
    };
    let ta = table(a, &|s| s);
    let tb = table(b, &|s| rename[s]);
    let n = a.num_states();
    'cand: for cand in 0..n {
        let mut fwd = vec![usize::MAX; n];
        let mut back = vec![usize::MAX; n];
        fwd[0] = cand;
        back[cand] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(s) = queue.pop_front() {
            for l in 0..k {
                match (ta[s][l], tb[fwd[s]][l]) {
                    (None, None) => {}
                    (Some(x), Some(y)) => {
                        if fwd[x] == usize::MAX {
                            if back[y] != usize::MAX {
                                continue 'cand;
                            }
                            fwd[x] = y;
                            back[y] = x;
                            queue.push_back(x);
                        } else if fwd[x] != y {
                            continue 'cand;
                        }
                    }
                    _ => continue 'cand,
                }
            }
        }
        if fwd.iter().all(|&f| f != usize::MAX) {
            return true;
        }
    }
    false
}

/// A 1-block code on a vertex SFT in adjacency form.
#[derive(Debug, Clone)]
pub struct OneBlockCode {
    succ: Vec<Vec<Symbol>>,
    pred: Vec<Vec<Symbol>>,
    image: Vec<Symbol>,
    fibers: Vec<Vec<Symbol>>,
    local: Vec<usize>,
}

impl OneBlockCode {
    pub fn new(code: &SlidingBlockCode) -> Result<Self> {
        let x = code.domain();
        if x.kind() != Kind::VertexSft {
            return Err(Error::InvalidCode("expected a vertex SFT domain".into()));
        }
        let image = code
            .symbol_map()
            .ok_or_else(|| Error::InvalidCode("expected a 1-block code".into()))?;
        let n = x.num_symbols();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for e in x.edges() {
            succ[e.src].push(e.dst);
            pred[e.dst].push(e.src);
        }
        let mut fibers = vec![Vec::new(); code.codomain().len()];
        let mut local = vec![0; n];
        for (a, &y) in image.iter().enumerate() {
            local[a] = fibers[y].len();
            fibers[y].push(a);
        }
        Ok(OneBlockCode {
            succ,
            pred,
            image,
            fibers,
            local,
        })
    }

    pub fn from_normalized(nc: &NormalizedCode) -> Result<Self> {
        OneBlockCode::new(&nc.code)
    }

    pub fn num_symbols(&self) -> usize {
        self.image.len()
    }

    pub fn num_image_symbols(&self) -> usize {
        self.fibers.len()
    }

    pub fn succ(&self, a: Symbol) -> &[Symbol] {
        &self.succ[a]
    }

    pub fn pred(&self, a: Symbol) -> &[Symbol] {
        &self.pred[a]
    }

    pub fn image(&self, a: Symbol) -> Symbol {
        self.image[a]
    }

    pub fn fiber(&self, y: Symbol) -> &[Symbol] {
        &self.fibers[y]
    }

    /// Position of `a` inside its fiber.
    pub fn local(&self, a: Symbol) -> usize {
        self.local[a]
    }

    pub fn allowed(&self, a: Symbol, b: Symbol) -> bool {
        self.succ[a].contains(&b)
    }

    pub fn image_word(&self, u: &[Symbol]) -> Word {
        u.iter().map(|&a| self.image[a]).collect()
    }

    pub fn is_path(&self, u: &[Symbol]) -> bool {
        u.windows(2).all(|p| self.allowed(p[0], p[1]))
    }
}

/// An irreducible SFT, a code on it, and the image sofic shift.
#[derive(Debug, Clone)]
pub struct FactorTriple {
    pub x: Presentation,
    pub pi: SlidingBlockCode,
    pub y: Presentation,
}

impl FactorTriple {
    pub fn new(pi: SlidingBlockCode, limits: &Limits) -> Result<Self> {
        let x = pi.domain().clone();
        if !is_irreducible(&x) {
            return Err(Error::NotIrreducible);
        }
        let y = image_of(&pi, limits)?;
        Ok(FactorTriple { x, pi, y })
    }

    /// Triple with a caller-supplied image; the image must present `π(X)`.
    pub fn with_image(pi: SlidingBlockCode, y: Presentation, limits: &Limits) -> Result<Self> {
        let t = FactorTriple::new(pi, limits)?;
        if !same_shift(&t.y, &y, limits)? {
            return Err(Error::InvalidCode("declared image differs from π(X)".into()));
        }
        Ok(FactorTriple { y, ..t })
    }

    /// The triple recoded so that `x` is a vertex SFT and `pi` is 1-block.
    pub fn normalize(&self, limits: &Limits) -> Result<(FactorTriple, NormalizedCode)> {
        let nc = normalize(&self.pi, limits)?;
        let t = FactorTriple {
            x: nc.domain.clone(),
            pi: nc.code.clone(),
            y: self.y.clone(),
        };
        Ok((t, nc))
    }
}
