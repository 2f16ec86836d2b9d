//! Pressure, equilibrium states and lifts for locally constant potentials.
//!
//! A potential of window `k` on an SFT is handled through its transfer
//! matrix on contexts of length `r = max(k - 1, 1)`: `B[u, v] = exp φ(u v)`
//! for each allowed extension of `u` by the last symbol of `v`. The pressure
//! is the log of the Perron root and the equilibrium state is the Markov
//! measure built from the Perron eigenvectors. Sofic shifts are handled
//! through the edge SFT of their Fischer cover, which maps onto them with
//! degree one and so carries the same pressure.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::blockcode::{cover_code, fischer_cover, image_presentation, normalize, NormalizedCode, OneBlockCode, SlidingBlockCode};
use crate::config::{AnalysisConfig, Limits};
use crate::fto::find_diamond;
use crate::graph;
use crate::shiftspace::{enumerate_words, join_names, trim_essential, Kind, Presentation, Symbol, Word};
use crate::{Error, Result};

/// Locally constant function: the value at a point depends on the block of
/// length `window` starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub window: usize,
    pub table: BTreeMap<Word, f64>,
}

impl Potential {
    /// Checks that `table` is total and finite on the length-`window` language.
    pub fn new(x: &Presentation, window: usize, table: BTreeMap<Word, f64>, limits: &Limits) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidMeasure("potential window must be at least 1".into()));
        }
        for w in enumerate_words(x, window, limits)? {
            match table.get(&w) {
                Some(v) if v.is_finite() => {}
                Some(_) => return Err(Error::InvalidMeasure(format!("non-finite value at {}", x.render(&w)))),
                None => return Err(Error::InvalidMeasure(format!("potential is missing {}", x.render(&w)))),
            }
        }
        Ok(Potential { window, table })
    }

    pub fn from_fn(x: &Presentation, window: usize, f: impl Fn(&[Symbol]) -> f64, limits: &Limits) -> Result<Self> {
        let table = enumerate_words(x, window, limits)?.into_iter().map(|w| {
            let v = f(&w);
            (w, v)
        });
        Potential::new(x, window, table.collect(), limits)
    }

    pub fn zero(x: &Presentation, limits: &Limits) -> Result<Self> {
        Potential::from_fn(x, 1, |_| 0.0, limits)
    }

    /// Value on a block of length at least `window`, read at its start.
    pub fn eval(&self, w: &[Symbol]) -> Option<f64> {
        self.table.get(&w[..self.window.min(w.len())]).copied()
    }

    /// Same function written with a longer window.
    pub fn widen(&self, x: &Presentation, window: usize, limits: &Limits) -> Result<Potential> {
        if window < self.window {
            return Err(Error::WindowMismatch(format!("cannot shrink window {} to {window}", self.window)));
        }
        Potential::from_fn(x, window, |w| self.eval(w).expect("total"), limits)
    }

    /// `ψ ∘ π` for a 1-block code `π` into the shift this potential lives on.
    pub fn pull_back(&self, pi: &SlidingBlockCode, limits: &Limits) -> Result<Potential> {
        let map = pi
            .symbol_map()
            .ok_or_else(|| Error::InvalidCode("pull-back needs a 1-block code; normalize first".into()))?;
        Potential::from_fn(
            pi.domain(),
            self.window,
            |w| {
                let y: Word = w.iter().map(|&a| map[a]).collect();
                self.eval(&y).unwrap_or(f64::NAN)
            },
            limits,
        )
    }
}

/// The cocycle sum `φ + φ∘σ + ... + φ∘σ^{m-1}` as a window `k + m - 1` potential.
pub fn cocycle_sum(x: &Presentation, phi: &Potential, m: usize, limits: &Limits) -> Result<Potential> {
    if m == 0 {
        return Err(Error::WindowMismatch("cocycle length must be at least 1".into()));
    }
    let k = phi.window;
    Potential::from_fn(
        x,
        k + m - 1,
        |w| (0..m).map(|i| phi.eval(&w[i..i + k]).expect("total")).sum(),
        limits,
    )
}

/// The system `(X, σ^m)` written as a vertex SFT on `m`-blocks, with the
/// cocycle sum of `φ` as a potential on it.
pub fn power_system(x: &Presentation, phi: &Potential, m: usize, limits: &Limits) -> Result<(Presentation, Potential)> {
    if x.kind() != Kind::VertexSft {
        return Err(Error::InvalidPresentation("power system needs a vertex SFT".into()));
    }
    if m == 0 {
        return Err(Error::WindowMismatch("power must be at least 1".into()));
    }
    let blocks = enumerate_words(x, m, limits)?;
    if blocks.len() > limits.max_states {
        return Err(Error::ResourceLimit { what: "power system symbols", limit: limits.max_states });
    }
    let mut transitions = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        for (j, c) in blocks.iter().enumerate() {
            if x.vertex_successors(*b.last().unwrap()).any(|s| s == c[0]) {
                transitions.push((i, j));
            }
        }
    }
    let names: Vec<String> = blocks.iter().map(|b| join_names(x.alphabet(), b)).collect();
    let powered = Presentation::vertex_sft(names, &transitions)?;
    let k = phi.window;
    let span = 1 + (k - 1).div_ceil(m);
    let sum = cocycle_sum(x, phi, m, limits)?;
    let psi = Potential::from_fn(
        &powered,
        span,
        |w| {
            let flat: Word = w.iter().flat_map(|&b| blocks[b].iter().copied()).collect();
            sum.eval(&flat[..k + m - 1]).expect("total")
        },
        limits,
    )?;
    Ok((powered, psi))
}

/// Perron data of a transfer matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureValue {
    pub value: f64,
    pub perron_root: f64,
    /// Collatz-Wielandt bracket on the Perron root at termination.
    pub root_bracket: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub contexts: Vec<Word>,
    #[serde(skip)]
    pub right: Vec<f64>,
    #[serde(skip)]
    pub left: Vec<f64>,
}

struct Transfer {
    contexts: Vec<Word>,
    /// sparse rows: (target context, symbol appended, weight)
    rows: Vec<Vec<(usize, Symbol, f64)>>,
}

fn transfer(x: &Presentation, phi: &Potential, limits: &Limits) -> Result<Transfer> {
    if !x.kind().is_sft() {
        return Err(Error::InvalidPresentation("transfer matrices need an SFT".into()));
    }
    let r = phi.window.saturating_sub(1).max(1);
    let contexts = enumerate_words(x, r, limits)?;
    if contexts.len() > limits.max_states {
        return Err(Error::ResourceLimit { what: "transfer contexts", limit: limits.max_states });
    }
    let index: HashMap<Word, usize> = contexts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut rows = vec![Vec::new(); contexts.len()];
    for w in enumerate_words(x, r + 1, limits)? {
        let v = phi
            .eval(&w[r + 1 - phi.window..])
            .ok_or_else(|| Error::WindowMismatch(format!("potential is missing {}", x.render(&w))))?;
        rows[index[&w[..r]]].push((index[&w[1..]], w[r], v.exp()));
    }
    Ok(Transfer { contexts, rows })
}

/// Perron root and vector by power iteration on `B + cI`; the shift makes
/// the iteration converge for periodic matrices too. Stops when the
/// Collatz-Wielandt bounds meet.
fn perron(t: &Transfer, transpose: bool, cfg: &AnalysisConfig) -> (f64, Vec<f64>, (f64, f64), usize, bool) {
    let n = t.contexts.len();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (u, row) in t.rows.iter().enumerate() {
        for &(v, _, b) in row {
            edges.push(if transpose { (v, u, b) } else { (u, v, b) });
        }
    }
    let c = edges.iter().map(|e| e.2).sum::<f64>() / n as f64;
    let mut v = vec![1.0; n];
    let mut bracket = (0.0, f64::INFINITY);
    let tol = cfg.tolerances.pressure_rel * 1e-2;
    for it in 1..=cfg.power_iteration_cap {
        let mut w: Vec<f64> = v.iter().map(|x| c * x).collect();
        for &(u, x, b) in &edges {
            w[u] += b * v[x];
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let q = w[i] / v[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.iter().map(|x| x / norm).collect();
        bracket = (lo - c, hi - c);
        if hi - lo <= tol * (hi - c) {
            return ((lo + hi) / 2.0 - c, v, bracket, it, true);
        }
    }
    ((bracket.0 + bracket.1) / 2.0, v, bracket, cfg.power_iteration_cap, false)
}

fn check_irreducible_transfer(t: &Transfer) -> Result<()> {
    let adj: Vec<Vec<usize>> = t.rows.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
    if !graph::is_strongly_connected(&adj) {
        return Err(Error::NotIrreducible);
    }
    Ok(())
}

fn sft_pressure(x: &Presentation, phi: &Potential, cfg: &AnalysisConfig) -> Result<(PressureValue, Transfer, Presentation)> {
    let trimmed = trim_essential(x)?;
    let phi = if trimmed.alphabet() == x.alphabet() {
        phi.clone()
    } else {
        let back: Vec<Symbol> = trimmed.alphabet().iter().map(|n| x.symbol_index(n).expect("same names")).collect();
        Potential::from_fn(
            &trimmed,
            phi.window,
            |w| phi.eval(&w.iter().map(|&a| back[a]).collect::<Word>()).unwrap_or(f64::NAN),
            &cfg.limits,
        )?
    };
    let x = trimmed;
    let t = transfer(&x, &phi, &cfg.limits)?;
    check_irreducible_transfer(&t)?;
    let (root, right, bracket, iterations, converged) = perron(&t, false, cfg);
    let (_, left, _, _, _) = perron(&t, true, cfg);
    Ok((
        PressureValue {
            value: root.ln(),
            perron_root: root,
            root_bracket: bracket,
            iterations,
            converged,
            contexts: t.contexts.clone(),
            right,
            left,
        },
        t,
        x,
    ))
}

/// Topological pressure of `φ` on an irreducible shift. Sofic shifts are
/// handled through their Fischer cover.
pub fn pressure(x: &Presentation, phi: &Potential, cfg: &AnalysisConfig) -> Result<PressureValue> {
    if x.kind().is_sft() {
        return Ok(sft_pressure(x, phi, cfg)?.0);
    }
    let (edge_shift, lifted, _) = lift_to_cover(x, phi, cfg)?;
    Ok(sft_pressure(&edge_shift, &lifted, cfg)?.0)
}

fn lift_to_cover(y: &Presentation, psi: &Potential, cfg: &AnalysisConfig) -> Result<(Presentation, Potential, SlidingBlockCode)> {
    let cover = fischer_cover(y, &cfg.limits)?;
    let code = cover_code(&cover, &cfg.limits)?;
    // the cover's alphabet is y's alphabet after trimming; re-index by name
    let rename: Vec<Symbol> = cover
        .alphabet()
        .iter()
        .map(|n| y.symbol_index(n).expect("same names"))
        .collect();
    let map = code.symbol_map().expect("1-block");
    let lifted = Potential::from_fn(
        code.domain(),
        psi.window,
        |w| {
            let yw: Word = w.iter().map(|&e| rename[map[e]]).collect();
            psi.eval(&yw).unwrap_or(f64::NAN)
        },
        &cfg.limits,
    )?;
    Ok((code.domain().clone(), lifted, code))
}

/// Stationary Markov measure of order `k`: the next symbol depends on the
/// previous `k` symbols. Order 0 is a Bernoulli measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    pub order: usize,
    pub alphabet: Vec<String>,
    pub contexts: Vec<Word>,
    /// `transitions[c][a]`: probability of `a` after context `c`.
    pub transitions: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
    index: HashMap<Word, usize>,
}

impl MarkovMeasure {
    pub fn new(
        order: usize,
        alphabet: Vec<String>,
        contexts: Vec<Word>,
        transitions: Vec<Vec<f64>>,
        stationary: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let k = alphabet.len();
        if contexts.len() != transitions.len() || contexts.len() != stationary.len() || contexts.is_empty() {
            return Err(Error::InvalidMeasure("contexts, transitions and stationary must align".into()));
        }
        let mut index = HashMap::new();
        for (i, c) in contexts.iter().enumerate() {
            if c.len() != order || c.iter().any(|&a| a >= k) {
                return Err(Error::InvalidMeasure(format!("bad context {c:?}")));
            }
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidMeasure(format!("duplicate context {c:?}")));
            }
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != k || row.iter().any(|&p| !(0.0..=1.0 + tol).contains(&p)) {
                return Err(Error::InvalidMeasure(format!("row {i} is not a probability vector")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > tol {
                return Err(Error::InvalidMeasure(format!("row {i} does not sum to 1")));
            }
        }
        if stationary.iter().any(|&p| p < -tol) || (stationary.iter().sum::<f64>() - 1.0).abs() > tol {
            return Err(Error::InvalidMeasure("stationary vector is not a distribution".into()));
        }
        let mu = MarkovMeasure { order, alphabet, contexts, transitions, stationary, index };
        let pushed = mu.advance_distribution(&mu.stationary)?;
        for (i, (&p, &q)) in pushed.iter().zip(&mu.stationary).enumerate() {
            if (p - q).abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "stationary vector is not invariant at context {:?}",
                    mu.contexts[i]
                )));
            }
        }
        Ok(mu)
    }

    /// Bernoulli measure with the given symbol probabilities.
    pub fn bernoulli(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        MarkovMeasure::new(0, alphabet, vec![Vec::new()], vec![probs], vec![1.0], 1e-12)
    }

    /// Context reached from `c` after emitting `a`.
    pub fn next_context(&self, c: usize, a: Symbol) -> Option<usize> {
        if self.order == 0 {
            return Some(0);
        }
        let mut w = self.contexts[c][1..].to_vec();
        w.push(a);
        self.index.get(&w).copied()
    }

    fn advance_distribution(&self, dist: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.contexts.len()];
        for (c, &p) in dist.iter().enumerate() {
            for (a, &q) in self.transitions[c].iter().enumerate() {
                if q > 0.0 {
                    let d = self.next_context(c, a).ok_or_else(|| {
                        Error::InvalidMeasure(format!("transition from {:?} by {a} leaves the contexts", self.contexts[c]))
                    })?;
                    out[d] += p * q;
                }
            }
        }
        Ok(out)
    }

    /// Whether every positive-probability word of length `order + 1` lies in `x`.
    pub fn supported_in(&self, x: &Presentation) -> bool {
        if self.alphabet != x.alphabet() {
            return false;
        }
        self.contexts.iter().enumerate().all(|(c, ctx)| {
            self.transitions[c].iter().enumerate().all(|(a, &p)| {
                let mut w = ctx.clone();
                w.push(a);
                p == 0.0 || self.stationary[c] == 0.0 || x.accepts(&w)
            })
        })
    }

    /// Probability of `a` after context `c`.
    pub fn transition(&self, c: usize, a: Symbol) -> f64 {
        self.transitions[c][a]
    }

    pub fn context_index(&self, w: &[Symbol]) -> Option<usize> {
        self.index.get(w).copied()
    }

}

/// Anything that assigns probabilities to words through a forward recursion
/// on a finite state vector.
pub trait WordMeasure {
    fn alphabet(&self) -> &[String];
    fn initial(&self) -> Vec<f64>;
    fn advance(&self, state: &[f64], symbol: Symbol) -> Vec<f64>;

    fn prob(&self, w: &[Symbol]) -> f64 {
        let mut s = self.initial();
        for &a in w {
            s = self.advance(&s, a);
        }
        s.iter().sum()
    }
}

impl WordMeasure for MarkovMeasure {
    fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn initial(&self) -> Vec<f64> {
        self.stationary.clone()
    }

    fn advance(&self, state: &[f64], a: Symbol) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        for (c, &p) in state.iter().enumerate() {
            let q = self.transitions[c][a];
            if p > 0.0 && q > 0.0 {
                if let Some(d) = self.next_context(c, a) {
                    out[d] += p * q;
                }
            }
        }
        out
    }
}

/// Image of a Markov measure under a symbol map.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMarkov {
    pub base: MarkovMeasure,
    /// Output symbol of each base symbol.
    pub map: Vec<Symbol>,
    pub alphabet: Vec<String>,
}

impl WordMeasure for HiddenMarkov {
    fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn initial(&self) -> Vec<f64> {
        self.base.stationary.clone()
    }

    fn advance(&self, state: &[f64], y: Symbol) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        for (c, &p) in state.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (a, &q) in self.base.transitions[c].iter().enumerate() {
                if q > 0.0 && self.map[a] == y {
                    if let Some(d) = self.base.next_context(c, a) {
                        out[d] += p * q;
                    }
                }
            }
        }
        out
    }
}

/// Positive-probability words of lengths `1..=max_len`.
pub fn word_table(mu: &dyn WordMeasure, max_len: usize, limits: &Limits) -> Result<BTreeMap<Word, f64>> {
    let mut out = BTreeMap::new();
    let mut stack: Vec<(Word, Vec<f64>)> = vec![(Vec::new(), mu.initial())];
    while let Some((w, s)) = stack.pop() {
        if w.len() == max_len {
            continue;
        }
        for a in 0..mu.alphabet().len() {
            let t = mu.advance(&s, a);
            let p: f64 = t.iter().sum();
            if p > 0.0 {
                let mut v = w.clone();
                v.push(a);
                if out.len() >= limits.max_words {
                    return Err(Error::ResourceLimit { what: "word table entries", limit: limits.max_words });
                }
                out.insert(v.clone(), p);
                stack.push((v, t));
            }
        }
    }
    Ok(out)
}

/// Largest `|μ(w) - ν(w)|` over words of lengths `1..=max_len` (symbols
/// matched by name).
pub fn max_word_discrepancy(mu: &dyn WordMeasure, nu: &dyn WordMeasure, max_len: usize, limits: &Limits) -> Result<f64> {
    let rename: Vec<Option<Symbol>> = mu
        .alphabet()
        .iter()
        .map(|n| nu.alphabet().iter().position(|m| m == n))
        .collect();
    let mut worst: f64 = 0.0;
    // symbols only nu knows carry mass that mu cannot match
    for (b, name) in nu.alphabet().iter().enumerate() {
        if !mu.alphabet().contains(name) {
            worst = worst.max(nu.prob(&[b]));
        }
    }
    let mut visited = 0usize;
    let mut stack: Vec<(usize, Vec<f64>, Vec<f64>)> = vec![(0, mu.initial(), nu.initial())];
    while let Some((len, s, t)) = stack.pop() {
        if len == max_len {
            continue;
        }
        for (a, b) in rename.iter().enumerate() {
            let s2 = mu.advance(&s, a);
            let p: f64 = s2.iter().sum();
            let (t2, q) = match b {
                Some(b) => {
                    let t2 = nu.advance(&t, *b);
                    let q = t2.iter().sum();
                    (t2, q)
                }
                None => (vec![0.0; t.len()], 0.0),
            };
            if p == 0.0 && q == 0.0 {
                continue;
            }
            visited += 1;
            if visited > limits.max_words {
                return Err(Error::ResourceLimit { what: "compared words", limit: limits.max_words });
            }
            worst = worst.max((p - q).abs());
            stack.push((len + 1, s2, t2));
        }
    }
    Ok(worst)
}

/// Equilibrium state of `φ` on an irreducible SFT, as a Markov measure of
/// order `max(k - 1, 1)` on the SFT's alphabet.
pub fn equilibrium_state(x: &Presentation, phi: &Potential, cfg: &AnalysisConfig) -> Result<MarkovMeasure> {
    if !x.kind().is_sft() {
        return Err(Error::InvalidPresentation(
            "equilibrium states as Markov measures need an SFT; use sofic_equilibrium_state".into(),
        ));
    }
    let (pv, t, trimmed) = sft_pressure(x, phi, cfg)?;
    // the trimmed shift may have lost symbols; index by the caller's alphabet
    let back: Vec<Symbol> = trimmed
        .alphabet()
        .iter()
        .map(|n| x.symbol_index(n).expect("trimming keeps names"))
        .collect();
    let k = x.num_symbols();
    let lambda = pv.perron_root;
    let mut transitions = vec![vec![0.0; k]; t.contexts.len()];
    for (u, row) in t.rows.iter().enumerate() {
        for &(v, a, b) in row {
            transitions[u][back[a]] = b * pv.right[v] / (lambda * pv.right[u]);
        }
        let s: f64 = transitions[u].iter().sum();
        for p in transitions[u].iter_mut() {
            *p /= s;
        }
    }
    let mut stationary: Vec<f64> = pv.left.iter().zip(&pv.right).map(|(l, r)| l * r).collect();
    let s: f64 = stationary.iter().sum();
    for p in stationary.iter_mut() {
        *p /= s;
    }
    let order = t.contexts[0].len();
    let contexts = t.contexts.iter().map(|c| c.iter().map(|&a| back[a]).collect()).collect();
    MarkovMeasure::new(order, x.alphabet().to_vec(), contexts, transitions, stationary, 1e-10)
}

/// Equilibrium state of `ψ` on an irreducible sofic shift: the equilibrium
/// state on the edge SFT of the Fischer cover, pushed down to the labels.
pub fn sofic_equilibrium_state(y: &Presentation, psi: &Potential, cfg: &AnalysisConfig) -> Result<HiddenMarkov> {
    if y.kind().is_sft() {
        let base = equilibrium_state(y, psi, cfg)?;
        let map = (0..y.num_symbols()).collect();
        return Ok(HiddenMarkov { base, map, alphabet: y.alphabet().to_vec() });
    }
    let (edge_shift, lifted, code) = lift_to_cover(y, psi, cfg)?;
    let base = equilibrium_state(&edge_shift, &lifted, cfg)?;
    let cover_alpha = code.codomain();
    let map = code
        .symbol_map()
        .expect("1-block")
        .into_iter()
        .map(|s| y.symbol_index(&cover_alpha[s]).expect("same names"))
        .collect();
    Ok(HiddenMarkov { base, map, alphabet: y.alphabet().to_vec() })
}

/// Measure-theoretic entropy of a stationary Markov measure.
pub fn entropy(mu: &MarkovMeasure) -> f64 {
    mu.stationary
        .iter()
        .zip(&mu.transitions)
        .map(|(&p, row)| p * row.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum::<f64>())
        .sum()
}

/// `h(μ) + ∫ φ dμ`.
pub fn measure_pressure(mu: &MarkovMeasure, phi: &Potential, limits: &Limits) -> Result<f64> {
    let mut integral = 0.0;
    let table = word_table(mu, phi.window, limits)?;
    for (w, p) in table.iter().filter(|(w, _)| w.len() == phi.window) {
        let v = phi.table.get(w).ok_or_else(|| {
            Error::WindowMismatch(format!("potential has no value on the charged word {w:?}"))
        })?;
        integral += p * v;
    }
    Ok(entropy(mu) + integral)
}

/// Image of `μ` under a 1-block code whose domain alphabet matches `μ`'s.
pub fn pushforward(mu: &MarkovMeasure, pi: &SlidingBlockCode) -> Result<HiddenMarkov> {
    let map = pi
        .symbol_map()
        .ok_or_else(|| Error::InvalidCode("pushforward needs a 1-block code; normalize first".into()))?;
    if mu.alphabet != pi.domain().alphabet() {
        return Err(Error::AlphabetMismatch("measure and code domain alphabets differ".into()));
    }
    Ok(HiddenMarkov { base: mu.clone(), map, alphabet: pi.codomain().to_vec() })
}

/// Probabilities of all image words of lengths `1..=max_len`.
pub fn pushforward_words(mu: &MarkovMeasure, pi: &SlidingBlockCode, max_len: usize, limits: &Limits) -> Result<BTreeMap<Word, f64>> {
    word_table(&pushforward(mu, pi)?, max_len, limits)
}

/// A Markov measure on an `N`-block recoding, rewritten on the original
/// alphabet (order grows by `N - 1`).
pub fn blocks_to_original(mu: &MarkovMeasure, nc: &NormalizedCode) -> Result<MarkovMeasure> {
    let conj = &nc.to_normal;
    let n = conj.window();
    let x = conj.domain();
    if n == 1 && mu.alphabet == x.alphabet() {
        return Ok(mu.clone());
    }
    if mu.order == 0 {
        return Err(Error::InvalidMeasure("block measures of order 0 are not supported".into()));
    }
    let block_of: HashMap<Symbol, &Word> = conj.table().iter().map(|(w, &s)| (s, w)).collect();
    let symbol_of: HashMap<&Word, Symbol> = conj.table().iter().map(|(w, &s)| (w, s)).collect();
    let k = x.num_symbols();
    let mut contexts = Vec::with_capacity(mu.contexts.len());
    let mut transitions = Vec::with_capacity(mu.contexts.len());
    for (c, ctx) in mu.contexts.iter().enumerate() {
        let mut word: Word = block_of[&ctx[0]].clone();
        for s in &ctx[1..] {
            word.push(*block_of[s].last().unwrap());
        }
        let tail = &word[word.len() + 1 - n..];
        let mut row = vec![0.0; k];
        for (a, p) in row.iter_mut().enumerate() {
            let mut b = tail.to_vec();
            b.push(a);
            if let Some(&s) = symbol_of.get(&b) {
                *p = mu.transitions[c][s];
            }
        }
        contexts.push(word);
        transitions.push(row);
    }
    MarkovMeasure::new(mu.order + n - 1, x.alphabet().to_vec(), contexts, transitions, mu.stationary.clone(), 1e-9)
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    #[serde(skip)]
    pub measure: MarkovMeasure,
    /// The lift on the normalized domain, where the code is 1-block.
    #[serde(skip)]
    pub normalized_measure: MarkovMeasure,
    pub pushforward_max_error: f64,
    pub compared_len: usize,
    pub lift_measure_pressure: f64,
    pub pressure_downstairs: f64,
    pub pressure_upstairs: f64,
    pub pressure_gap: f64,
    pub passed: bool,
}

/// The unique equilibrium state of `ψ ∘ π` for a finite-to-one `π`, with
/// the checks that it pushes to the equilibrium state of `ψ` and that the
/// pressures agree.
pub fn tuncel_lift(pi: &SlidingBlockCode, psi: &Potential, cfg: &AnalysisConfig) -> Result<LiftReport> {
    let limits = &cfg.limits;
    let nc = normalize(pi, limits)?;
    let code = OneBlockCode::new(&nc.code)?;
    if find_diamond(&code).is_some() {
        return Err(Error::NotFiniteToOne);
    }
    let y = image_presentation(&nc.code, limits)?;
    let psi = Potential::new(&y, psi.window, psi.table.clone(), limits)?;
    let phi = psi.pull_back(&nc.code, limits)?;
    let lift_n = equilibrium_state(&nc.domain, &phi, cfg)?;
    let down = sofic_equilibrium_state(&y, &psi, cfg)?;
    let pushed = pushforward(&lift_n, &nc.code)?;
    let len = cfg.lift_word_len;
    let err = max_word_discrepancy(&pushed, &down, len, limits)?;
    let mp = measure_pressure(&lift_n, &phi, limits)?;
    let p_down = pressure(&y, &psi, cfg)?.value;
    let p_up = pressure(&nc.domain, &phi, cfg)?.value;
    let gap = (mp - p_down).abs().max((p_up - p_down).abs());
    let tol = cfg.tolerances.lift;
    Ok(LiftReport {
        measure: blocks_to_original(&lift_n, &nc)?,
        normalized_measure: lift_n,
        pushforward_max_error: err,
        compared_len: len,
        lift_measure_pressure: mp,
        pressure_downstairs: p_down,
        pressure_upstairs: p_up,
        pressure_gap: gap,
        passed: err <= tol && gap <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeEntropyBounds {
    pub entropy: f64,
    pub image_entropy_lower: f64,
    pub image_entropy_upper: f64,
    /// Bracket on `h(μ) - h(πμ)`.
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub len: usize,
}

/// Brackets `h(μ) - h(πμ)` for a 1-block `π`. The image entropy lies
/// between the conditional block entropy given the hidden context at time
/// zero and the plain conditional block entropy `H_L - H_{L-1}`.
pub fn relative_entropy_bounds(mu: &MarkovMeasure, pi: &SlidingBlockCode, len: usize, limits: &Limits) -> Result<RelativeEntropyBounds> {
    if len < 2 {
        return Err(Error::WindowMismatch("bracket length must be at least 2".into()));
    }
    let hm = pushforward(mu, pi)?;
    let k = hm.alphabet.len();
    // block entropies of the image at lengths len-1 and len
    let (h_prev, h_last) = level_entropies(&hm, hm.initial(), len, k, limits)?;
    let upper_h = h_last - h_prev;
    let mut lower_h = 0.0;
    for (c, &p) in mu.stationary.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut start = vec![0.0; mu.contexts.len()];
        start[c] = p;
        let (a, b) = level_entropies(&hm, start, len, k, limits)?;
        lower_h += b - a;
    }
    let lower_h = lower_h.min(upper_h);
    let h = entropy(mu);
    let lower = (h - upper_h).max(0.0);
    let upper = (h - lower_h).max(0.0);
    Ok(RelativeEntropyBounds {
        entropy: h,
        image_entropy_lower: lower_h,
        image_entropy_upper: upper_h,
        lower,
        upper,
        width: upper - lower,
        len,
    })
}

/// `(H_{L-1}, H_L)` of the joint law started from `start`.
fn level_entropies(hm: &HiddenMarkov, start: Vec<f64>, len: usize, k: usize, limits: &Limits) -> Result<(f64, f64)> {
    let mut h = (0.0, 0.0);
    let mut visited = 0usize;
    let mut stack = vec![(0usize, start)];
    while let Some((l, s)) = stack.pop() {
        for y in 0..k {
            let t = hm.advance(&s, y);
            let p: f64 = t.iter().sum();
            if p <= 0.0 {
                continue;
            }
            visited += 1;
            if visited > limits.max_words {
                return Err(Error::ResourceLimit { what: "entropy words", limit: limits.max_words });
            }
            if l + 1 == len - 1 {
                h.0 -= p * p.ln();
            }
            if l + 1 == len {
                h.1 -= p * p.ln();
            } else {
                stack.push((l + 1, t));
            }
        }
    }
    Ok(h)
}
