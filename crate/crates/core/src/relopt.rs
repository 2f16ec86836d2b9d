//! Measures of maximal relative pressure over a fixed image measure,
//! approximated at finite order.
//!
//! At order `k` an invariant measure on the domain is replaced by its table
//! of `k`-word probabilities. The constraint `πμ = ν` becomes linear: the
//! table is shift-consistent and its fiber sums over each image word equal
//! `ν`. The objective `H(k) - H(k-1) + Σ q φ` is concave. Its maximizer lies
//! in the relative interior of the smallest face carrying the feasible set,
//! which is found with one linear program per variable; Newton steps in the
//! null space of the constraints then converge from any interior start.

use std::cell::RefCell;
use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::Serialize;

use crate::blockcode::{normalize, NormalizedCode, SlidingBlockCode};
use crate::config::AnalysisConfig;
use crate::shiftspace::{enumerate_words, Kind, Presentation, Symbol, Word};
use crate::thermo::{max_word_discrepancy, sofic_equilibrium_state, word_table, HiddenMarkov, MarkovMeasure, Potential, WordMeasure};
use crate::{Error, Result};

/// Probabilities of the `k`-words of a shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordDistribution {
    pub k: usize,
    pub alphabet: Vec<String>,
    pub words: Vec<Word>,
    pub probs: Vec<f64>,
}

impl WordDistribution {
    pub fn prob(&self, w: &[Symbol]) -> f64 {
        self.words.iter().position(|u| u == w).map_or(0.0, |i| self.probs[i])
    }

    pub fn as_map(&self) -> BTreeMap<Word, f64> {
        self.words.iter().cloned().zip(self.probs.iter().copied()).collect()
    }

    /// Probabilities of the `len`-prefixes, `len <= k`.
    pub fn marginal(&self, len: usize) -> BTreeMap<Word, f64> {
        let mut out = BTreeMap::new();
        for (w, &p) in self.words.iter().zip(&self.probs) {
            *out.entry(w[..len].to_vec()).or_insert(0.0) += p;
        }
        out
    }

    pub fn total_variation(&self, other: &WordDistribution) -> f64 {
        total_variation(&self.as_map(), &other.as_map())
    }
}

pub fn total_variation(a: &BTreeMap<Word, f64>, b: &BTreeMap<Word, f64>) -> f64 {
    let mut s = 0.0;
    for (w, p) in a {
        s += (p - b.get(w).copied().unwrap_or(0.0)).abs();
    }
    for (w, q) in b {
        if !a.contains_key(w) {
            s += q.abs();
        }
    }
    s / 2.0
}

/// Linear system `A q = b` with rows kept as augmented vectors.
#[derive(Debug, Clone)]
struct Rows {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Rows {
    /// Linearly independent subset of the rows. Fails if a dependent row
    /// disagrees with the combination of the kept ones on the right side.
    fn independent(&self, cols: &[usize]) -> Result<Rows> {
        let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut kept = Rows { a: Vec::new(), b: Vec::new() };
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let mut r: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
            let mut beta = rhs;
            let norm0 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (e, eb) in &basis {
                let c: f64 = r.iter().zip(e).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(e) {
                    *x -= c * y;
                }
                beta -= c * eb;
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1e-10 * norm0.max(1.0) {
                if beta.abs() > 1e-8 {
                    return Err(Error::Infeasible("the linear constraints are inconsistent".into()));
                }
                continue;
            }
            basis.push((r.iter().map(|x| x / norm).collect(), beta / norm));
            kept.a.push(cols.iter().map(|&j| row[j]).collect());
            kept.b.push(rhs);
        }
        Ok(kept)
    }
}

/// Finite-order relaxation of the relative pressure problem for a 1-block
/// code on a vertex SFT.
#[derive(Debug, Clone)]
pub struct RelaxationProblem {
    pub domain: Presentation,
    pub k: usize,
    pub phi: Potential,
    /// Target probabilities of image words of length `k`, indexed by the
    /// code's codomain.
    pub nu_words: BTreeMap<Word, f64>,
    /// Domain `k`-words, the variables.
    pub words: Vec<Word>,
    phi_values: Vec<f64>,
    prefix: Vec<usize>,
    num_prefixes: usize,
    rows: Rows,
    /// Variables that can be positive, with one LP maximizer per variable.
    support: Vec<usize>,
    vertices: Vec<Vec<f64>>,
}

/// Sets up the order-`k` problem for `pi` (1-block on a vertex SFT) and a
/// target measure on its image, matched by symbol name.
pub fn build_relaxation(
    pi: &SlidingBlockCode,
    nu: &dyn WordMeasure,
    phi: &Potential,
    k: usize,
    cfg: &AnalysisConfig,
) -> Result<RelaxationProblem> {
    let limits = &cfg.limits;
    let map = pi
        .symbol_map()
        .filter(|_| pi.domain().kind() == Kind::VertexSft)
        .ok_or_else(|| Error::InvalidCode("expected a 1-block code on a vertex SFT; normalize first".into()))?;
    if k == 0 || k < phi.window {
        return Err(Error::WindowMismatch(format!("order {k} is below the potential window {}", phi.window)));
    }
    let x = pi.domain();
    let phi = Potential::new(x, phi.window, phi.table.clone(), limits)?;

    let rename: Vec<Option<Symbol>> = nu.alphabet().iter().map(|n| pi.codomain().iter().position(|m| m == n)).collect();
    let mut nu_words = BTreeMap::new();
    let mut mass = 0.0;
    for (v, p) in word_table(nu, k, limits)? {
        if v.len() != k {
            continue;
        }
        let mapped: Option<Word> = v.iter().map(|&s| rename[s]).collect();
        if let Some(w) = mapped {
            mass += p;
            nu_words.insert(w, p);
        }
    }
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Infeasible("the target measure charges symbols outside the codomain".into()));
    }

    let words = enumerate_words(x, k, limits)?;
    if words.len() > limits.max_states {
        return Err(Error::ResourceLimit { what: "relaxation variables", limit: limits.max_states });
    }
    let image: Vec<Word> = words.iter().map(|u| u.iter().map(|&a| map[a]).collect()).collect();
    let phi_values = words.iter().map(|u| phi.eval(u).expect("total")).collect();
    let mut prefixes: BTreeMap<Word, usize> = BTreeMap::new();
    for u in &words {
        let n = prefixes.len();
        prefixes.entry(u[..k - 1].to_vec()).or_insert(n);
    }
    let prefix = words.iter().map(|u| prefixes[&u[..k - 1]]).collect();

    let n = words.len();
    let mut rows = Rows { a: Vec::new(), b: Vec::new() };
    rows.a.push(vec![1.0; n]);
    rows.b.push(1.0);
    let mut fibers: BTreeMap<&Word, Vec<usize>> = BTreeMap::new();
    for (i, v) in image.iter().enumerate() {
        fibers.entry(v).or_default().push(i);
    }
    for (v, &p) in &nu_words {
        let members = fibers.get(v).ok_or_else(|| {
            Error::Infeasible(format!("the target charges {} which has no preimage", render(pi.codomain(), v)))
        })?;
        let mut row = vec![0.0; n];
        for &i in members {
            row[i] = 1.0;
        }
        rows.a.push(row);
        rows.b.push(p);
    }
    // words over image words the target does not charge
    for (v, members) in &fibers {
        if !nu_words.contains_key(*v) {
            for &i in members {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                rows.a.push(row);
                rows.b.push(0.0);
            }
        }
    }
    if k >= 2 {
        let mut middles: BTreeMap<&[Symbol], Vec<f64>> = BTreeMap::new();
        for (i, u) in words.iter().enumerate() {
            middles.entry(&u[1..]).or_insert_with(|| vec![0.0; n])[i] += 1.0;
            middles.entry(&u[..k - 1]).or_insert_with(|| vec![0.0; n])[i] -= 1.0;
        }
        for (_, row) in middles {
            rows.a.push(row);
            rows.b.push(0.0);
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let reduced = rows.independent(&all)?;
    let (support, vertices) = lp_support(&reduced, n, cfg.tolerances.support_floor.max(1e-9))?;
    Ok(RelaxationProblem {
        domain: x.clone(),
        k,
        phi,
        nu_words,
        words,
        phi_values,
        prefix,
        num_prefixes: prefixes.len(),
        rows,
        support,
        vertices,
    })
}

fn render(alphabet: &[String], w: &[Symbol]) -> String {
    w.iter().map(|&a| alphabet[a].as_str()).collect::<Vec<_>>().join(" ")
}

/// Variables that are positive somewhere on the polytope, each with a
/// point attaining its maximum.
fn lp_support(rows: &Rows, n: usize, floor: f64) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let mut support = Vec::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut known = vec![false; n];
    for i in 0..n {
        if known[i] {
            continue;
        }
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = (0..n).map(|j| lp.add_var(if j == i { 1.0 } else { 0.0 }, (0.0, 1.0))).collect();
        for (row, &rhs) in rows.a.iter().zip(&rows.b) {
            let expr: Vec<_> = row.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (vars[j], c)).collect();
            lp.add_constraint(expr, ComparisonOp::Eq, rhs);
        }
        let sol = lp.solve().map_err(|e| match e {
            minilp::Error::Infeasible => Error::Infeasible("the target is not an image of any word table at this order".into()),
            minilp::Error::Unbounded => Error::Infeasible("unbounded relaxation".into()),
        })?;
        let point: Vec<f64> = vars.iter().map(|&v| sol[v].max(0.0)).collect();
        if point[i] > floor {
            // a maximizer for i also certifies every other variable it charges
            for j in 0..n {
                if point[j] > floor {
                    known[j] = true;
                }
            }
            vertices.push(point);
        }
    }
    for (j, &k) in known.iter().enumerate() {
        if k {
            support.push(j);
        }
    }
    Ok((support, vertices))
}

impl RelaxationProblem {
    pub fn num_variables(&self) -> usize {
        self.words.len()
    }

    /// Variables that can be positive on the feasible set.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    fn prefix_sums(&self, q: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.num_prefixes];
        for (i, &p) in q.iter().enumerate() {
            m[self.prefix[i]] += p;
        }
        m
    }

    /// `H(k) - H(k-1) + Σ q φ`, with `0 log 0 = 0`.
    pub fn objective(&self, q: &[f64]) -> f64 {
        let xlogx = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
        let m = self.prefix_sums(q);
        -q.iter().map(|&p| xlogx(p)).sum::<f64>() + m.iter().map(|&p| xlogx(p)).sum::<f64>()
            + q.iter().zip(&self.phi_values).map(|(p, f)| p * f).sum::<f64>()
    }

    /// Gradient of [`objective`](Self::objective); logs are clamped at 1e-300.
    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let m = self.prefix_sums(q);
        q.iter()
            .enumerate()
            .map(|(i, &p)| -p.max(1e-300).ln() + m[self.prefix[i]].max(1e-300).ln() + self.phi_values[i])
            .collect()
    }

    /// Largest violation of the constraints.
    pub fn residual(&self, q: &[f64]) -> f64 {
        let eq = self
            .rows
            .a
            .iter()
            .zip(&self.rows.b)
            .map(|(row, b)| (row.iter().zip(q).map(|(a, x)| a * x).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        eq.max(q.iter().map(|&p| (-p).max(0.0)).fold(0.0, f64::max))
    }

    fn distribution(&self, q: Vec<f64>) -> WordDistribution {
        WordDistribution { k: self.k, alphabet: self.domain.alphabet().to_vec(), words: self.words.clone(), probs: q }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub k: usize,
    /// The value is only an upper bound on the relative pressure.
    pub value_kind: String,
    pub value: f64,
    pub optimum: WordDistribution,
    pub constraint_residual: f64,
    pub seeds_used: usize,
    pub seed_values: Vec<f64>,
    /// Largest total-variation distance between optima of different seeds.
    pub max_pairwise_distance: f64,
    pub support_min: f64,
    pub iterations: usize,
}

struct Reduced {
    support: Vec<usize>,
    /// Orthonormal basis of the null space of the constraints on the support.
    null: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    gram: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

fn reduce(p: &RelaxationProblem) -> Result<Reduced> {
    let s = &p.support;
    let m = s.len();
    let rows = p.rows.independent(s)?;
    let a = DMatrix::from_fn(rows.a.len(), m, |i, j| rows.a[i][j]);
    let b = DVector::from_vec(rows.b.clone());
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let scale = eig.eigenvalues.iter().cloned().fold(1.0, f64::max);
    let cols: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] < 1e-10 * scale).collect();
    let null = DMatrix::from_fn(m, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
    let gram = (&a * a.transpose()).cholesky();
    Ok(Reduced { support: s.clone(), null, a, b, gram })
}

fn expand(p: &RelaxationProblem, r: &Reduced, y: &DVector<f64>) -> Vec<f64> {
    let mut q = vec![0.0; p.num_variables()];
    for (i, &j) in r.support.iter().enumerate() {
        q[j] = y[i];
    }
    q
}

/// Maximizes the objective from `start` (strictly positive on the support).
fn newton(p: &RelaxationProblem, r: &Reduced, start: Vec<f64>, cap: usize) -> Result<(Vec<f64>, usize)> {
    let m = r.support.len();
    let mut y = DVector::from_vec(start);
    let f_at = |y: &DVector<f64>| p.objective(&expand(p, r, y));
    let dim = r.null.ncols();
    if dim == 0 {
        return Ok((expand(p, r, &y), 0));
    }
    for it in 1..=cap {
        // pull back onto the affine constraints if rounding drifted
        if let Some(g) = &r.gram {
            let res = &r.b - &r.a * &y;
            if res.amax() > 1e-14 {
                let corr = r.a.transpose() * g.solve(&res);
                let cand = &y + &corr;
                if cand.iter().all(|&v| v > 0.0) {
                    y = cand;
                }
            }
        }
        let q = expand(p, r, &y);
        let full_grad = p.gradient(&q);
        let g = DVector::from_fn(m, |i, _| full_grad[r.support[i]]);
        let mut hess = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 / y[i] } else { 0.0 });
        let pref: Vec<usize> = r.support.iter().map(|&j| p.prefix[j]).collect();
        let sums = p.prefix_sums(&q);
        for i in 0..m {
            for j in 0..m {
                if pref[i] == pref[j] {
                    hess[(i, j)] -= 1.0 / sums[pref[i]];
                }
            }
        }
        // hess is now minus the Hessian: positive semidefinite
        let rg = r.null.transpose() * &g;
        let mut k = r.null.transpose() * &hess * &r.null;
        let mut delta = 1e-12 * (k.trace() / dim as f64).max(1.0);
        let d = loop {
            let mut kk = k.clone();
            for i in 0..dim {
                kk[(i, i)] += delta;
            }
            if let Some(ch) = kk.cholesky() {
                break ch.solve(&rg);
            }
            delta *= 10.0;
            if delta > 1e6 {
                k = DMatrix::identity(dim, dim);
                delta = 0.0;
            }
        };
        let decrement = rg.dot(&d);
        let f0 = f_at(&y);
        if decrement < 1e-16 * f0.abs().max(1.0) {
            return Ok((q, it));
        }
        let mut moved = false;
        for dir in [&r.null * &d, &r.null * &rg] {
            let slope = g.dot(&dir);
            if slope <= 0.0 {
                continue;
            }
            let mut alpha: f64 = 1.0;
            for i in 0..m {
                if dir[i] < 0.0 {
                    alpha = alpha.min(-0.99 * y[i] / dir[i]);
                }
            }
            while alpha > 1e-30 {
                let cand = &y + alpha * &dir;
                if cand.iter().all(|&v| v > 0.0) && f_at(&cand) >= f0 + 1e-4 * alpha * slope {
                    y = cand;
                    moved = true;
                    break;
                }
                alpha /= 2.0;
            }
            if moved {
                break;
            }
        }
        if !moved {
            // the objective no longer resolves the step
            if decrement < 1e-12 {
                return Ok((expand(p, r, &y), it));
            }
            return Err(Error::SolverStalled(it));
        }
    }
    Err(Error::SolverStalled(cap))
}

/// Runs the solver from `seeds` random interior points and reports the
/// best optimum and the spread between seeds.
pub fn solve_relaxation(p: &RelaxationProblem, seeds: usize, cfg: &AnalysisConfig) -> Result<SolveReport> {
    let seeds = seeds.max(1);
    let r = reduce(p)?;
    let nv = p.vertices.len();
    let mut optima = Vec::with_capacity(seeds);
    let mut iterations = 0;
    for s in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64));
        let weights = if nv == 1 {
            vec![1.0]
        } else {
            Dirichlet::new(&vec![1.0; nv]).expect("positive parameters").sample(&mut rng)
        };
        let start: Vec<f64> = r
            .support
            .iter()
            .map(|&j| p.vertices.iter().zip(&weights).map(|(v, w)| v[j] * w).sum::<f64>())
            .collect();
        let (q, it) = newton(p, &r, start, cfg.solver_iteration_cap)?;
        iterations = iterations.max(it);
        optima.push(q);
    }
    let values: Vec<f64> = optima.iter().map(|q| p.objective(q)).collect();
    let mut spread: f64 = 0.0;
    for i in 0..seeds {
        for j in i + 1..seeds {
            let d: f64 = optima[i].iter().zip(&optima[j]).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            spread = spread.max(d);
        }
    }
    let best = (0..seeds).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let q = optima.swap_remove(best);
    let residual = p.residual(&q);
    let support_min = q.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SolveReport {
        k: p.k,
        value_kind: format!("upper bound at order {}", p.k),
        value: values[best],
        optimum: p.distribution(q),
        constraint_residual: residual,
        seeds_used: seeds,
        seed_values: values,
        max_pairwise_distance: spread,
        support_min,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub full_support: bool,
    pub floor: f64,
    pub min_word_prob: f64,
    /// Smallest one-symbol marginal.
    pub min_symbol_prob: f64,
    pub violations: Vec<String>,
}

/// Whether every `k`-word of `x` gets probability above `floor`.
pub fn support_report(r: &SolveReport, x: &Presentation, floor: f64) -> SupportReport {
    let dist = &r.optimum;
    let mut violations = Vec::new();
    let mut min_word = f64::INFINITY;
    let limits = crate::config::Limits::default();
    let words = enumerate_words(x, dist.k, &limits).unwrap_or_else(|_| dist.words.clone());
    for w in &words {
        let p = dist.prob(w);
        min_word = min_word.min(p);
        if p <= floor {
            violations.push(x.render(w));
        }
    }
    let singles = dist.marginal(1);
    let min_symbol = (0..x.num_symbols())
        .map(|a| singles.get(&vec![a]).copied().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    SupportReport { full_support: violations.is_empty(), floor, min_word_prob: min_word, min_symbol_prob: min_symbol, violations }
}

/// Relaxation for any code: normalizes it, rewrites `phi` (a potential on
/// the original domain) on the block presentation and builds the problem.
pub fn build_relaxation_for(
    pi: &SlidingBlockCode,
    nu: &dyn WordMeasure,
    phi: &Potential,
    k: usize,
    cfg: &AnalysisConfig,
) -> Result<(RelaxationProblem, NormalizedCode)> {
    let nc = normalize(pi, &cfg.limits)?;
    let blocks = block_words(&nc);
    let n = nc.to_normal.window();
    if n > 1 && k < 2 {
        // order one on blocks has no overlap constraint and no entropy rate
        return Err(Error::WindowMismatch(format!("order {k} is too small for a code of window {n}")));
    }
    let window = phi.window.saturating_sub(n - 1).max(1);
    let lifted = Potential::from_fn(
        &nc.domain,
        window,
        |w| phi.eval(&flatten(&blocks, w)[..phi.window]).unwrap_or(f64::NAN),
        &cfg.limits,
    )?;
    Ok((build_relaxation(&nc.code, nu, &lifted, k, cfg)?, nc))
}

fn block_words(nc: &NormalizedCode) -> Vec<Word> {
    let mut blocks = vec![Vec::new(); nc.domain.num_symbols()];
    for (w, &s) in nc.to_normal.table() {
        blocks[s] = w.clone();
    }
    blocks
}

fn flatten(blocks: &[Word], w: &[Symbol]) -> Word {
    let mut out = blocks[w[0]].clone();
    for &s in &w[1..] {
        out.push(*blocks[s].last().expect("nonempty block"));
    }
    out
}

/// A word table on the block presentation, rewritten on the original
/// alphabet (words grow by the block length minus one).
pub fn table_on_original(dist: &WordDistribution, nc: &NormalizedCode) -> BTreeMap<Word, f64> {
    let blocks = block_words(nc);
    let mut out = BTreeMap::new();
    for (w, &p) in dist.words.iter().zip(&dist.probs) {
        *out.entry(flatten(&blocks, w)).or_insert(0.0) += p;
    }
    out
}

/// `log` of the transition probabilities of `nu`, as a potential on `y`
/// (names matched). Needs `nu` to charge every allowed transition.
pub fn log_likelihood(nu: &MarkovMeasure, y: &Presentation, cfg: &AnalysisConfig) -> Result<Potential> {
    let rename: Vec<Symbol> = y
        .alphabet()
        .iter()
        .map(|n| {
            nu.alphabet
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::AlphabetMismatch(format!("the measure has no symbol {n}")))
        })
        .collect::<Result<_>>()?;
    let r = nu.order;
    let missing = RefCell::new(None);
    let psi = Potential::from_fn(
        y,
        r + 1,
        |w| {
            let v: Word = w.iter().map(|&a| rename[a]).collect();
            let p = nu.context_index(&v[..r]).map_or(0.0, |c| nu.transition(c, v[r]));
            if p <= 0.0 {
                missing.borrow_mut().get_or_insert_with(|| y.render(w));
            }
            p.ln()
        },
        &cfg.limits,
    );
    if let Some(w) = missing.into_inner() {
        return Err(Error::InvalidMeasure(format!("the measure does not charge the allowed word {w}")));
    }
    psi
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    /// Word length on the original domain at which both tables are compared.
    pub word_len: usize,
    pub order_direct: usize,
    pub order_decomposed: usize,
    pub value_direct: f64,
    pub value_decomposed: f64,
    pub value_gap: f64,
    pub table_distance: f64,
    /// How far the second factor's image of the lifted target is from the
    /// original target on short words.
    pub lifted_target_error: f64,
    pub agree: bool,
    #[serde(skip)]
    pub direct: SolveReport,
    #[serde(skip)]
    pub decomposed: SolveReport,
}

/// Solves the relaxation twice on tables of the same domain words: over
/// `π` with target `ν`, and over `π₁` with target `ν̃`, the unique lift of
/// `ν` through the finite-to-one `π₂`.
pub fn decomposition_crosscheck(
    pi: &SlidingBlockCode,
    (pi1, pi2): (&SlidingBlockCode, &SlidingBlockCode),
    nu: &MarkovMeasure,
    phi: &Potential,
    k: usize,
    seeds: usize,
    cfg: &AnalysisConfig,
) -> Result<CrosscheckReport> {
    let limits = &cfg.limits;
    let pi2_map = pi2
        .symbol_map()
        .ok_or_else(|| Error::InvalidCode("the second factor must be a 1-block code".into()))?;
    let ytilde = pi2.domain();
    let rename: Vec<Symbol> = pi2
        .codomain()
        .iter()
        .map(|n| {
            nu.alphabet
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::AlphabetMismatch(format!("the measure has no symbol {n}")))
        })
        .collect::<Result<_>>()?;
    let r = nu.order;
    let missing = RefCell::new(None);
    let psi = Potential::from_fn(
        ytilde,
        r + 1,
        |w| {
            let v: Word = w.iter().map(|&a| rename[pi2_map[a]]).collect();
            let p = nu.context_index(&v[..r]).map_or(0.0, |c| nu.transition(c, v[r]));
            if p <= 0.0 {
                missing.borrow_mut().get_or_insert_with(|| ytilde.render(w));
            }
            p.ln()
        },
        limits,
    );
    if let Some(w) = missing.into_inner() {
        return Err(Error::InvalidMeasure(format!("the target does not charge the image of {w}")));
    }
    let nu_tilde = sofic_equilibrium_state(ytilde, &psi?, cfg)?;
    let down = HiddenMarkov {
        base: nu_tilde.base.clone(),
        map: nu_tilde.map.iter().map(|&s| pi2_map[s]).collect(),
        alphabet: pi2.codomain().to_vec(),
    };
    let lifted_target_error = max_word_discrepancy(&down, nu, cfg.lift_word_len.min(6), limits)?;

    let w1 = pi1.window();
    let n = pi.window();
    let k_direct = k + w1 - n;
    let (p2, nc2) = build_relaxation_for(pi1, &nu_tilde, phi, k, cfg)?;
    let (p1, nc1) = build_relaxation_for(pi, nu, phi, k_direct, cfg)?;
    let s1 = solve_relaxation(&p1, seeds, cfg)?;
    let s2 = solve_relaxation(&p2, seeds, cfg)?;
    let t1 = table_on_original(&s1.optimum, &nc1);
    let t2 = table_on_original(&s2.optimum, &nc2);
    let gap = (s1.value - s2.value).abs();
    let tv = total_variation(&t1, &t2);
    let tol = cfg.tolerances.seed_agreement;
    Ok(CrosscheckReport {
        word_len: k + w1 - 1,
        order_direct: k_direct,
        order_decomposed: k,
        value_direct: s1.value,
        value_decomposed: s2.value,
        value_gap: gap,
        table_distance: tv,
        lifted_target_error,
        agree: gap <= tol && tv <= tol,
        direct: s1,
        decomposed: s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Limits;
    use crate::decomp::build_decomposition;
    use crate::thermo::equilibrium_state;
    use rand::Rng;

    fn cfg() -> AnalysisConfig {
        AnalysisConfig::default()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn merge() -> SlidingBlockCode {
        let x = Presentation::full_shift(["a", "b", "c"]);
        SlidingBlockCode::one_block(x, names(&["0", "1"]), &[0, 1, 1], &lim()).unwrap()
    }

    fn xor() -> SlidingBlockCode {
        let table = [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 0)].into_iter().collect();
        SlidingBlockCode::new(Presentation::full_shift(["0", "1"]), names(&["0", "1"]), 0, 1, table, &lim()).unwrap()
    }

    fn fair() -> MarkovMeasure {
        MarkovMeasure::bernoulli(names(&["0", "1"]), vec![0.5, 0.5]).unwrap()
    }

    fn zero(x: &Presentation) -> Potential {
        Potential::zero(x, &lim()).unwrap()
    }

    #[test]
    fn merge_encoding_at_order_one() {
        let pi = merge();
        let p = build_relaxation(&pi, &fair(), &zero(pi.domain()), 1, &cfg()).unwrap();
        assert_eq!(p.num_variables(), 3);
        assert_eq!(p.nu_words.len(), 2);
        assert!(p.residual(&[0.5, 0.25, 0.25]) < 1e-15);
        assert!(p.residual(&[0.5, 0.5, 0.0]) < 1e-15);
        assert!(p.residual(&[0.4, 0.3, 0.3]) > 0.09);
    }

    #[test]
    fn merge_optimum() {
        let pi = merge();
        let p = build_relaxation(&pi, &fair(), &zero(pi.domain()), 1, &cfg()).unwrap();
        let r = solve_relaxation(&p, 10, &cfg()).unwrap();
        assert!((r.value - 1.5 * 2f64.ln()).abs() < 1e-9);
        for (w, want) in [(vec![0], 0.5), (vec![1], 0.25), (vec![2], 0.25)] {
            assert!((r.optimum.prob(&w) - want).abs() < 1e-9);
        }
        assert!(r.max_pairwise_distance < 1e-9);
        assert!(r.constraint_residual < 1e-12);
        assert!(support_report(&r, pi.domain(), 1e-12).full_support);
    }

    #[test]
    fn merge_higher_orders_give_the_product_measure() {
        let pi = merge();
        for k in 2..=3 {
            let p = build_relaxation(&pi, &fair(), &zero(pi.domain()), k, &cfg()).unwrap();
            let r = solve_relaxation(&p, 4, &cfg()).unwrap();
            assert!((r.value - 1.5 * 2f64.ln()).abs() < 1e-8, "k={k}");
            let single = r.optimum.marginal(1);
            assert!((single[&vec![1]] - 0.25).abs() < 1e-8);
            let ab = r.optimum.marginal(2)[&vec![0, 1]];
            assert!((ab - 0.125).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_pins_the_table() {
        let gm = Presentation::golden_mean();
        let parry = equilibrium_state(&gm, &zero(&gm), &cfg()).unwrap();
        let id = SlidingBlockCode::identity(&gm, &lim()).unwrap();
        for k in 2..=3 {
            let p = build_relaxation(&id, &parry, &zero(&gm), k, &cfg()).unwrap();
            let r = solve_relaxation(&p, 3, &cfg()).unwrap();
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            assert!((r.value - phi.ln()).abs() < 1e-10);
            for (w, q) in word_table(&parry, k, &lim()).unwrap().into_iter().filter(|(w, _)| w.len() == k) {
                assert!((r.optimum.prob(&w) - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_on_a_subshift_target_fails_full_support() {
        let x = Presentation::full_shift(["0", "1"]);
        let id = SlidingBlockCode::identity(&x, &lim()).unwrap();
        let point = MarkovMeasure::bernoulli(names(&["0", "1"]), vec![1.0, 0.0]).unwrap();
        let p = build_relaxation(&id, &point, &zero(&x), 1, &cfg()).unwrap();
        let r = solve_relaxation(&p, 2, &cfg()).unwrap();
        let s = support_report(&r, &x, 1e-12);
        assert!(!s.full_support);
        assert_eq!(s.violations, vec!["1".to_string()]);
    }

    #[test]
    fn xor_lift_is_uniform() {
        let nc = normalize(&xor(), &lim()).unwrap();
        let p = build_relaxation(&nc.code, &fair(), &zero(&nc.domain), 2, &cfg()).unwrap();
        let uniform: Vec<f64> = p.words.iter().map(|_| 1.0 / p.num_variables() as f64).collect();
        assert!(p.residual(&uniform) < 1e-15);
        let r = solve_relaxation(&p, 5, &cfg()).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-9);
        for q in &r.optimum.probs {
            assert!((q - 0.125).abs() < 1e-9);
        }
        assert!(support_report(&r, &nc.domain, 1e-12).full_support);
    }

    #[test]
    fn target_outside_the_image_is_infeasible() {
        let pi = merge();
        let y3 = MarkovMeasure::bernoulli(names(&["0", "1", "2"]), vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            build_relaxation(&pi, &y3, &zero(pi.domain()), 1, &cfg()),
            Err(Error::Infeasible(_))
        ));
        // image of a code that never emits 11
        let x = Presentation::golden_mean();
        let id = SlidingBlockCode::identity(&x, &lim()).unwrap();
        assert!(matches!(
            build_relaxation(&id, &fair(), &zero(&x), 2, &cfg()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pi = merge();
        for k in 1..=3 {
            let phi = Potential::from_fn(pi.domain(), k, |w| 0.1 * w.iter().sum::<usize>() as f64, &lim()).unwrap();
            let p = build_relaxation(&pi, &fair(), &phi, k, &cfg()).unwrap();
            for _ in 0..20 {
                let q: Vec<f64> = (0..p.num_variables()).map(|_| rng.gen_range(0.05..1.0)).collect();
                let dir: Vec<f64> = (0..p.num_variables()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let h = 1e-6;
                let plus: Vec<f64> = q.iter().zip(&dir).map(|(a, b)| a + h * b).collect();
                let minus: Vec<f64> = q.iter().zip(&dir).map(|(a, b)| a - h * b).collect();
                let fd = (p.objective(&plus) - p.objective(&minus)) / (2.0 * h);
                let an: f64 = p.gradient(&q).iter().zip(&dir).map(|(a, b)| a * b).sum();
                assert!((fd - an).abs() < 1e-6, "k={k}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn value_is_non_increasing_in_order() {
        let x = Presentation::vertex_sft(["a", "b", "c"], &[(0, 0), (0, 1), (1, 2), (2, 0), (2, 2), (1, 0)]).unwrap();
        let pi = SlidingBlockCode::one_block(x.clone(), names(&["0", "1"]), &[0, 1, 1], &lim()).unwrap();
        let y = crate::blockcode::image_of(&pi, &lim()).unwrap();
        let nu = sofic_equilibrium_state(&y, &zero(&y), &cfg()).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=4 {
            let p = build_relaxation(&pi, &nu, &zero(&x), k, &cfg()).unwrap();
            let r = solve_relaxation(&p, 3, &cfg()).unwrap();
            assert!(r.value <= last + 1e-9, "k={k}");
            assert!(r.max_pairwise_distance < 1e-6);
            last = r.value;
        }
    }

    #[test]
    fn crosscheck_merge_and_xor() {
        let pi = merge();
        let d = build_decomposition(&pi, &cfg()).unwrap();
        let c = decomposition_crosscheck(&pi, (&d.pi1, &d.pi2), &fair(), &zero(pi.domain()), 2, 3, &cfg()).unwrap();
        assert!(c.agree, "{c:?}");
        assert!((c.value_direct - 1.5 * 2f64.ln()).abs() < 1e-8);
        assert!(c.lifted_target_error < 1e-9);

        let pi = xor();
        let d = build_decomposition(&pi, &cfg()).unwrap();
        let c = decomposition_crosscheck(&pi, (&d.pi1, &d.pi2), &fair(), &zero(pi.domain()), 2, 3, &cfg()).unwrap();
        assert!(c.agree, "{c:?}");
        assert!((c.value_direct - 2f64.ln()).abs() < 1e-8);
    }
}
