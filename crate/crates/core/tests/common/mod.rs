//! Fixture corpus and property checks shared by the property and acceptance
//! suites. Every check returns a description of the first violation.

#![allow(dead_code)]

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftcode::blockcode::{image_presentation, normalize, NormalizedCode, OneBlockCode, SlidingBlockCode};
use shiftcode::classdeg::{
    class_degree, class_degree_upper, is_transition_block, preimage_words, routable_through, unique_routing_symbol,
    ClassDegreeReport,
};
use shiftcode::fixtures::{named_fixtures, random_corpus, CorpusBounds};
use shiftcode::relopt::build_relaxation_for;
use shiftcode::shiftspace::{count_words, enumerate_words, higher_block, Presentation, Symbol, Word};
use shiftcode::thermo::{sofic_equilibrium_state, Potential};
use shiftcode::{AnalysisConfig, Limits};

pub type Check = Result<(), String>;

pub struct Case {
    pub name: String,
    pub code: SlidingBlockCode,
    pub nc: NormalizedCode,
    pub one: OneBlockCode,
    pub image: Presentation,
    pub cd: ClassDegreeReport,
}

pub const RANDOM_SEED: u64 = 1;
pub const RANDOM_COUNT: usize = 60;
pub const FTO_SEED: u64 = 3;
pub const FTO_COUNT: usize = 20;

/// Named fixtures, a random corpus and a finite-to-one random corpus.
pub fn corpus() -> &'static [Case] {
    static CORPUS: OnceLock<Vec<Case>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let cfg = AnalysisConfig::default();
        let fto = CorpusBounds { finite_to_one: true, ..Default::default() };
        named_fixtures()
            .into_iter()
            .chain(random_corpus(RANDOM_SEED, RANDOM_COUNT, CorpusBounds::default()).unwrap())
            .chain(random_corpus(FTO_SEED, FTO_COUNT, fto).unwrap())
            .map(|f| {
                let nc = normalize(&f.code, &cfg.limits).unwrap();
                let one = OneBlockCode::new(&nc.code).unwrap();
                let image = image_presentation(&nc.code, &cfg.limits).unwrap();
                let cd = class_degree(&f.code, &cfg).unwrap();
                Case { name: f.name, code: f.code, nc, one, image, cd }
            })
            .collect()
    })
}

fn lim() -> Limits {
    Limits::default()
}

fn small() -> Limits {
    Limits { max_words: 20_000, ..Limits::default() }
}

fn walk_right(one: &OneBlockCode, rng: &mut ChaCha8Rng, u: &mut Word, steps: usize) {
    for _ in 0..steps {
        let s = one.succ(*u.last().unwrap());
        u.push(s[rng.gen_range(0..s.len())]);
    }
}

fn walk_left(one: &OneBlockCode, rng: &mut ChaCha8Rng, u: &mut Word, steps: usize) {
    for _ in 0..steps {
        let p = one.pred(u[0]);
        u.insert(0, p[rng.gen_range(0..p.len())]);
    }
}

/// A random path of the normalized domain.
fn random_path(c: &Case, rng: &mut ChaCha8Rng, len: usize) -> Word {
    let mut u = vec![rng.gen_range(0..c.one.num_symbols())];
    walk_right(&c.one, rng, &mut u, len - 1);
    u
}

/// Routability depends only on the endpoints of the preimage: compared with
/// a search over all preimages sharing them.
pub fn routability_endpoint_dependence(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(3..=5);
    let w = c.one.image_word(&random_path(c, &mut rng, len));
    let n = rng.gen_range(1..len - 1);
    let pre = preimage_words(&c.nc.code, &w, &lim()).map_err(|e| e.to_string())?;
    for _ in 0..8 {
        let u = &pre[rng.gen_range(0..pre.len())];
        for &a in c.one.fiber(w[n]) {
            let got = routable_through(&c.nc.code, &w, n, u, a).map_err(|e| e.to_string())?;
            let want = pre.iter().any(|v| v[0] == u[0] && v[len - 1] == u[len - 1] && v[n] == a);
            if got != want {
                return Err(format!("{}: w={w:?} n={n} u={u:?} a={a}: {got} vs {want}", c.name));
            }
        }
    }
    Ok(())
}

/// Every preimage of `w` meets `m` at `n` on some path with its endpoints.
fn brute_transition_block(c: &Case, w: &[Symbol], n: usize, m: &[Symbol]) -> Option<bool> {
    let pre = preimage_words(&c.nc.code, w, &small()).ok()?;
    let last = w.len() - 1;
    Some(
        !pre.is_empty()
            && pre.iter().all(|u| pre.iter().any(|v| v[0] == u[0] && v[last] == u[last] && m.contains(&v[n]))),
    )
}

/// A transition block stays one inside any extension of its word.
pub fn extension_stability(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tb = &c.cd.witness;
    let pre = preimage_words(&c.nc.code, &tb.w, &lim()).map_err(|e| e.to_string())?;
    let mut u = pre[rng.gen_range(0..pre.len())].clone();
    let (left, right) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
    walk_left(&c.one, &mut rng, &mut u, left);
    walk_right(&c.one, &mut rng, &mut u, right);
    let ext = c.one.image_word(&u);
    let ok = is_transition_block(&c.nc.code, &ext, tb.n + left, &tb.m).map_err(|e| e.to_string())?;
    if !ok {
        return Err(format!("{}: extension {ext:?} of {:?} loses the block", c.name, tb.w));
    }
    if brute_transition_block(c, &ext, tb.n + left, &tb.m) == Some(false) {
        return Err(format!("{}: brute force rejects the extension {ext:?}", c.name));
    }
    Ok(())
}

/// On a minimal block every preimage routes through exactly one symbol of M.
pub fn unique_routing(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tb = &c.cd.witness;
    if !tb.certified {
        return Err(format!("{}: witness is not a certified block", c.name));
    }
    let pre = preimage_words(&c.nc.code, &tb.w, &lim()).map_err(|e| e.to_string())?;
    for _ in 0..8 {
        let u = &pre[rng.gen_range(0..pre.len())];
        let a = unique_routing_symbol(&c.nc.code, tb, u).map_err(|e| format!("{}: {e}", c.name))?;
        let through: Vec<Symbol> = tb
            .m
            .iter()
            .copied()
            .filter(|&b| routable_through(&c.nc.code, &tb.w, tb.n, u, b).unwrap())
            .collect();
        if through != [a] {
            return Err(format!("{}: {u:?} routes through {through:?}, reported {a}", c.name));
        }
    }
    Ok(())
}

/// `c_L` never increases with `L` and never drops below the class degree.
pub fn cl_monotone(c: &Case, max_len: usize) -> Check {
    let r = class_degree_upper(&c.nc.code, max_len, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    if r.trace.windows(2).any(|p| p[1] > p[0]) {
        return Err(format!("{}: trace {:?} increases", c.name, r.trace));
    }
    if r.trace.iter().any(|&d| d < c.cd.class_degree) {
        return Err(format!("{}: trace {:?} under the class degree {}", c.name, r.trace, c.cd.class_degree));
    }
    Ok(())
}

fn shifts(c: &Case) -> [&Presentation; 3] {
    [c.code.domain(), &c.nc.domain, &c.image]
}

/// `N(m + n) <= N(m) N(n)`, with counts checked against enumeration.
pub fn subadditivity(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in shifts(c) {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (a, b, ab) = (count_words(x, m), count_words(x, n), count_words(x, m + n));
        if ab > a * b {
            return Err(format!("{}: N({}) = {ab} > N({m}) N({n}) = {}", c.name, m + n, a * b));
        }
        let len = rng.gen_range(1..=4);
        let listed = enumerate_words(x, len, &lim()).map_err(|e| e.to_string())?.len() as u128;
        if listed != count_words(x, len) {
            return Err(format!("{}: count at {len} is {} but {listed} words exist", c.name, count_words(x, len)));
        }
    }
    Ok(())
}

/// The `N`-block recoding has `N(L + N - 1)` words of length `L`.
pub fn higher_block_preservation(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in [c.code.domain(), &c.image] {
        let n = rng.gen_range(1..=3);
        let (hb, _, _) = higher_block(x, n, &lim()).map_err(|e| e.to_string())?;
        for len in 1..=5 {
            let (got, want) = (count_words(&hb, len), count_words(x, len + n - 1));
            if got != want {
                return Err(format!("{}: N={n} L={len}: {got} vs {want}", c.name));
            }
        }
        let listed = enumerate_words(&hb, 3, &lim()).map_err(|e| e.to_string())?.len() as u128;
        if listed != count_words(x, n + 2) {
            return Err(format!("{}: N={n}: {listed} listed 3-words", c.name));
        }
    }
    Ok(())
}

/// Directional derivatives of the relaxation objective against central
/// differences with step 1e-6 at random interior points.
pub fn gradient_vs_differences(c: &Case, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = AnalysisConfig::default();
    let weights: Vec<f64> = (0..c.image.num_symbols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let psi = Potential::from_fn(&c.image, 1, |w| weights[w[0]], &lim()).map_err(|e| e.to_string())?;
    let nu = sofic_equilibrium_state(&c.image, &psi, &cfg).map_err(|e| e.to_string())?;
    let x = c.code.domain();
    let table: Vec<f64> = (0..x.num_symbols() * x.num_symbols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = x.num_symbols();
    let phi = Potential::from_fn(x, 2, |w| table[w[0] * k + w[1]], &lim()).map_err(|e| e.to_string())?;
    let (p, _) = build_relaxation_for(&c.code, &nu, &phi, 2, &cfg).map_err(|e| e.to_string())?;
    let nv = p.num_variables();
    for _ in 0..3 {
        let q: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.05..1.0) / nv as f64).collect();
        let d: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0) / nv as f64).collect();
        let h = 1e-6;
        let at = |t: f64| p.objective(&q.iter().zip(&d).map(|(a, b)| a + t * b).collect::<Vec<_>>());
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let g = p.gradient(&q);
        let exact: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if (fd - exact).abs() > 1e-6 {
            return Err(format!("{}: directional derivative {exact} vs difference {fd}", c.name));
        }
    }
    Ok(())
}
