//! Built-in factor codes and a seeded random corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockcode::{image_of, minimal_right_resolving, OneBlockCode, SlidingBlockCode};
use crate::config::Limits;
use crate::fto::find_diamond;
use crate::shiftspace::{is_irreducible, Presentation};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub code: SlidingBlockCode,
    pub image: Presentation,
}

impl Fixture {
    pub fn new(name: impl Into<String>, code: SlidingBlockCode, limits: &Limits) -> Result<Self> {
        let image = image_of(&code, limits)?;
        Ok(Fixture { name: name.into(), code, image })
    }

    pub fn domain(&self) -> &Presentation {
        self.code.domain()
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `a, b, c → 0, 1, 1` on the full 3-shift.
pub fn merge_code() -> SlidingBlockCode {
    let x = Presentation::full_shift(["a", "b", "c"]);
    SlidingBlockCode::one_block(x, names(&["0", "1"]), &[0, 1, 1], &Limits::default()).expect("valid")
}

/// `y_i = x_i + x_{i+1} mod 2` on the full 2-shift.
pub fn xor_code() -> SlidingBlockCode {
    let table = [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 0)].into_iter().collect();
    SlidingBlockCode::new(Presentation::full_shift(["0", "1"]), names(&["0", "1"]), 0, 1, table, &Limits::default())
        .expect("valid")
}

/// Edge SFT of the even shift's Fischer cover onto the even shift.
pub fn even_cover_code() -> SlidingBlockCode {
    minimal_right_resolving(&Presentation::even_shift(), &Limits::default()).expect("valid").1
}

/// Every named fixture.
pub fn named_fixtures() -> Vec<Fixture> {
    let lim = Limits::default();
    let id = |p: Presentation| SlidingBlockCode::identity(&p, &lim).expect("valid");
    [
        ("full-2-identity", id(Presentation::full_shift(["0", "1"]))),
        ("full-3-identity", id(Presentation::full_shift(["a", "b", "c"]))),
        ("golden-mean-identity", id(Presentation::golden_mean())),
        ("even-shift-cover", even_cover_code()),
        ("merge", merge_code()),
        ("xor", xor_code()),
    ]
    .into_iter()
    .map(|(n, c)| Fixture::new(n, c, &lim).expect("named fixtures are valid"))
    .collect()
}

pub fn named_fixture(name: &str) -> Option<Fixture> {
    named_fixtures().into_iter().find(|f| f.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusBounds {
    pub max_symbols: usize,
    pub max_states: usize,
    /// Keep only finite-to-one codes.
    pub finite_to_one: bool,
}

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds { max_symbols: 5, max_states: 5, finite_to_one: false }
    }
}

pub const MAX_BOUND: usize = 6;

/// Random irreducible vertex SFTs with surjective 1-block codes. The same
/// seed always gives the same corpus.
pub fn random_corpus(seed: u64, count: usize, bounds: CorpusBounds) -> Result<Vec<Fixture>> {
    if bounds.max_symbols > MAX_BOUND || bounds.max_states > MAX_BOUND {
        return Err(Error::InvalidArgument(format!("corpus bounds may not exceed {MAX_BOUND}")));
    }
    let max_n = bounds.max_symbols.min(bounds.max_states);
    if max_n < 2 {
        return Err(Error::InvalidArgument("corpus bounds must allow at least 2 symbols".into()));
    }
    let lim = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(2..=max_n);
        let x = random_irreducible(&mut rng, n);
        let m = rng.gen_range(1..=n);
        // a permutation pins a preimage of every image symbol
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut map = vec![0; n];
        for (i, &a) in order.iter().enumerate() {
            map[a] = if i < m { i } else { rng.gen_range(0..m) };
        }
        let codomain = (0..m).map(|i| format!("y{i}")).collect();
        let code = SlidingBlockCode::one_block(x, codomain, &map, &lim)?;
        if bounds.finite_to_one && find_diamond(&OneBlockCode::new(&code)?).is_some() {
            continue;
        }
        out.push(Fixture::new(format!("random-{seed}-{}", out.len()), code, &lim)?);
    }
    Ok(out)
}

/// A Hamiltonian cycle plus random chords.
fn random_irreducible(rng: &mut ChaCha8Rng, n: usize) -> Presentation {
    let mut cycle: Vec<usize> = (0..n).collect();
    cycle.shuffle(rng);
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        adj[cycle[i]][cycle[(i + 1) % n]] = true;
    }
    let density = rng.gen_range(0.2..0.7);
    for row in adj.iter_mut() {
        for cell in row.iter_mut() {
            if rng.gen_bool(density) {
                *cell = true;
            }
        }
    }
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| adj[i][j]).collect();
    let p = Presentation::vertex_sft((0..n).map(|i| format!("x{i}")), &edges).expect("valid");
    debug_assert!(is_irreducible(&p));
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockcode::normalize;

    #[test]
    fn named_fixtures_are_irreducible_and_normalize() {
        for f in named_fixtures() {
            let nc = normalize(&f.code, &Limits::default()).unwrap();
            assert!(is_irreducible(&nc.domain), "{}", f.name);
        }
    }

    #[test]
    fn corpus_is_valid_and_deterministic() {
        let a = random_corpus(1, 10, CorpusBounds::default()).unwrap();
        let b = random_corpus(1, 10, CorpusBounds::default()).unwrap();
        assert_eq!(a.len(), 10);
        for (f, g) in a.iter().zip(&b) {
            assert_eq!(f.code, g.code);
            assert!(is_irreducible(f.domain()));
            assert!(f.domain().num_symbols() <= 5);
            normalize(&f.code, &Limits::default()).unwrap();
        }
        let fto = random_corpus(2, 5, CorpusBounds { finite_to_one: true, ..Default::default() }).unwrap();
        for f in fto {
            assert!(find_diamond(&OneBlockCode::new(&f.code).unwrap()).is_none());
        }
    }

    #[test]
    fn oversized_bounds_are_rejected() {
        let b = CorpusBounds { max_symbols: 7, ..Default::default() };
        assert!(matches!(random_corpus(1, 1, b), Err(Error::InvalidArgument(_))));
    }
}
