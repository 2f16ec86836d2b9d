//! Exact minimum hitting sets for small set systems.

use crate::bitset::BitSet;

/// Lexicographically smallest minimum-cardinality set meeting every set in
/// `sets` (elements are indices `< universe`). Returns `None` if some set is
/// empty.
///
/// Elements of singleton sets are in every hitting set. The remaining sets
/// split into groups sharing no element; the lex-min answers of the groups
/// merge into the lex-min answer of the whole family.
pub fn min_hitting_set(universe: usize, sets: &[BitSet]) -> Option<Vec<usize>> {
    min_hitting_set_at_most(universe, sets, universe)
}

/// [`min_hitting_set`] when the answer has at most `cap` elements, `None`
/// otherwise.
pub fn min_hitting_set_at_most(universe: usize, sets: &[BitSet], cap: usize) -> Option<Vec<usize>> {
    if sets.iter().any(BitSet::is_empty) {
        return None;
    }
    let family = reduce(sets);
    let mut forced = BitSet::new(universe);
    for s in family.iter().filter(|s| s.len() == 1) {
        forced.union_with(s);
    }
    let rest: Vec<BitSet> = family.into_iter().filter(|s| !s.intersects(&forced)).collect();
    let mut out: Vec<usize> = forced.iter().collect();
    let groups = components(universe, rest);
    let lower: Vec<usize> = groups.iter().map(|g| packing_bound(g, universe, 0).max(1)).collect();
    let mut reserved: usize = lower.iter().sum();
    if out.len() + reserved > cap {
        return None;
    }
    for (group, lo) in groups.iter().zip(lower) {
        reserved -= lo;
        let budget = cap - out.len() - reserved;
        out.extend(solve_group(universe, group, lo, budget)?);
    }
    out.sort_unstable();
    Some(out)
}

fn solve_group(universe: usize, family: &[BitSet], lower: usize, budget: usize) -> Option<Vec<usize>> {
    for k in lower..=budget.min(universe) {
        let mut chosen = Vec::with_capacity(k);
        let mut mask = BitSet::new(universe);
        if search(family, universe, k, 0, &mut chosen, &mut mask) {
            return Some(chosen);
        }
    }
    None
}

/// Groups of sets connected through shared elements.
fn components(universe: usize, family: Vec<BitSet>) -> Vec<Vec<BitSet>> {
    let mut parent: Vec<usize> = (0..universe).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for s in &family {
        let mut it = s.iter();
        if let Some(a) = it.next() {
            for b in it {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<BitSet>> = Default::default();
    for s in family {
        let root = find(&mut parent, s.first().expect("nonempty"));
        groups.entry(root).or_default().push(s);
    }
    groups.into_values().collect()
}

/// Drops duplicates and any set containing another member: hitting the
/// smaller set hits the larger.
fn reduce(sets: &[BitSet]) -> Vec<BitSet> {
    let mut uniq: Vec<BitSet> = sets.to_vec();
    uniq.sort_by_key(|s| (s.len(), s.clone()));
    uniq.dedup();
    let mut kept: Vec<BitSet> = Vec::new();
    for s in uniq {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}

/// Greedy count of pairwise disjoint sets, restricted to elements `>= from`.
fn packing_bound(family: &[BitSet], universe: usize, from: usize) -> usize {
    let mut used = BitSet::new(universe);
    let mut count = 0;
    for s in family {
        let restricted = BitSet::from_indices(universe, s.iter().filter(|&e| e >= from));
        if !used.intersects(&restricted) {
            count += 1;
            used.union_with(&restricted);
        }
    }
    count
}

/// Chooses elements in increasing order; the first success at size `k` is
/// therefore the lexicographically smallest hitting set of that size.
fn search(family: &[BitSet], universe: usize, k: usize, from: usize, chosen: &mut Vec<usize>, mask: &mut BitSet) -> bool {
    let unhit: Vec<BitSet> = family.iter().filter(|s| !s.intersects(mask)).cloned().collect();
    if unhit.is_empty() {
        return true;
    }
    let budget = k - chosen.len();
    if budget == 0 {
        return false;
    }
    if unhit.iter().any(|s| s.iter().all(|e| e < from)) {
        return false;
    }
    if packing_bound(&unhit, universe, from) > budget {
        return false;
    }
    for e in from..universe {
        if unhit.iter().all(|s| !s.contains(e)) {
            continue;
        }
        chosen.push(e);
        mask.insert(e);
        if search(&unhit, universe, k, e + 1, chosen, mask) {
            return true;
        }
        chosen.pop();
        mask.remove(e);
        // later choices can no longer hit the first unhit set
        if unhit[0].iter().all(|x| x <= e) {
            break;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(universe: usize, raw: &[&[usize]]) -> Vec<BitSet> {
        raw.iter()
            .map(|s| BitSet::from_indices(universe, s.iter().copied()))
            .collect()
    }

    /// Every subset in lexicographic order of its sorted element list, by size.
    fn brute(universe: usize, family: &[BitSet]) -> Option<Vec<usize>> {
        for k in 0..=universe {
            let mut best: Option<Vec<usize>> = None;
            for mask in 0u32..(1 << universe) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let pick: Vec<usize> = (0..universe).filter(|&i| mask >> i & 1 == 1).collect();
                if family.iter().all(|s| pick.iter().any(|&e| s.contains(e)))
                    && best.as_ref().is_none_or(|b| pick < *b) {
                        best = Some(pick);
                    }
            }
            if best.is_some() {
                return best;
            }
        }
        None
    }

    #[test]
    fn small_examples() {
        assert_eq!(min_hitting_set(3, &sets(3, &[&[0], &[1, 2]])), Some(vec![0, 1]));
        assert_eq!(min_hitting_set(3, &sets(3, &[&[1, 2], &[1, 2]])), Some(vec![1]));
        assert_eq!(min_hitting_set(2, &sets(2, &[&[0], &[1]])), Some(vec![0, 1]));
        assert_eq!(min_hitting_set(2, &sets(2, &[&[], &[1]])), None);
        assert_eq!(min_hitting_set(4, &[]), Some(vec![]));
    }

    #[test]
    fn matches_subset_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let universe = rng.gen_range(1..=8);
            let count = rng.gen_range(0..=7);
            let family: Vec<BitSet> = (0..count)
                .map(|_| {
                    let mut s = BitSet::new(universe);
                    s.insert(rng.gen_range(0..universe));
                    for e in 0..universe {
                        if rng.gen_bool(0.3) {
                            s.insert(e);
                        }
                    }
                    s
                })
                .collect();
            let exact = brute(universe, &family);
            assert_eq!(min_hitting_set(universe, &family), exact);
            let cap = rng.gen_range(0..=universe);
            let capped = exact.filter(|m| m.len() <= cap);
            assert_eq!(min_hitting_set_at_most(universe, &family, cap), capped);
        }
    }
}
