//! Plain directed-graph routines on adjacency lists.

/// Strongly connected components (iterative Tarjan). Returns the component
/// id of every node; ids are in reverse topological order of the
/// condensation (sink components get small ids).
pub fn scc(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut ncomp = 0;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    !adj.is_empty() && scc(adj).1 == 1
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected graph: BFS levels from node 0, then the
/// gcd of `level[u] + 1 - level[v]` over all edges.
pub fn period(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for u in 0..n {
        for &v in &adj[u] {
            let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            g = gcd(g, d);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_of_two_cycles_joined_one_way() {
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        let (comp, n) = scc(&adj);
        assert_eq!(n, 2);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[2], comp[3]);
        // sink component first
        assert!(comp[2] < comp[0]);
    }

    #[test]
    fn period_of_cycles() {
        assert_eq!(period(&[vec![1], vec![0]]), 2);
        assert_eq!(period(&[vec![0, 1], vec![0]]), 1);
        assert_eq!(period(&[vec![1], vec![2], vec![0, 3], vec![4], vec![5], vec![0]]), 3);
    }
}
