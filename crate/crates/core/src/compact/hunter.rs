use std::collections::BTreeMap;

/// `min(1, Σ p_i - w(T))` with `T` a maximum-weight spanning tree of the complete graph
/// weighted by the pairwise probabilities (missing pairs weigh zero).
pub fn hunter_worsley(p: &[f64], pair: &BTreeMap<(usize, usize), f64>) -> f64 {
    let n = p.len();
    let total: f64 = p.iter().sum();
    if n <= 1 {
        return total.min(1.0);
    }
    let weight = |i: usize, j: usize| pair.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0);
    // Prim's algorithm on the dense graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::NEG_INFINITY; n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = weight(0, j);
    }
    let mut tree = 0.0;
    for _ in 1..n {
        let next = (0..n).filter(|&j| !in_tree[j]).max_by(|&a, &b| best[a].total_cmp(&best[b])).expect("vertices remain");
        tree += best[next];
        in_tree[next] = true;
        for j in 0..n {
            if !in_tree[j] {
                best[j] = best[j].max(weight(next, j));
            }
        }
    }
    (total - tree).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((hunter_worsley(&[0.3], &BTreeMap::new()) - 0.3).abs() < 1e-15);
        assert!((hunter_worsley(&[0.5, 0.5], &BTreeMap::from([((0, 1), 0.25)])) - 0.75).abs() < 1e-15);
        let all = BTreeMap::from([((0, 1), 0.8), ((0, 2), 0.8), ((1, 2), 0.8)]);
        assert_eq!(hunter_worsley(&[0.9, 0.9, 0.9], &all), 1.0);
    }

    #[test]
    fn tree_picks_heaviest_edges() {
        // path 0-1-2 with weights 0.1, 0.1 versus edge 0-2 of weight 0.05
        let w = BTreeMap::from([((0, 1), 0.1), ((1, 2), 0.1), ((0, 2), 0.05)]);
        assert!((hunter_worsley(&[0.3, 0.3, 0.3], &w) - 0.7).abs() < 1e-12);
    }
}
