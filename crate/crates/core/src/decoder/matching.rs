use super::blossom::max_weight_matching;
use super::{DecodeError, DefectGraph};

/// A perfect matching of defect indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub weight: i64,
}

impl Matching {
    fn from_pairs(g: &DefectGraph, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let weight = pairs.iter().map(|&(i, j)| g.weight(i, j)).sum();
        Matching { pairs, weight }
    }

    /// True when every one of `n` defects appears in exactly one pair.
    pub fn is_perfect(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &(i, j) in &self.pairs {
            if i >= n || j >= n || i == j || seen[i] || seen[j] {
                return false;
            }
            seen[i] = true;
            seen[j] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// Exact minimum-weight perfect matching on the complete defect graph.
pub fn mwpm(g: &DefectGraph) -> Result<Matching, DecodeError> {
    let n = g.len();
    if n % 2 == 1 {
        return Err(DecodeError::OddDefects(n));
    }
    if n == 0 {
        return Ok(Matching {
            pairs: Vec::new(),
            weight: 0,
        });
    }
    // Maximum-cardinality matching on a complete graph is perfect; flipping
    // weights against a ceiling turns max weight into min weight.
    let mut ceiling = 0;
    for i in 0..n {
        for j in i + 1..n {
            ceiling = ceiling.max(g.weight(i, j));
        }
    }
    ceiling += 1;
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, ceiling - g.weight(i, j)));
        }
    }
    let mate = max_weight_matching(n, &edges, true);
    let mut pairs = Vec::with_capacity(n / 2);
    for (i, m) in mate.iter().enumerate() {
        match m {
            Some(j) if i < *j => pairs.push((i, *j)),
            Some(_) => {}
            None => return Err(DecodeError::Unmatched(i)),
        }
    }
    Ok(Matching::from_pairs(g, pairs))
}

pub const BRUTE_FORCE_MAX: usize = 12;

/// Minimum over every perfect pairing. Ties keep the lexicographically
/// first pairing.
pub fn brute_force_matching(g: &DefectGraph) -> Result<Matching, DecodeError> {
    let n = g.len();
    if n > BRUTE_FORCE_MAX {
        return Err(DecodeError::TooManyDefects {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    if n % 2 == 1 {
        return Err(DecodeError::OddDefects(n));
    }
    fn go(
        g: &DefectGraph,
        used: &mut [bool],
        cur: &mut Vec<(usize, usize)>,
        cost: i64,
        best: &mut Option<(i64, Vec<(usize, usize)>)>,
    ) {
        let Some(i) = used.iter().position(|&u| !u) else {
            if best.as_ref().map_or(true, |(b, _)| cost < *b) {
                *best = Some((cost, cur.clone()));
            }
            return;
        };
        used[i] = true;
        for j in i + 1..used.len() {
            if used[j] {
                continue;
            }
            let c = cost + g.weight(i, j);
            if best.as_ref().is_some_and(|(b, _)| c >= *b) {
                continue;
            }
            used[j] = true;
            cur.push((i, j));
            go(g, used, cur, c, best);
            cur.pop();
            used[j] = false;
        }
        used[i] = false;
    }
    let mut best = None;
    go(g, &mut vec![false; n], &mut Vec::new(), 0, &mut best);
    let (_, pairs) = best.unwrap_or((0, Vec::new()));
    Ok(Matching::from_pairs(g, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, w: &[i64]) -> DefectGraph {
        DefectGraph::from_weights(n, w.to_vec()).unwrap()
    }

    #[test]
    fn trivial_sizes() {
        let g = graph(0, &[]);
        assert_eq!(mwpm(&g).unwrap(), Matching { pairs: vec![], weight: 0 });
        let g = graph(2, &[0, 7, 7, 0]);
        let m = mwpm(&g).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.weight, 7);
        assert_eq!(brute_force_matching(&g).unwrap(), m);
    }

    #[test]
    fn square_picks_sides() {
        // 0-1-2-3 around a square of side 3, diagonals 4.
        #[rustfmt::skip]
        let w = [0, 3, 4, 3,
                 3, 0, 3, 4,
                 4, 3, 0, 3,
                 3, 4, 3, 0];
        let g = graph(4, &w);
        let b = brute_force_matching(&g).unwrap();
        assert_eq!(b.weight, 6);
        assert_eq!(b.pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(mwpm(&g).unwrap().weight, 6);
    }

    #[test]
    fn odd_and_oversized_inputs() {
        let g = graph(3, &[0, 1, 1, 1, 0, 1, 1, 1, 0]);
        assert!(matches!(mwpm(&g), Err(DecodeError::OddDefects(3))));
        assert!(matches!(brute_force_matching(&g), Err(DecodeError::OddDefects(3))));
        let g = graph(14, &vec![0; 196]);
        assert!(matches!(
            brute_force_matching(&g),
            Err(DecodeError::TooManyDefects { n: 14, max: 12 })
        ));
    }

    fn symmetric(n: usize, max_w: i64) -> impl Strategy<Value = DefectGraph> {
        proptest::collection::vec(0..=max_w, n * (n - 1) / 2).prop_map(move |upper| {
            let mut w = vec![0; n * n];
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    w[i * n + j] = upper[k];
                    w[j * n + i] = upper[k];
                    k += 1;
                }
            }
            DefectGraph::from_weights(n, w).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn blossom_matches_brute_force(
            g in (1usize..=6).prop_flat_map(|h| symmetric(2 * h, 20))
        ) {
            let a = mwpm(&g).unwrap();
            let b = brute_force_matching(&g).unwrap();
            prop_assert!(a.is_perfect(g.len()));
            prop_assert_eq!(a.weight, b.weight);
        }

        #[test]
        fn blossom_matches_brute_force_with_ties(
            g in (1usize..=5).prop_flat_map(|h| symmetric(2 * h, 2))
        ) {
            prop_assert_eq!(mwpm(&g).unwrap().weight, brute_force_matching(&g).unwrap().weight);
        }
    }
}
