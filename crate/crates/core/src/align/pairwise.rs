//! Order-preserving pairwise matching between a driver sequence and a
//! target pattern: a weighted longest-common-subsequence maximizing summed
//! matched-symbol bit cost, with best-first enumeration of distinct match
//! sets (Lawler partitioning on the top solution).

use std::collections::{BTreeSet, BinaryHeap};

use crate::model::SPPattern;
use crate::score::{symbol_cost, FrequencyTable};

/// One candidate match set: order-preserving `(driver index, target index)`
/// pairs over identical symbol names, ranked by summed bit cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCandidate {
    pub pairs: Vec<(usize, usize)>,
    pub score: f64,
}

/// Ranks order-preserving partial matchings of `driver` against `target`,
/// best first, up to `max_candidates` distinct match sets. Zero shared
/// names yields an empty list.
pub fn pairwise_align(
    driver: &[&str],
    target: &SPPattern,
    table: &FrequencyTable,
    max_candidates: usize,
) -> Vec<PairwiseCandidate> {
    let items: Vec<(&str, bool)> = driver.iter().map(|n| (*n, true)).collect();
    pairwise_align_masked(&items, target, table, max_candidates)
}

/// Same as [`pairwise_align`] but with per-item eligibility: ineligible
/// driver items can never be matched (they still occupy order positions).
pub(crate) fn pairwise_align_masked(
    driver: &[(&str, bool)],
    target: &SPPattern,
    table: &FrequencyTable,
    max_candidates: usize,
) -> Vec<PairwiseCandidate> {
    if max_candidates == 0 || driver.is_empty() || target.is_empty() {
        return Vec::new();
    }
    let target_names: Vec<&str> = target.names().collect();
    let weights: Vec<f64> = target_names
        .iter()
        .map(|n| symbol_cost(table, n))
        .collect();

    let solver = Solver {
        driver,
        target: &target_names,
        weights: &weights,
    };

    // Best-first enumeration: each node fixes a prefix of forced pairs and a
    // set of banned pairs, and carries the optimal completion under those
    // constraints.
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();

    if let Some((score, pairs)) = solver.solve(&[], &BTreeSet::new()) {
        heap.push(Node {
            score,
            pairs,
            forced: Vec::new(),
            banned: BTreeSet::new(),
        });
    }

    while let Some(node) = heap.pop() {
        if !seen.insert(node.pairs.clone()) {
            continue;
        }
        if !node.pairs.is_empty() {
            out.push(PairwiseCandidate {
                pairs: node.pairs.clone(),
                score: node.score,
            });
            if out.len() >= max_candidates {
                break;
            }
        }
        // spawn children: ban the i-th non-forced pair, force everything
        // before it
        let split = node.forced.len();
        for i in split..node.pairs.len() {
            let mut forced = node.pairs[..i].to_vec();
            let mut banned = node.banned.clone();
            banned.insert(node.pairs[i]);
            if let Some((score, pairs)) = solver.solve(&forced, &banned) {
                heap.push(Node {
                    score,
                    pairs,
                    forced: std::mem::take(&mut forced),
                    banned,
                });
            }
        }
    }

    out
}

struct Node {
    score: f64,
    pairs: Vec<(usize, usize)>,
    forced: Vec<(usize, usize)>,
    banned: BTreeSet<(usize, usize)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score && self.pairs == other.pairs
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // max-heap on score; deterministic tie-break on the pair list
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.pairs.cmp(&self.pairs))
    }
}

struct Solver<'a> {
    driver: &'a [(&'a str, bool)],
    target: &'a [&'a str],
    weights: &'a [f64],
}

impl Solver<'_> {
    /// Optimal matching containing all `forced` pairs and none of `banned`.
    fn solve(
        &self,
        forced: &[(usize, usize)],
        banned: &BTreeSet<(usize, usize)>,
    ) -> Option<(f64, Vec<(usize, usize)>)> {
        // forced pairs must themselves be a legal increasing matching
        for w in forced.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return None;
            }
        }
        for &(i, j) in forced {
            if !self.admissible(i, j) || banned.contains(&(i, j)) {
                return None;
            }
        }

        let mut score = 0.0;
        let mut pairs = Vec::new();
        let mut prev = (usize::MAX, usize::MAX); // exclusive lower bound
        for k in 0..=forced.len() {
            let (d_lo, t_lo) = if k == 0 {
                (0, 0)
            } else {
                (forced[k - 1].0 + 1, forced[k - 1].1 + 1)
            };
            let (d_hi, t_hi) = if k == forced.len() {
                (self.driver.len(), self.target.len())
            } else {
                (forced[k].0, forced[k].1)
            };
            let (seg_score, seg_pairs) = self.solve_segment(d_lo, d_hi, t_lo, t_hi, banned);
            score += seg_score;
            pairs.extend(seg_pairs);
            if k < forced.len() {
                let (i, j) = forced[k];
                score += self.weights[j];
                pairs.push((i, j));
                prev = (i, j);
            }
        }
        let _ = prev;
        Some((score, pairs))
    }

    fn admissible(&self, i: usize, j: usize) -> bool {
        self.driver[i].1 && self.driver[i].0 == self.target[j]
    }

    /// Classic DP on the half-open window `[d_lo, d_hi) x [t_lo, t_hi)`.
    fn solve_segment(
        &self,
        d_lo: usize,
        d_hi: usize,
        t_lo: usize,
        t_hi: usize,
        banned: &BTreeSet<(usize, usize)>,
    ) -> (f64, Vec<(usize, usize)>) {
        let n = d_hi.saturating_sub(d_lo);
        let m = t_hi.saturating_sub(t_lo);
        if n == 0 || m == 0 {
            return (0.0, Vec::new());
        }
        let mut dp = vec![0.0f64; (n + 1) * (m + 1)];
        let idx = |i: usize, j: usize| i * (m + 1) + j;
        for i in 1..=n {
            for j in 1..=m {
                let di = d_lo + i - 1;
                let tj = t_lo + j - 1;
                let mut best = dp[idx(i - 1, j)].max(dp[idx(i, j - 1)]);
                if self.admissible(di, tj) && !banned.contains(&(di, tj)) {
                    let with = dp[idx(i - 1, j - 1)] + self.weights[tj];
                    if with > best {
                        best = with;
                    }
                }
                dp[idx(i, j)] = best;
            }
        }
        // traceback, deterministic preference: match > skip-driver > skip-target
        let mut pairs = Vec::new();
        let (mut i, mut j) = (n, m);
        while i > 0 && j > 0 {
            let di = d_lo + i - 1;
            let tj = t_lo + j - 1;
            let here = dp[idx(i, j)];
            if self.admissible(di, tj)
                && !banned.contains(&(di, tj))
                && here == dp[idx(i - 1, j - 1)] + self.weights[tj]
            {
                pairs.push((di, tj));
                i -= 1;
                j -= 1;
            } else if here == dp[idx(i - 1, j)] {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        pairs.reverse();
        (dp[idx(n, m)], pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KnowledgeStore, SPPattern, SPSymbol};

    fn pattern(id: &str, names: &[&str]) -> SPPattern {
        SPPattern::new(
            id,
            names.iter().map(|n| SPSymbol::contents(*n)).collect(),
            1,
        )
    }

    fn uniform_table(names: &[&str]) -> FrequencyTable {
        let store = KnowledgeStore::new()
            .with_pattern(pattern("t", names))
            .unwrap();
        store.frequency_table().unwrap()
    }

    #[test]
    fn omission_is_skipped() {
        // driver `t o` against target `t w o`
        let target = pattern("two", &["t", "w", "o"]);
        let table = uniform_table(&["t", "w", "o"]);
        let cands = pairwise_align(&["t", "o"], &target, &table, 8);
        assert_eq!(cands[0].pairs, vec![(0, 0), (1, 2)]);
    }

    #[test]
    fn substitution_keeps_surrounding_matches() {
        // `k i t t e m s` against contents `k i t t e n`
        let target = pattern("kitten", &["k", "i", "t", "t", "e", "n"]);
        let table = uniform_table(&["k", "i", "t", "t", "e", "n"]);
        let cands = pairwise_align(&["k", "i", "t", "t", "e", "m", "s"], &target, &table, 8);
        assert_eq!(
            cands[0].pairs,
            vec![(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]
        );
    }

    #[test]
    fn identical_sequences_fully_match() {
        let target = pattern("p", &["a", "b", "c", "d"]);
        let table = uniform_table(&["a", "b", "c", "d"]);
        let cands = pairwise_align(&["a", "b", "c", "d"], &target, &table, 8);
        assert_eq!(cands[0].pairs.len(), 4);
    }

    #[test]
    fn no_shared_names_is_empty() {
        let target = pattern("p", &["x", "y"]);
        let table = uniform_table(&["x", "y"]);
        assert!(pairwise_align(&["a", "b"], &target, &table, 8).is_empty());
    }

    #[test]
    fn candidates_are_distinct_and_ranked() {
        // `a` can match either position of target `a x a`
        let target = pattern("p", &["a", "x", "a"]);
        let table = uniform_table(&["a", "x", "a"]);
        let cands = pairwise_align(&["a"], &target, &table, 8);
        assert_eq!(cands.len(), 2);
        assert!(cands[0].score >= cands[1].score);
        assert_ne!(cands[0].pairs, cands[1].pairs);
    }

    #[test]
    fn rare_symbols_dominate() {
        // driver can keep `q` (rare) or both `a`s (common); `q` must win
        let store = KnowledgeStore::new()
            .with_pattern(pattern("p1", &["a", "a", "a", "a", "a", "a", "a"]))
            .unwrap()
            .with_pattern(pattern("p2", &["q"]))
            .unwrap();
        let table = store.frequency_table().unwrap();
        // order forces a choice: driver `q a`, target `a q`
        let target = pattern("t", &["a", "q"]);
        let cands = pairwise_align(&["q", "a"], &target, &table, 8);
        assert_eq!(cands[0].pairs, vec![(0, 1)]);
    }

    #[test]
    fn masked_items_never_match() {
        let target = pattern("p", &["a", "b"]);
        let table = uniform_table(&["a", "b"]);
        let cands =
            pairwise_align_masked(&[("a", false), ("b", true)], &target, &table, 8);
        assert_eq!(cands[0].pairs, vec![(1, 1)]);
    }
}
