//! Plain graph helpers on small vertex sets, used by audits.

/// Dense adjacency bitsets.
#[derive(Clone, Debug)]
pub struct BitGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitGraph {
    pub fn from_fn(n: usize, adj: impl Fn(usize, usize) -> bool) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        for u in 0..n {
            for v in 0..n {
                if u != v && adj(u, v) {
                    rows[u * words + v / 64] |= 1 << (v % 64);
                }
            }
        }
        BitGraph { n, words, rows }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        BitGraph::from_fn(self.n, |u, v| !self.adjacent(u, v))
    }

    /// Maximum clique by branch and bound with a greedy colouring bound.
    pub fn max_clique(&self) -> Vec<usize> {
        let mut best = Vec::new();
        let mut cur = Vec::new();
        let all: Vec<usize> = (0..self.n).collect();
        self.expand(&mut cur, all, &mut best);
        best.sort_unstable();
        best
    }

    fn expand(&self, cur: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>) {
        if cand.is_empty() {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
            return;
        }
        // greedy colouring gives an upper bound per prefix
        let (order, bounds) = self.colour_order(&cand);
        for idx in (0..order.len()).rev() {
            if cur.len() + bounds[idx] <= best.len() {
                return;
            }
            let v = order[idx];
            let next: Vec<usize> = order[..idx]
                .iter()
                .copied()
                .filter(|&w| self.adjacent(v, w))
                .collect();
            cur.push(v);
            self.expand(cur, next, best);
            cur.pop();
        }
    }

    fn colour_order(&self, cand: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in cand {
            match classes
                .iter_mut()
                .find(|c| c.iter().all(|&w| !self.adjacent(v, w)))
            {
                Some(c) => c.push(v),
                None => classes.push(vec![v]),
            }
        }
        let mut order = Vec::with_capacity(cand.len());
        let mut bounds = Vec::with_capacity(cand.len());
        for (i, c) in classes.into_iter().enumerate() {
            for v in c {
                order.push(v);
                bounds.push(i + 1);
            }
        }
        (order, bounds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_clique(g: &BitGraph) -> usize {
        let n = g.len();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if vs.iter().all(|&a| vs.iter().all(|&b| a == b || g.adjacent(a, b))) {
                best = best.max(vs.len());
            }
        }
        best
    }

    #[test]
    fn clique_matches_brute_force() {
        for seed in 0..20u64 {
            let g = BitGraph::from_fn(12, |u, v| {
                let (a, b) = (u.min(v) as u64, u.max(v) as u64);
                !crate::util::sub_seed(seed, a * 100 + b).is_multiple_of(3)
            });
            let c = g.max_clique();
            assert_eq!(c.len(), brute_clique(&g));
            assert!(c.iter().all(|&a| c.iter().all(|&b| a == b || g.adjacent(a, b))));
        }
    }
}
