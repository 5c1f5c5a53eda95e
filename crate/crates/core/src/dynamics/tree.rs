/// Complete binary tree of partial sums over per-site rates.
///
/// Internal nodes are recomputed from their children on every update
/// rather than adjusted by deltas, so the stored totals never accumulate
/// rounding drift over long runs.
#[derive(Clone, Debug)]
pub struct RateTree {
    leaves: usize,
    len: usize,
    nodes: Vec<f64>,
}

impl RateTree {
    pub fn new(rates: &[f64]) -> Self {
        let leaves = rates.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + rates.len()].copy_from_slice(rates);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        RateTree {
            leaves,
            len: rates.len(),
            nodes,
        }
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, rate: f64) {
        let mut node = self.leaves + i;
        if self.nodes[node] == rate {
            return;
        }
        self.nodes[node] = rate;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf `i` such that the cumulative rate before `i` is at most `u` and
    /// including `i` exceeds it, for `u` in `[0, total)`. Never returns a
    /// zero-rate leaf.
    #[inline]
    pub fn find(&self, mut u: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            if (u < left && left > 0.0) || right <= 0.0 {
                node *= 2;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
        }
        node - self.leaves
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_respects_cumulative_weights() {
        let mut t = RateTree::new(&[1.0, 0.0, 2.0, 0.5, 0.0]);
        assert_eq!(t.total(), 3.5);
        assert_eq!(t.find(0.0), 0);
        assert_eq!(t.find(0.999), 0);
        assert_eq!(t.find(1.0), 2);
        assert_eq!(t.find(2.999), 2);
        assert_eq!(t.find(3.2), 3);
        // rounding past the total still lands on a positive leaf
        assert_eq!(t.find(3.5), 3);
        t.set(3, 0.0);
        t.set(4, 1.0);
        assert_eq!(t.total(), 4.0);
        assert_eq!(t.find(3.5), 4);
    }
}
