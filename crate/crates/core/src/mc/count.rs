//! Zero counting on a uniform grid by sign changes, with grazing diagnostics.

/// Streaming sign-change counter over successive grid values.
///
/// Exact zeros at nodes count once each. A sign change between two nonzero
/// neighbours counts once. A node that is an interior local minimum of `|f|`
/// below `graze_eps` with both neighbours of its own sign is a grazing
/// candidate: a pair of zeros the grid may have stepped over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignCounter {
    graze_eps: f64,
    count: u64,
    grazing: u64,
    index: usize,
    prev: f64,
    prev2: f64,
}

/// Grazing candidate at grid index `index`, flanked by `index − 1` and `index + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Graze {
    pub index: usize,
}

impl SignCounter {
    pub fn new(graze_eps: f64) -> Self {
        SignCounter {
            graze_eps,
            count: 0,
            grazing: 0,
            index: 0,
            prev: f64::NAN,
            prev2: f64::NAN,
        }
    }

    /// Feeds the next grid value; returns a grazing candidate completed by this value.
    pub fn push(&mut self, v: f64) -> Option<Graze> {
        let mut graze = None;
        if self.index == 0 {
            if v == 0.0 {
                self.count += 1;
            }
        } else {
            let p = self.prev;
            if v == 0.0 {
                self.count += 1;
            } else if p != 0.0 && (p < 0.0) != (v < 0.0) {
                self.count += 1;
            }
            if self.index >= 2 {
                let pp = self.prev2;
                let same_sign = pp != 0.0 && p != 0.0 && v != 0.0 && (pp < 0.0) == (p < 0.0) && (p < 0.0) == (v < 0.0);
                if same_sign && p.abs() < self.graze_eps && p.abs() <= pp.abs() && p.abs() <= v.abs() {
                    self.grazing += 1;
                    graze = Some(Graze { index: self.index - 1 });
                }
            }
        }
        self.prev2 = self.prev;
        self.prev = v;
        self.index += 1;
        graze
    }

    /// Adds zeros found by refining a grazing interval.
    pub fn add_refined(&mut self, zeros: u64) {
        self.count += zeros;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn grazing(&self) -> u64 {
        self.grazing
    }
}

/// Grazing threshold `σ²dt²`, the size of the second-order Taylor term over one step.
pub fn graze_threshold(sigma2: f64, dt: f64) -> f64 {
    sigma2 * dt * dt
}

/// Result of counting one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCount {
    pub zeros: u64,
    pub grazing: u64,
}

/// Counts sign changes of `values`. With `refine`, each grazing candidate at
/// index `i` is resolved by sign changes of `fine` evaluated on a subgrid of
/// `[i − 1, i + 1]` (in grid units).
pub fn count_zeros_with<F: Fn(f64) -> f64>(values: &[f64], graze_eps: f64, refine: Option<(&F, usize)>) -> ZeroCount {
    let mut c = SignCounter::new(graze_eps);
    for &v in values {
        if let Some(g) = c.push(v) {
            if let Some((fine, sub)) = refine {
                c.add_refined(refine_interval(fine, g.index as f64 - 1.0, g.index as f64 + 1.0, sub));
            }
        }
    }
    ZeroCount {
        zeros: c.count(),
        grazing: c.grazing(),
    }
}

/// Sign changes of `f` on `sub` equal steps strictly inside `(a, b)`, where
/// `f(a)` and `f(b)` share a sign.
pub fn refine_interval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, sub: usize) -> u64 {
    let mut zeros = 0;
    let mut prev = f(a);
    for k in 1..=sub {
        let v = f(a + (b - a) * k as f64 / sub as f64);
        if v == 0.0 || (prev != 0.0 && (prev < 0.0) != (v < 0.0)) {
            zeros += 1;
        }
        prev = v;
    }
    zeros
}

/// Sign-change count of a path given on a uniform grid, without refinement.
pub fn count_zeros(values: &[f64], graze_eps: f64) -> ZeroCount {
    count_zeros_with::<fn(f64) -> f64>(values, graze_eps, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_has_two_zeros_on_a_period() {
        let dt = 0.01;
        let n = (2.0 * PI / dt).floor() as usize;
        let v: Vec<f64> = (0..=n).map(|i| (i as f64 * dt).cos()).collect();
        assert_eq!(count_zeros(&v, 1e-4).zeros, 2);
    }

    #[test]
    fn exact_zero_counts_once() {
        assert_eq!(count_zeros(&[-1.0, 0.0, 1.0], 0.0).zeros, 1);
        assert_eq!(count_zeros(&[1.0, 0.0, 1.0], 0.0).zeros, 1);
        assert_eq!(count_zeros(&[0.0, 1.0, -1.0, 0.0], 0.0).zeros, 3);
    }

    #[test]
    fn grazing_is_flagged_and_refined() {
        // g has two zeros at 1 ± 0.001 that the nodes 0, 1, 2 step over.
        let plain = count_zeros(&[1.0, 5e-4, 1.0], 1e-3);
        assert_eq!(plain, ZeroCount { zeros: 0, grazing: 1 });
        let g = |x: f64| (x - 1.0).powi(2) - 1e-6;
        let refined = count_zeros_with(&[1.0, 1e-6, 1.0], 1e-3, Some((&g, 4000)));
        assert_eq!(refined.zeros, 2);
    }
}
