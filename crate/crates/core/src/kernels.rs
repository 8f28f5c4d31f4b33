//! Untyped numeric kernels.
//!
//! Everything in [`crate::axis`] reduces to these functions once the axis
//! and dataset tags have been checked. They operate on bare slices and know
//! nothing about what the indices mean.

/// `0.5 * ln(2π)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Looks up `values[indices[d]]` for every `d`.
///
/// Panics if any index is out of range; callers that cannot guarantee the
/// bound should use [`try_gather`].
pub fn gather<T: Copy>(values: &[T], indices: &[usize]) -> Vec<T> {
    indices.iter().map(|&i| values[i]).collect()
}

/// Bounds-checked [`gather`]. On failure returns `(position, index)` of the
/// first offending entry.
pub fn try_gather<T: Copy>(values: &[T], indices: &[usize]) -> Result<Vec<T>, (usize, usize)> {
    indices
        .iter()
        .enumerate()
        .map(|(pos, &i)| values.get(i).copied().ok_or((pos, i)))
        .collect()
}

/// Composes two child-to-parent arrays: `out[x] = outer[inner[x]]`.
pub fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    gather(outer, inner)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sum of independent Normal log-densities `ln N(obs[d] | mu[d], sigma²)`,
/// accumulated in input order with compensated summation.
///
/// The slices must have equal length and `sigma` must be positive; both are
/// the caller's responsibility.
pub fn normal_loglik(obs: &[f64], mu: &[f64], sigma: f64) -> f64 {
    debug_assert_eq!(obs.len(), mu.len());
    let offset = -HALF_LN_2PI - sigma.ln();
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    obs.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let r = y - m;
            offset - r * r * inv_two_var
        })
        .collect::<CompensatedSum>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_ln_2pi_matches_libm() {
        let direct = 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((HALF_LN_2PI - direct).abs() < 1e-15);
    }

    #[test]
    fn try_gather_reports_first_bad_entry() {
        assert_eq!(try_gather(&[1.0, 2.0], &[0, 1, 1]), Ok(vec![1.0, 2.0, 2.0]));
        assert_eq!(try_gather(&[1.0, 2.0], &[0, 3, 5]), Err((1, 3)));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn standard_normal_at_mode() {
        let v = normal_loglik(&[0.0], &[0.0], 1.0);
        assert!((v - -0.918_938_533_204_673).abs() < 1e-12);
    }
}
