//! Cauchy-kernel summation used by the secular solver and the structured eigenvectors.

use crate::scalar::Real;

/// A point stored as an offset from one of the poles, so that its gap to that pole is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchored<T> {
    pub anchor: Option<usize>,
    pub offset: T,
}

impl<T: Real> Anchored<T> {
    pub fn absolute(x: T) -> Self {
        Self { anchor: None, offset: x }
    }

    pub fn value(&self, poles: &[T]) -> T {
        match self.anchor {
            Some(o) => poles[o] + self.offset,
            None => self.offset,
        }
    }

    /// Point minus pole `j`.
    #[inline]
    pub fn gap(&self, poles: &[T], j: usize) -> T {
        match self.anchor {
            Some(o) if o == j => self.offset,
            Some(o) => (poles[o] - poles[j]) + self.offset,
            None => self.offset - poles[j],
        }
    }
}

/// Batched sums with the kernel 1 / (x − a)^p between targets x and poles a.
pub trait KernelSum<T: Real>: Send + Sync {
    /// `out[i] = Σ_j weights[j] / (x_i − a_j)^power`.
    fn to_targets(&self, poles: &[T], targets: &[Anchored<T>], weights: &[T], power: i32, out: &mut [T]);

    /// `out[j] = Σ_i weights[i] / (x_i − a_j)^power`.
    fn to_poles(&self, poles: &[T], targets: &[Anchored<T>], weights: &[T], power: i32, out: &mut [T]);
}

/// Direct O(mn) summation, exact to rounding.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectSum;

impl<T: Real> KernelSum<T> for DirectSum {
    fn to_targets(&self, poles: &[T], targets: &[Anchored<T>], weights: &[T], power: i32, out: &mut [T]) {
        debug_assert_eq!(poles.len(), weights.len());
        debug_assert_eq!(targets.len(), out.len());
        for (o, t) in out.iter_mut().zip(targets) {
            let mut s = T::zero();
            for (j, &w) in weights.iter().enumerate() {
                if w != T::zero() {
                    s += w / t.gap(poles, j).powi(power);
                }
            }
            *o = s;
        }
    }

    fn to_poles(&self, poles: &[T], targets: &[Anchored<T>], weights: &[T], power: i32, out: &mut [T]) {
        debug_assert_eq!(targets.len(), weights.len());
        debug_assert_eq!(poles.len(), out.len());
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = T::zero();
            for (t, &w) in targets.iter().zip(weights) {
                if w != T::zero() {
                    s += w / t.gap(poles, j).powi(power);
                }
            }
            *o = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_gaps_are_exact_at_the_anchor() {
        let poles = [1.0f64, 1.0 + 1e-12, 5.0];
        let x = Anchored { anchor: Some(1), offset: 1e-30 };
        assert_eq!(x.gap(&poles, 1), 1e-30);
        assert_eq!(x.gap(&poles, 0), (poles[1] - poles[0]) + 1e-30);
        let mut out = [0.0f64; 1];
        DirectSum.to_targets(&poles, &[Anchored::absolute(0.0)], &[1.0, 0.0, 2.0], 1, &mut out);
        assert!((out[0] - (-1.0 - 0.4)).abs() < 1e-15);
        let mut outp = [0.0f64; 3];
        DirectSum.to_poles(&poles, &[Anchored::absolute(0.0), Anchored::absolute(3.0)], &[1.0, 1.0], 2, &mut outp);
        assert!((outp[2] - (1.0 / 25.0 + 1.0 / 4.0)).abs() < 1e-15);
    }
}
