use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mae,
    Mse,
    Huber,
}

pub const HUBER_DELTA: f64 = 1.0;

impl LossKind {
    #[inline]
    fn point(self, r: f64) -> f64 {
        match self {
            LossKind::Mae => r.abs(),
            LossKind::Mse => r * r,
            LossKind::Huber => {
                let a = r.abs();
                if a <= HUBER_DELTA {
                    0.5 * r * r
                } else {
                    HUBER_DELTA * (a - 0.5 * HUBER_DELTA)
                }
            }
        }
    }

    /// d point / d r, with the subgradient of |r| at 0 taken as 0.
    #[inline]
    fn slope(self, r: f64) -> f64 {
        match self {
            LossKind::Mae => {
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Mse => 2.0 * r,
            LossKind::Huber => r.clamp(-HUBER_DELTA, HUBER_DELTA),
        }
    }

    /// Mean of the pointwise loss over every batch entry and channel.
    pub fn value(self, pred: ArrayView2<f64>, target: ArrayView2<f64>) -> f64 {
        let n = pred.len().max(1) as f64;
        let mut acc = 0.0;
        Zip::from(&pred).and(&target).for_each(|&p, &t| acc += self.point(p - t));
        acc / n
    }

    /// Loss value and its gradient with respect to `pred`.
    pub fn value_and_grad(self, pred: ArrayView2<f64>, target: ArrayView2<f64>) -> (f64, Array2<f64>) {
        let n = pred.len().max(1) as f64;
        let mut acc = 0.0;
        let mut grad = Array2::zeros(pred.raw_dim());
        Zip::from(&mut grad).and(&pred).and(&target).for_each(|g, &p, &t| {
            let r = p - t;
            acc += self.point(r);
            *g = self.slope(r) / n;
        });
        (acc / n, grad)
    }
}

/// Mean absolute error over all entries.
pub fn loss_mae(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> f64 {
    LossKind::Mae.value(pred, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mae_cases() {
        let t = array![[1.0, -2.0], [0.5, 4.0]];
        assert_eq!(loss_mae(t.view(), t.view()), 0.0);
        let shifted = &t + (-0.25);
        assert!((loss_mae(shifted.view(), t.view()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mae_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let p: Array2<f64> = Array2::from_shape_fn((3, 4), |_| rng.random_range(-2.0..2.0));
        let t: Array2<f64> = Array2::from_shape_fn((3, 4), |_| rng.random_range(-2.0..2.0));
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..4 {
                sum += (p[[i, j]] - t[[i, j]]).abs();
            }
        }
        assert!((loss_mae(p.view(), t.view()) - sum / 12.0).abs() < 1e-15);
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let t = array![[1.0, 2.0]];
        let (_, g) = LossKind::Mae.value_and_grad(t.view(), t.view());
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn huber_is_continuous_at_delta() {
        let h = LossKind::Huber;
        let a = h.point(HUBER_DELTA - 1e-12);
        let b = h.point(HUBER_DELTA + 1e-12);
        assert!((a - b).abs() < 1e-11);
    }
}
