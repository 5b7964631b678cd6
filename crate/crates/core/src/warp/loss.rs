use super::{FeatureMap, WarpError};

/// Nonnegative per-level weights of the perceptual loss, at least one positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights(Vec<f64>);

impl LayerWeights {
    pub fn new(lambdas: Vec<f64>) -> Result<Self, WarpError> {
        if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(WarpError::Weights(format!(
                "weight {bad} is not a finite nonnegative"
            )));
        }
        if !lambdas.iter().any(|&l| l > 0.0) {
            return Err(WarpError::Weights(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(Self(lambdas))
    }

    /// Weight 1 on each of `levels` levels.
    pub fn uniform(levels: usize) -> Self {
        assert!(levels > 0);
        Self(vec![1.0; levels])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_levels(
    a: &[FeatureMap],
    b: &[FeatureMap],
    weights: &LayerWeights,
) -> Result<(), WarpError> {
    if a.len() != b.len() || a.len() != weights.len() {
        return Err(WarpError::Shape(format!(
            "{} and {} feature levels with {} weights",
            a.len(),
            b.len(),
            weights.len()
        )));
    }
    for (k, (fa, fb)) in a.iter().zip(b).enumerate() {
        if !fa.same_shape(fb) {
            return Err(WarpError::Shape(format!(
                "level {k}: {}x{}x{} vs {}x{}x{}",
                fa.channels(),
                fa.width(),
                fa.height(),
                fb.channels(),
                fb.width(),
                fb.height()
            )));
        }
    }
    Ok(())
}

/// Weighted sum over levels of the squared Frobenius distance between
/// corresponding feature maps: `sum_k lambda_k * ||a_k - b_k||_F^2`.
pub fn perceptual_loss(
    feats_a: &[FeatureMap],
    feats_b: &[FeatureMap],
    weights: &LayerWeights,
) -> Result<f64, WarpError> {
    check_levels(feats_a, feats_b, weights)?;
    Ok(feats_a
        .iter()
        .zip(feats_b)
        .zip(weights.as_slice())
        .map(|((a, b), &lambda)| {
            let sq: f64 = a
                .data()
                .iter()
                .zip(b.data())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            lambda * sq
        })
        .sum())
}

/// Gradient of [`perceptual_loss`] with respect to every entry of `feats_b`:
/// `-2 * lambda_k * (a - b)`.
pub fn perceptual_loss_grad_b(
    feats_a: &[FeatureMap],
    feats_b: &[FeatureMap],
    weights: &LayerWeights,
) -> Result<Vec<FeatureMap>, WarpError> {
    check_levels(feats_a, feats_b, weights)?;
    Ok(feats_a
        .iter()
        .zip(feats_b)
        .zip(weights.as_slice())
        .map(|((a, b), &lambda)| {
            let mut g = b.clone();
            for (gi, (x, y)) in g.data_mut().iter_mut().zip(a.data().iter().zip(b.data())) {
                *gi = -2.0 * lambda * (x - y);
            }
            g
        })
        .collect())
}

/// Denoising loss plus the weighted perceptual term. Both `l_p` and
/// `lambda_p` are expected to be nonnegative.
pub fn total_loss(l_ldm: f64, l_p: f64, lambda_p: f64) -> f64 {
    debug_assert!(l_p >= 0.0 && lambda_p >= 0.0);
    l_ldm + lambda_p * l_p
}
