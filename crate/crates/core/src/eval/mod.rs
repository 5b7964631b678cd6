//! Motion coherency of generated frames: how well the flow measured from a
//! source image to each frame follows the commanded motion values.

mod table;

pub use self::table::{report_table, CoherencyTable, TableRow};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{flow_magnitude_prepared, FlowError, FlowParams, PreparedFrame};
use crate::media::{to_grayscale, ColorImage};

/// The schedule of commanded magnitudes used for rollouts.
pub const DEFAULT_SCHEDULE: [f64; 8] = [2.0, 4.0, 6.0, 8.0, 11.0, 14.0, 17.0, 19.0];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} values, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("correlation undefined: {0} series is constant")]
    ConstantSeries(&'static str),
    #[error("invalid rollout: {0}")]
    InvalidSpec(String),
    #[error("frame {index} is {got_w}x{got_h}, source is {want_w}x{want_h}")]
    FrameSize {
        index: usize,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("no reports to tabulate")]
    NoReports,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(EvalError::TooShort {
            min: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(EvalError::ConstantSeries("first"));
    }
    if syy == 0.0 {
        return Err(EvalError::ConstantSeries("second"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean squared deviation `sum((c - m)^2) / n`.
pub fn l2_deviation(commanded: &[f64], measured: &[f64]) -> Result<f64, EvalError> {
    if commanded.len() != measured.len() {
        return Err(EvalError::LengthMismatch {
            left: commanded.len(),
            right: measured.len(),
        });
    }
    if commanded.is_empty() {
        return Err(EvalError::TooShort { min: 1, got: 0 });
    }
    let sum: f64 = commanded
        .iter()
        .zip(measured)
        .map(|(c, m)| (c - m).powi(2))
        .sum();
    Ok(sum / commanded.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutSpec {
    pub motion_inputs: Vec<f64>,
    /// Guidance scale the frames were generated at; only used as a label.
    pub cfg_img_label: Option<f64>,
}

impl RolloutSpec {
    pub fn new(motion_inputs: Vec<f64>, cfg_img_label: Option<f64>) -> Result<Self, EvalError> {
        let spec = Self {
            motion_inputs,
            cfg_img_label,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.motion_inputs.is_empty() {
            return Err(EvalError::InvalidSpec("no motion inputs".into()));
        }
        if let Some(bad) = self
            .motion_inputs
            .iter()
            .find(|m| !(m.is_finite() && **m >= 0.0))
        {
            return Err(EvalError::InvalidSpec(format!(
                "motion input {bad} is not a finite value >= 0"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencyReport {
    pub commanded: Vec<f64>,
    pub measured: Vec<f64>,
    pub l2: f64,
    pub pcc: f64,
}

/// Flow magnitude from `source` to each generated frame, in order.
pub fn measure_rollout(
    source: &ColorImage,
    generated: &[ColorImage],
    flow_params: &FlowParams,
) -> Result<Vec<f64>, EvalError> {
    for (index, f) in generated.iter().enumerate() {
        if f.width() != source.width() || f.height() != source.height() {
            return Err(EvalError::FrameSize {
                index,
                got_w: f.width(),
                got_h: f.height(),
                want_w: source.width(),
                want_h: source.height(),
            });
        }
    }
    let src = PreparedFrame::new(&to_grayscale(source), flow_params)?;
    generated
        .par_iter()
        .map(|f| {
            let next = PreparedFrame::new(&to_grayscale(f), flow_params)?;
            Ok(flow_magnitude_prepared(&src, &next, flow_params).magnitude)
        })
        .collect()
}

pub fn motion_coherency(
    source: &ColorImage,
    generated: &[ColorImage],
    spec: &RolloutSpec,
    flow_params: &FlowParams,
) -> Result<CoherencyReport, EvalError> {
    spec.validate()?;
    if generated.len() != spec.motion_inputs.len() {
        return Err(EvalError::LengthMismatch {
            left: spec.motion_inputs.len(),
            right: generated.len(),
        });
    }
    let measured = measure_rollout(source, generated, flow_params)?;
    let commanded = spec.motion_inputs.clone();
    Ok(CoherencyReport {
        l2: l2_deviation(&commanded, &measured)?,
        pcc: pearson(&commanded, &measured)?,
        commanded,
        measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Texture;
    use proptest::prelude::*;

    #[test]
    fn pearson_cases() {
        let x = [2.0, 4.0, 6.0, 8.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
        // cov = (-1*-1 + 0*1 + 1*0) / 3 = 2/3, var x = var y = 2/3.
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(EvalError::TooShort { .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[3.0, 3.0]),
            Err(EvalError::ConstantSeries(_))
        ));
    }

    #[test]
    fn l2_cases() {
        assert_eq!(l2_deviation(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l2_deviation(&[2.0, 4.0], &[3.0, 5.0]).unwrap(), 1.0);
        assert_eq!(l2_deviation(&[0.0], &[5.0]).unwrap(), 25.0);
        assert!(l2_deviation(&[1.0], &[1.0, 2.0]).is_err());
        assert!(l2_deviation(&[], &[]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(RolloutSpec::new(DEFAULT_SCHEDULE.to_vec(), Some(1.8)).is_ok());
        assert!(RolloutSpec::new(vec![], None).is_err());
        assert!(RolloutSpec::new(vec![1.0, -1.0], None).is_err());
        assert!(RolloutSpec::new(vec![f64::NAN], None).is_err());
    }

    #[test]
    fn repeated_source_has_no_correlation() {
        let src = Texture::new(4).render_color(64, 64, 0.0, 0.0);
        let spec = RolloutSpec::new(vec![2.0, 4.0, 6.0, 8.0], None).unwrap();
        let gen = vec![src.clone(); 4];
        let measured = measure_rollout(&src, &gen, &FlowParams::default()).unwrap();
        assert_eq!(measured, vec![0.0; 4]);
        assert!(matches!(
            motion_coherency(&src, &gen, &spec, &FlowParams::default()),
            Err(EvalError::ConstantSeries("second"))
        ));
    }

    #[test]
    fn mismatched_inputs() {
        let src = Texture::new(4).render_color(64, 64, 0.0, 0.0);
        let spec = RolloutSpec::new(vec![2.0, 4.0], None).unwrap();
        let p = FlowParams::default();
        assert!(motion_coherency(&src, std::slice::from_ref(&src), &spec, &p).is_err());
        let small = Texture::new(4).render_color(48, 64, 0.0, 0.0);
        assert!(matches!(
            motion_coherency(&src, &[src.clone(), small], &spec, &p),
            Err(EvalError::FrameSize { index: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn pearson_positive_affine_invariance(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
            noise in proptest::collection::vec(-100.0f64..100.0, 20),
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            let ys: Vec<f64> = noise[..xs.len()].to_vec();
            let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread(&xs) > 1e-3 && spread(&ys) > 1e-3);
            let mapped: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
            let p = pearson(&xs, &ys).unwrap();
            prop_assert!((pearson(&xs, &mapped).unwrap() - p).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&p));
        }

        #[test]
        fn l2_symmetric_and_zero_on_diagonal(
            xs in proptest::collection::vec(-50.0f64..50.0, 1..20),
            ys in proptest::collection::vec(-50.0f64..50.0, 20),
        ) {
            let ys = &ys[..xs.len()];
            prop_assert_eq!(l2_deviation(&xs, &xs).unwrap(), 0.0);
            prop_assert_eq!(l2_deviation(&xs, ys).unwrap(), l2_deviation(ys, &xs).unwrap());
            prop_assert!(l2_deviation(&xs, ys).unwrap() >= 0.0);
        }
    }
}
