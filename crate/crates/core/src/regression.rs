//! Quadratic two-temperature drift model, one fit per target channel.
//!
//! Each drifting quantity (X, Y, Z position or resonance frequency) is
//! modelled as a full quadratic in the two temperature readings:
//!
//! ```text
//! target = b0 + b1*T1 + b2*T2 + b3*T1^2 + b4*T1*T2 + b5*T2^2
//! ```
//!
//! Temperatures near 13-20 degC make the raw square terms badly scaled, so
//! the solver centers both temperatures on their training means, equilibrates
//! the design columns and solves by SVD; the coefficients are transformed
//! back to the raw-temperature basis for reporting, which keeps the persisted
//! model independent of the internal conditioning trick.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::timeseries::{align, AlignedFrame, TimeSeries};

/// Relative singular-value cutoff below which the design matrix counts as
/// rank-deficient and the minimum-norm solution is returned.
const RANK_TOLERANCE: f64 = 1e-10;

/// Fixed-order quadratic basis `(1, T1, T2, T1^2, T1*T2, T2^2)`.
pub fn design_row(t1: f64, t2: f64) -> [f64; 6] {
    [1.0, t1, t2, t1 * t1, t1 * t2, t2 * t2]
}

/// A fitted quadratic model for one target channel.
///
/// `coefficients` are in the raw-temperature basis, so
/// `predict = design_row(T1, T2) . coefficients` with physical temperatures.
/// `center` records the training means the solver centered on; they are
/// persisted with the model for traceability but not needed for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub target: String,
    pub coefficients: [f64; 6],
    pub center: (f64, f64),
    pub training_span: (f64, f64),
    pub n_train: usize,
    pub rms_train: f64,
    pub rank_deficient: bool,
}

impl QuadraticModel {
    /// Model value at the given temperatures.
    pub fn predict(&self, t1: f64, t2: f64) -> f64 {
        let row = design_row(t1, t2);
        row.iter()
            .zip(&self.coefficients)
            .map(|(r, c)| r * c)
            .sum()
    }
}

/// Convenience free function mirroring [`QuadraticModel::predict`].
pub fn predict(model: &QuadraticModel, t1: f64, t2: f64) -> f64 {
    model.predict(t1, t2)
}

/// Least-squares fit of the quadratic model to one frame column.
///
/// The frame must contain `T1`, `T2` and the target column, with at least as
/// many rows as coefficients. Solved via SVD of the centered, column-scaled
/// design matrix; when the matrix is rank-deficient (for example T1 exactly
/// constant), the minimum-norm solution in that centered scaled basis is
/// taken and `rank_deficient` is set.
pub fn fit_quadratic(frame: &AlignedFrame, target: &str) -> Result<QuadraticModel> {
    let t1 = frame.require_column("T1")?;
    let t2 = frame.require_column("T2")?;
    let y = frame.require_column(target)?;
    let n = frame.len();
    if n < 6 {
        return Err(Error::InsufficientRows { needed: 6, got: n });
    }

    let m1 = t1.iter().sum::<f64>() / n as f64;
    let m2 = t2.iter().sum::<f64>() / n as f64;

    let mut a = DMatrix::zeros(n, 6);
    for i in 0..n {
        let row = design_row(t1[i] - m1, t2[i] - m2);
        for j in 0..6 {
            a[(i, j)] = row[j];
        }
    }

    // Equilibrate columns to unit norm. A column that is negligible next to
    // the largest one carries only centering round-off (a constant sensor
    // leaves ~1e-16 residue, not exact zeros); normalizing it would clone the
    // intercept column and blow up on back-scaling, so it is zeroed instead
    // and drops out of the rank.
    let norms: Vec<f64> = (0..6).map(|j| a.column(j).norm()).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let mut scale = [1.0f64; 6];
    for j in 0..6 {
        if norms[j] <= max_norm * 1e-12 {
            a.column_mut(j).fill(0.0);
        } else {
            scale[j] = norms[j];
            let mut col = a.column_mut(j);
            col /= norms[j];
        }
    }

    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = s_max * RANK_TOLERANCE;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let rhs = DVector::from_column_slice(y);
    let w = svd
        .solve(&rhs, tol)
        .map_err(|_| Error::NonConvergence { iterations: 0 })?;

    let b = [
        w[0] / scale[0],
        w[1] / scale[1],
        w[2] / scale[2],
        w[3] / scale[3],
        w[4] / scale[4],
        w[5] / scale[5],
    ];

    // Expand (T1 - m1), (T2 - m2) powers back into the raw basis.
    let coefficients = [
        b[0] - b[1] * m1 - b[2] * m2 + b[3] * m1 * m1 + b[4] * m1 * m2 + b[5] * m2 * m2,
        b[1] - 2.0 * b[3] * m1 - b[4] * m2,
        b[2] - b[4] * m1 - 2.0 * b[5] * m2,
        b[3],
        b[4],
        b[5],
    ];

    let model = QuadraticModel {
        target: target.to_string(),
        coefficients,
        center: (m1, m2),
        training_span: (frame.times()[0], *frame.times().last().unwrap()),
        n_train: n,
        rms_train: 0.0,
        rank_deficient: rank < 6,
    };
    let rms = (0..n)
        .map(|i| {
            let r = y[i] - model.predict(t1[i], t2[i]);
            r * r
        })
        .sum::<f64>()
        / n as f64;
    Ok(QuadraticModel { rms_train: rms.sqrt(), ..model })
}

/// Per-row absolute prediction error together with its summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub series: TimeSeries,
    pub stats: ResidualStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub rms: f64,
}

impl ResidualStats {
    pub fn from_absolute(res: &[f64]) -> ResidualStats {
        let n = res.len() as f64;
        ResidualStats {
            max: res.iter().copied().fold(0.0, f64::max),
            mean: res.iter().sum::<f64>() / n,
            rms: (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt(),
        }
    }
}

/// `|actual - predicted|` across a frame, timestamped on the frame grid.
pub fn residual_series(model: &QuadraticModel, frame: &AlignedFrame) -> Result<Residuals> {
    let t1 = frame.require_column("T1")?;
    let t2 = frame.require_column("T2")?;
    let actual = frame.require_column(&model.target)?;
    let abs: Vec<f64> = (0..frame.len())
        .map(|i| (actual[i] - model.predict(t1[i], t2[i])).abs())
        .collect();
    let stats = ResidualStats::from_absolute(&abs);
    let series = TimeSeries::new(
        format!("residual_{}", model.target),
        frame.times().to_vec(),
        abs,
    )?;
    Ok(Residuals { series, stats })
}

/// Builds the regression frame for one target: the grid is the target's own
/// timestamps (clipped to the span both temperature logs cover), and the
/// temperatures are interpolated onto it. Using the target's native instants
/// avoids interpolating the target itself, which would smear curvature.
pub fn frame_on_target_grid(
    t1: &TimeSeries,
    t2: &TimeSeries,
    target: &TimeSeries,
) -> Result<AlignedFrame> {
    let start = t1.span().0.max(t2.span().0).max(target.span().0);
    let end = t1.span().1.min(t2.span().1).min(target.span().1);
    if !(start < end) {
        return Err(Error::NoOverlap);
    }
    let clipped = target.restrict(start, end).map_err(|e| match e {
        Error::EmptyResult => Error::NoOverlap,
        other => other,
    })?;
    align(&[t1, t2, &clipped], Some(clipped.times()))
}

/// Restricts the target to `[span start, train_until]` when a boundary is
/// given, then fits on the target-grid frame.
pub fn fit_series(
    t1: &TimeSeries,
    t2: &TimeSeries,
    target: &TimeSeries,
    train_until: Option<f64>,
) -> Result<QuadraticModel> {
    let trained;
    let target = match train_until {
        Some(until) => {
            trained = target.restrict(target.span().0, until)?;
            &trained
        }
        None => target,
    };
    let frame = frame_on_target_grid(t1, t2, target)?;
    fit_quadratic(&frame, target.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::AlignedFrame;
    use approx::assert_relative_eq;

    fn synthetic_frame(beta: [f64; 6], n: usize) -> AlignedFrame {
        // Varied, well-conditioned temperature paths.
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 10.0).collect();
        let t1: Vec<f64> = (0..n)
            .map(|k| 13.2 + 0.1 * (k as f64 * 0.7).sin() + 0.002 * k as f64)
            .collect();
        let t2: Vec<f64> = (0..n)
            .map(|k| 17.9 + 2.0 * (k as f64 * 0.13).sin() + 0.01 * k as f64)
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                design_row(t1[i], t2[i])
                    .iter()
                    .zip(&beta)
                    .map(|(r, c)| r * c)
                    .sum()
            })
            .collect();
        AlignedFrame::from_columns(
            times,
            vec![("T1".into(), t1), ("T2".into(), t2), ("X".into(), y)],
        )
        .unwrap()
    }

    #[test]
    fn design_row_examples() {
        assert_eq!(design_row(0.0, 0.0), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(design_row(1.0, 1.0), [1.0; 6]);
        let row = design_row(13.2, 17.5);
        assert_relative_eq!(row[3], 174.24, max_relative = 1e-12);
        assert_relative_eq!(row[4], 231.0, max_relative = 1e-12);
        assert_relative_eq!(row[5], 306.25, max_relative = 1e-12);
    }

    #[test]
    fn predict_examples() {
        let base = QuadraticModel {
            target: "X".into(),
            coefficients: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            center: (0.0, 0.0),
            training_span: (0.0, 1.0),
            n_train: 6,
            rms_train: 0.0,
            rank_deficient: false,
        };
        assert_eq!(base.predict(99.0, -3.0), 1.0);
        let linear = QuadraticModel {
            coefficients: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            ..base.clone()
        };
        assert_eq!(linear.predict(5.0, 17.3), 17.3);
        let full = QuadraticModel {
            coefficients: [2.0, -1.0, 0.5, 0.0, 0.1, -0.02],
            ..base
        };
        assert_relative_eq!(full.predict(13.2, 17.5), 14.525, max_relative = 1e-12);
    }

    #[test]
    fn predict_is_exact_on_basis_vectors() {
        for j in 0..6 {
            let mut beta = [0.0; 6];
            beta[j] = 1.0;
            let m = QuadraticModel {
                target: "X".into(),
                coefficients: beta,
                center: (0.0, 0.0),
                training_span: (0.0, 1.0),
                n_train: 6,
                rms_train: 0.0,
                rank_deficient: false,
            };
            let (t1, t2) = (13.2, 17.5);
            assert_eq!(m.predict(t1, t2), design_row(t1, t2)[j]);
        }
    }

    #[test]
    fn fit_recovers_exact_coefficients() {
        let beta = [2.0, -1.0, 0.5, 0.0, 0.1, -0.02];
        let frame = synthetic_frame(beta, 200);
        let model = fit_quadratic(&frame, "X").unwrap();
        assert!(!model.rank_deficient);
        for (got, want) in model.coefficients.iter().zip(&beta) {
            let scale = want.abs().max(1e-3);
            assert!(
                (got - want).abs() / scale < 1e-9,
                "coefficient {got} vs {want}"
            );
        }
        assert!(model.rms_train < 1e-9);
        assert_eq!(model.n_train, 200);
    }

    #[test]
    fn constant_target_gives_pure_offset() {
        let mut frame = synthetic_frame([0.0; 6], 60);
        let times = frame.times().to_vec();
        let t1 = frame.column("T1").unwrap().to_vec();
        let t2 = frame.column("T2").unwrap().to_vec();
        frame = AlignedFrame::from_columns(
            times,
            vec![
                ("T1".into(), t1),
                ("T2".into(), t2),
                ("X".into(), vec![5.0; 60]),
            ],
        )
        .unwrap();
        let model = fit_quadratic(&frame, "X").unwrap();
        assert_relative_eq!(model.coefficients[0], 5.0, max_relative = 1e-9);
        for c in &model.coefficients[1..] {
            assert!(c.abs() < 1e-9, "expected zero coefficient, got {c}");
        }
    }

    #[test]
    fn constant_t1_sets_rank_flag_but_still_fits() {
        let n = 80;
        let times: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let t1 = vec![13.2; n];
        let t2: Vec<f64> = (0..n)
            .map(|k| 17.0 + 1.5 * (k as f64 * 0.21).sin() + 0.01 * k as f64)
            .collect();
        // Quadratic in T2 only.
        let y: Vec<f64> = t2.iter().map(|&v| 4.0 - 0.3 * v + 0.01 * v * v).collect();
        let frame = AlignedFrame::from_columns(
            times,
            vec![
                ("T1".into(), t1.clone()),
                ("T2".into(), t2.clone()),
                ("X".into(), y.clone()),
            ],
        )
        .unwrap();
        let model = fit_quadratic(&frame, "X").unwrap();
        assert!(model.rank_deficient);
        for i in 0..n {
            assert!(
                (model.predict(t1[i], t2[i]) - y[i]).abs() < 1e-9,
                "training row {i} not reproduced"
            );
        }
    }

    #[test]
    fn shifting_target_shifts_only_offset() {
        let beta = [1.0, 0.3, -0.2, 0.01, -0.004, 0.002];
        let frame = synthetic_frame(beta, 120);
        let model = fit_quadratic(&frame, "X").unwrap();
        let shifted_y: Vec<f64> = frame
            .column("X")
            .unwrap()
            .iter()
            .map(|v| v + 7.5)
            .collect();
        let shifted = AlignedFrame::from_columns(
            frame.times().to_vec(),
            vec![
                ("T1".into(), frame.column("T1").unwrap().to_vec()),
                ("T2".into(), frame.column("T2").unwrap().to_vec()),
                ("X".into(), shifted_y),
            ],
        )
        .unwrap();
        let model2 = fit_quadratic(&shifted, "X").unwrap();
        assert_relative_eq!(
            model2.coefficients[0] - model.coefficients[0],
            7.5,
            max_relative = 1e-8
        );
        for j in 1..6 {
            assert_relative_eq!(
                model2.coefficients[j],
                model.coefficients[j],
                epsilon = 1e-9,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn fit_is_row_permutation_invariant() {
        let beta = [2.0, -1.0, 0.5, 0.001, 0.1, -0.02];
        let frame = synthetic_frame(beta, 90);
        let model = fit_quadratic(&frame, "X").unwrap();
        // Reverse the rows (new strictly increasing grid, same data pairs).
        let n = frame.len();
        let times: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let rev = |name: &str| -> Vec<f64> {
            let mut c = frame.column(name).unwrap().to_vec();
            c.reverse();
            c
        };
        let reversed = AlignedFrame::from_columns(
            times,
            vec![
                ("T1".into(), rev("T1")),
                ("T2".into(), rev("T2")),
                ("X".into(), rev("X")),
            ],
        )
        .unwrap();
        let model2 = fit_quadratic(&reversed, "X").unwrap();
        for j in 0..6 {
            assert_relative_eq!(
                model.coefficients[j],
                model2.coefficients[j],
                epsilon = 1e-10,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn residuals_on_training_data_are_tiny_and_orthogonal() {
        let beta = [2.0, -1.0, 0.5, 0.0, 0.1, -0.02];
        let frame = synthetic_frame(beta, 150);
        let model = fit_quadratic(&frame, "X").unwrap();
        let res = residual_series(&model, &frame).unwrap();
        assert!(res.stats.max < 1e-9);
        assert_eq!(res.series.len(), 150);
        assert!(res.series.name().contains("X"));
    }

    #[test]
    fn signed_residuals_orthogonal_to_design_columns() {
        // Noisy target: orthogonality is the normal-equation identity and
        // holds regardless of fit quality.
        let n = 100;
        let times: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let t1: Vec<f64> = (0..n).map(|k| 13.0 + 0.2 * (k as f64 * 0.9).sin()).collect();
        let t2: Vec<f64> = (0..n)
            .map(|k| 18.0 + 1.0 * (k as f64 * 0.31).cos() + 0.005 * k as f64)
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|k| 1.0 + 0.5 * t2[k] + ((k * 2654435761) % 1000) as f64 / 1000.0)
            .collect();
        let frame = AlignedFrame::from_columns(
            times,
            vec![
                ("T1".into(), t1.clone()),
                ("T2".into(), t2.clone()),
                ("X".into(), y.clone()),
            ],
        )
        .unwrap();
        let model = fit_quadratic(&frame, "X").unwrap();
        let signed: Vec<f64> = (0..n)
            .map(|i| y[i] - model.predict(t1[i], t2[i]))
            .collect();
        let r_norm = signed.iter().map(|r| r * r).sum::<f64>().sqrt();
        let (m1, m2) = model.center;
        for j in 0..6 {
            let col: Vec<f64> = (0..n)
                .map(|i| design_row(t1[i] - m1, t2[i] - m2)[j])
                .collect();
            let c_norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            let dot: f64 = signed.iter().zip(&col).map(|(r, c)| r * c).sum();
            let denom = (r_norm * c_norm).max(1e-30);
            assert!(
                (dot / denom).abs() < 1e-8,
                "column {j} not orthogonal: {}",
                dot / denom
            );
        }
    }

    #[test]
    fn missing_columns_and_short_frames_error() {
        let frame = AlignedFrame::from_columns(
            vec![0.0, 1.0, 2.0],
            vec![
                ("T1".into(), vec![1.0, 2.0, 3.0]),
                ("T2".into(), vec![2.0, 3.0, 4.0]),
                ("X".into(), vec![0.0, 1.0, 2.0]),
            ],
        )
        .unwrap();
        assert!(matches!(
            fit_quadratic(&frame, "Y"),
            Err(Error::MissingColumn { .. })
        ));
        assert!(matches!(
            fit_quadratic(&frame, "X"),
            Err(Error::InsufficientRows { needed: 6, got: 3 })
        ));
    }

    #[test]
    fn fit_series_respects_training_boundary() {
        let t1 = TimeSeries::new(
            "T1",
            (0..100).map(|k| k as f64).collect(),
            (0..100).map(|k| 13.0 + 0.1 * (k as f64 * 0.3).sin()).collect(),
        )
        .unwrap();
        let t2 = TimeSeries::new(
            "T2",
            (0..100).map(|k| k as f64).collect(),
            (0..100)
                .map(|k| 18.0 + (k as f64 * 0.17).sin() + 0.01 * k as f64)
                .collect(),
        )
        .unwrap();
        let target = TimeSeries::new(
            "X",
            (0..50).map(|k| 2.0 * k as f64).collect(),
            (0..50)
                .map(|k| {
                    let t = 2.0 * k as f64;
                    let v1 = 13.0 + 0.1 * (t * 0.3).sin();
                    let v2 = 18.0 + (t * 0.17).sin() + 0.01 * t;
                    1.0 - 0.5 * v2 + 0.002 * v2 * v2 + 0.01 * v1
                })
                .collect(),
        )
        .unwrap();
        let model = fit_series(&t1, &t2, &target, Some(60.0)).unwrap();
        assert!(model.training_span.1 <= 60.0);
        assert!(model.n_train < 50);
        // Temperatures sampled on integer seconds, target on even seconds:
        // the target grid keeps target values exact, so the noiseless fit
        // reproduces the generating coefficients.
        assert_relative_eq!(model.coefficients[2], -0.5, max_relative = 1e-6);
    }
}
