//! Nonlinear least-squares fits for the two spectroscopy curve shapes:
//! a sine for driven Rabi oscillations and a Lorentzian for the
//! contrast-versus-frequency resonance profile.
//!
//! Both fits share one damped Gauss-Newton loop over four parameters. The
//! model value and its analytic partial derivatives are public so callers
//! can audit the Jacobian against finite differences.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

/// Iteration cap shared by both fits; each linear-solve attempt (accepted or
/// rejected) counts as one iteration.
const MAX_ITERATIONS: usize = 200;
/// Relative cost decrease below which an accepted step ends the fit.
const COST_TOLERANCE: f64 = 1e-10;

/// Fitted sine `offset + amplitude * sin(2*pi*frequency*t + phase)`.
///
/// Canonical form: amplitude >= 0 (sign folded into phase), frequency > 0,
/// phase in [0, 2*pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFit {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

impl SineFit {
    pub fn params(&self) -> [f64; 4] {
        [self.amplitude, self.frequency, self.phase, self.offset]
    }

    pub fn value_at(&self, t: f64) -> f64 {
        sine_eval(&self.params(), t)
    }
}

/// Fitted Lorentzian `baseline + height * (G/2)^2 / ((f-center)^2 + (G/2)^2)`
/// with `G` the full width at half maximum.
///
/// `center` is in GHz like the scan axis; `fwhm_mhz` converts the fitted
/// width parameter to MHz for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center_ghz: f64,
    pub fwhm_mhz: f64,
    pub peak_height: f64,
    pub baseline: f64,
    pub rms_residual: f64,
}

impl LorentzianFit {
    /// Parameters in scan units: `[center, fwhm, height, baseline]`, GHz.
    pub fn params(&self) -> [f64; 4] {
        [self.center_ghz, self.fwhm_mhz * 1e-3, self.peak_height, self.baseline]
    }

    pub fn value_at(&self, f_ghz: f64) -> f64 {
        lorentzian_eval(&self.params(), f_ghz)
    }
}

/// Sine model value for parameters `[amplitude, frequency, phase, offset]`.
pub fn sine_eval(p: &[f64; 4], t: f64) -> f64 {
    p[3] + p[0] * (2.0 * std::f64::consts::PI * p[1] * t + p[2]).sin()
}

/// Partial derivatives of [`sine_eval`] with respect to each parameter.
pub fn sine_partials(p: &[f64; 4], t: f64) -> [f64; 4] {
    let theta = 2.0 * std::f64::consts::PI * p[1] * t + p[2];
    let (sin, cos) = theta.sin_cos();
    [
        sin,
        p[0] * cos * 2.0 * std::f64::consts::PI * t,
        p[0] * cos,
        1.0,
    ]
}

/// Lorentzian model value for parameters `[center, fwhm, height, baseline]`
/// (same frequency unit for center/fwhm as the abscissa).
pub fn lorentzian_eval(p: &[f64; 4], f: f64) -> f64 {
    let d = f - p[0];
    let q = (p[1] / 2.0) * (p[1] / 2.0);
    p[3] + p[2] * q / (d * d + q)
}

/// Partial derivatives of [`lorentzian_eval`] with respect to each parameter.
pub fn lorentzian_partials(p: &[f64; 4], f: f64) -> [f64; 4] {
    let d = f - p[0];
    let half = p[1] / 2.0;
    let q = half * half;
    let den = d * d + q;
    let den2 = den * den;
    [
        p[2] * q * 2.0 * d / den2,
        p[2] * half * d * d / den2,
        q / den,
        1.0,
    ]
}

/// One damped Gauss-Newton run: multiplicative damping on the normal-
/// equation diagonal, x10 after a rejected step, /10 after an accepted one.
/// Returns the refined parameters and the final cost.
fn refine<M, J>(
    mut p: [f64; 4],
    x: &[f64],
    y: &[f64],
    model: M,
    partials: J,
) -> Result<([f64; 4], f64)>
where
    M: Fn(&[f64; 4], f64) -> f64,
    J: Fn(&[f64; 4], f64) -> [f64; 4],
{
    let cost_of = |p: &[f64; 4]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - model(p, xi);
                r * r
            })
            .sum()
    };

    let mut cost = cost_of(&p);
    let mut lambda: f64 = 1e-3;
    for _iteration in 0..MAX_ITERATIONS {
        if cost == 0.0 {
            return Ok((p, cost));
        }
        let mut jtj: Matrix4<f64> = Matrix4::zeros();
        let mut jtr: Vector4<f64> = Vector4::zeros();
        for (&xi, &yi) in x.iter().zip(y) {
            let g = partials(&p, xi);
            let r = yi - model(&p, xi);
            for a in 0..4 {
                jtr[a] += g[a] * r;
                for b in 0..4 {
                    jtj[(a, b)] += g[a] * g[b];
                }
            }
        }
        let mut damped = jtj;
        for a in 0..4 {
            // Damping proportional to the diagonal keeps the step sensible
            // when parameters live on very different scales.
            let d = jtj[(a, a)].max(1e-30);
            damped[(a, a)] = d * (1.0 + lambda);
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&jtr),
            None => {
                lambda = (lambda * 10.0).min(1e12);
                continue;
            }
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
        let trial_cost = cost_of(&trial);
        if trial_cost.is_finite() && trial_cost < cost {
            let decrease = (cost - trial_cost) / cost;
            p = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if decrease < COST_TOLERANCE {
                return Ok((p, cost));
            }
        } else {
            if lambda >= 1e12 {
                // The damped step is numerically zero and nothing improves:
                // the optimum is resolved to machine precision.
                return Ok((p, cost));
            }
            lambda *= 10.0;
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS })
}

/// Fits `offset + amplitude * sin(2*pi*frequency*t + phase)`.
///
/// Needs at least 8 samples covering roughly a period or more. The starting
/// frequency comes from the strongest peak of a coarse spectral scan of the
/// mean-removed signal; data whose spectrum is indistinguishable from DC is
/// rejected as `NoOscillation`.
pub fn fit_sine(t: &[f64], y: &[f64]) -> Result<SineFit> {
    if t.len() != y.len() {
        return Err(Error::LengthMismatch { left: t.len(), right: y.len() });
    }
    if t.len() < 8 {
        return Err(Error::TooFewSamples { needed: 8, got: t.len() });
    }
    let t_min = t.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    if !(span > 0.0) {
        return Err(Error::DegenerateX);
    }
    let n = t.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let energy: f64 = centered.iter().map(|v| v * v).sum();
    // Signals whose variation is at rounding level of the offset are flat;
    // without this floor the mean-subtraction residue masquerades as DC.
    let scale = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if energy == 0.0 || (energy / n as f64).sqrt() <= 1e-12 * scale {
        return Err(Error::NoOscillation);
    }

    // Coarse periodogram on a quarter-wave frequency grid. The peak power of
    // a genuine oscillation approaches energy*n/2; a DC-like signal stays
    // far below that.
    let k_max = (2 * n).min(8192);
    let mut best_f = 0.0;
    let mut best_power = -1.0;
    for k in 2..=k_max {
        let f = k as f64 / (4.0 * span);
        let omega = 2.0 * std::f64::consts::PI * f;
        let mut c = 0.0;
        let mut s = 0.0;
        for (&ti, &yi) in t.iter().zip(&centered) {
            let (sin, cos) = (omega * (ti - t_min)).sin_cos();
            c += yi * cos;
            s += yi * sin;
        }
        let power = c * c + s * s;
        if power > best_power {
            best_power = power;
            best_f = f;
        }
    }
    let score = best_power / (energy * n as f64 / 2.0);
    if score < 0.01 {
        return Err(Error::NoOscillation);
    }

    // Phase from a linear fit of sin/cos components at the fixed frequency.
    let omega = 2.0 * std::f64::consts::PI * best_f;
    let (mut cc, mut cs, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(&centered) {
        let (sin, cos) = (omega * ti).sin_cos();
        cc += cos * cos;
        cs += cos * sin;
        ss += sin * sin;
        yc += yi * cos;
        ys += yi * sin;
    }
    let det = cc * ss - cs * cs;
    let phase0 = if det.abs() > 1e-30 {
        // y ~ c*cos(wt) + s*sin(wt) = A*sin(wt + phi) with phi = atan2(c, s).
        let c = (ss * yc - cs * ys) / det;
        let s = (cc * ys - cs * yc) / det;
        c.atan2(s)
    } else {
        0.0
    };

    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p0 = [(y_max - y_min) / 2.0, best_f, phase0, mean];
    let (p, cost) = refine(p0, t, y, sine_eval, sine_partials)?;

    // Canonical form: positive amplitude and frequency, phase in [0, 2*pi).
    let (mut amplitude, mut frequency, mut phase, offset) = (p[0], p[1], p[2], p[3]);
    if frequency < 0.0 {
        frequency = -frequency;
        amplitude = -amplitude;
        phase = -phase;
    }
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += std::f64::consts::PI;
    }
    phase = phase.rem_euclid(2.0 * std::f64::consts::PI);
    if !(frequency > 0.0) {
        return Err(Error::NoOscillation);
    }
    Ok(SineFit {
        amplitude,
        frequency,
        phase,
        offset,
        rms_residual: (cost / n as f64).sqrt(),
    })
}

/// Rabi contrast in percent: twice the sine amplitude over its offset.
pub fn rabi_contrast(fit: &SineFit) -> Result<f64> {
    if !(fit.offset > 0.0) {
        return Err(Error::NonPositiveOffset);
    }
    Ok(100.0 * 2.0 * fit.amplitude / fit.offset)
}

/// Fits a Lorentzian peak to a contrast-versus-frequency scan (GHz axis).
///
/// The scan must bracket the maximum: a highest point on either edge is
/// rejected. Width is parameterized directly as the full width at half
/// maximum, so the reported `fwhm_mhz` is the fitted parameter itself.
pub fn fit_lorentzian(freq_ghz: &[f64], contrast: &[f64]) -> Result<LorentzianFit> {
    if freq_ghz.len() != contrast.len() {
        return Err(Error::LengthMismatch { left: freq_ghz.len(), right: contrast.len() });
    }
    let n = freq_ghz.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    let mut imax = 0;
    for i in 1..n {
        if contrast[i] > contrast[imax] {
            imax = i;
        }
    }
    if imax == 0 || imax == n - 1 {
        return Err(Error::PeakAtEdge);
    }
    let y_min = contrast.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = contrast[imax];
    if !(y_max > y_min) {
        return Err(Error::DegenerateRange { name: "contrast".into() });
    }
    let half_level = y_min + (y_max - y_min) / 2.0;
    // Half-height crossing span around the peak; fall back to half the scan
    // width when a side never drops below the half level.
    let mut f_left = freq_ghz[0];
    for i in (0..imax).rev() {
        if contrast[i] <= half_level {
            f_left = freq_ghz[i];
            break;
        }
    }
    let mut f_right = freq_ghz[n - 1];
    for i in (imax + 1)..n {
        if contrast[i] <= half_level {
            f_right = freq_ghz[i];
            break;
        }
    }
    let mut gamma0 = f_right - f_left;
    if !(gamma0 > 0.0) {
        gamma0 = (freq_ghz[n - 1] - freq_ghz[0]) / 2.0;
    }

    let p0 = [freq_ghz[imax], gamma0, y_max - y_min, y_min];
    let (p, cost) = refine(p0, freq_ghz, contrast, lorentzian_eval, lorentzian_partials)?;

    // The model depends on fwhm only through its square; report positive.
    Ok(LorentzianFit {
        center_ghz: p[0],
        fwhm_mhz: p[1].abs() * 1e3,
        peak_height: p[2],
        baseline: p[3],
        rms_residual: (cost / n as f64).sqrt(),
    })
}
