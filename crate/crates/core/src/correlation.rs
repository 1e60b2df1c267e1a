//! Slope-based correlation between drift channels and temperature.
//!
//! Classic product-moment correlation is dominated by the large-scale shape
//! of a trace. The measure here instead asks: if both sequences are rescaled
//! to [0, 1] and the rows are ordered so the reference column descends, how
//! similar are the straight-line slopes of the two reordered columns against
//! rank? Two channels that rise and fall together in any monotone fashion
//! score near +1, mirrored channels near -1.

use crate::error::{Error, Result};
use crate::timeseries::{normalize_named, AlignedFrame};

/// Ordinary least-squares straight line `y = slope * x + intercept`.
///
/// Inputs must be equal-length with at least two samples and a non-constant
/// abscissa. Returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateX);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// The two rank-slope coefficients behind one correlation entry: `a` from
/// the descending-sorted reference column, `b` from the co-reordered column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePair {
    pub a: f64,
    pub b: f64,
}

impl SlopePair {
    /// Combines the two slopes into a correlation value in [-1, 1].
    ///
    /// Equal-sign slopes compare magnitudes as `1 - 2 * ||a|-|b|| / (|a|+|b|)`,
    /// opposite signs as `2 * ||a|-|b|| / (|a|+|b|) - 1`. Two flat columns
    /// are identical (+1); one flat column is maximally unlike a sloped one
    /// (-1).
    pub fn correlation(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if a == 0.0 && b == 0.0 {
            return 1.0;
        }
        let gap = 2.0 * (a.abs() - b.abs()).abs() / (a.abs() + b.abs());
        let r = if a * b >= 0.0 { 1.0 - gap } else { gap - 1.0 };
        r.clamp(-1.0, 1.0)
    }
}

/// Correlation of `v` against reference `u` (order matters).
///
/// Both columns are min-max scaled, rows are sorted so the scaled `u`
/// descends (ties keep input order), and each reordered column is fitted
/// against its rank index. The two slopes combine via
/// [`SlopePair::correlation`].
pub fn slope_correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    let pair = slope_pair(u, v, "u", "v")?;
    Ok(pair.correlation())
}

fn slope_pair(u: &[f64], v: &[f64], u_name: &str, v_name: &str) -> Result<SlopePair> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    if u.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: u.len() });
    }
    let nu = normalize_named(u, u_name)?;
    let nv = normalize_named(v, v_name)?;
    let mut order: Vec<usize> = (0..nu.len()).collect();
    // Stable sort: rows with equal reference values keep their time order.
    order.sort_by(|&i, &j| nu[j].total_cmp(&nu[i]));
    let ranks: Vec<f64> = (0..nu.len()).map(|k| k as f64).collect();
    let su: Vec<f64> = order.iter().map(|&i| nu[i]).collect();
    let sv: Vec<f64> = order.iter().map(|&i| nv[i]).collect();
    let (a, _) = linear_fit(&ranks, &su)?;
    let (b, _) = linear_fit(&ranks, &sv)?;
    Ok(SlopePair { a, b })
}

/// Pairwise correlation of every frame column against every other.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    variables: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// Entry with row variable `i` as reference and column variable `j`
    /// reordered against it.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn get_by_name(&self, reference: &str, other: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == reference)?;
        let j = self.variables.iter().position(|v| v == other)?;
        Some(self.entries[i][j])
    }

    /// Largest `|r(i,j) - r(j,i)|` over all pairs. The measure is not
    /// symmetric (the reference column dictates the row order), so this
    /// quantifies how much the two directions disagree.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.variables.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }
}

/// Builds the full correlation matrix of an aligned frame. Row `i` uses
/// variable `i` as the sort reference. Diagonal entries are exactly 1.
/// Any constant column is rejected, naming the offending variable.
pub fn correlation_matrix(frame: &AlignedFrame) -> Result<CorrelationMatrix> {
    let names = frame.variable_names();
    if names.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut entries = vec![vec![0.0; names.len()]; names.len()];
    for (i, &ni) in names.iter().enumerate() {
        for (j, &nj) in names.iter().enumerate() {
            entries[i][j] = if i == j {
                1.0
            } else {
                let u = frame.column(ni).unwrap();
                let v = frame.column(nj).unwrap();
                slope_pair(u, v, ni, nj)?.correlation()
            };
        }
    }
    Ok(CorrelationMatrix {
        variables: names.into_iter().map(String::from).collect(),
        entries,
    })
}
