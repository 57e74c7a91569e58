//! Grids, finite differences and small dense least squares.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Ascending, uniformly spaced parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    values: Vec<f64>,
    step: f64,
}

impl UniformGrid {
    /// Points `min, min + step, …` up to `max` (inclusive when it lands on the grid).
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        ensure_finite("grid min", min)?;
        ensure_finite("grid max", max)?;
        ensure_finite("grid step", step)?;
        if step <= 0.0 {
            return Err(Error::Validation(format!("grid step must be positive, got {step}")));
        }
        if max < min {
            return Err(Error::Validation(format!("grid max {max} below min {min}")));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize + 1;
        let values = (0..n).map(|i| min + i as f64 * step).collect();
        Ok(Self { values, step })
    }

    /// Accept externally supplied points if they are strictly ascending and
    /// uniform to `1e-6` of the spacing.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation("grid needs at least two points".into()));
        }
        for v in &values {
            ensure_finite("grid point", *v)?;
        }
        let step = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
        if step <= 0.0 {
            return Err(Error::Validation("grid must be strictly ascending".into()));
        }
        for (i, w) in values.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d <= 0.0 || (d - step).abs() > 1e-6 * step {
                return Err(Error::Validation(format!(
                    "grid is not uniform at index {i}: spacing {d} vs {step}"
                )));
            }
        }
        Ok(Self { values, step })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Centered differences in the interior, one-sided at the two ends.
pub fn centered_difference(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

/// Location of the largest entry of `f` on grid `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub position: f64,
    pub refined: bool,
}

impl Peak {
    pub fn at_endpoint(&self, len: usize) -> bool {
        self.index == 0 || self.index + 1 == len
    }
}

/// Relative width inside which two samples of `f` count as one plateau.
const PLATEAU: f64 = 1e-9;

/// First argmax of `f` (near-ties resolve to the lower index), refined by the
/// vertex of the parabola through the maximum and its two neighbours when it
/// is interior, strictly concave and not on a plateau.
pub fn parabolic_peak(x: &[f64], f: &[f64]) -> Peak {
    assert_eq!(x.len(), f.len());
    assert!(!f.is_empty());
    let mut index = 0;
    for (i, v) in f.iter().enumerate() {
        if *v > f[index] + PLATEAU * f[index].abs() {
            index = i;
        }
    }
    let height = f[index];
    let mut peak = Peak {
        index,
        height,
        position: x[index],
        refined: false,
    };
    if index > 0 && index + 1 < f.len() {
        let (a, b, c) = (f[index - 1], f[index], f[index + 1]);
        let flat = PLATEAU * b.abs();
        let curvature = a - 2.0 * b + c;
        if curvature < 0.0 && b - a > flat && b - c > flat {
            let offset = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
            let h = 0.5 * (x[index + 1] - x[index - 1]);
            peak.position = x[index] + offset * h;
            peak.refined = true;
        }
    }
    peak
}

/// Householder least squares `min ‖A c − y‖₂` for a small dense row-major `A`.
///
/// Returns the coefficients; fails on rank deficiency.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::Validation("least squares with no rows".into()));
    }
    let n = rows[0].len();
    if m < n {
        return Err(Error::Validation(format!(
            "underdetermined system: {m} equations for {n} unknowns"
        )));
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b = y.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "rank-deficient design matrix (column {k})"
            )));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
                let f = 2.0 * dot / vnorm_sq;
                for i in k..m {
                    a[i][j] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for i in k..m {
                b[i] -= f * v[i - k];
            }
        }
    }
    let mut c = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * c[j]).sum();
        c[k] = (b[k] - s) / a[k][k];
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_count() {
        let g = UniformGrid::new(0.0, 0.35, 0.0025).unwrap();
        assert_eq!(g.len(), 141);
        assert!((g.values()[140] - 0.35).abs() < 1e-12);
        let g = UniformGrid::new(0.0, 0.35, 0.005).unwrap();
        assert_eq!(g.len(), 71);
        assert!(UniformGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(UniformGrid::from_values(vec![0.0, 0.1, 0.3]).is_err());
        assert!(UniformGrid::from_values(vec![0.0, 0.1, 0.2]).is_ok());
    }

    #[test]
    fn derivative_of_quadratic_is_exact_in_interior() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v - v).collect();
        let d = centered_difference(&x, &y);
        for i in 1..10 {
            assert!((d[i] - (6.0 * x[i] - 1.0)).abs() < 1e-12);
        }
        assert!((d[0] - (y[1] - y[0]) / 0.1).abs() < 1e-12);
    }

    #[test]
    fn parabola_vertex_recovered() {
        let x: Vec<f64> = (0..21).map(|i| i as f64 * 0.05).collect();
        let f: Vec<f64> = x.iter().map(|v| 1.0 - (v - 0.537).powi(2)).collect();
        let p = parabolic_peak(&x, &f);
        assert!(p.refined);
        assert!((p.position - 0.537).abs() < 1e-12);
    }

    #[test]
    fn endpoint_peak_is_not_refined() {
        let x = [0.0, 1.0, 2.0];
        let p = parabolic_peak(&x, &[3.0, 2.0, 1.0]);
        assert_eq!(p.index, 0);
        assert!(!p.refined);
        assert!(p.at_endpoint(3));
    }

    #[test]
    fn plateau_keeps_its_first_point() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let p = parabolic_peak(&x, &[0.0, 1.0, 2.0, 2.0 + 1e-13, 2.0]);
        assert_eq!(p.index, 2);
        assert!(!p.refined);
    }

    #[test]
    fn least_squares_exact_fit_and_rank_check() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 - 0.5 * i as f64 + 0.25 * (i * i) as f64).collect();
        let c = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12 && (c[2] - 0.25).abs() < 1e-12);
        let dup: Vec<Vec<f64>> = (0..4).map(|_| vec![1.0, 2.0]).collect();
        assert!(least_squares(&dup, &[1.0; 4]).is_err());
        assert!(least_squares(&rows[..2], &y[..2]).is_err());
    }
}
