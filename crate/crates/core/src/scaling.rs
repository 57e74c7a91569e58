//! Finite-size scaling of the critical points: a polynomial extrapolation in
//! `1/L` followed by a log-log fit of the approach to the limit.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::io::{fmt_num, round_sig};
use crate::numerics::least_squares;

pub const DEFAULT_POLY_DEGREE: usize = 2;

/// Yang–Lee exponents `(β₁, δ₁, ν₁)` and `α = β₁δ₁/ν₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CftReference {
    pub beta1: f64,
    pub delta1: f64,
    pub nu1: f64,
    /// `(numerator, denominator)` of `α` in lowest terms.
    pub alpha_fraction: (i64, i64),
}

impl CftReference {
    pub fn alpha(&self) -> f64 {
        self.beta1 * self.delta1 / self.nu1
    }

    pub fn rendered(&self) -> String {
        format!("{:.3}", self.alpha())
    }
}

pub fn cft_reference() -> CftReference {
    CftReference {
        beta1: 1.0,
        delta1: -6.0,
        nu1: -2.5,
        alpha_fraction: (12, 5),
    }
}

/// One finite-size critical point `(L, γ_YL^L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    #[serde(rename = "L")]
    pub l: usize,
    pub gamma_yl: f64,
}

fn check_points(points: &[SizePoint]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        ensure_finite("gamma_yl", p.gamma_yl)?;
        if p.l == 0 {
            return Err(Error::Validation("L must be positive".into()));
        }
        if points[..i].iter().any(|q| q.l == p.l) {
            return Err(Error::Validation(format!("duplicate L = {}", p.l)));
        }
    }
    Ok(())
}

/// Least-squares polynomial of `degree` in `1/L`, coefficients from the constant term up.
pub fn fit_inverse_size(points: &[SizePoint], degree: usize) -> Result<Vec<f64>> {
    check_points(points)?;
    if points.len() < degree + 2 {
        return Err(Error::Validation(format!(
            "degree-{degree} extrapolation needs at least {} points, got {}",
            degree + 2,
            points.len()
        )));
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let x = 1.0 / p.l as f64;
            (0..=degree).map(|k| x.powi(k as i32)).collect()
        })
        .collect();
    let y: Vec<f64> = points.iter().map(|p| p.gamma_yl).collect();
    least_squares(&rows, &y)
}

/// `γ_YL^∞`: the `1/L → 0` value of the fitted polynomial.
pub fn extrapolate_inf(points: &[SizePoint], degree: usize) -> Result<f64> {
    Ok(fit_inverse_size(points, degree)?[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub alpha: f64,
    /// Absent for two points, where the line is exact.
    pub alpha_stderr: Option<f64>,
    pub r_squared: f64,
    /// `ln` of the amplitude in `γ_YL^L − γ_YL^∞ = A·L^{−α}`.
    pub intercept: f64,
}

/// Ordinary least squares of `ln(γ_YL^L − γ_∞)` on `ln L`; `α` is minus the slope.
pub fn fit_exponent(points: &[SizePoint], gamma_inf: f64) -> Result<ExponentFit> {
    check_points(points)?;
    ensure_finite("gamma_inf", gamma_inf)?;
    if points.len() < 2 {
        return Err(Error::Validation("exponent fit needs at least two sizes".into()));
    }
    let offending: Vec<usize> = points
        .iter()
        .filter(|p| p.gamma_yl - gamma_inf <= 0.0)
        .map(|p| p.l)
        .collect();
    if !offending.is_empty() {
        return Err(Error::ExtrapolationExceedsData { offending });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.l as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| (p.gamma_yl - gamma_inf).ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Numerical("all sizes coincide in log L".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let alpha_stderr = if points.len() > 2 {
        Some((sse / (n - 2.0) / sxx).sqrt())
    } else {
        None
    };
    Ok(ExponentFit {
        alpha: -slope,
        alpha_stderr,
        r_squared: if points.len() == 2 { 1.0 } else { r_squared },
        intercept,
    })
}

/// Both fits of one data set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub points: Vec<SizePoint>,
    pub gamma_inf: f64,
    pub poly_degree: usize,
    /// Polynomial coefficients in `1/L`, constant term first.
    pub poly_coefficients: Vec<f64>,
    pub alpha: f64,
    pub alpha_stderr: Option<f64>,
    pub r_squared: f64,
    pub intercept: f64,
    pub cft_alpha: f64,
    /// False when some `γ_YL^L` is not above `γ_∞`.
    pub approaches_from_above: bool,
}

impl ScalingFit {
    /// `{gamma_inf, poly_degree, alpha, alpha_stderr, r_squared, cft_alpha}`.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::json!({
            "gamma_inf": round_sig(self.gamma_inf),
            "poly_degree": self.poly_degree,
            "alpha": round_sig(self.alpha),
            "alpha_stderr": self.alpha_stderr.map(round_sig),
            "r_squared": round_sig(self.r_squared),
            "cft_alpha": round_sig(self.cft_alpha),
        });
        crate::io::to_json(&value)
    }
}

/// Extrapolate, then fit the exponent.
pub fn fit_scaling(points: &[SizePoint], degree: usize) -> Result<ScalingFit> {
    if points.iter().any(|p| p.l < 4) {
        return Err(Error::Validation("scaling points need L >= 4".into()));
    }
    let coeffs = fit_inverse_size(points, degree)?;
    let gamma_inf = coeffs[0];
    let approaches_from_above = points.iter().all(|p| p.gamma_yl > gamma_inf);
    let exp = fit_exponent(points, gamma_inf)?;
    Ok(ScalingFit {
        points: points.to_vec(),
        gamma_inf,
        poly_degree: degree,
        poly_coefficients: coeffs,
        alpha: exp.alpha,
        alpha_stderr: exp.alpha_stderr,
        r_squared: exp.r_squared,
        intercept: exp.intercept,
        cft_alpha: cft_reference().alpha(),
        approaches_from_above,
    })
}

pub fn points_to_csv(points: &[SizePoint]) -> String {
    let mut out = String::from("L,gamma_yl\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.l, fmt_num(p.gamma_yl)));
    }
    out
}

/// Parse `L,gamma_yl` rows; the header is required.
pub fn points_from_csv(text: &str) -> Result<Vec<SizePoint>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("L,gamma_yl") => {}
        other => {
            return Err(Error::Validation(format!(
                "expected header 'L,gamma_yl', found {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut cols = line.split(',').map(str::trim);
            let (Some(l), Some(g), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Validation(format!("row {} must have two columns", i + 2)));
            };
            let l = l
                .parse()
                .map_err(|_| Error::Validation(format!("row {}: bad L '{l}'", i + 2)))?;
            let gamma_yl = g
                .parse()
                .map_err(|_| Error::Validation(format!("row {}: bad gamma_yl '{g}'", i + 2)))?;
            Ok(SizePoint { l, gamma_yl })
        })
        .collect()
}
