//! The three-step detection protocol: quench a product state, measure
//! `M_x(T)`, and read the finite-size critical point off the steepest point
//! of the response curve.

use serde::{Deserialize, Serialize};

use crate::ed::{map_grid, DenseEvolver};
use crate::error::{ensure_finite, Error, Result};
use crate::io::fmt_num;
use crate::model::{Axis, InitialState, ModelParams};
use crate::numerics::{centered_difference, parabolic_peak, UniformGrid};
use crate::tmps::{self, MpsSettings};

/// Measurement time `T·J` used unless overridden.
pub const DEFAULT_T: f64 = 20.0;
/// Chains up to this size use exact propagation under [`BackendChoice::Auto`].
pub const AUTO_EXACT_MAX: usize = 10;
/// Curves whose range is below this carry no kink.
pub const FLAT_SPREAD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub backend: &'static str,
    pub params: ModelParams,
    pub initial_state: InitialState,
    #[serde(rename = "T")]
    pub t_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_max: Option<usize>,
}

impl Provenance {
    pub fn mps(params: &ModelParams, psi0: InitialState, t_total: f64, s: MpsSettings) -> Self {
        Self {
            backend: "mps",
            params: *params,
            initial_state: psi0,
            t_total,
            dt: Some(s.dt),
            cutoff: Some(s.cutoff),
            chi_max: Some(s.chi_max),
        }
    }

    pub fn exact(params: &ModelParams, psi0: InitialState, t_total: f64) -> Self {
        Self {
            backend: "ed",
            params: *params,
            initial_state: psi0,
            t_total,
            dt: None,
            cutoff: None,
            chi_max: None,
        }
    }
}

/// Sampled observables of one quench.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuenchSeries {
    pub times: Vec<f64>,
    pub mx: Vec<f64>,
    pub mz: Vec<f64>,
    pub log_norm: Vec<f64>,
    pub max_bond: Option<Vec<usize>>,
    pub truncation_weight: Option<f64>,
    pub provenance: Provenance,
}

impl QuenchSeries {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            times: Vec::new(),
            mx: Vec::new(),
            mz: Vec::new(),
            log_norm: Vec::new(),
            max_bond: None,
            truncation_weight: None,
            provenance,
        }
    }

    pub fn push(&mut self, t: f64, mx: f64, mz: f64, log_norm: f64, max_bond: Option<usize>) {
        self.times.push(t);
        self.mx.push(mx);
        self.mz.push(mz);
        self.log_norm.push(log_norm);
        if let Some(b) = max_bond {
            self.max_bond.get_or_insert_with(Vec::new).push(b);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_mx(&self) -> Option<f64> {
        self.mx.last().copied()
    }

    /// `t,mx,mz,log_norm,max_bond`; the last column is empty for exact runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mx,mz,log_norm,max_bond\n");
        for i in 0..self.len() {
            let bond = self
                .max_bond
                .as_ref()
                .map(|b| b[i].to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_num(self.times[i]),
                fmt_num(self.mx[i]),
                fmt_num(self.mz[i]),
                fmt_num(self.log_norm[i]),
                bond
            ));
        }
        out
    }
}

/// Exact normalized propagation sampled every `sample_interval`.
pub fn exact_quench(
    params: &ModelParams,
    psi0: InitialState,
    t_total: f64,
    sample_interval: f64,
) -> Result<QuenchSeries> {
    let samples = tmps::step_count(t_total, sample_interval)?;
    let mut ev = DenseEvolver::from_initial(params, psi0)?;
    let mut series = QuenchSeries::new(Provenance::exact(params, psi0, t_total));
    series.push(0.0, ev.magnetization(Axis::X), ev.magnetization(Axis::Z), 0.0, None);
    for k in 1..=samples {
        let t = k as f64 * sample_interval;
        ev.advance(t - ev.time())?;
        series.push(t, ev.magnetization(Axis::X), ev.magnetization(Axis::Z), ev.log_norm(), None);
    }
    Ok(series)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Auto,
    Ed,
    Mps,
}

impl std::str::FromStr for BackendChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "ed" => Ok(Self::Ed),
            "mps" => Ok(Self::Mps),
            other => Err(Error::Validation(format!(
                "unknown backend '{other}' (expected auto, ed or mps)"
            ))),
        }
    }
}

/// Propagation engine for `M_x(T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    Exact,
    Mps(MpsSettings),
}

impl Backend {
    pub fn resolve(choice: BackendChoice, l: usize, settings: MpsSettings) -> Self {
        match choice {
            BackendChoice::Ed => Backend::Exact,
            BackendChoice::Mps => Backend::Mps(settings),
            BackendChoice::Auto if l <= AUTO_EXACT_MAX => Backend::Exact,
            BackendChoice::Auto => Backend::Mps(settings),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Backend::Exact => "ed",
            Backend::Mps(_) => "mps",
        }
    }
}

/// `M_x(T)` of the normalized evolved state.
pub fn dynamical_order_parameter(
    backend: Backend,
    params: &ModelParams,
    psi0: InitialState,
    t_total: f64,
) -> Result<f64> {
    ensure_finite("T", t_total)?;
    if t_total < 0.0 {
        return Err(Error::Validation(format!("T must be non-negative, got {t_total}")));
    }
    match backend {
        Backend::Exact => {
            let mut ev = DenseEvolver::from_initial(params, psi0)?;
            ev.advance(t_total)?;
            Ok(ev.magnetization(Axis::X))
        }
        Backend::Mps(settings) => {
            let steps = tmps::step_count(t_total, settings.dt)?;
            let settings = MpsSettings {
                sample_stride: steps.max(1),
                ..settings
            };
            let series = tmps::run_quench(params, psi0, t_total, settings)?;
            series.final_mx().ok_or(Error::EmptySeries)
        }
    }
}

/// `M_x(T)` over a γ grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseCurve {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t_total: f64,
    pub backend: &'static str,
    pub gamma: Vec<f64>,
    pub mx: Vec<f64>,
}

impl ResponseCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,mx_T\n");
        for (g, m) in self.gamma.iter().zip(&self.mx) {
            out.push_str(&format!("{},{}\n", fmt_num(*g), fmt_num(*m)));
        }
        out
    }

    pub fn detect_kink(&self) -> Result<KinkResult> {
        detect_kink(&self.gamma, &self.mx, self.l)
    }
}

pub fn response_curve(
    backend: Backend,
    params: &ModelParams,
    psi0: InitialState,
    t_total: f64,
    grid: &UniformGrid,
) -> Result<ResponseCurve> {
    if grid.len() < 7 {
        return Err(Error::Validation(format!(
            "response curve needs at least 7 grid points, got {}",
            grid.len()
        )));
    }
    let mx = map_grid(grid.values(), |g| {
        dynamical_order_parameter(backend, &params.with_gamma(g), psi0, t_total)
    })?;
    Ok(ResponseCurve {
        l: params.l,
        t_total,
        backend: backend.label(),
        gamma: grid.values().to_vec(),
        mx,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinkResult {
    #[serde(rename = "L")]
    pub l: usize,
    pub gamma_yl: f64,
    pub peak_height: f64,
    pub grid_step: f64,
    pub refined: bool,
}

/// Steepest interior point of `M_x(γ)`, refined by a parabola through the peak and its neighbours.
pub fn detect_kink(grid: &[f64], mx: &[f64], l: usize) -> Result<KinkResult> {
    if grid.len() != mx.len() {
        return Err(Error::Validation(format!(
            "grid has {} points but {} values",
            grid.len(),
            mx.len()
        )));
    }
    let grid = UniformGrid::from_values(grid.to_vec())?;
    if grid.len() < 3 {
        return Err(Error::Validation("kink detection needs at least 3 points".into()));
    }
    for &m in mx {
        ensure_finite("M_x", m)?;
    }
    let lo = mx.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < FLAT_SPREAD {
        return Err(Error::NoKink { spread: hi - lo });
    }
    let d: Vec<f64> = centered_difference(grid.values(), mx)
        .into_iter()
        .map(f64::abs)
        .collect();
    let peak = parabolic_peak(grid.values(), &d);
    if peak.at_endpoint(grid.len()) {
        return Err(Error::KinkNotBracketed {
            gamma: peak.position,
        });
    }
    Ok(KinkResult {
        l,
        gamma_yl: peak.position,
        peak_height: peak.height,
        grid_step: grid.step(),
        refined: peak.refined,
    })
}
