//! Command orchestration and artifact bookkeeping.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use yles::ed::{flow_to_csv, scan_gamma, spectral_flow, DenseEvolver, GammaScan};
use yles::floquet::{
    derive_couplings, feasibility_report, laboratory_schedule, make_schedule, run_floquet, units,
    RydbergParams, ScheduleRequest,
};
use yles::io::{round_json, round_sig, to_json};
use yles::numerics::UniformGrid;
use yles::quench::{exact_quench, response_curve, Backend, BackendChoice, KinkResult, ResponseCurve};
use yles::scaling::{fit_scaling, points_from_csv, points_to_csv, ScalingFit, SizePoint};
use yles::tmps::{run_quench, MpsSettings};
use yles::{Axis, InitialState, ModelParams};

use crate::config::{Command, ConfigError, RunConfig};
use crate::plot::{render_svg, render_three_panel, PlotError, PlotKind, ScalingAnnotation, Series};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] yles::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl RunError {
    /// 0 success, 2 validation, 3 numerical failure, 4 kink not bracketed.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Help(_)) => 0,
            RunError::Config(_) => 2,
            RunError::Core(e) => e.exit_code(),
            RunError::Plot(_) => 3,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Core(e.into())
    }
}

/// Files written by one run, removed again if the run fails.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
    created_dir: bool,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            created_dir: false,
        }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        if !self.dir.exists() {
            fs::create_dir_all(&self.dir)?;
            self.created_dir = true;
        }
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        if !self.written.contains(&path) {
            self.written.push(path);
        }
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: Value) -> Result<(), RunError> {
        self.write(name, &to_json(&round_json(value))?)
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Outcome of a successful run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    /// One-line human-readable result.
    pub message: String,
}

/// Execute `config`, then write `manifest.json`; every artifact is removed on failure.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let mut out = Artifacts::new(&config.output_dir);
    match dispatch(config, &mut out).and_then(|message| {
        let mut names = out.names();
        names.push("manifest.json".into());
        out.json("manifest.json", config.manifest(&names))?;
        Ok(message)
    }) {
        Ok(message) => Ok(RunSummary {
            outputs: out.written.clone(),
            message,
        }),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn dispatch(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    match cfg.command {
        Command::EdScan => ed_scan(cfg, out, "scan.svg"),
        Command::SpectralFlow => flow(cfg, out),
        Command::Quench => quench(cfg, out),
        Command::Response => response(cfg, out),
        Command::Scaling => scaling(cfg, out),
        Command::Floquet => floquet(cfg, out),
        Command::Feasibility => feasibility(cfg, out),
        Command::ReproduceFig1 => fig1(cfg, out),
        Command::ReproduceFig3 => fig3(cfg, out),
    }
}

fn model(cfg: &RunConfig, gamma: f64) -> Result<ModelParams, RunError> {
    Ok(ModelParams::new(cfg.int("L")?, cfg.float("J")?, cfg.float("hx")?, gamma)?)
}

fn grid(cfg: &RunConfig) -> Result<UniformGrid, RunError> {
    Ok(UniformGrid::new(
        cfg.float("gamma-min")?,
        cfg.float("gamma-max")?,
        cfg.float("gamma-step")?,
    )?)
}

fn mps_settings(cfg: &RunConfig) -> Result<MpsSettings, RunError> {
    Ok(MpsSettings {
        dt: cfg.float("dt")?,
        cutoff: cfg.float("cutoff")?,
        chi_max: cfg.int("chi-max")?,
        sample_stride: 1,
    })
}

fn scan_summary(params: &ModelParams, scan: &GammaScan) -> Value {
    let mx = scan.mx_peak();
    let im = scan.im_eg_peak();
    json!({
        "L": params.l,
        "J": params.j,
        "hx": params.hx,
        "grid_step": scan.step(),
        "kink_gamma": scan.kink_gamma,
        "kink_index": scan.kink_index,
        "mx_derivative_peak": {"index": mx.index, "gamma": mx.position},
        "im_eg_derivative_peak": {"index": im.index, "gamma": im.position},
        "max_im_eg": scan.max_im_eg(),
        "tie_warnings": scan.tie_warnings,
    })
}

/// The three scan panels: `M_x`, `|Im E_g|` and `dM_x/dγ`.
pub fn scan_svg(scan: &GammaScan) -> Result<String, PlotError> {
    let g = &scan.gamma_grid;
    render_svg(
        &[
            Series::line("M_x", g.clone(), scan.mx.clone()),
            Series::line("|Im E_g|", g.clone(), scan.im_eg.clone()),
            Series::line("dM_x/dγ", g.clone(), scan.derivative.clone()),
        ],
        &PlotKind::Scan {
            kink: scan.kink_gamma,
        },
    )
}

fn ed_scan(cfg: &RunConfig, out: &mut Artifacts, svg_name: &str) -> Result<String, RunError> {
    let params = model(cfg, 0.0)?;
    let scan = scan_gamma(&params, &grid(cfg)?)?;
    out.write("scan.csv", &scan.to_csv())?;
    out.json("kink.json", scan_summary(&params, &scan))?;
    out.write(svg_name, &scan_svg(&scan)?)?;
    Ok(match scan.kink_gamma {
        Some(k) => format!("kink at gamma = {}", round_sig(k)),
        None => "no kink inside the scanned window".into(),
    })
}

fn write_flow(out: &mut Artifacts, params: &ModelParams, gammas: &[f64]) -> Result<(), RunError> {
    let slices = spectral_flow(params, gammas)?;
    out.write("flow.csv", &flow_to_csv(&slices))?;
    let series: Vec<Series> = slices
        .iter()
        .map(|s| {
            Series::points(
                format!("γ = {}", round_sig(s.gamma)),
                s.eigenvalues.iter().map(|e| e.re).collect(),
                s.eigenvalues.iter().map(|e| e.im).collect(),
            )
        })
        .collect();
    out.write("flow.svg", &render_svg(&series, &PlotKind::Flow)?)?;
    Ok(())
}

fn flow(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let params = model(cfg, 0.0)?;
    let gammas = grid(cfg)?.values().to_vec();
    write_flow(out, &params, &gammas)?;
    Ok(format!("spectral flow at {} gamma values", gammas.len()))
}

fn quench(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let params = model(cfg, cfg.float("gamma")?)?;
    let psi0: InitialState = cfg.parsed("initial-state")?;
    let choice: BackendChoice = cfg.parsed("backend")?;
    let t = cfg.float("T")?;
    let interval = cfg.float("sample-interval")?;
    let series = match Backend::resolve(choice, params.l, mps_settings(cfg)?) {
        Backend::Exact => exact_quench(&params, psi0, t, interval)?,
        Backend::Mps(s) => {
            let stride = ((interval / s.dt).round() as usize).max(1);
            run_quench(&params, psi0, t, MpsSettings { sample_stride: stride, ..s })?
        }
    };
    out.write("quench.csv", &series.to_csv())?;
    out.json(
        "quench.json",
        json!({
            "provenance": series.provenance,
            "final_mx": series.final_mx(),
            "truncation_weight": series.truncation_weight,
        }),
    )?;
    Ok(format!(
        "M_x(T) = {} ({})",
        round_sig(series.final_mx().unwrap_or(f64::NAN)),
        series.provenance.backend
    ))
}

fn kink_json(k: &KinkResult) -> Value {
    serde_json::to_value(k).expect("plain record")
}

fn response(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let params = model(cfg, 0.0)?;
    let psi0: InitialState = cfg.parsed("initial-state")?;
    let backend = Backend::resolve(cfg.parsed("backend")?, params.l, mps_settings(cfg)?);
    let curve = response_curve(backend, &params, psi0, cfg.float("T")?, &grid(cfg)?)?;
    out.write("response.csv", &curve.to_csv())?;
    let kink = curve.detect_kink()?;
    out.json("kink.json", kink_json(&kink))?;
    let series = [Series::line(format!("L = {}", curve.l), curve.gamma.clone(), curve.mx.clone())];
    out.write(
        "response.svg",
        &render_svg(&series, &PlotKind::Curve { kinks: vec![kink.gamma_yl] })?,
    )?;
    Ok(format!("kink at gamma = {}", round_sig(kink.gamma_yl)))
}

fn scaling_annotation(fit: &ScalingFit) -> ScalingAnnotation {
    ScalingAnnotation {
        gamma_inf: fit.gamma_inf,
        poly: fit.poly_coefficients.clone(),
        alpha: fit.alpha,
        intercept: fit.intercept,
    }
}

fn size_series(points: &[SizePoint]) -> Series {
    Series::points(
        "γ_YL(L)",
        points.iter().map(|p| p.l as f64).collect(),
        points.iter().map(|p| p.gamma_yl).collect(),
    )
}

fn scaling(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let input = cfg.text("input")?;
    let text = fs::read_to_string(input)?;
    let points = points_from_csv(&text)?;
    let fit = fit_scaling(&points, cfg.int("degree")?)?;
    out.write("scaling.json", &fit.to_json()?)?;
    out.write(
        "scaling.svg",
        &render_svg(&[size_series(&points)], &PlotKind::Scaling(scaling_annotation(&fit)))?,
    )?;
    Ok(format!(
        "gamma_inf = {}, alpha = {}",
        round_sig(fit.gamma_inf),
        round_sig(fit.alpha)
    ))
}

fn floquet(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let target = model(cfg, cfg.float("gamma")?)?;
    let psi0: InitialState = cfg.parsed("initial-state")?;
    let t = cfg.float("T")?;
    let schedule = make_schedule(&ScheduleRequest {
        target,
        t_total: t,
        n_cycles: cfg.int("n-cycles")?,
        j0: cfg.float("j0")?,
        tau_x: cfg.float("tau-x")?,
        tau_gamma: cfg.float("tau-gamma")?,
        tau_j: cfg.opt_float("tau-j")?,
        tau_se: cfg.float("tau-se")?,
    })?;
    let result = run_floquet(&schedule, psi0)?;
    let mut direct = DenseEvolver::from_initial(&target, psi0)?;
    direct.advance(t)?;
    let direct_mx = direct.magnetization(Axis::X);
    out.json("schedule.json", serde_json::to_value(&schedule).map_err(yles::Error::from)?)?;
    out.json(
        "floquet.json",
        json!({
            "mx": result.mx,
            "my": result.my,
            "mz": result.mz,
            "log_norm": result.log_norm,
            "dropped_loss_log": result.dropped_loss_log,
            "direct_mx": direct_mx,
            "mx_error": (result.mx - direct_mx).abs(),
            "wall_time": schedule.wall_time(),
        }),
    )?;
    Ok(format!(
        "Floquet M_x = {}, direct M_x = {}",
        round_sig(result.mx),
        round_sig(direct_mx)
    ))
}

fn feasibility(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let p = RydbergParams {
        omega: units::mhz(cfg.float("omega-mhz")?),
        delta: units::mhz(cfg.float("delta-mhz")?),
        gamma_ryd: units::khz(cfg.float("gamma-ryd-khz")?),
        gamma_laser: units::khz(cfg.float("gamma-laser-khz")?),
        r: cfg.float("r-um")?,
        c6: units::ghz(cfg.float("c6-ghz-um6")?),
        tau_ryd: cfg.float("tau-ryd-us")?,
        omega_mw: units::khz(cfg.float("omega-mw-khz")?),
    };
    let j0 = match cfg.opt_float("j0-khz")? {
        Some(k) => units::khz(k),
        None => derive_couplings(&p)?.j0,
    };
    let schedule = laboratory_schedule(&p, j0, cfg.int("L")?)?;
    let report = feasibility_report(&p, &schedule)?;
    out.json("feasibility.json", serde_json::to_value(&report).map_err(yles::Error::from)?)?;
    out.write("feasibility.txt", &report.to_text())?;
    let all_ok = report.echo_time.ok && report.dressing_time.ok && report.linewidth.ok;
    Ok(format!(
        "J0/gamma_eff = {:.1}, timing checks {}",
        report.ratio_j0_gammaeff,
        if all_ok { "pass" } else { "fail" }
    ))
}

fn fig1(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let message = ed_scan(cfg, out, "fig1.svg")?;
    let params = model(cfg, 0.0)?;
    write_flow(out, &params, &cfg.float_list("flow-gammas")?)?;
    Ok(message)
}

/// Response curve and kink of one size in the scaling pipeline.
pub fn size_response(
    params: &ModelParams,
    backend: Backend,
    psi0: InitialState,
    t: f64,
    grid: &UniformGrid,
) -> Result<(ResponseCurve, KinkResult), RunError> {
    let curve = response_curve(backend, params, psi0, t, grid)?;
    let kink = curve.detect_kink()?;
    Ok((curve, kink))
}

fn fig3(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, RunError> {
    let sizes = cfg.int_list("sizes")?;
    let psi0: InitialState = cfg.parsed("initial-state")?;
    let choice: BackendChoice = cfg.parsed("backend")?;
    let settings = mps_settings(cfg)?;
    let grid = grid(cfg)?;
    let t = cfg.float("T")?;
    let mut curves = Vec::new();
    let mut kinks = Vec::new();
    for &l in &sizes {
        let params = ModelParams::new(l, cfg.float("J")?, cfg.float("hx")?, 0.0)?;
        let backend = Backend::resolve(choice, l, settings);
        let (curve, kink) = size_response(&params, backend, psi0, t, &grid)?;
        eprintln!("L = {l}: kink at gamma = {}", round_sig(kink.gamma_yl));
        out.write(&format!("response_L{l}.csv"), &curve.to_csv())?;
        curves.push(Series::line(format!("L = {l}"), curve.gamma, curve.mx));
        kinks.push(kink);
    }
    let points: Vec<SizePoint> = kinks
        .iter()
        .map(|k| SizePoint {
            l: k.l,
            gamma_yl: k.gamma_yl,
        })
        .collect();
    out.write("kinks.csv", &points_to_csv(&points))?;
    out.json("kinks.json", kinks.iter().map(kink_json).collect())?;
    let fit = fit_scaling(&points, cfg.int("degree")?)?;
    out.write("scaling.json", &fit.to_json()?)?;
    let markers: Vec<f64> = kinks.iter().map(|k| k.gamma_yl).collect();
    out.write(
        "fig3.svg",
        &render_three_panel(&curves, &markers, &size_series(&points), &scaling_annotation(&fit))?,
    )?;
    Ok(format!(
        "gamma_inf = {}, alpha = {}",
        round_sig(fit.gamma_inf),
        round_sig(fit.alpha)
    ))
}
