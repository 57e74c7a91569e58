//! Dense emulation of the Rydberg Floquet protocol.
//!
//! Units: time in µs, length in µm, every rate and energy as an angular
//! frequency in rad/µs (so `2π × 1 MHz = 2π`). Propagators follow the same
//! `e^{−iHt}` convention as the rest of the crate: one cycle `U₂U₁`
//! approximates `e^{−i(T/N)H}` of the target chain.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::io::fmt_num;
use crate::linalg::{expm, DenseOperator};
use crate::model::{magnetization, site_mask, spin_z, Axis, InitialState, ModelParams};

/// Largest chain the Floquet emulator builds dense pulses for.
pub const MAX_FLOQUET_SITES: usize = 10;
/// Bound below which a dimensionless timing ratio counts as `≪ 1`.
pub const SMALLNESS_THRESHOLD: f64 = 0.15;

pub mod units {
    use std::f64::consts::PI;

    pub fn khz(f: f64) -> f64 {
        2.0 * PI * f * 1e-3
    }

    pub fn mhz(f: f64) -> f64 {
        2.0 * PI * f
    }

    pub fn ghz(f: f64) -> f64 {
        2.0 * PI * f * 1e3
    }

    /// Angular frequency back to `f` in kHz.
    pub fn to_khz(w: f64) -> f64 {
        w / (2.0 * PI) * 1e3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RydbergParams {
    /// Dressing Rabi frequency Ω.
    pub omega: f64,
    /// Dressing detuning Δ.
    pub delta: f64,
    /// Rydberg linewidth Γ.
    pub gamma_ryd: f64,
    /// Dressing-laser linewidth γ_l.
    pub gamma_laser: f64,
    /// Atom spacing.
    pub r: f64,
    /// Van der Waals coefficient in rad/µs · µm⁶.
    pub c6: f64,
    /// Rydberg lifetime.
    pub tau_ryd: f64,
    /// Microwave Rabi frequency driving the echo π pulse.
    pub omega_mw: f64,
}

impl RydbergParams {
    /// Cs `60P_{3/2}` dressing at 3.4 µm spacing.
    pub fn table() -> Self {
        Self {
            omega: units::mhz(6.8),
            delta: units::mhz(22.0),
            gamma_ryd: units::khz(1.1),
            gamma_laser: units::khz(7.0),
            r: 3.4,
            c6: units::ghz(360.0),
            tau_ryd: 148.0,
            omega_mw: units::khz(70.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("delta", self.delta),
            ("gamma_ryd", self.gamma_ryd),
            ("gamma_laser", self.gamma_laser),
            ("r", self.r),
            ("c6", self.c6),
            ("tau_ryd", self.tau_ryd),
            ("omega_mw", self.omega_mw),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `Δ/Ω`; dressing is perturbative when this is large.
    pub fn detuning_ratio(&self) -> f64 {
        self.delta / self.omega
    }

    /// Echo π-pulse duration `π/Ω_MW`.
    pub fn tau_se(&self) -> f64 {
        PI / self.omega_mw
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Couplings {
    pub u0: f64,
    pub u_r: f64,
    pub j0: f64,
    pub r_c: f64,
    /// `U(2r)/U(r)`, excluded from the emulated chain.
    pub nnn_ratio: f64,
}

pub fn derive_couplings(p: &RydbergParams) -> Result<Couplings> {
    p.validate()?;
    let u0 = p.omega.powi(4) / (8.0 * p.delta.powi(3));
    let r_c = (p.c6 / (2.0 * p.delta)).powf(1.0 / 6.0);
    let soft = |r: f64| u0 / (1.0 + (r / r_c).powi(6));
    let u_r = soft(p.r);
    Ok(Couplings {
        u0,
        u_r,
        j0: u_r / 4.0,
        r_c,
        nnn_ratio: soft(2.0 * p.r) / u_r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DressingCheck {
    /// Lowest eigenvalue of the two-atom dressing matrix.
    pub ground_energy: f64,
    /// `ground_energy − (Δ − √(Ω² + Δ²))`.
    pub exact_shift: f64,
    /// `−Ω⁴/(8Δ³)`.
    pub approx_shift: f64,
    /// `||exact| − |approx|| / |approx|`.
    pub relative_deviation: f64,
    /// Whether the two shifts carry the same sign.
    pub same_sign: bool,
}

/// Diagonalize the symmetric two-atom dressing matrix over
/// `(|↑↑⟩, (|↑R⟩ + |R↑⟩)/√2, |RR⟩)`.
pub fn dressing_3level_check(omega: f64, delta: f64, u_dd: f64) -> Result<DressingCheck> {
    ensure_finite("omega", omega)?;
    ensure_finite("delta", delta)?;
    ensure_finite("u_dd", u_dd)?;
    if u_dd <= 0.0 {
        return Err(Error::Validation(format!("u_dd must be positive, got {u_dd}")));
    }
    if delta == 0.0 {
        return Err(Error::Validation("delta must be non-zero".into()));
    }
    let c = omega / 2f64.sqrt();
    let entries = [[0.0, c, 0.0], [c, delta, c], [0.0, c, 2.0 * delta + u_dd]];
    let m = Mat::<f64>::from_fn(3, 3, |i, j| entries[i][j]);
    let ev = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::EigenConvergence {
            worst_residual: f64::NAN,
        })?;
    let ground_energy = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let baseline = delta - (omega * omega + delta * delta).sqrt();
    let exact_shift = ground_energy - baseline;
    let approx_shift = -omega.powi(4) / (8.0 * delta.powi(3));
    let relative_deviation = if approx_shift == 0.0 {
        exact_shift.abs()
    } else {
        (exact_shift.abs() - approx_shift.abs()).abs() / approx_shift.abs()
    };
    Ok(DressingCheck {
        ground_energy,
        exact_shift,
        approx_shift,
        relative_deviation,
        same_sign: exact_shift * approx_shift > 0.0,
    })
}

fn pauli_exp(axis: Axis, theta: f64) -> [[c64; 2]; 2] {
    // e^{iθσ} = cos θ + i sin θ σ
    let p = axis.pauli();
    let mut m = [[c64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { theta.cos() } else { 0.0 };
            m[r][c] = c64::new(id, 0.0) + p[r][c] * c64::new(0.0, theta.sin());
        }
    }
    m
}

fn mul2(a: &[[c64; 2]; 2], b: &[[c64; 2]; 2]) -> [[c64; 2]; 2] {
    let mut m = [[c64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    m
}

/// `max |e^{−iπ/2 σˣ} e^{iδτJ₀σᶻ} e^{−iπ/2 σˣ} e^{iδτJ₀σᶻ} + 1|`.
pub fn spin_echo_identity(j0: f64, dtau: f64) -> f64 {
    let kick = pauli_exp(Axis::X, -PI / 2.0);
    let field = pauli_exp(Axis::Z, dtau * j0);
    let prod = mul2(&mul2(&kick, &field), &mul2(&kick, &field));
    let mut dev = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((prod[r][c] + c64::new(id, 0.0)).norm());
        }
    }
    dev
}

fn check_floquet_sites(l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::Validation("L must be at least 1".into()));
    }
    if l > MAX_FLOQUET_SITES {
        return Err(Error::Size {
            l,
            max: MAX_FLOQUET_SITES,
        });
    }
    Ok(())
}

/// `⊗_j m`: the same 2×2 matrix on every site.
fn uniform_product(m: &[[c64; 2]; 2], l: usize) -> DenseOperator {
    let dim = 1usize << l;
    let mat = Mat::from_fn(dim, dim, |row, col| {
        (1..=l).fold(c64::new(1.0, 0.0), |acc, site| {
            let mask = site_mask(site, l);
            acc * m[usize::from(row & mask != 0)][usize::from(col & mask != 0)]
        })
    });
    DenseOperator::from_mat(mat).expect("power-of-two dimension")
}

fn diagonal(l: usize, f: impl Fn(usize) -> c64) -> DenseOperator {
    let dim = 1usize << l;
    let mat = Mat::from_fn(dim, dim, |r, c| if r == c { f(r) } else { c64::new(0.0, 0.0) });
    DenseOperator::from_mat(mat).expect("power-of-two dimension")
}

/// Global π kick `e^{−iπ/2 Σ_j σˣ_j}`.
pub fn x_kick(l: usize) -> Result<DenseOperator> {
    check_floquet_sites(l)?;
    Ok(uniform_product(&pauli_exp(Axis::X, -PI / 2.0), l))
}

fn zz_sum(b: usize, l: usize) -> f64 {
    (1..l).map(|s| spin_z(b, s, l) * spin_z(b, s + 1, l)).sum()
}

/// `e^{−iτ H_int(J)}` with `H_int(J) = −J Σ P_i P_{i+1}`, `P = |↑⟩⟨↑|`.
pub fn dressing_evolution(l: usize, j: f64, tau: f64) -> Result<DenseOperator> {
    check_floquet_sites(l)?;
    Ok(diagonal(l, |b| {
        let pairs = (1..l)
            .filter(|&s| spin_z(b, s, l) > 0.0 && spin_z(b, s + 1, l) > 0.0)
            .count() as f64;
        c64::from_polar(1.0, tau * j * pairs)
    }))
}

/// Echo-cleaned interaction pulse `(K · e^{−iτ_J H_int(2J₀)})²` with the global kick `K`.
///
/// Equals `(−1)^L e^{iτ_J J₀ (L−1)} · e^{iτ_J J₀ Σ σᶻσᶻ}`; see [`u1_global_phase`].
pub fn build_u1(params: &ModelParams, j0: f64, tau_j: f64) -> Result<DenseOperator> {
    ensure_finite("j0", j0)?;
    ensure_finite("tau_j", tau_j)?;
    let l = params.l;
    let kick = x_kick(l)?;
    let dressed = dressing_evolution(l, 2.0 * j0, tau_j)?;
    let half = &kick * &dressed;
    Ok(&half * &half)
}

/// Phase separating [`build_u1`] from [`zz_target`].
pub fn u1_global_phase(l: usize, j0: f64, tau_j: f64) -> c64 {
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    c64::from_polar(sign, tau_j * j0 * (l as f64 - 1.0))
}

/// `e^{iτ J₀ Σ σᶻ_j σᶻ_{j+1}} = e^{−iτ H_ZZ(J₀)}`.
pub fn zz_target(l: usize, j0: f64, tau: f64) -> Result<DenseOperator> {
    check_floquet_sites(l)?;
    Ok(diagonal(l, |b| c64::from_polar(1.0, tau * j0 * zz_sum(b, l))))
}

/// `min_φ max |a − e^{iφ} b|` with `φ` aligned to `tr(b†a)`.
pub fn deviation_mod_phase(a: &DenseOperator, b: &DenseOperator) -> f64 {
    let overlap: c64 = (0..a.dim())
        .flat_map(|j| (0..a.dim()).map(move |i| (i, j)))
        .map(|(i, j)| b.get(i, j).conj() * a.get(i, j))
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c64::new(1.0, 0.0)
    };
    (a - &b.scale(phase)).max_abs()
}

/// Field-and-loss pulse `exp(−iτ_x H_X(F) − iτ_γ H_Z(g))` with
/// `H_X(F) = −F Σ σˣ` and `H_Z(g) = ig Σ σᶻ`, the global loss dropped.
///
/// The generator is a sum of identical single-site terms, so the exponential
/// is the tensor power of one 2×2 exponential.
pub fn build_u2(f: f64, g: f64, tau_x: f64, tau_gamma: f64, l: usize) -> Result<DenseOperator> {
    for (name, v) in [("F", f), ("g", g), ("tau_x", tau_x), ("tau_gamma", tau_gamma)] {
        ensure_finite(name, v)?;
    }
    check_floquet_sites(l)?;
    let site = Mat::from_fn(2, 2, |r, c| {
        let x = Axis::X.pauli()[r][c] * c64::new(0.0, tau_x * f);
        let z = Axis::Z.pauli()[r][c] * c64::new(tau_gamma * g, 0.0);
        x + z
    });
    let e = expm(&site);
    let m = [[e[(0, 0)], e[(0, 1)]], [e[(1, 0)], e[(1, 1)]]];
    Ok(uniform_product(&m, l))
}

/// Pulse durations and amplitudes realizing `T·H` of `target` in `n_cycles` cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetSchedule {
    pub tau_j: f64,
    pub tau_x: f64,
    pub tau_gamma: f64,
    pub tau_se: f64,
    pub j0: f64,
    pub f_field: f64,
    pub g_loss: f64,
    pub n_cycles: usize,
    pub target: ModelParams,
    #[serde(rename = "T")]
    pub t_total: f64,
}

/// Inputs of [`make_schedule`]; `tau_j` is derived from the mapping when absent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleRequest {
    pub target: ModelParams,
    pub t_total: f64,
    pub n_cycles: usize,
    pub j0: f64,
    pub tau_x: f64,
    pub tau_gamma: f64,
    pub tau_j: Option<f64>,
    pub tau_se: f64,
}

impl FloquetSchedule {
    /// Time step `T/N` of the target evolution per cycle.
    pub fn cycle_time(&self) -> f64 {
        self.t_total / self.n_cycles as f64
    }

    /// `N (τ_J + τ_SE + max(τ_x, τ_γ))`.
    pub fn wall_time(&self) -> f64 {
        self.n_cycles as f64 * (self.tau_j + self.tau_se + self.tau_x.max(self.tau_gamma))
    }

    /// `(h_x τ_x, γ τ_γ)` in target units.
    pub fn smallness(&self) -> (f64, f64) {
        (self.target.hx * self.tau_x, self.target.gamma * self.tau_gamma)
    }

    /// Largest relative violation of `(τ_x F, τ_γ g, τ_J J₀) = (T/N)(h_x, γ, J)`.
    pub fn mapping_error(&self) -> f64 {
        let dt = self.cycle_time();
        let rel = |lhs: f64, rhs: f64| {
            if rhs == 0.0 {
                lhs.abs()
            } else {
                ((lhs - rhs) / rhs).abs()
            }
        };
        rel(self.tau_x * self.f_field, dt * self.target.hx)
            .max(rel(self.tau_gamma * self.g_loss, dt * self.target.gamma))
            .max(rel(self.tau_j * self.j0, dt * self.target.j))
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate()?;
        if self.n_cycles == 0 && self.t_total != 0.0 {
            return Err(Error::Constraint("N = 0 requires T = 0".into()));
        }
        if self.n_cycles > 0 && self.mapping_error() > 1e-9 {
            return Err(Error::Constraint(format!(
                "(tau_x F, tau_gamma g, tau_J J0) deviates from (T/N)(hx, gamma, J) by {:.3e}",
                self.mapping_error()
            )));
        }
        Ok(())
    }
}

pub fn make_schedule(req: &ScheduleRequest) -> Result<FloquetSchedule> {
    req.target.validate()?;
    for (name, v) in [
        ("T", req.t_total),
        ("j0", req.j0),
        ("tau_x", req.tau_x),
        ("tau_gamma", req.tau_gamma),
        ("tau_se", req.tau_se),
    ] {
        ensure_finite(name, v)?;
        if v < 0.0 {
            return Err(Error::Validation(format!("{name} must be non-negative, got {v}")));
        }
    }
    if req.n_cycles == 0 {
        if req.t_total != 0.0 {
            return Err(Error::Constraint("N = 0 cycles cannot span T > 0".into()));
        }
        return Ok(FloquetSchedule {
            tau_j: req.tau_j.unwrap_or(0.0),
            tau_x: req.tau_x,
            tau_gamma: req.tau_gamma,
            tau_se: req.tau_se,
            j0: req.j0,
            f_field: 0.0,
            g_loss: 0.0,
            n_cycles: 0,
            target: req.target,
            t_total: 0.0,
        });
    }
    let dt = req.t_total / req.n_cycles as f64;
    let amplitude = |value: f64, tau: f64, name: &str| -> Result<f64> {
        if value == 0.0 {
            Ok(0.0)
        } else if tau > 0.0 {
            Ok(dt * value / tau)
        } else {
            Err(Error::Constraint(format!("{name} must be positive to realize a non-zero term")))
        }
    };
    let f_field = amplitude(req.target.hx, req.tau_x, "tau_x")?;
    let g_loss = amplitude(req.target.gamma, req.tau_gamma, "tau_gamma")?;
    let tau_j = if req.target.j == 0.0 {
        req.tau_j.unwrap_or(0.0)
    } else {
        if req.j0 <= 0.0 {
            return Err(Error::Constraint("j0 must be positive for a non-zero J".into()));
        }
        let exact = dt * req.target.j / req.j0;
        if let Some(given) = req.tau_j {
            let implied = req.t_total * req.target.j / (req.j0 * given);
            if implied.round() as usize != req.n_cycles {
                return Err(Error::Constraint(format!(
                    "N = {} but T*J/(J0*tau_J) = {}",
                    req.n_cycles,
                    fmt_num(implied)
                )));
            }
        }
        exact
    };
    let schedule = FloquetSchedule {
        tau_j,
        tau_x: req.tau_x,
        tau_gamma: req.tau_gamma,
        tau_se: req.tau_se,
        j0: req.j0,
        f_field,
        g_loss,
        n_cycles: req.n_cycles,
        target: req.target,
        t_total: req.t_total,
    };
    schedule.validate()?;
    Ok(schedule)
}

/// Outcome of [`run_floquet`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloquetRun {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
    /// Norm divided out after each cycle.
    pub norms: Vec<f64>,
    pub log_norm: f64,
    /// `ln` of the dropped global loss factor `e^{−L g τ_γ N}`.
    pub dropped_loss_log: f64,
}

/// Apply `e^{−iθσ/2}` about `axis` to every site of `v`.
fn rotate_all(v: &mut [c64], l: usize, axis: Axis, theta: f64) {
    let r = pauli_exp(axis, -theta / 2.0);
    for site in 1..=l {
        let mask = site_mask(site, l);
        for b in 0..v.len() {
            if b & mask == 0 {
                let (up, down) = (v[b], v[b | mask]);
                v[b] = r[0][0] * up + r[0][1] * down;
                v[b | mask] = r[1][0] * up + r[1][1] * down;
            }
        }
    }
}

/// `|Σ_j ⟨σ^axis_j⟩| / L` read from σᶻ populations after a global readout rotation
/// (`R_y(π/2)` for x, `R_x(π/2)` for y).
pub fn readout_magnetization(v: &[c64], l: usize, axis: Axis) -> f64 {
    let mut w = v.to_vec();
    match axis {
        Axis::X => rotate_all(&mut w, l, Axis::Y, PI / 2.0),
        Axis::Y => rotate_all(&mut w, l, Axis::X, PI / 2.0),
        Axis::Z => {}
    }
    let norm_sq: f64 = w.iter().map(|a| a.norm_sqr()).sum();
    let pop: f64 = w
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * (1..=l).map(|s| spin_z(b, s, l)).sum::<f64>())
        .sum();
    pop.abs() / (l as f64 * norm_sq)
}

/// Apply `[U₂U₁]^N` to `psi0`, renormalizing after every cycle.
pub fn run_floquet(schedule: &FloquetSchedule, psi0: InitialState) -> Result<FloquetRun> {
    schedule.validate()?;
    let l = schedule.target.l;
    check_floquet_sites(l)?;
    let mut v = psi0.dense_vector(l);
    let mut norms = Vec::with_capacity(schedule.n_cycles);
    let mut log_norm = 0.0;
    if schedule.n_cycles > 0 {
        let u1 = build_u1(&schedule.target, schedule.j0, schedule.tau_j)?;
        let u2 = build_u2(
            schedule.f_field,
            schedule.g_loss,
            schedule.tau_x,
            schedule.tau_gamma,
            l,
        )?;
        let cycle = &u2 * &u1;
        for _ in 0..schedule.n_cycles {
            v = cycle.apply(&v);
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Numerical(format!("Floquet state norm became {n}")));
            }
            for a in &mut v {
                *a /= n;
            }
            norms.push(n);
            log_norm += n.ln();
        }
    }
    Ok(FloquetRun {
        mx: readout_magnetization(&v, l, Axis::X),
        my: readout_magnetization(&v, l, Axis::Y),
        mz: magnetization(Axis::Z, l, &v),
        norms,
        log_norm,
        dropped_loss_log: -(l as f64) * schedule.g_loss * schedule.tau_gamma * schedule.n_cycles as f64,
    })
}

/// A ratio that should be small, with its verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimingCheck {
    pub value: f64,
    pub threshold: f64,
    pub ok: bool,
}

impl TimingCheck {
    fn new(value: f64) -> Self {
        Self {
            value,
            threshold: SMALLNESS_THRESHOLD,
            ok: value < SMALLNESS_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub params: RydbergParams,
    pub couplings: Couplings,
    pub s0: f64,
    pub gamma_eff: f64,
    pub ratio_j0_gammaeff: f64,
    pub ratio_omega_gamma: f64,
    pub coherent_dressing_ok: bool,
    pub echo_time: TimingCheck,
    pub dressing_time: TimingCheck,
    pub linewidth: TimingCheck,
    pub wall_time: f64,
    pub schedule: FloquetSchedule,
}

pub fn feasibility_report(p: &RydbergParams, schedule: &FloquetSchedule) -> Result<FeasibilityReport> {
    let couplings = derive_couplings(p)?;
    let s0 = 2.0 * p.omega * p.omega / (p.gamma_ryd * p.gamma_ryd);
    let detuning = 2.0 * p.delta / p.gamma_ryd;
    let gamma_eff = p.gamma_ryd / 4.0 * s0 / (1.0 + s0 + detuning * detuning);
    let ratio_j0_gammaeff = schedule.j0 / gamma_eff;
    let ratio_omega_gamma = p.omega / p.gamma_ryd;
    Ok(FeasibilityReport {
        params: *p,
        couplings,
        s0,
        gamma_eff,
        ratio_j0_gammaeff,
        ratio_omega_gamma,
        coherent_dressing_ok: ratio_j0_gammaeff < ratio_omega_gamma,
        echo_time: TimingCheck::new(schedule.tau_se / (2.0 * p.tau_ryd)),
        dressing_time: TimingCheck::new(schedule.tau_j / (2.0 * p.tau_ryd)),
        linewidth: TimingCheck::new(p.gamma_laser * schedule.tau_j / 2.0),
        wall_time: schedule.wall_time(),
        schedule: schedule.clone(),
    })
}

impl FeasibilityReport {
    /// Two-column text table, frequencies quoted as `2π × kHz`.
    pub fn to_text(&self) -> String {
        let k = |w: f64| format!("2π × {:.4} kHz", units::to_khz(w));
        let c = &self.couplings;
        let p = &self.params;
        let rows: Vec<(String, String)> = vec![
            ("Atom spacing, r".into(), format!("{:.2} µm", p.r)),
            ("Rydberg lifetime, tau_ryd".into(), format!("{:.1} µs", p.tau_ryd)),
            ("Rydberg linewidth, Gamma".into(), k(p.gamma_ryd)),
            ("Dressing laser linewidth, gamma_l".into(), k(p.gamma_laser)),
            ("Dressing laser Rabi frequency, Omega".into(), k(p.omega)),
            ("Dressing laser detuning, Delta".into(), k(p.delta)),
            ("Interaction range, r_c = (C6/2Delta)^(1/6)".into(), format!("{:.3} µm", c.r_c)),
            ("Peak interaction, U0 = Omega^4/8Delta^3".into(), k(c.u0)),
            ("Interaction at r, U(r) = U0/(1+(r/r_c)^6)".into(), k(c.u_r)),
            ("Coupling strength, J0 = U(r)/4".into(), k(c.j0)),
            ("NNN/NN interaction ratio".into(), format!("{:.4}", c.nnn_ratio)),
            ("Saturation parameter, s0".into(), format!("{:.4e}", self.s0)),
            ("Dressed decay rate, gamma_eff".into(), k(self.gamma_eff)),
            ("J0/gamma_eff".into(), format!("{:.1}", self.ratio_j0_gammaeff)),
            ("Omega/Gamma".into(), format!("{:.1}", self.ratio_omega_gamma)),
            ("tau_SE/(2 tau_ryd)".into(), check(&self.echo_time)),
            ("tau_J/(2 tau_ryd)".into(), check(&self.dressing_time)),
            ("gamma_l tau_J/2".into(), check(&self.linewidth)),
            ("Schedule J0".into(), k(self.schedule.j0)),
            ("tau_J".into(), format!("{:.3} µs", self.schedule.tau_j)),
            ("tau_SE".into(), format!("{:.3} µs", self.schedule.tau_se)),
            ("Transverse field, F".into(), k(self.schedule.f_field)),
            ("Loss rate, g".into(), k(self.schedule.g_loss)),
            ("Cycles, N".into(), self.schedule.n_cycles.to_string()),
            ("Total wall time".into(), format!("{:.1} µs", self.wall_time)),
        ];
        let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, value) in rows {
            let pad = width - name.chars().count();
            out.push_str(&format!("{name}{}  {value}\n", " ".repeat(pad)));
        }
        out
    }
}

fn check(t: &TimingCheck) -> String {
    format!(
        "{:.4} ({} {})",
        t.value,
        if t.ok { "<" } else { ">=" },
        t.threshold
    )
}

/// Schedule for the laboratory parameters: `T·J = 10`, `h_x = 1.5J`,
/// `γ = 0.35J` at `J = 2π × 2 kHz`, 50 cycles, `τ_x = 3 µs`, `τ_γ = 1.5 µs`.
pub fn laboratory_schedule(p: &RydbergParams, j0: f64, l: usize) -> Result<FloquetSchedule> {
    let j = units::khz(2.0);
    let target = ModelParams::new(l, j, 1.5 * j, 0.35 * j)?;
    make_schedule(&ScheduleRequest {
        target,
        t_total: 10.0 / j,
        n_cycles: 50,
        j0,
        tau_x: 3.0,
        tau_gamma: 1.5,
        tau_j: None,
        tau_se: p.tau_se(),
    })
}
