//! Exact diagonalization of the dense non-Hermitian Hamiltonian: spectra,
//! ground-state observables, γ-scans, spectral flow and exact dynamics.

use faer::prelude::*;
use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::io::fmt_num;
use crate::linalg::DenseOperator;
use crate::model::{
    apply_hamiltonian, build_hamiltonian, check_dense_sites, hamiltonian_diagonal, magnetization,
    Axis, InitialState, ModelParams,
};
use crate::numerics::{centered_difference, parabolic_peak, Peak, UniformGrid};

/// Relative width inside which two real parts count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Below this maximum of `|Im E_g|` a scan reports no kink.
pub const PT_BREAKING_FLOOR: f64 = 1e-8;

/// All eigenpairs of a dense operator; column `i` of `right_eigenvectors`
/// pairs with `eigenvalues[i]` and has unit 2-norm.
#[derive(Clone, Debug)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<c64>,
    pub right_eigenvectors: Mat<c64>,
    pub residuals: Vec<f64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, i: usize) -> &[c64] {
        self.right_eigenvectors.col_as_slice(i)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    pub fn conjugation_defect(&self) -> f64 {
        conjugation_defect(&self.eigenvalues)
    }
}

/// Largest distance in a greedy matching of the eigenvalues, sorted by
/// `(Re, Im)`, against their complex conjugates.
///
/// Zero for a multiset closed under conjugation.
pub fn conjugation_defect(eigenvalues: &[c64]) -> f64 {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let conj: Vec<c64> = sorted.iter().map(|e| e.conj()).collect();
    let mut used = vec![false; conj.len()];
    let mut worst = 0.0f64;
    for e in &sorted {
        let (j, d) = conj
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, c)| (j, (*c - *e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("one unused conjugate per eigenvalue");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Full complex eigendecomposition with a residual check per pair.
pub fn eigendecompose(h: &DenseOperator) -> Result<ComplexSpectrum> {
    let dim = h.dim();
    check_dense_sites(h.sites())?;
    let scale = h.max_abs();
    if !scale.is_finite() {
        return Err(Error::Validation("operator has non-finite entries".into()));
    }
    let eig = h.mat().eigen().map_err(|_| Error::EigenConvergence {
        worst_residual: f64::NAN,
    })?;
    let s = eig.S();
    let u = eig.U();
    let eigenvalues: Vec<c64> = (0..dim).map(|k| s[k]).collect();
    let mut vectors = u.to_owned();
    for k in 0..dim {
        let col = vectors.col_as_slice_mut(k);
        let norm = col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::EigenConvergence {
                worst_residual: f64::INFINITY,
            });
        }
        for a in col.iter_mut() {
            *a /= norm;
        }
    }
    let hv = h.mat() * &vectors;
    let residuals: Vec<f64> = (0..dim)
        .map(|k| {
            let lam = eigenvalues[k];
            hv.col_as_slice(k)
                .iter()
                .zip(vectors.col_as_slice(k))
                .map(|(a, v)| (a - lam * v).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !worst.is_finite() || worst > 1e-9 * scale.max(f64::MIN_POSITIVE) * dim as f64 {
        return Err(Error::EigenConvergence {
            worst_residual: worst,
        });
    }
    Ok(ComplexSpectrum {
        eigenvalues,
        right_eigenvectors: vectors,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateInfo {
    pub index: usize,
    pub energy: c64,
    pub magnetization_x: f64,
    pub magnetization_z: f64,
    /// Every index tied on the minimal real part beyond a conjugate pair;
    /// empty unless the selection was ambiguous.
    pub accidental_ties: Vec<usize>,
}

/// Eigenstate with minimal `Re E`; a tied conjugate pair resolves to `Im E ≥ 0`.
pub fn ground_state(spec: &ComplexSpectrum, params: &ModelParams) -> Result<GroundStateInfo> {
    if spec.is_empty() {
        return Err(Error::EmptySeries);
    }
    let index = select_ground(&spec.eigenvalues);
    let v = spec.eigenvector(index.0);
    Ok(GroundStateInfo {
        index: index.0,
        energy: spec.eigenvalues[index.0],
        magnetization_x: magnetization(Axis::X, params.l, v),
        magnetization_z: magnetization(Axis::Z, params.l, v),
        accidental_ties: index.1,
    })
}

fn select_ground(eigenvalues: &[c64]) -> (usize, Vec<usize>) {
    let min_re = eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * min_re.abs().max(1.0);
    let tied: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i].re - min_re <= tol)
        .collect();
    if tied.len() == 1 {
        return (tied[0], Vec::new());
    }
    let upper: Vec<usize> = tied
        .iter()
        .copied()
        .filter(|&i| eigenvalues[i].im >= -tol)
        .collect();
    let pool = if upper.is_empty() { &tied } else { &upper };
    let choice = *pool
        .iter()
        .max_by(|&&a, &&b| {
            eigenvalues[a]
                .im
                .total_cmp(&eigenvalues[b].im)
                .then(b.cmp(&a))
        })
        .expect("non-empty tie set");
    let is_conjugate_pair = tied.len() == 2
        && eigenvalues[tied[0]].im.abs() > tol
        && (eigenvalues[tied[0]] - eigenvalues[tied[1]].conj()).norm() <= 1e-6 * min_re.abs().max(1.0);
    if is_conjugate_pair {
        (choice, Vec::new())
    } else {
        let smallest = *pool.iter().min().expect("non-empty tie set");
        (smallest, tied)
    }
}

/// Diagonalize `H(params)` and return the spectrum with its ground state.
pub fn solve(params: &ModelParams) -> Result<(ComplexSpectrum, GroundStateInfo)> {
    let h = build_hamiltonian(params)?;
    let spec = eigendecompose(&h)?;
    let gs = ground_state(&spec, params)?;
    Ok((spec, gs))
}

/// Ground-state observables over a uniform γ grid.
#[derive(Clone, Debug, Serialize)]
pub struct GammaScan {
    pub gamma_grid: Vec<f64>,
    pub im_eg: Vec<f64>,
    pub re_eg: Vec<f64>,
    pub mx: Vec<f64>,
    pub mz: Vec<f64>,
    pub derivative: Vec<f64>,
    pub kink_gamma: Option<f64>,
    pub kink_index: Option<usize>,
    /// Grid points whose ground state was chosen among accidental ties.
    pub tie_warnings: Vec<usize>,
}

impl GammaScan {
    pub fn step(&self) -> f64 {
        self.gamma_grid[1] - self.gamma_grid[0]
    }

    /// Peak of `|dM_x/dγ|` with parabolic refinement.
    pub fn mx_peak(&self) -> Peak {
        let abs: Vec<f64> = self.derivative.iter().map(|d| d.abs()).collect();
        parabolic_peak(&self.gamma_grid, &abs)
    }

    /// Peak of `d|Im E_g|/dγ` with parabolic refinement.
    pub fn im_eg_peak(&self) -> Peak {
        let d = centered_difference(&self.gamma_grid, &self.im_eg);
        parabolic_peak(&self.gamma_grid, &d)
    }

    pub fn max_im_eg(&self) -> f64 {
        self.im_eg.iter().copied().fold(0.0, f64::max)
    }

    /// `gamma,im_eg,mx,dmx_dgamma`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,im_eg,mx,dmx_dgamma\n");
        for i in 0..self.gamma_grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_num(self.gamma_grid[i]),
                fmt_num(self.im_eg[i]),
                fmt_num(self.mx[i]),
                fmt_num(self.derivative[i])
            ));
        }
        out
    }
}

/// Diagonalize at every grid point of `grid` and locate the kink of `M_x(γ)`.
///
/// The kink is absent when the ground state stays PT-symmetric on the grid
/// or when the steepest point of `M_x` is a grid endpoint, so the window
/// does not contain the transition.
pub fn scan_gamma(params: &ModelParams, grid: &UniformGrid) -> Result<GammaScan> {
    if grid.len() < 5 {
        return Err(Error::Validation(format!(
            "gamma scan needs at least 5 grid points, got {}",
            grid.len()
        )));
    }
    params.with_gamma(0.0).validate()?;
    check_dense_sites(params.l)?;
    if grid.values()[0] < 0.0 {
        return Err(Error::Validation("gamma grid must be non-negative".into()));
    }
    let points = map_grid(grid.values(), |g| {
        let p = params.with_gamma(g);
        solve(&p).map(|(_, gs)| gs)
    })?;
    let gamma_grid = grid.values().to_vec();
    let im_eg: Vec<f64> = points.iter().map(|g| g.energy.im.abs()).collect();
    let re_eg: Vec<f64> = points.iter().map(|g| g.energy.re).collect();
    let mx: Vec<f64> = points.iter().map(|g| g.magnetization_x).collect();
    let mz: Vec<f64> = points.iter().map(|g| g.magnetization_z).collect();
    let tie_warnings = points
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.accidental_ties.is_empty())
        .map(|(i, _)| i)
        .collect();
    let derivative = centered_difference(&gamma_grid, &mx);
    let mut scan = GammaScan {
        gamma_grid,
        im_eg,
        re_eg,
        mx,
        mz,
        derivative,
        kink_gamma: None,
        kink_index: None,
        tie_warnings,
    };
    let peak = scan.mx_peak();
    if scan.max_im_eg() >= PT_BREAKING_FLOOR && !peak.at_endpoint(scan.gamma_grid.len()) {
        scan.kink_gamma = Some(peak.position);
        scan.kink_index = Some(peak.index);
    }
    Ok(scan)
}

/// Eigenvalue cloud at one γ.
#[derive(Clone, Debug)]
pub struct FlowSlice {
    pub gamma: f64,
    pub eigenvalues: Vec<c64>,
    pub ground_index: usize,
    pub conjugation_defect: f64,
}

impl FlowSlice {
    /// `|Im E|` of the ground state, equal for both members of its pair.
    pub fn ground_im(&self) -> f64 {
        self.eigenvalues[self.ground_index].im.abs()
    }
}

/// `gamma,re_e,im_e`, eigenvalues of each slice ordered by `(Re, Im)`.
pub fn flow_to_csv(slices: &[FlowSlice]) -> String {
    let mut out = String::from("gamma,re_e,im_e\n");
    for s in slices {
        let mut ev = s.eigenvalues.clone();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for e in ev {
            out.push_str(&format!("{},{},{}\n", fmt_num(s.gamma), fmt_num(e.re), fmt_num(e.im)));
        }
    }
    out
}

pub fn spectral_flow(params: &ModelParams, gammas: &[f64]) -> Result<Vec<FlowSlice>> {
    check_dense_sites(params.l)?;
    for &g in gammas {
        params.with_gamma(g).validate()?;
    }
    map_grid(gammas, |g| {
        let (spec, gs) = solve(&params.with_gamma(g))?;
        Ok(FlowSlice {
            gamma: g,
            conjugation_defect: spec.conjugation_defect(),
            ground_index: gs.index,
            eigenvalues: spec.eigenvalues,
        })
    })
}

/// `|⟨ψ(t)|v_i⟩|` for every eigenvector at every requested time.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    pub times: Vec<f64>,
    pub eigenvalues: Vec<c64>,
    pub ground_index: usize,
    /// `overlaps[t][i]`
    pub overlaps: Vec<Vec<f64>>,
    /// `ln ‖e^{−itH}ψ0‖` before normalization.
    pub log_norm: Vec<f64>,
}

impl OverlapTable {
    /// Index of the largest overlap at time sample `t`.
    pub fn dominant(&self, t: usize) -> usize {
        let row = &self.overlaps[t];
        (0..row.len())
            .max_by(|&a, &b| row[a].total_cmp(&row[b]))
            .expect("non-empty overlap row")
    }

    pub fn ground_is_dominant(&self, t: usize) -> bool {
        let row = &self.overlaps[t];
        let g = row[self.ground_index];
        row.iter().all(|&o| o <= g)
    }
}

/// Evolve `psi0` by spectral expansion in the right eigenvectors.
pub fn overlap_dynamics(
    params: &ModelParams,
    psi0: InitialState,
    times: &[f64],
) -> Result<OverlapTable> {
    for w in times.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Validation("times must be ascending".into()));
        }
    }
    for &t in times {
        ensure_finite("time", t)?;
        if t < 0.0 {
            return Err(Error::Validation(format!("time must be non-negative, got {t}")));
        }
    }
    let (spec, gs) = solve(params)?;
    let dim = spec.len();
    let v = &spec.right_eigenvectors;
    let phi = InitialState::dense_vector(psi0, params.l);
    let rhs = Mat::from_fn(dim, 1, |i, _| phi[i]);
    let coeffs = v.partial_piv_lu().solve(&rhs);
    let max_im = spec
        .eigenvalues
        .iter()
        .map(|e| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut overlaps = Vec::with_capacity(times.len());
    let mut log_norm = Vec::with_capacity(times.len());
    for &t in times {
        // e^{-iλt} = e^{Im λ t} e^{-i Re λ t}; the common factor e^{max Im · t} is carried in the log.
        let weights: Vec<c64> = (0..dim)
            .map(|i| {
                let lam = spec.eigenvalues[i];
                let mag = ((lam.im - max_im) * t).exp();
                let phase = -lam.re * t;
                coeffs[(i, 0)] * c64::new(mag * phase.cos(), mag * phase.sin())
            })
            .collect();
        let w = Mat::from_fn(dim, 1, |i, _| weights[i]);
        let psi = v * &w;
        let psi = psi.col_as_slice(0);
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical(format!("state vanished at t = {t}")));
        }
        log_norm.push(norm.ln() + max_im * t);
        let row: Vec<f64> = (0..dim)
            .map(|i| {
                let vi = v.col_as_slice(i);
                let ov: c64 = psi.iter().zip(vi).map(|(a, b)| a.conj() * b).sum();
                ov.norm() / norm
            })
            .collect();
        overlaps.push(row);
    }
    Ok(OverlapTable {
        times: times.to_vec(),
        eigenvalues: spec.eigenvalues,
        ground_index: gs.index,
        overlaps,
        log_norm,
    })
}

/// Matrix-free normalized propagation `ψ(t) = e^{−itH}ψ0 / ‖·‖`.
///
/// Advances in chunks of length at most `1/‖H‖_∞` with a Taylor series
/// summed to machine precision, renormalizing after every chunk.
#[derive(Clone, Debug)]
pub struct DenseEvolver {
    params: ModelParams,
    diag: Vec<c64>,
    max_chunk: f64,
    state: Vec<c64>,
    log_norm: f64,
    time: f64,
}

impl DenseEvolver {
    pub fn new(params: &ModelParams, psi0: Vec<c64>) -> Result<Self> {
        params.validate()?;
        check_dense_sites(params.l)?;
        if psi0.len() != 1 << params.l {
            return Err(Error::Validation(format!(
                "state has {} amplitudes, expected {}",
                psi0.len(),
                1usize << params.l
            )));
        }
        let diag = hamiltonian_diagonal(params);
        let bound = diag.iter().map(|d| d.norm()).fold(0.0, f64::max)
            + params.l as f64 * params.hx.abs();
        let max_chunk = if bound > 0.0 { 1.0 / bound } else { f64::INFINITY };
        let mut ev = Self {
            params: *params,
            diag,
            max_chunk,
            state: psi0,
            log_norm: 0.0,
            time: 0.0,
        };
        ev.normalize()?;
        ev.log_norm = 0.0;
        Ok(ev)
    }

    pub fn from_initial(params: &ModelParams, psi0: InitialState) -> Result<Self> {
        Self::new(params, psi0.dense_vector(params.l))
    }

    pub fn state(&self) -> &[c64] {
        &self.state
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn normalize(&mut self) -> Result<f64> {
        let norm = self.state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical(format!(
                "state norm {norm} at t = {}",
                self.time
            )));
        }
        for a in &mut self.state {
            *a /= norm;
        }
        self.log_norm += norm.ln();
        Ok(norm)
    }

    /// Advance by `dt ≥ 0`.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        ensure_finite("dt", dt)?;
        if dt < 0.0 {
            return Err(Error::Validation(format!("dt must be non-negative, got {dt}")));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let chunks = (dt / self.max_chunk).ceil().max(1.0) as usize;
        let h = dt / chunks as f64;
        let dim = self.state.len();
        let mut term = vec![c64::new(0.0, 0.0); dim];
        let mut next = vec![c64::new(0.0, 0.0); dim];
        for _ in 0..chunks {
            term.copy_from_slice(&self.state);
            let mut acc = self.state.clone();
            for k in 1..=60 {
                apply_hamiltonian(&self.params, &self.diag, &term, &mut next);
                let f = c64::new(0.0, -h / k as f64);
                let mut tn = 0.0;
                for (t, n) in term.iter_mut().zip(&next) {
                    *t = n * f;
                    tn += t.norm_sqr();
                }
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a += t;
                }
                let an: f64 = acc.iter().map(|a| a.norm_sqr()).sum();
                if tn <= 1e-34 * an {
                    break;
                }
            }
            self.state = acc;
            self.normalize()?;
            self.time += h;
        }
        Ok(())
    }

    pub fn magnetization(&self, axis: Axis) -> f64 {
        magnetization(axis, self.params.l, &self.state)
    }
}

/// Apply `f` to every grid value, in parallel when enabled, keeping grid order.
pub(crate) fn map_grid<T: Send>(
    values: &[f64],
    f: impl Fn(f64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_iter().map(|&g| f(g)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.iter().map(|&g| f(g)).collect()
    }
}
