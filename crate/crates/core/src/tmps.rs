//! Nonunitary time evolution on open-boundary matrix product states.
//!
//! One step is the symmetric split `U_odd(dt/2) U_even(dt) U_odd(dt/2)` of
//! two-site gates, each applied at the orthogonality center and split by a
//! truncated SVD, followed by a single renormalization of the state.

use faer::{c64, Mat};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::expm;
use crate::model::{check_dense_sites, site_mask, Axis, InitialState, ModelParams};
use crate::quench::{Provenance, QuenchSeries};

pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_CUTOFF: f64 = 1e-10;
pub const DEFAULT_CHI_MAX: usize = 64;
/// Largest `|‖ψ‖ − 1|` a measurement accepts.
pub const NORM_GUARD: f64 = 1e-6;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Rank-3 site tensor `A[a, s, b]` stored left-grouped as a `(2·dl) × dr`
/// matrix with row `2a + s`.
#[derive(Clone, Debug)]
pub struct SiteTensor {
    dl: usize,
    dr: usize,
    data: Mat<c64>,
}

impl SiteTensor {
    fn from_left(data: Mat<c64>) -> Self {
        debug_assert_eq!(data.nrows() % 2, 0);
        Self {
            dl: data.nrows() / 2,
            dr: data.ncols(),
            data,
        }
    }

    /// `dl × (2·dr)` regrouping with column `s·dr + b`.
    fn to_right(&self) -> Mat<c64> {
        let dr = self.dr;
        Mat::from_fn(self.dl, 2 * dr, |a, col| {
            self.data[(2 * a + col / dr, col % dr)]
        })
    }

    fn from_right(m: &Mat<c64>) -> Self {
        let dl = m.nrows();
        let dr = m.ncols() / 2;
        Self {
            dl,
            dr,
            data: Mat::from_fn(2 * dl, dr, |row, b| m[(row / 2, (row % 2) * dr + b)]),
        }
    }

    pub fn left_dim(&self) -> usize {
        self.dl
    }

    pub fn right_dim(&self) -> usize {
        self.dr
    }

    pub fn get(&self, a: usize, s: usize, b: usize) -> c64 {
        self.data[(2 * a + s, b)]
    }
}

#[derive(Clone, Debug)]
pub struct MpsState {
    tensors: Vec<SiteTensor>,
    /// Sum of `ln` of every factor divided out by normalization.
    pub log_norm: f64,
    ortho_center: Option<usize>,
    /// Discarded weight `Σ s²_dropped / Σ s²` accumulated over all splits.
    pub truncation_weight: f64,
}

impl MpsState {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn site(&self, i: usize) -> &SiteTensor {
        &self.tensors[i]
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    /// Bond dimensions between neighbouring sites, length `L − 1`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.dr).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Move the orthogonality center to `target` by QR (rightwards) or LQ
    /// (leftwards) sweeps.
    fn move_center(&mut self, target: usize) {
        let mut c = match self.ortho_center {
            Some(c) => c,
            None => {
                self.canonicalize();
                self.ortho_center.expect("canonicalize sets a center")
            }
        };
        while c < target {
            let qr = self.tensors[c].data.qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            self.tensors[c] = SiteTensor::from_left(q);
            let next = &r * self.tensors[c + 1].to_right();
            self.tensors[c + 1] = SiteTensor::from_right(&next);
            c += 1;
        }
        while c > target {
            let m = self.tensors[c].to_right();
            let qr = m.adjoint().to_owned().qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            self.tensors[c] = SiteTensor::from_right(&q.adjoint().to_owned());
            let prev = &self.tensors[c - 1].data * r.adjoint();
            self.tensors[c - 1] = SiteTensor::from_left(prev);
            c -= 1;
        }
        self.ortho_center = Some(c);
    }

    fn canonicalize(&mut self) {
        self.ortho_center = Some(self.len() - 1);
        for c in 0..self.len() - 1 {
            let qr = self.tensors[c].data.qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            self.tensors[c] = SiteTensor::from_left(q);
            let next = &r * self.tensors[c + 1].to_right();
            self.tensors[c + 1] = SiteTensor::from_right(&next);
        }
    }

    fn center_norm(&self) -> f64 {
        let c = self.ortho_center.expect("center is tracked during evolution");
        self.tensors[c].data.norm_l2()
    }

    /// Divide by the 2-norm and record it; returns the factor.
    fn normalize(&mut self) -> Result<f64> {
        if self.ortho_center.is_none() {
            self.canonicalize();
        }
        let norm = self.center_norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical(format!("MPS norm became {norm}")));
        }
        let c = self.ortho_center.expect("set above");
        let inv = c64::new(1.0 / norm, 0.0);
        let t = &mut self.tensors[c].data;
        for j in 0..t.ncols() {
            for a in t.col_as_slice_mut(j) {
                *a *= inv;
            }
        }
        self.log_norm += norm.ln();
        Ok(norm)
    }

    /// Apply a 4×4 two-site gate on sites `(i, i+1)` and split, leaving the
    /// center on `i + 1` when `rightward` and on `i` otherwise.
    fn apply_two_site(
        &mut self,
        i: usize,
        gate: &Mat<c64>,
        cutoff: f64,
        chi_max: usize,
        rightward: bool,
    ) -> Result<f64> {
        let c = self.ortho_center.expect("center is tracked during evolution");
        self.move_center(if c <= i { i } else { i + 1 });
        let a = &self.tensors[i];
        let b = &self.tensors[i + 1];
        let (dl, dr) = (a.dl, b.dr);
        let theta = &a.data * b.to_right();
        // θ rows (a, s1), columns (s2, b)
        let mut out = Mat::<c64>::zeros(2 * dl, 2 * dr);
        for x in 0..dl {
            for y in 0..dr {
                let mut v = [ZERO; 4];
                for s1 in 0..2 {
                    for s2 in 0..2 {
                        v[2 * s1 + s2] = theta[(2 * x + s1, s2 * dr + y)];
                    }
                }
                for t1 in 0..2 {
                    for t2 in 0..2 {
                        let row = 2 * t1 + t2;
                        let mut acc = ZERO;
                        for (k, vk) in v.iter().enumerate() {
                            acc += gate[(row, k)] * vk;
                        }
                        out[(2 * x + t1, t2 * dr + y)] = acc;
                    }
                }
            }
        }
        let svd = out.thin_svd().map_err(|_| Error::Svd { bond: i })?;
        let s = svd.S();
        let u = svd.U();
        let v = svd.V();
        let k_all = s.dim();
        let sv: Vec<f64> = (0..k_all).map(|k| s[k].re).collect();
        if sv.iter().any(|x| !x.is_finite()) {
            return Err(Error::Svd { bond: i });
        }
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let mut keep = sv.iter().filter(|&&x| x >= cutoff * smax && x > 0.0).count();
        keep = keep.clamp(1, chi_max);
        let total: f64 = sv.iter().map(|x| x * x).sum();
        let dropped: f64 = sv[keep..].iter().map(|x| x * x).sum();
        let weight = if total > 0.0 { dropped / total } else { 0.0 };
        let (left, right) = if rightward {
            (
                Mat::from_fn(2 * dl, keep, |r, k| u[(r, k)]),
                Mat::from_fn(keep, 2 * dr, |k, col| v[(col, k)].conj() * sv[k]),
            )
        } else {
            (
                Mat::from_fn(2 * dl, keep, |r, k| u[(r, k)] * sv[k]),
                Mat::from_fn(keep, 2 * dr, |k, col| v[(col, k)].conj()),
            )
        };
        self.tensors[i] = SiteTensor::from_left(left);
        self.tensors[i + 1] = SiteTensor::from_right(&right);
        self.ortho_center = Some(if rightward { i + 1 } else { i });
        self.truncation_weight += weight;
        Ok(weight)
    }

    /// `(Σ_j ⟨σˣ_j⟩, Σ_j ⟨σʸ_j⟩, Σ_j ⟨σᶻ_j⟩)` by environment contraction.
    ///
    /// Fails when `|‖ψ‖ − 1| > NORM_GUARD`.
    pub fn pauli_sums(&self) -> Result<[c64; 3]> {
        let l = self.len();
        // left[k] contracts sites 0..k, right[k] contracts sites k..l
        let mut left = vec![Mat::<c64>::identity(1, 1)];
        for t in &self.tensors {
            let prev = left.last().expect("seeded");
            left.push(transfer_left(prev, t, None));
        }
        let norm_sq = left[l][(0, 0)].re;
        let norm = norm_sq.max(0.0).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_GUARD {
            return Err(Error::Unnormalized { norm });
        }
        let mut right = vec![Mat::<c64>::identity(1, 1); l + 1];
        for k in (0..l).rev() {
            right[k] = transfer_right(&right[k + 1], &self.tensors[k], None);
        }
        let mut sums = [ZERO; 3];
        for (slot, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
            let p = axis.pauli();
            for k in 0..l {
                let e = transfer_left(&left[k], &self.tensors[k], Some(&p));
                let r = &right[k + 1];
                let mut acc = ZERO;
                for x in 0..e.nrows() {
                    for y in 0..e.ncols() {
                        acc += e[(x, y)] * r[(x, y)];
                    }
                }
                sums[slot] += acc;
            }
        }
        Ok(sums)
    }

    /// Squared 2-norm by full contraction.
    pub fn norm_sq(&self) -> f64 {
        let mut env = Mat::<c64>::identity(1, 1);
        for t in &self.tensors {
            env = transfer_left(&env, t, None);
        }
        env[(0, 0)].re
    }

    pub fn magnetization(&self, axis: Axis) -> Result<f64> {
        let sums = self.pauli_sums()?;
        let i = match axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        Ok(sums[i].norm() / self.len() as f64)
    }

    /// Contract to a `2^L` amplitude vector (site 1 most significant).
    pub fn to_dense(&self) -> Result<Vec<c64>> {
        let l = self.len();
        check_dense_sites(l)?;
        let mut amps = vec![ZERO; 1 << l];
        for (b, amp) in amps.iter_mut().enumerate() {
            let mut row = vec![c64::new(1.0, 0.0)];
            for (k, t) in self.tensors.iter().enumerate() {
                let s = usize::from(b & site_mask(k + 1, l) != 0);
                let mut next = vec![ZERO; t.dr];
                for (a, ra) in row.iter().enumerate() {
                    for (y, n) in next.iter_mut().enumerate() {
                        *n += ra * t.data[(2 * a + s, y)];
                    }
                }
                row = next;
            }
            *amp = row[0];
        }
        Ok(amps)
    }
}

/// `E'[b, b'] = Σ conj(A[a, s, b]) O[s, s'] E[a, a'] A[a', s', b']`, with `O = 1` for `None`.
fn transfer_left(env: &Mat<c64>, t: &SiteTensor, op: Option<&[[c64; 2]; 2]>) -> Mat<c64> {
    let dl = t.dl;
    let dr = t.dr;
    let id = [[c64::new(1.0, 0.0), ZERO], [ZERO, c64::new(1.0, 0.0)]];
    let o = op.unwrap_or(&id);
    let mut out = Mat::<c64>::zeros(dr, dr);
    for s in 0..2 {
        for sp in 0..2 {
            let w = o[s][sp];
            if w == ZERO {
                continue;
            }
            let a_s = Mat::from_fn(dl, dr, |a, b| t.data[(2 * a + s, b)]);
            let a_sp = Mat::from_fn(dl, dr, |a, b| t.data[(2 * a + sp, b)] * w);
            out += a_s.adjoint() * env * a_sp;
        }
    }
    out
}

/// `E'[a, a'] = Σ A[a', s, b'] E[b, b'] conj(A[a, s, b])` contracted from the right,
/// indexed so that `Σ_{x,y} L[x,y] R[x,y]` closes the network.
fn transfer_right(env: &Mat<c64>, t: &SiteTensor, op: Option<&[[c64; 2]; 2]>) -> Mat<c64> {
    let dl = t.dl;
    let dr = t.dr;
    let id = [[c64::new(1.0, 0.0), ZERO], [ZERO, c64::new(1.0, 0.0)]];
    let o = op.unwrap_or(&id);
    let mut out = Mat::<c64>::zeros(dl, dl);
    for s in 0..2 {
        for sp in 0..2 {
            let w = o[s][sp];
            if w == ZERO {
                continue;
            }
            let a_s = Mat::from_fn(dl, dr, |a, b| t.data[(2 * a + s, b)]);
            let a_sp = Mat::from_fn(dl, dr, |a, b| t.data[(2 * a + sp, b)] * w);
            out += a_s.conjugate() * env * a_sp.transpose();
        }
    }
    out
}

pub fn init_product_state(l: usize, kind: InitialState) -> Result<MpsState> {
    if l < 2 {
        return Err(Error::Validation(format!("MPS needs L >= 2, got {l}")));
    }
    let amp = kind.local_amplitudes();
    let tensors = (0..l)
        .map(|_| SiteTensor::from_left(Mat::from_fn(2, 1, |s, _| amp[s])))
        .collect();
    Ok(MpsState {
        tensors,
        log_norm: 0.0,
        ortho_center: Some(0),
        truncation_weight: 0.0,
    })
}

/// Two-site gates of one Trotter step.
///
/// Bond `i` (0-based) couples sites `i` and `i + 1`; odd bonds in 1-based
/// counting are the even 0-based indices.
#[derive(Clone, Debug)]
pub struct TrotterGateSet {
    pub l: usize,
    pub dt: f64,
    pub cutoff: f64,
    pub chi_max: usize,
    generators: Vec<Mat<c64>>,
    /// `exp(−i(dt/2)h_i)` for 0-based even `i`.
    pub odd_half_gates: Vec<Mat<c64>>,
    /// `exp(−i·dt·h_i)` for 0-based odd `i`.
    pub even_gates: Vec<Mat<c64>>,
}

impl TrotterGateSet {
    /// Local generator `h_i` on the 4-dimensional space of sites `(i, i+1)`.
    pub fn local_generator(&self, bond: usize) -> &Mat<c64> {
        &self.generators[bond]
    }

    pub fn bonds(&self) -> usize {
        self.generators.len()
    }
}

/// Two-site generator of bond `i`: the Ising term plus `−h_x σˣ + iγ σᶻ`
/// on each site, weighted 1 on the chain ends and ½ in the bulk.
fn local_generator(params: &ModelParams, bond: usize) -> Mat<c64> {
    let l = params.l;
    let weight = |site: usize| if site == 0 || site == l - 1 { 1.0 } else { 0.5 };
    let single = |w: f64| -> [[c64; 2]; 2] {
        let x = Axis::X.pauli();
        let z = Axis::Z.pauli();
        let mut m = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = x[r][c] * (-params.hx * w) + z[r][c] * c64::new(0.0, params.gamma * w);
            }
        }
        m
    };
    let f1 = single(weight(bond));
    let f2 = single(weight(bond + 1));
    Mat::from_fn(4, 4, |row, col| {
        let (t1, t2) = (row / 2, row % 2);
        let (s1, s2) = (col / 2, col % 2);
        let mut v = ZERO;
        if row == col {
            let z1 = if s1 == 0 { 1.0 } else { -1.0 };
            let z2 = if s2 == 0 { 1.0 } else { -1.0 };
            v += c64::new(-params.j * z1 * z2, 0.0);
        }
        if t2 == s2 {
            v += f1[t1][s1];
        }
        if t1 == s1 {
            v += f2[t2][s2];
        }
        v
    })
}

pub fn build_trotter_gates(
    params: &ModelParams,
    dt: f64,
    cutoff: f64,
    chi_max: usize,
) -> Result<TrotterGateSet> {
    params.validate()?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    if params.l < 2 || params.l % 2 != 0 {
        return Err(Error::Validation(format!(
            "Trotter splitting needs an even L >= 2, got {}",
            params.l
        )));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::Validation(format!("cutoff must lie in (0, 1), got {cutoff}")));
    }
    if chi_max < 2 {
        return Err(Error::Validation(format!("chi_max must be at least 2, got {chi_max}")));
    }
    let generators: Vec<Mat<c64>> = (0..params.l - 1)
        .map(|b| local_generator(params, b))
        .collect();
    let gate = |h: &Mat<c64>, tau: f64| {
        let f = c64::new(0.0, -tau);
        expm(&Mat::from_fn(4, 4, |r, c| h[(r, c)] * f))
    };
    let odd_half_gates = generators.iter().step_by(2).map(|h| gate(h, 0.5 * dt)).collect();
    let even_gates = generators.iter().skip(1).step_by(2).map(|h| gate(h, dt)).collect();
    Ok(TrotterGateSet {
        l: params.l,
        dt,
        cutoff,
        chi_max,
        generators,
        odd_half_gates,
        even_gates,
    })
}

/// Diagnostics of one `evolve_step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub log_norm_increment: f64,
    pub truncation_weight: f64,
}

fn apply_layer(
    state: &mut MpsState,
    first_bond: usize,
    gates: &[Mat<c64>],
    cutoff: f64,
    chi_max: usize,
) -> Result<f64> {
    let bonds: Vec<usize> = (0..gates.len()).map(|k| first_bond + 2 * k).collect();
    let c = state.ortho_center.unwrap_or(0);
    let last = *bonds.last().unwrap_or(&first_bond);
    let rightward = c.abs_diff(first_bond) <= c.abs_diff(last + 1);
    let mut weight = 0.0;
    if rightward {
        for (k, &b) in bonds.iter().enumerate() {
            weight += state.apply_two_site(b, &gates[k], cutoff, chi_max, true)?;
        }
    } else {
        for (k, &b) in bonds.iter().enumerate().rev() {
            weight += state.apply_two_site(b, &gates[k], cutoff, chi_max, false)?;
        }
    }
    Ok(weight)
}

/// One second-order Trotter step followed by renormalization.
pub fn evolve_step(state: &mut MpsState, gates: &TrotterGateSet) -> Result<StepReport> {
    if state.len() != gates.l {
        return Err(Error::Validation(format!(
            "state has {} sites but gates were built for {}",
            state.len(),
            gates.l
        )));
    }
    if state.ortho_center.is_none() {
        state.canonicalize();
    }
    let before = state.log_norm;
    let mut weight = apply_layer(state, 0, &gates.odd_half_gates, gates.cutoff, gates.chi_max)?;
    weight += apply_layer(state, 1, &gates.even_gates, gates.cutoff, gates.chi_max)?;
    weight += apply_layer(state, 0, &gates.odd_half_gates, gates.cutoff, gates.chi_max)?;
    state.normalize()?;
    Ok(StepReport {
        log_norm_increment: state.log_norm - before,
        truncation_weight: weight,
    })
}

pub fn measure_mx(state: &MpsState) -> Result<f64> {
    state.magnetization(Axis::X)
}

pub fn measure_mz(state: &MpsState) -> Result<f64> {
    state.magnetization(Axis::Z)
}

pub fn measure_my(state: &MpsState) -> Result<f64> {
    state.magnetization(Axis::Y)
}

/// Number of steps of length `dt` that make up `t_total`, if it divides.
pub(crate) fn step_count(t_total: f64, dt: f64) -> Result<usize> {
    ensure_finite("T", t_total)?;
    ensure_finite("dt", dt)?;
    if t_total < 0.0 {
        return Err(Error::Validation(format!("T must be non-negative, got {t_total}")));
    }
    if dt <= 0.0 {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    let n = (t_total / dt).round();
    if (n * dt - t_total).abs() > 1e-9 * t_total.max(1.0) {
        return Err(Error::Validation(format!(
            "dt = {dt} does not divide T = {t_total}"
        )));
    }
    Ok(n as usize)
}

/// Settings of a tMPS run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsSettings {
    pub dt: f64,
    pub cutoff: f64,
    pub chi_max: usize,
    pub sample_stride: usize,
}

impl Default for MpsSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            cutoff: DEFAULT_CUTOFF,
            chi_max: DEFAULT_CHI_MAX,
            sample_stride: 1,
        }
    }
}

/// Evolve `psi0` to time `t_total`, sampling every `sample_stride` steps and at the end.
pub fn run_quench(
    params: &ModelParams,
    psi0: InitialState,
    t_total: f64,
    settings: MpsSettings,
) -> Result<QuenchSeries> {
    let steps = step_count(t_total, settings.dt)?;
    if settings.sample_stride == 0 {
        return Err(Error::Validation("sample stride must be at least 1".into()));
    }
    let gates = build_trotter_gates(params, settings.dt, settings.cutoff, settings.chi_max)?;
    let mut state = init_product_state(params.l, psi0)?;
    let mut series = QuenchSeries::new(Provenance::mps(params, psi0, t_total, settings));
    let record = |series: &mut QuenchSeries, state: &MpsState, step: usize| -> Result<()> {
        let sums = state.pauli_sums()?;
        let l = state.len() as f64;
        series.push(
            step as f64 * settings.dt,
            sums[0].norm() / l,
            sums[2].norm() / l,
            state.log_norm,
            Some(state.max_bond()),
        );
        Ok(())
    };
    record(&mut series, &state, 0)?;
    for step in 1..=steps {
        evolve_step(&mut state, &gates)?;
        if step % settings.sample_stride == 0 || step == steps {
            record(&mut series, &state, step)?;
        }
    }
    series.truncation_weight = Some(state.truncation_weight);
    Ok(series)
}
