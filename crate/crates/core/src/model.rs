//! The non-Hermitian transverse-field Ising chain
//!
//! ```text
//! H = -Σ_j (h_x σˣ_j + J σᶻ_j σᶻ_{j+1}) + Σ_j iγ σᶻ_j
//! ```
//!
//! with open boundaries, plus the single-site Pauli embeddings used to
//! measure it. Sites are numbered `1..=L`; site 1 is the most significant
//! bit of a basis index and `|↑⟩` is the zero bit.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::DenseOperator;

/// Largest chain handled by dense matrices (`2^14 = 16384`).
pub const MAX_DENSE_SITES: usize = 14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub hx: f64,
    pub gamma: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn new(l: usize, j: f64, hx: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            l,
            j,
            hx,
            gamma,
            boundary: Boundary::Open,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Validation("L must be at least 1".into()));
        }
        ensure_finite("J", self.j)?;
        ensure_finite("hx", self.hx)?;
        ensure_finite("gamma", self.gamma)?;
        if self.gamma < 0.0 {
            return Err(Error::Validation(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    pub fn with_sites(&self, l: usize) -> Self {
        Self { l, ..*self }
    }

    pub(crate) fn check_dense(&self) -> Result<()> {
        check_dense_sites(self.l)
    }
}

pub(crate) fn check_dense_sites(l: usize) -> Result<()> {
    if l > MAX_DENSE_SITES {
        Err(Error::Size {
            l,
            max: MAX_DENSE_SITES,
        })
    } else if l == 0 {
        Err(Error::Validation("L must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// The 2×2 Pauli matrix, row-major over `(↑, ↓)`.
    pub fn pauli(self) -> [[c64; 2]; 2] {
        let o = c64::new(0.0, 0.0);
        let one = c64::new(1.0, 0.0);
        let i = c64::new(0.0, 1.0);
        match self {
            Axis::X => [[o, one], [one, o]],
            Axis::Y => [[o, -i], [i, o]],
            Axis::Z => [[one, o], [o, -one]],
        }
    }
}

/// Bit mask of 1-based `site` in an `l`-site basis index.
#[inline]
pub fn site_mask(site: usize, l: usize) -> usize {
    1 << (l - site)
}

/// σᶻ eigenvalue (+1 for ↑) of 1-based `site` in basis state `b`.
#[inline]
pub fn spin_z(b: usize, site: usize, l: usize) -> f64 {
    if b & site_mask(site, l) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dense matrix of the Hamiltonian on `2^L` states.
pub fn build_hamiltonian(params: &ModelParams) -> Result<DenseOperator> {
    params.validate()?;
    params.check_dense()?;
    let l = params.l;
    let dim = 1usize << l;
    let mut entries = faer::Mat::<c64>::zeros(dim, dim);
    for b in 0..dim {
        entries[(b, b)] = diagonal_energy(params, b);
        if params.hx != 0.0 {
            for site in 1..=l {
                entries[(b ^ site_mask(site, l), b)] += c64::new(-params.hx, 0.0);
            }
        }
    }
    Ok(DenseOperator::from_mat_unchecked(entries))
}

/// Diagonal element `⟨b|H|b⟩`: Ising bonds plus the imaginary field.
pub fn diagonal_energy(params: &ModelParams, b: usize) -> c64 {
    let l = params.l;
    let mut ising = 0.0;
    let mut mz = 0.0;
    for site in 1..=l {
        let z = spin_z(b, site, l);
        mz += z;
        if site < l {
            ising += z * spin_z(b, site + 1, l);
        }
    }
    c64::new(-params.j * ising, params.gamma * mz)
}

/// `out = H v` without forming the matrix; valid for any `L` the vector fits.
pub fn apply_hamiltonian(params: &ModelParams, diag: &[c64], v: &[c64], out: &mut [c64]) {
    let l = params.l;
    let minus_hx = c64::new(-params.hx, 0.0);
    for (b, o) in out.iter_mut().enumerate() {
        let mut acc = diag[b] * v[b];
        if params.hx != 0.0 {
            for site in 1..=l {
                acc += minus_hx * v[b ^ site_mask(site, l)];
            }
        }
        *o = acc;
    }
}

/// Diagonal of `H` for the matrix-free action.
pub fn hamiltonian_diagonal(params: &ModelParams) -> Vec<c64> {
    (0..1usize << params.l)
        .map(|b| diagonal_energy(params, b))
        .collect()
}

/// Pauli `axis` on 1-based `site`, identity elsewhere.
pub fn site_operator(axis: Axis, site: usize, l: usize) -> Result<DenseOperator> {
    check_dense_sites(l)?;
    if site == 0 || site > l {
        return Err(Error::Validation(format!(
            "site {site} out of range 1..={l}"
        )));
    }
    let dim = 1usize << l;
    let mask = site_mask(site, l);
    let p = axis.pauli();
    let mut m = faer::Mat::<c64>::zeros(dim, dim);
    for b in 0..dim {
        let s = usize::from(b & mask != 0);
        for s_out in 0..2 {
            let amp = p[s_out][s];
            if amp != c64::new(0.0, 0.0) {
                let b_out = if s_out == s { b } else { b ^ mask };
                m[(b_out, b)] += amp;
            }
        }
    }
    Ok(DenseOperator::from_mat_unchecked(m))
}

/// `(1/L) Σ_j σ^axis_j` as a dense matrix.
pub fn magnetization_operator(axis: Axis, l: usize) -> Result<DenseOperator> {
    check_dense_sites(l)?;
    let mut acc = DenseOperator::zeros(1 << l)?;
    for site in 1..=l {
        acc = &acc + &site_operator(axis, site, l)?;
    }
    Ok(acc.scale(c64::new(1.0 / l as f64, 0.0)))
}

/// `Σ_j ⟨v|σ^axis_j|v⟩` computed on the basis vector directly.
pub fn pauli_sum_expectation(axis: Axis, l: usize, v: &[c64]) -> c64 {
    assert_eq!(v.len(), 1 << l);
    let mut acc = c64::new(0.0, 0.0);
    for site in 1..=l {
        let mask = site_mask(site, l);
        for (b, &amp) in v.iter().enumerate() {
            let up = b & mask == 0;
            match axis {
                Axis::Z => {
                    let w = amp.norm_sqr();
                    acc += c64::new(if up { w } else { -w }, 0.0);
                }
                Axis::X => acc += v[b ^ mask].conj() * amp,
                Axis::Y => {
                    let phase = if up { c64::new(0.0, 1.0) } else { c64::new(0.0, -1.0) };
                    acc += v[b ^ mask].conj() * amp * phase;
                }
            }
        }
    }
    acc
}

/// `|⟨v|(1/L)Σ_j σ^axis_j|v⟩| / ⟨v|v⟩`.
pub fn magnetization(axis: Axis, l: usize, v: &[c64]) -> f64 {
    let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    pauli_sum_expectation(axis, l, v).norm() / (l as f64 * norm_sq)
}

/// Product states the quench protocol starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `|↓↓…↓⟩`
    AllDown,
    /// `|←←…←⟩_y` with `|←⟩_y = (|↑⟩ − i|↓⟩)/√2`
    YLeft,
}

impl InitialState {
    /// Single-site amplitudes `(⟨↑|φ⟩, ⟨↓|φ⟩)`.
    pub fn local_amplitudes(self) -> [c64; 2] {
        match self {
            InitialState::AllDown => [c64::new(0.0, 0.0), c64::new(1.0, 0.0)],
            InitialState::YLeft => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [c64::new(s, 0.0), c64::new(0.0, -s)]
            }
        }
    }

    pub fn dense_vector(self, l: usize) -> Vec<c64> {
        let amp = self.local_amplitudes();
        (0..1usize << l)
            .map(|b| {
                (1..=l).fold(c64::new(1.0, 0.0), |acc, site| {
                    acc * amp[usize::from(b & site_mask(site, l) != 0)]
                })
            })
            .collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            InitialState::AllDown => "all-down",
            InitialState::YLeft => "y-left",
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-down" => Ok(InitialState::AllDown),
            "y-left" => Ok(InitialState::YLeft),
            other => Err(Error::Validation(format!(
                "unknown initial state '{other}' (expected all-down or y-left)"
            ))),
        }
    }
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
