//! Independent oracles for the dense and MPS propagators.

use yles::ed::{eigendecompose, ground_state, DenseEvolver};
use yles::linalg::DenseOperator;
use yles::model::{build_hamiltonian, site_mask};
use yles::tmps::{build_trotter_gates, evolve_step, init_product_state};
use yles::{c64, Axis, InitialState, ModelParams};

type M = Vec<Vec<c64>>;

fn zero(n: usize) -> M {
    vec![vec![c64::new(0.0, 0.0); n]; n]
}

fn mul(a: &M, b: &M) -> M {
    let n = a.len();
    let mut c = zero(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn kron(a: &M, b: &M) -> M {
    let (n, m) = (a.len(), b.len());
    let mut c = zero(n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    c[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    c
}

fn pauli(axis: char) -> M {
    let (o, one, i) = (c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(0.0, 1.0));
    match axis {
        'x' => vec![vec![o, one], vec![one, o]],
        'y' => vec![vec![o, -i], vec![i, o]],
        'z' => vec![vec![one, o], vec![o, -one]],
        _ => vec![vec![one, o], vec![o, one]],
    }
}

/// `−h_x(X⊗1 + 1⊗X) − J Z⊗Z + iγ(Z⊗1 + 1⊗Z)` written out by hand.
fn two_site_hamiltonian(j: f64, hx: f64, gamma: f64) -> M {
    let (x, z, id) = (pauli('x'), pauli('z'), pauli('1'));
    let terms = [
        (kron(&x, &id), c64::new(-hx, 0.0)),
        (kron(&id, &x), c64::new(-hx, 0.0)),
        (kron(&z, &z), c64::new(-j, 0.0)),
        (kron(&z, &id), c64::new(0.0, gamma)),
        (kron(&id, &z), c64::new(0.0, gamma)),
    ];
    let mut h = zero(4);
    for (t, c) in terms {
        for r in 0..4 {
            for s in 0..4 {
                h[r][s] += t[r][s] * c;
            }
        }
    }
    h
}

/// Monic characteristic polynomial coefficients, highest degree first.
fn faddeev_leverrier(a: &M) -> Vec<c64> {
    let n = a.len();
    let mut coeffs = vec![c64::new(1.0, 0.0)];
    let mut mk = zero(n);
    for k in 1..=n {
        let prev = *coeffs.last().unwrap();
        let mut next = mul(a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += prev;
        }
        mk = next;
        let am = mul(a, &mk);
        let tr: c64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

fn durand_kerner(coeffs: &[c64]) -> Vec<c64> {
    let n = coeffs.len() - 1;
    let eval = |z: c64| coeffs.iter().fold(c64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = c64::new(0.4, 0.9);
    let mut roots: Vec<c64> = (0..n).map(|k| seed.powi(k as i32) * 3.0).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom: c64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| roots[i] - roots[j])
                .product();
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if moved < 1e-15 {
            break;
        }
    }
    // Newton polish on the undeflated polynomial.
    let deriv: Vec<c64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect();
    let eval_d = |z: c64| deriv.iter().fold(c64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in &mut roots {
        for _ in 0..3 {
            let d = eval_d(*r);
            if d.norm() > 1e-8 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

fn sorted(mut v: Vec<c64>) -> Vec<c64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

#[test]
fn two_site_spectrum_matches_characteristic_polynomial() {
    for &(hx, gamma) in &[(1.5, 0.0), (1.5, 0.3), (0.7, 1.2), (2.0, 0.05)] {
        let p = ModelParams::new(2, 1.0, hx, gamma).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let roots = sorted(durand_kerner(&faddeev_leverrier(&two_site_hamiltonian(1.0, hx, gamma))));
        let ours = sorted(spec.eigenvalues.clone());
        for (a, b) in ours.iter().zip(&roots) {
            assert!((a - b).norm() < 1e-7, "hx={hx} gamma={gamma}: {a} vs {b}");
        }
    }
}

/// Smallest γ at which the two-site ground energy leaves the real axis.
fn two_site_pt_point(hx: f64) -> f64 {
    let broken = |g: f64| {
        let roots = durand_kerner(&faddeev_leverrier(&two_site_hamiltonian(1.0, hx, g)));
        let min_re = roots.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
        roots
            .iter()
            .filter(|r| (r.re - min_re).abs() < 1e-6)
            .any(|r| r.im.abs() > 1e-6)
    };
    let (mut lo, mut hi) = (0.0, 5.0);
    assert!(!broken(lo) && broken(hi));
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if broken(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn two_site_ground_state_breaks_at_the_oracle_point() {
    let hx = 1.5;
    let gc = two_site_pt_point(hx);
    for (g, expect_real) in [(gc - 0.01, true), (gc + 0.01, false)] {
        let p = ModelParams::new(2, 1.0, hx, g).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let gs = ground_state(&spec, &p).unwrap();
        assert_eq!(gs.energy.im.abs() < 1e-6, expect_real, "gamma = {g}, E = {}", gs.energy);
    }
}

/// Embed a bond operator acting on 0-based sites `(b, b+1)` of an `l`-site chain.
fn embed(local: &yles::Mat<c64>, bond: usize, l: usize) -> DenseOperator {
    let (m1, m2) = (site_mask(bond + 1, l), site_mask(bond + 2, l));
    let rest = !(m1 | m2);
    let idx = |b: usize| 2 * usize::from(b & m1 != 0) + usize::from(b & m2 != 0);
    DenseOperator::from_fn(1 << l, |r, c| {
        if r & rest == c & rest {
            local[(idx(r), idx(c))]
        } else {
            c64::new(0.0, 0.0)
        }
    })
    .unwrap()
}

#[test]
fn bond_generators_sum_to_the_hamiltonian() {
    for l in [2, 4, 6] {
        let p = ModelParams::new(l, 0.8, 1.3, 0.27).unwrap();
        let gates = build_trotter_gates(&p, 0.05, 1e-10, 64).unwrap();
        let mut total = DenseOperator::zeros(1 << l).unwrap();
        for b in 0..gates.bonds() {
            total = &total + &embed(gates.local_generator(b), b, l);
        }
        let h = build_hamiltonian(&p).unwrap();
        assert!((&total - &h).max_abs() < 1e-13, "L = {l}");
    }
}

fn normalized(v: Vec<c64>) -> Vec<c64> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

#[test]
fn single_step_error_is_third_order() {
    let p = ModelParams::new(6, 1.0, 1.5, 0.2).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let errors: Vec<f64> = [0.2, 0.1]
        .iter()
        .map(|&dt| {
            let gates = build_trotter_gates(&p, dt, 1e-14, 64).unwrap();
            let mut mps = init_product_state(6, InitialState::YLeft).unwrap();
            evolve_step(&mut mps, &gates).unwrap();
            let exact = normalized(
                h.scale(c64::new(0.0, -dt)).exp().apply(&InitialState::YLeft.dense_vector(6)),
            );
            let ours = normalized(mps.to_dense().unwrap());
            exact.iter().zip(&ours).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .collect();
    let ratio = errors[0] / errors[1];
    assert!((6.0..10.0).contains(&ratio), "errors {errors:?}, ratio {ratio}");
}

#[test]
fn mps_quench_tracks_dense_evolution() {
    let p = ModelParams::new(8, 1.0, 1.5, 0.25).unwrap();
    let gates = build_trotter_gates(&p, 0.02, 1e-12, 64).unwrap();
    let mut mps = init_product_state(8, InitialState::AllDown).unwrap();
    let mut ev = DenseEvolver::from_initial(&p, InitialState::AllDown).unwrap();
    for _ in 0..50 {
        evolve_step(&mut mps, &gates).unwrap();
    }
    ev.advance(1.0).unwrap();
    let diff = (mps.magnetization(Axis::X).unwrap() - ev.magnetization(Axis::X)).abs();
    assert!(diff < 1e-3, "diff {diff}");
}
