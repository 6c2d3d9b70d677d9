//! One-period Floquet operator `U = U_cb (U_c (x) U_b)` of the kicked battery
//! and stroboscopic evolution.
//!
//! `U_c` is kept as the eigendecomposition of the charger Hamiltonian
//! (`2^L` space), `U_b` as the diagonal battery phases and `U_cb` as a product
//! of commuting `cos + i sin s^x S^x` factors, so applying `U` to a state never
//! touches a `D x D` matrix. Dense forms are built on request.

use std::f64::consts::TAU;

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, I, ONE, ZERO};
pub use crate::linalg::expm_hermitian;
use crate::model::{
    build_battery_hamiltonian, build_charger_hamiltonian, build_interaction,
    build_total_hamiltonian, initial_state_from_spectrum, ChargerSpectrum, Interaction,
    LinearOperator, ModelParams, TotalHamiltonian,
};
use crate::observables::Trajectory;
use crate::spin_core::{battery_rdm_raw, sector_indices, DensityMatrix, PureState, Sector, SystemGeometry};

/// `U_cb = exp(-i V_cb tau) = prod_j [cos(kappa tau) + i sin(kappa tau) s^x S^x]`.
#[derive(Clone, Debug)]
pub struct KickUnitary {
    dim: usize,
    cos: f64,
    sin: f64,
    masks: Vec<usize>,
}

impl KickUnitary {
    pub fn apply_in_place(&self, psi: &mut [c64], scratch: &mut [c64]) {
        if self.sin == 0.0 {
            if self.cos != 1.0 {
                for &_m in &self.masks {
                    psi.iter_mut().for_each(|a| *a *= self.cos);
                }
            }
            return;
        }
        let c = c64::new(self.cos, 0.0);
        let s = I * self.sin;
        for &mask in &self.masks {
            scratch.copy_from_slice(psi);
            for (idx, a) in psi.iter_mut().enumerate() {
                *a = c * scratch[idx] + s * scratch[idx ^ mask];
            }
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.dim, self.dim);
        let mut col = vec![ZERO; self.dim];
        let mut scratch = vec![ZERO; self.dim];
        for j in 0..self.dim {
            col.iter_mut().for_each(|x| *x = ZERO);
            col[j] = ONE;
            self.apply_in_place(&mut col, &mut scratch);
            for i in 0..self.dim {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

pub fn build_kick_unitary(interaction: &Interaction, tau: f64) -> KickUnitary {
    let theta = interaction.kappa() * tau;
    KickUnitary {
        dim: interaction.dim(),
        cos: theta.cos(),
        sin: theta.sin(),
        masks: interaction.masks().to_vec(),
    }
}

#[derive(Clone, Debug)]
pub struct FloquetOperator {
    geom: SystemGeometry,
    params: ModelParams,
    charger: ChargerSpectrum,
    charger_phases: Vec<c64>,
    battery_phases: Vec<c64>,
    kick: KickUnitary,
}

pub fn build_floquet(geom: &SystemGeometry, params: &ModelParams) -> Result<FloquetOperator> {
    let hc = build_charger_hamiltonian(geom, params)?;
    let hb = build_battery_hamiltonian(geom, params)?;
    let v = build_interaction(geom, params)?;
    let charger = ChargerSpectrum::compute(&hc)?;
    let tau = params.tau;
    let charger_phases = charger.energies.iter().map(|&e| c64::cis(-e * tau)).collect();
    let battery_phases = hb.energies().iter().map(|&e| c64::cis(-e * tau)).collect();
    Ok(FloquetOperator {
        geom: *geom,
        params: params.clone(),
        charger,
        charger_phases,
        battery_phases,
        kick: build_kick_unitary(&v, tau),
    })
}

impl FloquetOperator {
    pub fn geometry(&self) -> &SystemGeometry {
        &self.geom
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn charger_spectrum(&self) -> &ChargerSpectrum {
        &self.charger
    }

    pub fn kick(&self) -> &KickUnitary {
        &self.kick
    }

    pub fn initial_state(&self) -> Result<PureState> {
        initial_state_from_spectrum(&self.geom, &self.charger)
    }

    /// `psi <- (U_c (x) U_b) psi`.
    fn apply_free(&self, psi: &mut [c64]) {
        let nc = self.geom.charger_dim();
        let nb = self.geom.battery_dim();
        let v = self.charger.vectors.as_ref();
        // columns [0, nb) hold real parts, [nb, 2nb) imaginary parts
        let split = Mat::<f64>::from_fn(nc, 2 * nb, |c, k| {
            if k < nb { psi[c * nb + k].re } else { psi[c * nb + k - nb].im }
        });
        let coeffs = v.transpose() * &split;
        let rotated = Mat::<f64>::from_fn(nc, 2 * nb, |e, k| {
            let b = k % nb;
            let z = c64::new(coeffs[(e, b)], coeffs[(e, b + nb)]) * self.charger_phases[e];
            if k < nb { z.re } else { z.im }
        });
        let back = v * &rotated;
        for c in 0..nc {
            for b in 0..nb {
                psi[c * nb + b] = c64::new(back[(c, b)], back[(c, b + nb)]) * self.battery_phases[b];
            }
        }
    }

    /// `psi <- U psi` using the factorized form.
    pub fn apply_in_place(&self, psi: &mut [c64], scratch: &mut [c64]) {
        self.apply_free(psi);
        self.kick.apply_in_place(psi, scratch);
    }

    pub fn apply(&self, psi: &PureState) -> PureState {
        let mut amps = psi.amplitudes().to_vec();
        let mut scratch = vec![ZERO; amps.len()];
        self.apply_in_place(&mut amps, &mut scratch);
        PureState::from_raw(amps)
    }

    /// Dense `U_c` on the charger space.
    pub fn charger_unitary(&self) -> Mat<c64> {
        let v = self.charger.vectors.as_ref();
        let n = v.nrows();
        let left = Mat::from_fn(n, n, |i, k| self.charger_phases[k] * v[(i, k)]);
        let vt = linalg::to_complex(v.transpose());
        &left * &vt
    }

    /// Diagonal of `U_b` in the battery computational basis.
    pub fn battery_phases(&self) -> &[c64] {
        &self.battery_phases
    }

    /// Dense `U_c (x) U_b` on the full space.
    pub fn free_unitary(&self) -> Mat<c64> {
        let uc = self.charger_unitary();
        let nb = self.geom.battery_dim();
        let ub = Mat::from_fn(nb, nb, |i, j| if i == j { self.battery_phases[i] } else { ZERO });
        linalg::kron(uc.as_ref(), ub.as_ref())
    }

    fn dense_columns(&self, cols: &[usize], rows: Option<&[usize]>) -> Mat<c64> {
        let uc = self.charger_unitary();
        let nb = self.geom.battery_dim();
        let dim = self.geom.dim();
        let out_rows = rows.map_or(dim, |r| r.len());
        let mut m = Mat::<c64>::zeros(out_rows, cols.len());
        let mut col = vec![ZERO; dim];
        let mut scratch = vec![ZERO; dim];
        for (j, &k) in cols.iter().enumerate() {
            let (c, b) = (k / nb, k % nb);
            col.iter_mut().for_each(|x| *x = ZERO);
            for r in 0..uc.nrows() {
                col[r * nb + b] = uc[(r, c)] * self.battery_phases[b];
            }
            self.kick.apply_in_place(&mut col, &mut scratch);
            match rows {
                Some(r) => {
                    for (i, &ri) in r.iter().enumerate() {
                        m[(i, j)] = col[ri];
                    }
                }
                None => {
                    for i in 0..dim {
                        m[(i, j)] = col[i];
                    }
                }
            }
        }
        m
    }

    /// Dense `D x D` Floquet matrix.
    pub fn to_dense(&self) -> Mat<c64> {
        let all: Vec<usize> = (0..self.geom.dim()).collect();
        self.dense_columns(&all, None)
    }

    /// `V^dagger U V` for the parity-sector isometry `V`, built directly from the
    /// sector columns.
    pub fn sector_block(&self, sector: Sector) -> Mat<c64> {
        let idx = sector_indices(self.geom.dim(), sector);
        self.dense_columns(&idx, Some(&idx))
    }

    pub fn total_hamiltonian(&self) -> Result<TotalHamiltonian> {
        build_total_hamiltonian(&self.geom, &self.params)
    }
}

/// Norm drift beyond this aborts an evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Stroboscopic evolution `psi(n) = U^n psi(0)` for `n = 0..=n_kicks`.
///
/// Keeps the battery reduced density matrix and the first two moments of
/// `H_b` and of the coupled Hamiltonian at every kick; only the current full
/// state is held in memory.
pub fn evolve(u: &FloquetOperator, psi0: &PureState, n_kicks: usize) -> Result<Trajectory> {
    let geom = u.geom;
    if psi0.dim() != geom.dim() {
        return Err(Error::Argument(format!(
            "initial state dimension {} does not match {}",
            psi0.dim(),
            geom.dim()
        )));
    }
    let h = u.total_hamiltonian()?;
    let mut psi = psi0.amplitudes().to_vec();
    let mut scratch = vec![ZERO; psi.len()];
    let mut traj = Trajectory::new(geom, u.params.clone(), h.battery.clone());
    let record = |psi: &[c64], traj: &mut Trajectory| {
        let rdm = DensityMatrix::from_raw(battery_rdm_raw(psi, &geom));
        traj.push(rdm, h.battery.moments(psi), h.moments(psi));
    };
    record(&psi, &mut traj);
    for n in 1..=n_kicks {
        u.apply_in_place(&mut psi, &mut scratch);
        let norm = linalg::norm(&psi);
        if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
            return Err(Error::Numerical(format!("norm drifted to {norm} after kick {n}")));
        }
        record(&psi, &mut traj);
    }
    traj.set_final_state(PureState::from_raw(psi));
    Ok(traj)
}

/// Every full state `psi(0..=n_kicks)`; meant for small systems.
pub fn evolve_states(u: &FloquetOperator, psi0: &PureState, n_kicks: usize) -> Vec<PureState> {
    let mut out = Vec::with_capacity(n_kicks + 1);
    out.push(psi0.clone());
    for _ in 0..n_kicks {
        let next = u.apply(out.last().unwrap());
        out.push(next);
    }
    out
}

/// Closed-form single-battery model at `h = 0`, restricted to the
/// even-parity basis `{phi_0, phi_1, phi_2, phi_3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticKickModel {
    pub kappa: f64,
    pub tau: f64,
    pub delta: f64,
}

impl AnalyticKickModel {
    pub fn new(kappa: f64, tau: f64, delta: f64) -> Self {
        Self { kappa, tau, delta }
    }

    /// `epsilon = delta tau / 2`.
    pub fn epsilon(&self) -> f64 {
        0.5 * self.delta * self.tau
    }

    /// `a = cos(kappa tau) (1 + e^{2 i epsilon})`, so that `e^{-i eps} a = tr U_2x2`.
    pub fn a(&self) -> c64 {
        (ONE + c64::cis(2.0 * self.epsilon())) * (self.kappa * self.tau).cos()
    }

    /// `b = sqrt(a^2 - 4 e^{2 i epsilon})`.
    pub fn b(&self) -> c64 {
        let a = self.a();
        (a * a - c64::cis(2.0 * self.epsilon()) * 4.0).sqrt()
    }

    /// The 4x4 one-period unitary (global phase dropped).
    pub fn matrix(&self) -> [[c64; 4]; 4] {
        let (c, s) = ((self.kappa * self.tau).cos(), (self.kappa * self.tau).sin());
        let e = c64::cis(self.epsilon());
        let ec = e.conj();
        let block = [[e * c, I * s * ec], [I * s * e, ec * c]];
        let mut m = [[ZERO; 4]; 4];
        for (off, _) in [(0usize, ()), (2, ())] {
            for i in 0..2 {
                for j in 0..2 {
                    m[off + i][off + j] = block[i][j];
                }
            }
        }
        m
    }
}

/// `(F_n)_{21}` of `F_n = U^n`.
pub fn analytic_f21(model: &AnalyticKickModel, n: u32) -> c64 {
    if n == 0 {
        return ZERO;
    }
    let eps = model.epsilon();
    let a = model.a();
    let b = model.b();
    let rot = c64::cis(-eps);
    let phase = I * c64::cis(2.0 * eps);
    let sin = (model.kappa * model.tau).sin();
    if b.norm() < 1e-8 * a.norm().max(1e-300) {
        let mu = rot * a * 0.5;
        return mu.powu(n - 1) * (n as f64) * rot * phase * sin;
    }
    let plus = (rot * (a + b)).powu(n);
    let minus = (rot * (a - b)).powu(n);
    (plus - minus) / (b * 2f64.powi(n as i32)) * phase * sin
}

/// Quasi-energies `phi_m in [0, 2 pi)` of `U |psi_m> = e^{i phi_m} |psi_m>`, ascending.
#[derive(Clone, Debug)]
pub struct QuasiEnergies {
    pub phases: Vec<f64>,
    pub eigenvalues: Vec<c64>,
    /// Orthonormal eigenvectors, column `m` paired with `phases[m]`.
    pub vectors: Mat<c64>,
}

pub fn wrap_phase(x: f64) -> f64 {
    let p = x.rem_euclid(TAU) + 0.0;
    if p >= TAU { 0.0 } else { p }
}

pub fn quasienergy_decomposition(u: MatRef<'_, c64>) -> Result<QuasiEnergies> {
    let (vals, vecs) = linalg::unitary_eigen(u)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    let phase_of = |z: c64| wrap_phase(z.arg());
    order.sort_by(|&a, &b| phase_of(vals[a]).total_cmp(&phase_of(vals[b])));
    let n = vals.len();
    let vectors = Mat::from_fn(n, n, |i, m| vecs[(i, order[m])]);
    Ok(QuasiEnergies {
        phases: order.iter().map(|&k| phase_of(vals[k])).collect(),
        eigenvalues: order.iter().map(|&k| vals[k]).collect(),
        vectors,
    })
}

/// Sorted quasi-energies only (no eigenvectors).
pub fn quasienergies(u: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let mut phases: Vec<f64> = linalg::complex_eigenvalues(u)?
        .into_iter()
        .map(|z| wrap_phase(z.arg()))
        .collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};
    use crate::model::ModelParams;
    use crate::spin_core::{embed_pauli, parity_operator, Axis};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn brute_power(m: &[[c64; 4]; 4], n: u32) -> [[c64; 4]; 4] {
        let mut acc = [[ZERO; 4]; 4];
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] = ONE;
        }
        for _ in 0..n {
            let mut next = [[ZERO; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        next[i][j] += m[i][k] * acc[k][j];
                    }
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn kick_special_cases() {
        let g = SystemGeometry::sunburst(2, 1).unwrap();
        let p = ModelParams::uniform(1.0, 0.3, 0.0, 1.0, 0.4);
        let k = build_kick_unitary(&build_interaction(&g, &p).unwrap(), p.tau);
        assert!(max_abs_diff(k.to_dense().as_ref(), Mat::identity(8, 8).as_ref()) < 1e-15);

        let p = ModelParams::uniform(1.0, 0.3, FRAC_PI_2 / 0.4, 1.0, 0.4);
        let k = build_kick_unitary(&build_interaction(&g, &p).unwrap(), p.tau);
        let xx = embed_pauli(&g, Axis::X, 1).unwrap() * embed_pauli(&g, Axis::X, 3).unwrap();
        let ixx = Mat::from_fn(8, 8, |i, j| I * xx[(i, j)]);
        assert!(max_abs_diff(k.to_dense().as_ref(), ixx.as_ref()) < 1e-15);
    }

    #[test]
    fn kick_product_matches_matrix_exponential() {
        let g = SystemGeometry::new(4, 2, 2).unwrap();
        for kappa in [0.37, 1.9, 4.4] {
            let p = ModelParams::uniform(1.0, 0.3, kappa, 1.0, 0.61);
            let v = build_interaction(&g, &p).unwrap();
            let dense = expm_hermitian(v.to_dense().as_ref(), p.tau).unwrap();
            let k = build_kick_unitary(&v, p.tau).to_dense();
            assert!(max_abs_diff(k.as_ref(), dense.as_ref()) < 1e-10);
        }
    }

    #[test]
    fn floquet_factorization_and_parity() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        let p = ModelParams::uniform(1.0, 0.7, 1.3, 0.9, 0.5);
        let f = build_floquet(&g, &p).unwrap();
        let u = f.to_dense();
        assert!(unitarity_defect(u.as_ref()) < 1e-10);
        let h = f.total_hamiltonian().unwrap();
        let uc = expm_hermitian(h.charger.to_dense().as_ref(), p.tau).unwrap();
        let ub = expm_hermitian(h.battery.to_dense().as_ref(), p.tau).unwrap();
        let ucb = expm_hermitian(h.interaction.to_dense().as_ref(), p.tau).unwrap();
        let reference = &ucb * &uc * &ub;
        assert!(max_abs_diff(u.as_ref(), reference.as_ref()) < 1e-10);
        let par = parity_operator(&g);
        assert!(linalg::commutator_norm(u.as_ref(), par.as_ref()) < 1e-10);
    }

    #[test]
    fn decoupled_and_short_period_limits() {
        let g = SystemGeometry::sunburst(3, 1).unwrap();
        let p = ModelParams::uniform(1.0, 0.7, 0.0, 0.9, 0.5);
        let f = build_floquet(&g, &p).unwrap();
        assert!(max_abs_diff(f.to_dense().as_ref(), f.free_unitary().as_ref()) < 1e-14);
        let p = ModelParams::uniform(1.0, 0.7, 2.0, 0.9, 1e-12);
        let f = build_floquet(&g, &p).unwrap();
        assert!(max_abs_diff(f.to_dense().as_ref(), Mat::identity(16, 16).as_ref()) < 1e-10);
    }

    #[test]
    fn even_block_reproduces_four_by_four_matrix() {
        // phi_0 = cat(+) |0>, phi_1 = cat(-) |1>, phi_2 = (|+-> + |-+>)|0>/sqrt2,
        // phi_3 = (|+-> - |-+>)|1>/sqrt2, written in the z basis.
        let g = SystemGeometry::sunburst(2, 1).unwrap();
        let (kappa, tau, delta) = (1.3, 0.7, 0.8);
        let p = ModelParams::uniform(1.0, 0.0, kappa, delta, tau);
        let u = build_floquet(&g, &p).unwrap().to_dense();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| c64::new(x, 0.0);
        // |++>+|--> = sqrt2 (|00>+|11>)/... ; |++>-|--> = sqrt2(|01>+|10>)/...
        // |+->+|-+> = sqrt2(|00>-|11>)/... ; |+->-|-+> = sqrt2(|10>-|01>)/...
        let mut basis = vec![vec![ZERO; 8]; 4];
        basis[0][0] = r(s);
        basis[0][6] = r(s);
        basis[1][3] = r(s);
        basis[1][5] = r(s);
        basis[2][0] = r(s);
        basis[2][6] = r(-s);
        basis[3][5] = r(s);
        basis[3][3] = r(-s);
        let mut block = [[ZERO; 4]; 4];
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let ubj = linalg::matvec(u.as_ref(), bj);
                block[i][j] = linalg::inner(bi, &ubj);
            }
        }
        let expect = AnalyticKickModel::new(kappa, tau, delta).matrix();
        // the 2x2 blocks carry charger phases e^{+2iJ tau} and e^{-2iJ tau}
        let g0 = c64::cis(2.0 * tau);
        let g1 = c64::cis(-2.0 * tau);
        for i in 0..4 {
            for j in 0..4 {
                let gp = if i < 2 { g0 } else { g1 };
                assert!((block[i][j] - gp * expect[i][j]).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn analytic_f21_matches_brute_force_power() {
        let cases = [
            (1.0, 0.3, 1.0),
            (6.0, PI / 20.0, 1.0),
            (2.5, 0.9, 0.4),
            (0.3, 2.2, 3.1),
            (5.0, 0.05, 7.0),
        ];
        for (kappa, tau, delta) in cases {
            let m = AnalyticKickModel::new(kappa, tau, delta);
            let u = m.matrix();
            let mut prod = [[ZERO; 4]; 4];
            for (i, row) in prod.iter_mut().enumerate() {
                row[i] = ONE;
            }
            for n in 0..=50u32 {
                let brute = brute_power(&u, n)[1][0];
                let f = analytic_f21(&m, n);
                assert!((f.norm_sqr() - brute.norm_sqr()).abs() < 1e-10, "n={n} {f} {brute}");
                assert!((f - brute).norm() < 1e-9, "phase mismatch n={n}");
                assert!(f.norm_sqr() <= 1.0 + 1e-12);
                prod = brute_power(&u, 0);
            }
            let _ = prod;
            assert!((analytic_f21(&m, 1).norm() - (kappa * tau).sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_f21_degenerate_limit() {
        // b = 0 when cos(kappa tau) cos(eps) = +-1, e.g. kappa tau = 0 mod 2pi with eps = 0 mod pi.
        // Perturb slightly to land within the limit branch and compare with brute force.
        let tau = 0.5;
        let delta = 2.0 * PI / tau; // eps = pi
        let kappa = 2.0 * PI / tau + 1e-10;
        let m = AnalyticKickModel::new(kappa, tau, delta);
        assert!(m.b().norm() < 1e-8 * m.a().norm());
        let u = m.matrix();
        for n in 0..20 {
            let brute = brute_power(&u, n)[1][0];
            assert!((analytic_f21(&m, n) - brute).norm() < 1e-9);
        }
        assert_eq!(analytic_f21(&m, 0), ZERO);
    }

    #[test]
    fn four_by_four_is_unitary() {
        let m = AnalyticKickModel::new(2.3, 0.4, 1.7).matrix();
        let u = Mat::from_fn(4, 4, |i, j| m[i][j]);
        assert!(unitarity_defect(u.as_ref()) < 1e-12);
    }

    #[test]
    fn factorized_application_equals_dense() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        let p = ModelParams::uniform(1.0, 0.9, 1.7, 1.1, 0.45);
        let f = build_floquet(&g, &p).unwrap();
        let u = f.to_dense();
        let psi = PureState::normalized(
            (0..g.dim()).map(|k| c64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect(),
        )
        .unwrap();
        let fast = f.apply(&psi);
        let dense = linalg::matvec(u.as_ref(), psi.amplitudes());
        let err = fast
            .amplitudes()
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn evolve_zero_kicks() {
        let g = SystemGeometry::sunburst(3, 1).unwrap();
        let p = ModelParams::uniform(1.0, 0.5, 1.0, 1.0, 0.3);
        let f = build_floquet(&g, &p).unwrap();
        let t = evolve(&f, &f.initial_state().unwrap(), 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.energies()[0], 0.0);
    }

    #[test]
    fn half_pi_kicks_alternate_battery() {
        let tau = 0.3;
        let p = ModelParams::uniform(1.0, 0.0, FRAC_PI_2 / tau, 1.0, tau);
        let g = SystemGeometry::sunburst(4, 1).unwrap();
        let f = build_floquet(&g, &p).unwrap();
        let t = evolve(&f, &f.initial_state().unwrap(), 6).unwrap();
        for (n, rho) in t.rdms().iter().enumerate() {
            let p1 = rho.population(1);
            let expect = if n % 2 == 1 { 1.0 } else { 0.0 };
            assert!((p1 - expect).abs() < 1e-12, "n={n} p1={p1}");
        }
    }

    #[test]
    fn single_battery_dynamics_is_independent_of_l() {
        let p = ModelParams::uniform(1.0, 0.0, 2.3, 1.0, 0.37);
        let model = AnalyticKickModel::new(p.kappa, p.tau, p.delta);
        let mut reference: Option<Vec<f64>> = None;
        for l in [2, 3, 4, 5, 6] {
            let g = SystemGeometry::sunburst(l, 1).unwrap();
            let f = build_floquet(&g, &p).unwrap();
            let t = evolve(&f, &f.initial_state().unwrap(), 40).unwrap();
            let p1: Vec<f64> = t.rdms().iter().map(|r| r.population(1)).collect();
            for (n, v) in p1.iter().enumerate() {
                assert!((v - analytic_f21(&model, n as u32).norm_sqr()).abs() < 1e-10);
            }
            if let Some(r) = &reference {
                for (a, b) in r.iter().zip(&p1) {
                    assert!((a - b).abs() < 1e-9);
                }
            } else {
                reference = Some(p1);
            }
        }
    }

    #[test]
    fn quasienergy_special_cases() {
        let q = quasienergy_decomposition(Mat::<c64>::identity(5, 5).as_ref()).unwrap();
        assert!(q.phases.iter().all(|&p| p == 0.0));
        let thetas = [2.0, -0.5, 0.1, 3.5];
        let d = Mat::from_fn(4, 4, |i, j| if i == j { c64::cis(thetas[i]) } else { ZERO });
        let q = quasienergy_decomposition(d.as_ref()).unwrap();
        let mut expect: Vec<f64> = thetas.iter().map(|&t| wrap_phase(t)).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in q.phases.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        for (m, &phi) in q.phases.iter().enumerate() {
            assert!((c64::cis(phi) - q.eigenvalues[m]).norm() < 1e-10);
        }
    }

    #[test]
    fn quasienergy_resynthesis() {
        let g = SystemGeometry::sunburst(3, 2).unwrap();
        let p = ModelParams::uniform(1.0, 0.8, 1.1, 1.0, 0.6);
        let u = build_floquet(&g, &p).unwrap().to_dense();
        let q = quasienergy_decomposition(u.as_ref()).unwrap();
        assert!(unitarity_defect(q.vectors.as_ref()) < 1e-8);
        let n = q.phases.len();
        let scaled = Mat::from_fn(n, n, |i, m| q.vectors[(i, m)] * c64::cis(q.phases[m]));
        let rebuilt = &scaled * q.vectors.adjoint();
        assert!(max_abs_diff(rebuilt.as_ref(), u.as_ref()) < 1e-8);
        assert!(q.phases.windows(2).all(|w| w[0] <= w[1]));
        assert!(q.phases.iter().all(|&p| (0.0..TAU).contains(&p)));
        let only = quasienergies(u.as_ref()).unwrap();
        for (a, b) in only.iter().zip(&q.phases) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    fn cut_linear_entropy(v: &[c64], g: &SystemGeometry) -> f64 {
        let rho = battery_rdm_raw(v, g);
        let n = rho.nrows();
        let mut pur = 0.0;
        for i in 0..n {
            for j in 0..n {
                pur += rho[(i, j)].norm_sqr();
            }
        }
        1.0 - pur
    }

    #[test]
    fn half_pi_eigenvectors_are_products() {
        // U commutes with s^x_1 at h = 0; diagonalizing U + eta s^x_1 picks the
        // product basis inside every degenerate eigenspace of U.
        let tau = 0.4;
        let g = SystemGeometry::sunburst(2, 1).unwrap();
        let p = ModelParams::uniform(1.0, 0.0, FRAC_PI_2 / tau, 1.0, tau);
        let u = build_floquet(&g, &p).unwrap().to_dense();
        let x1 = embed_pauli(&g, Axis::X, 1).unwrap();
        assert!(linalg::commutator_norm(u.as_ref(), x1.as_ref()) < 1e-12);
        let m = Mat::from_fn(8, 8, |i, j| u[(i, j)] + x1[(i, j)] * 0.37);
        let (_, vecs) = linalg::unitary_eigen(m.as_ref()).unwrap();
        for k in 0..8 {
            let v: Vec<c64> = (0..8).map(|i| vecs[(i, k)]).collect();
            let rebuilt = linalg::matvec(u.as_ref(), &v);
            let lambda = linalg::inner(&v, &rebuilt);
            let resid = rebuilt.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm()).fold(0.0, f64::max);
            assert!(resid < 1e-10, "not an eigenvector of U");
            assert!(cut_linear_entropy(&v, &g) < 1e-8);
        }
    }

    #[test]
    fn half_pi_keeps_x_products_unentangled() {
        let tau = 0.25;
        let g = SystemGeometry::sunburst(3, 2).unwrap();
        let p = ModelParams::uniform(1.0, 0.0, FRAC_PI_2 / tau, 1.3, tau);
        let f = build_floquet(&g, &p).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [c64::new(s, 0.0), c64::new(s, 0.0)];
        let minus = [c64::new(s, 0.0), c64::new(-s, 0.0)];
        // charger |+ - +>
        let mut charger = vec![ONE];
        for site in [plus, minus, plus] {
            charger = charger.iter().flat_map(|a| site.iter().map(move |b| a * b)).collect();
        }
        let battery = [ZERO, ONE, ZERO, ZERO]; // |01>
        let psi = PureState::product(&charger, &battery).unwrap();
        let t = evolve(&f, &psi, 12).unwrap();
        for rho in t.rdms() {
            assert!(1.0 - rho.purity() < 1e-10);
        }
    }

    #[test]
    fn sector_block_matches_projection() {
        let g = SystemGeometry::sunburst(3, 2).unwrap();
        let p = ModelParams::uniform(1.0, 0.6, 0.9, 1.0, 0.7);
        let f = build_floquet(&g, &p).unwrap();
        let u = f.to_dense();
        for sector in [Sector::Even, Sector::Odd] {
            let v = crate::spin_core::parity_sector_isometry(&g, sector);
            let proj = v.adjoint() * &u * &v;
            assert!(max_abs_diff(proj.as_ref(), f.sector_block(sector).as_ref()) < 1e-14);
        }
    }

    mod props {
        use super::*;
        use crate::linalg::commutator_norm;
        use crate::model::{realize_disorder, DisorderSpec};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn floquet_is_unitary_factorized_and_parity_even(
                nb in 1usize..=2, extra in 0usize..=2,
                j in 0.1f64..3.0, h in 0.0f64..3.0, kappa in -3.0f64..3.0, delta in 0.1f64..3.0,
                tau in 0.01f64..2.0, width in 0.0f64..0.9, seed in any::<u64>(),
            ) {
                let g = SystemGeometry::sunburst(nb + extra, nb).unwrap();
                let base = ModelParams::uniform(j, h, kappa, delta, tau);
                let p = realize_disorder(&base, &g, &DisorderSpec::new(width, seed).unwrap()).unwrap();
                let f = build_floquet(&g, &p).unwrap();
                let u = f.to_dense();
                prop_assert!(unitarity_defect(u.as_ref()) < 1e-10);
                let tot = f.total_hamiltonian().unwrap();
                let uc = expm_hermitian(tot.charger.to_dense().as_ref(), tau).unwrap();
                let ub = expm_hermitian(tot.battery.to_dense().as_ref(), tau).unwrap();
                let ucb = expm_hermitian(tot.interaction.to_dense().as_ref(), tau).unwrap();
                prop_assert!(max_abs_diff(u.as_ref(), (&ucb * &uc * &ub).as_ref()) < 1e-10);
                prop_assert!(commutator_norm(u.as_ref(), parity_operator(&g).as_ref()) < 1e-10);
                let psi = f.apply(&f.initial_state().unwrap());
                prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn analytic_matrix_is_unitary(kappa in -10.0f64..10.0, tau in 0.0f64..3.0, delta in 0.0f64..5.0) {
                let m = AnalyticKickModel::new(kappa, tau, delta).matrix();
                for r in 0..4 {
                    for c in 0..4 {
                        let dot: c64 = (0..4).map(|k| m[k][r].conj() * m[k][c]).sum();
                        let want = if r == c { 1.0 } else { 0.0 };
                        prop_assert!((dot - c64::new(want, 0.0)).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
