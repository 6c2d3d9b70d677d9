//! Charger, battery and coupling Hamiltonians of the sunburst Ising battery.
//!
//! ```text
//! H_c  = -sum_{i=1}^{L} (J s^x_i s^x_{i+1} + h_i s^z_i),   s_{L+1} = s_1
//! H_b  = -(1/2) sum_j delta_j S^z_j
//! V_cb = -kappa sum_j s^x_{1+(j-1)d} S^x_j
//! ```
//!
//! Operators are kept in structured form and applied matrix-free on the full
//! space; `to_dense` is available for small systems and for verification.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, ZERO};
use crate::spin_core::{PureState, Sector, SystemGeometry};

/// Something that acts linearly on full-space amplitude vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `out = A psi`; `out` is overwritten.
    fn apply(&self, psi: &[c64], out: &mut [c64]);

    fn to_dense(&self) -> Mat<c64> {
        let n = self.dim();
        let mut m = Mat::<c64>::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            e[j] = linalg::ONE;
            self.apply(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
            e[j] = ZERO;
        }
        m
    }

    /// `<psi|A|psi>` and `<psi|A^2|psi>` for Hermitian `A`.
    fn moments(&self, psi: &[c64]) -> (f64, f64) {
        let mut a_psi = vec![ZERO; psi.len()];
        self.apply(psi, &mut a_psi);
        let mean = linalg::inner(psi, &a_psi).re;
        let sq = a_psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (mean, sq)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub j: f64,
    pub h: f64,
    pub kappa: f64,
    pub delta: f64,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_fields: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_fields: Option<Vec<f64>>,
}

impl ModelParams {
    /// Clean model with uniform fields.
    pub fn uniform(j: f64, h: f64, kappa: f64, delta: f64, tau: f64) -> Self {
        Self { j, h, kappa, delta, tau, h_fields: None, delta_fields: None }
    }

    pub fn validate(&self, geom: &SystemGeometry) -> Result<()> {
        let finite = [self.j, self.h, self.kappa, self.delta, self.tau]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return arg_err("model parameters must be finite");
        }
        if self.j <= 0.0 {
            return arg_err(format!("coupling J must be positive, got {}", self.j));
        }
        if self.tau <= 0.0 {
            return arg_err(format!("kick period tau must be positive, got {}", self.tau));
        }
        if self.delta <= 0.0 {
            return arg_err(format!("battery gap delta must be positive, got {}", self.delta));
        }
        if let Some(f) = &self.h_fields {
            if f.len() != geom.charger_len() {
                return arg_err(format!(
                    "{} transverse fields given for {} charger sites",
                    f.len(),
                    geom.charger_len()
                ));
            }
        }
        if let Some(g) = &self.delta_fields {
            if g.len() != geom.battery_count() {
                return arg_err(format!(
                    "{} battery gaps given for {} battery qubits",
                    g.len(),
                    geom.battery_count()
                ));
            }
            if g.iter().any(|&d| d <= 0.0) {
                return arg_err("battery gaps must be positive");
            }
        }
        Ok(())
    }

    pub fn fields(&self, geom: &SystemGeometry) -> Vec<f64> {
        self.h_fields
            .clone()
            .unwrap_or_else(|| vec![self.h; geom.charger_len()])
    }

    pub fn gaps(&self, geom: &SystemGeometry) -> Vec<f64> {
        self.delta_fields
            .clone()
            .unwrap_or_else(|| vec![self.delta; geom.battery_count()])
    }
}

/// Relative width and seed of a uniform disorder realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub width: f64,
    pub seed: u64,
}

impl DisorderSpec {
    pub const DEFAULT_WIDTH: f64 = 0.1;

    pub fn new(width: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&width) {
            return arg_err(format!("disorder width must lie in [0, 1), got {width}"));
        }
        Ok(Self { width, seed })
    }
}

/// Draw `h_i ~ U[h(1-w), h(1+w)]` and `delta_i ~ U[delta(1-w), delta(1+w)]`.
pub fn realize_disorder(
    params: &ModelParams,
    geom: &SystemGeometry,
    spec: &DisorderSpec,
) -> Result<ModelParams> {
    DisorderSpec::new(spec.width, spec.seed)?;
    let mut out = params.clone();
    if spec.width == 0.0 {
        out.h_fields = Some(vec![params.h; geom.charger_len()]);
        out.delta_fields = Some(vec![params.delta; geom.battery_count()]);
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = spec.width;
    let mut draw = |mean: f64| mean * (1.0 + w * (2.0 * rng.random::<f64>() - 1.0));
    out.h_fields = Some((0..geom.charger_len()).map(|_| draw(params.h)).collect());
    out.delta_fields = Some((0..geom.battery_count()).map(|_| draw(params.delta)).collect());
    Ok(out)
}

/// Transverse-field Ising ring on the charger sites.
#[derive(Clone, Debug)]
pub struct ChargerHamiltonian {
    geom: SystemGeometry,
    coupling: f64,
    fields: Vec<f64>,
}

impl ChargerHamiltonian {
    pub fn geometry(&self) -> &SystemGeometry {
        &self.geom
    }

    /// Nearest-neighbour bond masks of the periodic ring in charger-index bits.
    fn bonds(&self) -> Vec<Option<usize>> {
        let l = self.geom.charger_len();
        (1..=l)
            .map(|i| {
                let next = if i == l { 1 } else { i + 1 };
                if next == i {
                    None // L = 1: s^x_1 s^x_1 = identity
                } else {
                    Some((1 << self.geom.charger_bit(i)) | (1 << self.geom.charger_bit(next)))
                }
            })
            .collect()
    }

    fn diagonal(&self, c: usize) -> f64 {
        let l = self.geom.charger_len();
        let mut e = 0.0;
        for site in 1..=l {
            let up = (c >> self.geom.charger_bit(site)) & 1 == 0;
            e -= self.fields[site - 1] * if up { 1.0 } else { -1.0 };
        }
        e
    }

    /// `2^L x 2^L` real symmetric matrix acting on the charger alone.
    pub fn charger_matrix(&self) -> Mat<f64> {
        let nc = self.geom.charger_dim();
        let bonds = self.bonds();
        let mut m = Mat::<f64>::zeros(nc, nc);
        for c in 0..nc {
            m[(c, c)] += self.diagonal(c);
            for b in &bonds {
                match b {
                    Some(mask) => m[(c ^ mask, c)] -= self.coupling,
                    None => m[(c, c)] -= self.coupling,
                }
            }
        }
        m
    }
}

impl LinearOperator for ChargerHamiltonian {
    fn dim(&self) -> usize {
        self.geom.dim()
    }

    fn apply(&self, psi: &[c64], out: &mut [c64]) {
        let nb = self.geom.battery_dim();
        let bonds = self.bonds();
        out.iter_mut().for_each(|o| *o = ZERO);
        for (idx, &a) in psi.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let c = idx / nb;
            out[idx] += a * self.diagonal(c);
            for b in &bonds {
                match b {
                    Some(mask) => out[idx ^ (mask * nb)] -= a * self.coupling,
                    None => out[idx] -= a * self.coupling,
                }
            }
        }
    }
}

/// Uncoupled battery qubits, diagonal in the computational basis.
#[derive(Clone, Debug)]
pub struct BatteryHamiltonian {
    geom: SystemGeometry,
    gaps: Vec<f64>,
}

impl BatteryHamiltonian {
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Energy of every battery basis state, indexed by the battery bits.
    pub fn energies(&self) -> Vec<f64> {
        let n = self.geom.battery_count();
        (0..self.geom.battery_dim())
            .map(|b| {
                (1..=n)
                    .map(|q| {
                        let up = (b >> self.geom.battery_bit(q)) & 1 == 0;
                        -0.5 * self.gaps[q - 1] * if up { 1.0 } else { -1.0 }
                    })
                    .sum()
            })
            .collect()
    }

    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.gaps.iter().sum::<f64>()
    }

    pub fn max_energy(&self) -> f64 {
        0.5 * self.gaps.iter().sum::<f64>()
    }

    /// Battery-space matrix (`2^n_b` square).
    pub fn battery_matrix(&self) -> Mat<c64> {
        let e = self.energies();
        let n = e.len();
        Mat::from_fn(n, n, |i, j| if i == j { c64::new(e[i], 0.0) } else { ZERO })
    }
}

impl LinearOperator for BatteryHamiltonian {
    fn dim(&self) -> usize {
        self.geom.dim()
    }

    fn apply(&self, psi: &[c64], out: &mut [c64]) {
        let e = self.energies();
        let nb = e.len();
        for (idx, (o, &a)) in out.iter_mut().zip(psi).enumerate() {
            *o = a * e[idx % nb];
        }
    }
}

/// `V_cb` stored as its commuting `s^x S^x` summands.
#[derive(Clone, Debug)]
pub struct Interaction {
    geom: SystemGeometry,
    kappa: f64,
    /// Full-space flip mask of each summand.
    masks: Vec<usize>,
}

impl Interaction {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn masks(&self) -> &[usize] {
        &self.masks
    }

    /// (1-based charger site, 1-based battery qubit) of each summand.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.geom
            .coupling_sites()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i + 1))
            .collect()
    }

    /// Dense `s^x_{site} S^x_j` on the full space.
    pub fn summand_dense(&self, which: usize) -> Mat<c64> {
        let dim = self.geom.dim();
        let mask = self.masks[which];
        let mut m = Mat::<c64>::zeros(dim, dim);
        for col in 0..dim {
            m[(col ^ mask, col)] = linalg::ONE;
        }
        m
    }

    /// Summands are X-type Pauli strings; they commute iff every pair overlaps
    /// on an even number of sites, which for one charger site plus one battery
    /// qubit per summand means the charger sites are distinct.
    fn check_commuting(&self) -> Result<()> {
        for (a, ma) in self.masks.iter().enumerate() {
            for mb in &self.masks[a + 1..] {
                if (ma & mb) != 0 && (ma & mb).count_ones() % 2 == 1 {
                    return Err(Error::Numerical(
                        "interaction summands do not commute".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl LinearOperator for Interaction {
    fn dim(&self) -> usize {
        self.geom.dim()
    }

    fn apply(&self, psi: &[c64], out: &mut [c64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        if self.kappa == 0.0 {
            return;
        }
        for &mask in &self.masks {
            for (idx, &a) in psi.iter().enumerate() {
                out[idx ^ mask] -= a * self.kappa;
            }
        }
    }
}

/// `H_c + H_b + V_cb` with the coupling switched on.
#[derive(Clone, Debug)]
pub struct TotalHamiltonian {
    pub charger: ChargerHamiltonian,
    pub battery: BatteryHamiltonian,
    pub interaction: Interaction,
}

impl LinearOperator for TotalHamiltonian {
    fn dim(&self) -> usize {
        self.charger.dim()
    }

    fn apply(&self, psi: &[c64], out: &mut [c64]) {
        let mut tmp = vec![ZERO; psi.len()];
        self.charger.apply(psi, out);
        self.battery.apply(psi, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        self.interaction.apply(psi, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
    }
}

pub fn build_charger_hamiltonian(geom: &SystemGeometry, params: &ModelParams) -> Result<ChargerHamiltonian> {
    params.validate(geom)?;
    Ok(ChargerHamiltonian { geom: *geom, coupling: params.j, fields: params.fields(geom) })
}

pub fn build_battery_hamiltonian(geom: &SystemGeometry, params: &ModelParams) -> Result<BatteryHamiltonian> {
    params.validate(geom)?;
    Ok(BatteryHamiltonian { geom: *geom, gaps: params.gaps(geom) })
}

pub fn build_interaction(geom: &SystemGeometry, params: &ModelParams) -> Result<Interaction> {
    params.validate(geom)?;
    let masks = geom
        .coupling_sites()
        .into_iter()
        .enumerate()
        .map(|(i, site)| (1 << geom.factor_bit(site)) | (1 << geom.factor_bit(geom.charger_len() + i + 1)))
        .collect();
    let v = Interaction { geom: *geom, kappa: params.kappa, masks };
    v.check_commuting()?;
    Ok(v)
}

pub fn build_total_hamiltonian(geom: &SystemGeometry, params: &ModelParams) -> Result<TotalHamiltonian> {
    Ok(TotalHamiltonian {
        charger: build_charger_hamiltonian(geom, params)?,
        battery: build_battery_hamiltonian(geom, params)?,
        interaction: build_interaction(geom, params)?,
    })
}

/// Eigendecomposition of `H_c` in the `2^L` charger space.
#[derive(Clone, Debug)]
pub struct ChargerSpectrum {
    pub energies: Vec<f64>,
    /// Real orthonormal eigenvectors as columns.
    pub vectors: Mat<f64>,
}

impl ChargerSpectrum {
    pub fn compute(hc: &ChargerHamiltonian) -> Result<Self> {
        let (energies, vectors) = linalg::symmetric_eigen(hc.charger_matrix().as_ref())?;
        Ok(Self { energies, vectors })
    }

    /// Lowest state in the even charger-parity sector, sign fixed so that the
    /// largest-magnitude amplitude is positive.
    ///
    /// Off-degeneracy this is the unique ground state; at `h = 0` it selects
    /// the even cat `(|+...+> + |-...->)/sqrt(2)` out of the two-fold ground space.
    pub fn ground_state(&self) -> Result<Vec<f64>> {
        let e0 = self.energies[0];
        let tol = 1e-9 * e0.abs().max(1.0);
        let n = self.vectors.nrows();
        let cluster: Vec<usize> = (0..self.energies.len())
            .take_while(|&k| self.energies[k] <= e0 + tol)
            .collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for &k in &cluster {
            let even: Vec<f64> = (0..n)
                .map(|c| if Sector::Even.contains(c) { self.vectors[(c, k)] } else { 0.0 })
                .collect();
            let w = even.iter().map(|x| x * x).sum::<f64>();
            if best.as_ref().is_none_or(|(bw, _)| w > *bw + 1e-12) {
                best = Some((w, even));
            }
        }
        let (w, mut v) = best.ok_or_else(|| Error::Numerical("empty charger spectrum".into()))?;
        if w < 1e-6 {
            return Err(Error::Numerical("ground space has no even-parity component".into()));
        }
        let norm = w.sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(v)
    }
}

/// Charger ground state (x) battery ground state `|0...0>`.
pub fn initial_state(geom: &SystemGeometry, params: &ModelParams) -> Result<PureState> {
    let hc = build_charger_hamiltonian(geom, params)?;
    initial_state_from_spectrum(geom, &ChargerSpectrum::compute(&hc)?)
}

pub fn initial_state_from_spectrum(geom: &SystemGeometry, spectrum: &ChargerSpectrum) -> Result<PureState> {
    let ground: Vec<c64> = spectrum.ground_state()?.into_iter().map(|x| c64::new(x, 0.0)).collect();
    let mut battery = vec![ZERO; geom.battery_dim()];
    battery[0] = linalg::ONE;
    PureState::product(&ground, &battery).map_err(|e| Error::Numerical(format!("initial state: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator_norm, hermiticity_defect, max_abs_diff};
    use crate::spin_core::{embed_pauli, parity_operator, Axis};

    fn clean(j: f64, h: f64, kappa: f64, delta: f64) -> ModelParams {
        ModelParams::uniform(j, h, kappa, delta, 0.3)
    }

    #[test]
    fn two_site_ring_spectrum() {
        let g = SystemGeometry::sunburst(2, 0).unwrap();
        let hc = build_charger_hamiltonian(&g, &clean(1.0, 0.0, 0.0, 1.0)).unwrap();
        let dense = hc.to_dense();
        let (vals, _) = linalg::hermitian_eigen(dense.as_ref()).unwrap();
        let expected = [-2.0, -2.0, 2.0, 2.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn cat_state_energy_is_minus_l_j() {
        // (|++> + |-->)/sqrt2 = (|00> + |11>)/sqrt2
        let g = SystemGeometry::sunburst(2, 0).unwrap();
        let hc = build_charger_hamiltonian(&g, &clean(1.0, 0.0, 0.0, 1.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cat = vec![c64::new(s, 0.0), ZERO, ZERO, c64::new(s, 0.0)];
        let mut out = vec![ZERO; 4];
        hc.apply(&cat, &mut out);
        for (o, c) in out.iter().zip(&cat) {
            assert!((o - c * -2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn ground_energy_at_zero_field_is_minus_l_j() {
        for l in 2..=6 {
            let g = SystemGeometry::sunburst(l, 0).unwrap();
            let hc = build_charger_hamiltonian(&g, &clean(1.3, 0.0, 0.0, 1.0)).unwrap();
            let spec = ChargerSpectrum::compute(&hc).unwrap();
            assert!((spec.energies[0] + l as f64 * 1.3).abs() < 1e-10);
            assert!((spec.energies[1] + l as f64 * 1.3).abs() < 1e-10);
        }
    }

    #[test]
    fn battery_hamiltonian_spectra() {
        let g = SystemGeometry::sunburst(1, 1).unwrap();
        let hb = build_battery_hamiltonian(&g, &clean(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(hb.energies(), vec![-0.5, 0.5]);
        let g = SystemGeometry::sunburst(2, 2).unwrap();
        let hb = build_battery_hamiltonian(&g, &clean(1.0, 0.0, 0.0, 1.0)).unwrap();
        let mut e = hb.energies();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, vec![-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(hb.ground_energy(), -1.0);
        assert_eq!(hb.energies()[0], hb.ground_energy());
    }

    #[test]
    fn interaction_properties() {
        let g = SystemGeometry::sunburst(3, 1).unwrap();
        let v0 = build_interaction(&g, &clean(1.0, 0.5, 0.0, 1.0)).unwrap();
        assert_eq!(max_abs_diff(v0.to_dense().as_ref(), Mat::zeros(16, 16).as_ref()), 0.0);

        let v = build_interaction(&g, &clean(1.0, 0.5, 0.7, 1.0)).unwrap();
        let d = v.to_dense();
        let sq = &d * &d;
        let expect = Mat::from_fn(16, 16, |i, j| if i == j { c64::new(0.49, 0.0) } else { ZERO });
        assert!(max_abs_diff(sq.as_ref(), expect.as_ref()) < 1e-14);

        let g = SystemGeometry::new(4, 2, 2).unwrap();
        let v = build_interaction(&g, &clean(1.0, 0.5, 0.7, 1.0)).unwrap();
        assert_eq!(v.pairs(), vec![(1, 1), (3, 2)]);
        let a = v.summand_dense(0);
        let b = v.summand_dense(1);
        assert!(commutator_norm(a.as_ref(), b.as_ref()) < 1e-15);
        // summand 0 equals sigma^x_1 Sigma^x_1 from single-factor embeddings
        let x1 = embed_pauli(&g, Axis::X, 1).unwrap();
        let xb = embed_pauli(&g, Axis::X, 5).unwrap();
        assert_eq!(max_abs_diff(a.as_ref(), (&x1 * &xb).as_ref()), 0.0);
    }

    #[test]
    fn dense_builders_match_pauli_sums() {
        let g = SystemGeometry::new(3, 2, 1).unwrap();
        let p = ModelParams {
            h_fields: Some(vec![0.3, 0.9, 1.4]),
            delta_fields: Some(vec![1.1, 0.8]),
            ..clean(0.7, 1.0, 0.4, 1.0)
        };
        let dim = g.dim();
        let mut hc = Mat::<c64>::zeros(dim, dim);
        for i in 1..=3 {
            let next = if i == 3 { 1 } else { i + 1 };
            let xx = embed_pauli(&g, Axis::X, i).unwrap() * embed_pauli(&g, Axis::X, next).unwrap();
            let z = embed_pauli(&g, Axis::Z, i).unwrap();
            let hi = p.h_fields.as_ref().unwrap()[i - 1];
            hc = Mat::from_fn(dim, dim, |r, c| hc[(r, c)] - xx[(r, c)] * 0.7 - z[(r, c)] * hi);
        }
        let built = build_charger_hamiltonian(&g, &p).unwrap().to_dense();
        assert!(max_abs_diff(built.as_ref(), hc.as_ref()) < 1e-14);

        let mut hb = Mat::<c64>::zeros(dim, dim);
        for q in 1..=2 {
            let z = embed_pauli(&g, Axis::Z, 3 + q).unwrap();
            let d = p.delta_fields.as_ref().unwrap()[q - 1];
            hb = Mat::from_fn(dim, dim, |r, c| hb[(r, c)] - z[(r, c)] * (0.5 * d));
        }
        let built = build_battery_hamiltonian(&g, &p).unwrap().to_dense();
        assert!(max_abs_diff(built.as_ref(), hb.as_ref()) < 1e-14);

        // charger-space matrix embedded as H (x) I
        let small = linalg::to_complex(build_charger_hamiltonian(&g, &p).unwrap().charger_matrix().as_ref());
        let emb = linalg::kron(small.as_ref(), Mat::<c64>::identity(4, 4).as_ref());
        assert!(max_abs_diff(emb.as_ref(), hc.as_ref()) < 1e-14);
    }

    #[test]
    fn builders_commute_with_parity() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        let p = parity_operator(&g);
        let params = clean(1.0, 0.8, 1.3, 1.1);
        let h = build_total_hamiltonian(&g, &params).unwrap();
        for m in [h.charger.to_dense(), h.battery.to_dense(), h.interaction.to_dense(), h.to_dense()] {
            assert!(hermiticity_defect(m.as_ref()) < 1e-14);
            assert!(commutator_norm(m.as_ref(), p.as_ref()) < 1e-10);
        }
    }

    #[test]
    fn builders_are_identity_on_untouched_factors() {
        // charger acts only on charger sites, battery only on battery qubits
        let g = SystemGeometry::sunburst(3, 2).unwrap();
        let params = clean(1.0, 0.8, 1.3, 1.1);
        let hc = build_charger_hamiltonian(&g, &params).unwrap().to_dense();
        let hb = build_battery_hamiltonian(&g, &params).unwrap().to_dense();
        let v = build_interaction(&g, &params).unwrap().to_dense();
        for a in Axis::ALL {
            for q in 4..=5 {
                let s = embed_pauli(&g, a, q).unwrap();
                assert!(commutator_norm(hc.as_ref(), s.as_ref()) < 1e-12);
            }
            for site in 1..=3 {
                let s = embed_pauli(&g, a, site).unwrap();
                assert!(commutator_norm(hb.as_ref(), s.as_ref()) < 1e-12);
            }
            // coupled sites are 1 and 2 (spacing 1); site 3 untouched
            let s = embed_pauli(&g, a, 3).unwrap();
            assert!(commutator_norm(v.as_ref(), s.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn initial_state_cat_at_zero_field() {
        let g = SystemGeometry::sunburst(2, 1).unwrap();
        let psi = initial_state(&g, &clean(1.0, 0.0, 1.0, 1.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // charger index 0 (|00>) and 3 (|11>), battery |0>
        let mut expected = vec![ZERO; 8];
        expected[0] = c64::new(s, 0.0);
        expected[6] = c64::new(s, 0.0);
        for (a, b) in psi.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn initial_state_strong_field_is_all_up() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        let psi = initial_state(&g, &clean(1.0, 1e6, 1.0, 1.0)).unwrap();
        assert!((psi.amplitudes()[0].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn initial_state_has_zero_stored_energy() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        let params = clean(1.0, 0.7, 1.0, 1.0);
        let psi = initial_state(&g, &params).unwrap();
        let hb = build_battery_hamiltonian(&g, &params).unwrap();
        let (e, _) = hb.moments(psi.amplitudes());
        assert!((e - hb.ground_energy()).abs() < 1e-12);
    }

    #[test]
    fn disorder_is_deterministic_and_exact_at_zero_width() {
        let g = SystemGeometry::sunburst(6, 3).unwrap();
        let p = clean(1.0, 0.8, 1.0, 1.2);
        let z = realize_disorder(&p, &g, &DisorderSpec::new(0.0, 9).unwrap()).unwrap();
        assert_eq!(z.h_fields.unwrap(), vec![0.8; 6]);
        assert_eq!(z.delta_fields.unwrap(), vec![1.2; 3]);
        let spec = DisorderSpec::new(0.1, 42).unwrap();
        let a = realize_disorder(&p, &g, &spec).unwrap();
        let b = realize_disorder(&p, &g, &spec).unwrap();
        assert_eq!(a, b);
        let c = realize_disorder(&p, &g, &DisorderSpec::new(0.1, 43).unwrap()).unwrap();
        assert_ne!(a, c);
        for hi in a.h_fields.unwrap() {
            assert!((0.72..=0.88).contains(&hi));
        }
        assert!(DisorderSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn disorder_sample_mean() {
        // U[h(1-w), h(1+w)]: std = h w / sqrt(3); standard error over N draws
        let g = SystemGeometry::sunburst(1, 1).unwrap();
        let p = clean(1.0, 0.8, 1.0, 1.0);
        let w = 0.3;
        let n = 10_000;
        let mean = (0..n)
            .map(|s| realize_disorder(&p, &g, &DisorderSpec::new(w, s).unwrap()).unwrap().h_fields.unwrap()[0])
            .sum::<f64>()
            / n as f64;
        let se = 0.8 * w / 3f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.8).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn param_validation() {
        let g = SystemGeometry::sunburst(4, 2).unwrap();
        assert!(clean(-1.0, 0.0, 1.0, 1.0).validate(&g).is_err());
        let mut p = clean(1.0, 0.0, 1.0, 1.0);
        p.tau = 0.0;
        assert!(p.validate(&g).is_err());
        let p = ModelParams { h_fields: Some(vec![1.0; 3]), ..clean(1.0, 0.0, 1.0, 1.0) };
        assert!(p.validate(&g).is_err());
    }

    mod props {
        use super::*;
        use crate::linalg::{commutator_norm, hermiticity_defect};
        use crate::spin_core::parity_operator;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn builders_are_hermitian_and_conserve_parity(
                nb in 1usize..=2, extra in 0usize..=3,
                j in 0.1f64..3.0, h in 0.0f64..3.0, kappa in -3.0f64..3.0, delta in 0.1f64..3.0,
                width in 0.0f64..0.9, seed in any::<u64>(),
            ) {
                let g = SystemGeometry::sunburst(nb + extra, nb).unwrap();
                let base = ModelParams::uniform(j, h, kappa, delta, 0.5);
                let p = realize_disorder(&base, &g, &DisorderSpec::new(width, seed).unwrap()).unwrap();
                p.validate(&g).unwrap();
                let tot = build_total_hamiltonian(&g, &p).unwrap();
                let par = parity_operator(&g);
                for m in [tot.charger.to_dense(), tot.battery.to_dense(), tot.interaction.to_dense(), tot.to_dense()] {
                    prop_assert!(hermiticity_defect(m.as_ref()) < 1e-12);
                    prop_assert!(commutator_norm(m.as_ref(), par.as_ref()) < 1e-10);
                }
            }
        }
    }
}
