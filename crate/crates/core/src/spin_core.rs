//! Tensor-product Hilbert space of the charger chain and the battery qubits.
//!
//! Ordering convention: tensor factors `1..=L` are the charger sites and
//! factors `L+1..=L+n_b` are the battery qubits. Factor `k` lives on bit
//! `L + n_b - k` of the basis-state index (big-endian), so the index splits as
//! `charger_index * 2^n_b + battery_index`. Bit value 0 is spin up
//! (`sigma^z = +1`), which is also the battery ground state `|0>`.

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, I, ONE, ZERO};

/// Charger length, battery count and the spacing of the coupled charger sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemGeometry {
    charger_len: usize,
    battery_count: usize,
    spacing: usize,
}

impl SystemGeometry {
    pub fn new(charger_len: usize, battery_count: usize, spacing: usize) -> Result<Self> {
        if charger_len == 0 {
            return arg_err("charger length must be positive");
        }
        if spacing == 0 {
            return arg_err("qubit spacing must be positive");
        }
        if battery_count > 0 && 1 + (battery_count - 1) * spacing > charger_len {
            return arg_err(format!(
                "coupling sites 1+(i-1)*{spacing} for i=1..{battery_count} exceed charger length {charger_len}"
            ));
        }
        if charger_len + battery_count > 26 {
            return arg_err("system too large for dense simulation");
        }
        Ok(Self { charger_len, battery_count, spacing })
    }

    /// Symmetric sunburst placement: spacing `floor(L / n_b)`.
    pub fn sunburst(charger_len: usize, battery_count: usize) -> Result<Self> {
        if battery_count == 0 {
            return Self::new(charger_len, 0, 1);
        }
        if battery_count > charger_len {
            return arg_err(format!(
                "{battery_count} battery qubits cannot couple to distinct sites of a {charger_len}-site charger"
            ));
        }
        let mut spacing = (charger_len / battery_count).max(1);
        while spacing > 1 && 1 + (battery_count - 1) * spacing > charger_len {
            spacing -= 1;
        }
        Self::new(charger_len, battery_count, spacing)
    }

    pub fn charger_len(&self) -> usize {
        self.charger_len
    }

    pub fn battery_count(&self) -> usize {
        self.battery_count
    }

    pub fn spacing(&self) -> usize {
        self.spacing
    }

    pub fn n_factors(&self) -> usize {
        self.charger_len + self.battery_count
    }

    pub fn dim(&self) -> usize {
        1 << self.n_factors()
    }

    pub fn charger_dim(&self) -> usize {
        1 << self.charger_len
    }

    pub fn battery_dim(&self) -> usize {
        1 << self.battery_count
    }

    /// 1-based charger sites `1 + (i-1) d` coupled to battery `i`.
    pub fn coupling_sites(&self) -> Vec<usize> {
        (0..self.battery_count).map(|i| 1 + i * self.spacing).collect()
    }

    /// Bit position in the full basis index of 1-based tensor factor `k`.
    pub fn factor_bit(&self, factor: usize) -> usize {
        self.n_factors() - factor
    }

    /// Bit position of 1-based charger site `i` inside a charger-only index.
    pub fn charger_bit(&self, site: usize) -> usize {
        self.charger_len - site
    }

    /// Bit position of 1-based battery qubit `j` inside a battery-only index.
    pub fn battery_bit(&self, qubit: usize) -> usize {
        self.battery_count - qubit
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn matrix(self) -> Mat<c64> {
        match self {
            Axis::X => Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO }),
            Axis::Y => Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => -I,
                (1, 0) => I,
                _ => ZERO,
            }),
            Axis::Z => Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => ONE,
                (1, 1) => -ONE,
                _ => ZERO,
            }),
        }
    }

    /// Action on a single bit: returns (target bit, amplitude) for source bit `b`.
    #[inline]
    pub fn act(self, bit: usize) -> (usize, c64) {
        match (self, bit) {
            (Axis::X, b) => (b ^ 1, ONE),
            (Axis::Y, 0) => (1, I),
            (Axis::Y, _) => (0, -I),
            (Axis::Z, 0) => (0, ONE),
            (Axis::Z, _) => (1, -ONE),
        }
    }
}

/// Apply a single-site Pauli on `bit` of an `n`-bit register, `out = sigma psi`.
pub fn apply_pauli_bit(axis: Axis, bit: usize, psi: &[c64], out: &mut [c64]) {
    for (idx, &amp) in psi.iter().enumerate() {
        let (nb, a) = axis.act((idx >> bit) & 1);
        let target = (idx & !(1 << bit)) | (nb << bit);
        out[target] = a * amp;
    }
}

/// Dense `D x D` matrix of the Pauli `axis` on tensor factor `factor` (1-based).
pub fn embed_pauli(geom: &SystemGeometry, axis: Axis, factor: usize) -> Result<Mat<c64>> {
    if factor == 0 || factor > geom.n_factors() {
        return arg_err(format!(
            "factor index {factor} outside 1..={}",
            geom.n_factors()
        ));
    }
    let bit = geom.factor_bit(factor);
    let dim = geom.dim();
    let mut m = Mat::<c64>::zeros(dim, dim);
    for col in 0..dim {
        let (nb, a) = axis.act((col >> bit) & 1);
        let row = (col & !(1 << bit)) | (nb << bit);
        m[(row, col)] = a;
    }
    Ok(m)
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<c64>,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amps: Vec<c64>) -> Result<Self> {
        let n = linalg::norm(&amps);
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {n} differs from 1")));
        }
        Ok(Self { amps })
    }

    pub fn normalized(mut amps: Vec<c64>) -> Result<Self> {
        let n = linalg::norm(&amps);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self { amps }
    }

    /// Product `charger (x) battery`, both already normalized.
    pub fn product(charger: &[c64], battery: &[c64]) -> Result<Self> {
        let amps = charger
            .iter()
            .flat_map(|c| battery.iter().map(move |b| c * b))
            .collect();
        Self::new(amps)
    }

    pub(crate) fn from_raw(amps: Vec<c64>) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let n = self.amps.len();
        DensityMatrix {
            rho: Mat::from_fn(n, n, |i, j| self.amps[i] * self.amps[j].conj()),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: Mat<c64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_FLOOR: f64 = -1e-10;

    pub fn new(rho: Mat<c64>) -> Result<Self> {
        let dm = Self { rho };
        dm.validate()?;
        Ok(dm)
    }

    pub(crate) fn from_raw(rho: Mat<c64>) -> Self {
        Self { rho }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = c64::new(1.0 / dim as f64, 0.0);
        Self { rho: Mat::from_fn(dim, dim, |i, j| if i == j { p } else { ZERO }) }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        Self::new(Mat::from_fn(n, n, |i, j| {
            if i == j { c64::new(probs[i], 0.0) } else { ZERO }
        }))
    }

    pub(crate) fn from_diagonal_unchecked(probs: &[f64]) -> Self {
        let n = probs.len();
        Self::from_raw(Mat::from_fn(n, n, |i, j| {
            if i == j { c64::new(probs[i], 0.0) } else { ZERO }
        }))
    }

    pub fn validate(&self) -> Result<()> {
        let rho = self.rho.as_ref();
        if rho.nrows() != rho.ncols() {
            return Err(Error::InvalidState("density matrix not square".into()));
        }
        let herm = linalg::hermiticity_defect(rho);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(rho);
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min < Self::EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.rho.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(self.rho.as_ref())?.0)
    }

    pub fn population(&self, i: usize) -> f64 {
        self.rho[(i, i)].re
    }

    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.rho[(i, j)].norm_sqr();
            }
        }
        s
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, a: MatRef<'_, c64>) -> c64 {
        let n = self.dim();
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                s += self.rho[(i, j)] * a[(j, i)];
            }
        }
        s
    }
}

/// Battery reduced density matrix of a full-space amplitude vector.
pub(crate) fn battery_rdm_raw(amps: &[c64], geom: &SystemGeometry) -> Mat<c64> {
    let nb = geom.battery_dim();
    let nc = geom.charger_dim();
    let mut rho = Mat::<c64>::zeros(nb, nb);
    for c in 0..nc {
        let row = &amps[c * nb..(c + 1) * nb];
        for (b, &x) in row.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (bp, &y) in row.iter().enumerate() {
                rho[(b, bp)] += x * y.conj();
            }
        }
    }
    rho
}

/// Trace out the charger from a pure state of the full system.
pub fn partial_trace_battery(state: &PureState, geom: &SystemGeometry) -> Result<DensityMatrix> {
    if state.dim() != geom.dim() {
        return arg_err(format!(
            "state dimension {} does not match geometry dimension {}",
            state.dim(),
            geom.dim()
        ));
    }
    Ok(DensityMatrix::from_raw(battery_rdm_raw(state.amplitudes(), geom)))
}

/// Trace out the charger from a full-system density matrix.
pub fn partial_trace_battery_mixed(rho: &DensityMatrix, geom: &SystemGeometry) -> Result<DensityMatrix> {
    if rho.dim() != geom.dim() {
        return arg_err(format!(
            "density matrix dimension {} does not match geometry dimension {}",
            rho.dim(),
            geom.dim()
        ));
    }
    let nb = geom.battery_dim();
    let m = rho.matrix();
    let out = Mat::from_fn(nb, nb, |b, bp| {
        (0..geom.charger_dim()).map(|c| m[(c * nb + b, c * nb + bp)]).sum()
    });
    Ok(DensityMatrix::from_raw(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    pub fn eigenvalue(self) -> f64 {
        match self {
            Sector::Even => 1.0,
            Sector::Odd => -1.0,
        }
    }

    pub fn contains(self, index: usize) -> bool {
        (index.count_ones() % 2 == 0) == (self == Sector::Even)
    }
}

/// `P = prod_i sigma^z_i (x) prod_j Sigma^z_j`, diagonal in the computational basis.
pub fn parity_operator(geom: &SystemGeometry) -> Mat<c64> {
    let dim = geom.dim();
    Mat::from_fn(dim, dim, |i, j| {
        if i != j {
            ZERO
        } else if Sector::Even.contains(i) {
            ONE
        } else {
            -ONE
        }
    })
}

/// Basis indices spanning a parity sector, ascending.
pub fn sector_indices(dim: usize, sector: Sector) -> Vec<usize> {
    (0..dim).filter(|&i| sector.contains(i)).collect()
}

/// `D x D/2` isometry whose columns are the computational basis states of the sector.
pub fn parity_sector_isometry(geom: &SystemGeometry, sector: Sector) -> Mat<c64> {
    let idx = sector_indices(geom.dim(), sector);
    let mut v = Mat::<c64>::zeros(geom.dim(), idx.len());
    for (col, &row) in idx.iter().enumerate() {
        v[(row, col)] = ONE;
    }
    v
}
