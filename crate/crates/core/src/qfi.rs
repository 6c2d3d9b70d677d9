//! Quantum Fisher information of the battery state over collective-spin
//! directions and the multipartite-entanglement witness `lambda_max > n_b`.

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, ZERO};
use crate::observables::Trajectory;
use crate::spin_core::{Axis, DensityMatrix};

/// Pairs with `lambda_i + lambda_j` below this are skipped.
pub const PAIR_THRESHOLD: f64 = 1e-12;
/// Relative margin above `n_b` required before the witness fires.
pub const WITNESS_MARGIN: f64 = 1e-9;
/// Eigenvalues below this are rejected rather than clipped.
pub const NEGATIVE_LIMIT: f64 = -1e-8;

#[derive(Clone, Debug)]
pub struct RhoSpectrum {
    /// Non-negative, summing to one.
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
    /// `|1 - tr|` removed by clipping and renormalization.
    pub trace_correction: f64,
}

/// Eigenpairs of `rho` with small negative eigenvalues clipped to zero.
pub fn rho_spectral(rho: &DensityMatrix) -> Result<RhoSpectrum> {
    let (mut values, vectors) = linalg::hermitian_eigen(rho.matrix())?;
    if let Some(&min) = values.first() {
        if min < NEGATIVE_LIMIT {
            return Err(Error::InvalidState(format!("density matrix eigenvalue {min:e}")));
        }
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("density matrix has zero trace".into()));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(RhoSpectrum { values, vectors, trace_correction: (1.0 - total).abs() })
}

/// `S^alpha = (1/2) sum_k sigma^alpha_k` on `n_b` qubits.
pub fn collective_spin(n_qubits: usize, axis: Axis) -> Mat<c64> {
    let dim = 1usize << n_qubits;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for col in 0..dim {
        for bit in 0..n_qubits {
            let (flip, amp) = axis.act((col >> bit) & 1);
            let row = (col & !(1 << bit)) | (flip << bit);
            m[(row, col)] += amp * 0.5;
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaMatrix {
    pub entries: [[f64; 3]; 3],
}

impl GammaMatrix {
    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let m = Mat::from_fn(3, 3, |i, j| self.entries[i][j]);
        Ok(linalg::symmetric_eigen(m.as_ref())?.0)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().unwrap())
    }
}

/// `Gamma_ab = 2 sum_ij (l_i - l_j)^2 / (l_i + l_j) <i|S^a|j><j|S^b|i>`.
pub fn gamma_matrix(rho: &DensityMatrix, n_qubits: usize) -> Result<GammaMatrix> {
    if rho.dim() != 1 << n_qubits {
        return arg_err(format!(
            "density matrix of dimension {} is not an {n_qubits}-qubit state",
            rho.dim()
        ));
    }
    let spec = rho_spectral(rho)?;
    let v = spec.vectors.as_ref();
    let rotated: Vec<Mat<c64>> = Axis::ALL
        .iter()
        .map(|&a| v.adjoint() * collective_spin(n_qubits, a) * v)
        .collect();
    let lambda = &spec.values;
    let n = lambda.len();
    let mut weights = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = lambda[i] + lambda[j];
            if s >= PAIR_THRESHOLD {
                weights[(i, j)] = 2.0 * (lambda[i] - lambda[j]).powi(2) / s;
            }
        }
    }
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    let w = weights[(i, j)];
                    if w != 0.0 {
                        acc += rotated[a][(i, j)] * rotated[b][(j, i)] * w;
                    }
                }
            }
            g[a][b] = acc.re;
            g[b][a] = acc.re;
        }
    }
    Ok(GammaMatrix { entries: g })
}

/// `lambda > n_b`; rounding at the separable bound does not fire.
pub fn exceeds_separable_bound(lambda: f64, n_qubits: usize) -> bool {
    lambda > n_qubits as f64 * (1.0 + WITNESS_MARGIN)
}

/// `(lambda_max, lambda_max > n_b)`.
pub fn qfi_witness(gamma: &GammaMatrix, n_qubits: usize) -> Result<(f64, bool)> {
    let l = gamma.lambda_max()?;
    Ok((l, exceeds_separable_bound(l, n_qubits)))
}

#[derive(Clone, Debug, Serialize)]
pub struct QfiSeries {
    pub values: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

/// `lambda_max(Gamma)` at every kick of a trajectory.
pub fn qfi_over_trajectory(traj: &Trajectory) -> Result<QfiSeries> {
    let nb = traj.geometry().battery_count();
    let values: Vec<f64> = traj
        .rdms()
        .par_iter()
        .map(|rho| gamma_matrix(rho, nb)?.lambda_max())
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return arg_err("empty trajectory");
    }
    let (argmax, max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    Ok(QfiSeries { values, max, argmax })
}
