//! Quasi-energy statistics: parity-sector spectra, unfolded spacings, the
//! spacing ratio and disorder-averaged parameter scans.

use std::f64::consts::{PI, TAU};

use faer::{c64, Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::floquet::{build_floquet, quasienergies, wrap_phase};
use crate::linalg;
use crate::model::{realize_disorder, DisorderSpec, ModelParams};
use crate::spin_core::{Sector, SystemGeometry};

/// `<r>` of the circular orthogonal ensemble in the large-dimension limit.
pub const COE_RATIO: f64 = 0.5307;
/// `<r>` of uncorrelated levels, `2 ln 2 - 1`.
pub const POISSON_RATIO: f64 = 0.386_294_361_119_890_6;
/// Sectors smaller than this carry too few levels for statistics.
pub const MIN_SECTOR_DIM: usize = 16;

#[derive(Clone, Debug)]
pub struct SpectralSample {
    /// Sorted, in `[0, 2 pi)`.
    pub phases: Vec<f64>,
    pub sector_dim: usize,
    pub params: ModelParams,
    pub disorder_seed: Option<u64>,
}

/// `V^dagger U V` on one parity sector.
pub fn sector_floquet(geom: &SystemGeometry, params: &ModelParams, sector: Sector) -> Result<Mat<c64>> {
    Ok(build_floquet(geom, params)?.sector_block(sector))
}

pub fn sector_spectrum(
    geom: &SystemGeometry,
    params: &ModelParams,
    sector: Sector,
    disorder_seed: Option<u64>,
) -> Result<SpectralSample> {
    let u = sector_floquet(geom, params, sector)?;
    let phases = quasienergies(u.as_ref())?;
    Ok(SpectralSample { sector_dim: phases.len(), phases, params: params.clone(), disorder_seed })
}

fn circular_gaps(phases: &[f64]) -> Result<Vec<f64>> {
    if phases.len() < 3 {
        return arg_err("need at least three levels");
    }
    if phases.windows(2).any(|w| w[1] < w[0]) {
        return arg_err("phases must be sorted ascending");
    }
    if phases.iter().any(|p| !(0.0..TAU).contains(p)) {
        return arg_err("phases must lie in [0, 2 pi)");
    }
    let n = phases.len();
    let mut gaps: Vec<f64> = phases.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(phases[0] + TAU - phases[n - 1]);
    Ok(gaps)
}

/// `s_m = (D_s / 2 pi)(phi_{m+1} - phi_m)` including the wrap-around gap.
pub fn unfolded_spacings(phases: &[f64], sector_dim: usize) -> Result<Vec<f64>> {
    if phases.len() != sector_dim {
        return arg_err("phase count must equal the sector dimension");
    }
    let scale = sector_dim as f64 / TAU;
    Ok(circular_gaps(phases)?.into_iter().map(|g| g * scale).collect())
}

/// Mean of `min(s_m, s_{m-1}) / max(s_m, s_{m-1})` over consecutive gaps on the circle.
pub fn ratio_statistic(phases: &[f64]) -> Result<f64> {
    let gaps = circular_gaps(phases)?;
    let n = gaps.len();
    let mut acc = 0.0;
    let mut count = 0usize;
    for m in 0..n {
        let (a, b) = (gaps[m], gaps[(m + n - 1) % n]);
        let hi = a.max(b);
        if hi > 0.0 {
            acc += a.min(b) / hi;
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { acc / count as f64 })
}

pub fn wigner_dyson_pdf(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

pub fn poisson_pdf(s: f64) -> f64 {
    (-s).exp()
}

pub fn wigner_dyson_cdf(s: f64) -> f64 {
    1.0 - (-0.25 * PI * s * s).exp()
}

pub fn poisson_cdf(s: f64) -> f64 {
    1.0 - (-s).exp()
}

/// `(P_WD(s), P_P(s))`.
pub fn reference_pdfs(s: f64) -> (f64, f64) {
    (wigner_dyson_pdf(s), poisson_pdf(s))
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Mat<c64> {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let z = Mat::from_fn(dim, dim, |_, _| c64::new(normal(), normal()));
    let qr = z.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<c64> = (0..dim)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 { d / d.norm() } else { c64::new(1.0, 0.0) }
        })
        .collect();
    Mat::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j])
}

/// COE member `W^T W` with `W` Haar-distributed.
pub fn sample_coe(dim: usize, rng: &mut impl Rng) -> Mat<c64> {
    let w = haar_unitary(dim, rng);
    w.transpose() * &w
}

/// Sorted quasi-energies of a symmetric unitary such as a COE member.
///
/// `U = A + iB` with `A`, `B` real symmetric and commuting (from `U conj(U) = I`),
/// so a generic combination `A + cB` has their common real eigenbasis. Falls back
/// to the general complex solver when that basis is not resolved.
pub fn symmetric_unitary_phases(u: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let n = u.nrows();
    if u.ncols() != n {
        return arg_err("matrix not square");
    }
    let asym = linalg::max_abs_diff(u, u.transpose());
    if asym > 1e-10 {
        return arg_err(format!("matrix is not symmetric (defect {asym:.1e})"));
    }
    const MIX: f64 = 0.618_033_988_749_894_8;
    let re = Mat::from_fn(n, n, |i, j| u[(i, j)].re);
    let im = Mat::from_fn(n, n, |i, j| u[(i, j)].im);
    let s = Mat::from_fn(n, n, |i, j| re[(i, j)] + MIX * im[(i, j)]);
    let (_, o) = linalg::symmetric_eigen(s.as_ref())?;
    let ro = &re * &o;
    let io = &im * &o;
    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let (mut c, mut sn) = (0.0, 0.0);
        for i in 0..n {
            c += o[(i, k)] * ro[(i, k)];
            sn += o[(i, k)] * io[(i, k)];
        }
        // a resolved eigenvector has a unit-modulus Rayleigh quotient
        if (c.hypot(sn) - 1.0).abs() > 1e-8 {
            return quasienergies(u);
        }
        phases.push(wrap_phase(sn.atan2(c)));
    }
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Independent uniform phases on the circle, sorted.
pub fn poisson_phases(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * TAU).collect();
    p.sort_by(f64::total_cmp);
    p
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of work item `(grid, realization)` under a master seed.
pub fn derive_seed(master: u64, grid: u64, realization: u64) -> u64 {
    mix(mix(mix(master) ^ grid) ^ realization.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    H,
    Kappa,
}

impl ScanAxis {
    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = base.clone();
        match self {
            ScanAxis::H => p.h = value,
            ScanAxis::Kappa => p.kappa = value,
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub scan_value: f64,
    pub r_mean: f64,
    pub r_stderr: f64,
    pub sector_dim: usize,
    pub realizations: usize,
}

pub const SCAN_CSV_HEADER: [&str; 5] = ["scan_value", "r_mean", "r_stderr", "sector_dim", "realizations"];

/// Mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Disorder-averaged `<r>` along one parameter axis.
///
/// Every `(grid point, realization)` pair is an independent task whose
/// disorder seed derives from `disorder.seed`; results land in a pre-indexed
/// table, so the output does not depend on scheduling.
pub fn scan_ratio(
    geom: &SystemGeometry,
    base: &ModelParams,
    axis: ScanAxis,
    values: &[f64],
    disorder: &DisorderSpec,
    realizations: usize,
    sector: Sector,
) -> Result<Vec<ScanPoint>> {
    if values.is_empty() {
        return arg_err("scan grid is empty");
    }
    if realizations == 0 {
        return arg_err("at least one disorder realization is required");
    }
    let sector_dim = geom.dim() / 2;
    if sector_dim < MIN_SECTOR_DIM {
        return arg_err(format!(
            "sector dimension {sector_dim} is below {MIN_SECTOR_DIM}"
        ));
    }
    DisorderSpec::new(disorder.width, disorder.seed)?;
    for &v in values {
        axis.apply(base, v).validate(geom)?;
    }
    let tasks: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|g| (0..realizations).map(move |r| (g, r)))
        .collect();
    let ratios: Vec<f64> = tasks
        .par_iter()
        .map(|&(g, r)| {
            let seed = derive_seed(disorder.seed, g as u64, r as u64);
            let spec = DisorderSpec { width: disorder.width, seed };
            let params = realize_disorder(&axis.apply(base, values[g]), geom, &spec)?;
            let sample = sector_spectrum(geom, &params, sector, Some(seed))?;
            ratio_statistic(&sample.phases)
        })
        .collect::<Result<_>>()?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(g, &v)| {
            let (r_mean, r_stderr) = mean_stderr(&ratios[g * realizations..(g + 1) * realizations]);
            ScanPoint { scan_value: v, r_mean, r_stderr, sector_dim, realizations }
        })
        .collect())
}

/// Realizations per grid point when none is configured.
pub fn default_realizations(sector_dim: usize) -> usize {
    if sector_dim >= 256 { 20 } else { 50 }
}
