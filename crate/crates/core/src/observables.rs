//! Battery figures of merit evaluated on stroboscopic trajectories.

use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::model::{BatteryHamiltonian, LinearOperator, ModelParams};
use crate::spin_core::{DensityMatrix, PureState, SystemGeometry};

/// Default search window for the charging time, in kicks.
pub const DEFAULT_HORIZON: usize = 250;

/// Relative tolerance for ties between energy maxima.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Stroboscopic record of one run: battery RDMs, stored energy and the first
/// two moments of `H_b` and of the coupled Hamiltonian at `n = 0, 1, ...`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    geom: SystemGeometry,
    params: ModelParams,
    battery: BatteryHamiltonian,
    rdms: Vec<DensityMatrix>,
    energies: Vec<f64>,
    hb_moments: Vec<(f64, f64)>,
    h_moments: Vec<(f64, f64)>,
    final_state: Option<PureState>,
}

impl Trajectory {
    pub(crate) fn new(geom: SystemGeometry, params: ModelParams, battery: BatteryHamiltonian) -> Self {
        Self {
            geom,
            params,
            battery,
            rdms: Vec::new(),
            energies: Vec::new(),
            hb_moments: Vec::new(),
            h_moments: Vec::new(),
            final_state: None,
        }
    }

    pub(crate) fn push(&mut self, rdm: DensityMatrix, hb: (f64, f64), h: (f64, f64)) {
        let e0 = self.hb_moments.first().map_or(hb.0, |m| m.0);
        self.energies.push(hb.0 - e0);
        self.rdms.push(rdm);
        self.hb_moments.push(hb);
        self.h_moments.push(h);
    }

    pub(crate) fn set_final_state(&mut self, psi: PureState) {
        self.final_state = Some(psi);
    }

    /// Number of recorded samples (`n_kicks + 1`).
    pub fn len(&self) -> usize {
        self.rdms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rdms.is_empty()
    }

    pub fn kicks(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn geometry(&self) -> &SystemGeometry {
        &self.geom
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn battery(&self) -> &BatteryHamiltonian {
        &self.battery
    }

    pub fn rdms(&self) -> &[DensityMatrix] {
        &self.rdms
    }

    /// `E(n) = tr(rho_n H_b) - tr(rho_0 H_b)`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn final_state(&self) -> Option<&PureState> {
        self.final_state.as_ref()
    }

    pub fn battery_variances(&self) -> Vec<f64> {
        self.hb_moments.iter().map(|&m| variance(m)).collect()
    }

    pub fn total_variances(&self) -> Vec<f64> {
        self.h_moments.iter().map(|&m| variance(m)).collect()
    }

    pub fn ergotropies(&self) -> Result<Vec<f64>> {
        self.rdms.iter().map(|r| ergotropy(r, &self.battery)).collect()
    }

    pub fn linear_entropies(&self) -> Vec<f64> {
        self.rdms.iter().map(linear_entropy).collect()
    }
}

fn variance((mean, sq): (f64, f64)) -> f64 {
    (sq - mean * mean).max(0.0)
}

/// `tr(rho_n H_b) - tr(rho_0 H_b)`; `H_b` is diagonal so only populations enter.
pub fn stored_energy(rho_n: &DensityMatrix, rho_0: &DensityMatrix, hb: &BatteryHamiltonian) -> Result<f64> {
    let e = hb.energies();
    if rho_n.dim() != e.len() || rho_0.dim() != e.len() {
        return arg_err("density matrix dimension does not match the battery");
    }
    Ok(e
        .iter()
        .enumerate()
        .map(|(i, ei)| ei * (rho_n.population(i) - rho_0.population(i)))
        .sum())
}

pub fn battery_energy(rho: &DensityMatrix, hb: &BatteryHamiltonian) -> f64 {
    hb.energies().iter().enumerate().map(|(i, e)| e * rho.population(i)).sum()
}

/// `P = E / (n tau)`.
pub fn average_power(energy: f64, n: usize, tau: f64) -> Result<f64> {
    if n == 0 {
        return arg_err("average power needs at least one kick");
    }
    if !(tau > 0.0) {
        return arg_err("tau must be positive");
    }
    Ok(energy / (n as f64 * tau))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ChargingTime {
    Charged { kicks: usize, time: f64, energy: f64 },
    NeverCharges,
}

impl ChargingTime {
    pub fn kicks(&self) -> Option<usize> {
        match self {
            ChargingTime::Charged { kicks, .. } => Some(*kicks),
            ChargingTime::NeverCharges => None,
        }
    }
}

/// Earliest `m` in `1..=horizon` maximizing `E(m)`.
pub fn charging_time(traj: &Trajectory, horizon: usize) -> Result<ChargingTime> {
    if horizon == 0 {
        return arg_err("horizon must be at least one kick");
    }
    if traj.kicks() < horizon {
        return arg_err(format!(
            "trajectory holds {} kicks, horizon is {horizon}",
            traj.kicks()
        ));
    }
    let window = &traj.energies()[1..=horizon];
    let scale = traj.battery().gaps().iter().sum::<f64>().abs().max(f64::MIN_POSITIVE);
    if window.iter().all(|e| e.abs() <= 1e-12 * scale) {
        return Ok(ChargingTime::NeverCharges);
    }
    let best = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = best - TIE_TOLERANCE * best.abs();
    let m = window.iter().position(|&e| e >= cut).unwrap() + 1;
    Ok(ChargingTime::Charged { kicks: m, time: m as f64 * traj.tau(), energy: window[m - 1] })
}

/// Eigenvalues of `rho` sorted descending, placed on the battery energy levels
/// sorted ascending.
pub fn passive_state(rho: &DensityMatrix, hb: &BatteryHamiltonian) -> Result<DensityMatrix> {
    let e = hb.energies();
    if rho.dim() != e.len() {
        return arg_err("density matrix dimension does not match the battery");
    }
    let mut lambdas = rho.eigenvalues()?;
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let mut levels: Vec<usize> = (0..e.len()).collect();
    levels.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
    let mut probs = vec![0.0; e.len()];
    for (lambda, &level) in lambdas.iter().zip(&levels) {
        probs[level] = *lambda;
    }
    Ok(DensityMatrix::from_diagonal_unchecked(&probs))
}

/// `tr(rho H_b) - tr(passive(rho) H_b)`.
pub fn ergotropy(rho: &DensityMatrix, hb: &BatteryHamiltonian) -> Result<f64> {
    let passive = passive_state(rho, hb)?;
    Ok((battery_energy(rho, hb) - battery_energy(&passive, hb)).max(0.0))
}

/// `1 - tr(rho^2)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    (1.0 - rho.purity()).max(0.0)
}

/// Mean over the stored samples of `<op^2> - <op>^2`.
pub fn time_avg_variance(op: &dyn LinearOperator, states: &[PureState]) -> Result<f64> {
    if states.is_empty() {
        return arg_err("no states to average over");
    }
    let mut acc = 0.0;
    for psi in states {
        if psi.dim() != op.dim() {
            return arg_err("state dimension does not match the operator");
        }
        acc += variance(op.moments(psi.amplitudes()));
    }
    Ok(acc / states.len() as f64)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `2 sqrt(var_Hb var_H)`.
pub fn power_bound(var_hb: f64, var_h: f64) -> f64 {
    2.0 * (var_hb.max(0.0) * var_h.max(0.0)).sqrt()
}

/// Power bound at `T = m tau` with variances averaged over `n = 0..=m`.
pub fn power_bound_at(traj: &Trajectory, m: usize) -> Result<f64> {
    if m >= traj.len() {
        return arg_err("kick index beyond the trajectory");
    }
    let vb = mean(&traj.battery_variances()[..=m]);
    let vh = mean(&traj.total_variances()[..=m]);
    Ok(power_bound(vb, vh))
}

/// Standard deviation over mean of a series.
pub fn relative_spread(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return arg_err("empty series");
    }
    let mu = mean(values);
    if mu.abs() < f64::EPSILON {
        return Err(Error::Numerical("series mean vanishes".into()));
    }
    let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64;
    Ok(var.sqrt() / mu)
}

/// `std/mean` of `E(n)/n_b` for `n = from..=to`.
pub fn stability_metric(traj: &Trajectory, from: usize, to: usize) -> Result<f64> {
    if to <= from {
        return arg_err("stability window must satisfy to > from");
    }
    if to >= traj.len() {
        return arg_err("stability window extends beyond the trajectory");
    }
    let nb = traj.geometry().battery_count() as f64;
    let per: Vec<f64> = traj.energies()[from..=to].iter().map(|e| e / nb).collect();
    relative_spread(&per)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeritReport {
    pub charging: ChargingTime,
    pub e_max: f64,
    pub power: Option<f64>,
    pub power_bound: Option<f64>,
    pub ergotropy: Vec<f64>,
    pub linear_entropy: Vec<f64>,
    pub stability: Option<f64>,
}

/// Charging time over `horizon`, power and bound at that time and the
/// stability from the charging time to the last kick.
pub fn merit_report(traj: &Trajectory, horizon: usize) -> Result<MeritReport> {
    let charging = charging_time(traj, horizon)?;
    let (power, bound, stability) = match charging {
        ChargingTime::Charged { kicks, energy, .. } => {
            let last = traj.kicks();
            let stability = if last > kicks { Some(stability_metric(traj, kicks, last)?) } else { None };
            (
                Some(average_power(energy, kicks, traj.tau())?),
                Some(power_bound_at(traj, kicks)?),
                stability,
            )
        }
        ChargingTime::NeverCharges => (None, None, None),
    };
    Ok(MeritReport {
        charging,
        e_max: traj.energies()[1..=horizon].iter().copied().fold(0.0, f64::max),
        power,
        power_bound: bound,
        ergotropy: traj.ergotropies()?,
        linear_entropy: traj.linear_entropies(),
        stability,
    })
}
