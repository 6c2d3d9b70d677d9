//! Scenario planning (pure validation, no numerics) and execution.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::output::{Cell, CsvTable};
use crate::experiments::plot::LinePlot;
use crate::experiments::Scenario;
use crate::floquet::{analytic_f21, build_floquet, evolve, AnalyticKickModel};
use crate::model::{realize_disorder, DisorderSpec, ModelParams};
use crate::observables::{merit_report, ChargingTime, MeritReport, Trajectory};
use crate::qfi::{exceeds_separable_bound, qfi_over_trajectory};
use crate::spectral::{
    default_realizations, derive_seed, scan_ratio, ScanAxis, ScanPoint, COE_RATIO, MIN_SECTOR_DIM, POISSON_RATIO,
    SCAN_CSV_HEADER,
};
use crate::spin_core::{Sector, SystemGeometry};

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "sites", rename_all = "snake_case")]
pub enum Layout {
    /// Charger length fixed.
    Fixed(usize),
    /// `L + n_b` fixed.
    Total(usize),
}

impl Layout {
    pub fn charger_len(self, n_b: usize) -> Result<usize> {
        match self {
            Layout::Fixed(l) => Ok(l),
            Layout::Total(t) if t > n_b => Ok(t - n_b),
            Layout::Total(t) => Err(Error::Config(format!("total_sites = {t} leaves no charger for n_b = {n_b}"))),
        }
    }

    pub fn label(self) -> String {
        match self {
            Layout::Fixed(l) => format!("fixed_L{l}"),
            Layout::Total(t) => format!("total_{t}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Case {
    pub layout: Layout,
    pub tau_index: usize,
    pub geom: SystemGeometry,
    pub params: ModelParams,
    pub disorder_seed: Option<u64>,
}

impl Case {
    pub fn n_b(&self) -> usize {
        self.geom.battery_count()
    }

    fn label(&self, plan: &SweepPlan) -> String {
        if plan.layouts.len() == 1 && plan.taus.len() == 1 {
            format!("nb{}", self.n_b())
        } else {
            format!("{}_tau{}_nb{}", self.layout.label(), self.tau_index, self.n_b())
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub scenario: Scenario,
    pub layouts: Vec<Layout>,
    pub taus: Vec<f64>,
    pub cases: Vec<Case>,
    pub kicks: usize,
    pub horizon: usize,
}

#[derive(Clone, Debug)]
pub struct DynamicsPlan {
    pub geom: SystemGeometry,
    pub params: ModelParams,
    pub kicks: usize,
}

#[derive(Clone, Debug)]
pub struct ScanJob {
    pub axis: ScanAxis,
    pub geom: SystemGeometry,
    pub values: Vec<f64>,
    pub disorder: DisorderSpec,
    pub realizations: usize,
}

#[derive(Clone, Debug)]
pub struct RmtPlan {
    pub base: ModelParams,
    pub jobs: Vec<ScanJob>,
}

#[derive(Clone, Debug)]
pub enum Plan {
    Rmt(RmtPlan),
    Dynamics(DynamicsPlan),
    Sweep(SweepPlan),
}

/// Everything a scenario produces, still in memory.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<(String, CsvTable)>,
    pub plots: Vec<(String, String)>,
    pub summary: Value,
}

impl Artifacts {
    pub fn table(&self, name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

fn base_params(cfg: &ExperimentConfig, defaults: [f64; 5]) -> ModelParams {
    let [j, h, kappa, delta, tau] = defaults;
    ModelParams::uniform(
        cfg.j.unwrap_or(j),
        cfg.h.unwrap_or(h),
        cfg.kappa.unwrap_or(kappa),
        cfg.delta.unwrap_or(delta),
        cfg.tau.unwrap_or(tau),
    )
}

fn non_empty<T: Clone>(v: &Option<Vec<T>>, default: &[T], key: &str) -> Result<Vec<T>> {
    match v {
        Some(v) if v.is_empty() => Err(Error::Config(format!("`{key}` must not be empty"))),
        Some(v) => Ok(v.clone()),
        None => Ok(default.to_vec()),
    }
}

fn disorder_width(cfg: &ExperimentConfig, default: f64) -> Result<f64> {
    let w = cfg.disorder_width.unwrap_or(default);
    DisorderSpec::new(w, 0).map_err(config_err)?;
    Ok(w)
}

/// Validate the configuration and resolve defaults for `scenario`.
pub fn plan(scenario: Scenario, cfg: &ExperimentConfig) -> Result<Plan> {
    let seed = cfg.master_seed()?;
    if cfg.threads == Some(0) {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    match scenario {
        Scenario::RmtScan => plan_rmt(cfg, seed).map(Plan::Rmt),
        Scenario::Dynamics => plan_dynamics(cfg).map(Plan::Dynamics),
        _ => plan_sweep(scenario, cfg, seed).map(Plan::Sweep),
    }
}

fn plan_rmt(cfg: &ExperimentConfig, seed: u64) -> Result<RmtPlan> {
    let base = base_params(cfg, [1.0, 1.0, 1.0, 1.0, PI / 4.0]);
    let l = cfg.charger_len.unwrap_or(8);
    let counts = non_empty(&cfg.battery_counts, &[2, 3, 4], "battery_counts")?;
    let h_values = non_empty(&cfg.h_values, &[0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0], "h_values")?;
    let kappa_values = non_empty(
        &cfg.kappa_values,
        &[0.2, 0.6, 1.0, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.8, 3.2],
        "kappa_values",
    )?;
    let width = disorder_width(cfg, DisorderSpec::DEFAULT_WIDTH)?;
    if cfg.realizations == Some(0) {
        return Err(Error::Config("realizations must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for (a, (axis, values)) in [(ScanAxis::H, &h_values), (ScanAxis::Kappa, &kappa_values)].into_iter().enumerate() {
        for &nb in &counts {
            let geom = SystemGeometry::sunburst(l, nb).map_err(config_err)?;
            if geom.dim() / 2 < MIN_SECTOR_DIM {
                return Err(Error::Config(format!(
                    "sector dimension {} for L = {l}, n_b = {nb} is below {MIN_SECTOR_DIM}",
                    geom.dim() / 2
                )));
            }
            for &v in values.iter() {
                axis.apply(&base, v).validate(&geom).map_err(config_err)?;
            }
            jobs.push(ScanJob {
                axis,
                geom,
                values: values.clone(),
                disorder: DisorderSpec { width, seed: derive_seed(seed, a as u64, nb as u64) },
                realizations: cfg.realizations.unwrap_or_else(|| default_realizations(geom.dim() / 2)),
            });
        }
    }
    Ok(RmtPlan { base, jobs })
}

fn plan_dynamics(cfg: &ExperimentConfig) -> Result<DynamicsPlan> {
    let params = base_params(cfg, [1.0, 0.1, 6.0, 1.0, PI / 20.0]);
    let nb = match cfg.battery_counts.as_deref() {
        None => 1,
        Some([n]) => *n,
        Some(_) => return Err(Error::Config("dynamics takes a single battery count".into())),
    };
    let l = match (cfg.charger_len, cfg.total_sites) {
        (Some(l), _) => l,
        (None, Some(t)) => Layout::Total(t).charger_len(nb)?,
        (None, None) => 6,
    };
    let geom = SystemGeometry::sunburst(l, nb).map_err(config_err)?;
    params.validate(&geom).map_err(config_err)?;
    let kicks = cfg.kicks.unwrap_or(100);
    if kicks == 0 {
        return Err(Error::Config("kicks must be at least 1".into()));
    }
    if cfg.disorder_width.is_some_and(|w| w != 0.0) {
        return Err(Error::Config("dynamics runs without disorder".into()));
    }
    Ok(DynamicsPlan { geom, params, kicks })
}

fn plan_sweep(scenario: Scenario, cfg: &ExperimentConfig, seed: u64) -> Result<SweepPlan> {
    let q = PI / 4.0;
    let (default_layouts, default_taus, default_counts): (Vec<Layout>, Vec<f64>, Vec<usize>) = match scenario {
        Scenario::Stability => (vec![Layout::Total(13)], vec![q], (1..=6).collect()),
        Scenario::ChargingTime => (vec![Layout::Fixed(6), Layout::Total(13)], vec![q, q + 0.1], (1..=6).collect()),
        Scenario::PowerScaling => (vec![Layout::Fixed(6)], vec![q], (1..=6).collect()),
        Scenario::QfiTable => (vec![Layout::Fixed(6), Layout::Total(13)], vec![q, q + 0.1], (2..=6).collect()),
        Scenario::RmtScan | Scenario::Dynamics => unreachable!("not a sweep scenario"),
    };
    let mut layouts = Vec::new();
    if let Some(l) = cfg.charger_len {
        layouts.push(Layout::Fixed(l));
    }
    if let Some(t) = cfg.total_sites {
        layouts.push(Layout::Total(t));
    }
    if layouts.is_empty() {
        layouts = default_layouts;
    }
    let taus = match (&cfg.taus, cfg.tau) {
        (Some(_), Some(_)) => return Err(Error::Config("set either `tau` or `taus`, not both".into())),
        (Some(t), None) => non_empty(&Some(t.clone()), &[], "taus")?,
        (None, Some(t)) => vec![t],
        (None, None) => default_taus,
    };
    let counts = non_empty(&cfg.battery_counts, &default_counts, "battery_counts")?;
    let kicks = cfg.kicks.unwrap_or(250);
    let horizon = cfg.horizon.unwrap_or(kicks);
    if horizon == 0 || horizon > kicks {
        return Err(Error::Config(format!("horizon must lie in 1..={kicks}")));
    }
    let width = disorder_width(cfg, 0.0)?;
    let mut cases = Vec::new();
    for &nb in &counts {
        for &layout in &layouts {
            for (ti, &tau) in taus.iter().enumerate() {
                let l = layout.charger_len(nb)?;
                let geom = SystemGeometry::sunburst(l, nb).map_err(config_err)?;
                let mut params = base_params(cfg, [1.0, 1.0, 1.0, 1.0, tau]);
                params.tau = tau;
                params.validate(&geom).map_err(config_err)?;
                let disorder_seed = (width > 0.0).then(|| derive_seed(seed, cases.len() as u64, 0));
                if let Some(s) = disorder_seed {
                    params = realize_disorder(&params, &geom, &DisorderSpec { width, seed: s }).map_err(config_err)?;
                }
                cases.push(Case { layout, tau_index: ti, geom, params, disorder_seed });
            }
        }
    }
    Ok(SweepPlan { scenario, layouts, taus, cases, kicks, horizon })
}

pub fn execute(plan: &Plan) -> Result<Artifacts> {
    match plan {
        Plan::Rmt(p) => run_rmt_scan(p),
        Plan::Dynamics(p) => run_dynamics(p),
        Plan::Sweep(p) => match p.scenario {
            Scenario::Stability => run_stability(p),
            Scenario::ChargingTime => run_charging_time(p),
            Scenario::PowerScaling => run_power_scaling(p),
            Scenario::QfiTable => run_qfi_table(p),
            _ => unreachable!("sweep plans only carry sweep scenarios"),
        },
    }
}

fn simulate(geom: &SystemGeometry, params: &ModelParams, kicks: usize) -> Result<Trajectory> {
    let u = build_floquet(geom, params)?;
    evolve(&u, &u.initial_state()?, kicks)
}

pub fn run_rmt_scan(plan: &RmtPlan) -> Result<Artifacts> {
    let results: Vec<Vec<ScanPoint>> = plan
        .jobs
        .iter()
        .map(|job| {
            scan_ratio(&job.geom, &plan.base, job.axis, &job.values, &job.disorder, job.realizations, Sector::Even)
        })
        .collect::<Result<_>>()?;
    let mut art = Artifacts::default();
    let mut summary = Vec::new();
    for axis in [ScanAxis::H, ScanAxis::Kappa] {
        let name = match axis {
            ScanAxis::H => "h",
            ScanAxis::Kappa => "kappa",
        };
        let mut plot = LinePlot::new(&format!("spacing ratio vs {name}"), name, "<r>")
            .reference("Poisson", POISSON_RATIO)
            .reference("COE", COE_RATIO);
        for (job, points) in plan.jobs.iter().zip(&results).filter(|(j, _)| j.axis == axis) {
            let nb = job.geom.battery_count();
            let mut t = CsvTable::new(&SCAN_CSV_HEADER);
            for p in points {
                t.push(vec![
                    p.scan_value.into(),
                    p.r_mean.into(),
                    p.r_stderr.into(),
                    p.sector_dim.into(),
                    p.realizations.into(),
                ]);
            }
            art.tables.push((format!("rmt_{name}_scan_nb{nb}.csv"), t));
            plot = plot.series(&format!("n_b = {nb}"), points.iter().map(|p| (p.scan_value, p.r_mean)).collect());
            summary.push(json!({
                "axis": name,
                "charger_len": job.geom.charger_len(),
                "n_b": nb,
                "disorder": job.disorder,
                "points": points,
            }));
        }
        art.plots.push((format!("rmt_{name}_scan.svg"), plot.render()));
    }
    art.summary = json!({ "base_params": plan.base, "scans": summary });
    Ok(art)
}

pub fn run_dynamics(plan: &DynamicsPlan) -> Result<Artifacts> {
    let traj = simulate(&plan.geom, &plan.params, plan.kicks)?;
    let report = merit_report(&traj, plan.kicks)?;
    let single = plan.geom.battery_count() == 1;
    let model = AnalyticKickModel::new(plan.params.kappa, plan.params.tau, plan.params.delta);
    let mut header = vec!["n", "energy", "ergotropy", "linear_entropy"];
    if single {
        header.extend(["energy_analytic", "ergotropy_analytic", "linear_entropy_analytic"]);
    }
    let mut t = CsvTable::new(&header);
    let delta = plan.params.delta;
    let mut max_dev = 0.0f64;
    let mut curves: [Vec<(f64, f64)>; 4] = Default::default();
    for n in 0..traj.len() {
        let e = traj.energies()[n];
        let mut row: Vec<Cell> = vec![n.into(), e.into(), report.ergotropy[n].into(), report.linear_entropy[n].into()];
        curves[0].push((n as f64, e));
        curves[1].push((n as f64, report.ergotropy[n]));
        curves[2].push((n as f64, report.linear_entropy[n]));
        if single {
            let p1 = analytic_f21(&model, n as u32).norm_sqr();
            let ea = delta * p1;
            max_dev = max_dev.max((e - ea).abs());
            curves[3].push((n as f64, ea));
            row.extend([ea.into(), (delta * (2.0 * p1 - 1.0)).max(0.0).into(), (2.0 * (p1 - p1 * p1)).into()]);
        }
        t.push(row);
    }
    let mut plot = LinePlot::new("battery dynamics", "kick n", "value")
        .series("E(n)", curves[0].clone())
        .series("ergotropy", curves[1].clone())
        .series("linear entropy", curves[2].clone());
    if single {
        plot = plot.series("E(n), h = 0 closed form", curves[3].clone());
    }
    let mut art = Artifacts::default();
    art.tables.push(("dynamics.csv".into(), t));
    art.plots.push(("dynamics.svg".into(), plot.render()));
    art.summary = json!({
        "charger_len": plan.geom.charger_len(),
        "n_b": plan.geom.battery_count(),
        "params": plan.params,
        "kicks": plan.kicks,
        "merit": report,
        "max_deviation_from_closed_form": if single { Some(max_dev) } else { None },
    });
    Ok(art)
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub layout: Layout,
    pub charger_len: usize,
    pub n_b: usize,
    pub tau: f64,
    pub disorder_seed: Option<u64>,
    pub merit: MeritReport,
    #[serde(skip)]
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub qfi: Option<Vec<f64>>,
}

fn run_cases(plan: &SweepPlan, with_qfi: bool) -> Result<Vec<CaseResult>> {
    plan.cases
        .par_iter()
        .map(|c| {
            let traj = simulate(&c.geom, &c.params, plan.kicks)?;
            let merit = merit_report(&traj, plan.horizon)?;
            let qfi = if with_qfi { Some(qfi_over_trajectory(&traj)?.values) } else { None };
            Ok(CaseResult {
                layout: c.layout,
                charger_len: c.geom.charger_len(),
                n_b: c.n_b(),
                tau: c.params.tau,
                disorder_seed: c.disorder_seed,
                merit,
                energies: traj.energies().to_vec(),
                qfi,
            })
        })
        .collect()
}

fn status(c: &ChargingTime) -> &'static str {
    match c {
        ChargingTime::Charged { .. } => "charged",
        ChargingTime::NeverCharges => "never_charges",
    }
}

fn sweep_summary(plan: &SweepPlan, results: &[CaseResult], extra: Value) -> Value {
    json!({
        "kicks": plan.kicks,
        "horizon": plan.horizon,
        "cases": results,
        "extra": extra,
    })
}

pub fn run_stability(plan: &SweepPlan) -> Result<Artifacts> {
    let results = run_cases(plan, false)?;
    let labels: Vec<String> = plan.cases.iter().map(|c| c.label(plan)).collect();
    let mut header = vec!["n".to_string()];
    header.extend(labels.iter().map(|l| format!("e_per_nb_{l}")));
    let mut series = CsvTable::new(&header);
    for n in 0..=plan.kicks {
        let mut row: Vec<Cell> = vec![n.into()];
        row.extend(results.iter().map(|r| Cell::from(r.energies[n] / r.n_b as f64)));
        series.push(row);
    }
    let mut table = CsvTable::new(&["layout", "L", "n_b", "tau", "status", "charging_kicks", "stability"]);
    let mut plot = LinePlot::new("stored energy per battery", "kick n", "E(n)/n_b");
    for (r, label) in results.iter().zip(&labels) {
        table.push(vec![
            r.layout.label().as_str().into(),
            r.charger_len.into(),
            r.n_b.into(),
            r.tau.into(),
            status(&r.merit.charging).into(),
            r.merit.charging.kicks().into(),
            r.merit.stability.into(),
        ]);
        plot = plot.series(label, r.energies.iter().enumerate().map(|(n, e)| (n as f64, e / r.n_b as f64)).collect());
    }
    let mut art = Artifacts::default();
    art.tables.push(("stability_series.csv".into(), series));
    art.tables.push(("stability.csv".into(), table));
    art.plots.push(("stability.svg".into(), plot.render()));
    art.summary = sweep_summary(plan, &results, Value::Null);
    Ok(art)
}

pub fn run_charging_time(plan: &SweepPlan) -> Result<Artifacts> {
    let results = run_cases(plan, false)?;
    let mut table = CsvTable::new(&[
        "layout", "L", "n_b", "tau", "status", "charging_kicks", "charging_time", "e_max", "power",
    ]);
    let mut plot = LinePlot::new("charging time", "n_b", "charging kicks m");
    for &layout in &plan.layouts {
        for (ti, &tau) in plan.taus.iter().enumerate() {
            let pts = results
                .iter()
                .zip(&plan.cases)
                .filter(|(_, c)| c.layout == layout && c.tau_index == ti)
                .filter_map(|(r, _)| r.merit.charging.kicks().map(|m| (r.n_b as f64, m as f64)))
                .collect();
            plot = plot.series(&format!("{} tau = {tau:.4}", layout.label()), pts);
        }
    }
    for r in &results {
        let (time, power) = match r.merit.charging {
            ChargingTime::Charged { time, .. } => (Some(time), r.merit.power),
            ChargingTime::NeverCharges => (None, None),
        };
        table.push(vec![
            r.layout.label().as_str().into(),
            r.charger_len.into(),
            r.n_b.into(),
            r.tau.into(),
            status(&r.merit.charging).into(),
            r.merit.charging.kicks().into(),
            time.into(),
            r.merit.e_max.into(),
            power.into(),
        ]);
    }
    let mut art = Artifacts::default();
    art.tables.push(("charging_time.csv".into(), table));
    art.plots.push(("charging_time.svg".into(), plot.render()));
    art.summary = sweep_summary(plan, &results, Value::Null);
    Ok(art)
}

pub fn run_power_scaling(plan: &SweepPlan) -> Result<Artifacts> {
    let results = run_cases(plan, false)?;
    let mut table = CsvTable::new(&[
        "layout",
        "L",
        "n_b",
        "tau",
        "status",
        "charging_kicks",
        "energy",
        "power",
        "power_bound",
        "power_per_nb",
        "bound_per_nb",
    ]);
    let mut plot = LinePlot::new("charging power at the charging time", "n_b", "per battery");
    for &layout in &plan.layouts {
        for (ti, &tau) in plan.taus.iter().enumerate() {
            let sel: Vec<&CaseResult> = results
                .iter()
                .zip(&plan.cases)
                .filter(|(_, c)| c.layout == layout && c.tau_index == ti)
                .map(|(r, _)| r)
                .collect();
            let tag = format!("{} tau = {tau:.4}", layout.label());
            let p = sel.iter().filter_map(|r| r.merit.power.map(|p| (r.n_b as f64, p / r.n_b as f64))).collect();
            let b = sel.iter().filter_map(|r| r.merit.power_bound.map(|p| (r.n_b as f64, p / r.n_b as f64))).collect();
            plot = plot.series(&format!("P/n_b {tag}"), p).series(&format!("P_bo/n_b {tag}"), b);
        }
    }
    for r in &results {
        let energy = match r.merit.charging {
            ChargingTime::Charged { energy, .. } => Some(energy),
            ChargingTime::NeverCharges => None,
        };
        let nb = r.n_b as f64;
        table.push(vec![
            r.layout.label().as_str().into(),
            r.charger_len.into(),
            r.n_b.into(),
            r.tau.into(),
            status(&r.merit.charging).into(),
            r.merit.charging.kicks().into(),
            energy.into(),
            r.merit.power.into(),
            r.merit.power_bound.into(),
            r.merit.power.map(|p| p / nb).into(),
            r.merit.power_bound.map(|p| p / nb).into(),
        ]);
    }
    let mut art = Artifacts::default();
    art.tables.push(("power_scaling.csv".into(), table));
    art.plots.push(("power_scaling.svg".into(), plot.render()));
    art.summary = sweep_summary(plan, &results, Value::Null);
    Ok(art)
}

pub fn run_qfi_table(plan: &SweepPlan) -> Result<Artifacts> {
    let results = run_cases(plan, true)?;
    let mut table = CsvTable::new(&[
        "n_b",
        "L",
        "tau",
        "lambda_max",
        "lambda_max_kick",
        "witness",
        "layout",
        "lambda_first_kick",
        "lambda_at_charging",
        "charging_kicks",
    ]);
    let labels: Vec<String> = plan.cases.iter().map(|c| c.label(plan)).collect();
    let mut header = vec!["n".to_string()];
    header.extend(labels.iter().map(|l| format!("lambda_max_{l}")));
    let mut series = CsvTable::new(&header);
    let mut extra = Vec::new();
    for r in &results {
        let q = r.qfi.as_ref().expect("qfi requested");
        // n = 0 is the product initial state with lambda = n_b; the window starts at the first kick
        let (argmax, max) = q
            .iter()
            .copied()
            .enumerate()
            .skip(1)
            .fold((1, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        let at_charging = r.merit.charging.kicks().map(|m| q[m]);
        let witness = exceeds_separable_bound(max, r.n_b);
        table.push(vec![
            r.n_b.into(),
            r.charger_len.into(),
            r.tau.into(),
            max.into(),
            argmax.into(),
            witness.into(),
            r.layout.label().as_str().into(),
            q[1].into(),
            at_charging.into(),
            r.merit.charging.kicks().into(),
        ]);
        extra.push(json!({ "n_b": r.n_b, "L": r.charger_len, "tau": r.tau, "lambda_max": max, "lambda_max_kick": argmax, "witness": witness }));
    }
    for n in 0..=plan.kicks {
        let mut row: Vec<Cell> = vec![n.into()];
        row.extend(results.iter().map(|r| Cell::from(r.qfi.as_ref().unwrap()[n])));
        series.push(row);
    }
    let mut art = Artifacts::default();
    art.tables.push(("qfi_table.csv".into(), table));
    art.tables.push(("qfi_series.csv".into(), series));
    art.summary = sweep_summary(plan, &results, Value::Array(extra));
    Ok(art)
}
