//! The verification suite: every residual against its threshold, run as
//! independent jobs in parallel and reported in a fixed order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::grid::Grid1D;
use super::propagate::crank_nicolson_propagate;
use super::residual::{
    invariant_eigen_residual, pseudo_hermiticity_check, tdse_residual, tdse_residual_branchwise, von_neumann_residual,
    von_neumann_residual_with, InvariantVariant,
};
use crate::error::Result;
use crate::profile::{Fault, TimeProfile};
use crate::solution::{assemble_wavefunction, eta_inner_product, Extent, Snapshot, WavefunctionSample};
use crate::spectrum::{level, SpectralLevel};
use crate::Region;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `value <= threshold`.
    pub fn upper(check: &str, params: BTreeMap<String, Value>, value: f64, threshold: f64) -> Self {
        CheckRecord {
            check: check.to_string(),
            params,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Negative control: passes when `value > threshold`.
    pub fn lower(check: &str, params: BTreeMap<String, Value>, value: f64, threshold: f64) -> Self {
        CheckRecord {
            check: check.to_string(),
            params,
            value,
            threshold,
            pass: value > threshold,
        }
    }

    fn failed(check: &str, params: BTreeMap<String, Value>, threshold: f64, err: &crate::Error) -> Self {
        let mut params = params;
        params.insert("error".into(), json!(err.to_string()));
        CheckRecord {
            check: check.to_string(),
            params,
            value: f64::NAN,
            threshold,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub tdse: f64,
    pub continuity: f64,
    pub invariant_eigen: f64,
    pub von_neumann: f64,
    pub von_neumann_edge: f64,
    pub pseudo_hermiticity: f64,
    pub pseudo_hermiticity_control: f64,
    pub density: f64,
    pub eta_norm: f64,
    pub propagation: f64,
    pub wrong_sign_control: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tdse: 1e-4,
            continuity: 1e-8,
            invariant_eigen: 1e-3,
            von_neumann: 1e-4,
            von_neumann_edge: 1e-4,
            pseudo_hermiticity: 1e-12,
            pseudo_hermiticity_control: 1e-4,
            density: 1e-6,
            eta_norm: 1e-8,
            propagation: 1e-3,
            wrong_sign_control: 1e-1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    /// Spacing of the full-line grids.
    pub dx: f64,
    /// Minimum half-width of the full-line grids; widened to λ_max + 12.
    pub half_width: f64,
    /// Spacing of the half-line grids used by the invariant checks.
    pub invariant_dx: f64,
    /// Time offset of central differences.
    pub delta: f64,
    /// Crank–Nicolson step.
    pub dt: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            dx: 0.01,
            half_width: 20.0,
            invariant_dx: 0.005,
            delta: super::residual::DEFAULT_DELTA,
            dt: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub profiles: Vec<(String, TimeProfile)>,
    pub levels: Vec<usize>,
    pub times: Vec<f64>,
    /// Number of quasi-random interior times for the invariant checks.
    pub invariant_times: usize,
    /// End time of the propagation check; `None` skips it.
    pub propagate_to: Option<f64>,
    pub grid: GridSettings,
    pub thresholds: Thresholds,
}

impl SuiteConfig {
    /// Reference profiles on [0, 1], levels 0..=2, times 0.1, 0.3, 0.5.
    pub fn reference() -> Result<Self> {
        Ok(SuiteConfig {
            profiles: TimeProfile::reference_set(1.0)?
                .into_iter()
                .map(|(n, p)| (n.to_string(), p))
                .collect(),
            levels: vec![0, 1, 2],
            times: vec![0.1, 0.3, 0.5],
            invariant_times: 10,
            propagate_to: Some(0.5),
            grid: GridSettings::default(),
            thresholds: Thresholds::default(),
        })
    }
}

/// Interior times t_i = δ' + frac(1/2 + iφ)(T - 2δ') with φ the golden
/// ratio conjugate; deterministic and well spread.
pub fn spread_times(count: usize, t_max: f64, margin: f64) -> Vec<f64> {
    let phi = 0.618_033_988_749_894_9;
    (0..count)
        .map(|i| {
            let u = (0.5 + i as f64 * phi).fract();
            margin + u * (t_max - 2.0 * margin)
        })
        .collect()
}

#[derive(Debug, Clone)]
enum Job {
    Tdse { p: usize, n: usize, t: f64 },
    TdseBranchwise { p: usize, n: usize, t: f64 },
    Continuity { p: usize, n: usize, t: f64 },
    Density { p: usize, n: usize, t: f64 },
    InvariantEigen { p: usize, n: usize, region: Region, t: f64 },
    VonNeumann { p: usize, region: Region, t: f64 },
    PseudoHermiticity { p: usize, region: Region, t: f64 },
    EtaNorm { n: usize },
    Propagation { p: usize, n: usize, t: f64 },
    AlphaControl { p: usize, region: Region, t: f64 },
    WrongSignVonNeumann { p: usize, region: Region, t: f64 },
    WrongSignTdse { p: usize, n: usize, t: f64 },
    FrozenMomentum { p: usize, region: Region, t: f64 },
}

struct Runner<'a> {
    cfg: &'a SuiteConfig,
    levels: Vec<SpectralLevel>,
    full_grid: Grid1D,
}

fn base(profile_name: &str) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("profile".into(), json!(profile_name));
    m
}

impl Runner<'_> {
    fn level(&self, n: usize) -> &SpectralLevel {
        self.levels.iter().find(|l| l.n == n).expect("level prepared")
    }

    fn half_grid(&self, region: Region) -> Result<Grid1D> {
        let lmax = self.levels.iter().map(|l| l.lambda).fold(0.0, f64::max);
        Grid1D::half_line(region, lmax + 12.0, self.cfg.grid.invariant_dx)
    }

    fn run(&self, job: &Job) -> CheckRecord {
        let th = &self.cfg.thresholds;
        let g = &self.cfg.grid;
        let pname = |p: usize| self.cfg.profiles[p].0.as_str();
        let prof = |p: usize| &self.cfg.profiles[p].1;
        macro_rules! record {
            ($kind:ident, $check:expr, $params:expr, $threshold:expr, $value:expr) => {{
                let params = $params;
                match $value {
                    Ok(v) => CheckRecord::$kind($check, params, v, $threshold),
                    Err(e) => CheckRecord::failed($check, params, $threshold, &e),
                }
            }};
        }
        match *job {
            Job::Tdse { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                m.insert("dx".into(), json!(g.dx));
                record!(
                    upper,
                    "tdse_residual",
                    m,
                    th.tdse,
                    tdse_residual(prof(p), self.level(n), t, &self.full_grid, g.delta)
                )
            }
            Job::TdseBranchwise { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                record!(
                    upper,
                    "tdse_residual_branchwise",
                    m,
                    th.tdse,
                    tdse_residual_branchwise(prof(p), self.level(n), t, &self.full_grid, g.delta)
                )
            }
            Job::Continuity { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                record!(
                    upper,
                    "origin_continuity",
                    m,
                    th.continuity,
                    Snapshot::new(prof(p), self.level(n), t)
                        .and_then(|s| s.origin_mismatch())
                        .map(|o| o.value)
                )
            }
            Job::Density { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                let value = density_deviation(prof(p), self.level(n), t, &self.full_grid);
                record!(upper, "density_time_independence", m, th.density, value)
            }
            Job::InvariantEigen { p, n, region, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                let value = self
                    .half_grid(region)
                    .and_then(|hg| invariant_eigen_residual(prof(p), self.level(n), region, t, &hg));
                record!(upper, "invariant_eigen_residual", m, th.invariant_eigen, value)
            }
            Job::VonNeumann { p, region, t } => {
                let mut m = base(pname(p));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                let threshold = if t < g.delta {
                    th.von_neumann_edge
                } else {
                    th.von_neumann
                };
                let value = self
                    .half_grid(region)
                    .and_then(|hg| von_neumann_residual(prof(p), region, t, &hg, g.delta));
                record!(upper, "von_neumann_residual", m, threshold, value)
            }
            Job::PseudoHermiticity { p, region, t } => {
                let mut m = base(pname(p));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                record!(
                    upper,
                    "pseudo_hermiticity",
                    m,
                    th.pseudo_hermiticity,
                    pseudo_hermiticity_check(prof(p), region, t, 0.0)
                )
            }
            Job::EtaNorm { n } => {
                let mut m = BTreeMap::new();
                m.insert("n".into(), json!(n));
                let l = self.level(n);
                let value = Region::BOTH
                    .iter()
                    .map(|&r| eta_inner_product(l, Extent::Half(r)).map(|v| (v - 0.5).abs()))
                    .chain([eta_inner_product(l, Extent::Whole).map(|v| (v - 1.0).abs())])
                    .collect::<Result<Vec<f64>>>()
                    .map(|v| v.into_iter().fold(0.0, f64::max));
                record!(upper, "eta_norm", m, th.eta_norm, value)
            }
            Job::Propagation { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                m.insert("dt".into(), json!(g.dt));
                m.insert("dx".into(), json!(g.dx));
                let value = propagation_deviation(prof(p), self.level(n), t, &self.full_grid, g.dt);
                record!(upper, "propagation_vs_closed_form", m, th.propagation, value)
            }
            Job::AlphaControl { p, region, t } => {
                let mut m = base(pname(p));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                m.insert("alpha_shift".into(), json!(1e-3));
                record!(
                    lower,
                    "control_pseudo_hermiticity_perturbed_alpha",
                    m,
                    th.pseudo_hermiticity_control,
                    pseudo_hermiticity_check(prof(p), region, t, 1e-3)
                )
            }
            Job::WrongSignVonNeumann { p, region, t } => {
                let mut m = base(pname(p));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                let bad = prof(p).clone().with_fault(Fault::FlipK);
                let value = self
                    .half_grid(region)
                    .and_then(|hg| von_neumann_residual(&bad, region, t, &hg, g.delta));
                record!(lower, "control_von_neumann_wrong_sign_k", m, th.von_neumann, value)
            }
            Job::WrongSignTdse { p, n, t } => {
                let mut m = base(pname(p));
                m.insert("n".into(), json!(n));
                m.insert("t".into(), json!(t));
                let bad = prof(p).clone().with_fault(Fault::FlipK);
                record!(
                    lower,
                    "control_tdse_branchwise_wrong_sign_k",
                    m,
                    th.wrong_sign_control,
                    tdse_residual_branchwise(&bad, self.level(n), t, &self.full_grid, g.delta)
                )
            }
            Job::FrozenMomentum { p, region, t } => {
                let mut m = base(pname(p));
                m.insert("region".into(), json!(region.index()));
                m.insert("t".into(), json!(t));
                let value = self.half_grid(region).and_then(|hg| {
                    von_neumann_residual_with(prof(p), region, t, &hg, g.delta, InvariantVariant::FrozenMomentum(0.0))
                });
                record!(lower, "control_von_neumann_frozen_momentum", m, th.von_neumann, value)
            }
        }
    }
}

/// sup_x | |ρ_j Ψ_j|² - φ_n² | on `grid` at time t.
pub fn density_deviation(profile: &TimeProfile, level: &SpectralLevel, t: f64, grid: &Grid1D) -> Result<f64> {
    let snap = Snapshot::new(profile, level, t)?;
    grid.points()
        .par_iter()
        .map(|&x| Ok((snap.reconstructed_density(x)? - level.density(x)).abs()))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max))
}

/// Max pointwise |Ψ_CN - Ψ| at time t after propagating φ_n from t = 0.
pub fn propagation_deviation(
    profile: &TimeProfile,
    level: &SpectralLevel,
    t: f64,
    grid: &Grid1D,
    dt: f64,
) -> Result<f64> {
    let xs = grid.points();
    let init = WavefunctionSample::from_values(
        level.n,
        0.0,
        xs.clone(),
        xs.iter().map(|&x| Complex64::new(level.value(x), 0.0)).collect(),
    );
    let numeric = crank_nicolson_propagate(profile, &init, grid, 0.0, t, dt)?;
    let exact = assemble_wavefunction(profile, level, t, &xs)?;
    Ok(numeric.state.max_abs_difference(&exact))
}

/// Runs every check; records come back in a deterministic order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let levels = cfg.levels.iter().map(|&n| level(n)).collect::<Result<Vec<_>>>()?;
    let lmax = levels.iter().map(|l| l.lambda).fold(0.0, f64::max);
    let full_grid = Grid1D::symmetric(cfg.grid.half_width.max(lmax + 12.0), cfg.grid.dx)?;
    let runner = Runner { cfg, levels, full_grid };

    let mut jobs = Vec::new();
    for n in &cfg.levels {
        jobs.push(Job::EtaNorm { n: *n });
    }
    for (p, (_, profile)) in cfg.profiles.iter().enumerate() {
        let margin = cfg.grid.delta.max(1e-3);
        let inv_times = spread_times(cfg.invariant_times, profile.t_max(), margin);
        for &n in &cfg.levels {
            for &t in &cfg.times {
                jobs.push(Job::Tdse { p, n, t });
                jobs.push(Job::TdseBranchwise { p, n, t });
                jobs.push(Job::Continuity { p, n, t });
                jobs.push(Job::Density { p, n, t });
            }
            for &t in &inv_times {
                for region in Region::BOTH {
                    jobs.push(Job::InvariantEigen { p, n, region, t });
                }
            }
            if let Some(t) = cfg.propagate_to {
                jobs.push(Job::Propagation { p, n, t });
            }
        }
        for &t in &inv_times {
            for region in Region::BOTH {
                jobs.push(Job::VonNeumann { p, region, t });
                jobs.push(Job::PseudoHermiticity { p, region, t });
            }
        }
        for region in Region::BOTH {
            jobs.push(Job::VonNeumann { p, region, t: 0.0 });
        }
        if let Some(&t) = inv_times.first() {
            // Flipping k is the identity when f vanishes.
            let k_active = profile.coefficients_at(t).map(|c| c.k != 0.0).unwrap_or(true);
            for region in Region::BOTH {
                jobs.push(Job::AlphaControl { p, region, t });
                if k_active {
                    jobs.push(Job::WrongSignVonNeumann { p, region, t });
                }
                jobs.push(Job::FrozenMomentum { p, region, t });
            }
            if let (Some(&n), true) = (cfg.levels.first(), k_active) {
                jobs.push(Job::WrongSignTdse { p, n, t });
            }
        }
    }
    Ok(jobs.par_iter().map(|j| runner.run(j)).collect())
}
