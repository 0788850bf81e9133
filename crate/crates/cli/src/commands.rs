use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use ptwell_core::airy::{ai, ai_prime, airy_derivative_zero, airy_function_zero};
use ptwell_core::profile::Fault;
use ptwell_core::solution::Snapshot;
use ptwell_core::verify::suite::{run_suite, CheckRecord, SuiteConfig};
use ptwell_core::verify::Grid1D;
use ptwell_core::{level, TimeProfile};

use crate::config::{Format, RunConfig};
use crate::output::{emit, ensure_dir, num, time_tag, write_file, Table};

/// Half-width of the density and solve grids.
pub const PLOT_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_OUT: &str = "ptwell-out";

pub struct Run {
    pub cfg: RunConfig,
    pub levels: Option<Vec<usize>>,
    pub times: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub flip_k: bool,
}

impl Run {
    fn levels(&self, fallback: &[usize]) -> Vec<usize> {
        self.levels
            .clone()
            .or_else(|| self.cfg.levels.clone())
            .unwrap_or_else(|| fallback.to_vec())
    }

    fn times(&self) -> Vec<f64> {
        self.times.clone().unwrap_or_else(|| self.cfg.times.clone())
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| self.cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn table_dir(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| self.cfg.out_dir.clone())
    }

    fn faulted(&self, p: TimeProfile) -> TimeProfile {
        if self.flip_k {
            p.with_fault(Fault::FlipK)
        } else {
            p
        }
    }

    fn plot_grid(&self) -> Result<Vec<f64>> {
        Ok(Grid1D::symmetric(PLOT_HALF_WIDTH, self.cfg.grid.dx)?.points())
    }
}

pub fn zeros(ctx: &Run, count: usize) -> Result<()> {
    let mut table = Table::new(vec!["k", "a_k", "ai_prime_at_a_k", "a_prime_k", "ai_at_a_prime_k"]);
    for k in 1..=count {
        let a = airy_function_zero(k)?.location;
        let ap = airy_derivative_zero(k)?.location;
        table.push(vec![k.into(), a.into(), ai_prime(a)?.into(), ap.into(), ai(ap)?.into()]);
    }
    emit(&table, ctx.format, ctx.table_dir().as_deref(), "zeros")
}

pub fn spectrum(ctx: &Run) -> Result<()> {
    let mut table = Table::new(vec!["n", "parity", "lambda", "norm_const"]);
    for n in ctx.levels(&crate::config::DEFAULT_LEVELS) {
        let l = level(n)?;
        table.push(vec![
            n.into(),
            l.parity.to_string().into(),
            l.lambda.into(),
            l.norm_const.into(),
        ]);
    }
    emit(&table, ctx.format, ctx.table_dir().as_deref(), "spectrum")
}

pub fn density(ctx: &Run) -> Result<()> {
    let dir = ctx.out_dir();
    ensure_dir(&dir)?;
    let xs = ctx.plot_grid()?;
    for n in ctx.levels(&crate::config::DEFAULT_LEVELS) {
        let l = level(n)?;
        let mut table = Table::new(vec!["x", "density"]);
        for &x in &xs {
            table.push(vec![x.into(), l.density(x).into()]);
        }
        let path = write_file(&dir, &format!("density_n{n}"), ctx.format, &table.render(ctx.format)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn solve(ctx: &Run) -> Result<()> {
    let dir = ctx.out_dir();
    ensure_dir(&dir)?;
    let (_, profile) = ctx.cfg.solve_profile()?;
    let profile = ctx.faulted(profile);
    let xs = ctx.plot_grid()?;
    for n in ctx.levels(&crate::config::DEFAULT_LEVELS) {
        let l = level(n)?;
        for t in ctx.times() {
            let snap = Snapshot::new(&profile, &l, t).with_context(|| format!("n = {n}, t = {t}"))?;
            let mut table = Table::new(vec!["x", "re_psi", "im_psi", "density_reconstructed"]);
            for &x in &xs {
                let psi = snap.value(x)?;
                table.push(vec![
                    x.into(),
                    psi.re.into(),
                    psi.im.into(),
                    snap.reconstructed_density(x)?.into(),
                ]);
            }
            let stem = format!("solve_n{n}_t{}", time_tag(t));
            let path = write_file(&dir, &stem, ctx.format, &table.render(ctx.format)?)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub const VERIFY_LEVELS: [usize; 3] = [0, 1, 2];

pub fn suite_config(ctx: &Run) -> Result<SuiteConfig> {
    let profiles = match &ctx.cfg.profile {
        Some((name, p)) => vec![(name.clone(), p.clone())],
        None => TimeProfile::reference_set(1.0)?
            .into_iter()
            .map(|(n, p)| (n.to_string(), p))
            .collect(),
    };
    Ok(SuiteConfig {
        profiles: profiles.into_iter().map(|(n, p)| (n, ctx.faulted(p))).collect(),
        levels: ctx.levels(&VERIFY_LEVELS),
        times: ctx.times(),
        invariant_times: ctx.cfg.invariant_times,
        propagate_to: ctx.cfg.propagate_to,
        grid: ctx.cfg.grid,
        thresholds: ctx.cfg.thresholds,
    })
}

/// Returns whether every check passed.
pub fn verify(ctx: &Run) -> Result<bool> {
    let records = run_suite(&suite_config(ctx)?)?;
    let bytes = render_report(&records, ctx.format)?;
    match ctx.table_dir() {
        Some(dir) => {
            ensure_dir(&dir)?;
            let path = write_file(&dir, "verify_report", ctx.format, &bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::Write::write_all(&mut std::io::stdout().lock(), &bytes)?,
    }
    let failed: Vec<&CheckRecord> = records.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!(
            "FAIL {} {} value {} threshold {}",
            r.check,
            serde_json::to_string(&r.params)?,
            num(r.value),
            num(r.threshold)
        );
    }
    eprintln!("{} of {} checks passed", records.len() - failed.len(), records.len());
    Ok(failed.is_empty())
}

#[derive(Serialize)]
struct ReportRow<'a> {
    check: &'a str,
    params: &'a BTreeMap<String, Value>,
    value: Option<f64>,
    threshold: Option<f64>,
    pass: bool,
}

fn rounded(x: f64) -> Option<f64> {
    x.is_finite().then(|| num(x).parse().expect("formatted float parses"))
}

pub fn render_report(records: &[CheckRecord], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let rows: Vec<ReportRow> = records
                .iter()
                .map(|r| ReportRow {
                    check: &r.check,
                    params: &r.params,
                    value: rounded(r.value),
                    threshold: rounded(r.threshold),
                    pass: r.pass,
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut table = Table::new(vec!["check", "params", "value", "threshold", "pass"]);
            for r in records {
                let params = serde_json::to_string(&r.params)?;
                table.push(vec![
                    r.check.clone().into(),
                    params.into(),
                    r.value.into(),
                    r.threshold.into(),
                    r.pass.into(),
                ]);
            }
            table.render(Format::Csv)
        }
    }
}
