use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;

use super::grid::Grid1D;
use super::operator::{hamiltonian_from, solve_tridiagonal, Potential};
use crate::error::{Error, Result};
use crate::profile::TimeProfile;
use crate::solution::WavefunctionSample;

/// Largest time step accepted by [`crank_nicolson_propagate`].
pub const MAX_DT: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct PropagationResult {
    pub state: WavefunctionSample,
    pub steps: usize,
    pub dt: f64,
    /// Max over steps of |Δ³ψ|/12, the leading local error of the scheme.
    pub max_local_truncation: f64,
    /// Max |ψ| seen two nodes from either edge.
    pub edge_probe: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Crank–Nicolson from `initial` (sampled on `grid`) over [t0, t1]; the
/// step is shrunk so that it divides the span exactly.
pub fn crank_nicolson_propagate(
    profile: &TimeProfile,
    initial: &WavefunctionSample,
    grid: &Grid1D,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PropagationResult> {
    let started = Instant::now();
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::Invalid(format!("time step must lie in (0, {MAX_DT}], got {dt}")));
    }
    if initial.values.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "initial state has {} samples for a grid of {}",
            initial.values.len(),
            grid.len()
        )));
    }
    if t1 < t0 {
        return Err(Error::Invalid(format!("end time {t1} precedes start time {t0}")));
    }
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let ratio = dt / (grid.dx * grid.dx);
    if ratio > 10.0 * profile.min_mass() {
        return Err(Error::Invalid(format!(
            "dt/dx² = {ratio} exceeds 10·m_min = {}",
            10.0 * profile.min_mass()
        )));
    }

    let abs_x: Vec<f64> = grid.points().into_iter().map(f64::abs).collect();
    let n = grid.len();
    let mut psi = initial.values.clone();
    let mut history: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    let mut max_local = 0.0f64;
    let probe = |v: &[Complex64]| v[2].norm().max(v[n - 3].norm());
    let mut edge_probe = probe(&psi);
    let half = Complex64::new(0.0, 0.5 * dt);

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        let mid = t + 0.5 * dt;
        let h = hamiltonian_from(
            profile.mass_at(mid)?,
            profile.coupling_at(mid)?,
            &abs_x,
            grid.dx,
            Potential::Imaginary,
        )?;
        let (lower, diag, upper) = h.tridiagonal()?;
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut hv = diag[i] * psi[i];
            if i > 0 {
                hv += lower[i] * psi[i - 1];
            }
            if i + 1 < n {
                hv += upper[i] * psi[i + 1];
            }
            rhs[i] = psi[i] - half * hv;
        }
        let a_lower: Vec<_> = lower.iter().map(|v| half * v).collect();
        let a_upper: Vec<_> = upper.iter().map(|v| half * v).collect();
        let a_diag: Vec<_> = diag.iter().map(|v| 1.0 + half * v).collect();
        let next = solve_tridiagonal(&a_lower, &a_diag, &a_upper, &rhs)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: step + 1,
                t: t + dt,
            });
        }

        history.push(std::mem::replace(&mut psi, next));
        if history.len() == 3 {
            let (a, b, c) = (&history[0], &history[1], &history[2]);
            let third = (0..n)
                .map(|i| (psi[i] - 3.0 * c[i] + 3.0 * b[i] - a[i]).norm())
                .fold(0.0, f64::max);
            max_local = max_local.max(third / 12.0);
            history.remove(0);
        }
        edge_probe = edge_probe.max(probe(&psi));
    }

    Ok(PropagationResult {
        state: WavefunctionSample::from_values(initial.n, t1, grid.points(), psi),
        steps,
        dt,
        max_local_truncation: max_local,
        edge_probe,
        wall_time: started.elapsed(),
    })
}
