use num_complex::Complex64;
use serde::Serialize;

use super::grid::Grid1D;
use super::operator::{build_hamiltonian, build_invariant, hamiltonian_from, DiscretizedOperator, Potential};
use crate::error::{Error, Result};
use crate::profile::{CoefficientSet, InvariantCoefficients, TimeProfile};
use crate::solution::Snapshot;
use crate::spectrum::{Parity, SpectralLevel};
use crate::Region;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time offset of the central differences.
pub const DEFAULT_DELTA: f64 = 1e-5;

/// Nodes excluded at each edge of the full-line TDSE residual.
const TDSE_EDGE: usize = 3;

/// Rows excluded at each edge of the operator-norm residual.
const VON_NEUMANN_EDGE: usize = 2;

fn l2(v: impl Iterator<Item = Complex64>) -> f64 {
    v.map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖i(Ψ(t+δ) - Ψ(t-δ))/(2δ) - H(t)Ψ(t)‖₂ / ‖Ψ(t)‖₂ over interior nodes of
/// the full-line grid, skipping x = 0 for odd n.
pub fn tdse_residual(profile: &TimeProfile, level: &SpectralLevel, t: f64, grid: &Grid1D, delta: f64) -> Result<f64> {
    let xs = grid.points();
    let sample = |t: f64| -> Result<Vec<Complex64>> {
        let snap = Snapshot::new(profile, level, t)?;
        xs.iter().map(|&x| snap.value(x)).collect()
    };
    let (lo, mid, hi) = (sample(t - delta)?, sample(t)?, sample(t + delta)?);
    let h_psi = build_hamiltonian(profile, t, grid)?.apply(&mid);
    let origin = grid.origin_index();
    let keep =
        |i: &usize| *i >= TDSE_EDGE && *i + TDSE_EDGE < xs.len() && !(level.parity == Parity::Odd && *i == origin);
    let residual = (0..xs.len())
        .filter(keep)
        .map(|i| I * (hi[i] - lo[i]) / (2.0 * delta) - h_psi[i]);
    let norm = l2((0..xs.len()).filter(keep).map(|i| mid[i]));
    Ok(l2(residual) / norm)
}

/// The same residual evaluated on each half-line with that region's branch
/// alone (the stencil at x = 0 reaches into the branch's own continuation),
/// so the junction at the origin plays no part.
pub fn tdse_residual_branchwise(
    profile: &TimeProfile,
    level: &SpectralLevel,
    t: f64,
    grid: &Grid1D,
    delta: f64,
) -> Result<f64> {
    let m = profile.mass_at(t)?;
    let f = profile.coupling_at(t)?;
    let snaps = [
        Snapshot::new(profile, level, t - delta)?,
        Snapshot::new(profile, level, t)?,
        Snapshot::new(profile, level, t + delta)?,
    ];
    let dx = grid.dx;
    let mut res_sq = 0.0;
    let mut norm_sq = 0.0;
    let xs = grid.points();
    for region in Region::BOTH {
        let sigma = region.sign();
        for (i, &x) in xs.iter().enumerate() {
            if i < TDSE_EDGE || i + TDSE_EDGE >= xs.len() || x * sigma < 0.0 {
                continue;
            }
            let at = |k: usize, x: f64| snaps[k].branch(region, Complex64::new(x, 0.0));
            let v = at(1, x)?;
            let lap = (at(1, x + dx)? - 2.0 * v + at(1, x - dx)?) / (dx * dx);
            let h_psi = -lap / (2.0 * m) + I * f * x.abs() * v;
            let r = I * (at(2, x)? - at(0, x)?) / (2.0 * delta) - h_psi;
            res_sq += r.norm_sqr();
            norm_sq += v.norm_sqr();
        }
    }
    Ok((res_sq / norm_sq).sqrt())
}

/// Half-line grid of `region` extended by one ghost node across the origin.
fn ghost_extended(grid: &Grid1D, region: Region) -> Result<(Grid1D, Vec<f64>)> {
    let dx = grid.dx;
    let ext = match region {
        Region::Positive => Grid1D::new(grid.x_min - dx, grid.x_max, grid.n_points + 1)?,
        Region::Negative => Grid1D::new(grid.x_min, grid.x_max + dx, grid.n_points + 1)?,
    };
    let xs = ext.points();
    Ok((ext, xs))
}

fn check_half_line(grid: &Grid1D, region: Region) -> Result<()> {
    let ok = match region {
        Region::Positive => grid.x_min == 0.0,
        Region::Negative => grid.x_max == 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "grid is not the closed half-line of region {region}"
        )))
    }
}

/// ‖I_j^ph Ψ_{n,j} - λ Ψ_{n,j}‖₂ / ‖Ψ_{n,j}‖₂ on the half-line grid of
/// `region`. The stencil at x = 0 uses one ghost node taken from the
/// branch's continuation; the far edge is Dirichlet.
pub fn invariant_eigen_residual(
    profile: &TimeProfile,
    level: &SpectralLevel,
    region: Region,
    t: f64,
    grid: &Grid1D,
) -> Result<f64> {
    check_half_line(grid, region)?;
    let snap = Snapshot::new(profile, level, t)?;
    let coefficients = profile.invariant_coefficients(t, region)?;
    let (ext, xs) = ghost_extended(grid, region)?;
    let psi = xs
        .iter()
        .map(|&x| snap.branch(region, Complex64::new(x, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let ip = build_invariant(&coefficients, &ext).apply(&psi);
    // Skip the ghost row and the Dirichlet row at the far edge.
    let rows = 1..xs.len() - 1;
    let res = l2(rows.clone().map(|i| ip[i] - level.lambda * psi[i]));
    let norm = l2(rows.map(|i| psi[i]));
    Ok(res / norm)
}

/// How the invariant is built over time in [`von_neumann_residual_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InvariantVariant {
    #[default]
    Exact,
    /// β₃ (α₃) held at its value at the given time; a broken invariant.
    FrozenMomentum(f64),
}

fn invariant_at(
    profile: &TimeProfile,
    t: f64,
    region: Region,
    variant: InvariantVariant,
) -> Result<InvariantCoefficients> {
    let mut c = profile.invariant_coefficients(t, region)?;
    if let InvariantVariant::FrozenMomentum(t_frozen) = variant {
        c.p = profile.invariant_coefficients(t_frozen, region)?.p;
    }
    Ok(c)
}

/// Max-row-sum norm of ∂_t I - i[I, H] relative to ‖H‖ on the half-line
/// grid of `region`, where |x| = σx is smooth. Central differences in t,
/// forward at the start of the window.
pub fn von_neumann_residual(profile: &TimeProfile, region: Region, t: f64, grid: &Grid1D, delta: f64) -> Result<f64> {
    von_neumann_residual_with(profile, region, t, grid, delta, InvariantVariant::Exact)
}

pub fn von_neumann_residual_with(
    profile: &TimeProfile,
    region: Region,
    t: f64,
    grid: &Grid1D,
    delta: f64,
    variant: InvariantVariant,
) -> Result<f64> {
    check_half_line(grid, region)?;
    let inv =
        |t| -> Result<DiscretizedOperator> { Ok(build_invariant(&invariant_at(profile, t, region, variant)?, grid)) };
    let one = Complex64::new(1.0, 0.0);
    let dot = if t - delta < 0.0 {
        inv(t + delta)?.combine(one / delta, &inv(t)?, -one / delta)
    } else {
        inv(t + delta)?.combine(one / (2.0 * delta), &inv(t - delta)?, -one / (2.0 * delta))
    };
    let abs_x: Vec<f64> = grid.points().into_iter().map(f64::abs).collect();
    let h = hamiltonian_from(
        profile.mass_at(t)?,
        profile.coupling_at(t)?,
        &abs_x,
        grid.dx,
        Potential::Imaginary,
    )?;
    let comm = inv(t)?.commutator(&h);
    let residual = dot.combine(one, &comm, -I);
    Ok(residual.max_row_sum(VON_NEUMANN_EDGE) / h.max_row_sum(VON_NEUMANN_EDGE))
}

/// Parameters of η_j = exp(-αx - βp).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricParameters {
    pub alpha: f64,
    pub beta: f64,
}

impl MetricParameters {
    pub fn of(c: &CoefficientSet, region: Region) -> Self {
        let sigma = region.sign();
        MetricParameters {
            alpha: sigma * c.k,
            beta: sigma * (c.g * c.k - 2.0 * c.w),
        }
    }
}

/// Coefficients of η I η⁻¹ given those of I, using
/// η x η⁻¹ = x + iβ and η p η⁻¹ = p - iα.
pub fn conjugate_by_metric(c: &InvariantCoefficients, metric: MetricParameters) -> InvariantCoefficients {
    let (a, b) = (metric.alpha, metric.beta);
    InvariantCoefficients {
        region: c.region,
        p2: c.p2,
        x: c.x,
        p: c.p - 2.0 * I * a * c.p2,
        constant: c.constant - a * a * c.p2 + I * b * c.x - I * a * c.p,
    }
}

/// max |coefficient of η I η⁻¹ - coefficient of I†| at time t, with α
/// shifted by `alpha_perturbation`.
pub fn pseudo_hermiticity_check(profile: &TimeProfile, region: Region, t: f64, alpha_perturbation: f64) -> Result<f64> {
    let c = profile.coefficients_at(t)?;
    let inv = InvariantCoefficients::from_set(&c, region);
    let mut metric = MetricParameters::of(&c, region);
    metric.alpha += alpha_perturbation;
    let similar = conjugate_by_metric(&inv, metric);
    Ok(similar
        .as_array()
        .iter()
        .zip(inv.as_array())
        .map(|(s, c)| (s - c.conj()).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Fault;
    use crate::spectrum::level;

    #[test]
    fn pseudo_hermiticity_exact_and_sensitive() {
        for (_, p) in TimeProfile::reference_set(1.0).unwrap() {
            for region in Region::BOTH {
                assert_eq!(pseudo_hermiticity_check(&p, region, 0.0, 0.0).unwrap(), 0.0);
                for i in 1..=10 {
                    let t = 0.1 * i as f64;
                    assert!(pseudo_hermiticity_check(&p, region, t, 0.0).unwrap() <= 1e-12);
                    assert!(pseudo_hermiticity_check(&p, region, t, 1e-3).unwrap() >= 1e-4);
                }
            }
        }
    }

    #[test]
    fn invariant_residual_at_origin_of_time() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        for n in 0..3 {
            let l = level(n).unwrap();
            for region in Region::BOTH {
                let g = Grid1D::half_line(region, l.lambda + 12.0, 0.005).unwrap();
                let r = invariant_eigen_residual(&p, &l, region, 0.0, &g).unwrap();
                assert!(r <= 1e-4, "n={n} {region}: {r}");
            }
        }
    }

    #[test]
    fn invariant_residual_mid_window() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        let l = level(0).unwrap();
        let g = Grid1D::half_line(Region::Positive, l.lambda + 12.0, 0.005).unwrap();
        let r = invariant_eigen_residual(&p, &l, Region::Positive, 0.5, &g).unwrap();
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn wrong_sign_k_breaks_the_invariant_dynamics() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        let bad = p.clone().with_fault(Fault::FlipK);
        for region in Region::BOTH {
            let g = Grid1D::half_line(region, 14.0, 0.005).unwrap();
            let good = von_neumann_residual(&p, region, 0.5, &g, DEFAULT_DELTA).unwrap();
            let broken = von_neumann_residual(&bad, region, 0.5, &g, DEFAULT_DELTA).unwrap();
            assert!(good <= 1e-4 && broken > 1e-4, "{good} {broken}");
        }
    }

    #[test]
    fn von_neumann_free_particle_and_control() {
        let p = TimeProfile::constant(1.0, 0.0, 1.0).unwrap();
        for region in Region::BOTH {
            let g = Grid1D::half_line(region, 14.0, 0.005).unwrap();
            let r = von_neumann_residual(&p, region, 0.4, &g, DEFAULT_DELTA).unwrap();
            assert!(r <= 1e-6, "{r}");
            let edge = von_neumann_residual(&p, region, 0.0, &g, DEFAULT_DELTA).unwrap();
            assert!(edge <= 1e-4, "{edge}");
            let frozen = von_neumann_residual_with(
                &p,
                region,
                0.4,
                &g,
                DEFAULT_DELTA,
                InvariantVariant::FrozenMomentum(0.1),
            )
            .unwrap();
            assert!(frozen > 1e-4, "{frozen}");
        }
    }

    #[test]
    fn tdse_branchwise_is_small() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        let l = level(0).unwrap();
        let g = Grid1D::symmetric(16.0, 0.01).unwrap();
        let r = tdse_residual_branchwise(&p, &l, 0.3, &g, DEFAULT_DELTA).unwrap();
        assert!(r <= 1e-4, "{r}");
        let bad = p.clone().with_fault(Fault::FlipK);
        assert!(tdse_residual_branchwise(&bad, &l, 0.3, &g, DEFAULT_DELTA).unwrap() > 1e-1);
    }

    #[test]
    fn tdse_residual_needs_both_neighbours_in_window() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        let l = level(0).unwrap();
        let g = Grid1D::symmetric(8.0, 0.05).unwrap();
        assert!(tdse_residual(&p, &l, 0.0, &g, DEFAULT_DELTA).is_err());
    }
}
