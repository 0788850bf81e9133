//! Closed-form solution of the time-dependent problem, branch by branch.
//!
//! On region j (sign σ = +1 for x >= 0, -1 for x <= 0) the branch is
//!
//! ```text
//! Ψ_j(x, t) = e^{i(ε_j + δ_j + ζ)} e^{σ k x/2} φ_{n,j}(x - iσb),   b = g k/2 - w
//! φ_{n,j}(y) = e^{-i g c/4} e^{-iσ g y/2} φ_n^{(j)}(y + σc),    c = (k² - g² + 4s)/4
//! ```
//!
//! where φ_n^{(j)} is the analytic continuation of the region-j branch of
//! the stationary eigenfunction and δ_j is the phase offset carried by
//! [`TransformSpec`]. At t = 0 everything reduces to φ_n.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{CoefficientSet, TimeProfile};
use crate::spectrum::SpectralLevel;
use crate::Region;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of U_j and ρ_j at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSpec {
    pub region: Region,
    pub t: f64,
    /// Real translation c applied by U_j (as y + σc).
    pub shift_c: f64,
    /// Wavenumber of the plane-wave factor of U_j: -g/2 (region 1), +g/2 (region 2).
    pub plane_wave_slope: f64,
    /// Scalar phase from splitting U_j into ordered factors.
    pub bch_phase: f64,
    /// Coefficient of x in the exponent of ρ_j: -k/2 (region 1), +k/2 (region 2).
    pub rho_exponent_x: f64,
    /// Imaginary translation g k/2 - w of ρ_j.
    pub rho_shift: f64,
    /// Extra phase added to ε_j so both branches obey the same equation.
    pub phase_offset: f64,
}

impl TransformSpec {
    pub fn new(c: &CoefficientSet, region: Region) -> Self {
        let sigma = region.sign();
        let shift_c = c.shift_c();
        let phase_offset = match region {
            Region::Positive => -(c.g / 24.0) * (c.g * c.g + 3.0 * c.k * c.k + 12.0 * c.s),
            Region::Negative => 0.0,
        };
        TransformSpec {
            region,
            t: c.t,
            shift_c,
            plane_wave_slope: -sigma * c.g / 2.0,
            bch_phase: -c.g * shift_c / 4.0,
            rho_exponent_x: -sigma * c.k / 2.0,
            rho_shift: c.rho_shift(),
            phase_offset,
        }
    }

    pub fn is_identity(&self) -> bool {
        [
            self.shift_c,
            self.plane_wave_slope,
            self.bch_phase,
            self.rho_exponent_x,
            self.rho_shift,
            self.phase_offset,
        ]
        .iter()
        .all(|&v| v == 0.0)
    }

    /// U_j φ_n at complex y.
    pub fn transformed(&self, level: &SpectralLevel, y: Complex64) -> Result<Complex64> {
        let sigma = self.region.sign();
        let phase = (I * (self.bch_phase + self.plane_wave_slope * y)).exp();
        Ok(phase * level.continued(y + sigma * self.shift_c, self.region)?)
    }

    /// d/dy of [`Self::transformed`].
    pub fn transformed_derivative(&self, level: &SpectralLevel, y: Complex64) -> Result<Complex64> {
        let sigma = self.region.sign();
        let phase = (I * (self.bch_phase + self.plane_wave_slope * y)).exp();
        let arg = y + sigma * self.shift_c;
        let value = level.continued(arg, self.region)?;
        let slope = level.continued_derivative(arg, self.region)?;
        Ok(phase * (I * self.plane_wave_slope * value + slope))
    }

    /// Point at which ρ_j⁻¹ samples its argument: x - iσb.
    fn rho_inverse_point(&self, x: Complex64) -> Complex64 {
        x - I * self.region.sign() * self.rho_shift
    }
}

/// Position-representation value of U_j φ_n at time t.
pub fn transformed_eigenfunction(
    profile: &TimeProfile,
    level: &SpectralLevel,
    region: Region,
    y: Complex64,
    t: f64,
) -> Result<Complex64> {
    TransformSpec::new(&profile.coefficients_at(t)?, region).transformed(level, y)
}

/// Everything needed to evaluate both branches at one instant.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot {
    pub level: SpectralLevel,
    pub coefficients: CoefficientSet,
    pub specs: [TransformSpec; 2],
    /// ε_n^j(t) for regions 1 and 2.
    pub epsilon: [f64; 2],
    prefactor: [Complex64; 2],
}

impl Snapshot {
    pub fn new(profile: &TimeProfile, level: &SpectralLevel, t: f64) -> Result<Self> {
        let coefficients = profile.coefficients_at(t)?;
        let mut specs = [TransformSpec::new(&coefficients, Region::Positive); 2];
        specs[1] = TransformSpec::new(&coefficients, Region::Negative);
        let mut epsilon = [0.0; 2];
        let mut prefactor = [Complex64::new(1.0, 0.0); 2];
        for region in Region::BOTH {
            let j = region.index() as usize - 1;
            epsilon[j] = profile.phase(level, region, t)?.epsilon;
            let total = epsilon[j] + specs[j].phase_offset + coefficients.zeta;
            prefactor[j] = Complex64::from_polar(1.0, total);
        }
        Ok(Snapshot {
            level: *level,
            coefficients,
            specs,
            epsilon,
            prefactor,
        })
    }

    pub fn spec(&self, region: Region) -> &TransformSpec {
        &self.specs[region.index() as usize - 1]
    }

    /// e^{i(ε_j + δ_j + ζ)}; unit modulus.
    pub fn phase_factor(&self, region: Region) -> Complex64 {
        self.prefactor[region.index() as usize - 1]
    }

    /// Branch Ψ_j continued to complex x.
    pub fn branch(&self, region: Region, x: Complex64) -> Result<Complex64> {
        let spec = self.spec(region);
        let envelope = (-spec.rho_exponent_x * x).exp();
        let inner = spec.transformed(&self.level, spec.rho_inverse_point(x))?;
        Ok(self.phase_factor(region) * envelope * inner)
    }

    /// ∂Ψ_j/∂x.
    pub fn branch_derivative(&self, region: Region, x: Complex64) -> Result<Complex64> {
        let spec = self.spec(region);
        let envelope = (-spec.rho_exponent_x * x).exp();
        let y = spec.rho_inverse_point(x);
        let inner = spec.transformed(&self.level, y)?;
        let inner_slope = spec.transformed_derivative(&self.level, y)?;
        Ok(self.phase_factor(region) * envelope * (inner_slope - spec.rho_exponent_x * inner))
    }

    /// Ψ(x, t) on the real line; x = 0 belongs to region 1.
    pub fn value(&self, x: f64) -> Result<Complex64> {
        self.branch(Region::of(x), Complex64::new(x, 0.0))
    }

    /// ρ_j Ψ_j at real x, obtained by applying ρ_j to the continued branch:
    /// ρ_j ψ(x) = e^{-iζ} e^{-σk(x + iσb)/2} ψ(x + iσb).
    pub fn dyson_frame(&self, region: Region, x: f64) -> Result<Complex64> {
        let spec = self.spec(region);
        let shifted = Complex64::new(x, region.sign() * spec.rho_shift);
        let envelope = (spec.rho_exponent_x * shifted).exp();
        let unwind = Complex64::from_polar(1.0, -self.coefficients.zeta);
        Ok(unwind * envelope * self.branch(region, shifted)?)
    }

    /// |ρ_j Ψ_j|² using the branch that owns x.
    pub fn reconstructed_density(&self, x: f64) -> Result<f64> {
        Ok(self.dyson_frame(Region::of(x), x)?.norm_sqr())
    }

    /// Value and slope jumps between the two branches at x = 0, relative
    /// to max(|Ψ_1(0)|, |Ψ_1'(0)|, 1e-300).
    pub fn origin_mismatch(&self) -> Result<OriginMismatch> {
        let zero = Complex64::new(0.0, 0.0);
        let (v1, v2) = (
            self.branch(Region::Positive, zero)?,
            self.branch(Region::Negative, zero)?,
        );
        let (d1, d2) = (
            self.branch_derivative(Region::Positive, zero)?,
            self.branch_derivative(Region::Negative, zero)?,
        );
        let scale = v1.norm().max(d1.norm()).max(1e-300);
        Ok(OriginMismatch {
            value: (v1 - v2).norm() / scale,
            slope: (d1 - d2).norm() / scale,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginMismatch {
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavefunctionSample {
    pub n: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
    pub regions: Vec<Region>,
}

impl WavefunctionSample {
    pub fn from_values(n: usize, t: f64, x: Vec<f64>, values: Vec<Complex64>) -> Self {
        let regions = x.iter().map(|&v| Region::of(v)).collect();
        WavefunctionSample {
            n,
            t,
            x,
            values,
            regions,
        }
    }

    pub fn max_abs_difference(&self, other: &WavefunctionSample) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Ψ_n(x, t) on `grid`, which must contain x = 0.
pub fn assemble_wavefunction(
    profile: &TimeProfile,
    level: &SpectralLevel,
    t: f64,
    grid: &[f64],
) -> Result<WavefunctionSample> {
    if !grid.contains(&0.0) {
        return Err(Error::Invalid("grid must contain x = 0".into()));
    }
    let snap = Snapshot::new(profile, level, t)?;
    let values = grid.par_iter().map(|&x| snap.value(x)).collect::<Result<Vec<_>>>()?;
    Ok(WavefunctionSample::from_values(level.n, t, grid.to_vec(), values))
}

/// Which part of the line an η-inner product covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extent {
    Half(Region),
    Whole,
}

/// ⟨Ψ_n|η|Ψ_n⟩ restricted to `extent`. Since |ρ_j Ψ_{n,j}| = |U_j φ_n| and
/// U_j is unitary this is the region-wise integral of φ_n², independent of
/// time.
pub fn eta_inner_product(level: &SpectralLevel, extent: Extent) -> Result<f64> {
    let half = level.half_line_norm()?;
    Ok(match extent {
        Extent::Half(_) => half,
        Extent::Whole => 2.0 * half,
    })
}
