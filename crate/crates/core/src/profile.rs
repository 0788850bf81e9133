//! Model inputs m(t) and f(t) and every time function derived from them.
//!
//! The primitives are fixed to vanish at t = 0:
//!
//! ```text
//! g = -∫ 1/m,  k = 2∫ f,  s = -∫ f k,  w = ∫ f g
//! θ = (f/2)(k g/2 - w)
//! χ¹ = θ - (k² + 3g² + 4s)/(16m),  χ² = θ + (k² - g² + 4s)/(16m)
//! ζ = -(k/4)(g k/2 - w)
//! ```
//!
//! Two independent routes produce them. A cumulative table integrates the
//! triangular system y' = F(t, y) with RK4 (composite Simpson for the pure
//! quadratures) on a grid aligned with any sample knots, doubling the
//! resolution until the Richardson estimate drops below 1e-10; off-node
//! values take one partial step from the preceding node. Built-in
//! families additionally have closed forms, which `coefficients_at`
//! prefers when present.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SpectralLevel;
use crate::Region;

/// Piecewise-linear samples (t_i, v_i) with strictly increasing t_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Invalid(format!(
                "sample table has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Invalid("sample table needs at least two rows".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("sample table contains a non-finite entry".into()));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(format!(
                "sample times must increase strictly (row {})",
                i + 2
            )));
        }
        Ok(SampledSeries { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn covers(&self, t_max: f64) -> bool {
        self.times[0] <= 0.0 && *self.times.last().unwrap() >= t_max
    }

    pub fn value(&self, t: f64) -> f64 {
        let ts = &self.times;
        let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
        let (t0, t1) = (ts[i - 1], ts[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MassLaw {
    Constant {
        m0: f64,
    },
    /// m0 e^{γt}
    Exponential {
        m0: f64,
        gamma: f64,
    },
    /// m0 (1 + γt)^α
    Power {
        m0: f64,
        gamma: f64,
        alpha: f64,
    },
    #[serde(skip)]
    Sampled(SampledSeries),
}

impl MassLaw {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            MassLaw::Constant { m0 } => *m0,
            MassLaw::Exponential { m0, gamma } => m0 * (gamma * t).exp(),
            MassLaw::Power { m0, gamma, alpha } => m0 * (1.0 + gamma * t).powf(*alpha),
            MassLaw::Sampled(s) => s.value(t),
        }
    }

    /// ∫₀ᵗ dτ / m(τ), when an antiderivative is known.
    fn inverse_integral(&self, t: f64) -> Option<f64> {
        match *self {
            MassLaw::Constant { m0 } => Some(t / m0),
            MassLaw::Exponential { m0, gamma } => Some(t * exp_moment(0, gamma * t) / m0),
            MassLaw::Power { m0, gamma, alpha } => {
                let y = gamma * t;
                let l = y.ln_1p();
                Some(t * ratio(l, y) * expm1_ratio((1.0 - alpha) * l) / m0)
            }
            MassLaw::Sampled(_) => None,
        }
    }

    /// Mass laws that reduce to a constant.
    fn constant_value(&self) -> Option<f64> {
        match *self {
            MassLaw::Constant { m0 } => Some(m0),
            MassLaw::Exponential { m0, gamma } if gamma == 0.0 => Some(m0),
            MassLaw::Power { m0, gamma, alpha } if gamma == 0.0 || alpha == 0.0 => Some(m0),
            _ => None,
        }
    }

    fn knots(&self) -> &[f64] {
        match self {
            MassLaw::Sampled(s) => s.times(),
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingLaw {
    Zero,
    Constant {
        f0: f64,
    },
    /// f0 t
    Linear {
        f0: f64,
    },
    /// f0 cos(ωt)
    Cosine {
        f0: f64,
        omega: f64,
    },
    #[serde(skip)]
    Sampled(SampledSeries),
}

impl CouplingLaw {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            CouplingLaw::Zero => 0.0,
            CouplingLaw::Constant { f0 } => *f0,
            CouplingLaw::Linear { f0 } => f0 * t,
            CouplingLaw::Cosine { f0, omega } => f0 * (omega * t).cos(),
            CouplingLaw::Sampled(s) => s.value(t),
        }
    }

    /// Cosine with ω = 0 behaves as a constant.
    fn normalized(&self) -> CouplingLaw {
        match *self {
            CouplingLaw::Cosine { f0, omega } if omega == 0.0 => CouplingLaw::Constant { f0 },
            CouplingLaw::Constant { f0 } if f0 == 0.0 => CouplingLaw::Zero,
            CouplingLaw::Linear { f0 } if f0 == 0.0 => CouplingLaw::Zero,
            CouplingLaw::Cosine { f0, .. } if f0 == 0.0 => CouplingLaw::Zero,
            ref other => other.clone(),
        }
    }

    /// F(t) = ∫₀ᵗ f.
    fn integral(&self, t: f64) -> Option<f64> {
        match self.normalized() {
            CouplingLaw::Zero => Some(0.0),
            CouplingLaw::Constant { f0 } => Some(f0 * t),
            CouplingLaw::Linear { f0 } => Some(0.5 * f0 * t * t),
            CouplingLaw::Cosine { f0, omega } => Some(f0 * (omega * t).sin() / omega),
            CouplingLaw::Sampled(_) => None,
        }
    }

    fn knots(&self) -> &[f64] {
        match self {
            CouplingLaw::Sampled(s) => s.times(),
            _ => &[],
        }
    }
}

/// Debug-only corruption of the derived coefficients, used for negative
/// controls in the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Report -k(t) instead of k(t).
    FlipK,
}

/// Derived time functions at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub t: f64,
    pub g: f64,
    pub k: f64,
    pub s: f64,
    pub w: f64,
    pub theta: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub zeta: f64,
}

impl CoefficientSet {
    pub fn from_primitives(t: f64, mass: f64, coupling: f64, g: f64, k: f64, s: f64, w: f64) -> Self {
        let theta = 0.5 * coupling * (0.5 * k * g - w);
        let chi1 = theta - (k * k + 3.0 * g * g + 4.0 * s) / (16.0 * mass);
        let chi2 = theta + (k * k - g * g + 4.0 * s) / (16.0 * mass);
        let zeta = -0.25 * k * (0.5 * g * k - w);
        CoefficientSet {
            t,
            g,
            k,
            s,
            w,
            theta,
            chi1,
            chi2,
            zeta,
        }
    }

    /// Translation length (k² - g² + 4s)/4 of the unitary transforms.
    pub fn shift_c(&self) -> f64 {
        0.25 * (self.k * self.k - self.g * self.g + 4.0 * self.s)
    }

    /// Imaginary translation g k/2 - w carried by the Dyson maps.
    pub fn rho_shift(&self) -> f64 {
        0.5 * self.g * self.k - self.w
    }

    pub fn chi(&self, region: Region) -> f64 {
        match region {
            Region::Positive => self.chi1,
            Region::Negative => self.chi2,
        }
    }
}

/// Coefficients of the pseudo-Hermitian invariant
/// `p2·p² + x·x + p·p + constant` for one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantCoefficients {
    pub region: Region,
    pub p2: num_complex::Complex64,
    pub x: num_complex::Complex64,
    pub p: num_complex::Complex64,
    pub constant: num_complex::Complex64,
}

impl InvariantCoefficients {
    pub fn from_set(c: &CoefficientSet, region: Region) -> Self {
        use num_complex::Complex64 as C;
        let sign = region.sign();
        InvariantCoefficients {
            region,
            p2: C::new(1.0, 0.0),
            x: C::new(sign, 0.0),
            p: C::new(sign * c.g, sign * c.k),
            constant: C::new(c.s, c.w),
        }
    }

    /// β₁..β₄ (region 1) or α₁..α₄ (region 2).
    pub fn as_array(&self) -> [num_complex::Complex64; 4] {
        [self.p2, self.x, self.p, self.constant]
    }
}

/// A Lewis–Riesenfeld phase; real by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseValue {
    pub n: usize,
    pub region: Region,
    pub t: f64,
    pub epsilon: f64,
}

// State layout of the cumulative table.
const G: usize = 0;
const K: usize = 1;
const S: usize = 2;
const W: usize = 3;
const E1: usize = 4; // ∫ χ¹
const E2: usize = 5; // ∫ χ²
const M: usize = 6; // ∫ 1/(2m)
const DIM: usize = 7;

type State = [f64; DIM];

const BASE_STEPS_PER_UNIT: f64 = 32.0;
const RICHARDSON_TOL: f64 = 1e-10;
const MAX_REFINEMENTS: u32 = 14;
const WINDOW_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
struct CumulativeTable {
    times: Vec<f64>,
    states: Vec<State>,
    richardson_error: f64,
}

#[derive(Debug, Clone)]
pub struct TimeProfile {
    mass: MassLaw,
    coupling: CouplingLaw,
    t_max: f64,
    table: CumulativeTable,
    fault: Option<Fault>,
}

impl TimeProfile {
    /// Validates the laws on [0, t_max] and builds the cumulative table.
    pub fn new(mass: MassLaw, coupling: CouplingLaw, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Invalid(format!("time window end must be positive, got {t_max}")));
        }
        for (name, series) in [
            (
                "mass",
                match &mass {
                    MassLaw::Sampled(s) => Some(s),
                    _ => None,
                },
            ),
            (
                "coupling",
                match &coupling {
                    CouplingLaw::Sampled(s) => Some(s),
                    _ => None,
                },
            ),
        ] {
            if let Some(s) = series {
                if !s.covers(t_max) {
                    return Err(Error::Invalid(format!(
                        "{name} table must cover [0, {t_max}] without extrapolation"
                    )));
                }
            }
        }
        let table = build_table(&mass, &coupling, t_max)?;
        Ok(TimeProfile {
            mass,
            coupling,
            t_max,
            table,
            fault: None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn fault(&self) -> Option<Fault> {
        self.fault
    }

    pub fn mass_law(&self) -> &MassLaw {
        &self.mass
    }

    pub fn coupling_law(&self) -> &CouplingLaw {
        &self.coupling
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Richardson error estimate reached by the cumulative table.
    pub fn table_error(&self) -> f64 {
        self.table.richardson_error
    }

    fn check_window(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < -WINDOW_SLACK || t > self.t_max + WINDOW_SLACK {
            return Err(Error::OutsideWindow { t, t_max: self.t_max });
        }
        Ok(t.clamp(0.0, self.t_max))
    }

    pub fn mass_at(&self, t: f64) -> Result<f64> {
        let t = self.check_window(t)?;
        Ok(self.mass.value(t))
    }

    pub fn coupling_at(&self, t: f64) -> Result<f64> {
        let t = self.check_window(t)?;
        Ok(self.coupling.value(t))
    }

    /// Smallest mass over the table nodes of the window.
    pub fn min_mass(&self) -> f64 {
        self.table
            .times
            .iter()
            .map(|&t| self.mass.value(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Coefficients at `t`; closed forms where the families admit them,
    /// otherwise the cumulative table.
    pub fn coefficients_at(&self, t: f64) -> Result<CoefficientSet> {
        let t = self.check_window(t)?;
        let prim = self.closed_primitives(t).unwrap_or_else(|| self.table_primitives(t));
        Ok(self.assemble(t, prim))
    }

    /// Coefficients at `t` from the cumulative table only.
    pub fn coefficients_quadrature(&self, t: f64) -> Result<CoefficientSet> {
        let t = self.check_window(t)?;
        Ok(self.assemble(t, self.table_primitives(t)))
    }

    /// Closed-form coefficients, if the families have them.
    pub fn coefficients_closed_form(&self, t: f64) -> Result<Option<CoefficientSet>> {
        let t = self.check_window(t)?;
        Ok(self.closed_primitives(t).map(|p| self.assemble(t, p)))
    }

    pub fn invariant_coefficients(&self, t: f64, region: Region) -> Result<InvariantCoefficients> {
        Ok(InvariantCoefficients::from_set(&self.coefficients_at(t)?, region))
    }

    /// ε_n^j(t) = ∫₀ᵗ (χʲ - λ_n/(2m)) dτ from the cumulative table.
    pub fn phase(&self, level: &SpectralLevel, region: Region, t: f64) -> Result<PhaseValue> {
        let t = self.check_window(t)?;
        let y = self.table.interpolate(&self.mass, &self.coupling, t);
        let chi_integral = match region {
            Region::Positive => y[E1],
            Region::Negative => y[E2],
        };
        Ok(PhaseValue {
            n: level.n,
            region,
            t,
            epsilon: chi_integral - level.lambda * y[M],
        })
    }

    /// Closed form of the same phase, when available.
    pub fn phase_closed_form(&self, level: &SpectralLevel, region: Region, t: f64) -> Result<Option<f64>> {
        let t = self.check_window(t)?;
        let Some(inv_mass) = self.mass.inverse_integral(t) else {
            return Ok(None);
        };
        let Some(e) = self.closed_chi_integrals(t) else {
            return Ok(None);
        };
        let chi_integral = match region {
            Region::Positive => e.0,
            Region::Negative => e.1,
        };
        Ok(Some(chi_integral - 0.5 * level.lambda * inv_mass))
    }

    fn assemble(&self, t: f64, (g, k, s, w): (f64, f64, f64, f64)) -> CoefficientSet {
        let k = match self.fault {
            Some(Fault::FlipK) => -k,
            None => k,
        };
        CoefficientSet::from_primitives(t, self.mass.value(t), self.coupling.value(t), g, k, s, w)
    }

    fn table_primitives(&self, t: f64) -> (f64, f64, f64, f64) {
        let y = self.table.interpolate(&self.mass, &self.coupling, t);
        (y[G], y[K], y[S], y[W])
    }

    /// (g, k, s, w) in closed form. Uses s = -F² and w = -∫ f G where
    /// F = ∫ f and G = ∫ 1/m.
    fn closed_primitives(&self, t: f64) -> Option<(f64, f64, f64, f64)> {
        let big_g = self.mass.inverse_integral(t)?;
        let big_f = self.coupling.integral(t)?;
        let fg = self.closed_f_times_g(t)?;
        Some((-big_g, 2.0 * big_f, -big_f * big_f, -fg))
    }

    /// ∫₀ᵗ f(τ) G(τ) dτ.
    fn closed_f_times_g(&self, t: f64) -> Option<f64> {
        let coupling = self.coupling.normalized();
        if coupling == CouplingLaw::Zero {
            return Some(0.0);
        }
        if let Some(m0) = self.mass.constant_value() {
            return match coupling {
                CouplingLaw::Constant { f0 } => Some(f0 * t * t / (2.0 * m0)),
                CouplingLaw::Linear { f0 } => Some(f0 * t.powi(3) / (3.0 * m0)),
                CouplingLaw::Cosine { f0, omega } => {
                    let half = (0.5 * omega * t).sin();
                    let sn = (omega * t).sin();
                    Some(f0 * (t * sn / omega - 2.0 * half * half / (omega * omega)) / m0)
                }
                _ => None,
            };
        }
        match (&self.mass, coupling) {
            // P = (1/m0) ∫₀ᵗ e^{-γs} (F(t) - F(s)) ds
            (&MassLaw::Exponential { m0, gamma }, c) => {
                let x = gamma * t;
                match c {
                    CouplingLaw::Constant { f0 } => Some(f0 * t * t * (exp_moment(0, x) - exp_moment(1, x)) / m0),
                    CouplingLaw::Linear { f0 } => {
                        Some(0.5 * f0 * t.powi(3) * (exp_moment(0, x) - exp_moment(2, x)) / m0)
                    }
                    CouplingLaw::Cosine { f0, omega } => {
                        let damped_sin = exp_integral(Complex64::new(-gamma, omega), t).im;
                        Some(f0 * ((omega * t).sin() * t * exp_moment(0, x) - damped_sin) / (omega * m0))
                    }
                    _ => None,
                }
            }
            (&MassLaw::Power { m0, gamma, alpha }, CouplingLaw::Constant { f0 }) => {
                let y = gamma * t;
                let integral_g = if y.abs() < 0.1 {
                    // t² ∫₀¹ (1 - v)(1 + y v)^{-α} dv, binomial series
                    let (mut c, mut sum) = (1.0, 0.0);
                    for n in 0..60 {
                        let term = c / ((n + 1) * (n + 2)) as f64;
                        sum += term;
                        if term.abs() < 1e-18 * sum.abs() {
                            break;
                        }
                        c *= (-alpha - n as f64) * y / (n + 1) as f64;
                    }
                    t * t * sum / m0
                } else {
                    let (u, l) = (1.0 + y, y.ln_1p());
                    let beta = 1.0 - alpha;
                    if beta.abs() < 0.5 {
                        (u * l * expm1_ratio(beta * l) - y) / (m0 * gamma * gamma * (1.0 + beta))
                    } else {
                        (l * expm1_ratio((2.0 - alpha) * l) - y) / (m0 * gamma * gamma * beta)
                    }
                };
                Some(f0 * integral_g)
            }
            _ => None,
        }
    }

    /// ∫₀ᵗ F² / m, needed by the closed form of ∫ θ.
    fn closed_f_squared_over_mass(&self, t: f64) -> Option<f64> {
        let coupling = self.coupling.normalized();
        if coupling == CouplingLaw::Zero {
            return Some(0.0);
        }
        if let Some(m0) = self.mass.constant_value() {
            return match coupling {
                CouplingLaw::Constant { f0 } => Some(f0 * f0 * t.powi(3) / (3.0 * m0)),
                CouplingLaw::Linear { f0 } => Some(f0 * f0 * t.powi(5) / (20.0 * m0)),
                CouplingLaw::Cosine { f0, omega } => {
                    let sin_sq = x_minus_sin(2.0 * omega * t) / (4.0 * omega);
                    Some(f0 * f0 * sin_sq / (omega * omega * m0))
                }
                _ => None,
            };
        }
        match (&self.mass, coupling) {
            (&MassLaw::Exponential { m0, gamma }, CouplingLaw::Constant { f0 }) => {
                Some(f0 * f0 * t.powi(3) * exp_moment(2, gamma * t) / m0)
            }
            (&MassLaw::Exponential { m0, gamma }, CouplingLaw::Cosine { f0, omega }) => {
                // sin² = (1 - cos 2ωτ)/2
                let damped_cos = exp_integral(Complex64::new(-gamma, 2.0 * omega), t).re;
                let sin_sq = 0.5 * (t * exp_moment(0, gamma * t) - damped_cos);
                Some(f0 * f0 * sin_sq / (omega * omega * m0))
            }
            _ => None,
        }
    }

    /// (∫χ¹, ∫χ²). With Γ = ∫ g²/(16m) = G³/48 and
    /// ∫θ = F P/2 - F² G/2 + ½∫F²/m (P = ∫ f G):
    /// ∫χ¹ = ∫θ - 3Γ, ∫χ² = ∫θ - Γ.
    fn closed_chi_integrals(&self, t: f64) -> Option<(f64, f64)> {
        let big_g = self.mass.inverse_integral(t)?;
        let big_f = self.coupling.integral(t)?;
        let p = self.closed_f_times_g(t)?;
        let f2m = self.closed_f_squared_over_mass(t)?;
        let gamma = big_g.powi(3) / 48.0;
        let theta = 0.5 * big_f * p - 0.5 * big_f * big_f * big_g + 0.5 * f2m;
        Some((theta - 3.0 * gamma, theta - gamma))
    }
}

fn rates(mass: &MassLaw, coupling: &CouplingLaw, t: f64, y: &State) -> State {
    let m = mass.value(t);
    let f = coupling.value(t);
    let c = CoefficientSet::from_primitives(t, m, f, y[G], y[K], y[S], y[W]);
    [-1.0 / m, 2.0 * f, -f * y[K], f * y[G], c.chi1, c.chi2, 0.5 / m]
}

fn rk4_step(mass: &MassLaw, coupling: &CouplingLaw, t: f64, h: f64, y: &State) -> State {
    let axpy = |a: &State, b: &State, s: f64| -> State {
        let mut out = *a;
        for i in 0..DIM {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = rates(mass, coupling, t, y);
    let k2 = rates(mass, coupling, t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = rates(mass, coupling, t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = rates(mass, coupling, t + h, &axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..DIM {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Node times for refinement level r; every level contains the knots.
fn node_times(breaks: &[f64], level: u32) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let steps = ((w[1] - w[0]) * BASE_STEPS_PER_UNIT).ceil().max(1.0) as usize * (1usize << level);
        let h = (w[1] - w[0]) / steps as f64;
        for i in 1..steps {
            out.push(w[0] + h * i as f64);
        }
        out.push(w[1]);
    }
    out
}

fn integrate_nodes(mass: &MassLaw, coupling: &CouplingLaw, times: &[f64]) -> Result<Vec<State>> {
    let mut states = Vec::with_capacity(times.len());
    let mut y = [0.0; DIM];
    states.push(y);
    for w in times.windows(2) {
        let h = w[1] - w[0];
        for probe in [w[0], w[0] + 0.5 * h, w[1]] {
            let m = mass.value(probe);
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::Domain(format!("non-positive mass sample m({probe}) = {m}")));
            }
            if !coupling.value(probe).is_finite() {
                return Err(Error::Domain(format!("non-finite coupling at t = {probe}")));
            }
        }
        y = rk4_step(mass, coupling, w[0], h, &y);
        states.push(y);
    }
    Ok(states)
}

fn build_table(mass: &MassLaw, coupling: &CouplingLaw, t_max: f64) -> Result<CumulativeTable> {
    let mut breaks: Vec<f64> = mass
        .knots()
        .iter()
        .chain(coupling.knots())
        .copied()
        .filter(|&t| t > 0.0 && t < t_max)
        .collect();
    breaks.push(0.0);
    breaks.push(t_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut coarse_times = node_times(&breaks, 0);
    let mut coarse = integrate_nodes(mass, coupling, &coarse_times)?;
    for level in 1..=MAX_REFINEMENTS {
        let fine_times = node_times(&breaks, level);
        let fine = integrate_nodes(mass, coupling, &fine_times)?;
        // Every coarse node is every other fine node.
        let mut err: f64 = 0.0;
        for (i, yc) in coarse.iter().enumerate() {
            let yf = &fine[2 * i];
            for c in 0..DIM {
                err = err.max((yf[c] - yc[c]).abs() / 15.0 / yf[c].abs().max(1.0));
            }
        }
        if !err.is_finite() {
            return Err(Error::Domain("cumulative table produced non-finite values".into()));
        }
        if err < RICHARDSON_TOL {
            return Ok(CumulativeTable {
                times: fine_times,
                states: fine,
                richardson_error: err,
            });
        }
        coarse_times = fine_times;
        coarse = fine;
    }
    let _ = coarse_times;
    Err(Error::Convergence {
        what: "cumulative coefficient table",
        iterations: MAX_REFINEMENTS as usize,
    })
}

impl CumulativeTable {
    /// One RK4 step from the node at or left of `t`. Steps never cross a
    /// knot of a sampled law, and the sub-node step keeps the local error
    /// far below the table tolerance.
    fn interpolate(&self, mass: &MassLaw, coupling: &CouplingLaw, t: f64) -> State {
        let ts = &self.times;
        let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len()) - 1;
        let h = t - ts[i];
        if h == 0.0 {
            return self.states[i];
        }
        rk4_step(mass, coupling, ts[i], h, &self.states[i])
    }
}

/// Default window end used by the built-in profiles.
pub const DEFAULT_T_MAX: f64 = 1.0;

impl TimeProfile {
    /// m ≡ m0, f ≡ f0 on [0, t_max].
    pub fn constant(m0: f64, f0: f64, t_max: f64) -> Result<Self> {
        let coupling = if f0 == 0.0 {
            CouplingLaw::Zero
        } else {
            CouplingLaw::Constant { f0 }
        };
        TimeProfile::new(MassLaw::Constant { m0 }, coupling, t_max)
    }

    /// The three reference profiles: (m ≡ 1, f ≡ 1), (m ≡ 1, f ≡ 0),
    /// (m = e^t, f = cos t).
    pub fn reference_set(t_max: f64) -> Result<Vec<(&'static str, TimeProfile)>> {
        Ok(vec![
            ("m=1,f=1", TimeProfile::constant(1.0, 1.0, t_max)?),
            ("m=1,f=0", TimeProfile::constant(1.0, 0.0, t_max)?),
            (
                "m=exp(t),f=cos(t)",
                TimeProfile::new(
                    MassLaw::Exponential { m0: 1.0, gamma: 1.0 },
                    CouplingLaw::Cosine { f0: 1.0, omega: 1.0 },
                    t_max,
                )?,
            ),
        ])
    }
}

/// ∫₀¹ uᵏ e^{-xu} du for k ≤ 2.
fn exp_moment(k: i32, x: f64) -> f64 {
    if x.abs() < 0.5 {
        let (mut c, mut sum) = (1.0, 0.0);
        for n in 0..40 {
            let term = c / (n + k + 1) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            c *= -x / (n + 1) as f64;
        }
        return sum;
    }
    let e = (-x).exp();
    match k {
        0 => -(-x).exp_m1() / x,
        1 => (1.0 - e * (1.0 + x)) / (x * x),
        _ => (2.0 - e * (x * x + 2.0 * x + 2.0)) / x.powi(3),
    }
}

/// ∫₀ᵗ e^{zτ} dτ.
fn exp_integral(z: Complex64, t: f64) -> Complex64 {
    let w = z * t;
    if w.norm() >= 0.5 {
        return (w.exp() - 1.0) / z;
    }
    let (mut term, mut sum) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for n in 0..40 {
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
        term *= w / (n + 2) as f64;
    }
    t * sum
}

/// expm1(z)/z, continuous at 0.
fn expm1_ratio(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// a/y with the limit a/y → 1 at y = 0 (a = ln(1 + y)).
fn ratio(a: f64, y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        a / y
    }
}

/// a - sin a.
fn x_minus_sin(a: f64) -> f64 {
    if a.abs() >= 0.5 {
        return a - a.sin();
    }
    let (mut term, mut sum) = (a * a * a / 6.0, 0.0);
    for n in 0..20 {
        sum += term;
        term *= -a * a / ((2 * n + 4) * (2 * n + 5)) as f64;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::level;
    use approx::assert_relative_eq;

    fn builtin_profiles() -> Vec<TimeProfile> {
        let masses = [
            MassLaw::Constant { m0: 1.3 },
            MassLaw::Exponential { m0: 0.8, gamma: 0.7 },
            MassLaw::Power {
                m0: 1.1,
                gamma: 0.5,
                alpha: 1.5,
            },
            MassLaw::Power {
                m0: 1.0,
                gamma: 0.4,
                alpha: 1.0,
            },
            MassLaw::Power {
                m0: 1.0,
                gamma: 0.4,
                alpha: 2.0,
            },
        ];
        let couplings = [
            CouplingLaw::Zero,
            CouplingLaw::Constant { f0: 0.9 },
            CouplingLaw::Linear { f0: -1.2 },
            CouplingLaw::Cosine { f0: 1.1, omega: 2.3 },
        ];
        let mut out = Vec::new();
        for m in &masses {
            for c in &couplings {
                out.push(TimeProfile::new(m.clone(), c.clone(), 2.0).unwrap());
            }
        }
        out
    }

    #[test]
    fn free_particle_at_t2() {
        let p = TimeProfile::constant(1.0, 0.0, 3.0).unwrap();
        let c = p.coefficients_at(2.0).unwrap();
        assert_eq!((c.g, c.k, c.s, c.w, c.theta, c.zeta), (-2.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(c.chi1, -0.75, max_relative = 1e-15);
        assert_relative_eq!(c.chi2, -0.25, max_relative = 1e-15);
    }

    #[test]
    fn constant_coupling_closed_forms() {
        let f0 = 0.7;
        let p = TimeProfile::constant(1.0, f0, 2.0).unwrap();
        for &t in &[0.3, 1.0, 1.7] {
            let c = p.coefficients_quadrature(t).unwrap();
            assert_relative_eq!(c.g, -t, max_relative = 1e-10);
            assert_relative_eq!(c.k, 2.0 * f0 * t, max_relative = 1e-10);
            assert_relative_eq!(c.s, -f0 * f0 * t * t, max_relative = 1e-10);
            assert_relative_eq!(c.w, -f0 * t * t / 2.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn exponential_mass_g_by_quadrature() {
        let p = TimeProfile::new(MassLaw::Exponential { m0: 1.0, gamma: 1.0 }, CouplingLaw::Zero, 1.0).unwrap();
        let c = p.coefficients_quadrature(1.0).unwrap();
        let oracle = crate::quadrature::integrate(|t: f64| (-t).exp(), 0.0, 1.0, Default::default()).unwrap();
        assert_relative_eq!(c.g, -oracle.value, max_relative = 1e-10);
        assert_relative_eq!(c.g, -(1.0 - (-1f64).exp()), max_relative = 1e-10);
    }

    #[test]
    fn closed_forms_stay_accurate_near_degenerate_parameters() {
        let masses = [
            MassLaw::Exponential {
                m0: 0.3,
                gamma: -0.000_210_966_640_214_803_33,
            },
            MassLaw::Exponential { m0: 1.0, gamma: 1e-9 },
            MassLaw::Power {
                m0: 1.0,
                gamma: 1e-7,
                alpha: 1.5,
            },
            MassLaw::Power {
                m0: 0.9,
                gamma: 0.8,
                alpha: 1.0 + 1e-9,
            },
            MassLaw::Power {
                m0: 0.9,
                gamma: 0.8,
                alpha: 2.0 - 1e-9,
            },
        ];
        let couplings = [
            CouplingLaw::Constant {
                f0: -1.398_944_759_159_923_1,
            },
            CouplingLaw::Linear { f0: 0.6 },
            CouplingLaw::Cosine { f0: 1.1, omega: 1e-4 },
        ];
        for m in &masses {
            for c in &couplings {
                let p = TimeProfile::new(m.clone(), c.clone(), 1.0).unwrap();
                for &t in &[0.01, 0.37, 1.0] {
                    let q = p.coefficients_quadrature(t).unwrap();
                    let Some(e) = p.coefficients_closed_form(t).unwrap() else {
                        continue;
                    };
                    for (a, b) in [(e.g, q.g), (e.k, q.k), (e.s, q.s), (e.w, q.w), (e.theta, q.theta)] {
                        assert!(
                            (a - b).abs() <= 1e-9 * b.abs().max(1e-2),
                            "{m:?} {c:?} t={t}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_closed_forms_match_extended_precision() {
        // w = -∫ f G, reference values from 40-digit quadrature
        let cases = [
            (
                MassLaw::Exponential {
                    m0: 0.3,
                    gamma: -0.000_210_966_640_214_803_33,
                },
                CouplingLaw::Constant {
                    f0: -1.398_944_759_159_923_1,
                },
                0.01,
                2.331_576_238_215_601_5e-4,
            ),
            (
                MassLaw::Exponential {
                    m0: 0.3,
                    gamma: -0.000_210_966_640_214_803_33,
                },
                CouplingLaw::Constant {
                    f0: -1.398_944_759_159_923_1,
                },
                1.0,
                2.331_738_568_734_33,
            ),
            (
                MassLaw::Power {
                    m0: 0.9,
                    gamma: 0.8,
                    alpha: 1.0 + 1e-9,
                },
                CouplingLaw::Constant {
                    f0: -1.398_944_759_159_923_1,
                },
                0.01,
                7.751_272_725_720_832e-5,
            ),
            (
                MassLaw::Exponential { m0: 1.0, gamma: 1e-9 },
                CouplingLaw::Cosine { f0: 1.1, omega: 1e-4 },
                0.37,
                -7.529_499_996_494_39e-2,
            ),
        ];
        for (m, c, t, w) in cases {
            let p = TimeProfile::new(m, c, 1.0).unwrap();
            let e = p.coefficients_closed_form(t).unwrap().unwrap();
            assert_relative_eq!(e.w, w, max_relative = 1e-13);
        }
    }

    #[test]
    fn everything_vanishes_at_origin() {
        for p in builtin_profiles() {
            for c in [p.coefficients_at(0.0).unwrap(), p.coefficients_quadrature(0.0).unwrap()] {
                assert_eq!((c.g, c.k, c.s, c.w), (0.0, 0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn invariant_coefficients_at_origin_and_unit_profile() {
        use num_complex::Complex64 as C;
        let p = TimeProfile::constant(1.0, 1.0, 2.0).unwrap();
        let b = p.invariant_coefficients(0.0, Region::Positive).unwrap();
        let a = p.invariant_coefficients(0.0, Region::Negative).unwrap();
        assert_eq!(
            b.as_array(),
            [C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]
        );
        assert_eq!(a.as_array()[..2], [C::new(1.0, 0.0), C::new(-1.0, 0.0)]);

        let b = p.invariant_coefficients(1.0, Region::Positive).unwrap();
        let a = p.invariant_coefficients(1.0, Region::Negative).unwrap();
        assert!((b.p - C::new(-1.0, 2.0)).norm() < 1e-12);
        assert!((b.constant - C::new(-1.0, -0.5)).norm() < 1e-12);
        assert_eq!(a.p, -b.p);
        assert_eq!(a.constant, b.constant);
    }

    #[test]
    fn derivative_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for p in builtin_profiles() {
            for _ in 0..20 {
                let t = rng.gen_range(2.0 * h..p.t_max() - 2.0 * h);
                for route in 0..2 {
                    let at = |t| {
                        if route == 0 {
                            p.coefficients_at(t).unwrap()
                        } else {
                            p.coefficients_quadrature(t).unwrap()
                        }
                    };
                    let (lo, mid, hi) = (at(t - h), at(t), at(t + h));
                    let m = p.mass_at(t).unwrap();
                    let f = p.coupling_at(t).unwrap();
                    let d = |a: f64, b: f64| (b - a) / (2.0 * h);
                    let close = |num: f64, exact: f64| (num - exact).abs() <= 1e-5 * exact.abs().max(1e-3);
                    assert!(close(d(lo.g, hi.g), -1.0 / m), "{p:?} t={t}");
                    assert!(close(d(lo.k, hi.k), 2.0 * f));
                    assert!(
                        close(d(lo.s, hi.s), -f * mid.k),
                        "{:?} {:?} t={t} route={route} {} {}",
                        p.mass_law(),
                        p.coupling_law(),
                        d(lo.s, hi.s),
                        -f * mid.k
                    );
                    assert!(close(d(lo.w, hi.w), f * mid.g));
                }
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let lv = level(2).unwrap();
        for p in builtin_profiles() {
            for i in 0..=40 {
                let t = p.t_max() * i as f64 / 40.0;
                let q = p.coefficients_quadrature(t).unwrap();
                let Some(c) = p.coefficients_closed_form(t).unwrap() else {
                    continue;
                };
                for (a, b) in [(q.g, c.g), (q.k, c.k), (q.s, c.s), (q.w, c.w)] {
                    assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{p:?} t={t}: {a} vs {b}");
                }
                for region in Region::BOTH {
                    if let Some(e) = p.phase_closed_form(&lv, region, t).unwrap() {
                        let q = p.phase(&lv, region, t).unwrap().epsilon;
                        assert!((q - e).abs() <= 1e-8 * e.abs().max(1.0), "{p:?} t={t}: {q} vs {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_phase_available_for_reference_profiles() {
        let lv = level(0).unwrap();
        for (_, p) in TimeProfile::reference_set(1.0).unwrap() {
            assert!(p.phase_closed_form(&lv, Region::Positive, 0.5).unwrap().is_some());
        }
    }

    #[test]
    fn free_particle_phase() {
        let p = TimeProfile::constant(1.0, 0.0, 2.0).unwrap();
        let lv = level(0).unwrap();
        for &t in &[0.0, 0.25, 0.5, 1.0, 1.9] {
            let e1 = p.phase(&lv, Region::Positive, t).unwrap().epsilon;
            let e2 = p.phase(&lv, Region::Negative, t).unwrap().epsilon;
            assert!((e1 - (-t.powi(3) / 16.0 - lv.lambda * t / 2.0)).abs() < 1e-10);
            assert!((e2 - (-t.powi(3) / 48.0 - lv.lambda * t / 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn chi_difference_for_zero_coupling() {
        for m in [
            MassLaw::Constant { m0: 2.0 },
            MassLaw::Exponential { m0: 1.0, gamma: -0.5 },
        ] {
            let p = TimeProfile::new(m, CouplingLaw::Zero, 1.5).unwrap();
            for i in 0..10 {
                let c = p.coefficients_at(0.15 * i as f64).unwrap();
                assert_eq!((c.k, c.s, c.w, c.theta, c.zeta), (0.0, 0.0, 0.0, 0.0, 0.0));
                let m = p.mass_at(c.t).unwrap();
                let direct = -(2.0 * c.k * c.k + 2.0 * c.g * c.g) / (16.0 * m);
                assert!((c.chi1 - c.chi2 - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn window_is_enforced() {
        let p = TimeProfile::constant(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(p.coefficients_at(1.5), Err(Error::OutsideWindow { .. })));
        assert!(matches!(p.coefficients_at(-0.1), Err(Error::OutsideWindow { .. })));
        assert!(p.coefficients_at(1.0).is_ok());
    }

    #[test]
    fn rejects_non_positive_mass() {
        let r = TimeProfile::new(
            MassLaw::Power {
                m0: 1.0,
                gamma: -1.0,
                alpha: 1.0,
            },
            CouplingLaw::Zero,
            2.0,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
        let table = SampledSeries::new(vec![0.0, 1.0], vec![1.0, -1.0]).unwrap();
        let r = TimeProfile::new(MassLaw::Sampled(table), CouplingLaw::Zero, 1.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn sampled_tables_integrate_exactly() {
        // Piecewise-linear f gives piecewise-polynomial primitives, which the
        // knot-aligned Simpson rule integrates exactly.
        let f = SampledSeries::new(vec![0.0, 0.4, 1.0, 2.0], vec![0.5, -0.3, 1.2, 0.0]).unwrap();
        let p = TimeProfile::new(MassLaw::Constant { m0: 1.0 }, CouplingLaw::Sampled(f.clone()), 2.0).unwrap();
        let oracle_k = |t: f64| {
            2.0 * crate::quadrature::integrate(|x| f.value(x), 0.0, t, Default::default())
                .unwrap()
                .value
        };
        for &t in &[0.2, 0.4, 0.77, 1.0, 1.6, 2.0] {
            let c = p.coefficients_at(t).unwrap();
            assert!((c.k - oracle_k(t)).abs() < 1e-10);
            assert_relative_eq!(c.s, -c.k * c.k / 4.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sampled_table_must_cover_window() {
        let f = SampledSeries::new(vec![0.0, 0.5], vec![1.0, 1.0]).unwrap();
        assert!(TimeProfile::new(MassLaw::Constant { m0: 1.0 }, CouplingLaw::Sampled(f), 1.0).is_err());
        assert!(SampledSeries::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn richardson_target_reached() {
        for p in builtin_profiles() {
            assert!(p.table_error() < RICHARDSON_TOL);
        }
    }
}
