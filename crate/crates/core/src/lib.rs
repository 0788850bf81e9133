//! Exact and numerical solutions of the Schrödinger equation for a particle
//! with time-dependent mass m(t) in the imaginary symmetric well
//! V(x, t) = i f(t) |x|.
//!
//! The closed-form solution is assembled region by region from Airy
//! eigenfunctions of the time-independent invariant p² + |x|, moved by
//! unitary transforms and Dyson maps whose parameters come from the
//! time profile. Everything it claims is checked against independent
//! numerics in [`verify`].

pub mod airy;
pub mod error;
pub mod profile;
pub mod quadrature;
pub mod solution;
pub mod spectrum;
pub mod verify;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use profile::{CoefficientSet, CouplingLaw, InvariantCoefficients, MassLaw, PhaseValue, TimeProfile};
pub use solution::{TransformSpec, WavefunctionSample};
pub use spectrum::{level, Parity, SpectralLevel};

/// Half-line on which a branch of the solution lives: region 1 is x >= 0,
/// region 2 is x <= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "1")]
    Positive,
    #[serde(rename = "2")]
    Negative,
}

impl Region {
    pub const BOTH: [Region; 2] = [Region::Positive, Region::Negative];

    pub fn index(self) -> u8 {
        match self {
            Region::Positive => 1,
            Region::Negative => 2,
        }
    }

    /// +1 for region 1, -1 for region 2.
    pub fn sign(self) -> f64 {
        match self {
            Region::Positive => 1.0,
            Region::Negative => -1.0,
        }
    }

    pub fn of(x: f64) -> Region {
        if x >= 0.0 {
            Region::Positive
        } else {
            Region::Negative
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}
