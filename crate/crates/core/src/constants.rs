//! Physical constants (CODATA 2018) and the overridable registry used by the
//! decoherence kernels.

use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const GRAVITATIONAL: f64 = 6.674_30e-11;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Nucleon mass used by the collapse models, kg.
pub const NUCLEON_MASS: f64 = 1.6726e-27;
/// Atomic number of tantalum; the nucleus mass of the gravitational model is
/// `TANTALUM_Z * NUCLEON_MASS`.
pub const TANTALUM_Z: f64 = 73.0;
/// Nuclear radius used by the gravitational model, m.
pub const NUCLEAR_RADIUS: f64 = 1e-15;

/// Constants registry. Every value may be overridden from a run config; the
/// Planck mass is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub hbar: f64,
    pub k_b: f64,
    pub gravitational: f64,
    pub light_speed: f64,
    pub nucleon_mass: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: HBAR,
            k_b: BOLTZMANN,
            gravitational: GRAVITATIONAL,
            light_speed: SPEED_OF_LIGHT,
            nucleon_mass: NUCLEON_MASS,
        }
    }
}

impl Constants {
    /// `sqrt(hbar c / G)`.
    pub fn planck_mass(&self) -> f64 {
        (self.hbar * self.light_speed / self.gravitational).sqrt()
    }

    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("k_b", self.k_b),
            ("gravitational", self.gravitational),
            ("light_speed", self.light_speed),
            ("nucleon_mass", self.nucleon_mass),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::invalid(name, format!("constant must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
