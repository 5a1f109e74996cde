//! Laboratory units → dimensionless parameters in units of g.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StarkCompensation, SystemParams};

/// Rates as quoted in the lab: every frequency is `x/2π` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub g_over_2pi_hz: f64,
    /// Loaded quality factor; with the mode frequency this fixes `κ = ω/Q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_factor: Option<f64>,
    /// Optical mode frequency `ω/2π`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_frequency_hz: Option<f64>,
    /// Direct cavity loss `κ/2π`, used when `q_factor` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_over_2pi_hz: Option<f64>,
    pub gamma_over_2pi_hz: f64,
    /// Defaults to `γ/5`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma10_over_2pi_hz: Option<f64>,
    pub delta_over_g: f64,
    pub omega_over_g: f64,
    #[serde(default = "default_n_fock")]
    pub n_fock: usize,
}

fn default_n_fock() -> usize {
    SystemParams::default().n_fock
}

impl PhysicalParams {
    /// g/2π = 1 GHz, κ/2π = 0.5 MHz (Q = 10⁹ at 500 THz), γ/2π = 13 MHz,
    /// γ₁₀ = γ/5, Δ = 10g, Ω = 0.01g.
    pub fn nominal() -> Self {
        Self {
            g_over_2pi_hz: 1e9,
            q_factor: Some(1e9),
            mode_frequency_hz: Some(5e14),
            kappa_over_2pi_hz: None,
            gamma_over_2pi_hz: 13e6,
            gamma10_over_2pi_hz: None,
            delta_over_g: 10.0,
            omega_over_g: 0.01,
            n_fock: default_n_fock(),
        }
    }

    /// Cavity loss `κ/2π` in Hz.
    pub fn kappa_over_2pi(&self) -> Result<f64> {
        match (self.q_factor, self.mode_frequency_hz, self.kappa_over_2pi_hz) {
            (Some(q), Some(f), None) => {
                if !(q > 0.0 && f > 0.0) {
                    return Err(Error::InvalidParameter("q_factor and mode_frequency_hz must be positive".into()));
                }
                // κ = ω/Q ⇒ κ/2π = (ω/2π)/Q
                Ok(f / q)
            }
            (None, None, Some(k)) => Ok(k),
            (None, None, None) => Ok(0.0),
            _ => Err(Error::InvalidParameter(
                "give either q_factor with mode_frequency_hz, or kappa_over_2pi_hz".into(),
            )),
        }
    }

    pub fn to_dimensionless(&self) -> Result<SystemParams> {
        let g = self.g_over_2pi_hz;
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("g_over_2pi_hz must be positive, got {g}")));
        }
        let gamma = self.gamma_over_2pi_hz / g;
        let p = SystemParams {
            g1: 1.0,
            g2: 1.0,
            delta: self.delta_over_g,
            omega1: self.omega_over_g,
            omega2: self.omega_over_g,
            kappa: self.kappa_over_2pi()? / g,
            gamma_e0: gamma,
            gamma_e1: gamma,
            gamma_10: self.gamma10_over_2pi_hz.map_or(gamma / 5.0, |r| r / g),
            stark_compensation: StarkCompensation::Exact,
            n_fock: self.n_fock,
        };
        p.validate()?;
        Ok(p)
    }

    /// Inverse of [`to_dimensionless`](Self::to_dimensionless) for symmetric
    /// parameters, with κ expressed through `q_factor` at `mode_frequency_hz`.
    pub fn from_dimensionless(p: &SystemParams, g_over_2pi_hz: f64, mode_frequency_hz: f64) -> Result<Self> {
        if p.g1 != 1.0 || p.g2 != 1.0 || p.omega1 != p.omega2 || p.gamma_e0 != p.gamma_e1 {
            return Err(Error::InvalidParameter(
                "only symmetric parameters in units of g have a physical form".into(),
            ));
        }
        let kappa_hz = p.kappa * g_over_2pi_hz;
        Ok(Self {
            g_over_2pi_hz,
            q_factor: (kappa_hz > 0.0).then(|| mode_frequency_hz / kappa_hz),
            mode_frequency_hz: (kappa_hz > 0.0).then_some(mode_frequency_hz),
            kappa_over_2pi_hz: None,
            gamma_over_2pi_hz: p.gamma_e0 * g_over_2pi_hz,
            gamma10_over_2pi_hz: Some(p.gamma_10 * g_over_2pi_hz),
            delta_over_g: p.delta,
            omega_over_g: p.omega1,
            n_fock: p.n_fock,
        })
    }

    /// Angular coupling `g` in rad/s, the unit of time being `1/g`.
    pub fn g_angular(&self) -> f64 {
        2.0 * PI * self.g_over_2pi_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn nominal_point_in_units_of_g() {
        let p = PhysicalParams::nominal().to_dimensionless().unwrap();
        assert_relative_eq!(p.kappa, 5e-4, max_relative = 1e-12);
        assert_relative_eq!(p.gamma_e0, 0.013, max_relative = 1e-12);
        assert_relative_eq!(p.gamma_10, 0.0026, max_relative = 1e-12);
        assert_eq!(p.delta, 10.0);
    }

    #[test]
    fn kappa_sources_are_exclusive() {
        let mut p = PhysicalParams::nominal();
        p.kappa_over_2pi_hz = Some(1.0);
        assert!(p.to_dimensionless().is_err());
        p.q_factor = None;
        p.mode_frequency_hz = None;
        assert_relative_eq!(p.to_dimensionless().unwrap().kappa, 1e-9);
    }

    proptest! {
        #[test]
        fn unit_round_trip(
            g in 1e8f64..5e9,
            q in 1e6f64..1e10,
            f in 1e14f64..1e15,
            gamma in 1e5f64..1e8,
            g10 in 1e4f64..1e7,
            delta in 1.0f64..100.0,
            omega in 1e-4f64..0.1,
        ) {
            let phys = PhysicalParams {
                g_over_2pi_hz: g,
                q_factor: Some(q),
                mode_frequency_hz: Some(f),
                kappa_over_2pi_hz: None,
                gamma_over_2pi_hz: gamma,
                gamma10_over_2pi_hz: Some(g10),
                delta_over_g: delta,
                omega_over_g: omega,
                n_fock: 2,
            };
            let back = PhysicalParams::from_dimensionless(&phys.to_dimensionless().unwrap(), g, f).unwrap();
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            prop_assert!(rel(back.q_factor.unwrap(), q) < 1e-12);
            prop_assert!(rel(back.gamma_over_2pi_hz, gamma) < 1e-12);
            prop_assert!(rel(back.gamma10_over_2pi_hz.unwrap(), g10) < 1e-12);
            prop_assert!(rel(back.delta_over_g, delta) < 1e-12);
            prop_assert!(rel(back.omega_over_g, omega) < 1e-12);
        }
    }
}
