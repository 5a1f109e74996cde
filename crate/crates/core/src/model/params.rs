use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the vacuum-induced light shift of the emitters is removed in the
/// full cavity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StarkCompensation {
    /// Cancels the second-order vacuum shift `-gⱼ²/Δ` of each excited state.
    #[default]
    Exact,
    /// Light shift `-(Ω′²/Δ′)` on each `|0⟩`, as produced by a far-detuned
    /// auxiliary drive of Rabi frequency Ω′ and detuning Δ′.
    CounterTerm { omega_prime: f64, delta_prime: f64 },
}

/// Couplings and rates of the two-emitter cavity system, all in one
/// frequency unit (the examples and the CLI use units of g).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub g1: f64,
    pub g2: f64,
    /// Cavity detuning from the `|0⟩ ↔ |e⟩` transition.
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa: f64,
    pub gamma_e0: f64,
    pub gamma_e1: f64,
    pub gamma_10: f64,
    pub stark_compensation: StarkCompensation,
    /// Number of Fock levels kept for the cavity (2 = vacuum and one photon).
    pub n_fock: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g1: 1.0,
            g2: 1.0,
            delta: 10.0,
            omega1: 0.01,
            omega2: 0.01,
            kappa: 0.0,
            gamma_e0: 0.0,
            gamma_e1: 0.0,
            gamma_10: 0.0,
            stark_compensation: StarkCompensation::Exact,
            n_fock: 2,
        }
    }
}

/// Non-fatal validity warnings for a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum Advisory {
    /// Δ < 5·max(g₁, g₂): the cavity is not safely dispersive.
    WeakDispersion { ratio: f64 },
    /// Θ < 10·max(Ω₁, Ω₂): the dressed states are not safely far detuned.
    WeakRamanDetuning { ratio: f64 },
}

impl SystemParams {
    /// Lossless system with equal couplings `g = 1`, detuning `delta` and
    /// equal drives `omega`.
    pub fn symmetric(delta: f64, omega: f64) -> Self {
        Self {
            delta,
            omega1: omega,
            omega2: omega,
            ..Self::default()
        }
    }

    /// Emitter decay with the usual ratios `γ_e0 = γ_e1 = γ`, `γ₁₀ = γ/5`.
    pub fn with_emitter_decay(mut self, gamma: f64) -> Self {
        self.gamma_e0 = gamma;
        self.gamma_e1 = gamma;
        self.gamma_10 = gamma / 5.0;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn rates(&self) -> [f64; 4] {
        [self.kappa, self.gamma_e0, self.gamma_e1, self.gamma_10]
    }

    pub fn is_lossless(&self) -> bool {
        self.rates().iter().all(|&r| r == 0.0)
    }

    /// Every field multiplied by `factor` (a change of frequency unit).
    pub fn rescaled(&self, factor: f64) -> Self {
        let stark_compensation = match self.stark_compensation {
            StarkCompensation::Exact => StarkCompensation::Exact,
            StarkCompensation::CounterTerm { omega_prime, delta_prime } => StarkCompensation::CounterTerm {
                omega_prime: omega_prime * factor,
                delta_prime: delta_prime * factor,
            },
        };
        Self {
            g1: self.g1 * factor,
            g2: self.g2 * factor,
            delta: self.delta * factor,
            omega1: self.omega1 * factor,
            omega2: self.omega2 * factor,
            kappa: self.kappa * factor,
            gamma_e0: self.gamma_e0 * factor,
            gamma_e1: self.gamma_e1 * factor,
            gamma_10: self.gamma_10 * factor,
            stark_compensation,
            n_fock: self.n_fock,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("delta", self.delta),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        let rates = [
            ("kappa", self.kappa),
            ("gamma_e0", self.gamma_e0),
            ("gamma_e1", self.gamma_e1),
            ("gamma_10", self.gamma_10),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be a finite rate >= 0, got {v}")));
            }
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidParameter("n_fock must keep at least 2 Fock levels".into()));
        }
        if let StarkCompensation::CounterTerm { omega_prime, delta_prime } = self.stark_compensation {
            if !(omega_prime.is_finite() && delta_prime.is_finite() && delta_prime != 0.0) {
                return Err(Error::InvalidParameter(
                    "counter-term drive needs finite omega_prime and nonzero delta_prime".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn advisories(&self) -> Vec<Advisory> {
        let mut out = Vec::new();
        let g_max = self.g1.abs().max(self.g2.abs());
        if g_max > 0.0 && self.delta.abs() < 5.0 * g_max {
            out.push(Advisory::WeakDispersion { ratio: self.delta.abs() / g_max });
        }
        let omega_max = self.omega1.abs().max(self.omega2.abs());
        if let Ok(theta) = theta(self) {
            if omega_max > 0.0 && theta.abs() < 10.0 * omega_max {
                out.push(Advisory::WeakRamanDetuning { ratio: theta.abs() / omega_max });
            }
        }
        out
    }
}

/// Cavity-mediated dipole-dipole coupling `Θ = g₁g₂/Δ`.
pub fn theta(p: &SystemParams) -> Result<f64> {
    if p.delta == 0.0 {
        return Err(Error::InvalidParameter("delta must be nonzero to eliminate the cavity".into()));
    }
    Ok(p.g1 * p.g2 / p.delta)
}

/// Two-photon Raman coupling `ξ = Ω₁Ω₂/Θ`.
pub fn xi(p: &SystemParams) -> Result<f64> {
    let theta = theta(p)?;
    if theta == 0.0 {
        return Err(Error::InvalidParameter("Θ = 0: the emitters are not coupled".into()));
    }
    Ok(p.omega1 * p.omega2 / theta)
}

/// Closed-form rates of the effective Raman model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub theta: f64,
    pub xi: f64,
    /// Cavity-loss induced decay `g₁g₂κ/Δ²`.
    pub gamma_c: f64,
    /// Emitter-decay induced loss `⟨e⟩(γ_e0 + γ_e1)`.
    pub gamma_e: f64,
    /// Excited-state occupation `Ω₁Ω₂/Θ²`.
    pub excited_occupation: f64,
    /// Time to the maximally entangled state, `ξτ = π/4`.
    pub t_entangle: f64,
    /// Time to complete transfer, `ξt_f = π/2`.
    pub t_transfer: f64,
    /// `ξ² ≥ Γ_C·Γ_E` (inclusive).
    pub strong_coupling: bool,
}

impl EffectiveRates {
    pub fn xi_squared(&self) -> f64 {
        self.xi * self.xi
    }

    pub fn loss_product(&self) -> f64 {
        self.gamma_c * self.gamma_e
    }
}

/// Effective rates of the Raman model.
///
/// The emitter loss uses the occupation `Ω₁Ω₂/Θ²` (not its square), which
/// yields `Γ_E = 10⁻²γ̄` at `Δ = 10g`, `Ω = 0.01g`.
pub fn effective_rates(p: &SystemParams) -> Result<EffectiveRates> {
    p.validate()?;
    let theta = theta(p)?.abs();
    let xi = xi(p)?.abs();
    if xi == 0.0 {
        return Err(Error::InvalidParameter("ξ = 0: no Raman coupling (a drive is off)".into()));
    }
    let gamma_c = (p.g1 * p.g2).abs() * p.kappa / (p.delta * p.delta);
    let excited_occupation = (p.omega1 * p.omega2).abs() / (theta * theta);
    let gamma_e = excited_occupation * (p.gamma_e0 + p.gamma_e1);
    Ok(EffectiveRates {
        theta,
        xi,
        gamma_c,
        gamma_e,
        excited_occupation,
        t_entangle: PI / (4.0 * xi),
        t_transfer: PI / (2.0 * xi),
        strong_coupling: xi * xi >= gamma_c * gamma_e,
    })
}
