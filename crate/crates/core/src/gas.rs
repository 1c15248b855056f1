//! Gas mixture state law and pipe friction relations.
//!
//! The model is isothermal: each gas obeys p = σ²·ρ with σ² = R_s·T.
//! Mixtures are characterized by the hydrogen volume fraction η ∈ [0, 1],
//! and the mixture constant interpolates linearly between the two pure
//! gases. Along a pipe of length L, diameter D and friction factor λ_fr,
//! the steady state satisfies the Weymouth-type relation
//!
//!   p(head)² − p(foot)² = σ̃ · q·|q|,
//!
//! where σ̃ < 0 collects the pipe geometry and the mixture constant of
//! whichever end is upstream for the given flow sign.

use serde::{Deserialize, Serialize};

/// Default pipe diameter in metres when neither the edge nor the instance
/// supplies one.
pub const DEFAULT_DIAMETER: f64 = 1.0;
/// Default Darcy friction factor for commercial steel pipe.
pub const DEFAULT_FRICTION: f64 = 0.02;

/// Specific gas constant of hydrogen [J/(kg·K)].
const R_S_H2: f64 = 4124.2;
/// Specific gas constant of a representative natural gas [J/(kg·K)].
const R_S_NG: f64 = 518.26;
/// Reference temperature [K] (10 °C, a common mean soil temperature).
const T_REF: f64 = 283.15;

/// Squared speeds of sound σ² = R_s·T of the two pure gases [m²/s²].
///
/// Instances may override these (e.g. with nondimensionalized values);
/// the defaults correspond to handbook constants at 10 °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    /// σ² of pure hydrogen.
    pub sigma2_h2: f64,
    /// σ² of pure natural gas.
    pub sigma2_ng: f64,
}

impl Default for GasConstants {
    fn default() -> Self {
        GasConstants {
            sigma2_h2: R_S_H2 * T_REF,
            sigma2_ng: R_S_NG * T_REF,
        }
    }
}

impl GasConstants {
    /// Mixture constant σ²(η) = η·σ²_H2 + (1−η)·σ²_NG.
    ///
    /// Deliberately unchecked: the affine extension to η outside [0, 1]
    /// is what root-finding residuals differentiate through. Callers that
    /// require a physical composition validate η separately.
    pub fn sigma2(&self, eta: f64) -> f64 {
        eta * self.sigma2_h2 + (1.0 - eta) * self.sigma2_ng
    }

    /// Largest mixture constant over physical compositions.
    pub fn sigma2_max(&self) -> f64 {
        self.sigma2_h2.max(self.sigma2_ng)
    }

    /// Recover mass density from pressure and composition: ρ = p / σ²(η).
    pub fn density(&self, pressure: f64, eta: f64) -> f64 {
        pressure / self.sigma2(eta)
    }
}

/// Pipe coefficient σ̃(η_foot, η_head; q) for the squared-pressure law.
///
/// The mixture travelling through the pipe is the one entering it, so the
/// coefficient uses the foot composition when q ≥ 0 and the head
/// composition when q < 0. The value is always negative:
/// σ̃ = −(λ_fr / D) · L · σ²(η_upstream).
pub fn sigma_tilde(
    gas: &GasConstants,
    eta_foot: f64,
    eta_head: f64,
    q: f64,
    length: f64,
    diameter: f64,
    friction: f64,
) -> f64 {
    let eta_up = if q >= 0.0 { eta_foot } else { eta_head };
    -(friction / diameter) * length * gas.sigma2(eta_up)
}

/// Signed increment of the squared pressure across a pipe:
/// p(head)² − p(foot)² = σ̃ · q · |q|.
pub fn pressure_drop_squared(
    gas: &GasConstants,
    eta_foot: f64,
    eta_head: f64,
    q: f64,
    length: f64,
    diameter: f64,
    friction: f64,
) -> f64 {
    sigma_tilde(gas, eta_foot, eta_head, q, length, diameter, friction) * q * q.abs()
}

/// Critical pipe length beyond which the downstream squared pressure
/// would reach zero: L_crit = p²_in / ((λ_fr / D) · σ²(η) · q²).
///
/// `p2_inlet` is the squared pressure at the upstream end and `eta` the
/// composition flowing through the pipe. Returns +∞ for q = 0 (no flow,
/// no drop).
pub fn critical_length(
    gas: &GasConstants,
    p2_inlet: f64,
    eta: f64,
    q: f64,
    diameter: f64,
    friction: f64,
) -> f64 {
    if q == 0.0 {
        return f64::INFINITY;
    }
    p2_inlet / ((friction / diameter) * gas.sigma2(eta) * q * q)
}
