use crate::error::{domain, Result};
use crate::params::{CavityParams, PhysicalConstants, TrapParams};

/// Where the kicked atoms sit relative to the probe standing wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpulseCoupling {
    /// All atoms at probe phase `theta`.
    Phase(f64),
    /// Atoms spread uniformly in phase, so `sin^2(2 theta)` averages to 1/2.
    LatticeAverage,
}

impl ImpulseCoupling {
    /// `sin(2 theta)` and the weight `sin^2(2 theta)` that enters the collective sum.
    fn factors(self) -> (f64, f64) {
        match self {
            Self::Phase(theta) => {
                let s = (2.0 * theta).sin();
                (s, s * s)
            }
            Self::LatticeAverage => (std::f64::consts::FRAC_1_SQRT_2, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseEstimate {
    /// Velocity given to one atom by one cavity photon lifetime of force.
    pub velocity: f64,
    /// Peak excursion of the collective shift when every atom oscillates
    /// with amplitude `velocity / omega_z`.
    pub modulation: f64,
}

/// Mechanical effect of a single intracavity photon.
///
/// A photon living `1/2kappa` pushes an atom at phase `theta` with force
/// `f = hbar g0^2 k_p sin(2 theta) / delta_ca`, giving velocity
/// `f / (2 kappa m)` and oscillation amplitude `v / omega_z`.
pub fn impulse_modulation_estimate(
    constants: &PhysicalConstants,
    cavity: &CavityParams,
    trap: &TrapParams,
    atom_number: f64,
    coupling: ImpulseCoupling,
) -> Result<ImpulseEstimate> {
    cavity.validate()?;
    trap.validate()?;
    let delta_ca = cavity.dispersive_detuning()?;
    if !(atom_number >= 0.0 && atom_number.is_finite()) {
        return Err(domain("atom number must be non-negative"));
    }
    let (sin2, weight) = coupling.factors();
    let g2 = cavity.g0 * cavity.g0;
    let force = constants.hbar * g2 * cavity.k_probe * sin2 / delta_ca;
    let velocity = force / (2.0 * cavity.kappa * constants.mass);
    let amplitude = velocity.abs() / trap.omega_z;
    // d/dz of N g0^2 sin^2(theta + k z) / delta_ca, with sin(2 theta)^2 averaged.
    let per_unit_sin = atom_number * g2 * cavity.k_probe / delta_ca.abs();
    let modulation = if sin2 == 0.0 {
        0.0
    } else {
        per_unit_sin * amplitude * weight / sin2.abs()
    };
    Ok(ImpulseEstimate {
        velocity,
        modulation,
    })
}

/// `|delta_ca|` below which the single-photon modulation exceeds `kappa`.
///
/// The modulation falls as `1/delta_ca^2`, so the boundary is closed form.
pub fn impulse_regime_boundary(
    constants: &PhysicalConstants,
    cavity: &CavityParams,
    trap: &TrapParams,
    atom_number: f64,
    coupling: ImpulseCoupling,
) -> Result<f64> {
    let est = impulse_modulation_estimate(constants, cavity, trap, atom_number, coupling)?;
    Ok(cavity.delta_ca.abs() * (est.modulation / cavity.kappa).sqrt())
}
