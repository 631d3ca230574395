//! Physical inputs and the closed-form quantities derived from them.
//!
//! Frequencies are angular (rad/s). Use [`angular`] to convert from cyclic Hz.

use std::f64::consts::{FRAC_PI_4, TAU};

use serde::Serialize;

use crate::error::{domain, Result};

/// Converts a cyclic frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// Converts an angular frequency in rad/s to cyclic Hz.
#[inline]
pub fn cyclic(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

/// Fundamental constants and the atomic mass. CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Mass of one atom (kg).
    pub mass: f64,
}

impl PhysicalConstants {
    pub const RB87: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        k_b: 1.380_649e-23,
        // 86.909180531 u
        mass: 86.909_180_531 * 1.660_539_066_60e-27,
    };

    /// Recoil frequency `hbar k^2 / 2m` for this atom.
    pub fn recoil_frequency(&self, k: f64) -> Result<f64> {
        recoil_frequency(self.hbar, k, self.mass)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::RB87
    }
}

/// Cavity, atomic and optical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityParams {
    /// Cavity field half-linewidth.
    pub kappa: f64,
    /// Atom-cavity coupling at an antinode.
    pub g0: f64,
    /// Atomic coherence half-linewidth.
    pub gamma_atom: f64,
    /// Cavity-atom detuning, signed.
    pub delta_ca: f64,
    /// Probe wavenumber (rad/m).
    pub k_probe: f64,
    /// Lattice (trap light) wavenumber (rad/m).
    pub k_trap: f64,
    /// rms of the Gaussian technical jitter of the probe detuning.
    pub sigma_jitter: f64,
    /// Mode waist (m). Informational.
    pub waist: f64,
    /// Finesse at the probe wavelength. Informational.
    pub finesse: f64,
}

impl Default for CavityParams {
    /// The reference apparatus: 87Rb, 780 nm probe, 850 nm lattice, 194 um cavity.
    fn default() -> Self {
        Self {
            kappa: angular(0.66e6),
            g0: angular(14.4e6),
            gamma_atom: angular(3.0e6),
            delta_ca: angular(-30.0e9),
            k_probe: TAU / 780e-9,
            k_trap: TAU / 850e-9,
            sigma_jitter: angular(1.1e6),
            waist: 23.4e-6,
            finesse: 5.8e5,
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("kappa", self.kappa)?;
        check_positive("g0", self.g0)?;
        check_positive("gamma_atom", self.gamma_atom)?;
        check_positive("k_probe", self.k_probe)?;
        check_positive("k_trap", self.k_trap)?;
        if !self.delta_ca.is_finite() {
            return Err(domain("delta_ca must be finite"));
        }
        if self.k_probe == self.k_trap {
            return Err(domain("probe and lattice wavenumbers must differ"));
        }
        if !(self.sigma_jitter >= 0.0 && self.sigma_jitter.is_finite()) {
            return Err(domain("sigma_jitter must be finite and non-negative"));
        }
        Ok(())
    }

    pub(crate) fn dispersive_detuning(&self) -> Result<f64> {
        if self.delta_ca == 0.0 || !self.delta_ca.is_finite() {
            return Err(domain("dispersive model requires a finite, nonzero delta_ca"));
        }
        Ok(self.delta_ca)
    }
}

/// Axial confinement of the atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapParams {
    /// Axial trap frequency about each lattice minimum.
    pub omega_z: f64,
    /// Radial trap frequency. Informational.
    pub omega_radial: f64,
    /// Lattice depth (J). Informational.
    pub trap_depth: f64,
    /// Gas temperature (K). Informational.
    pub temperature: f64,
    /// Number of occupied lattice sites.
    pub num_sites: usize,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            omega_z: angular(42e3),
            omega_radial: angular(0.3e3),
            trap_depth: PhysicalConstants::RB87.k_b * 6.6e-6,
            temperature: 0.8e-6,
            num_sites: 300,
        }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("omega_z", self.omega_z)?;
        if self.num_sites == 0 {
            return Err(domain("num_sites must be at least 1"));
        }
        Ok(())
    }
}

/// Probe drive and atom number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveParams {
    /// Intracavity photon number on resonance (sets the probe power).
    pub n_max: f64,
    /// Probe detuning from the bare cavity resonance.
    pub delta_pc: f64,
    /// Atom number. Real-valued so that drift models can act on it.
    pub atom_number: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        let cavity = CavityParams::default();
        Self {
            n_max: 0.56,
            delta_pc: 0.0,
            atom_number: atoms_for_shift(angular(-148e6), cavity.g0, cavity.delta_ca)
                .unwrap_or(0.0),
        }
    }
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_max >= 0.0 && self.n_max.is_finite()) {
            return Err(domain("n_max must be finite and non-negative"));
        }
        if !(self.atom_number >= 0.0 && self.atom_number.is_finite()) {
            return Err(domain("atom_number must be finite and non-negative"));
        }
        if !self.delta_pc.is_finite() {
            return Err(domain("delta_pc must be finite"));
        }
        Ok(())
    }
}

/// How the probe coupling is averaged over the atomic distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CouplingAverage {
    /// All atoms in one well at `k_p z0 = pi/4`.
    SingleWell,
    /// Atoms spread over many wells with uniformly distributed probe phase.
    #[default]
    MultiWell,
}

/// Every input the model needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SystemParams {
    pub constants: PhysicalConstants,
    pub cavity: CavityParams,
    pub trap: TrapParams,
    pub drive: DriveParams,
    pub averaging: CouplingAverage,
}

/// Critical atom and photon numbers of the cavity QED system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalNumbers {
    /// `2 Gamma kappa / g0^2`
    pub atom: f64,
    /// `Gamma^2 / 2 g0^2`
    pub photon: f64,
}

/// All closed-form derived quantities for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub recoil_frequency: f64,
    pub collective_shift: f64,
    pub kerr_coefficient: f64,
    pub kerr_coefficient_single_well: f64,
    pub beta: f64,
    /// `None` when there are no atoms.
    pub nonlinear_photon_threshold: Option<f64>,
    pub critical: CriticalNumbers,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        self.trap.validate()?;
        self.drive.validate()
    }

    pub fn recoil_frequency(&self) -> Result<f64> {
        self.constants.recoil_frequency(self.cavity.k_probe)
    }

    /// Dispersive shift of the cavity resonance for the configured averaging.
    pub fn collective_shift(&self) -> Result<f64> {
        match self.averaging {
            CouplingAverage::MultiWell => {
                collective_shift(self.drive.atom_number, self.cavity.g0, self.cavity.delta_ca)
            }
            CouplingAverage::SingleWell => collective_shift_at_phase(
                self.drive.atom_number,
                self.cavity.g0,
                self.cavity.delta_ca,
                FRAC_PI_4,
            ),
        }
    }

    pub fn kerr_coefficient(&self) -> Result<f64> {
        kerr_coefficient(&self.constants, &self.cavity, &self.trap, self.averaging)
    }

    pub fn beta(&self) -> Result<f64> {
        beta_parameter(
            self.collective_shift()?,
            self.kerr_coefficient()?,
            self.drive.n_max,
            self.cavity.kappa,
        )
    }

    pub fn derived(&self) -> Result<DerivedQuantities> {
        self.validate()?;
        let threshold = if self.drive.atom_number > 0.0 {
            Some(nonlinear_photon_threshold(
                &self.constants,
                &self.cavity,
                &self.trap,
                self.drive.atom_number,
            )?)
        } else {
            None
        };
        Ok(DerivedQuantities {
            recoil_frequency: self.recoil_frequency()?,
            collective_shift: self.collective_shift()?,
            kerr_coefficient: self.kerr_coefficient()?,
            kerr_coefficient_single_well: kerr_coefficient(
                &self.constants,
                &self.cavity,
                &self.trap,
                CouplingAverage::SingleWell,
            )?,
            beta: self.beta()?,
            nonlinear_photon_threshold: threshold,
            critical: critical_numbers(&self.cavity)?,
        })
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {value}")))
    }
}

/// Recoil frequency `hbar k^2 / 2m`.
pub fn recoil_frequency(hbar: f64, k: f64, mass: f64) -> Result<f64> {
    check_positive("wavenumber", k)?;
    check_positive("mass", mass)?;
    check_positive("hbar", hbar)?;
    Ok(hbar * k * k / (2.0 * mass))
}

/// Collective dispersive shift `N g0^2 / (2 delta_ca)` for atoms spread over
/// many wells, where the probe coupling averages to `g0^2 / 2`.
pub fn collective_shift(atom_number: f64, g0: f64, delta_ca: f64) -> Result<f64> {
    if delta_ca == 0.0 {
        return Err(domain("collective shift undefined at delta_ca = 0"));
    }
    Ok(atom_number * g0 * g0 / (2.0 * delta_ca))
}

/// Collective shift `N g0^2 sin^2(phase) / delta_ca` for atoms localized at one
/// probe phase `phase = k_p z0`.
pub fn collective_shift_at_phase(
    atom_number: f64,
    g0: f64,
    delta_ca: f64,
    phase: f64,
) -> Result<f64> {
    if delta_ca == 0.0 {
        return Err(domain("collective shift undefined at delta_ca = 0"));
    }
    let s = phase.sin();
    Ok(atom_number * g0 * g0 * s * s / delta_ca)
}

/// Atom number giving the many-well shift `target_shift`.
pub fn atoms_for_shift(target_shift: f64, g0: f64, delta_ca: f64) -> Result<f64> {
    if g0 <= 0.0 {
        return Err(domain("g0 must be positive"));
    }
    let n = 2.0 * delta_ca * target_shift / (g0 * g0);
    if n < 0.0 {
        return Err(domain("target shift must have the sign of delta_ca"));
    }
    Ok(n)
}

/// Kerr coefficient: fractional change of the collective shift per
/// intracavity photon, `2 hbar k_p^2 g0^2 / (m delta_ca omega_z^2)` for a single
/// well at `k_p z0 = pi/4`, halved for the many-well average.
pub fn kerr_coefficient(
    constants: &PhysicalConstants,
    cavity: &CavityParams,
    trap: &TrapParams,
    averaging: CouplingAverage,
) -> Result<f64> {
    let delta_ca = cavity.dispersive_detuning()?;
    check_positive("omega_z", trap.omega_z)?;
    let k = cavity.k_probe;
    let single = 2.0 * constants.hbar * k * k * cavity.g0 * cavity.g0
        / (constants.mass * delta_ca * trap.omega_z * trap.omega_z);
    Ok(match averaging {
        CouplingAverage::SingleWell => single,
        CouplingAverage::MultiWell => single / 2.0,
    })
}

/// Maximum nonlinear resonance shift in units of the half-linewidth,
/// `beta = delta_n * epsilon * n_max / kappa`.
pub fn beta_parameter(delta_n: f64, epsilon: f64, n_max: f64, kappa: f64) -> Result<f64> {
    check_positive("kappa", kappa)?;
    Ok(delta_n * epsilon * n_max / kappa)
}

/// Photon number at which `beta = 1`, including the many-well average and the
/// saturation of the shift once `|delta_ca|` approaches `sqrt(N) g0`:
///
/// ```text
/// n_nl = 4 (omega_z^2 kappa / (omega_rec g0^2)) (N g0^2/2 + (delta_ca/2)^2) / (N g0^2)
/// ```
pub fn nonlinear_photon_threshold(
    constants: &PhysicalConstants,
    cavity: &CavityParams,
    trap: &TrapParams,
    atom_number: f64,
) -> Result<f64> {
    if !(atom_number > 0.0) {
        return Err(domain("nonlinear threshold undefined without atoms"));
    }
    check_positive("g0", cavity.g0)?;
    check_positive("omega_z", trap.omega_z)?;
    let w_rec = constants.recoil_frequency(cavity.k_probe)?;
    let g2 = cavity.g0 * cavity.g0;
    let half_detuning = cavity.delta_ca / 2.0;
    let prefactor = 4.0 * trap.omega_z * trap.omega_z * cavity.kappa / (w_rec * g2);
    Ok(prefactor * (atom_number * g2 / 2.0 + half_detuning * half_detuning) / (atom_number * g2))
}

/// Critical atom number `2 Gamma kappa / g0^2` and photon number `Gamma^2 / 2 g0^2`.
pub fn critical_numbers(cavity: &CavityParams) -> Result<CriticalNumbers> {
    check_positive("g0", cavity.g0)?;
    let g2 = cavity.g0 * cavity.g0;
    Ok(CriticalNumbers {
        atom: 2.0 * cavity.gamma_atom * cavity.kappa / g2,
        photon: cavity.gamma_atom * cavity.gamma_atom / (2.0 * g2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn recoil_frequency_rb87_780() {
        let c = PhysicalConstants::RB87;
        let w = c.recoil_frequency(TAU / 780e-9).unwrap();
        assert!(rel(cyclic(w), 3.77e3) < 5e-3, "{}", cyclic(w));
        let w2 = c.recoil_frequency(2.0 * TAU / 780e-9).unwrap();
        assert!(rel(w2, 4.0 * w) < 1e-15);
        assert!(c.recoil_frequency(0.0).is_err());
        assert!(recoil_frequency(c.hbar, 1.0, -1.0).is_err());
    }

    #[test]
    fn collective_shift_examples() {
        let g0 = angular(14.4e6);
        let dn = collective_shift(7e4, g0, angular(-101e9)).unwrap();
        assert!(rel(cyclic(dn), -71.9e6) < 2e-3, "{}", cyclic(dn));
        assert_eq!(collective_shift(0.0, g0, angular(-101e9)).unwrap(), 0.0);
        let flipped = collective_shift(7e4, g0, angular(101e9)).unwrap();
        assert_eq!(flipped, -dn);
        assert!(collective_shift(1.0, g0, 0.0).is_err());
    }

    #[test]
    fn shift_at_antinode_is_twice_the_average() {
        let g0 = angular(14.4e6);
        let d = angular(-30e9);
        let avg = collective_shift(1e4, g0, d).unwrap();
        let anti = collective_shift_at_phase(1e4, g0, d, std::f64::consts::FRAC_PI_2).unwrap();
        let quarter = collective_shift_at_phase(1e4, g0, d, FRAC_PI_4).unwrap();
        assert!(rel(anti, 2.0 * avg) < 1e-14);
        assert!(rel(quarter, avg) < 1e-14);
    }

    #[test]
    fn kerr_coefficient_examples() {
        let c = PhysicalConstants::RB87;
        let cav = CavityParams {
            delta_ca: angular(-30e9),
            ..Default::default()
        };
        let trap = TrapParams::default();
        let multi = kerr_coefficient(&c, &cav, &trap, CouplingAverage::MultiWell).unwrap();
        let single = kerr_coefficient(&c, &cav, &trap, CouplingAverage::SingleWell).unwrap();
        assert!((multi - (-0.0295)).abs() < 3e-4, "{multi}");
        assert_eq!(multi, single / 2.0);

        // Same coefficient through the recoil frequency.
        let w_rec = c.recoil_frequency(cav.k_probe).unwrap();
        let via_recoil = 4.0 * w_rec * cav.g0 * cav.g0 / (cav.delta_ca * trap.omega_z.powi(2));
        assert!(rel(single, via_recoil) < 1e-12);

        let blue = CavityParams {
            delta_ca: -cav.delta_ca,
            ..cav
        };
        let flipped = kerr_coefficient(&c, &blue, &trap, CouplingAverage::MultiWell).unwrap();
        assert_eq!(flipped, -multi);

        let zero = CavityParams {
            delta_ca: 0.0,
            ..cav
        };
        assert!(kerr_coefficient(&c, &zero, &trap, CouplingAverage::MultiWell).is_err());
        let no_trap = TrapParams {
            omega_z: 0.0,
            ..trap
        };
        assert!(kerr_coefficient(&c, &cav, &no_trap, CouplingAverage::MultiWell).is_err());
    }

    #[test]
    fn beta_errors_and_zero_drive() {
        assert_eq!(beta_parameter(-1.0, -0.1, 0.0, 1.0).unwrap(), 0.0);
        assert!(beta_parameter(-1.0, -0.1, 1.0, 0.0).is_err());
        assert!(beta_parameter(-1.0, -0.1, 1.0, -2.0).is_err());
    }

    #[test]
    fn threshold_requires_atoms() {
        let p = SystemParams::default();
        assert!(nonlinear_photon_threshold(&p.constants, &p.cavity, &p.trap, 0.0).is_err());
        let mut empty = p;
        empty.drive.atom_number = 0.0;
        let d = empty.derived().unwrap();
        assert_eq!(d.collective_shift, 0.0);
        assert!(d.nonlinear_photon_threshold.is_none());
    }

    #[test]
    fn threshold_grows_with_detuning() {
        let p = SystemParams::default();
        let mut last = 0.0;
        for ghz in [0.0, 1.0, 5.0, 20.0, 100.0, 300.0] {
            let cav = CavityParams {
                delta_ca: angular(-ghz * 1e9),
                ..p.cavity
            };
            let n = nonlinear_photon_threshold(&p.constants, &cav, &p.trap, 5e4).unwrap();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn critical_numbers_scaling() {
        let cav = CavityParams::default();
        let c = critical_numbers(&cav).unwrap();
        assert!((c.atom - 0.019).abs() < 5e-4, "{}", c.atom);
        assert!((c.photon - 0.022).abs() < 5e-4, "{}", c.photon);
        let doubled = critical_numbers(&CavityParams {
            g0: 2.0 * cav.g0,
            ..cav
        })
        .unwrap();
        assert!(rel(doubled.atom, c.atom / 4.0) < 1e-14);
        assert!(rel(doubled.photon, c.photon / 4.0) < 1e-14);
        let lossless = critical_numbers(&CavityParams {
            gamma_atom: 0.0,
            ..cav
        })
        .unwrap();
        assert_eq!((lossless.atom, lossless.photon), (0.0, 0.0));
        assert!(critical_numbers(&CavityParams { g0: 0.0, ..cav }).is_err());
    }

    #[test]
    fn atoms_for_shift_inverts_collective_shift() {
        let cav = CavityParams::default();
        let n = atoms_for_shift(angular(-148e6), cav.g0, cav.delta_ca).unwrap();
        let back = collective_shift(n, cav.g0, cav.delta_ca).unwrap();
        assert!(rel(back, angular(-148e6)) < 1e-14);
        assert!(atoms_for_shift(angular(148e6), cav.g0, cav.delta_ca).is_err());
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(CavityParams::default().validate().is_ok());
        let same_k = CavityParams {
            k_trap: CavityParams::default().k_probe,
            ..Default::default()
        };
        assert!(same_k.validate().is_err());
        let neg_sigma = CavityParams {
            sigma_jitter: -1.0,
            ..Default::default()
        };
        assert!(neg_sigma.validate().is_err());
        let no_sites = TrapParams {
            num_sites: 0,
            ..Default::default()
        };
        assert!(no_sites.validate().is_err());
        let neg_drive = DriveParams {
            n_max: -1.0,
            ..Default::default()
        };
        assert!(neg_drive.validate().is_err());
    }
}
