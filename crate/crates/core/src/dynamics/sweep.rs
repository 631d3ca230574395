use crate::error::{domain, Result};
use crate::steady_state::{lineshape_scan, ResponseProfile, SweepDirection};

/// A linear chirp of the probe across the cavity resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Chirp of the probe detuning in Hz per second (cyclic), signed.
    pub chirp_rate: f64,
    pub delta_pc_start: f64,
    pub delta_pc_end: f64,
    pub n_max: f64,
    /// Collective shift of the undisplaced atoms.
    pub collective_shift: f64,
    /// Detuning grid points, including both ends.
    pub points: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chirp_rate.is_finite() && self.chirp_rate != 0.0) {
            return Err(domain("chirp rate must be finite and nonzero"));
        }
        let span = self.delta_pc_end - self.delta_pc_start;
        if !(span.is_finite() && span != 0.0) {
            return Err(domain("sweep needs distinct finite start and end detunings"));
        }
        if span.signum() != self.chirp_rate.signum() {
            return Err(domain("sweep end lies on the wrong side of the start for this chirp sign"));
        }
        if !(self.n_max >= 0.0 && self.n_max.is_finite()) {
            return Err(domain("n_max must be finite and non-negative"));
        }
        if !self.collective_shift.is_finite() {
            return Err(domain("collective shift must be finite"));
        }
        if self.points < 2 {
            return Err(domain("sweep needs at least two points"));
        }
        Ok(())
    }

    pub fn direction(&self) -> SweepDirection {
        if self.chirp_rate > 0.0 {
            SweepDirection::Up
        } else {
            SweepDirection::Down
        }
    }

    /// Grid spacing in probe detuning (rad/s).
    pub fn step(&self) -> f64 {
        (self.delta_pc_end - self.delta_pc_start).abs() / (self.points - 1) as f64
    }

    /// The same sweep run backwards at the opposite chirp.
    pub fn reversed(&self) -> Self {
        Self {
            chirp_rate: -self.chirp_rate,
            delta_pc_start: self.delta_pc_end,
            delta_pc_end: self.delta_pc_start,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Time since the start of the chirp.
    pub time: f64,
    pub delta_pc: f64,
    pub nbar: f64,
    pub jumped: bool,
}

/// Intracavity photon number along a slow chirp, with the atoms following
/// their equilibrium and the field following the atoms.
///
/// Points are returned in sweep order. `beta` must have been computed for
/// `config.n_max`.
pub fn quasi_static_sweep(
    config: &SweepConfig,
    profile: &ResponseProfile,
    beta: f64,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    if !beta.is_finite() {
        return Err(domain("beta must be finite"));
    }
    let kappa = profile.kappa();
    let n = config.points;
    // Built low to high so opposite chirps visit bit-identical detunings.
    let lo = config.delta_pc_start.min(config.delta_pc_end);
    let hi = config.delta_pc_start.max(config.delta_pc_end);
    let mut grid: Vec<f64> = (0..n)
        .map(|i| lo + (i as f64 / (n - 1) as f64) * (hi - lo))
        .collect();
    if config.chirp_rate < 0.0 {
        grid.reverse();
    }
    let reduced: Vec<f64> = grid
        .iter()
        .map(|d| (d - config.collective_shift) / kappa)
        .collect();
    let scan = lineshape_scan(profile, beta, &reduced, config.direction())?;
    let hz_per_rad = 1.0 / std::f64::consts::TAU;
    Ok(scan
        .into_iter()
        .zip(grid)
        .map(|(p, delta_pc)| SweepPoint {
            time: (delta_pc - config.delta_pc_start).abs() * hz_per_rad / config.chirp_rate.abs(),
            delta_pc,
            nbar: p.u * config.n_max,
            jumped: p.jumped,
        })
        .collect())
}
