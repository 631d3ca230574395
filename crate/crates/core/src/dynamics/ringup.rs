use std::f64::consts::TAU;

use super::TransientTrace;
use crate::error::{domain, Result};
use crate::lattice::{collective_shift_from_displacements, LatticeEnsemble};
use crate::params::{CavityParams, PhysicalConstants};
use crate::steady_state::ResponseProfile;

/// How the intracavity field follows the moving atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CavityFieldModel {
    /// The photon number is always at its steady state for the current shift.
    #[default]
    Adiabatic,
    /// The photon number relaxes toward that steady state at rate `2 kappa`.
    FirstOrderFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceModel {
    /// Full `sin(2(theta + k_p z))` dependence.
    #[default]
    Nonlinear,
    /// Force evaluated at the undisplaced site, `sin(2 theta)`.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SwitchOn {
    #[default]
    Instant,
    /// Probe power rises linearly over this many seconds.
    Ramp(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingUpConfig {
    pub delta_pc: f64,
    pub n_max: f64,
    pub field: CavityFieldModel,
    pub force: ForceModel,
    /// Viscous damping rate of every coordinate; zero for none.
    pub viscous_rate: f64,
    pub switch_on: SwitchOn,
    /// Probe-off time before switch-on.
    pub probe_delay: f64,
    /// Simulated time after switch-on.
    pub duration: f64,
    /// Integrator step; defaults to `2 pi / (200 omega_max)`.
    pub dt: Option<f64>,
    /// Keep every n-th step.
    pub record_every: usize,
    /// Store per-site displacement and velocity series.
    pub record_sites: bool,
}

impl Default for RingUpConfig {
    fn default() -> Self {
        Self {
            delta_pc: 0.0,
            n_max: 0.0,
            field: CavityFieldModel::Adiabatic,
            force: ForceModel::Nonlinear,
            viscous_rate: 0.0,
            switch_on: SwitchOn::Instant,
            probe_delay: 0.0,
            duration: 1e-3,
            dt: None,
            record_every: 1,
            record_sites: false,
        }
    }
}

/// Steps per trap period for the default step and the stability limit.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 200.0;
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;

impl RingUpConfig {
    fn drive(&self, t: f64) -> f64 {
        let since = t - self.probe_delay;
        if since < 0.0 {
            return 0.0;
        }
        match self.switch_on {
            SwitchOn::Instant => 1.0,
            SwitchOn::Ramp(tr) if tr > 0.0 => (since / tr).min(1.0),
            SwitchOn::Ramp(_) => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.n_max >= 0.0 && self.n_max.is_finite()) {
            return Err(domain("n_max must be finite and non-negative"));
        }
        if !self.delta_pc.is_finite() {
            return Err(domain("delta_pc must be finite"));
        }
        if !(self.viscous_rate >= 0.0 && self.viscous_rate.is_finite()) {
            return Err(domain("viscous rate must be finite and non-negative"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(domain("duration must be positive"));
        }
        if !(self.probe_delay >= 0.0 && self.probe_delay.is_finite()) {
            return Err(domain("probe delay must be non-negative"));
        }
        if let SwitchOn::Ramp(tr) = self.switch_on {
            if !(tr >= 0.0 && tr.is_finite()) {
                return Err(domain("ramp time must be non-negative"));
            }
        }
        if self.record_every == 0 {
            return Err(domain("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Probe switch-on with the atoms initially at rest at their trap minima.
///
/// Every ensemble entry obeys
/// `z'' = -omega_j^2 z + F(theta_j, z, nbar) / m - gamma_v z'`, integrated by
/// velocity Verlet. After each position update the collective shift is
/// recomputed from all displacements and the photon number set from the
/// cavity response (or relaxed toward it exactly over the step).
pub fn ring_up(
    ensemble: &LatticeEnsemble,
    cavity: &CavityParams,
    constants: &PhysicalConstants,
    profile: &ResponseProfile,
    config: &RingUpConfig,
) -> Result<TransientTrace> {
    config.validate()?;
    cavity.validate()?;
    let delta_ca = cavity.dispersive_detuning()?;
    let sites = ensemble.sites();
    let omega_max = sites.iter().map(|s| s.omega_z).fold(0.0, f64::max);
    let dt_limit = TAU / (MIN_STEPS_PER_PERIOD * omega_max);
    let dt = config
        .dt
        .unwrap_or(TAU / (DEFAULT_STEPS_PER_PERIOD * omega_max));
    if !(dt > 0.0) {
        return Err(domain("time step must be positive"));
    }
    if dt > dt_limit {
        return Err(domain(format!(
            "time step {dt:e} s exceeds the stability limit {dt_limit:e} s (2 pi / 50 omega_max)"
        )));
    }

    let k = cavity.k_probe;
    let theta: Vec<f64> = sites.iter().map(|s| s.theta).collect();
    let omega2: Vec<f64> = sites.iter().map(|s| s.omega_z * s.omega_z).collect();
    let population: Vec<f64> = sites.iter().map(|s| s.population).collect();
    let shift_per_atom = cavity.g0 * cavity.g0 / delta_ca;
    // Acceleration per photon is accel_scale * sin(2 phase).
    let accel_scale = -constants.hbar * cavity.g0 * cavity.g0 * k / (delta_ca * constants.mass);
    let linear = config.force == ForceModel::Linearized;
    let gamma = config.viscous_rate;
    let relax = (-2.0 * cavity.kappa * dt).exp();

    let m = sites.len();
    let mut z = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut a = vec![0.0; m];

    let shift_of = |z: &[f64]| -> f64 {
        population
            .iter()
            .zip(&theta)
            .zip(z)
            .map(|((p, th), zj)| p * (th + k * zj).sin().powi(2))
            .sum::<f64>()
            * shift_per_atom
    };
    let target_nbar = |shift: f64, t: f64| -> f64 {
        config.n_max * config.drive(t) * profile.value(config.delta_pc - shift)
    };
    let conservative = |j: usize, zj: f64, nbar: f64| -> f64 {
        let phase = if linear { theta[j] } else { theta[j] + k * zj };
        -omega2[j] * zj + accel_scale * (2.0 * phase).sin() * nbar
    };

    let total = config.probe_delay + config.duration;
    let steps = (total / dt).ceil() as usize;
    let mut t = 0.0;
    let mut shift = shift_of(&z);
    let mut nbar = match config.field {
        CavityFieldModel::Adiabatic => target_nbar(shift, t),
        CavityFieldModel::FirstOrderFilter => 0.0,
    };
    for j in 0..m {
        a[j] = conservative(j, z[j], nbar);
    }

    let capacity = steps / config.record_every + 2;
    let mut trace = TransientTrace {
        switch_on_time: config.probe_delay,
        time: Vec::with_capacity(capacity),
        delta_n: Vec::with_capacity(capacity),
        nbar: Vec::with_capacity(capacity),
        probe_on: Vec::with_capacity(capacity),
        ..TransientTrace::default()
    };
    if config.record_sites {
        trace.displacements = vec![Vec::with_capacity(capacity); m];
        trace.velocities = vec![Vec::with_capacity(capacity); m];
    }
    let record = |trace: &mut TransientTrace, t: f64, shift: f64, nbar: f64, z: &[f64], v: &[f64]| {
        trace.time.push(t);
        trace.delta_n.push(shift);
        trace.nbar.push(nbar);
        trace.probe_on.push(config.drive(t) > 0.0 && config.n_max > 0.0);
        for (series, zj) in trace.displacements.iter_mut().zip(z) {
            series.push(*zj);
        }
        for (series, vj) in trace.velocities.iter_mut().zip(v) {
            series.push(*vj);
        }
    };
    record(&mut trace, t, shift, nbar, &z, &v);

    for step in 1..=steps {
        for j in 0..m {
            v[j] += 0.5 * dt * a[j];
            z[j] += dt * v[j];
        }
        t = step as f64 * dt;
        shift = shift_of(&z);
        let target = target_nbar(shift, t);
        nbar = match config.field {
            CavityFieldModel::Adiabatic => target,
            CavityFieldModel::FirstOrderFilter => target + (nbar - target) * relax,
        };
        for j in 0..m {
            let ac = conservative(j, z[j], nbar);
            // Damping treated implicitly in the closing half kick.
            v[j] = (v[j] + 0.5 * dt * ac) / (1.0 + 0.5 * dt * gamma);
            a[j] = ac - gamma * v[j];
        }
        if step % config.record_every == 0 {
            record(&mut trace, t, shift, nbar, &z, &v);
        }
    }
    if !trace.nbar.iter().all(|n| n.is_finite()) || !trace.delta_n.iter().all(|d| d.is_finite()) {
        return Err(crate::error::Error::Numeric("ring-up integration diverged".into()));
    }
    Ok(trace)
}

/// Headline numbers of a ring-up transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingUpSummary {
    /// Collective shift before switch-on.
    pub initial_shift: f64,
    /// Peak-to-peak excursion of the collective shift during the first two
    /// trap periods after switch-on, in units of kappa.
    pub excursion: f64,
    /// Peak-to-peak variation of the photon number over the same interval,
    /// once the switch-on ramp is complete.
    pub photon_variation: f64,
    /// Peak-to-peak displacement a single well at `pi/4`, holding all the
    /// atoms, would need to produce the same excursion.
    pub representative_displacement: f64,
    /// Photon number immediately after switch-on.
    pub switch_on_nbar: f64,
}

/// Summarises the start of a ring-up trace. `omega` sets the two-period
/// window; `ramp` is the switch-on ramp time (zero if instantaneous).
pub fn summarize_ring_up(
    trace: &TransientTrace,
    cavity: &CavityParams,
    omega: f64,
    ramp: f64,
) -> Result<RingUpSummary> {
    trace.check_lengths()?;
    if trace.len() < 3 {
        return Err(domain("trace too short to summarise"));
    }
    let on = trace.switch_on_time;
    let i0 = trace.index_at(on);
    let i_ramped = trace.index_at(on + ramp);
    let i1 = trace.index_at(on + 2.0 * TAU / omega);
    if i1 >= trace.len() || i_ramped >= i1 {
        return Err(domain("trace does not cover two trap periods after switch-on"));
    }
    let initial_shift = trace.delta_n[i0.saturating_sub(1).min(i0)];
    let span = |s: &[f64]| {
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        hi - lo
    };
    let excursion_abs = span(&trace.delta_n[i0..=i1]);
    let excursion = excursion_abs / cavity.kappa;
    let photon_variation = span(&trace.nbar[i_ramped..=i1]);
    let representative_displacement = if initial_shift == 0.0 {
        0.0
    } else {
        excursion_abs / (2.0 * initial_shift.abs() * cavity.k_probe)
    };
    Ok(RingUpSummary {
        initial_shift,
        excursion,
        photon_variation,
        representative_displacement,
        switch_on_nbar: trace.nbar[i_ramped],
    })
}

/// Sanity helper for tests and reports: the collective shift of `ensemble`
/// at rest.
pub fn resting_shift(ensemble: &LatticeEnsemble, cavity: &CavityParams) -> Result<f64> {
    collective_shift_from_displacements(ensemble, &vec![0.0; ensemble.len()], cavity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{effective_kerr_numeric, per_site_force, probe_potential, LatticeBuilder, SpreadSampling};
    use crate::measure::{decay_fit, peak_frequency, windowed_fourier_amplitude, EnvelopeModel};
    use crate::params::angular;
    use crate::steady_state::steady_states;
    use std::f64::consts::FRAC_PI_4;

    const C: PhysicalConstants = PhysicalConstants::RB87;

    fn cavity() -> CavityParams {
        CavityParams {
            delta_ca: angular(-260e9),
            ..CavityParams::default()
        }
    }

    fn lorentzian(c: &CavityParams) -> ResponseProfile {
        ResponseProfile::lorentzian(c.kappa).unwrap()
    }

    #[test]
    fn step_response_of_a_lone_well() {
        let cav = cavity();
        let w = angular(49e3);
        // No atoms, so the photon number never changes.
        let e = LatticeEnsemble::single_well(FRAC_PI_4, 0.0, w).unwrap();
        let cfg = RingUpConfig {
            n_max: 5.0,
            duration: 40.0 * TAU / w,
            force: ForceModel::Linearized,
            record_sites: true,
            ..RingUpConfig::default()
        };
        let tr = ring_up(&e, &cav, &C, &lorentzian(&cav), &cfg).unwrap();
        let z = &tr.displacements[0];
        let (lo, hi) = z.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        let static_shift = per_site_force(FRAC_PI_4, 0.0, 5.0, &cav, &C) / (C.mass * w * w);
        assert!(lo.abs() < 1e-6 * static_shift.abs());
        assert!(((hi - lo) / (2.0 * static_shift) - 1.0).abs() < 1e-4);
        let dt = tr.sample_interval().unwrap();
        let p = peak_frequency(z, dt, 20e3, 80e3).unwrap();
        assert!((p.frequency - 49e3).abs() < p.bin_width);
    }

    /// Hann-weighted mean. The energy wobble sits at twice the oscillation
    /// frequency, which the probe shifts off the nominal trap frequency, so a
    /// flat mean over a nominal block leaks it; the taper does not.
    fn hann_mean(s: &[f64]) -> f64 {
        let n = s.len() as f64;
        let w = |i: usize| 1.0 - (TAU * (i as f64 + 0.5) / n).cos();
        s.iter().enumerate().map(|(i, x)| w(i) * x).sum::<f64>() / (0..s.len()).map(w).sum::<f64>()
    }

    #[test]
    fn period_averaged_energy_is_conserved() {
        let cav = cavity();
        let w = angular(49e3);
        let e = LatticeEnsemble::single_well(0.3, 0.0, w).unwrap();
        let nbar = 40.0;
        let cfg = RingUpConfig {
            n_max: nbar,
            duration: 100.0 * TAU / w,
            record_sites: true,
            ..RingUpConfig::default()
        };
        let tr = ring_up(&e, &cav, &C, &lorentzian(&cav), &cfg).unwrap();
        let energy: Vec<f64> = (0..tr.len())
            .map(|i| {
                let (z, v) = (tr.displacements[0][i], tr.velocities[0][i]);
                0.5 * C.mass * (v * v + w * w * z * z) + probe_potential(0.3, z, nbar, &cav, &C)
            })
            .collect();
        // Velocity Verlet keeps a bounded O((omega dt)^2) wobble in the true
        // energy; the secular drift shows up in averages over ten periods.
        let block = energy.len() / 10;
        let first = hann_mean(&energy[..block]);
        let last = hann_mean(&energy[energy.len() - block..]);
        assert!(((last - first) / first).abs() <= 1e-6, "{first} {last}");
    }

    #[test]
    fn step_guard_rejects_coarse_steps() {
        let cav = cavity();
        let w = angular(49e3);
        let e = LatticeEnsemble::single_well(FRAC_PI_4, 1.0, w).unwrap();
        let cfg = RingUpConfig {
            n_max: 1.0,
            dt: Some(TAU / (40.0 * w)),
            ..RingUpConfig::default()
        };
        assert!(ring_up(&e, &cav, &C, &lorentzian(&cav), &cfg).is_err());
        let ok = RingUpConfig {
            dt: Some(TAU / (50.0 * w)),
            duration: 1e-4,
            ..cfg
        };
        assert!(ring_up(&e, &cav, &C, &lorentzian(&cav), &ok).is_ok());
    }

    #[test]
    fn recorded_shift_matches_displacements() {
        let cav = cavity();
        let mut b = LatticeBuilder::new(40, 1.0, angular(49e3), &cav);
        b.omega_z_spread = 2e3;
        b.sub_ensembles = 2;
        let e = b.build().unwrap().with_collective_shift(angular(-19e6), &cav).unwrap();
        let cfg = RingUpConfig {
            delta_pc: angular(-17e6),
            n_max: 16.0,
            duration: 2e-4,
            record_sites: true,
            ..RingUpConfig::default()
        };
        let tr = ring_up(&e, &cav, &C, &lorentzian(&cav), &cfg).unwrap();
        tr.check_lengths().unwrap();
        assert!(tr.shift_consistency(&e, &cav, 97).unwrap() < 1e-12);
        assert!(tr.nbar.iter().all(|n| *n >= 0.0));
    }

    #[test]
    fn gaussian_spread_dephases_at_the_closed_form_rate() {
        let cav = cavity();
        let spread = 1414.0;
        let mut b = LatticeBuilder::new(1, 1e-3, angular(49e3), &cav);
        b.phases = crate::lattice::PhaseModel::Fixed(FRAC_PI_4);
        b.omega_z_spread = spread;
        b.sub_ensembles = 400;
        b.spread_sampling = SpreadSampling::Quantiles;
        let e = b.build().unwrap();
        let cfg = RingUpConfig {
            n_max: 5.0,
            duration: 2.5e-3,
            ..RingUpConfig::default()
        };
        let tr = ring_up(&e, &cav, &C, &lorentzian(&cav), &cfg).unwrap();
        let dt = tr.sample_interval().unwrap();
        let d = windowed_fourier_amplitude(&tr.delta_n, dt, 0.0, 49e3, 200e-6).unwrap();
        let fit = decay_fit(&d, EnvelopeModel::Gaussian).unwrap();
        let expect = 2f64.sqrt() / spread;
        assert!((fit.gaussian_time / expect - 1.0).abs() < 0.05, "{}", fit.gaussian_time);
    }

    #[test]
    fn filtered_field_approaches_adiabatic_as_cavity_speeds_up() {
        let w = angular(49e3);
        let mut worst = Vec::new();
        for kappa in [angular(0.1e6), angular(0.66e6), angular(5e6)] {
            let cav = CavityParams {
                kappa,
                ..cavity()
            };
            let e = LatticeEnsemble::single_well(FRAC_PI_4, 1.0, w)
                .unwrap()
                .with_collective_shift(angular(-19e6), &cav)
                .unwrap();
            let profile = lorentzian(&cav);
            let base = RingUpConfig {
                delta_pc: angular(-19e6) + kappa,
                n_max: 10.0,
                duration: 1e-4,
                switch_on: SwitchOn::Ramp(20e-6),
                ..RingUpConfig::default()
            };
            let a = ring_up(&e, &cav, &C, &profile, &base).unwrap();
            let f = ring_up(
                &e,
                &cav,
                &C,
                &profile,
                &RingUpConfig {
                    field: CavityFieldModel::FirstOrderFilter,
                    ..base
                },
            )
            .unwrap();
            worst.push(a.nbar.iter().zip(&f.nbar).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
        assert!(worst[0] > worst[1] && worst[1] > worst[2], "{worst:?}");
        assert!(worst[2] < 0.05 * 10.0);
    }

    #[test]
    fn slow_ramp_settles_on_the_steady_state() {
        let cav = cavity();
        let w = angular(49e3);
        let mut b = LatticeBuilder::new(60, 1.0, w, &cav);
        b.sub_ensembles = 1;
        let e = b.build().unwrap().with_collective_shift(angular(-19e6), &cav).unwrap();
        let profile = ResponseProfile::from_jitter(cav.kappa, cav.sigma_jitter).unwrap();
        let delta_pc = angular(-17e6);
        let n_max = 16.8;
        let cfg = RingUpConfig {
            delta_pc,
            n_max,
            duration: 3e-3,
            viscous_rate: 2e4,
            switch_on: SwitchOn::Ramp(1e-3),
            ..RingUpConfig::default()
        };
        let tr = ring_up(&e, &cav, &C, &profile, &cfg).unwrap();
        let shift = resting_shift(&e, &cav).unwrap();
        let eps = effective_kerr_numeric(&e, &cav, &C).unwrap();
        let beta = shift * eps * n_max / cav.kappa;
        let sol = steady_states(&profile, (delta_pc - shift) / cav.kappa, beta);
        assert_eq!(sol.roots.len(), 1);
        let u = tr.nbar.last().unwrap() / n_max;
        assert!((u / sol.roots[0].u - 1.0).abs() < 0.01, "{u} vs {:?}", sol.roots);
    }
}
