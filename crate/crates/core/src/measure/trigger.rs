use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{detected_rate, expected_counts, poisson_counts, CountRecord, CountSettings};
use crate::dynamics::drifting_shift;
use crate::error::{domain, Result};
use crate::params::CavityParams;
use crate::steady_state::ResponseProfile;

/// Trigger, delay and detection phases of a conditioned measurement.
///
/// While atoms are lost the collective shift drifts toward the probe and the
/// transmission rises; the run triggers when the smoothed count rate first
/// reaches `threshold_rate`. The probe is then switched off for `delay` and
/// back on at `detection_level` photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerConfig {
    pub initial_atoms: f64,
    pub loss_rate: f64,
    pub delta_pc: f64,
    /// Resonant photon number of the probe during the trigger phase.
    pub probe_level: f64,
    /// Detected counts per second that fire the trigger.
    pub threshold_rate: f64,
    /// Length of the causal moving average applied to the counts.
    pub smoothing: f64,
    /// Give up after this long.
    pub horizon: f64,
    pub delay: f64,
    pub detection_level: f64,
    pub counts: CountSettings,
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<()> {
        self.counts.validate()?;
        for (name, v) in [
            ("initial_atoms", self.initial_atoms),
            ("loss_rate", self.loss_rate),
            ("probe_level", self.probe_level),
            ("threshold_rate", self.threshold_rate),
            ("delay", self.delay),
            ("detection_level", self.detection_level),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be finite and non-negative")));
            }
        }
        if !(self.smoothing >= self.counts.bin_width && self.smoothing.is_finite()) {
            return Err(domain("smoothing must be at least one count bin"));
        }
        if !(self.horizon > self.smoothing && self.horizon.is_finite()) {
            return Err(domain("horizon must exceed the smoothing time"));
        }
        if !self.delta_pc.is_finite() {
            return Err(domain("delta_pc must be finite"));
        }
        Ok(())
    }

    /// Transmitted photon number at time `t`; the weak trigger probe is
    /// treated as linear.
    pub fn nbar_at(&self, t: f64, cavity: &CavityParams, profile: &ResponseProfile) -> Result<f64> {
        let shift = drifting_shift(self.initial_atoms, self.loss_rate, t, cavity.g0, cavity.delta_ca)?;
        Ok(self.probe_level * profile.value(self.delta_pc - shift))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerEvent {
    pub trigger_time: f64,
    /// Collective shift at the trigger instant.
    pub conditioned_shift: f64,
    pub probe_off_time: f64,
    pub probe_on_time: f64,
    pub detection_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriggerOutcome {
    Triggered(TriggerEvent),
    NoTrigger { horizon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerRun {
    pub outcome: TriggerOutcome,
    pub record: CountRecord,
    /// Smoothed count rate (counts/s) for each bin; zero until the first
    /// full smoothing window.
    pub smoothed_rate: Vec<f64>,
}

/// Simulates the trigger phase with Poisson counts, reproducibly from `seed`.
pub fn trigger_sequence(
    config: &TriggerConfig,
    cavity: &CavityParams,
    profile: &ResponseProfile,
    seed: u64,
) -> Result<TriggerRun> {
    config.validate()?;
    let bin = config.counts.bin_width;
    let bins = (config.horizon / bin).floor() as usize;
    let times: Vec<f64> = (0..=bins).map(|i| i as f64 * bin).collect();
    let nbar = times
        .iter()
        .map(|&t| config.nbar_at(t, cavity, profile))
        .collect::<Result<Vec<f64>>>()?;
    let means = expected_counts(&times, &nbar, cavity.kappa, &config.counts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = poisson_counts(&means, &mut rng)?;

    let window = ((config.smoothing / bin).round() as usize).max(1);
    let mut smoothed_rate = vec![0.0; counts.len()];
    let mut running: u64 = 0;
    let mut fired = None;
    for i in 0..counts.len() {
        running += counts[i];
        if i >= window {
            running -= counts[i - window];
        }
        if i + 1 >= window {
            smoothed_rate[i] = running as f64 / (window as f64 * bin);
            if fired.is_none() && smoothed_rate[i] >= config.threshold_rate {
                fired = Some(i);
            }
        }
    }
    let outcome = match fired {
        None => TriggerOutcome::NoTrigger {
            horizon: config.horizon,
        },
        Some(i) => {
            let t = (i + 1) as f64 * bin;
            TriggerOutcome::Triggered(TriggerEvent {
                trigger_time: t,
                conditioned_shift: drifting_shift(
                    config.initial_atoms,
                    config.loss_rate,
                    t,
                    cavity.g0,
                    cavity.delta_ca,
                )?,
                probe_off_time: t,
                probe_on_time: t + config.delay,
                detection_level: config.detection_level,
            })
        }
    };
    Ok(TriggerRun {
        outcome,
        record: CountRecord {
            bin_width: bin,
            start_time: 0.0,
            counts,
            seed,
        },
        smoothed_rate,
    })
}

/// First time the noiseless detected rate reaches the threshold, found by
/// bisection on a monotone bracket; `None` if it never does within the horizon.
pub fn expected_trigger_time(
    config: &TriggerConfig,
    cavity: &CavityParams,
    profile: &ResponseProfile,
) -> Result<Option<f64>> {
    config.validate()?;
    let rate = |t: f64| -> Result<f64> {
        Ok(detected_rate(config.nbar_at(t, cavity, profile)?, cavity.kappa, config.counts.efficiency)
            + config.counts.dark_rate)
    };
    // Walk forward until the rate first exceeds the threshold.
    let steps = 10_000;
    let h = config.horizon / steps as f64;
    let mut lo = 0.0;
    if rate(lo)? >= config.threshold_rate {
        return Ok(Some(0.0));
    }
    for i in 1..=steps {
        let hi = i as f64 * h;
        if rate(hi)? >= config.threshold_rate {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if rate(m)? >= config.threshold_rate {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(Some(b));
        }
        lo = hi;
    }
    Ok(None)
}
