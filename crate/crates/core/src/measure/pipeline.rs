use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    average_spectra, decay_fit, expected_counts, peak_frequency, poisson_counts,
    windowed_fourier_amplitude, CountRecord, CountSettings, DecayFit, EnvelopeModel,
    SpectralDecay, SpectralPeak,
};
use crate::dynamics::{ring_up, RingUpConfig, TransientTrace};
use crate::error::{domain, Result};
use crate::lattice::LatticeEnsemble;
use crate::params::{CavityParams, PhysicalConstants};
use crate::steady_state::ResponseProfile;

/// Order in which repeated measurements are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Sum the count records, then take the windowed spectrum.
    #[default]
    Traces,
    /// Take each record's windowed spectrum, then average the amplitudes.
    Spectra,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingdownConfig {
    pub ring_up: RingUpConfig,
    pub counts: CountSettings,
    pub repetitions: usize,
    pub window_length: f64,
    /// Analysis frequency in Hz; `None` picks the spectral peak of the
    /// combined record inside `search_band`.
    pub frequency: Option<f64>,
    pub search_band: (f64, f64),
    pub averaging: Averaging,
    pub envelope: EnvelopeModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingdownResult {
    pub trace: TransientTrace,
    /// Counts summed over all repetitions, starting at probe-on.
    pub counts: CountRecord,
    pub peak: SpectralPeak,
    pub decay: SpectralDecay,
    pub fit: DecayFit,
}

/// Seed of repetition `rep`, derived from the master seed on its own stream.
pub fn repetition_seed(master: u64, rep: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(rep + 1);
    rng.next_u64()
}

/// Switch-on transient, photon counting over repeated runs, windowed
/// spectrum and envelope fit.
///
/// The atoms' motion is deterministic, so it is simulated once; every
/// repetition draws fresh Poisson counts from the same photon-number trace.
pub fn ringdown_pipeline(
    ensemble: &LatticeEnsemble,
    cavity: &CavityParams,
    constants: &PhysicalConstants,
    profile: &ResponseProfile,
    config: &RingdownConfig,
    seed: u64,
) -> Result<RingdownResult> {
    if config.repetitions == 0 {
        return Err(domain("need at least one repetition"));
    }
    let trace = ring_up(ensemble, cavity, constants, profile, &config.ring_up)?;
    let i0 = trace.index_at(trace.switch_on_time);
    let times = &trace.time[i0..];
    let means = expected_counts(times, &trace.nbar[i0..], cavity.kappa, &config.counts)?;
    let bin = config.counts.bin_width;
    let start = times[0];

    let mut records = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let rep_seed = repetition_seed(seed, rep as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        records.push(CountRecord {
            bin_width: bin,
            start_time: start,
            counts: poisson_counts(&means, &mut rng)?,
            seed: rep_seed,
        });
    }
    let mut total = records[0].clone();
    total.seed = seed;
    for r in &records[1..] {
        total.accumulate(r)?;
    }
    let summed = total.as_f64();
    let peak = peak_frequency(&summed, bin, config.search_band.0, config.search_band.1)?;
    let frequency = config.frequency.unwrap_or(peak.frequency);

    let mut decay = match config.averaging {
        Averaging::Traces => {
            windowed_fourier_amplitude(&summed, bin, start, frequency, config.window_length)?
        }
        Averaging::Spectra => {
            let spectra = records
                .iter()
                .map(|r| windowed_fourier_amplitude(&r.as_f64(), bin, start, frequency, config.window_length))
                .collect::<Result<Vec<_>>>()?;
            let mut s = average_spectra(&spectra)?;
            // Keep the scale comparable with summed traces.
            for a in &mut s.amplitudes {
                *a *= config.repetitions as f64;
            }
            s
        }
    };
    let fit = decay_fit(&decay, config.envelope)?;
    decay.fitted_tau = fit.reliable.then(|| fit.time());
    Ok(RingdownResult {
        trace,
        counts: total,
        peak,
        decay,
        fit,
    })
}
