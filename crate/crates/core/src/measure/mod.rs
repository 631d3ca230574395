//! The detection chain: photon counting, trigger sequencing, windowed
//! spectral amplitude and envelope fitting.

mod counts;
mod fit;
mod pipeline;
mod spectral;
mod trigger;

pub use counts::{
    count_monte_carlo, detected_rate, expected_counts, poisson_counts, CountRecord, CountSettings,
};
pub use fit::{decay_fit, DecayFit, EnvelopeModel};
pub use pipeline::{repetition_seed, ringdown_pipeline, Averaging, RingdownConfig, RingdownResult};
pub use spectral::{
    average_spectra, average_traces, fourier_amplitude, peak_frequency,
    windowed_fourier_amplitude, SpectralDecay, SpectralPeak,
};
pub use trigger::{
    expected_trigger_time, trigger_sequence, TriggerConfig, TriggerEvent, TriggerOutcome,
    TriggerRun,
};
