//! Time-domain behaviour: slow hysteresis sweeps, probe switch-on transients
//! of the trapped atoms, single-photon kicks and slow atom loss.

mod drift;
mod impulse;
mod ringup;
mod sweep;
mod trace;

pub use drift::{atom_loss_drift, drifting_shift, shift_crossing_time};
pub use impulse::{
    impulse_modulation_estimate, impulse_regime_boundary, ImpulseCoupling, ImpulseEstimate,
};
pub use ringup::{
    resting_shift, ring_up, summarize_ring_up, CavityFieldModel, ForceModel, RingUpConfig,
    RingUpSummary, SwitchOn, DEFAULT_STEPS_PER_PERIOD, MIN_STEPS_PER_PERIOD,
};
pub use sweep::{quasi_static_sweep, SweepConfig, SweepPoint};
pub use trace::TransientTrace;
