//! Steady states of the Kerr-shifted cavity.
//!
//! With `u = n / n_max`, reduced detuning `delta0 = (delta_pc - delta_n) / kappa`
//! and nonlinearity `beta`, the intracavity photon number obeys
//!
//! ```text
//! u = V(delta0 + beta u)
//! ```
//!
//! where `V` is the unit-peak cavity response in units of `kappa`. For the
//! Lorentzian this is the cubic `beta^2 u^3 + 2 delta0 beta u^2 + (1 + delta0^2) u - 1 = 0`.
//! A root is stable when `1 - beta V'(delta0 + beta u) > 0`.

mod cubic;
mod folds;
mod profile;
mod roots;
mod scan;

pub use cubic::steady_state_roots_lorentzian;
pub use folds::{bistability_threshold, cusp_point, fold_points, FoldPoint};
pub use profile::{ProfileKind, ResponseProfile};
pub use roots::steady_state_roots_profile;
pub use scan::{hysteresis_area, lineshape_scan, ScanPoint, SweepDirection};

/// One steady-state photon fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyRoot {
    /// Photon number in units of `n_max`, in `(0, 1]`.
    pub u: f64,
    pub stable: bool,
    /// 2 at a fold, where two branches merge; 1 otherwise.
    pub multiplicity: u8,
}

/// All steady states at one detuning, sorted by ascending `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub roots: Vec<SteadyRoot>,
    pub delta0: f64,
    pub beta: f64,
}

impl SteadyStateSolution {
    /// Number of roots counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity as usize).sum()
    }

    pub fn stable_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().filter(|r| r.stable).map(|r| r.u)
    }

    pub fn is_bistable(&self) -> bool {
        self.roots.iter().filter(|r| r.stable).count() >= 2
    }
}

/// Steady states for any profile: closed form for the Lorentzian, grid
/// bracketing otherwise.
pub fn steady_states(profile: &ResponseProfile, delta0: f64, beta: f64) -> SteadyStateSolution {
    match profile.kind() {
        ProfileKind::Lorentzian => steady_state_roots_lorentzian(delta0, beta),
        ProfileKind::Voigt => steady_state_roots_profile(profile, delta0, beta),
    }
}
