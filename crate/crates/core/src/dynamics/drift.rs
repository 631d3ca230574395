use crate::error::{domain, Result};
use crate::params::{atoms_for_shift, collective_shift};

/// Atom number after exponential trap loss, `n0 exp(-rate t)`.
pub fn atom_loss_drift(n0: f64, loss_rate: f64, t: f64) -> Result<f64> {
    if !(loss_rate >= 0.0 && loss_rate.is_finite()) {
        return Err(domain("loss rate must be finite and non-negative"));
    }
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(domain("initial atom number must be non-negative"));
    }
    Ok(n0 * (-loss_rate * t).exp())
}

/// Collective shift of the (multi-well) ensemble at time `t` during loss.
pub fn drifting_shift(n0: f64, loss_rate: f64, t: f64, g0: f64, delta_ca: f64) -> Result<f64> {
    collective_shift(atom_loss_drift(n0, loss_rate, t)?, g0, delta_ca)
}

/// Time at which the decaying collective shift reaches `target`.
///
/// `None` if the target is never reached: it has the wrong sign, lies beyond
/// the starting shift, or the atoms are not being lost.
pub fn shift_crossing_time(
    n0: f64,
    loss_rate: f64,
    g0: f64,
    delta_ca: f64,
    target: f64,
) -> Result<Option<f64>> {
    atom_loss_drift(n0, loss_rate, 0.0)?;
    let needed = match atoms_for_shift(target, g0, delta_ca) {
        Ok(n) => n,
        Err(_) => return Ok(None),
    };
    if needed > n0 || needed <= 0.0 {
        return Ok(None);
    }
    if loss_rate == 0.0 {
        return Ok((needed == n0).then_some(0.0));
    }
    Ok(Some((n0 / needed).ln() / loss_rate))
}
