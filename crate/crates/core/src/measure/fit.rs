use super::SpectralDecay;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeModel {
    /// `A0 exp(-t^2 / t_e^2)`, the shape of inhomogeneous dephasing.
    #[default]
    Gaussian,
    /// `A0 exp(-t / t_e)`.
    Exponential,
}

/// 1/e times of a decaying spectral amplitude under both envelope models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gaussian_time: f64,
    pub exponential_time: f64,
    /// Where the measured amplitudes cross `A0 / e` of the selected fit,
    /// interpolated in log amplitude between windows.
    pub crossing: Option<f64>,
    /// `A0` of the selected fit.
    pub initial_amplitude: f64,
    pub model: EnvelopeModel,
    /// False when the data do not decay appreciably over the record or a fit
    /// produced a non-physical time.
    pub reliable: bool,
}

impl DecayFit {
    /// 1/e time of the selected model.
    pub fn time(&self) -> f64 {
        match self.model {
            EnvelopeModel::Gaussian => self.gaussian_time,
            EnvelopeModel::Exponential => self.exponential_time,
        }
    }
}

/// Weighted least-squares line `y = c + s x`; returns `(c, s)`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let s = sxy / sxx;
    Some((my - s * mx, s))
}

/// Fits the log amplitude against both envelope models, with each window
/// weighted by its squared amplitude (the inverse variance of the log of a
/// noisy amplitude), and reports the selected model's 1/e time.
pub fn decay_fit(decay: &SpectralDecay, model: EnvelopeModel) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = decay
        .window_centers
        .iter()
        .zip(&decay.amplitudes)
        .filter(|(_, a)| **a > 0.0)
        .map(|(t, a)| (t - decay.origin, *a))
        .collect();
    if decay.amplitudes.len() < 4 {
        return Err(domain("decay fit needs at least four windows"));
    }
    if pts.len() < 4 {
        // Nothing to fit: a dark or vanishing signal.
        return Ok(DecayFit {
            gaussian_time: f64::NAN,
            exponential_time: f64::NAN,
            crossing: None,
            initial_amplitude: 0.0,
            model,
            reliable: false,
        });
    }
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let w: Vec<f64> = pts.iter().map(|p| p.1 * p.1).collect();
    let t2: Vec<f64> = t.iter().map(|x| x * x).collect();

    let (cg, sg) = weighted_line(&t2, &y, &w).ok_or_else(|| domain("degenerate window times"))?;
    let (ce, se) = weighted_line(&t, &y, &w).ok_or_else(|| domain("degenerate window times"))?;
    let gaussian_time = if sg < 0.0 { (-1.0 / sg).sqrt() } else { f64::INFINITY };
    let exponential_time = if se < 0.0 { -1.0 / se } else { f64::INFINITY };

    let (c, selected) = match model {
        EnvelopeModel::Gaussian => (cg, gaussian_time),
        EnvelopeModel::Exponential => (ce, exponential_time),
    };
    let initial_amplitude = c.exp();
    let level = c - 1.0;
    // Interpolate in the coordinate where the selected model is linear.
    let axis = |t: f64| match model {
        EnvelopeModel::Gaussian => t * t,
        EnvelopeModel::Exponential => t,
    };
    let crossing = pts.windows(2).find_map(|p| {
        let (y0, y1) = (p[0].1.ln(), p[1].1.ln());
        let (x0, x1) = (axis(p[0].0), axis(p[1].0));
        let x = x0 + (x1 - x0) * (y0 - level) / (y0 - y1);
        (y0 >= level && y1 < level).then(|| match model {
            EnvelopeModel::Gaussian => x.sqrt(),
            EnvelopeModel::Exponential => x,
        })
    });

    // The envelope must fall by at least ~10% across the record.
    let t_last = *t.last().expect("at least four points");
    let decay_over_record = match model {
        EnvelopeModel::Gaussian => (t_last / selected).powi(2),
        EnvelopeModel::Exponential => t_last / selected,
    };
    let reliable = selected.is_finite() && selected > 0.0 && decay_over_record >= 0.1;
    Ok(DecayFit {
        gaussian_time,
        exponential_time,
        crossing,
        initial_amplitude,
        model,
        reliable,
    })
}
