use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::io::CsvTable;

/// Fourier amplitude at one frequency in consecutive windows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecay {
    /// Start of the first window; decay times are measured from here.
    pub origin: f64,
    pub window_centers: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Analysis frequency (Hz).
    pub frequency: f64,
    pub window_length: f64,
    /// 1/e time of the selected envelope fit, once fitted.
    pub fitted_tau: Option<f64>,
}

impl SpectralDecay {
    /// `window_center,amplitude`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["window_center", "amplitude"]);
        for (c, a) in self.window_centers.iter().zip(&self.amplitudes) {
            t.push_numbers(&[*c, *a]);
        }
        t
    }
}

/// Single-sided amplitude `(2/T) |sum (x - mean) exp(-i 2 pi f t) dt|`.
///
/// The mean is removed first, so constant offsets never leak into the
/// result. For a sinusoid spanning `c` cycles the residual leakage from the
/// negative-frequency image is at most `1 / (2 pi c)` of its amplitude and
/// vanishes for whole cycles.
pub fn fourier_amplitude(samples: &[f64], dt: f64, frequency: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let step = Complex64::from_polar(1.0, -TAU * frequency * dt);
    let mut phasor = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, x) in samples.iter().enumerate() {
        acc += (x - mean) * phasor;
        phasor *= step;
        if i % 1024 == 1023 {
            phasor = Complex64::from_polar(1.0, -TAU * frequency * dt * (i + 1) as f64);
        }
    }
    2.0 * acc.norm() / n
}

/// Amplitude at `frequency` (Hz) in contiguous, non-overlapping windows of
/// `window_length` seconds, the first starting at `start_time`.
pub fn windowed_fourier_amplitude(
    samples: &[f64],
    dt: f64,
    start_time: f64,
    frequency: f64,
    window_length: f64,
) -> Result<SpectralDecay> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain("sample interval must be positive"));
    }
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(domain("analysis frequency must be positive"));
    }
    if !(window_length > 0.0) || window_length * frequency < 5.0 - 1e-9 {
        return Err(domain("window must span at least five cycles of the analysis frequency"));
    }
    let per_window = (window_length / dt).round() as usize;
    if per_window == 0 || per_window > samples.len() {
        return Err(domain("window is longer than the record"));
    }
    let count = samples.len() / per_window;
    let width = per_window as f64 * dt;
    let mut centers = Vec::with_capacity(count);
    let mut amplitudes = Vec::with_capacity(count);
    for w in 0..count {
        let chunk = &samples[w * per_window..(w + 1) * per_window];
        centers.push(start_time + (w as f64 + 0.5) * width);
        amplitudes.push(fourier_amplitude(chunk, dt, frequency));
    }
    Ok(SpectralDecay {
        origin: start_time,
        window_centers: centers,
        amplitudes,
        frequency,
        window_length: width,
        fitted_tau: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    /// Hz.
    pub frequency: f64,
    pub amplitude: f64,
    /// Frequency resolution `1 / T` of the record (Hz).
    pub bin_width: f64,
}

/// Frequency of largest Fourier amplitude in `[f_lo, f_hi]` Hz, searched on a
/// grid eight times finer than the record's resolution.
pub fn peak_frequency(samples: &[f64], dt: f64, f_lo: f64, f_hi: f64) -> Result<SpectralPeak> {
    if samples.len() < 4 {
        return Err(domain("record too short for a spectrum"));
    }
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(domain("search band must satisfy 0 < f_lo < f_hi"));
    }
    let bin_width = 1.0 / (samples.len() as f64 * dt);
    let step = bin_width / 8.0;
    let n = ((f_hi - f_lo) / step).ceil() as usize + 1;
    let mut best = SpectralPeak {
        frequency: f_lo,
        amplitude: -1.0,
        bin_width,
    };
    for i in 0..n {
        let f = (f_lo + i as f64 * step).min(f_hi);
        let a = fourier_amplitude(samples, dt, f);
        if a > best.amplitude {
            best.frequency = f;
            best.amplitude = a;
        }
    }
    Ok(best)
}

/// Sample-wise mean of equally long records.
pub fn average_traces(records: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = records.first().ok_or_else(|| domain("nothing to average"))?;
    if records.iter().any(|r| r.len() != first.len()) {
        return Err(domain("records differ in length"));
    }
    let n = records.len() as f64;
    Ok((0..first.len())
        .map(|i| records.iter().map(|r| r[i]).sum::<f64>() / n)
        .collect())
}

/// Window-wise mean of amplitude series computed on the same windows.
pub fn average_spectra(spectra: &[SpectralDecay]) -> Result<SpectralDecay> {
    let first = spectra.first().ok_or_else(|| domain("nothing to average"))?;
    if spectra
        .iter()
        .any(|s| s.window_centers != first.window_centers || s.frequency != first.frequency)
    {
        return Err(domain("spectra use different windows or frequencies"));
    }
    let amps: Vec<Vec<f64>> = spectra.iter().map(|s| s.amplitudes.clone()).collect();
    Ok(SpectralDecay {
        amplitudes: average_traces(&amps)?,
        fitted_tau: None,
        ..first.clone()
    })
}
