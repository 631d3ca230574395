use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{domain, Error, Result};
use crate::io::{format_f64, CsvTable};

/// Photon-counting chain: end-to-end efficiency and binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSettings {
    /// Probability that a photon leaving the cavity is counted.
    pub efficiency: f64,
    pub bin_width: f64,
    /// Background counts per second.
    pub dark_rate: f64,
}

impl Default for CountSettings {
    fn default() -> Self {
        Self {
            efficiency: 0.05,
            bin_width: 1e-6,
            dark_rate: 0.0,
        }
    }
}

impl CountSettings {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(domain("efficiency must lie in [0, 1]"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(domain("bin width must be positive"));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(domain("dark count rate must be non-negative"));
        }
        Ok(())
    }
}

/// Detected count rate `2 kappa nbar efficiency`.
pub fn detected_rate(nbar: f64, kappa: f64, efficiency: f64) -> f64 {
    2.0 * kappa * nbar * efficiency
}

/// Binned photon counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub bin_width: f64,
    /// Start of the first bin.
    pub start_time: f64,
    pub counts: Vec<u64>,
    pub seed: u64,
}

impl CountRecord {
    pub fn bin_start(&self, i: usize) -> f64 {
        self.start_time + i as f64 * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Bin-wise sum with another record on the same time grid.
    pub fn accumulate(&mut self, other: &CountRecord) -> Result<()> {
        if other.counts.len() != self.counts.len()
            || other.bin_width != self.bin_width
            || other.start_time != self.start_time
        {
            return Err(domain("count records are on different time grids"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// `time,counts`, one row per bin, `time` at the bin start.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["time", "counts"]);
        for (i, c) in self.counts.iter().enumerate() {
            t.push_row(vec![format_f64(self.bin_start(i)), c.to_string()]);
        }
        t
    }
}

/// Expected counts per bin for a piecewise-linear photon-number trace.
///
/// Bins start at `times[0]`; a trailing partial bin is dropped.
pub fn expected_counts(
    times: &[f64],
    nbar: &[f64],
    kappa: f64,
    settings: &CountSettings,
) -> Result<Vec<f64>> {
    settings.validate()?;
    if times.len() != nbar.len() || times.len() < 2 {
        return Err(domain("need matching time and photon-number series of length >= 2"));
    }
    if !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(domain("times must increase strictly"));
    }
    if nbar.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
        return Err(domain("photon numbers must be finite and non-negative"));
    }
    // Cumulative integral of nbar at each sample.
    let mut cumulative = Vec::with_capacity(times.len());
    cumulative.push(0.0);
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        cumulative.push(cumulative[i - 1] + 0.5 * h * (nbar[i] + nbar[i - 1]));
    }
    let integral_to = |t: f64| -> f64 {
        let i = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1) - 1;
        let h = times[i + 1] - times[i];
        let s = ((t - times[i]) / h).clamp(0.0, 1.0);
        cumulative[i] + h * s * (nbar[i] + 0.5 * (nbar[i + 1] - nbar[i]) * s)
    };
    let span = times[times.len() - 1] - times[0];
    let bins = (span / settings.bin_width * (1.0 + 1e-12)).floor() as usize;
    let scale = detected_rate(1.0, kappa, settings.efficiency);
    let dark = settings.dark_rate * settings.bin_width;
    Ok((0..bins)
        .map(|b| {
            let a = times[0] + b as f64 * settings.bin_width;
            let z = (a + settings.bin_width).min(times[times.len() - 1]);
            scale * (integral_to(z) - integral_to(a)) + dark
        })
        .collect())
}

/// Poisson draws with the given means.
pub fn poisson_counts(means: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    means
        .iter()
        .map(|&mean| {
            if mean == 0.0 {
                Ok(0)
            } else {
                let d = Poisson::new(mean).map_err(|e| Error::Numeric(e.to_string()))?;
                Ok(d.sample(rng) as u64)
            }
        })
        .collect()
}

/// Simulated photon counts for a photon-number trace, reproducible from `seed`.
pub fn count_monte_carlo(
    times: &[f64],
    nbar: &[f64],
    kappa: f64,
    settings: &CountSettings,
    seed: u64,
) -> Result<CountRecord> {
    let means = expected_counts(times, nbar, kappa, settings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(CountRecord {
        bin_width: settings.bin_width,
        start_time: times[0],
        counts: poisson_counts(&means, &mut rng)?,
        seed,
    })
}
