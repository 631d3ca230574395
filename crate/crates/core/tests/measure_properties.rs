use cavkerr::measure::{
    count_monte_carlo, decay_fit, expected_counts, fourier_amplitude, windowed_fourier_amplitude, CountSettings,
    EnvelopeModel,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};
use std::f64::consts::TAU;

fn sinusoid(n: usize, dt: f64, f: f64, amp: f64, phase: f64) -> Vec<f64> {
    (0..n).map(|i| amp * (TAU * f * i as f64 * dt + phase).cos()).collect()
}

/// Decaying 60 kHz oscillation sampled every 0.5 us over `3 tau`.
fn ringdown(envelope: impl Fn(f64) -> f64, tau: f64, phase: f64) -> (Vec<f64>, f64) {
    let dt = 0.5e-6;
    let n = (3.0 * tau / dt) as usize;
    let x = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            envelope(t) * (TAU * 60e3 * t + phase).cos()
        })
        .collect();
    (x, dt)
}

proptest! {
    #[test]
    fn amplitude_scales_with_the_signal(
        amp in 0.1..10.0f64,
        c in -5.0..5.0f64,
        phase in 0.0..TAU,
        f in 30e3..90e3f64,
    ) {
        let dt = 1e-6;
        let x = sinusoid(400, dt, f, amp, phase);
        let a = fourier_amplitude(&x, dt, f);
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!((fourier_amplitude(&scaled, dt, f) - c.abs() * a).abs() <= 1e-12 * amp.max(1.0));
        // In-phase signals add.
        let y = sinusoid(400, dt, f, 2.0 * amp, phase);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let b = fourier_amplitude(&y, dt, f);
        prop_assert!((fourier_amplitude(&sum, dt, f) - (a + b)).abs() <= 1e-9 * amp);
    }

    #[test]
    fn constant_offsets_do_not_leak(amp in 0.0..10.0f64, offset in -1e3..1e3f64, f in 30e3..90e3f64) {
        let dt = 1e-6;
        let x = sinusoid(2000, dt, f, amp, 0.3);
        let shifted: Vec<f64> = x.iter().map(|v| v + offset).collect();
        let a = windowed_fourier_amplitude(&x, dt, 0.0, f, 200e-6).unwrap();
        let b = windowed_fourier_amplitude(&shifted, dt, 0.0, f, 200e-6).unwrap();
        for (p, q) in a.amplitudes.iter().zip(&b.amplitudes) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + offset.abs()));
        }
    }

    #[test]
    fn counts_are_reproducible_from_the_seed(seed in any::<u64>(), level in 0.0..5.0f64) {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 1e-6).collect();
        let nbar: Vec<f64> = times.iter().map(|t| level * (1.0 + (1e5 * t).sin())).collect();
        let s = CountSettings::default();
        let a = count_monte_carlo(&times, &nbar, 4.1e6, &s, seed).unwrap();
        let b = count_monte_carlo(&times, &nbar, 4.1e6, &s, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn fitted_decay_times_recover_synthetic_envelopes(
        amp in 0.1..10.0f64,
        tau in 0.6e-3..2e-3f64,
        phase in 0.0..TAU,
    ) {
        let window = tau / 4.0;
        let (x, dt) = ringdown(|t| amp * (-t / tau).exp(), tau, phase);
        let d = windowed_fourier_amplitude(&x, dt, 0.0, 60e3, window).unwrap();
        let fit = decay_fit(&d, EnvelopeModel::Exponential).unwrap();
        prop_assert!((fit.exponential_time / tau - 1.0).abs() < 0.02, "{} vs {tau}", fit.exponential_time);

        let (x, dt) = ringdown(|t| amp * (-(t / tau).powi(2)).exp(), tau, phase);
        let d = windowed_fourier_amplitude(&x, dt, 0.0, 60e3, window).unwrap();
        let fit = decay_fit(&d, EnvelopeModel::Gaussian).unwrap();
        let crossing = fit.crossing.expect("a Gaussian over three 1/e times crosses 1/e");
        prop_assert!((crossing / tau - 1.0).abs() < 0.02, "{crossing} vs {tau}");
    }
}

/// Chi-square statistic of `counts` against a Poisson law, pooling tail
/// cells until each expects at least five events. Returns the statistic and
/// the degrees of freedom.
fn poisson_chi_square(counts: &[u64], mean: f64) -> (f64, f64) {
    let law = Poisson::new(mean).unwrap();
    let n = counts.len() as f64;
    let kmax = *counts.iter().max().unwrap();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..=kmax {
        obs += counts.iter().filter(|&&c| c == k).count() as f64;
        exp += n * law.pmf(k);
        if exp >= 5.0 {
            cells.push((obs, exp));
            (obs, exp) = (0.0, 0.0);
        }
    }
    // The remaining tail, including everything above kmax.
    let tail_exp = n - cells.iter().map(|c| c.1).sum::<f64>();
    let last = cells.last_mut().unwrap();
    if tail_exp < 5.0 {
        last.0 += obs;
        last.1 += tail_exp;
    } else {
        cells.push((obs, tail_exp));
    }
    let stat = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, (cells.len() - 1) as f64)
}

#[test]
fn counts_follow_poisson_statistics() {
    let times: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-6).collect();
    let nbar = vec![2.0; times.len()];
    let s = CountSettings::default();
    let kappa = TAU * 0.66e6;
    let mean = expected_counts(&times, &nbar, kappa, &s).unwrap()[0];
    for seed in [1, 2, 3] {
        let r = count_monte_carlo(&times, &nbar, kappa, &s, seed).unwrap();
        assert_eq!(r.counts.len(), 10_000);
        let (stat, dof) = poisson_chi_square(&r.counts, mean);
        let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
        assert!(stat < critical, "seed {seed}: chi2 {stat} with {dof} dof exceeds {critical}");
    }
}

#[test]
fn shot_noise_floor_scales_with_counts() {
    // White Poisson noise of mean mu per bin over N bins has a Rayleigh
    // distributed amplitude with mean sqrt(pi mu / N).
    let times: Vec<f64> = (0..=500).map(|i| i as f64 * 1e-6).collect();
    let kappa = TAU * 0.66e6;
    let s = CountSettings::default();
    for level in [0.5, 8.0] {
        let nbar = vec![level; times.len()];
        let mu = expected_counts(&times, &nbar, kappa, &s).unwrap()[0];
        let mean_amp = (0..200u64)
            .map(|seed| {
                let r = count_monte_carlo(&times, &nbar, kappa, &s, seed).unwrap();
                let x: Vec<f64> = r.counts.iter().map(|&c| c as f64).collect();
                fourier_amplitude(&x, 1e-6, 60e3)
            })
            .sum::<f64>()
            / 200.0;
        let want = (std::f64::consts::PI * mu / 500.0).sqrt();
        // The sample mean of 200 Rayleigh draws has a 3.7% standard error.
        assert!((mean_amp / want - 1.0).abs() < 0.12, "level {level}: {mean_amp} vs {want}");
    }
}
