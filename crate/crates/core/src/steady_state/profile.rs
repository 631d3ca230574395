use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::faddeeva::{faddeeva, faddeeva_derivative, faddeeva_second_derivative};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Lorentzian,
    Voigt,
}

/// Normalized cavity frequency response with unit peak at zero detuning.
///
/// The Voigt variant is the Lorentzian of half-width `kappa` convolved with a
/// Gaussian of rms `sigma`, rescaled so that its own peak is 1. It is
/// evaluated through `Re w(z)` with `z = (delta + i kappa) / (sigma sqrt 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseProfile {
    kind: ProfileKind,
    kappa: f64,
    sigma: f64,
    /// `kappa / (sigma sqrt 2)`: dz/dx for the reduced detuning x = delta / kappa.
    z_scale: f64,
    peak: f64,
}

impl ResponseProfile {
    pub fn lorentzian(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain("profile kappa must be positive"));
        }
        Ok(Self {
            kind: ProfileKind::Lorentzian,
            kappa,
            sigma: 0.0,
            z_scale: f64::INFINITY,
            peak: 1.0,
        })
    }

    pub fn voigt(kappa: f64, sigma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain("profile kappa must be positive"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("Voigt sigma must be positive"));
        }
        let z_scale = kappa / (sigma * SQRT_2);
        let peak = faddeeva(Complex64::new(0.0, z_scale)).re;
        Ok(Self {
            kind: ProfileKind::Voigt,
            kappa,
            sigma,
            z_scale,
            peak,
        })
    }

    /// Voigt when `sigma > 0`, Lorentzian when `sigma == 0`.
    pub fn from_jitter(kappa: f64, sigma: f64) -> Result<Self> {
        if sigma == 0.0 {
            Self::lorentzian(kappa)
        } else {
            Self::voigt(kappa, sigma)
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Response at angular detuning `delta` (rad/s).
    pub fn value(&self, delta: f64) -> f64 {
        self.reduced(delta / self.kappa)
    }

    /// Response at reduced detuning `x = delta / kappa`.
    pub fn reduced(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Lorentzian => 1.0 / (1.0 + x * x),
            ProfileKind::Voigt => faddeeva(self.z(x)).re / self.peak,
        }
    }

    /// dV/dx at reduced detuning `x`.
    pub fn reduced_slope(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Lorentzian => {
                let d = 1.0 + x * x;
                -2.0 * x / (d * d)
            }
            ProfileKind::Voigt => {
                let z = self.z(x);
                let w = faddeeva(z);
                self.z_scale * faddeeva_derivative(z, w).re / self.peak
            }
        }
    }

    /// `(V(x), V'(x))` with a single complex error function evaluation.
    pub fn reduced_with_slope(&self, x: f64) -> (f64, f64) {
        match self.kind {
            ProfileKind::Lorentzian => (self.reduced(x), self.reduced_slope(x)),
            ProfileKind::Voigt => {
                let z = self.z(x);
                let w = faddeeva(z);
                (
                    w.re / self.peak,
                    self.z_scale * faddeeva_derivative(z, w).re / self.peak,
                )
            }
        }
    }

    /// d^2V/dx^2 at reduced detuning `x`.
    pub fn reduced_curvature(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Lorentzian => {
                let d = 1.0 + x * x;
                (6.0 * x * x - 2.0) / (d * d * d)
            }
            ProfileKind::Voigt => {
                let z = self.z(x);
                let w = faddeeva(z);
                let dw = faddeeva_derivative(z, w);
                self.z_scale * self.z_scale * faddeeva_second_derivative(z, w, dw).re / self.peak
            }
        }
    }

    fn z(&self, x: f64) -> Complex64 {
        Complex64::new(x * self.z_scale, self.z_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    /// Direct trapezoidal convolution of the Lorentzian with the Gaussian.
    /// Independent of the Faddeeva route.
    fn voigt_by_quadrature(kappa: f64, sigma: f64, delta: f64) -> f64 {
        let conv = |d: f64| {
            let h = kappa.min(sigma) / 40.0;
            let half = (14.0 * sigma / h).ceil() as i64;
            let mut acc = 0.0;
            for i in -half..=half {
                let s = i as f64 * h;
                let g = (-s * s / (2.0 * sigma * sigma)).exp();
                let l = 1.0 / (1.0 + ((d - s) / kappa).powi(2));
                acc += g * l;
            }
            acc
        };
        conv(delta) / conv(0.0)
    }

    #[test]
    fn lorentzian_values() {
        let p = ResponseProfile::lorentzian(2.0).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(2.0), 0.5);
        assert_eq!(p.value(-2.0), 0.5);
    }

    #[test]
    fn voigt_agrees_with_quadrature() {
        let kappa = TAU * 0.66e6;
        let sigma = TAU * 1.1e6;
        let p = ResponseProfile::voigt(kappa, sigma).unwrap();
        for delta in [TAU * 1.1e6, 0.3 * kappa, -2.7 * kappa, 8.0 * kappa, 49.0 * kappa] {
            let a = p.value(delta);
            let b = voigt_by_quadrature(kappa, sigma, delta);
            assert!(((a - b) / b).abs() < 1e-8, "delta/kappa = {}: {a} vs {b}", delta / kappa);
        }
        assert!((p.value(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn voigt_derivatives_match_finite_differences() {
        let p = ResponseProfile::voigt(1.0, 1.1 / 0.66).unwrap();
        let h = 1e-5;
        for x in [-3.0, -1.2, -0.1, 0.4, 2.5] {
            let fd = (p.reduced(x + h) - p.reduced(x - h)) / (2.0 * h);
            assert!((fd - p.reduced_slope(x)).abs() < 1e-9);
            let fd2 = (p.reduced_slope(x + h) - p.reduced_slope(x - h)) / (2.0 * h);
            assert!((fd2 - p.reduced_curvature(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn narrow_gaussian_approaches_lorentzian() {
        let l = ResponseProfile::lorentzian(1.0).unwrap();
        let v = ResponseProfile::voigt(1.0, 1e-4).unwrap();
        for x in [-5.0, -1.0, 0.3, 2.0] {
            assert!((l.reduced(x) - v.reduced(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(ResponseProfile::lorentzian(0.0).is_err());
        assert!(ResponseProfile::voigt(1.0, 0.0).is_err());
        assert!(ResponseProfile::voigt(-1.0, 1.0).is_err());
        assert_eq!(
            ResponseProfile::from_jitter(1.0, 0.0).unwrap().kind(),
            ProfileKind::Lorentzian
        );
    }
}
