use std::f64::consts::TAU;

use super::{SteadyRoot, SteadyStateSolution};

/// `u (1 + (delta0 + beta u)^2) - 1`, the Lorentzian steady-state residual.
fn residual(delta0: f64, beta: f64, u: f64) -> f64 {
    let x = delta0 + beta * u;
    u * (1.0 + x * x) - 1.0
}

fn residual_slope(delta0: f64, beta: f64, u: f64) -> f64 {
    3.0 * beta * beta * u * u + 4.0 * delta0 * beta * u + 1.0 + delta0 * delta0
}

/// Real roots of `u^3 + b u^2 + c u + d` by the trigonometric / Cardano forms.
fn monic_cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    if disc > 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - TAU * k as f64 / 3.0).cos() - shift)
            .collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - shift]
    }
}

/// Newton iteration kept inside `[lo, hi]`, falling back to bisection.
fn polish(delta0: f64, beta: f64, guess: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = residual(delta0, beta, lo);
    let rising = f_lo < 0.0;
    let mut u = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let f = residual(delta0, beta, u);
        if f == 0.0 {
            return u;
        }
        if (f < 0.0) == rising {
            lo = u;
        } else {
            hi = u;
        }
        let df = residual_slope(delta0, beta, u);
        let mut next = u - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-16 * u.abs().max(1e-300) || hi - lo <= 1e-16 {
            return next;
        }
        u = next;
    }
    u
}

/// All steady states for the Lorentzian cavity.
///
/// The critical points of the cubic are found in closed form; their residuals
/// classify the solution as one root, three roots, or a fold (double root).
/// Each root is then polished inside its bracket, seeded by the closed-form
/// cubic root.
pub fn steady_state_roots_lorentzian(delta0: f64, beta: f64) -> SteadyStateSolution {
    let single = |u: f64| SteadyRoot {
        u,
        stable: residual_slope(delta0, beta, u) > 0.0,
        multiplicity: 1,
    };
    let finish = |roots: Vec<SteadyRoot>| SteadyStateSolution {
        roots,
        delta0,
        beta,
    };

    if beta == 0.0 {
        return finish(vec![single(1.0 / (1.0 + delta0 * delta0))]);
    }

    let a = beta * beta;
    let guesses = monic_cubic_real_roots(
        2.0 * delta0 * beta / a,
        (1.0 + delta0 * delta0) / a,
        -1.0 / a,
    );
    let seeded = |lo: f64, hi: f64| {
        let guess = guesses
            .iter()
            .copied()
            .find(|g| *g > lo && *g < hi)
            .unwrap_or(0.5 * (lo + hi));
        single(polish(delta0, beta, guess, lo, hi))
    };
    let double = |u: f64| SteadyRoot {
        u,
        stable: false,
        multiplicity: 2,
    };

    // G'(u) = 3 b^2 u^2 + 4 d b u + 1 + d^2 has real zeros only for d^2 > 3.
    // G < 0 for u <= 0 and G(1) >= 0, so every real root lies in (0, 1] and
    // G is monotone between consecutive breakpoints.
    let mut breaks = vec![(0.0, residual(delta0, beta, 0.0), false)];
    let excess = delta0 * delta0 - 3.0;
    if excess > 0.0 {
        let scale = 2.0 + a + 2.0 * (delta0 * beta).abs() + delta0 * delta0;
        let tol = 1e-13 * scale;
        let disc = 2.0 * beta.abs() * excess.sqrt();
        for c in [
            (-4.0 * delta0 * beta - disc) / (6.0 * a),
            (-4.0 * delta0 * beta + disc) / (6.0 * a),
        ] {
            if c > 0.0 && c < 1.0 {
                let g = residual(delta0, beta, c);
                if g.abs() <= tol {
                    breaks.push((c, 0.0, true));
                } else {
                    breaks.push((c, g, false));
                }
            }
        }
    }
    breaks.push((1.0, residual(delta0, beta, 1.0), false));

    let mut roots = Vec::with_capacity(3);
    for (i, &(u, g, is_fold)) in breaks.iter().enumerate() {
        if is_fold {
            roots.push(double(u));
        } else if g == 0.0 && u > 0.0 {
            roots.push(single(u));
        }
        if let Some(&(next_u, next_g, _)) = breaks.get(i + 1) {
            if g * next_g < 0.0 {
                roots.push(seeded(u, next_u));
            }
        }
    }
    roots.sort_by(|a, b| a.u.total_cmp(&b.u));
    finish(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_cavity_on_resonance() {
        let s = steady_state_roots_lorentzian(0.0, 0.0);
        assert_eq!(s.roots.len(), 1);
        assert_eq!(s.roots[0].u, 1.0);
        assert!(s.roots[0].stable);
    }

    #[test]
    fn exact_fold_factorization() {
        // 4u^3 - 8u^2 + 5u - 1 = (u - 1)(2u - 1)^2
        let s = steady_state_roots_lorentzian(-2.0, 2.0);
        assert_eq!(s.roots.len(), 2);
        assert!((s.roots[0].u - 0.5).abs() < 1e-12);
        assert_eq!(s.roots[0].multiplicity, 2);
        assert!(!s.roots[0].stable);
        assert!((s.roots[1].u - 1.0).abs() < 1e-12);
        assert!(s.roots[1].stable);
        assert_eq!(s.count_with_multiplicity(), 3);
    }

    #[test]
    fn single_root_below_fold() {
        let s = steady_state_roots_lorentzian(-1.0, 2.0);
        assert_eq!(s.roots.len(), 1);
        let u = s.roots[0].u;
        // Bracketed bisection on the residual.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(-1.0, 2.0, mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((u - lo).abs() < 1e-12);
        assert!((u - 0.772).abs() < 1e-3, "{u}");
    }

    #[test]
    fn triple_has_unstable_middle() {
        let s = steady_state_roots_lorentzian(-4.0, 6.0);
        assert_eq!(s.roots.len(), 3);
        let st: Vec<bool> = s.roots.iter().map(|r| r.stable).collect();
        assert_eq!(st, vec![true, false, true]);
        for r in &s.roots {
            assert!(residual(-4.0, 6.0, r.u).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_beta_is_linear() {
        let s = steady_state_roots_lorentzian(1.5, 1e-9);
        assert_eq!(s.roots.len(), 1);
        assert!((s.roots[0].u - 1.0 / (1.0 + 2.25)).abs() < 1e-8);
    }
}
