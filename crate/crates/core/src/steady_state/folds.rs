use super::ResponseProfile;

/// A point where two steady-state branches merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPoint {
    /// Reduced detuning `(delta_pc - delta_n) / kappa` of the fold.
    pub delta0: f64,
    /// Photon fraction of the merging pair.
    pub u: f64,
    /// Reduced detuning from the shifted resonance, `delta0 + beta u`.
    pub x: f64,
}

/// Location and value of the steepest rising flank, `max V'(x)` over `x < 0`.
fn steepest_flank(profile: &ResponseProfile) -> (f64, f64) {
    // V'' < 0 at the peak and turns positive past the inflection point.
    let step = 0.01;
    let mut hi = 0.0;
    let mut lo = -step;
    while profile.reduced_curvature(lo) < 0.0 {
        hi = lo;
        lo -= step;
        if lo < -1e4 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.reduced_curvature(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, profile.reduced_slope(x))
}

/// Solves `V'(x) = target` on a bracket where `V' - target` changes sign.
fn solve_slope(profile: &ResponseProfile, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_above = profile.reduced_slope(lo) > target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (profile.reduced_slope(mid) > target) == lo_above {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Fold points of the steady-state response at nonlinearity `beta`.
///
/// Two branches merge where `beta V'(x) = 1` with `x = delta0 + beta u` and
/// `u = V(x)`. For `beta > 0` both folds sit on the rising flank `x < 0`, one on
/// each side of the steepest point; `beta < 0` mirrors them. The result is empty
/// when `|beta| max V' <= 1`, i.e. below the bistability threshold, and is
/// sorted by `delta0`. Folds with `|delta0| > |beta| + 10` are dropped.
pub fn fold_points(profile: &ResponseProfile, beta: f64) -> Vec<super::FoldPoint> {
    if beta == 0.0 || !beta.is_finite() {
        return Vec::new();
    }
    let strength = beta.abs();
    let (x_peak, max_slope) = steepest_flank(profile);
    if strength * max_slope <= 1.0 {
        return Vec::new();
    }
    let target = 1.0 / strength;
    let mut far = x_peak - 1.0;
    while profile.reduced_slope(far) > target {
        far = x_peak + 2.0 * (far - x_peak);
    }
    let outer = solve_slope(profile, target, far, x_peak);
    let inner = solve_slope(profile, target, x_peak, 0.0);

    let mirror = beta.signum();
    let window = strength + 10.0;
    let mut folds: Vec<FoldPoint> = [outer, inner]
        .into_iter()
        .map(|x_neg| {
            let x = mirror * x_neg;
            let u = profile.reduced(x);
            FoldPoint {
                delta0: x - beta * u,
                u,
                x,
            }
        })
        .filter(|f| f.delta0.abs() <= window)
        .collect();
    folds.sort_by(|a, b| a.delta0.total_cmp(&b.delta0));
    folds
}

/// Smallest `|beta|` at which the response becomes bistable.
///
/// Bisection on `beta` with the existence of fold points as the predicate.
/// For the Lorentzian the result is `8 sqrt(3) / 9`.
pub fn bistability_threshold(profile: &ResponseProfile) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while fold_points(profile, hi).is_empty() {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if fold_points(profile, mid).is_empty() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Point where the two folds meet at `beta = threshold > 0`: the steepest
/// rising flank of the response.
pub fn cusp_point(profile: &ResponseProfile) -> FoldPoint {
    let (x, slope) = steepest_flank(profile);
    let u = profile.reduced(x);
    FoldPoint {
        delta0: x - u / slope,
        u,
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_cusp() {
        // V = 1/(1+x^2) is steepest at x = -1/sqrt(3), u = 3/4; threshold 8 sqrt(3)/9.
        let c = cusp_point(&ResponseProfile::lorentzian(1.0).unwrap());
        let x = -1.0 / 3f64.sqrt();
        assert!((c.x - x).abs() < 1e-9);
        assert!((c.u - 0.75).abs() < 1e-12);
        assert!((c.delta0 - (x - 0.75 * 8.0 * 3f64.sqrt() / 9.0)).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_fold_at_known_factorization() {
        let p = ResponseProfile::lorentzian(1.0).unwrap();
        let folds = fold_points(&p, 2.0);
        assert_eq!(folds.len(), 2);
        // (u - 1)(2u - 1)^2 at delta0 = -2: the lower and middle branches merge
        // at u = 1/2, x = -1. The partner fold (upper and middle merging) lies
        // at slightly more negative delta0.
        let f = folds[1];
        assert!((f.delta0 + 2.0).abs() < 1e-10, "{f:?}");
        assert!((f.u - 0.5).abs() < 1e-10);
        assert!((f.x + 1.0).abs() < 1e-10);
        assert!((folds[0].delta0 + 2.1349).abs() < 1e-4, "{:?}", folds[0]);
        assert!(folds[0].u > 0.9);
    }

    #[test]
    fn below_threshold_is_empty() {
        let p = ResponseProfile::lorentzian(1.0).unwrap();
        assert!(fold_points(&p, 1.0).is_empty());
        assert!(fold_points(&p, 0.0).is_empty());
    }

    #[test]
    fn lorentzian_threshold() {
        let p = ResponseProfile::lorentzian(1.0).unwrap();
        let t = bistability_threshold(&p);
        assert!((t - 8.0 * 3f64.sqrt() / 9.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn folds_merge_at_threshold() {
        let p = ResponseProfile::lorentzian(1.0).unwrap();
        let t = 8.0 * 3f64.sqrt() / 9.0;
        let mut last = f64::INFINITY;
        for excess in [1e-1, 1e-2, 1e-3, 1e-4] {
            let f = fold_points(&p, t * (1.0 + excess));
            assert_eq!(f.len(), 2);
            let gap = f[1].delta0 - f[0].delta0;
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn negative_beta_mirrors() {
        let p = ResponseProfile::voigt(1.0, 1.5).unwrap();
        let pos = fold_points(&p, 6.0);
        let neg = fold_points(&p, -6.0);
        assert_eq!(pos.len(), 2);
        assert_eq!(neg.len(), 2);
        assert!((pos[0].delta0 + neg[1].delta0).abs() < 1e-10);
        assert!((pos[1].u - neg[0].u).abs() < 1e-12);
    }
}
