use super::{ResponseProfile, SteadyRoot, SteadyStateSolution};

/// Number of grid cells used to bracket roots in `u`.
const GRID_CELLS: usize = 2048;
/// An extremum of the residual closer to zero than this is reported as a fold.
const FOLD_TOL: f64 = 1e-11;

struct Residual<'a> {
    profile: &'a ResponseProfile,
    delta0: f64,
    beta: f64,
}

impl Residual<'_> {
    /// `(F, F')` with `F(u) = u - V(delta0 + beta u)`.
    fn eval(&self, u: f64) -> (f64, f64) {
        let (v, dv) = self.profile.reduced_with_slope(self.delta0 + self.beta * u);
        (u - v, 1.0 - self.beta * dv)
    }

    fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }

    fn slope(&self, u: f64) -> f64 {
        self.eval(u).1
    }

    /// Zero of `F` in `[lo, hi]` given a sign change; bisection with
    /// regula-falsi steps.
    fn bracketed_zero(&self, mut lo: f64, mut hi: f64, mut f_lo: f64, mut f_hi: f64) -> f64 {
        for _ in 0..200 {
            let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if !(mid > lo && mid < hi) {
                mid = 0.5 * (lo + hi);
            }
            let f_mid = self.value(mid);
            if f_mid.abs() <= 1e-14 || hi - lo <= 1e-15 {
                return mid;
            }
            if (f_mid < 0.0) == (f_lo < 0.0) {
                // Halve the retained side too, so regula falsi cannot stall.
                lo = mid;
                f_lo = f_mid;
                let half = 0.5 * (lo + hi);
                let f_half = self.value(half);
                if (f_half < 0.0) == (f_lo < 0.0) {
                    lo = half;
                    f_lo = f_half;
                } else {
                    hi = half;
                    f_hi = f_half;
                }
            } else {
                hi = mid;
                f_hi = f_mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Extremum of `F` in a cell where `F'` changes sign.
    fn extremum(&self, mut lo: f64, mut hi: f64) -> f64 {
        let s_lo = self.slope(lo) < 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (self.slope(mid) < 0.0) == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// All steady states for an arbitrary cavity response.
///
/// `F(u) = u - V(delta0 + beta u)` is sampled on a uniform grid over `[0, 1]`.
/// Sign changes are refined to a residual below 1e-10; cells where `F'` changes
/// sign are split at the extremum of `F`, which catches root pairs closer than
/// one cell and reports tangencies as folds.
pub fn steady_state_roots_profile(
    profile: &ResponseProfile,
    delta0: f64,
    beta: f64,
) -> SteadyStateSolution {
    let f = Residual {
        profile,
        delta0,
        beta,
    };
    let single = |u: f64| SteadyRoot {
        u,
        stable: f.slope(u) > 0.0,
        multiplicity: 1,
    };
    let at_node = |u: f64, slope: f64| {
        if slope.abs() <= 1e-8 {
            SteadyRoot {
                u,
                stable: false,
                multiplicity: 2,
            }
        } else {
            single(u)
        }
    };
    let mut roots: Vec<SteadyRoot> = Vec::with_capacity(3);

    let nodes: Vec<(f64, f64, f64)> = (0..=GRID_CELLS)
        .map(|i| {
            let u = i as f64 / GRID_CELLS as f64;
            let (v, d) = f.eval(u);
            (u, v, d)
        })
        .collect();

    for (i, win) in nodes.windows(2).enumerate() {
        let (u0, f0, d0) = win[0];
        let (u1, f1, d1) = win[1];
        if f0 == 0.0 && i > 0 {
            roots.push(at_node(u0, d0));
        }
        // Monotone pieces of the cell.
        let mut pieces = vec![(u0, f0)];
        if (d0 < 0.0) != (d1 < 0.0) {
            let ue = f.extremum(u0, u1);
            let fe = f.value(ue);
            if fe.abs() <= FOLD_TOL && f0 != 0.0 && f1 != 0.0 {
                roots.push(SteadyRoot {
                    u: ue,
                    stable: false,
                    multiplicity: 2,
                });
                pieces.push((ue, 0.0));
            } else {
                pieces.push((ue, fe));
            }
        }
        pieces.push((u1, f1));
        for p in pieces.windows(2) {
            let ((a, fa), (b, fb)) = (p[0], p[1]);
            if fa * fb < 0.0 {
                roots.push(single(f.bracketed_zero(a, b, fa, fb)));
            }
        }
    }
    if let Some(&(u, f_end, d_end)) = nodes.last() {
        if f_end == 0.0 {
            roots.push(at_node(u, d_end));
        }
    }
    roots.sort_by(|a, b| a.u.total_cmp(&b.u));
    let roots = merge_coincident(roots);
    SteadyStateSolution {
        roots,
        delta0,
        beta,
    }
}

/// Roots closer than `MERGE_GAP` are one fold.
const MERGE_GAP: f64 = 1e-7;

fn merge_coincident(sorted: Vec<SteadyRoot>) -> Vec<SteadyRoot> {
    let mut out: Vec<SteadyRoot> = Vec::with_capacity(sorted.len());
    for r in sorted {
        match out.last_mut() {
            Some(last) if r.u - last.u < MERGE_GAP => {
                last.u = 0.5 * (last.u + r.u);
                last.stable = false;
                last.multiplicity = 2;
            }
            _ => out.push(r),
        }
    }
    out
}
