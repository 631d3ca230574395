use super::{steady_states, ResponseProfile};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Increasing detuning.
    Up,
    /// Decreasing detuning.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub delta0: f64,
    pub u: f64,
    /// The tracked branch ended at a fold and the scan fell onto the other one.
    pub jumped: bool,
}

/// Quasi-static lineshape following one branch through the bistable region.
///
/// The grid is traversed in the requested direction. The scan starts on the
/// lowest stable root and at every later point takes the stable root nearest
/// the previous selection. When the tracked branch disappears at a fold the
/// nearest stable root belongs to the other branch and the point is flagged
/// as a jump.
pub fn lineshape_scan(
    profile: &ResponseProfile,
    beta: f64,
    grid: &[f64],
    direction: SweepDirection,
) -> Result<Vec<ScanPoint>> {
    let ascending = grid.windows(2).all(|w| w[0] < w[1]);
    let descending = grid.windows(2).all(|w| w[0] > w[1]);
    if !(ascending || descending) {
        return Err(domain("lineshape grid must be strictly monotone"));
    }
    let mut order: Vec<f64> = grid.to_vec();
    let want_ascending = direction == SweepDirection::Up;
    if ascending != want_ascending {
        order.reverse();
    }

    let mut out = Vec::with_capacity(order.len());
    let mut previous: Option<(f64, Vec<f64>)> = None;
    for delta0 in order {
        let sol = steady_states(profile, delta0, beta);
        let mut stable: Vec<f64> = sol.stable_roots().collect();
        if stable.is_empty() {
            // Only a fold remains at this exact detuning; stay on it.
            stable = sol.roots.iter().map(|r| r.u).collect();
        }
        let (u, jumped) = match &previous {
            None => (stable[0], false),
            Some((tracked, prev_stable)) => {
                let u = *stable
                    .iter()
                    .min_by(|a, b| (*a - tracked).abs().total_cmp(&(*b - tracked).abs()))
                    .expect("non-empty");
                let jumped = prev_stable
                    .iter()
                    .filter(|o| *o != tracked)
                    .any(|o| (u - o).abs() < (u - tracked).abs());
                (u, jumped)
            }
        };
        out.push(ScanPoint { delta0, u, jumped });
        previous = Some((u, stable));
    }
    Ok(out)
}

/// Area enclosed between two scans over the same grid, `integral |u_a - u_b| d delta0`.
pub fn hysteresis_area(a: &[ScanPoint], b: &[ScanPoint]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(domain("scans must cover the same grid"));
    }
    let mut a: Vec<&ScanPoint> = a.iter().collect();
    let mut b: Vec<&ScanPoint> = b.iter().collect();
    a.sort_by(|p, q| p.delta0.total_cmp(&q.delta0));
    b.sort_by(|p, q| p.delta0.total_cmp(&q.delta0));
    let mut area = 0.0;
    for i in 1..a.len() {
        if a[i].delta0 != b[i].delta0 || a[i - 1].delta0 != b[i - 1].delta0 {
            return Err(domain("scans must cover the same grid"));
        }
        let h = a[i].delta0 - a[i - 1].delta0;
        let d0 = (a[i - 1].u - b[i - 1].u).abs();
        let d1 = (a[i].u - b[i].u).abs();
        area += 0.5 * h * (d0 + d1);
    }
    Ok(area)
}
