//! Adiabaticity penalty `J_ad = Σ_i ∫₀¹ |ẋ_i(s)| ds` and its gradient.
//!
//! Each channel is split at the sign changes of `ẋ_i`; on every piece the
//! integrand has constant sign, so the piece contributes `|x_i(b) − x_i(a)|`
//! exactly and its weight gradient is `sign · (b^j − a^j)`.

use super::ControlSchedule;

/// Bracketing grid for locating roots of `ẋ`.
pub const DEFAULT_BRACKET_POINTS: usize = 256;

/// `J_ad` with roots of `ẋ` bracketed on `quad_points` uniform cells.
pub fn j_ad(schedule: &ControlSchedule, quad_points: usize) -> f64 {
    (0..schedule.channels())
        .map(|c| {
            let pieces = monotone_pieces(schedule, c, quad_points);
            pieces
                .windows(2)
                .map(|w| (schedule.value(c, w[1]) - schedule.value(c, w[0])).abs())
                .sum::<f64>()
        })
        .sum()
}

/// `∂J_ad/∂α_ij` for every raw weight, row-major like
/// [`ControlSchedule::weights`]. Flat pieces contribute the zero subgradient.
pub fn grad_j_ad_weights(schedule: &ControlSchedule, quad_points: usize) -> Vec<f64> {
    let b = schedule.basis_size();
    let mut grad = vec![0.0; schedule.channels() * b];
    for c in 0..schedule.channels() {
        let pieces = monotone_pieces(schedule, c, quad_points);
        for w in pieces.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let rise = schedule.value(c, hi) - schedule.value(c, lo);
            let sign = if rise > 0.0 {
                1.0
            } else if rise < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign == 0.0 {
                continue;
            }
            let (mut plo, mut phi) = (1.0, 1.0);
            for j in 0..b {
                grad[c * b + j] += sign * (phi - plo);
                plo *= lo;
                phi *= hi;
            }
        }
    }
    grad
}

/// Gradient of `J_ad` with respect to the free parameters of `schedule`.
///
/// The endpoint-absorbing coefficient of a channel depends on each free slot
/// of that channel with slope `−1`, which the chain rule folds in here.
pub fn grad_j_ad(schedule: &ControlSchedule) -> Vec<f64> {
    let b = schedule.basis_size();
    let raw = grad_j_ad_weights(schedule, DEFAULT_BRACKET_POINTS);
    schedule
        .free_slots()
        .into_iter()
        .map(|(c, j)| {
            let direct = raw[c * b + j];
            match schedule.end_absorbing_slot(c) {
                Some(absorb) => direct - raw[c * b + absorb],
                None => direct,
            }
        })
        .collect()
}

/// Breakpoints `0 = s_0 < … < s_m = 1` between which `ẋ_c` keeps its sign.
fn monotone_pieces(schedule: &ControlSchedule, channel: usize, cells: usize) -> Vec<f64> {
    let cells = cells.max(1);
    let mut points = vec![0.0];
    let mut prev_s = 0.0;
    let mut prev_d = schedule.derivative(channel, 0.0);
    for i in 1..=cells {
        let s = i as f64 / cells as f64;
        let d = schedule.derivative(channel, s);
        if prev_d * d < 0.0 {
            points.push(bisect(
                |x| schedule.derivative(channel, x),
                prev_s,
                s,
                prev_d,
            ));
        }
        if d != 0.0 {
            prev_d = d;
            prev_s = s;
        }
    }
    points.push(1.0);
    points
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo.signum();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
