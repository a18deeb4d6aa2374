use super::{Controls, ScheduleError, TabulatedSchedule};

/// Monotone time reparametrization `s(τ)` that moves slowly where the gap is
/// small: `dτ/ds ∝ 1/Δ(s)²`.
#[derive(Debug, Clone)]
pub struct Reparametrization {
    /// Knots `(τ_i, s_i)` as a one-channel table.
    map: TabulatedSchedule,
    /// Unnormalized `∫₀¹ ds / Δ(s)²`.
    total: f64,
}

impl Reparametrization {
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn table(&self) -> &TabulatedSchedule {
        &self.map
    }

    pub fn s_at(&self, tau: f64) -> f64 {
        let mut out = [0.0];
        self.map.values_into(tau, &mut out);
        out[0]
    }

    /// Composes a base path `x(s)` with this map, giving `x(s(τ))`.
    pub fn compose<C: Controls>(self, base: C) -> Reparametrized<C> {
        Reparametrized { base, map: self }
    }
}

/// A control source evaluated along a reparametrized clock.
#[derive(Debug, Clone)]
pub struct Reparametrized<C> {
    base: C,
    map: Reparametrization,
}

impl<C> Reparametrized<C> {
    pub fn map(&self) -> &Reparametrization {
        &self.map
    }

    pub fn base(&self) -> &C {
        &self.base
    }
}

impl<C: Controls> Controls for Reparametrized<C> {
    fn channel_count(&self) -> usize {
        self.base.channel_count()
    }

    fn values_into(&self, tau: f64, out: &mut [f64]) {
        self.base.values_into(self.map.s_at(tau), out)
    }
}

/// Local-adiabatic reparametrization from gap samples `(s_i, Δ_i)`.
///
/// `τ(s)` is the trapezoid cumulative of `1/Δ²` normalized to `τ(1) = 1`;
/// the returned table holds `s(τ)` on `grid_size` uniform τ knots, found by
/// inverting the piecewise-linear `τ(s)`.
pub fn local_adiabatic_schedule(
    gap: &[(f64, f64)],
    grid_size: usize,
) -> Result<Reparametrization, ScheduleError> {
    if gap.len() < 2 {
        return Err(ScheduleError::Table("need at least two gap samples".into()));
    }
    if gap[0].0 != 0.0 || gap[gap.len() - 1].0 != 1.0 {
        return Err(ScheduleError::Table(
            "gap samples must span s = 0 to s = 1".into(),
        ));
    }
    if let Some(&(s, g)) = gap.iter().find(|&&(_, g)| !(g > 0.0)) {
        return Err(ScheduleError::NonPositiveGap { s, gap: g });
    }
    if gap.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(ScheduleError::Table(
            "gap samples must be strictly increasing in s".into(),
        ));
    }

    let mut cumulative = Vec::with_capacity(gap.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for w in gap.windows(2) {
        let (s0, g0) = w[0];
        let (s1, g1) = w[1];
        acc += 0.5 * (s1 - s0) * (1.0 / (g0 * g0) + 1.0 / (g1 * g1));
        cumulative.push(acc);
    }
    let total = acc;

    let grid_size = grid_size.max(2);
    let mut taus = Vec::with_capacity(grid_size);
    let mut ss = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let tau = k as f64 / (grid_size - 1) as f64;
        let s = if k == 0 {
            0.0
        } else if k == grid_size - 1 {
            1.0
        } else {
            let target = tau * total;
            let hi = cumulative
                .partition_point(|&c| c < target)
                .clamp(1, cumulative.len() - 1);
            let lo = hi - 1;
            let frac = (target - cumulative[lo]) / (cumulative[hi] - cumulative[lo]);
            gap[lo].0 + frac * (gap[hi].0 - gap[lo].0)
        };
        taus.push(tau);
        ss.push(vec![s]);
    }
    Ok(Reparametrization {
        map: TabulatedSchedule::new(taus, ss)?,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: usize, gap: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let s = i as f64 / (points - 1) as f64;
                (s, gap(s))
            })
            .collect()
    }

    #[test]
    fn constant_gap_is_identity() {
        let r = local_adiabatic_schedule(&grid(101, |_| 0.7), 51).unwrap();
        for k in 0..=50 {
            let tau = k as f64 / 50.0;
            assert!((r.s_at(tau) - tau).abs() < 1e-12);
        }
        assert!((r.total() - 1.0 / 0.49).abs() < 1e-12);
    }

    #[test]
    fn grover_two_qubit_total_matches_arctan_form() {
        // Δ²(s) = 1 − 3s + 3s² for N = 4; ∫ ds/Δ² = N/√(N−1) · atan(√(N−1)).
        let r =
            local_adiabatic_schedule(&grid(20001, |s| (1.0 - 3.0 * s + 3.0 * s * s).sqrt()), 101)
                .unwrap();
        let closed = 4.0 / 3f64.sqrt() * 3f64.sqrt().atan();
        assert!((closed - 2.4184).abs() < 1e-4);
        assert!((r.total() - closed).abs() < 1e-8);
    }

    #[test]
    fn symmetric_gap_gives_symmetric_map() {
        let r = local_adiabatic_schedule(&grid(2001, |s| (1.0 - 3.75 * s * (1.0 - s)).sqrt()), 401)
            .unwrap();
        for k in 0..=400 {
            let tau = k as f64 / 400.0;
            assert!((r.s_at(tau) + r.s_at(1.0 - tau) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn strictly_monotone_with_exact_endpoints() {
        let r = local_adiabatic_schedule(&grid(301, |s| 0.1 + (s - 0.3).powi(2)), 257).unwrap();
        let t = r.table();
        assert_eq!(t.rows()[0][0], 0.0);
        assert_eq!(t.rows().last().unwrap()[0], 1.0);
        assert!(t.rows().windows(2).all(|w| w[1][0] > w[0][0]));
    }

    #[test]
    fn rejects_non_positive_gap() {
        let err = local_adiabatic_schedule(&grid(11, |s| s - 0.5), 11).unwrap_err();
        assert!(matches!(err, ScheduleError::NonPositiveGap { .. }));
    }
}
