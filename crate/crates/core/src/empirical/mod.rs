//! Revenue curves estimated from i.i.d. samples.
//!
//! With samples sorted as `v_1 >= … >= v_m`, the `j`-th largest is assigned
//! quantile `t_j = (2j - 1) / (2m)`. The largest `⌊ξm⌋ - 1` samples are
//! discarded; the rest, together with the anchors `(0, 0)` and `(1, 0)`,
//! define a piecewise-linear revenue curve `R̄` and its concave envelope.

mod hull;

use serde::{Deserialize, Serialize};

pub use hull::ConcaveHull;

use crate::dist::ValuationDistribution;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Sample count `m` and the accuracy, discard and failure parameters `γ`, `ξ`, `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub m: usize,
    pub gamma: f64,
    pub xi: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// `γξm >= 4`, `(1+γ)^2 <= 3/2` and `m` above the accuracy lemma's bound.
    pub lemma_grade: bool,
    /// Side conditions plus `m >= required_m`.
    pub theorem_grade: bool,
    pub lemma_required_m: u64,
    pub required_m: u64,
}

impl SampleParams {
    pub fn new(m: usize, gamma: f64, xi: f64, delta: f64) -> Result<Self> {
        for (name, x) in [("gamma", gamma), ("xi", xi), ("delta", delta)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(invalid(format!("{name} = {x} outside (0, 1)")));
            }
        }
        if m == 0 {
            return Err(invalid("sample count must be positive"));
        }
        Ok(Self { m, gamma, xi, delta })
    }

    fn log_term(gamma: f64, delta: f64) -> f64 {
        (3f64.ln() / gamma).max((3.0 / delta).ln())
    }

    /// Smallest `m` meeting `m >= 6(1+γ)/(γ²ξ)·max{ln3/γ, ln(3/δ)}`.
    pub fn theorem_sample_count(gamma: f64, xi: f64, delta: f64) -> u64 {
        (6.0 * (1.0 + gamma) / (gamma * gamma * xi) * Self::log_term(gamma, delta)).ceil() as u64
    }

    pub fn lemma_sample_count(gamma: f64, xi: f64, delta: f64) -> u64 {
        (3.0 / (gamma * gamma * (1.0 + gamma) * xi) * Self::log_term(gamma, delta)).ceil() as u64
    }

    /// Parameters at the theorem-grade sample count.
    pub fn theorem_grade(gamma: f64, xi: f64, delta: f64) -> Result<Self> {
        Self::new(Self::theorem_sample_count(gamma, xi, delta) as usize, gamma, xi, delta)
    }

    pub fn validate(&self) -> Validity {
        let (g, xi, d) = (self.gamma, self.xi, self.delta);
        let m = self.m as f64;
        let side = g * xi * m >= 4.0 && (1.0 + g) * (1.0 + g) <= 1.5;
        let lemma_required_m = Self::lemma_sample_count(g, xi, d);
        let required_m = Self::theorem_sample_count(g, xi, d);
        Validity {
            lemma_grade: side && self.m as u64 >= lemma_required_m,
            theorem_grade: side && self.m as u64 >= required_m,
            lemma_required_m,
            required_m,
        }
    }
}

/// Empirical revenue curve, its concave envelope and the derived reserve.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel<T> {
    sorted: Vec<T>,
    kept_from: usize,
    xi_bar: T,
    point_mass_value: T,
    revenue_points: Vec<(T, T)>,
    hull: ConcaveHull<T>,
    reserve: T,
    reserve_quantile: T,
}

/// Slacks returned by [`EmpiricalModel::guarantee_slacks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeSlacks<T> {
    /// True revenue at the empirical reserve against the scaled optimum.
    pub reserve_revenue: T,
    /// Envelope against the deflated true curve, over retained quantiles.
    pub curve_lower: T,
    /// Inflated true curve against the envelope, over retained quantiles.
    pub curve_upper: T,
    /// True sale probability at the empirical reserve against the scaled optimum.
    pub reserve_quantile: Option<T>,
}

/// Serializable summary of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub quantiles: Vec<f64>,
    pub values: Vec<f64>,
    pub hull_vertices: Vec<(f64, f64)>,
    pub reserve: f64,
    pub xi_bar: f64,
    pub point_mass_value: f64,
    pub validity: Validity,
}

impl<T: Real> EmpiricalModel<T> {
    /// Builds the model from exactly `p.m` samples in any order.
    pub fn build(samples: &[T], p: &SampleParams) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientSamples);
        }
        if samples.len() != p.m {
            return Err(invalid(format!(
                "got {} samples for m = {}",
                samples.len(),
                p.m
            )));
        }
        if samples.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(invalid("samples must be finite and nonnegative"));
        }
        let m = p.m;
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite samples"));
        let xi_m = (p.xi * m as f64).floor() as usize;
        let kept_from = xi_m.saturating_sub(1);
        if kept_from >= m {
            return Err(Error::InsufficientSamples);
        }
        let two_m = T::count(2 * m);
        let t = |j: usize| T::count(2 * j + 1) / two_m;

        let mut revenue_points = Vec::with_capacity(m - kept_from + 2);
        revenue_points.push((T::zero(), T::zero()));
        for (j, &v) in sorted.iter().enumerate().skip(kept_from) {
            revenue_points.push((t(j), t(j) * v));
        }
        revenue_points.push((T::one(), T::zero()));

        let floor_two = (2.0 * p.xi * m as f64).floor();
        let xi_bar = T::lit((floor_two - 1.0) / (2.0 * m as f64)).max(t(kept_from));
        let hull = ConcaveHull::new(&revenue_points);

        let mut model = Self {
            sorted,
            kept_from,
            xi_bar,
            point_mass_value: T::zero(),
            revenue_points,
            hull,
            reserve: T::zero(),
            reserve_quantile: T::one(),
        };
        model.point_mass_value = model.raw_revenue(xi_bar) / xi_bar;
        let top = model
            .hull
            .vertices()
            .iter()
            .copied()
            .filter(|&(q, _)| q > T::zero() && q < T::one())
            .fold(None, |best: Option<(T, T)>, v| match best {
                Some(b) if b.1 >= v.1 => Some(b),
                _ => Some(v),
            });
        if let Some((q, r)) = top {
            model.reserve_quantile = q;
            model.reserve = r / q;
        }
        Ok(model)
    }

    pub fn m(&self) -> usize {
        self.sorted.len()
    }

    /// All samples in descending order, discarded ones included.
    pub fn sorted_samples(&self) -> &[T] {
        &self.sorted
    }

    /// 0-based index of the largest retained sample.
    pub fn kept_from(&self) -> usize {
        self.kept_from
    }

    pub fn xi_bar(&self) -> T {
        self.xi_bar
    }

    pub fn point_mass_value(&self) -> T {
        self.point_mass_value
    }

    /// `(t_j, v_j)` for retained samples, ascending in quantile.
    pub fn quantile_points(&self) -> Vec<(T, T)> {
        let n = self.revenue_points.len();
        self.revenue_points[1..n - 1]
            .iter()
            .zip(&self.sorted[self.kept_from..])
            .map(|(&(q, _), &v)| (q, v))
            .collect()
    }

    /// `(t_j, t_j v_j)` for retained samples plus the two anchors.
    pub fn revenue_points(&self) -> &[(T, T)] {
        &self.revenue_points
    }

    pub fn envelope(&self) -> &ConcaveHull<T> {
        &self.hull
    }

    /// `R̄(q)`, linear between revenue points.
    pub fn raw_revenue(&self, q: T) -> T {
        let pts = &self.revenue_points;
        if q <= T::zero() || q >= T::one() {
            return T::zero();
        }
        let k = pts.partition_point(|p| p.0 <= q);
        let (a, b) = (pts[k - 1], pts[k]);
        a.1 + (b.1 - a.1) * (q - a.0) / (b.0 - a.0)
    }

    /// `CR̄(q)`, the concave envelope of `R̄`.
    pub fn envelope_revenue(&self, q: T) -> T {
        self.hull.value(q.max(T::zero()).min(T::one()))
    }

    /// `φ̄(q)`: slope of the envelope to the right of `q`.
    pub fn empirical_virtual(&self, q: T) -> T {
        self.hull.slope(q)
    }

    /// `r̄`, the value at the leftmost maximizer of the envelope.
    pub fn empirical_reserve(&self) -> T {
        self.reserve
    }

    pub fn reserve_quantile(&self) -> T {
        self.reserve_quantile
    }

    /// `v̄(q) = R̄(q)/q`, held at the point-mass value below `ξ̄`.
    pub fn value_at_quantile(&self, q: T) -> T {
        if q < self.xi_bar {
            self.point_mass_value
        } else if q >= T::one() {
            T::zero()
        } else {
            self.raw_revenue(q) / q
        }
    }

    /// `q̄(v) = sup{q : v̄(q) >= v}`, clipped to `ξ̄` above the point mass.
    ///
    /// `v̄` is nonincreasing: on every segment `R̄(q) = a + bq` with `a >= 0`,
    /// so `v̄ = a/q + b` and the crossing is `q = a/(v - b)`.
    pub fn quantile_of_value(&self, v: T) -> T {
        if v > self.point_mass_value {
            return self.xi_bar;
        }
        if v <= T::zero() {
            return T::one();
        }
        // Knots are `(ξ̄, R̄(ξ̄))` followed by the revenue points right of `ξ̄`;
        // `r >= v q` holds on a prefix of them because `v̄` is nonincreasing.
        let head = (self.xi_bar, self.raw_revenue(self.xi_bar));
        let tail = &self.revenue_points[self.revenue_points.partition_point(|p| p.0 <= self.xi_bar)..];
        let knot = |k: usize| if k == 0 { head } else { tail[k - 1] };
        let i = tail.partition_point(|&(q, r)| r >= v * q).min(tail.len().saturating_sub(1));
        let ((q0, r0), (q1, r1)) = (knot(i), knot(i + 1));
        let b = (r1 - r0) / (q1 - q0);
        let a = r0 - b * q0;
        if v <= b {
            return q1;
        }
        (a / (v - b)).max(q0).min(q1)
    }

    /// Virtual value of a value: the envelope slope just left of its empirical
    /// quantile, so a tied sample value gets the chord over its own quantile range.
    pub fn virtual_of_value(&self, v: T) -> T {
        self.hull.slope_before(self.quantile_of_value(v))
    }

    /// Whether every retained sample value `v` has true sale probability within
    /// a factor `(1+γ)^2` of its empirical quantile.
    ///
    /// Ties form groups `[first, last]`. `Pr[V >= v]` is compared with `t_last`
    /// and, when the group starts among retained samples, `Pr[V > v]` with `t_first`.
    pub fn coverage_event_holds(&self, truth: &ValuationDistribution<T>, gamma: T) -> bool {
        let factor = (T::one() + gamma) * (T::one() + gamma);
        let within = |q: T, t: T| q >= t / factor && q <= t * factor;
        let m = self.sorted.len();
        let two_m = T::count(2 * m);
        let t = |j: usize| T::count(2 * j + 1) / two_m;
        let mut first = self.kept_from;
        while first > 0 && self.sorted[first - 1] == self.sorted[first] {
            first -= 1;
        }
        let mut j = first;
        while j < m {
            let v = self.sorted[j];
            let mut last = j;
            while last + 1 < m && self.sorted[last + 1] == v {
                last += 1;
            }
            if !within(truth.quantile_of_value(v), t(last)) {
                return false;
            }
            if j >= self.kept_from && !within(truth.survival(v), t(j)) {
                return false;
            }
            j = last + 1;
        }
        true
    }

    /// Slacks of the accuracy guarantees that hold whenever the coverage event
    /// does; each is nonnegative when its inequality holds.
    ///
    /// `reserve_quantile` needs the strong-regularity parameter of the truth.
    pub fn guarantee_slacks(
        &self,
        truth: &ValuationDistribution<T>,
        gamma: T,
        alpha: Option<T>,
    ) -> Result<GuaranteeSlacks<T>> {
        let g = T::one() + gamma;
        let r = truth.reserve_price()?;
        let cr = |q: T| truth.revenue_curve(q).cr;
        let reserve_revenue = truth.revenue_at_price(self.reserve)
            - (T::one() - self.xi_bar * g * g) / g.powi(4) * truth.revenue_at_price(r);
        let (mut lower, mut upper) = (T::infinity(), T::infinity());
        for (q, _) in self.quantile_points() {
            if q < self.xi_bar {
                continue;
            }
            let est = self.envelope_revenue(q);
            let stretch = if q <= self.reserve_quantile { g * g } else { g * g * g };
            lower = lower.min(est - cr(q * stretch) / (g * g * g));
            upper = upper.min(g * g * cr(q / (g * g)) - est);
        }
        let reserve_quantile = alpha.map(|a| {
            let shrink = T::one() - (T::lit(8.0) * gamma / a).sqrt();
            truth.quantile_of_value(self.reserve) - shrink * truth.quantile_of_value(r)
        });
        Ok(GuaranteeSlacks {
            reserve_revenue,
            curve_lower: lower,
            curve_upper: upper,
            reserve_quantile,
        })
    }

    pub fn report(&self, p: &SampleParams) -> EmpiricalReport {
        let pts = self.quantile_points();
        EmpiricalReport {
            quantiles: pts.iter().map(|x| x.0.as_f64()).collect(),
            values: pts.iter().map(|x| x.1.as_f64()).collect(),
            hull_vertices: self
                .hull
                .vertices()
                .iter()
                .map(|&(q, r)| (q.as_f64(), r.as_f64()))
                .collect(),
            reserve: self.reserve.as_f64(),
            xi_bar: self.xi_bar.as_f64(),
            point_mass_value: self.point_mass_value.as_f64(),
            validity: p.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> (EmpiricalModel<f64>, SampleParams) {
        let p = SampleParams::new(3, 0.2, 0.4, 0.1).unwrap();
        (EmpiricalModel::build(&[1.0, 5.0, 3.0], &p).unwrap(), p)
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn validity_gates() {
        let v = SampleParams::new(100, 0.2, 0.1, 0.1).unwrap().validate();
        assert_eq!(v.required_m, 9888);
        assert!(!v.lemma_grade);
        let wide = SampleParams::new(10_000_000, 0.3, 0.1, 0.1).unwrap().validate();
        assert!(!wide.lemma_grade && !wide.theorem_grade);
        let ok = SampleParams::new(9888, 0.2, 0.1, 0.1).unwrap().validate();
        assert!(ok.theorem_grade && ok.lemma_grade);
        assert!(!SampleParams::new(9887, 0.2, 0.1, 0.1).unwrap().validate().theorem_grade);
    }

    #[test]
    fn three_sample_model() {
        let (em, _) = three();
        let pts = em.quantile_points();
        assert_eq!(pts.len(), 3);
        close(pts[0].0, 1.0 / 6.0);
        assert_eq!(pts[0].1, 5.0);
        close(pts[2].0, 5.0 / 6.0);
        close(em.raw_revenue(0.5), 1.5);
        close(em.empirical_reserve(), 3.0);
        close(em.value_at_quantile(0.5), 3.0);
        close(em.quantile_of_value(3.0), 0.5);
        close(em.quantile_of_value(1.0), 5.0 / 6.0);
        close(em.xi_bar(), 1.0 / 6.0);
        close(em.point_mass_value(), 5.0);
        let slopes = em.envelope().slopes();
        for (s, want) in slopes.iter().zip([5.0, 2.0, -2.0, -5.0]) {
            close(*s, want);
        }
    }

    #[test]
    fn single_sample_is_a_triangle() {
        let p = SampleParams::new(1, 0.2, 0.4, 0.1).unwrap();
        let em = EmpiricalModel::build(&[7.0], &p).unwrap();
        close(em.raw_revenue(0.5), 3.5);
        assert_eq!(em.envelope().vertices().len(), 3);
        assert_eq!(em.empirical_reserve(), 7.0);
    }

    #[test]
    fn discards_the_largest_samples() {
        let p = SampleParams::new(10, 0.2, 0.35, 0.1).unwrap();
        let samples: Vec<f64> = (1..=10).map(f64::from).collect();
        let em = EmpiricalModel::build(&samples, &p).unwrap();
        assert_eq!(em.kept_from(), 2);
        assert_eq!(em.quantile_points()[0].1, 8.0);
        close(em.xi_bar(), 0.3);
    }

    #[test]
    fn inverse_round_trips_on_sample_points() {
        let p = SampleParams::new(6, 0.2, 0.2, 0.1).unwrap();
        let em = EmpiricalModel::build(&[9.0, 4.0, 4.0, 2.5, 1.0, 0.5], &p).unwrap();
        for &(t, v) in &em.quantile_points() {
            if t >= em.xi_bar() {
                let back = em.quantile_of_value(v);
                assert!(em.value_at_quantile(back) >= v - 1e-12);
                assert!(back >= t - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_mismatched_sample_count() {
        let p = SampleParams::new(4, 0.2, 0.4, 0.1).unwrap();
        assert!(EmpiricalModel::build(&[1.0, 2.0], &p).is_err());
        assert!(matches!(
            EmpiricalModel::<f64>::build(&[], &p),
            Err(Error::InsufficientSamples)
        ));
    }

    #[test]
    fn exact_quantile_grid_is_covered() {
        let d = ValuationDistribution::falpha(0.5, 1.0).unwrap();
        let m = 400;
        let samples: Vec<f64> = (0..m)
            .map(|j| d.value_of_quantile((2 * j + 1) as f64 / (2 * m) as f64).unwrap())
            .collect();
        let p = SampleParams::new(m, 0.1, 0.1, 0.1).unwrap();
        let em = EmpiricalModel::build(&samples, &p).unwrap();
        assert!(em.coverage_event_holds(&d, 0.1));
        // Displacing the top sample keeps its rank, so only its quantile moves.
        let mut bad = samples.clone();
        bad[0] = d.value_of_quantile(1.0 / (2 * m) as f64 / 1.1f64.powi(3)).unwrap();
        let keep_all = SampleParams::new(m, 0.1, 0.001, 0.1).unwrap();
        let em_bad = EmpiricalModel::build(&bad, &keep_all).unwrap();
        assert!(!em_bad.coverage_event_holds(&d, 0.1));
    }
}
