//! Integrand profile over one subrange: the 23 sampled values (endpoints plus
//! the 21 inner knots) analyzed as a discrete signal. Extrema, monotonicity
//! subranges, mean-line crossings and knot classifications feed the
//! reliability criteria.

use crate::error::{Error, Result};
use crate::rule::{map_knots, Interval, LocalEstimate, QuadRule, HALF_ORDER, PROFILE_POINTS};

/// Classification of an extremal knot against the median line f = f_bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotClass {
    /// The median line separates the extremum from both neighbours.
    Sensitive,
    /// Both neighbours lie on the same side as the extremum.
    Regular,
    /// The median line separates the extremum from exactly one neighbour.
    Gray,
}

/// Dense-region span in profile indices: outer boundary sample to the
/// innermost dense knot. For GK 10-21 these are [0, 4] and [18, 22].
pub type Region = (usize, usize);

#[derive(Debug, Clone)]
pub struct IntegrandProfile {
    pub abscissas: [f64; PROFILE_POINTS],
    pub values: [f64; PROFILE_POINTS],
    pub f_bar: f64,
    /// Interior extremal point indices, strictly increasing.
    pub extrema: Vec<usize>,
    /// Monotonicity subranges [i_{j-1}, i_j] partitioning 0..=22.
    pub monotone_subranges: Vec<(usize, usize)>,
    /// Per-profile-point dense flag; endpoint samples are never dense.
    pub dense_flags: [bool; PROFILE_POINTS],
    /// Dense regions (left cluster, right cluster).
    pub regions: [Region; 2],
    /// Mean-line crossing counts of the fine sampling per dense region.
    pub fine_zero_counts: [usize; 2],
    /// Same counts over the coarse sampling (endpoints + Gauss knots).
    pub coarse_zero_counts: [usize; 2],
}

fn signum(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Interior extremal indices of a value sequence. Exact ties continue the
/// previous monotone direction and never create an extremum.
pub fn extrema_of(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev: i8 = 0;
    for k in 0..values.len() - 1 {
        let mut s = signum(values[k + 1] - values[k]);
        if s == 0 {
            s = prev;
        }
        if prev != 0 && s != 0 && s != prev {
            out.push(k);
        }
        if s != 0 {
            prev = s;
        }
    }
    out
}

/// Coarse sampling = endpoints plus the 10 Gauss knots = even profile indices.
pub fn coarse_indices() -> impl Iterator<Item = usize> {
    (0..PROFILE_POINTS).step_by(2)
}

/// Extrema of the coarse sampling, reported in fine profile index units.
pub fn coarse_extrema(profile: &IntegrandProfile) -> Vec<usize> {
    let cvals: Vec<f64> = coarse_indices().map(|p| profile.values[p]).collect();
    extrema_of(&cvals).into_iter().map(|k| 2 * k).collect()
}

impl IntegrandProfile {
    /// Builds the profile from already-sampled values (position k corresponds
    /// to `map_knots` output k).
    pub fn from_samples(
        rule: &QuadRule,
        abscissas: [f64; PROFILE_POINTS],
        values: [f64; PROFILE_POINTS],
        f_bar: f64,
    ) -> Result<Self> {
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x: abscissas[k] });
            }
        }
        let extrema = extrema_of(&values);
        let mut bounds = Vec::with_capacity(extrema.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(&extrema);
        bounds.push(PROFILE_POINTS - 1);
        let monotone_subranges = bounds.windows(2).map(|w| (w[0], w[1])).collect();

        let mut dense_flags = [false; PROFILE_POINTS];
        for slot in 0..crate::rule::INNER_KNOTS {
            dense_flags[slot + 1] = rule.is_dense(slot);
        }
        let innermost_left = (1..HALF_ORDER + 1).rev().find(|&p| dense_flags[p]).unwrap_or(1);
        let innermost_right = (HALF_ORDER + 2..PROFILE_POINTS - 1)
            .find(|&p| dense_flags[p])
            .unwrap_or(PROFILE_POINTS - 2);
        let regions = [(0, innermost_left), (innermost_right, PROFILE_POINTS - 1)];

        let mut profile = IntegrandProfile {
            abscissas,
            values,
            f_bar,
            extrema,
            monotone_subranges,
            dense_flags,
            regions,
            fine_zero_counts: [0; 2],
            coarse_zero_counts: [0; 2],
        };
        for (r, &(lo, hi)) in regions.iter().enumerate() {
            let fine: Vec<usize> = (lo..=hi).collect();
            let coarse: Vec<usize> = coarse_indices().filter(|&p| p >= lo && p <= hi).collect();
            profile.fine_zero_counts[r] = profile.crossings(&fine).len();
            profile.coarse_zero_counts[r] = profile.crossings(&coarse).len();
        }
        Ok(profile)
    }

    /// Samples `f` at the mapped knots and builds the profile. The estimate
    /// supplies the mean line.
    pub fn build<F: Fn(f64) -> f64>(
        f: F,
        iv: &Interval,
        rule: &QuadRule,
        est: &LocalEstimate,
    ) -> Result<Self> {
        let xs = map_knots(rule, iv);
        let mut vals = [0.0; PROFILE_POINTS];
        for (k, &x) in xs.iter().enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x });
            }
            vals[k] = v;
        }
        Self::from_samples(rule, xs, vals, est.f_bar)
    }

    pub fn is_monotone(&self) -> bool {
        self.extrema.is_empty()
    }

    pub fn deviation(&self, p: usize) -> f64 {
        self.values[p] - self.f_bar
    }

    /// Mean-line crossings among the sampling points `idx` (ascending profile
    /// indices). On-line values pass through and only a strict sign change
    /// counts; the crossing is attributed to the gap between the two flanking
    /// off-line points.
    pub fn crossings(&self, idx: &[usize]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut prev_sign: i8 = 0;
        let mut prev_at = 0usize;
        for &p in idx {
            let s = signum(self.deviation(p));
            if s == 0 {
                continue;
            }
            if prev_sign != 0 && s != prev_sign {
                out.push((prev_at, p));
            }
            prev_sign = s;
            prev_at = p;
        }
        out
    }

    /// Mean-line crossing abscissas over the full fine profile, each with its
    /// flanking off-line point pair. A gap that contains on-line samples
    /// crosses exactly there; otherwise the position is interpolated.
    pub fn crossing_positions(&self) -> Vec<(f64, usize, usize)> {
        self.crossings(&(0..PROFILE_POINTS).collect::<Vec<_>>())
            .into_iter()
            .map(|(pl, pr)| {
                let on_line: Vec<usize> =
                    (pl + 1..pr).filter(|&q| self.deviation(q) == 0.0).collect();
                let xz = match (on_line.first(), on_line.last()) {
                    (Some(&f), Some(&l)) => 0.5 * (self.abscissas[f] + self.abscissas[l]),
                    _ => {
                        let (x0, v0) = (self.abscissas[pl], self.deviation(pl));
                        let (x1, v1) = (self.abscissas[pr], self.deviation(pr));
                        x0 + (x1 - x0) * (-v0) / (v1 - v0)
                    }
                };
                (xz, pl, pr)
            })
            .collect()
    }

    /// Classifies the extremal knot at profile index `p`.
    pub fn classify_extremal_knot(&self, p: usize) -> Result<KnotClass> {
        if !self.extrema.contains(&p) {
            return Err(Error::ContractViolation("index is not an interior extremum"));
        }
        let s0 = self.deviation(p);
        let sep_l = s0 * self.deviation(p - 1) < 0.0;
        let sep_r = s0 * self.deviation(p + 1) < 0.0;
        Ok(match (sep_l, sep_r) {
            (true, true) => KnotClass::Sensitive,
            (false, false) => KnotClass::Regular,
            _ => KnotClass::Gray,
        })
    }

    /// Knot class without the extremal-membership check (criteria internals).
    pub(crate) fn knot_class_unchecked(&self, p: usize) -> KnotClass {
        let s0 = self.deviation(p);
        let sep_l = s0 * self.deviation(p - 1) < 0.0;
        let sep_r = s0 * self.deviation(p + 1) < 0.0;
        match (sep_l, sep_r) {
            (true, true) => KnotClass::Sensitive,
            (false, false) => KnotClass::Regular,
            _ => KnotClass::Gray,
        }
    }

    /// Tab-separated dump for fixture authoring: one row per profile point.
    pub fn dump(&self) -> String {
        let coarse: Vec<usize> = coarse_indices().collect();
        let mut out = String::from("idx\tknot\tx\tf\tdeviation\tdense\tcoarse\textremum\tclass\n");
        for p in 0..PROFILE_POINTS {
            let knot = p as i32 - (HALF_ORDER as i32 + 1);
            let class = if self.extrema.contains(&p) {
                match self.knot_class_unchecked(p) {
                    KnotClass::Sensitive => "S",
                    KnotClass::Regular => "R",
                    KnotClass::Gray => "G",
                }
            } else {
                "-"
            };
            out.push_str(&format!(
                "{}\t{}\t{:.16e}\t{:.16e}\t{:.16e}\t{}\t{}\t{}\t{}\n",
                p,
                knot,
                self.abscissas[p],
                self.values[p],
                self.deviation(p),
                if self.dense_flags[p] { 1 } else { 0 },
                if coarse.contains(&p) { 1 } else { 0 },
                if self.extrema.contains(&p) { 1 } else { 0 },
                class,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{local_estimate, INNER_KNOTS};

    fn rule() -> QuadRule {
        QuadRule::gk10_21()
    }

    fn build_for<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> IntegrandProfile {
        let r = rule();
        let iv = Interval::new(a, b).unwrap();
        let xs = map_knots(&r, &iv);
        let mut inner = [0.0; INNER_KNOTS];
        for k in 0..INNER_KNOTS {
            inner[k] = f(xs[k + 1]);
        }
        let est = local_estimate(&r, &inner, &iv, f64::EPSILON).unwrap();
        IntegrandProfile::build(f, &iv, &r, &est).unwrap()
    }

    #[test]
    fn monotone_profile_has_single_subrange() {
        let p = build_for(|x| x, 0.0, 1.0);
        assert!(p.extrema.is_empty());
        assert_eq!(p.monotone_subranges, vec![(0, PROFILE_POINTS - 1)]);
    }

    #[test]
    fn constant_profile() {
        let p = build_for(|_| 5.0, 0.0, 1.0);
        assert!((p.f_bar - 5.0).abs() < 1e-12);
        assert!(p.extrema.is_empty());
        assert_eq!(p.fine_zero_counts, [0, 0]);
        assert_eq!(p.coarse_zero_counts, [0, 0]);
    }

    #[test]
    fn oscillation_extrema_match_dense_scan() {
        // cos(6 pi x) on [-1, 1]: count true extrema with a dense scan, then
        // allow +-1 for profile resolution
        let f = |x: f64| (6.0 * std::f64::consts::PI * x).cos();
        let p = build_for(f, -1.0, 1.0);

        let n = 10_001;
        let mut dense_count = 0;
        let mut prev = f(-1.0);
        let mut prev_d: i8 = 0;
        for k in 1..n {
            let x = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
            let v = f(x);
            let d: i8 = if v > prev { 1 } else { -1 };
            if prev_d != 0 && d != prev_d {
                dense_count += 1;
            }
            prev_d = d;
            prev = v;
        }
        assert_eq!(dense_count, 11); // interior extrema of cos(6 pi x)
        let got = p.extrema.len() as i64;
        assert!((got - dense_count as i64).abs() <= 1, "got {got}");
    }

    #[test]
    fn extrema_and_subranges_partition() {
        let p = build_for(|x: f64| (5.0 * x).sin() * (1.0 + x), -1.0, 1.0);
        for w in p.monotone_subranges.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert_eq!(p.monotone_subranges.first().unwrap().0, 0);
        assert_eq!(p.monotone_subranges.last().unwrap().1, PROFILE_POINTS - 1);
        for &e in &p.extrema {
            assert!(e > 0 && e < PROFILE_POINTS - 1);
        }
    }

    #[test]
    fn tie_values_do_not_create_extrema() {
        let mut vals = [0.0; 6];
        vals.copy_from_slice(&[0.0, 1.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(extrema_of(&vals).is_empty());
        // plateau at a maximum: extremum detected at the plateau's far edge
        let vals = [0.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(extrema_of(&vals), vec![2]);
    }

    #[test]
    fn classification_cases() {
        // synthetic profile around an extremum: values (2, 9, 3) vs f_bar = 5
        let r = rule();
        let iv = Interval::new(0.0, 1.0).unwrap();
        let xs = map_knots(&r, &iv);
        let mut vals = [1.0; PROFILE_POINTS];
        vals[9] = 2.0;
        vals[10] = 9.0;
        vals[11] = 3.0;
        vals[12] = 4.0;
        let p = IntegrandProfile::from_samples(&r, xs, vals, 5.0).unwrap();
        assert!(p.extrema.contains(&10));
        assert_eq!(p.classify_extremal_knot(10).unwrap(), KnotClass::Sensitive);

        let mut vals = [1.0; PROFILE_POINTS];
        vals[9] = 6.0;
        vals[10] = 9.0;
        vals[11] = 7.0;
        vals[12] = 8.0;
        let p = IntegrandProfile::from_samples(&r, xs, vals, 5.0).unwrap();
        assert_eq!(p.classify_extremal_knot(10).unwrap(), KnotClass::Regular);

        let mut vals = [1.0; PROFILE_POINTS];
        vals[9] = 4.0;
        vals[10] = 9.0;
        vals[11] = 6.0;
        vals[12] = 7.0;
        let p = IntegrandProfile::from_samples(&r, xs, vals, 5.0).unwrap();
        assert_eq!(p.classify_extremal_knot(10).unwrap(), KnotClass::Gray);

        assert!(p.classify_extremal_knot(3).is_err());
    }

    #[test]
    fn dense_regions_span_edge_clusters() {
        let p = build_for(|x| x, 0.0, 1.0);
        assert_eq!(p.regions, [(0, 4), (18, 22)]);
        for q in 1..=4 {
            assert!(p.dense_flags[q]);
        }
        for q in 5..=17 {
            assert!(!p.dense_flags[q]);
        }
        for q in 18..=21 {
            assert!(p.dense_flags[q]);
        }
    }

    #[test]
    fn non_finite_sample_reports_abscissa() {
        let r = rule();
        let iv = Interval::new(2.0, 3.0).unwrap();
        let est = LocalEstimate {
            q2n: 0.0,
            qn: 0.0,
            f_bar: 0.0,
            delta: 0.0,
            e_ggk: 0.0,
            e_qdp: 0.0,
            e_roff: 0.0,
            e2n: 0.0,
            abs_sum: 0.0,
        };
        let err = IntegrandProfile::build(|x| 1.0 / (x - 2.0), &iv, &r, &est).unwrap_err();
        match err {
            Error::NonFiniteSample { x } => assert_eq!(x, 2.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // crossing parity over a region matches the endpoint signs
            #[test]
            fn crossing_parity(vals in proptest::collection::vec(-1.0f64..1.0, PROFILE_POINTS)) {
                let r = QuadRule::gk10_21();
                let iv = Interval::new(0.0, 1.0).unwrap();
                let xs = map_knots(&r, &iv);
                let mut v = [0.0; PROFILE_POINTS];
                v.copy_from_slice(&vals);
                let p = IntegrandProfile::from_samples(&r, xs, v, 0.0).unwrap();
                let idx: Vec<usize> = (0..PROFILE_POINTS).collect();
                let crossings = p.crossings(&idx);
                let nonzero: Vec<i8> = idx.iter()
                    .map(|&q| super::super::signum(p.deviation(q)))
                    .filter(|&s| s != 0)
                    .collect();
                if nonzero.len() >= 2 {
                    let parity_flip = nonzero.first() != nonzero.last();
                    prop_assert_eq!(crossings.len() % 2 == 1, parity_flip);
                }
            }

            // classification is invariant under positive affine maps of
            // (values, f_bar) together; integer-valued samples keep the
            // transform exact in floating point
            #[test]
            fn class_affine_invariance(
                seed in proptest::collection::vec(-40i32..40, PROFILE_POINTS),
                alpha in 1u32..64,
                beta in -32i32..32,
            ) {
                let r = QuadRule::gk10_21();
                let iv = Interval::new(0.0, 1.0).unwrap();
                let xs = map_knots(&r, &iv);
                let mut v = [0.0; PROFILE_POINTS];
                for (k, &s) in seed.iter().enumerate() {
                    v[k] = s as f64 / 8.0;
                }
                let f_bar = 0.25;
                let (alpha, beta) = (alpha as f64, beta as f64);
                let p1 = IntegrandProfile::from_samples(&r, xs, v, f_bar).unwrap();
                let mut v2 = [0.0; PROFILE_POINTS];
                for (k, x) in v.iter().enumerate() {
                    v2[k] = alpha * x + beta;
                }
                let p2 = IntegrandProfile::from_samples(&r, xs, v2, alpha * f_bar + beta).unwrap();
                prop_assert_eq!(&p1.extrema, &p2.extrema);
                for &e in &p1.extrema {
                    prop_assert_eq!(
                        p1.classify_extremal_knot(e).unwrap(),
                        p2.classify_extremal_knot(e).unwrap()
                    );
                }
            }
        }
    }
}
