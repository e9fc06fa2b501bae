//! Global control routine: worst-first subdivision with verdict tracking
//! across generations. Sampling stays outside the rule so endpoint values can
//! be reused when a subrange is bisected at its midpoint (which is always the
//! central quadrature knot of the parent).

use crate::criteria::analyze_profile;
use crate::error::{Error, Result};
use crate::profile::IntegrandProfile;
use crate::rule::{map_knots, Interval, LocalEstimate, QuadRule, INNER_KNOTS, PROFILE_POINTS};
use crate::verdict::{accurate_skip, decide, inaccurate_monotone_skip, Verdict, VerdictKind};

/// Consecutive suspect generations on the same locus before the leaf is
/// frozen and its estimate accepted.
pub const STABILITY_WINDOW: u32 = 3;

/// Default subdivision budget.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Tolerance met with every leaf reliable.
    Converged,
    /// Tolerance met except for suspect leaves whose diagnosis persisted.
    SuspectPointsRemain,
    /// Subdivision budget exhausted before the goal.
    LimitReached,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Converged => "converged",
            Status::SuspectPointsRemain => "suspect-points-remain",
            Status::LimitReached => "limit-reached",
        };
        f.write_str(s)
    }
}

/// One leaf of the final subdivision tree.
#[derive(Debug, Clone)]
pub struct SubrangeRecord {
    pub iv: Interval,
    pub est: LocalEstimate,
    pub verdict: Verdict,
    pub generation: u32,
    pub parent_verdict: Option<VerdictKind>,
    /// Verdict kind repeated from parent to child.
    pub stable: bool,
}

#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub q: f64,
    pub e: f64,
    pub status: Status,
    pub ledger: Vec<SubrangeRecord>,
    pub evaluations: usize,
}

/// Evaluates the integrand at all 23 profile abscissas of `iv`.
pub fn sample<F: Fn(f64) -> f64>(
    f: &F,
    iv: &Interval,
    rule: &QuadRule,
) -> Result<([f64; PROFILE_POINTS], usize)> {
    let xs = map_knots(rule, iv);
    let mut vals = [0.0; PROFILE_POINTS];
    for (k, &x) in xs.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { x });
        }
        vals[k] = v;
    }
    Ok((vals, PROFILE_POINTS))
}

fn sample_with_ends<F: Fn(f64) -> f64>(
    f: &F,
    iv: &Interval,
    rule: &QuadRule,
    f_a: f64,
    f_b: f64,
) -> Result<([f64; PROFILE_POINTS], usize)> {
    let xs = map_knots(rule, iv);
    let mut vals = [0.0; PROFILE_POINTS];
    vals[0] = f_a;
    vals[PROFILE_POINTS - 1] = f_b;
    for (k, &x) in xs.iter().enumerate().skip(1).take(INNER_KNOTS) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { x });
        }
        vals[k] = v;
    }
    Ok((vals, INNER_KNOTS))
}

struct Leaf {
    iv: Interval,
    est: LocalEstimate,
    verdict: Verdict,
    generation: u32,
    parent_verdict: Option<VerdictKind>,
    values: [f64; PROFILE_POINTS],
    abscissas: [f64; PROFILE_POINTS],
    suspect_streak: u32,
    suspect_locus: f64,
    frozen: bool,
}

impl Leaf {
    fn record(&self) -> SubrangeRecord {
        SubrangeRecord {
            iv: self.iv,
            est: self.est,
            verdict: self.verdict,
            generation: self.generation,
            parent_verdict: self.parent_verdict,
            stable: self
                .parent_verdict
                .map(|pv| pv == self.verdict.kind)
                .unwrap_or(false),
        }
    }
}

fn assess(
    rule: &QuadRule,
    iv: Interval,
    values: [f64; PROFILE_POINTS],
    eps0: f64,
) -> Result<(LocalEstimate, Verdict, f64)> {
    let mut inner = [0.0; INNER_KNOTS];
    inner.copy_from_slice(&values[1..PROFILE_POINTS - 1]);
    let est = crate::rule::local_estimate(rule, &inner, &iv, eps0)?;
    let xs = map_knots(rule, &iv);
    let profile = IntegrandProfile::from_samples(rule, xs, values, est.f_bar)?;
    // skip the criteria sweep whenever a skip rule decides on its own
    let (verdict, locus) = if accurate_skip(&est) || inaccurate_monotone_skip(&est, &profile) {
        (decide(&est, &profile, None)?, f64::NAN)
    } else {
        let diag = analyze_profile(&profile);
        let locus = diag
            .reports
            .first()
            .map(|r| r.locus.abscissa(&profile))
            .unwrap_or(f64::NAN);
        (decide(&est, &profile, Some(&diag))?, locus)
    };
    Ok((est, verdict, locus))
}

/// Worst-first adaptive integration of `f` over `iv`.
///
/// Terminates when the summed estimate meets `max(eps_abs, eps_rel |Q|)` and
/// every leaf is either reliable or a frozen suspect; unresolved leaves are
/// always subdivision-eligible. Ties in the worst-leaf choice break toward
/// the leftmost interval, making the loop fully deterministic.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    iv: Interval,
    eps_abs: f64,
    eps_rel: f64,
    max_subdivisions: usize,
) -> Result<AdaptiveResult> {
    if !(eps_abs >= 0.0 && eps_rel >= 0.0) || (eps_abs == 0.0 && eps_rel == 0.0) {
        return Err(Error::InvalidTolerance { eps_abs, eps_rel });
    }
    if max_subdivisions == 0 {
        return Err(Error::ContractViolation("max_subdivisions must be at least 1"));
    }
    let rule = QuadRule::gk10_21();
    let eps0 = f64::EPSILON;

    let (values, mut evaluations) = sample(&f, &iv, &rule)?;
    let xs = map_knots(&rule, &iv);
    let (est, verdict, locus) = assess(&rule, iv, values, eps0)?;
    let mut leaves = vec![Leaf {
        iv,
        est,
        verdict,
        generation: 0,
        parent_verdict: None,
        values,
        abscissas: xs,
        suspect_streak: (verdict.kind == VerdictKind::SuspectIsolatedPoint) as u32,
        suspect_locus: locus,
        frozen: false,
    }];

    let mut bisections = 0usize;
    let status = loop {
        let q: f64 = leaves.iter().map(|l| l.est.q2n).sum();
        let e: f64 = leaves.iter().map(|l| l.est.e2n).sum();
        let tol = eps_abs.max(eps_rel * q.abs());
        let any_frozen = leaves.iter().any(|l| l.frozen);
        let pending: Vec<usize> = leaves
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.verdict.is_reliable() && !l.frozen)
            .map(|(k, _)| k)
            .collect();

        if e <= tol && pending.is_empty() {
            break if any_frozen {
                Status::SuspectPointsRemain
            } else {
                Status::Converged
            };
        }
        if bisections >= max_subdivisions {
            break if e <= tol
                && leaves
                    .iter()
                    .all(|l| l.verdict.is_reliable() || l.frozen || l.verdict.kind == VerdictKind::SuspectIsolatedPoint)
            {
                Status::SuspectPointsRemain
            } else {
                Status::LimitReached
            };
        }

        // pick the worst splittable leaf: among unreliable ones when the
        // tolerance is already met, otherwise among all unfrozen leaves
        let candidates: Vec<usize> = if e <= tol {
            pending
        } else {
            leaves
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.frozen)
                .map(|(k, _)| k)
                .collect()
        };
        let Some(&worst) = candidates.iter().max_by(|&&a, &&b| {
            let (la, lb) = (&leaves[a], &leaves[b]);
            la.est
                .e2n
                .partial_cmp(&lb.est.e2n)
                .unwrap()
                .then(lb.iv.a.partial_cmp(&la.iv.a).unwrap())
        }) else {
            break Status::SuspectPointsRemain;
        };

        let parent = leaves.swap_remove(worst);
        let mid = parent.abscissas[PROFILE_POINTS / 2];
        let halves = [
            (parent.iv.a, mid, parent.values[0], parent.values[PROFILE_POINTS / 2]),
            (mid, parent.iv.b, parent.values[PROFILE_POINTS / 2], parent.values[PROFILE_POINTS - 1]),
        ];
        for (a, b, f_a, f_b) in halves {
            let child_iv = Interval::new(a, b)?;
            let (vals, ev) = sample_with_ends(&f, &child_iv, &rule, f_a, f_b)?;
            evaluations += ev;
            let child_xs = map_knots(&rule, &child_iv);
            let (est, verdict, locus) = assess(&rule, child_iv, vals, eps0)?;
            let mut streak = 0;
            let mut child_locus = f64::NAN;
            if verdict.kind == VerdictKind::SuspectIsolatedPoint {
                child_locus = locus;
                let inherits = parent.verdict.kind == VerdictKind::SuspectIsolatedPoint
                    && parent.suspect_locus.is_finite()
                    && a <= parent.suspect_locus
                    && parent.suspect_locus <= b;
                streak = if inherits { parent.suspect_streak + 1 } else { 1 };
            }
            leaves.push(Leaf {
                iv: child_iv,
                est,
                verdict,
                generation: parent.generation + 1,
                parent_verdict: Some(parent.verdict.kind),
                values: vals,
                abscissas: child_xs,
                suspect_streak: streak,
                suspect_locus: child_locus,
                frozen: streak >= STABILITY_WINDOW,
            });
        }
        bisections += 1;
    };

    leaves.sort_by(|x, y| x.iv.a.partial_cmp(&y.iv.a).unwrap());
    let q: f64 = leaves.iter().map(|l| l.est.q2n).sum();
    let e: f64 = leaves.iter().map(|l| l.est.e2n).sum();
    Ok(AdaptiveResult {
        q,
        e,
        status,
        ledger: leaves.iter().map(Leaf::record).collect(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn polynomial_converges_without_subdivision() {
        let r = integrate(|x| x * x, iv(0.0, 1.0), 0.0, 1e-10, 500).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.q - 1.0 / 3.0).abs() / (1.0 / 3.0) < 1e-12);
        assert_eq!(r.ledger.len(), 1);
        assert_eq!(r.evaluations, PROFILE_POINTS);
    }

    #[test]
    fn centrifugal_tail_converges_reliably() {
        let r = integrate(|x| 1.0 / (x * x + 1.0), iv(0.0, 37.0), 0.0, 1e-10, 500).unwrap();
        assert_eq!(r.status, Status::Converged);
        let exact = 37.0f64.atan();
        assert!((r.q - exact).abs() <= r.e);
        assert!(r.ledger.iter().all(|l| l.verdict.is_reliable()));
    }

    #[test]
    fn oscillatory_first_generation_unresolved_then_corrected() {
        let w = 1612.0 * std::f64::consts::PI / 60.0;
        let f = move |x: f64| (x + 1.0).exp() * (w * x).cos();
        // first generation alone is unresolved
        let rule = QuadRule::gk10_21();
        let (vals, _) = sample(&f, &iv(-1.0, 1.0), &rule).unwrap();
        let (_, verdict, _) = assess(&rule, iv(-1.0, 1.0), vals, f64::EPSILON).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Unresolved);

        let r = integrate(f, iv(-1.0, 1.0), 0.0, 1e-8, 500).unwrap();
        assert_eq!(r.status, Status::Converged);
        let exact = 2.0 * std::f64::consts::E
            * ((1.0f64).sinh() * w.cos() + w * (1.0f64).cosh() * w.sin())
            / (w * w + 1.0);
        assert!((r.q - exact).abs() / exact.abs() < 1e-8);
    }

    #[test]
    fn leaves_partition_the_range() {
        let r = integrate(|x: f64| (7.3 * x).sin() / (1.0 + x * x), iv(-2.0, 3.0), 0.0, 1e-12, 500)
            .unwrap();
        assert!(r.ledger.len() > 1);
        assert_eq!(r.ledger.first().unwrap().iv.a, -2.0);
        assert_eq!(r.ledger.last().unwrap().iv.b, 3.0);
        for w in r.ledger.windows(2) {
            assert_eq!(w[0].iv.b, w[1].iv.a);
        }
    }

    #[test]
    fn evaluation_accounting_is_exact() {
        // each bisection evaluates 21 fresh inner knots per child; the three
        // previously known values (both ends and the shared midpoint) are
        // reused
        let f = |x: f64| (9.0 * x).sin() * x;
        let r = integrate(f, iv(0.0, 2.0), 0.0, 1e-13, 500).unwrap();
        let bisections = r.ledger.len() - 1;
        assert_eq!(r.evaluations, PROFILE_POINTS + bisections * 2 * INNER_KNOTS);
    }

    #[test]
    fn child_knots_share_only_endpoints_with_parent() {
        // reuse accounting for GK 10-21: a child's abscissa set meets the
        // parent's in exactly its two endpoints
        let rule = QuadRule::gk10_21();
        let parent = iv(0.0, 1.0);
        let parent_xs = map_knots(&rule, &parent);
        let left = iv(0.0, 0.5);
        let left_xs = map_knots(&rule, &left);
        let shared: Vec<f64> = left_xs
            .iter()
            .filter(|x| parent_xs.iter().any(|y| y == *x))
            .copied()
            .collect();
        assert_eq!(shared, vec![0.0, 0.5]);
    }

    #[test]
    fn undefined_endpoint_reports_abscissa() {
        let err = integrate(|x: f64| 1.0 / x, iv(0.0, 1.0), 0.0, 1e-8, 10).unwrap_err();
        match err {
            Error::NonFiniteSample { x } => assert_eq!(x, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_tolerances_rejected() {
        assert!(integrate(|x| x, iv(0.0, 1.0), 0.0, 0.0, 10).is_err());
        assert!(integrate(|x| x, iv(0.0, 1.0), -1.0, 1e-8, 10).is_err());
        assert!(integrate(|x| x, iv(0.0, 1.0), 1e-8, 1e-8, 0).is_err());
    }

    #[test]
    fn limit_reached_reported_not_thrown() {
        // |x - pi/8|^{-1/3} style cusp slows convergence enough to exhaust a
        // tiny budget
        let c = std::f64::consts::PI / 8.0;
        let f = move |x: f64| (x - c).abs().powf(-1.0 / 3.0).min(1e6);
        let r = integrate(f, iv(0.0, 1.0), 0.0, 1e-14, 3).unwrap();
        assert_eq!(r.status, Status::LimitReached);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = |x: f64| (23.0 * x).cos() * (x * 0.5).exp();
        let r1 = integrate(f, iv(-1.0, 4.0), 0.0, 1e-11, 500).unwrap();
        let r2 = integrate(f, iv(-1.0, 4.0), 0.0, 1e-11, 500).unwrap();
        assert_eq!(r1.q.to_bits(), r2.q.to_bits());
        assert_eq!(r1.e.to_bits(), r2.e.to_bits());
        assert_eq!(r1.evaluations, r2.evaluations);
        assert_eq!(r1.ledger.len(), r2.ledger.len());
        for (a, b) in r1.ledger.iter().zip(r2.ledger.iter()) {
            assert_eq!(a.iv.a.to_bits(), b.iv.a.to_bits());
            assert_eq!(a.est.q2n.to_bits(), b.est.q2n.to_bits());
            assert_eq!(a.verdict, b.verdict);
        }
    }
}
