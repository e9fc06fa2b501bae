//! Per-subrange decision logic: accept an estimate outright, reject a
//! hopeless monotone one, or map the ill-conditioning pointer to a verdict.

use crate::criteria::ReliabilityDiagnosis;
use crate::error::{Error, Result};
use crate::profile::IntegrandProfile;
use crate::rule::LocalEstimate;

/// Relative-estimate threshold below which the validation procedure is
/// skipped and the couple accepted, 2^-18.
pub const E_THR: f64 = 1.0 / ((1 << 18) as f64);

/// Monotone-profile rejection factor: e2n above half the quadrature sum means
/// the sum itself is hopeless.
pub const INACCURATE_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    /// The relative estimate is below threshold; validation skipped.
    ReliableAccurate,
    /// Profile analysis found no infringement (lambda = 0).
    ReliableValidated,
    /// lambda in {1, 2}: probably an isolated difficult point.
    SuspectIsolatedPoint,
    /// lambda >= 3: the profile is unresolved, subdivision is compulsory.
    Unresolved,
    /// Monotone profile with e2n > 0.5 |q2n|: highly inaccurate outright.
    InaccurateMonotone,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictKind::ReliableAccurate => "reliable-accurate",
            VerdictKind::ReliableValidated => "reliable-validated",
            VerdictKind::SuspectIsolatedPoint => "suspect-isolated-point",
            VerdictKind::Unresolved => "unresolved",
            VerdictKind::InaccurateMonotone => "inaccurate-monotone",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub lambda: usize,
}

impl Verdict {
    /// Zero for reliable kinds, non-zero otherwise.
    pub fn flag(&self) -> u8 {
        match self.kind {
            VerdictKind::ReliableAccurate | VerdictKind::ReliableValidated => 0,
            VerdictKind::SuspectIsolatedPoint => 1,
            VerdictKind::Unresolved => 2,
            VerdictKind::InaccurateMonotone => 3,
        }
    }

    pub fn is_reliable(&self) -> bool {
        self.flag() == 0
    }
}

/// True when the relative estimate clears the skip threshold: the couple is
/// accepted without profile analysis.
pub fn accurate_skip(est: &LocalEstimate) -> bool {
    if est.q2n != 0.0 {
        (est.e2n / est.q2n).abs() <= E_THR
    } else {
        est.e2n <= est.e_roff
    }
}

/// True for the monotone-profile rejection of the analysis (skip rule two).
pub fn inaccurate_monotone_skip(est: &LocalEstimate, profile: &IntegrandProfile) -> bool {
    profile.is_monotone() && est.e2n > INACCURATE_FACTOR * est.q2n.abs()
}

/// Decision order: accurate skip, monotone-inaccurate skip, then the lambda
/// branch table. `diag` may be omitted only when a skip applies.
pub fn decide(
    est: &LocalEstimate,
    profile: &IntegrandProfile,
    diag: Option<&ReliabilityDiagnosis>,
) -> Result<Verdict> {
    if accurate_skip(est) {
        return Ok(Verdict {
            kind: VerdictKind::ReliableAccurate,
            lambda: 0,
        });
    }
    if inaccurate_monotone_skip(est, profile) {
        return Ok(Verdict {
            kind: VerdictKind::InaccurateMonotone,
            lambda: 0,
        });
    }
    let diag = diag.ok_or(Error::ContractViolation(
        "reliability diagnosis required when no skip condition applies",
    ))?;
    let kind = match diag.lambda {
        0 => VerdictKind::ReliableValidated,
        1 | 2 => VerdictKind::SuspectIsolatedPoint,
        _ => VerdictKind::Unresolved,
    };
    Ok(Verdict {
        kind,
        lambda: diag.lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::analyze_profile;
    use crate::profile::IntegrandProfile;
    use crate::rule::{local_estimate, map_knots, Interval, QuadRule, INNER_KNOTS};

    fn run<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> (Verdict, LocalEstimate) {
        let r = QuadRule::gk10_21();
        let iv = Interval::new(a, b).unwrap();
        let xs = map_knots(&r, &iv);
        let mut inner = [0.0; INNER_KNOTS];
        for k in 0..INNER_KNOTS {
            inner[k] = f(xs[k + 1]);
        }
        let est = local_estimate(&r, &inner, &iv, f64::EPSILON).unwrap();
        let profile = IntegrandProfile::build(f, &iv, &r, &est).unwrap();
        let diag = analyze_profile(&profile);
        (decide(&est, &profile, Some(&diag)).unwrap(), est)
    }

    #[test]
    fn polynomial_exactness_is_reliable_accurate() {
        let (v, est) = run(|x| x * x * x, 0.0, 1.0);
        assert!((est.e2n / est.q2n).abs() <= E_THR);
        assert_eq!(v.kind, VerdictKind::ReliableAccurate);
        assert_eq!(v.flag(), 0);
    }

    #[test]
    fn steep_monotone_power_is_inaccurate_monotone() {
        // x^1023 on [0, 1]: monotone with an estimate larger than half the sum
        let (v, est) = run(|x: f64| x.powi(1023), 0.0, 1.0);
        assert_eq!(v.kind, VerdictKind::InaccurateMonotone);
        assert!(est.e2n > 0.5 * est.q2n.abs());
        assert_ne!(v.flag(), 0);
    }

    #[test]
    fn lambda_branches() {
        let diag0 = ReliabilityDiagnosis::default();
        let mk = |lambda| ReliabilityDiagnosis {
            lambda,
            reports: Vec::new(),
        };
        // synthetic estimate that skips neither rule: rho above threshold,
        // non-monotone profile
        let r = QuadRule::gk10_21();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let f = |x: f64| (40.0 * x + 0.3).sin() + 0.2;
        let xs = map_knots(&r, &iv);
        let mut inner = [0.0; INNER_KNOTS];
        for k in 0..INNER_KNOTS {
            inner[k] = f(xs[k + 1]);
        }
        let est = local_estimate(&r, &inner, &iv, f64::EPSILON).unwrap();
        assert!((est.e2n / est.q2n).abs() > E_THR);
        let profile = IntegrandProfile::build(f, &iv, &r, &est).unwrap();
        assert!(!profile.is_monotone());

        let v = decide(&est, &profile, Some(&diag0)).unwrap();
        assert_eq!(v.kind, VerdictKind::ReliableValidated);
        for lam in [1, 2] {
            let v = decide(&est, &profile, Some(&mk(lam))).unwrap();
            assert_eq!(v.kind, VerdictKind::SuspectIsolatedPoint);
        }
        for lam in [3, 5, 40] {
            let v = decide(&est, &profile, Some(&mk(lam))).unwrap();
            assert_eq!(v.kind, VerdictKind::Unresolved);
        }
        assert!(decide(&est, &profile, None).is_err());
    }

    #[test]
    fn decreasing_estimate_never_revokes_reliability() {
        // sweep e2n downward with everything else fixed: once reliable,
        // always reliable
        let r = QuadRule::gk10_21();
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let f = |x: f64| (40.0 * x + 0.3).sin() + 0.2;
        let xs = map_knots(&r, &iv);
        let mut inner = [0.0; INNER_KNOTS];
        for k in 0..INNER_KNOTS {
            inner[k] = f(xs[k + 1]);
        }
        let mut est = local_estimate(&r, &inner, &iv, f64::EPSILON).unwrap();
        let profile = IntegrandProfile::build(f, &iv, &r, &est).unwrap();
        let diag = analyze_profile(&profile);
        let mut seen_reliable = false;
        let mut e = est.q2n.abs(); // start large
        while e > 1e-18 {
            est.e2n = e;
            let v = decide(&est, &profile, Some(&diag)).unwrap();
            if seen_reliable {
                assert!(v.is_reliable());
            }
            seen_reliable |= v.is_reliable();
            e *= 0.5;
        }
        assert!(seen_reliable);
    }
}
