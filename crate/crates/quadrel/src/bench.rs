//! Benchmark families, parameter sweeps, accuracy basins, spurious-diagnostic
//! accounting and report emission.
//!
//! Three pipeline variants share the engine: `Alpha` accepts on the QUADPACK
//! estimate alone, `Beta` on the combined estimate with the accuracy skip
//! only, `Gamma` runs the full profile validation.

use std::io::Write;

use crate::adaptive::{integrate, Status};
use crate::criteria::analyze_profile;
use crate::error::{Error, Result};
use crate::profile::IntegrandProfile;
use crate::rule::{local_estimate, map_knots, Interval, LocalEstimate, QuadRule, INNER_KNOTS};
use crate::verdict::{decide, Verdict, VerdictKind, E_THR};

/// Tolerances and budget used by adaptive-mode sweeps.
pub const SWEEP_EPS_REL: f64 = 1e-8;
pub const SWEEP_MAX_SUBDIVISIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    /// x^n over [0, 1].
    Pow,
    /// 1/(1 + x^2) over [0, n].
    Atg,
    /// e^{p(x - x0)} cos(omega x) over [-1, 1].
    C1,
    /// 2 e^{-p x0} cosh(p x) cos(omega x) over [0, 1].
    C2,
    /// e^{p(x - x0)} sin(omega x) over [-1, 1].
    S1,
    /// 2 e^{-p x0} sinh(p x) sin(omega x) over [0, 1].
    S2,
}

impl FamilyId {
    pub fn parse(s: &str) -> Option<FamilyId> {
        match s.to_ascii_lowercase().as_str() {
            "pow" => Some(FamilyId::Pow),
            "atg" => Some(FamilyId::Atg),
            "c1" => Some(FamilyId::C1),
            "c2" => Some(FamilyId::C2),
            "s1" => Some(FamilyId::S1),
            "s2" => Some(FamilyId::S2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Pow => "pow",
            FamilyId::Atg => "atg",
            FamilyId::C1 => "c1",
            FamilyId::C2 => "c2",
            FamilyId::S1 => "s1",
            FamilyId::S2 => "s2",
        }
    }

    pub fn is_oscillatory(&self) -> bool {
        matches!(self, FamilyId::C1 | FamilyId::C2 | FamilyId::S1 | FamilyId::S2)
    }
}

/// A parametric integral family with its closed-form value.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub id: FamilyId,
    /// Exponential slope p of the oscillatory families.
    pub p: f64,
    /// Shift x0 of the oscillatory families.
    pub x0: f64,
    pub grid: std::ops::RangeInclusive<u32>,
}

impl FamilySpec {
    pub fn new(id: FamilyId) -> Self {
        let grid = match id {
            FamilyId::Pow => 0..=1023,
            // n = 0 would degenerate the interval [0, 0]
            FamilyId::Atg => 1..=10_000,
            _ => 0..=6000,
        };
        FamilySpec {
            id,
            p: 1.0,
            x0: -1.0,
            grid,
        }
    }

    pub fn omega(&self, n: u32) -> f64 {
        n as f64 * std::f64::consts::PI / 60.0
    }

    pub fn interval(&self, n: u32) -> Result<Interval> {
        match self.id {
            FamilyId::Pow => Interval::new(0.0, 1.0),
            FamilyId::Atg => Interval::new(0.0, n as f64),
            FamilyId::C1 | FamilyId::S1 => Interval::new(-1.0, 1.0),
            FamilyId::C2 | FamilyId::S2 => Interval::new(0.0, 1.0),
        }
    }

    pub fn integrand(&self, n: u32) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        let (p, x0, w) = (self.p, self.x0, self.omega(n));
        match self.id {
            FamilyId::Pow => {
                let k = n as i32;
                Box::new(move |x: f64| x.powi(k))
            }
            FamilyId::Atg => Box::new(|x: f64| 1.0 / (x * x + 1.0)),
            FamilyId::C1 => Box::new(move |x: f64| (p * (x - x0)).exp() * (w * x).cos()),
            FamilyId::C2 => Box::new(move |x: f64| 2.0 * (-p * x0).exp() * (p * x).cosh() * (w * x).cos()),
            FamilyId::S1 => Box::new(move |x: f64| (p * (x - x0)).exp() * (w * x).sin()),
            FamilyId::S2 => Box::new(move |x: f64| 2.0 * (-p * x0).exp() * (p * x).sinh() * (w * x).sin()),
        }
    }

    /// Closed-form value of the family member.
    pub fn exact(&self, n: u32) -> f64 {
        let (p, x0) = (self.p, self.x0);
        match self.id {
            FamilyId::Pow => 1.0 / (n as f64 + 1.0),
            FamilyId::Atg => (n as f64).atan(),
            FamilyId::C1 | FamilyId::C2 => {
                let w = self.omega(n);
                2.0 * (-p * x0).exp() * (p * p.sinh() * w.cos() + w * p.cosh() * w.sin())
                    / (w * w + p * p)
            }
            FamilyId::S1 | FamilyId::S2 => {
                let w = self.omega(n);
                2.0 * (-p * x0).exp() * (p * p.cosh() * w.sin() - w * p.sinh() * w.cos())
                    / (w * w + p * p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Alpha,
    Beta,
    Gamma,
}

impl Pipeline {
    pub fn parse(s: &str) -> Option<Pipeline> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Some(Pipeline::Alpha),
            "beta" => Some(Pipeline::Beta),
            "gamma" => Some(Pipeline::Gamma),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SingleRule,
    Adaptive,
}

/// Outcome of the subdivision correction pass for one row.
#[derive(Debug, Clone, Copy)]
pub struct CorrectedOutcome {
    pub q: f64,
    pub e: f64,
    pub status: Status,
}

impl CorrectedOutcome {
    pub fn claims_reliable(&self) -> bool {
        self.status == Status::Converged
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub parameter: u32,
    pub est: LocalEstimate,
    pub exact: f64,
    pub verdict: Verdict,
    pub corrected: Option<CorrectedOutcome>,
}

impl SweepRow {
    /// Actual error I - q2n, recomputed on demand.
    pub fn exact_error(&self) -> f64 {
        self.exact - self.est.q2n
    }

    /// |e_Q / I|.
    pub fn eps_q(&self) -> f64 {
        if self.exact == 0.0 {
            if self.exact_error() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.exact_error() / self.exact).abs()
        }
    }

    pub fn rho_qdp(&self) -> f64 {
        relative(self.est.e_qdp, self.est.q2n)
    }

    pub fn rho_2n(&self) -> f64 {
        relative(self.est.e2n, self.est.q2n)
    }

    /// Single-rule spurious diagnostic: flagged reliable with the actual
    /// error above the estimate.
    pub fn is_spurious(&self) -> bool {
        self.verdict.is_reliable() && self.exact_error().abs() > self.est.e2n
    }

    /// Spurious after the correction pass.
    pub fn is_spurious_after_correction(&self) -> bool {
        match &self.corrected {
            Some(c) => c.claims_reliable() && (self.exact - c.q).abs() > c.e,
            None => self.is_spurious(),
        }
    }
}

fn relative(e: f64, q: f64) -> f64 {
    if q == 0.0 {
        if e == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (e / q).abs()
    }
}

fn pipeline_verdict(
    pipeline: Pipeline,
    est: &LocalEstimate,
    profile: &IntegrandProfile,
) -> Result<Verdict> {
    match pipeline {
        Pipeline::Alpha => {
            let ok = if est.q2n != 0.0 {
                (est.e_qdp / est.q2n).abs() <= E_THR
            } else {
                est.e_qdp <= est.e_roff
            };
            Ok(Verdict {
                kind: if ok {
                    VerdictKind::ReliableAccurate
                } else {
                    VerdictKind::Unresolved
                },
                lambda: 0,
            })
        }
        Pipeline::Beta => {
            let ok = if est.q2n != 0.0 {
                (est.e2n / est.q2n).abs() <= E_THR
            } else {
                est.e2n <= est.e_roff
            };
            Ok(Verdict {
                kind: if ok {
                    VerdictKind::ReliableAccurate
                } else {
                    VerdictKind::Unresolved
                },
                lambda: 0,
            })
        }
        Pipeline::Gamma => {
            let diag = analyze_profile(profile);
            decide(est, profile, Some(&diag))
        }
    }
}

/// Runs one family sweep. Single-rule mode applies the rule once per
/// parameter; adaptive mode additionally runs the driver to record whether
/// primary failures are corrected under subdivision.
pub fn run_sweep(family: &FamilySpec, mode: Mode, pipeline: Pipeline) -> Result<Vec<SweepRow>> {
    let rule = QuadRule::gk10_21();
    let eps0 = f64::EPSILON;
    let mut rows = Vec::with_capacity(family.grid.clone().count());
    for n in family.grid.clone() {
        let iv = family.interval(n)?;
        let f = family.integrand(n);
        let xs = map_knots(&rule, &iv);
        let mut inner = [0.0; INNER_KNOTS];
        for k in 0..INNER_KNOTS {
            let v = f(xs[k + 1]);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x: xs[k + 1] });
            }
            inner[k] = v;
        }
        let est = local_estimate(&rule, &inner, &iv, eps0)?;
        let mut vals = [0.0; crate::rule::PROFILE_POINTS];
        vals[0] = f(iv.a);
        vals[crate::rule::PROFILE_POINTS - 1] = f(iv.b);
        vals[1..=INNER_KNOTS].copy_from_slice(&inner);
        let profile = IntegrandProfile::from_samples(&rule, xs, vals, est.f_bar)?;
        let verdict = pipeline_verdict(pipeline, &est, &profile)?;
        let corrected = if mode == Mode::Adaptive {
            let r = integrate(&f, iv, 0.0, SWEEP_EPS_REL, SWEEP_MAX_SUBDIVISIONS)?;
            Some(CorrectedOutcome {
                q: r.q,
                e: r.e,
                status: r.status,
            })
        } else {
            None
        };
        rows.push(SweepRow {
            parameter: n,
            est,
            exact: family.exact(n),
            verdict,
            corrected,
        });
    }
    Ok(rows)
}

/// Accuracy-basin summary of an ordered sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinSummary {
    /// Largest parameter such that every row up to it is flagged reliable;
    /// -1 when the very first row already fails.
    pub n_max: i64,
    /// First parameter at which the monotone-inaccurate rejection fires.
    pub eq22_onset: Option<u32>,
}

pub fn accuracy_basin(rows: &[SweepRow]) -> Result<BasinSummary> {
    if rows.is_empty() {
        return Err(Error::ContractViolation("accuracy_basin needs a non-empty sweep"));
    }
    let mut n_max: i64 = -1;
    for row in rows {
        if row.verdict.is_reliable() {
            n_max = row.parameter as i64;
        } else {
            break;
        }
    }
    let eq22_onset = rows
        .iter()
        .find(|r| r.verdict.kind == VerdictKind::InaccurateMonotone)
        .map(|r| r.parameter);
    Ok(BasinSummary { n_max, eq22_onset })
}

/// (primary failures, failures after subdivision correction).
pub fn spurious_count(rows: &[SweepRow]) -> (usize, usize) {
    let primary = rows.iter().filter(|r| r.is_spurious()).count();
    let corrected = rows
        .iter()
        .filter(|r| r.is_spurious_after_correction())
        .count();
    (primary, corrected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV emission: header plus one line per row, 17 significant digits.
pub fn emit_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "parameter,q2n,I,eps_Q,rho_qdp,rho_2n,lambda,verdict,corrected_verdict"
    )?;
    for r in rows {
        let corrected = match &r.corrected {
            Some(c) => c.status.to_string(),
            None => String::from("-"),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.parameter,
            fmt17(r.est.q2n),
            fmt17(r.exact),
            fmt17(r.eps_q()),
            fmt17(r.rho_qdp()),
            fmt17(r.rho_2n()),
            r.verdict.lambda,
            r.verdict.kind,
            corrected,
        )?;
    }
    Ok(())
}

/// Table-style summary over several sweeps: basin and spurious counts per
/// family.
pub fn emit_table<W: Write>(
    sweeps: &[(FamilyId, Vec<SweepRow>)],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<8} {:>8} {:>12} {:>10} {:>12}",
        "family", "basin", "eq22_onset", "spurious", "corrected"
    )?;
    for (id, rows) in sweeps {
        let basin = accuracy_basin(rows).map_err(|e| std::io::Error::other(e.to_string()))?;
        let (primary, corrected) = spurious_count(rows);
        writeln!(
            out,
            "{:<8} {:>8} {:>12} {:>10} {:>12}",
            id.name(),
            basin.n_max,
            basin
                .eq22_onset
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into()),
            primary,
            corrected,
        )?;
    }
    Ok(())
}

pub fn emit_report<W: Write>(
    rows: &[SweepRow],
    family: FamilyId,
    format: ReportFormat,
    out: &mut W,
) -> std::io::Result<()> {
    if rows.is_empty() {
        return Err(std::io::Error::other("empty sweep"));
    }
    match format {
        ReportFormat::Csv => emit_csv(rows, out),
        ReportFormat::Table => emit_table(&[(family, rows.to_vec())], out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_prefix(id: FamilyId, up_to: u32, mode: Mode, pipeline: Pipeline) -> Vec<SweepRow> {
        let mut fam = FamilySpec::new(id);
        let start = *fam.grid.start();
        fam.grid = start..=up_to;
        run_sweep(&fam, mode, pipeline).unwrap()
    }

    #[test]
    fn pow_small_exponents() {
        let rows = sweep_prefix(FamilyId::Pow, 6, Mode::SingleRule, Pipeline::Gamma);
        // n = 0: constant integrand, exact to roundoff
        assert!((rows[0].est.q2n - 1.0).abs() < 1e-14);
        assert!(rows[0].exact_error().abs() < 1e-14);
        // n = 5: I = 1/6, degree far below the exactness bound
        assert!((rows[5].exact - 1.0 / 6.0).abs() < 1e-16);
        assert!(rows[5].eps_q() < 1e-13);
    }

    #[test]
    fn oscillatory_closed_form_at_zero_frequency() {
        let fam = FamilySpec::new(FamilyId::C1);
        let expected = std::f64::consts::E * std::f64::consts::E - 1.0;
        assert!((fam.exact(0) - expected).abs() / expected < 1e-15);
    }

    #[test]
    fn paired_families_share_closed_forms() {
        let c1 = FamilySpec::new(FamilyId::C1);
        let c2 = FamilySpec::new(FamilyId::C2);
        let s1 = FamilySpec::new(FamilyId::S1);
        let s2 = FamilySpec::new(FamilyId::S2);
        for n in (0..=6000).step_by(97) {
            let a = c1.exact(n);
            let b = c2.exact(n);
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300));
            let a = s1.exact(n);
            let b = s2.exact(n);
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300));
        }
    }

    #[test]
    fn equivalent_forms_integrate_identically() {
        // C1 over [-1,1] and C2 over [0,1] describe the same integral; the
        // driver must agree with the closed form for both
        for id in [FamilyId::C1, FamilyId::C2] {
            let fam = FamilySpec::new(id);
            let n = 240;
            let f = fam.integrand(n);
            let r = integrate(&f, fam.interval(n).unwrap(), 0.0, 1e-10, 500).unwrap();
            let exact = fam.exact(n);
            assert!(
                (r.q - exact).abs() <= 1e-9 * exact.abs().max(1.0),
                "{id:?}: {} vs {exact}",
                r.q
            );
        }
    }

    #[test]
    fn basin_sentinel_and_eq22() {
        let rows = sweep_prefix(FamilyId::Pow, 250, Mode::SingleRule, Pipeline::Gamma);
        let basin = accuracy_basin(&rows).unwrap();
        assert!(basin.n_max > 0);
        assert!(basin.eq22_onset.is_some());

        // degenerate: every row unreliable gives the empty-basin sentinel
        let mut bad = rows.clone();
        for r in &mut bad {
            r.verdict = Verdict {
                kind: VerdictKind::Unresolved,
                lambda: 5,
            };
        }
        assert_eq!(accuracy_basin(&bad).unwrap().n_max, -1);
        // nothing claimed reliable means nothing spurious
        assert_eq!(spurious_count(&bad), (0, 0));
        assert!(accuracy_basin(&[]).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = sweep_prefix(FamilyId::Pow, 0, Mode::SingleRule, Pipeline::Gamma);
        let mut buf = Vec::new();
        emit_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("parameter,q2n,I,"));

        let rows = sweep_prefix(FamilyId::Pow, 1023, Mode::SingleRule, Pipeline::Gamma);
        let mut buf = Vec::new();
        emit_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1025);
    }

    #[test]
    fn cusps_flip_the_exact_error_sign() {
        // sharp minima of eps_Q along the ATG sweep sit where the exact error
        // changes sign
        let rows = sweep_prefix(FamilyId::Atg, 400, Mode::SingleRule, Pipeline::Gamma);
        let mut cusps = 0;
        for k in 1..rows.len() - 1 {
            let (prev, here, next) = (&rows[k - 1], &rows[k], &rows[k + 1]);
            if here.eps_q() < 0.1 * prev.eps_q() && here.eps_q() < 0.1 * next.eps_q() {
                cusps += 1;
                assert!(
                    prev.exact_error().signum() != next.exact_error().signum(),
                    "cusp at n = {} without a sign change",
                    here.parameter
                );
            }
        }
        assert!(cusps > 0, "expected at least one cusp in the ATG sweep");
    }

    #[test]
    fn basin_nesting_across_pipelines() {
        // alpha never accepts beyond beta, beta never beyond gamma
        for id in [FamilyId::Pow, FamilyId::C1] {
            let limit = 700;
            let a = accuracy_basin(&sweep_prefix(id, limit, Mode::SingleRule, Pipeline::Alpha))
                .unwrap()
                .n_max;
            let b = accuracy_basin(&sweep_prefix(id, limit, Mode::SingleRule, Pipeline::Beta))
                .unwrap()
                .n_max;
            let g = accuracy_basin(&sweep_prefix(id, limit, Mode::SingleRule, Pipeline::Gamma))
                .unwrap()
                .n_max;
            assert!(a <= b && b <= g, "{id:?}: {a} {b} {g}");
        }
    }
}
