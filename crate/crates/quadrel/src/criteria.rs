//! Consistency criteria (I)-(VI) over an integrand profile and the
//! ill-conditioning pointer lambda.
//!
//! Each criterion inspects one structural aspect of the profile: refinement
//! stability of the extrema (I), alternation around the mean line (IIa, IIb),
//! refinement stability of the mean-line crossings (III), lateral derivative
//! consistency at isolated extrema (IV), curvature sign constancy (V), and
//! divided-difference smoothness inside monotonicity subranges (VI).

use crate::profile::{coarse_extrema, IntegrandProfile, KnotClass};
use crate::rule::PROFILE_POINTS;

/// Order-of-magnitude factor of the type-2 alternation (area) test.
pub const T1: f64 = 10.0;
/// Divided-difference jump threshold far from inflection points.
pub const T_JMP: f64 = 10.0;
/// Neighbour-amplitude comparability bound for the type-2 alternation test.
pub const IIB_AMPLITUDE_SPREAD: f64 = 3.0;
/// Extrema closer than this many knots are not isolated (criteria IV, V).
pub const ISOLATION_RADIUS: usize = 3;
/// Relative degeneracy floor for divided-difference ratios away from
/// inflection neighbourhoods, as a fraction of the subrange's dominant slope.
pub const REL_SLOPE_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionId {
    I,
    IIa,
    IIb,
    III,
    IV,
    V,
    VI,
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CriterionId::I => "I",
            CriterionId::IIa => "IIa",
            CriterionId::IIb => "IIb",
            CriterionId::III => "III",
            CriterionId::IV => "IV",
            CriterionId::V => "V",
            CriterionId::VI => "VI",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Where an infringement was found, in profile point indices (0..=22).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Locus {
    Knot(usize),
    KnotSide(usize, Side),
    /// Point index pair: a monotonicity subrange, crossing gap or
    /// divided-difference pair span.
    Subrange(usize, usize),
}

impl Locus {
    /// Representative abscissa of the locus within `profile`.
    pub fn abscissa(&self, profile: &IntegrandProfile) -> f64 {
        match *self {
            Locus::Knot(p) | Locus::KnotSide(p, _) => profile.abscissas[p],
            Locus::Subrange(s, e) => 0.5 * (profile.abscissas[s] + profile.abscissas[e]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub locus: Locus,
    /// The compared quantities behind the verdict.
    pub detail: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ReliabilityDiagnosis {
    pub lambda: usize,
    pub reports: Vec<CriterionReport>,
}

impl ReliabilityDiagnosis {
    pub fn count(&self, id: CriterionId) -> usize {
        self.reports.iter().filter(|r| r.criterion == id).count()
    }
}

fn is_suspect_class(c: KnotClass) -> bool {
    matches!(c, KnotClass::Gray | KnotClass::Sensitive)
}

/// Criterion (I): refinement of the coarse sampling must not create
/// supplementary gray or sensitive extrema inside the dense knot regions.
/// Counted per region; the outermost excess extrema are the reported ones.
pub fn criterion_i(profile: &IntegrandProfile, prior_coarse_extrema: &[usize]) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let center = PROFILE_POINTS / 2;
    for &(lo, hi) in &profile.regions {
        let fine: Vec<usize> = profile
            .extrema
            .iter()
            .copied()
            .filter(|&p| p >= lo && p <= hi)
            .collect();
        let coarse: Vec<usize> = prior_coarse_extrema
            .iter()
            .copied()
            .filter(|&p| p >= lo && p <= hi)
            .collect();
        if fine.len() <= coarse.len() {
            continue;
        }
        let excess = fine.len() - coarse.len();
        let mut candidates: Vec<usize> = fine
            .iter()
            .copied()
            .filter(|p| !coarse.contains(p) && is_suspect_class(profile.knot_class_unchecked(*p)))
            .collect();
        candidates.sort_by_key(|&p| std::cmp::Reverse(p.abs_diff(center)));
        let mut picked: Vec<usize> = candidates.into_iter().take(excess).collect();
        picked.sort_unstable();
        for p in picked {
            out.push(CriterionReport {
                criterion: CriterionId::I,
                locus: Locus::Knot(p),
                detail: vec![fine.len() as f64, coarse.len() as f64],
            });
        }
    }
    out
}

fn subrange_touches_line(profile: &IntegrandProfile, s: usize, e: usize) -> bool {
    profile.deviation(s) * profile.deviation(e) <= 0.0
}

/// Strictly growing deviation stepping outward from the interior extremum,
/// never touching or crossing the line.
fn end_subrange_diverges(profile: &IntegrandProfile, s: usize, e: usize, leading: bool) -> bool {
    let seq: Vec<f64> = if leading {
        (s..=e).rev().map(|p| profile.deviation(p)).collect()
    } else {
        (s..=e).map(|p| profile.deviation(p)).collect()
    };
    let first = seq[0];
    if first == 0.0 {
        return false;
    }
    let sign = first.signum();
    seq.iter().all(|v| v.signum() == sign && *v != 0.0)
        && seq.windows(2).all(|w| w[1].abs() > w[0].abs())
}

/// Criterion (IIa): every inner monotonicity subrange intersects the mean
/// line; the two end subranges do not diverge from it.
pub fn criterion_iia(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let n = profile.monotone_subranges.len();
    if n == 1 {
        // fully monotone profile: the single subrange always crosses its own
        // weighted mean
        return out;
    }
    for (j, &(s, e)) in profile.monotone_subranges.iter().enumerate() {
        let leading = j == 0;
        let trailing = j == n - 1;
        if leading || trailing {
            if end_subrange_diverges(profile, s, e, leading) {
                out.push(CriterionReport {
                    criterion: CriterionId::IIa,
                    locus: Locus::Subrange(s, e),
                    detail: vec![profile.deviation(s), profile.deviation(e)],
                });
            }
        } else if !subrange_touches_line(profile, s, e) {
            out.push(CriterionReport {
                criterion: CriterionId::IIa,
                locus: Locus::Subrange(s, e),
                detail: vec![profile.deviation(s), profile.deviation(e)],
            });
        }
    }
    out
}

/// Signed compound-trapezoid area between profile and mean line over the lobe
/// containing point index `p` (bounded by the flanking interpolated crossings
/// or the profile ends).
fn lobe_area(profile: &IntegrandProfile, p: usize, crossings: &[(f64, usize, usize)]) -> f64 {
    let mut lo: Option<(f64, usize)> = None; // (crossing x, left flank index)
    let mut hi: Option<(f64, usize)> = None;
    for &(xz, pl, pr) in crossings {
        if pr <= p {
            lo = Some((xz, pl));
        }
        if pl >= p && hi.is_none() {
            hi = Some((xz, pl));
        }
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(PROFILE_POINTS + 2);
    let (lo_x, start) = match lo {
        Some((xz, pl)) => {
            pts.push((xz, 0.0));
            (xz, pl)
        }
        None => {
            pts.push((profile.abscissas[0], profile.deviation(0)));
            (profile.abscissas[0], 0)
        }
    };
    let (hi_x, end) = match hi {
        Some((xz, pl)) => (xz, pl),
        None => (f64::INFINITY, PROFILE_POINTS - 1),
    };
    // a crossing gap may span on-line samples; keep only the points that lie
    // strictly inside the lobe so the polygon stays ordered
    for q in start + 1..=end {
        let x = profile.abscissas[q];
        if x > lo_x && x < hi_x {
            pts.push((x, profile.deviation(q)));
        }
    }
    if let Some((xz, _)) = hi {
        pts.push((xz, 0.0));
    }
    pts.windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

/// Criterion (IIb): a gray or sensitive inner extremum whose adjacent
/// subranges satisfy the type-1 criterion must stay sufficiently far from the
/// mean line. Confinement means both a smaller deviation than the two
/// neighbouring extrema (themselves of comparable amplitude) and a lobe area
/// an order of magnitude below the neighbouring lobes combined.
pub fn criterion_iib(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let iia: Vec<(usize, usize)> = criterion_iia(profile)
        .into_iter()
        .filter_map(|r| match r.locus {
            Locus::Subrange(s, e) => Some((s, e)),
            _ => None,
        })
        .collect();
    let crossings = profile.crossing_positions();
    let ext = &profile.extrema;
    let mut bounds = Vec::with_capacity(ext.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(ext);
    bounds.push(PROFILE_POINTS - 1);
    for (j, &p) in ext.iter().enumerate() {
        if !is_suspect_class(profile.knot_class_unchecked(p)) {
            continue;
        }
        let (nl, nr) = (bounds[j], bounds[j + 2]);
        if iia.contains(&(nl, p)) || iia.contains(&(p, nr)) {
            continue;
        }
        let d0 = profile.deviation(p).abs();
        let dl = profile.deviation(nl).abs();
        let dr = profile.deviation(nr).abs();
        if !(d0 < dl && d0 < dr) {
            continue;
        }
        if dl.max(dr) > IIB_AMPLITUDE_SPREAD * dl.min(dr) {
            continue;
        }
        let a0 = lobe_area(profile, p, &crossings);
        let al = lobe_area(profile, nl, &crossings);
        let ar = lobe_area(profile, nr, &crossings);
        if T1 * a0.abs() < (al + ar).abs() {
            out.push(CriterionReport {
                criterion: CriterionId::IIb,
                locus: Locus::Knot(p),
                detail: vec![a0, al, ar],
            });
        }
    }
    out
}

/// Criterion (III): over each dense knot region the fine and coarse samplings
/// must agree on the number of mean-line crossings. Every fine crossing
/// without a matching coarse crossing is reported.
pub fn criterion_iii(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    for &(lo, hi) in &profile.regions {
        let fine_idx: Vec<usize> = (lo..=hi).collect();
        let coarse_idx: Vec<usize> = crate::profile::coarse_indices()
            .filter(|&p| p >= lo && p <= hi)
            .collect();
        let fine = profile.crossings(&fine_idx);
        let coarse = profile.crossings(&coarse_idx);
        if fine.len() == coarse.len() {
            continue;
        }
        if fine.len() > coarse.len() {
            // pair each coarse crossing with one fine crossing in its gap;
            // the leftovers are the refinement-created ones
            let mut matched = vec![false; fine.len()];
            for &(cl, cr) in &coarse {
                for (k, &(fl, fr)) in fine.iter().enumerate() {
                    if !matched[k] && cl <= fl && fr <= cr {
                        matched[k] = true;
                        break;
                    }
                }
            }
            for (k, &(fl, fr)) in fine.iter().enumerate() {
                if !matched[k] {
                    out.push(CriterionReport {
                        criterion: CriterionId::III,
                        locus: Locus::Subrange(fl, fr),
                        detail: vec![fine.len() as f64, coarse.len() as f64],
                    });
                }
            }
        } else {
            out.push(CriterionReport {
                criterion: CriterionId::III,
                locus: Locus::Subrange(lo, hi),
                detail: vec![fine.len() as f64, coarse.len() as f64],
            });
        }
    }
    out
}

/// No other extremum within the isolation radius, and the lateral stencil
/// stays inside the profile.
fn is_isolated(profile: &IntegrandProfile, p: usize, side: Side) -> bool {
    match side {
        Side::Right => {
            if p < 1 || p + 2 > PROFILE_POINTS - 1 {
                return false;
            }
        }
        Side::Left => {
            if p < 2 || p + 1 > PROFILE_POINTS - 1 {
                return false;
            }
        }
    }
    let lo = p.saturating_sub(ISOLATION_RADIUS);
    let hi = (p + ISOLATION_RADIUS).min(PROFILE_POINTS - 1);
    !profile.extrema.iter().any(|&q| q != p && q >= lo && q <= hi)
}

/// Lateral derivative estimates at the extremum `p`: the cubic-interpolant
/// (fine) value, the two-cell secant (coarse) value, and the curvature sign
/// product of the same stencil.
pub fn lateral_derivatives(profile: &IntegrandProfile, p: usize, side: Side) -> (f64, f64, f64) {
    let x = &profile.abscissas;
    let f = &profile.values;
    match side {
        Side::Right => {
            let (xm1, x0, x1, x2) = (x[p - 1], x[p], x[p + 1], x[p + 2]);
            let (fm1, f0, f1, f2) = (f[p - 1], f[p], f[p + 1], f[p + 2]);
            let d10 = (f1 - f0) / (x1 - x0);
            let d20 = (f2 - f0) / (x2 - x0);
            let d0m1 = (f0 - fm1) / (x0 - xm1);
            let dd21 = (d20 - d10) / (x2 - x1);
            let dd1m1 = (d10 - d0m1) / (x1 - xm1);
            let fine = d10 - (x1 - x0) / (x2 - xm1) * ((x0 - xm1) * dd21 + (x2 - x0) * dd1m1);
            (fine, d20, (d20 - d10) * (d10 - d0m1))
        }
        Side::Left => {
            let (xm2, xm1, x0, x1) = (x[p - 2], x[p - 1], x[p], x[p + 1]);
            let (fm2, fm1, f0, f1) = (f[p - 2], f[p - 1], f[p], f[p + 1]);
            let d0m1 = (f0 - fm1) / (x0 - xm1);
            let d0m2 = (f0 - fm2) / (x0 - xm2);
            let d10 = (f1 - f0) / (x1 - x0);
            let ddm1m2 = (d0m1 - d0m2) / (xm1 - xm2);
            let dd1m1 = (d10 - d0m1) / (x1 - xm1);
            let fine = d0m1 + (x0 - xm1) / (x1 - xm2) * ((x1 - x0) * ddm1m2 + (x0 - xm2) * dd1m1);
            (fine, d0m2, (d0m2 - d0m1) * (d0m1 - d10))
        }
    }
}

/// Criterion (IV): at an isolated gray/sensitive extremum located at a coarse
/// sampling knot inside a dense region, the fine lateral derivative estimate
/// must be closer to zero than the coarse one.
pub fn criterion_iv(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    for &p in &profile.extrema {
        if !profile.dense_flags[p] {
            continue;
        }
        if p % 2 != 0 {
            // the coarse sampling (even profile indices) must contain x0 for
            // the coarse-side estimate to exist at the extremum
            continue;
        }
        if !is_suspect_class(profile.knot_class_unchecked(p)) {
            continue;
        }
        for side in [Side::Right, Side::Left] {
            if !is_isolated(profile, p, side) {
                continue;
            }
            let (fine, coarse, _) = lateral_derivatives(profile, p, side);
            if fine.abs() >= coarse.abs() {
                out.push(CriterionReport {
                    criterion: CriterionId::IV,
                    locus: Locus::KnotSide(p, side),
                    detail: vec![fine, coarse],
                });
            }
        }
    }
    out
}

/// Criterion (V): the second-order divided differences flanking an isolated
/// gray/sensitive extremum must agree in sign.
pub fn criterion_v(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    for &p in &profile.extrema {
        if !is_suspect_class(profile.knot_class_unchecked(p)) {
            continue;
        }
        for side in [Side::Right, Side::Left] {
            if !is_isolated(profile, p, side) {
                continue;
            }
            let (_, _, product) = lateral_derivatives(profile, p, side);
            if product <= 0.0 {
                out.push(CriterionReport {
                    criterion: CriterionId::V,
                    locus: Locus::KnotSide(p, side),
                    detail: vec![product],
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum InflectionKind {
    DerivativeMax,
    DerivativeMin,
}

/// Criterion (VI): absence of jumps between successive first-order divided
/// differences inside each monotonicity subrange spanning at least three
/// knots. Near inflection points the threshold is halved (first-derivative
/// maximum) or relaxed five-fold (first-derivative minimum), and the decay of
/// the dominant slope across a derivative maximum is checked two cells out.
pub fn criterion_vi(profile: &IntegrandProfile) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let xs = &profile.abscissas;
    let vals = &profile.values;
    let f_scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps0 = f64::EPSILON;

    for &(s, e) in &profile.monotone_subranges {
        if e - s < 2 {
            continue;
        }
        let nd = e - s;
        let d: Vec<f64> = (s..e)
            .map(|k| (vals[k + 1] - vals[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let d_max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if d_max == 0.0 {
            continue;
        }
        // inflection marks: sign change of the second differences, classified
        // by whether |d| peaks or dips at the shared slope
        let c: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
        let mut marks: Vec<(usize, InflectionKind)> = Vec::new();
        for k in 0..c.len().saturating_sub(1) {
            if c[k] * c[k + 1] < 0.0 {
                let mid = k + 1;
                let kind = if d[mid].abs() >= d[mid - 1].abs().max(d[mid + 1].abs()) {
                    InflectionKind::DerivativeMax
                } else {
                    InflectionKind::DerivativeMin
                };
                marks.push((mid, kind));
            }
        }
        let near_mark = |k: usize| marks.iter().any(|&(m, _)| k + 1 >= m && k <= m + 1);
        let mark_kind = |k: usize| marks.iter().find(|&&(m, _)| m == k).map(|&(_, kind)| kind);

        let mut fired_diffs = vec![false; nd];
        for k in 0..nd - 1 {
            let kinds = [mark_kind(k), mark_kind(k + 1)];
            let t = if kinds.contains(&Some(InflectionKind::DerivativeMin)) {
                5.0 * T_JMP
            } else if kinds.contains(&Some(InflectionKind::DerivativeMax)) {
                0.5 * T_JMP
            } else {
                T_JMP
            };
            let floor_exempt = near_mark(k) || near_mark(k + 1);
            // subrange boundaries are extremal points of the sampling; the
            // divided difference next to one may legitimately vanish, so only
            // the direction that does not divide by it is checked
            let mut fired = None;
            for up in [true, false] {
                if up && k == 0 {
                    continue;
                }
                if !up && k + 1 == nd - 1 {
                    continue;
                }
                let (num, den, h_den) = if up {
                    (d[k + 1].abs(), d[k].abs(), xs[s + k + 1] - xs[s + k])
                } else {
                    (d[k].abs(), d[k + 1].abs(), xs[s + k + 2] - xs[s + k + 1])
                };
                let mut floor = crate::rule::ROUNDOFF_FACTOR * eps0 * f_scale / h_den;
                if !floor_exempt {
                    floor = floor.max(REL_SLOPE_FLOOR * d_max);
                }
                if den < floor {
                    continue;
                }
                if num / den > t {
                    fired = Some(num / den);
                    break;
                }
            }
            if let Some(ratio) = fired {
                fired_diffs[k] = true;
                fired_diffs[k + 1] = true;
                out.push(CriterionReport {
                    criterion: CriterionId::VI,
                    locus: Locus::Subrange(s + k, s + k + 2),
                    detail: vec![d[k], d[k + 1], ratio],
                });
            }
        }

        // lateral decay across a first-derivative maximum: the dominant slope
        // must not dwarf the slopes two cells away. A mark whose adjacent
        // pairs already reported is a detected jump, not a decay pattern.
        for &(m, kind) in &marks {
            if kind != InflectionKind::DerivativeMax || fired_diffs[m] {
                continue;
            }
            for mm in [m.wrapping_sub(2), m + 2] {
                if mm >= nd || mm == 0 || mm == nd - 1 {
                    continue;
                }
                let den = d[mm].abs();
                let h_den = xs[s + mm + 1] - xs[s + mm];
                if den < crate::rule::ROUNDOFF_FACTOR * eps0 * f_scale / h_den {
                    continue;
                }
                if d[m].abs() / den > T_JMP {
                    let (lo, hi) = (m.min(mm), m.max(mm));
                    out.push(CriterionReport {
                        criterion: CriterionId::VI,
                        locus: Locus::Subrange(s + lo, s + hi + 1),
                        detail: vec![d[m], d[mm]],
                    });
                }
            }
        }
    }
    out
}

/// Runs criteria I, IIa, IIb, III, IV, V, VI in order; lambda is the total
/// infringement count.
pub fn analyze(profile: &IntegrandProfile, prior_coarse_extrema: &[usize]) -> ReliabilityDiagnosis {
    let mut reports = Vec::new();
    reports.extend(criterion_i(profile, prior_coarse_extrema));
    reports.extend(criterion_iia(profile));
    reports.extend(criterion_iib(profile));
    reports.extend(criterion_iii(profile));
    reports.extend(criterion_iv(profile));
    reports.extend(criterion_v(profile));
    reports.extend(criterion_vi(profile));
    ReliabilityDiagnosis {
        lambda: reports.len(),
        reports,
    }
}

/// Convenience wrapper computing the coarse extrema from the profile itself.
pub fn analyze_profile(profile: &IntegrandProfile) -> ReliabilityDiagnosis {
    analyze(profile, &coarse_extrema(profile))
}
