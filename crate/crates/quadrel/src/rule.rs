//! The Gauss-Kronrod 10-21 rule: knot/weight tables, quadrature sums and the
//! three local error estimates (genuine GK, QUADPACK-rescaled, roundoff floor).

use crate::error::{Error, Result};

/// Half-order of the rule: 10-point Gauss base, 21-point Kronrod extension.
pub const HALF_ORDER: usize = 10;
/// Number of inner quadrature knots, 2n + 1.
pub const INNER_KNOTS: usize = 21;
/// Inner knots plus the two interval endpoints.
pub const PROFILE_POINTS: usize = 23;

/// Uniform-distribution spacing threshold on [-1, 1], 2/(2n + 3).
pub const D_AV: f64 = 2.0 / (PROFILE_POINTS as f64);

/// Empirical roundoff multiplier from QUADPACK, tau_0.
pub const ROUNDOFF_FACTOR: f64 = 50.0;

// Positive abscissas of the 21-point Kronrod rule in decreasing order
// (QUADPACK dqk21 tables). Even positions (0-based) are Kronrod extension
// points, odd positions are the Gauss-10 abscissas.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// A finite integration interval with cached midpoint and half-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Interval {
            a,
            b,
            c: 0.5 * (b + a),
            h: 0.5 * (b - a),
        })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// The immutable GK 10-21 rule data: reduced knots y_i for i = -10..=10,
/// the 21-point Kronrod weights and the embedded Gauss-10 weights over the
/// odd-index knot subset.
#[derive(Debug, Clone)]
pub struct QuadRule {
    reduced_knots: [f64; INNER_KNOTS],
    fine_weights: [f64; INNER_KNOTS],
    /// (slot into the 21-knot arrays, Gauss weight) for knots -9, -7, ..., 9.
    coarse: [(usize, f64); HALF_ORDER],
    pub d_av: f64,
}

impl QuadRule {
    /// Builds the GK 10-21 rule from the embedded QUADPACK tables.
    pub fn gk10_21() -> Self {
        let mut y = [0.0; INNER_KNOTS];
        let mut w = [0.0; INNER_KNOTS];
        for i in 0..=HALF_ORDER {
            y[HALF_ORDER + i] = XGK[HALF_ORDER - i];
            y[HALF_ORDER - i] = -XGK[HALF_ORDER - i];
            w[HALF_ORDER + i] = WGK[HALF_ORDER - i];
            w[HALF_ORDER - i] = WGK[HALF_ORDER - i];
        }
        let mut coarse = [(0usize, 0.0f64); HALF_ORDER];
        let mut k = 0;
        // Gauss subset sits at odd reduced indices: -9, -7, ..., 9 (Eq. form
        // with gamma = 1 for an open rule).
        for i in (1..=9).step_by(2) {
            let wg = WG[(9 - i) / 2];
            coarse[k] = (HALF_ORDER - i, wg);
            coarse[k + 1] = (HALF_ORDER + i, wg);
            k += 2;
        }
        coarse.sort_unstable_by_key(|&(slot, _)| slot);
        QuadRule {
            reduced_knots: y,
            fine_weights: w,
            coarse,
            d_av: D_AV,
        }
    }

    /// Reduced knot y_i; `slot` runs 0..21 corresponding to i = -10..=10.
    pub fn reduced_knot(&self, slot: usize) -> f64 {
        self.reduced_knots[slot]
    }

    pub fn reduced_knots(&self) -> &[f64; INNER_KNOTS] {
        &self.reduced_knots
    }

    pub fn fine_weights(&self) -> &[f64; INNER_KNOTS] {
        &self.fine_weights
    }

    pub fn coarse_subset(&self) -> &[(usize, f64); HALF_ORDER] {
        &self.coarse
    }

    /// True if the inner knot in `slot` lies in a dense discretization region:
    /// both adjacent reduced spacings (endpoint samples at +-1 included as
    /// neighbours) are below d_av.
    pub fn is_dense(&self, slot: usize) -> bool {
        let left = if slot == 0 { -1.0 } else { self.reduced_knots[slot - 1] };
        let right = if slot + 1 == INNER_KNOTS { 1.0 } else { self.reduced_knots[slot + 1] };
        let y = self.reduced_knots[slot];
        (y - left) < self.d_av && (right - y) < self.d_av
    }
}

impl Default for QuadRule {
    fn default() -> Self {
        Self::gk10_21()
    }
}

/// Per-inner-knot dense flags (slots 0..21 for i = -10..=10).
pub fn dense_region_flags(rule: &QuadRule) -> [bool; INNER_KNOTS] {
    let mut out = [false; INNER_KNOTS];
    for (slot, flag) in out.iter_mut().enumerate() {
        *flag = rule.is_dense(slot);
    }
    out
}

/// All 23 profile abscissas for `iv`: a, the 21 mapped knots x_i = c + h y_i,
/// then b.
pub fn map_knots(rule: &QuadRule, iv: &Interval) -> [f64; PROFILE_POINTS] {
    let mut xs = [0.0; PROFILE_POINTS];
    xs[0] = iv.a;
    for (k, &y) in rule.reduced_knots.iter().enumerate() {
        xs[k + 1] = iv.c + iv.h * y;
    }
    xs[PROFILE_POINTS - 1] = iv.b;
    xs
}

/// Neumaier compensated summation.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Fine (21-point Kronrod) and coarse (10-point Gauss) quadrature sums over
/// `iv` from the 21 inner-knot samples.
pub fn quad_sums(rule: &QuadRule, samples: &[f64; INNER_KNOTS], iv: &Interval) -> Result<(f64, f64)> {
    for (index, v) in samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteKnot { index });
        }
    }
    let q2n = iv.h
        * compensated_sum(
            samples
                .iter()
                .zip(rule.fine_weights.iter())
                .map(|(&f, &w)| w * f),
        );
    let qn = iv.h * compensated_sum(rule.coarse.iter().map(|&(slot, w)| w * samples[slot]));
    Ok((q2n, qn))
}

/// The paper's combined local estimate for one subrange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEstimate {
    pub q2n: f64,
    pub qn: f64,
    pub f_bar: f64,
    /// Q_2n[|f - f_bar|], the oscillation area around the mean line.
    pub delta: f64,
    pub e_ggk: f64,
    pub e_qdp: f64,
    pub e_roff: f64,
    pub e2n: f64,
    /// Q_2n[|f|].
    pub abs_sum: f64,
}

/// QUADPACK damped-rescaled estimate: delta * min((200 e_ggk / delta)^1.5, 1),
/// with the delta = 0 limit taken as 0.
pub fn qdp_estimate(e_ggk: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        delta * ((200.0 * e_ggk / delta).powf(1.5)).min(1.0)
    }
}

/// Attainable-accuracy floor imposed by machine precision.
pub fn roundoff_floor(abs_sum: f64, eps0: f64) -> f64 {
    ROUNDOFF_FACTOR * eps0 * abs_sum
}

/// Combined local error estimate.
pub fn combined_estimate(e_ggk: f64, e_qdp: f64, e_roff: f64) -> f64 {
    e_roff.max(e_ggk.min(e_qdp))
}

/// Computes the full local estimate from the 21 inner-knot samples.
pub fn local_estimate(
    rule: &QuadRule,
    samples: &[f64; INNER_KNOTS],
    iv: &Interval,
    eps0: f64,
) -> Result<LocalEstimate> {
    let (q2n, qn) = quad_sums(rule, samples, iv)?;
    let f_bar = q2n / iv.length();
    let delta = iv.h
        * compensated_sum(
            samples
                .iter()
                .zip(rule.fine_weights.iter())
                .map(|(&f, &w)| w * (f - f_bar).abs()),
        );
    let abs_sum = iv.h
        * compensated_sum(
            samples
                .iter()
                .zip(rule.fine_weights.iter())
                .map(|(&f, &w)| w * f.abs()),
        );
    let e_ggk = (q2n - qn).abs();
    let e_qdp = qdp_estimate(e_ggk, delta);
    let e_roff = roundoff_floor(abs_sum, eps0);
    let e2n = combined_estimate(e_ggk, e_qdp, e_roff);
    Ok(LocalEstimate {
        q2n,
        qn,
        f_bar,
        delta,
        e_ggk,
        e_qdp,
        e_roff,
        e2n,
        abs_sum,
    })
}
