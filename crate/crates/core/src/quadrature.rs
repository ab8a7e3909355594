//! Adaptive Gauss–Kronrod (7-15) integration on finite intervals, cutoff
//! integration of decaying integrands on `[a, ∞)`, and iterated 2D
//! integration with the semi-infinite direction innermost.
//!
//! All accumulators use compensated summation and intervals are summed in
//! left-to-right order, so identical inputs give bit-identical outputs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integration tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Upper truncation `Λ` of semi-infinite integrals.
    pub cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 10_000,
            cutoff: 100.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_cutoff(self, cutoff: f64) -> Self {
        Self { cutoff, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("rel_tol = {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("abs_tol = {}", self.abs_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidQuadrature("max_subdivisions must be >= 1".into()));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("cutoff = {}", self.cutoff)));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Tolerances for inner integrals of an iterated integral.
    fn inner(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

/// Result of a finite-interval integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// Result of a cutoff integration over `[a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailedEstimate {
    /// Integral over `[a, Λ]`.
    pub value: f64,
    pub error: f64,
    /// `|∫_Λ^{2Λ} f|`, a proxy for the discarded tail.
    pub tail: f64,
    pub subdivisions: usize,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the Gauss 7-point nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale),
    })
}

fn splittable(seg: &Segment) -> bool {
    let mid = 0.5 * (seg.a + seg.b);
    let width = seg.b - seg.a;
    mid > seg.a && mid < seg.b && width > 1e3 * f64::EPSILON * seg.a.abs().max(seg.b.abs())
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`.
///
/// On success `error ≤ max(abs_tol, rel_tol·|value|)`. When the subdivision
/// budget runs out (or intervals shrink to rounding level) the best
/// estimate is returned inside [`Error::QuadratureBudget`].
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidQuadrature(format!(
            "interval [{a}, {b}] must be finite and ordered"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }

    let first = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        if error <= spec.target(value) {
            // running totals drift; confirm with an ordered compensated sum
            let (v, e) = totals(heap.iter().chain(frozen.iter()));
            value = v;
            error = e;
            if error <= spec.target(value) {
                break;
            }
        }
        let Some(worst) = heap.pop() else { break };
        if !splittable(&worst) {
            frozen.push(worst);
            continue;
        }
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let (value, error) = totals(heap.iter().chain(frozen.iter()));
    if error > spec.target(value) {
        return Err(Error::QuadratureBudget {
            estimate: value,
            error_bound: error,
            subdivisions,
        });
    }
    Ok(Estimate {
        value,
        error,
        subdivisions,
    })
}

fn totals<'a, I: Iterator<Item = &'a Segment>>(segments: I) -> (f64, f64) {
    let mut segs: Vec<&Segment> = segments.collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: KahanSum = segs.iter().map(|s| s.value).collect();
    let error: KahanSum = segs.iter().map(|s| s.error).collect();
    (value.total(), error.total())
}

/// Integral of a decaying `f` over `[a, Λ]` with `Λ = spec.cutoff`, plus
/// the tail proxy `|∫_Λ^{2Λ} f|`.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, spec: &QuadratureSpec) -> Result<TailedEstimate>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    let cutoff = spec.cutoff;
    if !(a < cutoff) {
        return Err(Error::InvalidQuadrature(format!(
            "lower limit {a} must lie below the cutoff {cutoff}"
        )));
    }
    let body = integrate_1d(&mut f, a, cutoff, spec)?;
    // The tail is small; judge it against the body so it does not chase abs_tol.
    let tail_spec = spec.with_abs_tol(spec.target(body.value).max(spec.abs_tol));
    let tail = integrate_1d(&mut f, cutoff, 2.0 * cutoff, &tail_spec)?;
    Ok(TailedEstimate {
        value: body.value,
        error: body.error,
        tail: tail.value.abs(),
        subdivisions: body.subdivisions + tail.subdivisions,
    })
}

/// Iterated integral `∫_{u₀}^{u₁} du ∫_0^Λ dω f(u, ω)`.
///
/// The inner integral runs at one tenth of the outer tolerances. The
/// reported `tail` is `|∫du ∫_Λ^{2Λ} dω f|`, i.e. the change from doubling
/// the cutoff.
pub fn integrate_2d<F>(f: F, u_range: (f64, f64), spec: &QuadratureSpec) -> Result<TailedEstimate>
where
    F: Fn(f64, f64) -> f64,
{
    spec.validate()?;
    let inner = spec.inner();
    let cutoff = spec.cutoff;
    let mut inner_subdivisions = 0usize;
    let mut failure = None;

    let mut inner_body = |u: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        match integrate_1d(|w| f(u, w), 0.0, cutoff, &inner) {
            Ok(est) => {
                inner_subdivisions += est.subdivisions;
                est.value
            }
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let body = integrate_1d(&mut inner_body, u_range.0, u_range.1, spec);
    if let Some(e) = failure {
        return Err(e);
    }
    let body = body?;

    let tail_spec = spec.with_abs_tol(spec.target(body.value).max(spec.abs_tol));
    let tail_inner = tail_spec.inner();
    let mut failure = None;
    let mut inner_tail = |u: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        match integrate_1d(|w| f(u, w), cutoff, 2.0 * cutoff, &tail_inner) {
            Ok(est) => est.value,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let tail = integrate_1d(&mut inner_tail, u_range.0, u_range.1, &tail_spec);
    if let Some(e) = failure {
        return Err(e);
    }
    let tail = tail?;

    Ok(TailedEstimate {
        value: body.value,
        error: body.error,
        tail: tail.value.abs(),
        subdivisions: body.subdivisions + inner_subdivisions,
    })
}
