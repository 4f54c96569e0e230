//! Adaptive Gauss–Kronrod quadrature (7–15 pair).
//!
//! Bisection-based adaptive scheme over a finite interval: the interval with
//! the largest error estimate is split first, QUADPACK-style, until the
//! summed error meets the absolute or relative tolerance. The error of each
//! panel uses the standard (200·|K15−G7|)^{3/2} rescaling against the
//! integral of |f − mean|.

use std::collections::BinaryHeap;
use std::fmt;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_27,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Weights of the embedded 7-point Gauss rule (at XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Value with an attached absolute-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

/// Tolerances and the subdivision budget for the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

/// Quadrature failure: the budget ran out before the tolerance was met.
/// Carries the achieved estimate so callers can decide whether it is usable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureError {
    pub achieved: Estimate,
    pub subdivisions: usize,
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quadrature did not converge after {} subdivisions (value={}, error bound={})",
            self.subdivisions, self.achieved.value, self.achieved.abs_error
        )
    }
}

impl std::error::Error for QuadratureError {}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    // fv layout: 0..7 are ±XGK pairs (even k: node k/2 negative side), 14 center
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    let mut res_abs = 0.0;
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let lo = f(center - half * x);
        let hi = f(center + half * x);
        fv[2 * j] = lo;
        fv[2 * j + 1] = hi;
        kronrod += WGK[j] * (lo + hi);
        res_abs += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let fc = f(center);
    fv[14] = fc;
    kronrod += WGK[7] * fc;
    res_abs += WGK[7] * fc.abs();
    gauss += WG[3] * fc;

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let min_err = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && min_err > err {
        err = min_err;
    }
    Panel { a, b, value, error: err }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    integrate_segmented(f, &[a, b], settings)
}

/// Adaptive integral over the union of segments `[points[0], points[1]],
/// [points[1], points[2]], …`. Seeding the panels at known kink locations
/// (support edges of shifted CDFs) keeps the subdivision count small.
pub fn integrate_segmented<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    assert!(points.len() >= 2, "need at least one segment");
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        debug_assert!(w[0] <= w[1]);
        if w[0] == w[1] {
            continue;
        }
        let p = gk15(&f, w[0], w[1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    let mut subdivisions = points.len() - 2;
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(Estimate {
                value: total,
                abs_error: total_err,
            });
        }
        if subdivisions >= settings.max_subdivisions {
            return Err(QuadratureError {
                achieved: Estimate {
                    value: total,
                    abs_error: total_err,
                },
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; accept its estimate
            if heap.is_empty() {
                return Ok(Estimate {
                    value: total,
                    abs_error: total_err,
                });
            }
            subdivisions += 1;
            continue;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}
