//! Globally adaptive 10/21-point Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WG10: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

/// Integral estimate with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One 21-point Kronrod rule on `[a, b]`; the error is the Kronrod/Gauss
/// difference.
pub fn gauss_kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK21[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK21[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK21[j] * pair;
        if j % 2 == 1 {
            gauss += WG10[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
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
        self.est.error.total_cmp(&other.est.error)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            max_segments: 20_000,
        }
    }
}

/// Result of an adaptive run: the estimate and the final partition, sorted
/// by left endpoint, with per-segment estimates.
pub struct Adaptive {
    pub estimate: Estimate,
    pub partition: Vec<(f64, f64, Estimate)>,
}

/// Bisects the segment with the largest error estimate until the summed
/// error meets `max(abs_tol, rel_tol * |I|)` or the segment budget runs out.
/// `breakpoints` seeds the initial partition and must be increasing.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    options: AdaptiveOptions,
) -> Adaptive {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let est = gauss_kronrod21(f, w[0], w[1]);
            value += est.value;
            error += est.error;
            heap.push(Segment { a: w[0], b: w[1], est });
        }
    }
    while error > options.abs_tol.max(options.rel_tol * value.abs()) && heap.len() < options.max_segments {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod21(f, worst.a, mid);
        let right = gauss_kronrod21(f, mid, worst.b);
        value += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        heap.push(Segment { a: worst.a, b: mid, est: left });
        heap.push(Segment { a: mid, b: worst.b, est: right });
    }
    let mut partition: Vec<_> = heap.into_iter().map(|s| (s.a, s.b, s.est)).collect();
    partition.sort_by(|x, y| x.0.total_cmp(&y.0));
    // re-sum in order for a deterministic value
    let value = partition.iter().map(|p| p.2.value).sum();
    let error = partition.iter().map(|p| p.2.error).sum();
    Adaptive {
        estimate: Estimate { value, error },
        partition,
    }
}

/// `integrate_adaptive` over `[a, b]` with breakpoints that double in width
/// away from `a`, so that both the scale near `a` and a long tail are
/// resolved from the start.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, options: AdaptiveOptions) -> Adaptive {
    integrate_adaptive(f, &geometric_breakpoints(a, b), options)
}

/// `a, a + d, a + 2d, a + 4d, ..., b` with `d` far below the interval width
/// and below `|a|`.
pub fn geometric_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let width = b - a;
    if !(width > 0.0) {
        return vec![a, b];
    }
    let anchor = if a != 0.0 { a.abs().min(width) } else { width };
    let mut step = anchor * 2f64.powi(-24);
    let mut points = vec![a];
    while a + step < b && points.len() < 2_000 {
        points.push(a + step);
        step *= 2.0;
    }
    points.push(b);
    points
}
