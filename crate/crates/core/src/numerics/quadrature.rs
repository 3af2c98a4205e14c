use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid<T: Scalar>(values: &[T], h: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = values[1..n - 1].iter().copied().sum();
            h * (inner + T::lit(0.5) * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoid rule of `f(i)` over indices `0..n` with spacing `h`, without materialising samples.
pub fn trapezoid_by<T: Scalar, F: FnMut(usize) -> T>(n: usize, h: T, mut f: F) -> T {
    if n < 2 {
        return T::zero();
    }
    let mut acc = T::lit(0.5) * (f(0) + f(n - 1));
    for i in 1..n - 1 {
        acc += f(i);
    }
    acc * h
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, intervals: usize) -> T {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / T::from_usize_exact(n);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc += w * f(a + h * T::from_usize_exact(i));
    }
    acc * h / T::lit(3.0)
}

/// Simpson value together with a Richardson error estimate `|S_n - S_{n/2}| / 15` plus a
/// rounding floor proportional to the integrand magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonEstimate<T> {
    pub value: T,
    pub error_bound: T,
}

pub fn simpson_with_bound<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, intervals: usize) -> SimpsonEstimate<T> {
    let n = intervals.max(4).div_ceil(4) * 4;
    let h = (b - a) / T::from_usize_exact(n);
    let samples: Vec<T> = (0..=n).map(|i| f(a + h * T::from_usize_exact(i))).collect();
    let rule = |stride: usize| {
        let m = n / stride;
        let hs = h * T::from_usize_exact(stride);
        let mut acc = samples[0] + samples[n];
        for i in 1..m {
            let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            acc += w * samples[i * stride];
        }
        acc * hs / T::lit(3.0)
    };
    let fine = rule(1);
    let coarse = rule(2);
    let magnitude: T = samples.iter().map(|v| v.abs()).sum::<T>() * h;
    let rounding = T::lit(64.0) * T::epsilon() * magnitude.max(T::min_positive_value());
    SimpsonEstimate { value: fine, error_bound: (fine - coarse).abs() / T::lit(15.0) + rounding }
}

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss10<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> T {
    let c = T::lit(0.5) * (a + b);
    let r = T::lit(0.5) * (b - a);
    let mut acc = T::zero();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        let dx = r * T::lit(*x);
        acc += T::lit(*w) * (f(c - dx) + f(c + dx));
    }
    acc * r
}

/// Composite ten-point Gauss–Legendre with `panels` equal panels.
pub fn gauss_panels<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, panels: usize) -> T {
    let p = panels.max(1);
    let h = (b - a) / T::from_usize_exact(p);
    (0..p)
        .map(|i| {
            let lo = a + h * T::from_usize_exact(i);
            gauss10(&mut f, lo, lo + h)
        })
        .sum()
}

/// Adaptive bisection driven by ten-point Gauss–Legendre. Starts from `panels` equal panels and
/// splits any panel whose two halves disagree with the whole by more than its length share of
/// `max(abs_tol, rel_tol·|coarse total|)`. Fails when `max_depth` is exhausted.
pub fn adaptive_gauss<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    panels: usize,
    abs_tol: T,
    rel_tol: T,
    max_depth: usize,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let p = panels.max(1);
    let h = (b - a) / T::from_usize_exact(p);
    let mut stack: Vec<(T, T, T, usize)> = Vec::new();
    for i in (0..p).rev() {
        let lo = a + h * T::from_usize_exact(i);
        let hi = if i + 1 == p { b } else { lo + h };
        let whole = gauss10(&mut f, lo, hi);
        stack.push((lo, hi, whole, 0));
    }
    let total_len = (b - a).abs();
    // the relative part of the tolerance is measured against the coarse total, so panels where
    // the integrand is negligible (or only resolved to root-solver noise) are accepted
    let coarse: T = stack.iter().map(|e| e.2).sum();
    let budget = abs_tol.max(rel_tol * coarse.abs());
    let mut total = T::zero();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = T::lit(0.5) * (lo + hi);
        let left = gauss10(&mut f, lo, mid);
        let right = gauss10(&mut f, mid, hi);
        let refined = left + right;
        let share = (hi - lo).abs() / total_len;
        let tol = (budget * share).max(rel_tol * refined.abs());
        if !refined.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{}, {}]", lo.as_f64(), hi.as_f64())));
        }
        if (refined - whole).abs() <= tol {
            total += refined;
        } else if depth >= max_depth && (refined - whole).abs() <= T::lit(1e-3) * budget {
            // panel too small to refine further and its discrepancy is negligible overall
            total += refined;
        } else if depth >= max_depth {
            return Err(Error::Quadrature { a: lo.as_f64(), b: hi.as_f64(), estimate: (refined - whole).abs().as_f64() });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}
