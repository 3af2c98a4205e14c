use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Safeguarded Newton iteration for a strictly increasing function on `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`. `f` returns the value and the derivative.
///
/// Newton steps that leave the current bracket fall back to bisection. The iteration
/// runs to machine precision; the result is accepted only if `|f(x)| <= tolerance * scale`.
pub fn newton_increasing<T, F>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    guess: T,
    tolerance: T,
    scale: T,
    what: &'static str,
) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> (T, T),
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::NotBracketed {
            what,
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: f64::NAN,
            f_hi: f64::NAN,
        });
    }
    let (lo0, hi0) = (lo, hi);
    let eps = T::epsilon();
    let four = T::lit(4.0);
    let half = T::lit(0.5);
    let mut x = if guess >= lo && guess <= hi { guess } else { half * (lo + hi) };
    let mut fx = T::zero();
    let mut converged = false;
    for _ in 0..200 {
        let (v, dv) = f(x);
        fx = v;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{what}: f({}) = {}", x.as_f64(), v.as_f64())));
        }
        if v == T::zero() {
            converged = true;
            break;
        }
        if v < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - v / dv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = half * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        let floor = four * eps * T::one().max(x.abs());
        if step <= floor || hi - lo <= floor {
            fx = f(x).0;
            converged = true;
            break;
        }
    }
    let tol = tolerance * scale;
    if converged && fx.abs() <= tol {
        return Ok(x);
    }
    let (f_lo, f_hi) = (f(lo0).0, f(hi0).0);
    if f_lo > T::zero() || f_hi < T::zero() {
        return Err(Error::NotBracketed {
            what,
            lo: lo0.as_f64(),
            hi: hi0.as_f64(),
            f_lo: f_lo.as_f64(),
            f_hi: f_hi.as_f64(),
        });
    }
    Err(Error::NoConvergence {
        what,
        iterations: 200,
        residual: fx.abs().as_f64(),
        tolerance: tol.as_f64(),
    })
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub fn golden_max<T: Scalar, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, iterations: usize) -> (T, T) {
    let r = T::lit(0.618_033_988_749_894_9);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` over `[a, b]`: dense scan followed by golden-section refinement around
/// the best sample.
pub fn scan_max<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, samples: usize) -> (T, T) {
    let n = samples.max(3);
    let h = (b - a) / T::from_usize_exact(n - 1);
    let mut best = (a, f(a));
    for i in 1..n {
        let x = a + h * T::from_usize_exact(i);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = golden_max(&mut f, lo, hi, 80);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}
