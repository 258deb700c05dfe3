//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let centre = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut abs_sum = fc.abs() * T::lit(WGK[7]);
    let mut fvals = [(T::zero(), T::zero()); 7];
    for (j, fv) in fvals.iter_mut().enumerate() {
        let dx = half * T::lit(XGK[j]);
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        *fv = (f1, f2);
        let w = T::lit(WGK[j]);
        kronrod = kronrod + w * (f1 + f2);
        abs_sum = abs_sum + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = kronrod * T::half();
    let mut asc = T::lit(WGK[7]) * (fc - mean).abs();
    for (j, (f1, f2)) in fvals.iter().enumerate() {
        asc = asc + T::lit(WGK[j]) * ((*f1 - mean).abs() + (*f2 - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != T::zero() && error != T::zero() {
        let scaled = (T::lit(200.0) * error / asc).powf(T::lit(1.5));
        error = asc * scaled.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * abs_sum * half.abs();
    if floor > T::min_positive_value() {
        error = error.max(floor);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]` (either orientation) to absolute tolerance `abs_tol`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: T::zero() });
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
        let value = segments.iter().fold(T::zero(), |s, seg| s + seg.value);
        let error = segments.iter().fold(T::zero(), |s, seg| s + seg.error);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure { estimate: f64::INFINITY, tolerance: abs_tol.as_f64() });
        }
        if error <= abs_tol {
            return Ok(Estimate { value, error });
        }
        let (worst, _) =
            segments.iter().enumerate().max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap()).expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) * T::half();
        if segments.len() >= MAX_SEGMENTS || mid == seg.a || mid == seg.b {
            return Err(Error::QuadratureFailure { estimate: error.as_f64(), tolerance: abs_tol.as_f64() });
        }
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}
