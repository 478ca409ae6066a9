//! Globally adaptive Gauss–Kronrod (7/15-point) quadrature.
//!
//! The integrand may return several components at once; they share the same
//! abscissae and the error control acts on their sum. The Lifshitz integrand
//! uses this to carry the TM and TE parts through one pass.

#![allow(clippy::excessive_precision)]

use thiserror::Error;

use crate::summation::CompensatedSum;

// Kronrod abscissae, non-negative half, descending; odd indices are the
// 7-point Gauss nodes.
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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("subdivision limit {limit} reached with error estimate {error:e} (target {target:e})")]
    SubdivisionLimit { limit: usize, error: f64, target: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    /// Error estimate for the sum of the components.
    pub error: f64,
    pub evaluations: usize,
    pub segments: usize,
}

impl<const N: usize> Integral<N> {
    pub fn total(&self) -> f64 {
        self.value.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: f64,
}

fn gk15<F, const N: usize>(f: &F, lo: f64, hi: f64) -> Result<Segment<N>, QuadratureError>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| -> Result<[f64; N], QuadratureError> {
        let v = f(x);
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };
    let total = |v: &[f64; N]| v.iter().sum::<f64>();

    let fc = eval(center)?;
    let mut kronrod = fc.map(|c| c * WGK[7]);
    let mut gauss_total = total(&fc) * WG[3];
    let mut res_abs = total(&fc).abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        for c in 0..N {
            kronrod[c] += WGK[j] * (f1[c] + f2[c]);
        }
        let (t1, t2) = (total(&f1), total(&f2));
        if j % 2 == 1 {
            gauss_total += WG[j / 2] * (t1 + t2);
        }
        res_abs += WGK[j] * (t1.abs() + t2.abs());
        fv1[j] = t1;
        fv2[j] = t2;
    }

    let kronrod_total = total(&kronrod);
    let mean = 0.5 * kronrod_total;
    let mut res_asc = WGK[7] * (total(&fc) - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let value = kronrod.map(|c| c * half);
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut error = ((kronrod_total - gauss_total) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { lo, hi, value, error })
}

/// Integrates `f` over the consecutive intervals delimited by `breakpoints`
/// (at least two, increasing), bisecting the worst segment until the summed
/// error estimate meets `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<F, const N: usize>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_segments: usize,
) -> Result<Integral<N>, QuadratureError>
where
    F: Fn(f64) -> [f64; N],
{
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut segments = Vec::with_capacity(breakpoints.len() + 16);
    for w in breakpoints.windows(2) {
        segments.push(gk15(&f, w[0], w[1])?);
    }
    let mut evaluations = 15 * segments.len();

    loop {
        let (value, error) = summarize(&segments);
        let total: f64 = value.iter().sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                evaluations,
                segments: segments.len(),
            });
        }
        if segments.len() >= max_segments {
            return Err(QuadratureError::SubdivisionLimit {
                limit: max_segments,
                error,
                target,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let seg = segments[worst];
        let mid = 0.5 * (seg.lo + seg.hi);
        if !(mid > seg.lo && mid < seg.hi) {
            // Interval exhausted at machine resolution; accept what we have.
            return Ok(Integral {
                value,
                error,
                evaluations,
                segments: segments.len(),
            });
        }
        segments[worst] = gk15(&f, seg.lo, mid)?;
        segments.insert(worst + 1, gk15(&f, mid, seg.hi)?);
        evaluations += 30;
    }
}

// Segments stay ordered by position, so the sum does not depend on the order
// in which they were refined.
fn summarize<const N: usize>(segments: &[Segment<N>]) -> ([f64; N], f64) {
    let mut value = [0.0; N];
    for (c, slot) in value.iter_mut().enumerate() {
        *slot = segments.iter().map(|s| s.value[c]).collect::<CompensatedSum>().value();
    }
    let error = segments.iter().map(|s| s.error).sum();
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| [x.powi(5) - 2.0 * x], &[0.0, 2.0], Tolerance::relative(1e-12), 50).unwrap();
        assert!((r.value[0] - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert_eq!(r.segments, 1);
    }

    #[test]
    fn exponential_tail() {
        // ∫_0^50 y² e^{-2y} dy = 1/4 − (tail ~ 1e-40)
        let r = integrate(
            |y| [y * y * (-2.0 * y).exp()],
            &[0.0, 10.0, 50.0],
            Tolerance::relative(1e-12),
            200,
        )
        .unwrap();
        assert!((r.value[0] - 0.25).abs() < 1e-14, "{}", r.value[0]);
    }

    #[test]
    fn components_integrated_together() {
        let r = integrate(
            |x| [x.sin(), x.cos()],
            &[0.0, std::f64::consts::PI],
            Tolerance::relative(1e-12),
            100,
        )
        .unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-12);
        assert!(r.value[1].abs() < 1e-12);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let r = integrate(|_| [0.0, 0.0], &[1.0, 51.0], Tolerance::relative(1e-10), 10).unwrap();
        assert_eq!(r.value, [0.0, 0.0]);
        assert_eq!(r.segments, 1);
    }

    #[test]
    fn singular_integrand_hits_limit_or_converges_slowly() {
        let r = integrate(|x: f64| [1.0 / x.sqrt()], &[0.0, 1.0], Tolerance::relative(1e-10), 200).unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-8);
        let err = integrate(|x: f64| [1.0 / x], &[1e-300, 1.0], Tolerance::relative(1e-14), 5);
        assert!(matches!(err, Err(QuadratureError::SubdivisionLimit { .. })));
    }

    #[test]
    fn non_finite_reported() {
        let err = integrate(|x: f64| [1.0 / (x - 0.5)], &[0.0, 1.0], Tolerance::relative(1e-8), 10);
        assert!(matches!(err, Err(QuadratureError::NonFinite { .. })));
    }
}
