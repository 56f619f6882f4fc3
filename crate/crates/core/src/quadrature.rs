//! Globally adaptive Gauss–Kronrod (7/15) integration.
//!
//! Each segment is integrated by the 15-point Kronrod rule, and the error is
//! estimated as the difference from the embedded 7-point Gauss rule. The
//! segment with the largest error is bisected until the summed estimate
//! meets the target or the subdivision budget runs out. Segment values are
//! summed in left-to-right order so results do not depend on refinement
//! history.

use serde::{Deserialize, Serialize};

use crate::function::{Bivariate, EvalError};
use crate::scalar::Scalar;

// Kronrod abscissae on [-1, 1] (positive half, descending) and weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub target_abs_error: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { target_abs_error: 1e-10, max_subdivisions: 1000 }
    }
}

impl QuadratureConfig {
    pub fn new(target_abs_error: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        if target_abs_error.is_nan() || target_abs_error <= 0.0 || max_subdivisions == 0 {
            return Err(QuadratureError::InvalidConfig(format!(
                "target_abs_error = {target_abs_error}, max_subdivisions = {max_subdivisions}"
            )));
        }
        Ok(Self { target_abs_error, max_subdivisions })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integration did not converge after {subdivisions} subdivisions (estimate {value}, error {error_estimate})")]
    NonConvergence { value: f64, error_estimate: f64, subdivisions: usize },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(String),
    #[error("non-finite integrand value {value} at s = {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("integration requires float mode")]
    Mode,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |s: f64| -> Result<f64, QuadratureError> {
        let v = f(s)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { at: s, value: v })
        }
    };
    let fc = eval(centre)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = eval(centre - half * x)? + eval(centre + half * x)?;
        k += w * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Ok(Segment { a, b, value: k * half, error: ((k - g) * half).abs() })
}

/// Integrates `f` over `[a, b]` to the configured absolute error.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Integral { value: 0.0, error_estimate: 0.0, subdivisions: 0 });
    }
    let mut segments = vec![kronrod(&mut f, a, b)?];
    let mut subdivisions = 0;
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= cfg.target_abs_error {
            break;
        }
        let worst = segments
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if s.error > segments[best].error { i } else { best });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        if subdivisions >= cfg.max_subdivisions || mid <= seg.a || mid >= seg.b {
            segments.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Err(QuadratureError::NonConvergence {
                value: segments.iter().map(|s| s.value).sum(),
                error_estimate: error,
                subdivisions,
            });
        }
        let left = kronrod(&mut f, seg.a, mid)?;
        let right = kronrod(&mut f, mid, seg.b)?;
        segments[worst] = left;
        segments.push(right);
        subdivisions += 1;
    }
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Integral {
        value: segments.iter().map(|s| s.value).sum(),
        error_estimate: segments.iter().map(|s| s.error).sum(),
        subdivisions,
    })
}

/// `∫ₐᵇ H(s,s) ds` for `0 ≤ a ≤ b ≤ 1`, float mode only.
pub fn integrate_diagonal<H>(
    h: &H,
    a: &Scalar,
    b: &Scalar,
    cfg: &QuadratureConfig,
) -> Result<(Scalar, f64), QuadratureError>
where
    H: Bivariate + ?Sized,
{
    let (Scalar::Float(lo), Scalar::Float(hi)) = (a, b) else {
        return Err(QuadratureError::Mode);
    };
    let (lo, hi) = (*lo, *hi);
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(QuadratureError::InvalidInterval { a: lo, b: hi });
    }
    let trace = |s: f64| -> Result<f64, QuadratureError> {
        let x = Scalar::Float(s);
        Ok(h.eval(&x, &x)?.to_f64())
    };
    let r = integrate(trace, lo, hi, cfg)?;
    Ok((Scalar::Float(r.value), r.error_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FloatBivariate;
    use proptest::prelude::*;

    // Σ 1/(n!(2n+1)) to 30 terms, frozen from an independent 40-digit evaluation.
    const INT_EXP_S2: f64 = 1.462_651_745_907_181_6;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn series_oracle() -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for n in 0..30 {
            if n > 0 {
                fact *= n as f64;
            }
            sum += 1.0 / (fact * (2 * n + 1) as f64);
        }
        sum
    }

    #[test]
    fn linear_trace() {
        let h = FloatBivariate(|a: f64, b: f64| a + b);
        let (v, err) = integrate_diagonal(&h, &Scalar::Float(0.0), &Scalar::Float(1.0), &cfg()).unwrap();
        assert!((v.to_f64() - 1.0).abs() <= 1e-10);
        assert!(err <= 1e-10);
    }

    #[test]
    fn gaussian_growth_matches_series() {
        assert!((series_oracle() - INT_EXP_S2).abs() < 1e-15);
        let h = FloatBivariate(|a: f64, b: f64| (a * b).exp());
        let (v, _) = integrate_diagonal(&h, &Scalar::Float(0.0), &Scalar::Float(1.0), &cfg()).unwrap();
        assert!((v.to_f64() - INT_EXP_S2).abs() <= 1e-10);
    }

    #[test]
    fn empty_interval_is_exactly_zero() {
        let h = FloatBivariate(|a: f64, _b: f64| a.exp());
        let (v, err) = integrate_diagonal(&h, &Scalar::Float(0.3), &Scalar::Float(0.3), &cfg()).unwrap();
        assert_eq!(v, Scalar::Float(0.0));
        assert_eq!(err, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let h = FloatBivariate(|a: f64, _b: f64| a);
        let r = integrate_diagonal(&h, &Scalar::Float(0.5), &Scalar::Float(0.2), &cfg());
        assert!(matches!(r, Err(QuadratureError::InvalidInterval { .. })));
        let r = integrate_diagonal(&h, &Scalar::ratio(0, 1), &Scalar::ratio(1, 2), &cfg());
        assert!(matches!(r, Err(QuadratureError::Mode)));
        assert!(QuadratureConfig::new(0.0, 10).is_err());
        assert!(QuadratureConfig::new(1e-10, 0).is_err());
    }

    #[test]
    fn singular_trace_does_not_converge() {
        let h = FloatBivariate(|a: f64, b: f64| 1.0 / (a + b));
        let r = integrate_diagonal(&h, &Scalar::Float(0.0), &Scalar::Float(1.0), &QuadratureConfig::new(1e-10, 200).unwrap());
        assert!(matches!(r, Err(QuadratureError::NonConvergence { subdivisions: 200, .. })), "{r:?}");
    }

    #[test]
    fn mild_singularity_converges() {
        // ∫₀¹ 1/√s ds = 2
        let r = integrate(|s: f64| Ok(1.0 / s.sqrt()), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() <= 1e-10, "{r:?}");
    }

    proptest! {
        #[test]
        fn cubic_exactness(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, c3 in -3.0f64..3.0,
                           a in 0.0f64..1.0, w in 0.0f64..1.0) {
            let b = a + (1.0 - a) * w;
            let p = |s: f64| c0 + s * (c1 + s * (c2 + s * c3));
            let antider = |s: f64| s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)));
            let r = integrate(|s| Ok(p(s)), a, b, &cfg()).unwrap();
            prop_assert!((r.value - (antider(b) - antider(a))).abs() <= 1e-13);
        }

        #[test]
        fn additivity(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
            let mut v = [x, y, z];
            v.sort_by(f64::total_cmp);
            let [a, b, c] = v;
            let f = |s: f64| Ok((3.0 * s).sin() / (1.0 + s * s) + (s * s).exp());
            let cfg = cfg();
            let ac = integrate(f, a, c, &cfg).unwrap().value;
            let ab = integrate(f, a, b, &cfg).unwrap().value;
            let bc = integrate(f, b, c, &cfg).unwrap().value;
            prop_assert!((ac - ab - bc).abs() <= 3.0 * cfg.target_abs_error);
        }
    }
}
