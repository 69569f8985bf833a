//! Adaptive Gauss–Kronrod (7/15) quadrature for real and complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

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

// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping criteria for [`integrate`] and [`integrate_complex`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_subintervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-9,
            absolute: 1e-14,
            max_subintervals: 4096,
        }
    }
}

/// Result of an adaptive integration, with the final error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub subintervals: usize,
}

trait Scalar: Copy + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn kronrod<T: Scalar, F: FnMut(f64) -> Result<T>>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod = kronrod + pair * w;
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let diff = (kronrod + gauss * -1.0) * half;
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Segment {
        a,
        b,
        value,
        error: diff.norm(),
    })
}

fn adaptive<T: Scalar, F: FnMut(f64) -> Result<T>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            subintervals: 0,
        });
    }
    let mut segments = vec![kronrod(&mut f, a, b)?];
    loop {
        let total = segments.iter().fold(T::zero(), |acc, s| acc + s.value);
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.absolute.max(tol.relative * total.norm());
        if error <= target {
            return Ok(Estimate {
                value: total,
                error,
                subintervals: segments.len(),
            });
        }
        if segments.len() >= tol.max_subintervals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{a}, {b}]: error estimate {error:.3e} \
                 exceeds target {target:.3e} after {} subintervals",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::Numerical(format!(
                "quadrature interval collapsed near {mid} with error {error:.3e}"
            )));
        }
        segments.push(kronrod(&mut f, seg.a, mid)?);
        segments.push(kronrod(&mut f, mid, seg.b)?);
    }
}

/// Integrate a real function over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    adaptive(f, a, b, tol)
}

/// Integrate a complex-valued function over `[a, b]`.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<Complex64>>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    adaptive(f, a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Ok(x.powi(5) - 3.0 * x * x), -1.0, 2.0, Tolerance::default()).unwrap();
        // ∫ x^5 - 3x^2 = [x^6/6 - x^3] = (64/6 - 8) - (1/6 + 1)
        let exact = 64.0 / 6.0 - 8.0 - (1.0 / 6.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.subintervals, 1);
    }

    #[test]
    fn oscillatory_complex() {
        let k = 137.0;
        let r = integrate_complex(
            |x| Ok(Complex64::from_polar(1.0, k * x)),
            0.0,
            1.0,
            Tolerance::default(),
        )
        .unwrap();
        let exact = (Complex64::from_polar(1.0, k) - 1.0) / Complex64::new(0.0, k);
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn singular_integrand_reports_failure() {
        let tol = Tolerance {
            max_subintervals: 64,
            ..Tolerance::default()
        };
        let err = integrate(|x| Ok(1.0 / x.abs().sqrt().max(1e-300).powi(3)), -1.0, 1.0, tol);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }
}
