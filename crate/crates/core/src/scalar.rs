//! Floating-point abstraction shared by every numerical module.
//!
//! All distributions, transforms and solvers are written against [`Scalar`],
//! which is implemented for `f32` and `f64`. Special functions (error
//! function, gamma function, normal quantile) are evaluated in `f64` through
//! `libm` and cast back, so `f32` instantiations inherit `f64` accuracy.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type usable throughout the crate.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Signed
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + rustfft::FftNum
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }

    /// A tolerance no finer than what the type can resolve: `max(tol, 64 ε)`.
    #[inline]
    fn tol(tol: f64) -> Self {
        Self::lit(tol.max(64.0 * Self::epsilon().f64()))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Standard normal cumulative distribution function.
pub fn normal_cdf<S: Scalar>(z: S) -> S {
    let z = z.f64();
    S::lit(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn normal_pdf<S: Scalar>(z: S) -> S {
    (-(z * z) / S::lit(2.0)).exp() / (S::TAU()).sqrt()
}

/// Standard normal quantile: rational initial guess (Acklam) refined by
/// Halley steps on the complementary error function.
pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    let mut x = if u < 0.02425 {
        tail(u)
    } else if u > 1.0 - 0.02425 {
        -tail(1.0 - u)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        // residual in whichever tail is small, to keep relative precision
        let e = if x <= 0.0 {
            0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - u
        } else {
            (1.0 - u) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
        };
        let step = e * (std::f64::consts::TAU.sqrt()) * (x * x / 2.0).exp();
        x -= step / (1.0 + x * step / 2.0);
    }
    x
}

pub fn gamma<S: Scalar>(x: S) -> S {
    S::lit(libm::tgamma(x.f64()))
}

pub fn ln_gamma<S: Scalar>(x: S) -> S {
    S::lit(libm::lgamma(x.f64()))
}

/// Volume of the unit ball in `R^d`: `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume<S: Scalar>(d: usize) -> S {
    let half = S::from_usize_(d) / S::lit(2.0);
    S::PI().powf(half) / gamma(half + S::one())
}

/// Surface area of the unit sphere in `R^d`: `2 π^{d/2} / Γ(d/2)`.
pub fn unit_sphere_area<S: Scalar>(d: usize) -> S {
    let half = S::from_usize_(d) / S::lit(2.0);
    S::lit(2.0) * S::PI().powf(half) / gamma(half)
}

/// `(n-1)!!` for the Gaussian moment `E Z^n`, zero for odd `n`.
pub fn gaussian_raw_moment<S: Scalar>(n: u32) -> S {
    if n % 2 == 1 {
        return S::zero();
    }
    let mut acc = S::one();
    let mut k = n as i64 - 1;
    while k > 1 {
        acc *= S::lit(k as f64);
        k -= 2;
    }
    acc
}

/// Binomial coefficient in floating point.
pub fn binomial<S: Scalar>(n: u32, k: u32) -> S {
    let k = k.min(n - k);
    let mut acc = S::one();
    for i in 0..k {
        acc = acc * S::lit((n - i) as f64) / S::lit((i + 1) as f64);
    }
    acc
}
