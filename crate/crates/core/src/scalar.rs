//! Scalar abstractions. `Real` covers both floating point and exact rational
//! arithmetic; `Float` adds the transcendental operations needed by quadrature.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FloatConst, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Real:
    Num + Clone + Debug + PartialOrd + Neg<Output = Self> + Send + Sync + 'static
{
    /// True for exact (rational) arithmetic.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Exact types convert the binary value of `x` exactly; `None` for non-finite input.
    fn from_double(x: f64) -> Option<Self>;

    fn approx_f64(&self) -> f64;

    fn magnitude(&self) -> Self;

    /// Accepts decimal (`-1.25`, `3e-2`) and fraction (`7/3`) literals.
    fn parse_literal(s: &str) -> Option<Self>;

    /// Formats so that `parse_literal` returns the identical value.
    fn to_literal(&self) -> String;

    /// Zero test relative to `scale`: exact for rationals, a few ulps for floats.
    fn negligible(&self, scale: &Self) -> bool;
}

pub trait Float:
    Real + num_traits::Float + num_traits::NumAssign + FloatConst + FromPrimitive + Copy + Display + LowerExp
{
    /// Converts an `f64` constant.
    fn c(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    fn cu(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("representable integer")
    }
}

fn parse_float_literal(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        return Some(p / q);
    }
    s.parse().ok()
}

impl Real for f64 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_double(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn approx_f64(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn parse_literal(s: &str) -> Option<Self> {
        parse_float_literal(s)
    }
    fn to_literal(&self) -> String {
        format!("{:?}", self)
    }
    fn negligible(&self, scale: &Self) -> bool {
        self.abs() <= 64.0 * f64::EPSILON * scale.abs().max(f64::MIN_POSITIVE)
    }
}

impl Float for f64 {}

impl Real for f32 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn from_double(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }
    fn approx_f64(&self) -> f64 {
        *self as f64
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn parse_literal(s: &str) -> Option<Self> {
        parse_float_literal(s).map(|v| v as f32)
    }
    fn to_literal(&self) -> String {
        format!("{:?}", self)
    }
    fn negligible(&self, scale: &Self) -> bool {
        self.abs() <= 64.0 * f32::EPSILON * scale.abs().max(f32::MIN_POSITIVE)
    }
}

impl Float for f32 {}

fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

impl Real for BigRational {
    const EXACT: bool = true;
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_double(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn parse_literal(s: &str) -> Option<Self> {
        match s.split_once('/') {
            Some((p, q)) => {
                let p = parse_decimal_exact(p)?;
                let q = parse_decimal_exact(q)?;
                (!q.is_zero()).then(|| p / q)
            }
            None => parse_decimal_exact(s),
        }
    }
    fn to_literal(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }
}

/// Converts between scalar types through the closest common representation.
pub fn convert<A: Real, B: Real>(x: &A) -> B {
    if A::EXACT && B::EXACT {
        // Both exact: go through the literal form, which is lossless.
        return B::parse_literal(&x.to_literal()).expect("exact literal round trip");
    }
    B::from_double(x.approx_f64()).expect("finite value")
}
