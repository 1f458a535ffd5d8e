//! Numeric modes shared by every module.
//!
//! Three carriers implement [`Scalar`]: plain `f64`, the fixed-width binary
//! big float [`Ext`] (mantissa width chosen at the type level) and the exact
//! [`Rational`]. Only the first two also implement [`Real`], which adds the
//! transcendental operations needed for orthonormalization.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field-like scalar used for polynomial coefficients and matrix entries.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic is exact (zero tests need no tolerance).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Short tag naming the numeric mode, e.g. `f64` or `ext256`.
    fn precision_tag() -> String;
    /// Decimal rendering that [`Scalar::parse_decimal`] reads back.
    fn to_decimal_string(&self) -> String;
    fn parse_decimal(s: &str) -> Option<Self>;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

/// Scalars with square roots, logarithms and exponentials.
pub trait Real: Scalar {
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    /// Distance from one to the next representable number.
    fn epsilon() -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn precision_tag() -> String {
        "f64".to_string()
    }
    fn to_decimal_string(&self) -> String {
        format!("{:.16e}", self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

type BinFloat = FBig<HalfEven, 2>;

/// Binary floating point number with a `BITS`-bit mantissa.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Ext<const BITS: usize>(BinFloat);

impl<const BITS: usize> Ext<BITS> {
    fn wrap(x: BinFloat) -> Self {
        Ext(x.with_precision(BITS).value())
    }

    fn from_ibig(n: IBig) -> Self {
        Self::wrap(BinFloat::from(n))
    }
}

impl<const BITS: usize> fmt::Debug for Ext<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl<const BITS: usize> fmt::Display for Ext<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

macro_rules! ext_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<const BITS: usize> $trait for Ext<BITS> {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                Ext::wrap(self.0 $op rhs.0)
            }
        }
    };
}

ext_binop!(Add, add, +);
ext_binop!(Sub, sub, -);
ext_binop!(Mul, mul, *);
ext_binop!(Div, div, /);

impl<const BITS: usize> Neg for Ext<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Ext(-self.0)
    }
}

impl<const BITS: usize> Scalar for Ext<BITS> {
    const EXACT: bool = false;

    fn zero() -> Self {
        Self::wrap(BinFloat::ZERO)
    }
    fn one() -> Self {
        Self::wrap(BinFloat::ONE)
    }
    fn from_f64(x: f64) -> Self {
        let v = BinFloat::try_from(x).expect("finite f64");
        Self::wrap(v)
    }
    fn from_i64(n: i64) -> Self {
        Self::from_ibig(IBig::from(n))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn precision_tag() -> String {
        format!("ext{}", BITS)
    }
    fn to_decimal_string(&self) -> String {
        if self.0 == BinFloat::ZERO {
            return "0".to_string();
        }
        format!("{:e}", self.0.to_decimal().value())
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let dec = DBig::from_str(s.trim()).ok()?;
        let repr = dec.repr();
        let mantissa = Self::from_ibig(repr.significand().clone());
        let exponent = repr.exponent();
        let scale = Self::from_ibig(IBig::from(10u8).pow(exponent.unsigned_abs()));
        Some(if exponent >= 0 {
            mantissa * scale
        } else {
            mantissa / scale
        })
    }
}

impl<const BITS: usize> Real for Ext<BITS> {
    fn sqrt(&self) -> Self {
        Self::wrap(self.0.sqrt())
    }
    fn ln(&self) -> Self {
        Self::wrap(self.0.ln())
    }
    fn exp(&self) -> Self {
        Self::wrap(self.0.exp())
    }
    fn epsilon() -> Self {
        Self::wrap(BinFloat::from_parts(IBig::ONE, 1 - BITS as isize))
    }
}

/// Exact rational arithmetic.
#[derive(Clone, PartialEq, PartialOrd, Eq, Ord)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rational {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);
rat_binop!(Div, div, /);

impl Neg for Rational {
    type Output = Self;
    fn neg(self) -> Self {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_f64(x: f64) -> Self {
        Rational(BigRational::from_float(x).expect("finite f64"))
    }
    fn from_i64(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn precision_tag() -> String {
        "rational".to_string()
    }
    fn to_decimal_string(&self) -> String {
        self.0.to_string()
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(r) = BigRational::from_str(s) {
            return Some(Rational(r));
        }
        parse_decimal_exact(s).map(Rational)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
}

/// `[-]digits[.digits][e[+-]digits]` as an exact rational.
fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{}{}", int, frac);
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let shift = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let r = if shift >= 0 {
        BigRational::from_integer(num * pow)
    } else {
        BigRational::new(num, pow)
    };
    Some(if neg { -r } else { r })
}

/// Runtime selection of the numeric mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Pick `f64` unless the input's dynamic range demands more.
    Auto,
    F64,
    /// Extended binary precision with at least this many mantissa bits.
    Extended(u32),
}

/// Mantissa widths that have a monomorphized [`Ext`] instance.
pub const SUPPORTED_EXTENDED_BITS: [u32; 4] = [128, 256, 512, 1024];

/// Dynamic range beyond which `Auto` switches to extended precision.
pub const AUTO_EXTENDED_RANGE: f64 = 1e12;

/// Width used when `Auto` escalates.
pub const AUTO_EXTENDED_BITS: u32 = 256;

impl Precision {
    /// Rounds an extended request up to a supported width.
    pub fn supported_bits(bits: u32) -> Option<u32> {
        SUPPORTED_EXTENDED_BITS.iter().copied().find(|&b| b >= bits)
    }

    /// Resolves `Auto` against the dynamic range of the input values.
    pub fn resolve(self, dynamic_range: f64) -> Precision {
        match self {
            Precision::Auto if !(dynamic_range <= AUTO_EXTENDED_RANGE) => {
                Precision::Extended(AUTO_EXTENDED_BITS)
            }
            Precision::Auto => Precision::F64,
            other => other,
        }
    }

    pub fn tag(self) -> String {
        match self {
            Precision::Auto => "auto".to_string(),
            Precision::F64 => "f64".to_string(),
            Precision::Extended(b) => format!("ext{}", b),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    /// Accepts `auto`, `f64`, `extN`, `ext:N`, `extended:N` or `extended(N)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "auto" => return Ok(Precision::Auto),
            "f64" | "float64" | "double" => return Ok(Precision::F64),
            _ => {}
        }
        let digits = t
            .strip_prefix("extended")
            .or_else(|| t.strip_prefix("ext"))
            .map(|rest| rest.trim_matches(|c| c == ':' || c == '(' || c == ')' || c == '='))
            .ok_or_else(|| format!("unknown precision `{}`", s))?;
        let bits: u32 = digits
            .parse()
            .map_err(|_| format!("bad extended precision width `{}`", s))?;
        if bits < 128 {
            return Err(format!("extended precision needs at least 128 bits, got {}", bits));
        }
        Precision::supported_bits(bits)
            .map(Precision::Extended)
            .ok_or_else(|| format!("extended precision above 1024 bits is not supported: {}", bits))
    }
}

/// Runs `$body` with the type alias `$t` bound to the scalar selected by
/// a resolved [`Precision`] (`Auto` behaves like `F64`).
#[macro_export]
macro_rules! with_precision {
    ($prec:expr, $t:ident => $body:expr) => {{
        match $prec {
            $crate::scalar::Precision::Auto | $crate::scalar::Precision::F64 => {
                type $t = f64;
                $body
            }
            $crate::scalar::Precision::Extended(bits) if bits <= 128 => {
                type $t = $crate::scalar::Ext<128>;
                $body
            }
            $crate::scalar::Precision::Extended(bits) if bits <= 256 => {
                type $t = $crate::scalar::Ext<256>;
                $body
            }
            $crate::scalar::Precision::Extended(bits) if bits <= 512 => {
                type $t = $crate::scalar::Ext<512>;
                $body
            }
            $crate::scalar::Precision::Extended(_) => {
                type $t = $crate::scalar::Ext<1024>;
                $body
            }
        }
    }};
}
