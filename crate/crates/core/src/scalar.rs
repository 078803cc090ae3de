//! Coefficient fields used throughout the library.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A field of coefficients.
///
/// Exact computations use [`BigRational`]; `f64`/`f32` are available for
/// quick numerical experiments and [`Fp`] for modular pivot prediction.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    /// The image of an exact rational, or `None` for floats when not representable.
    fn to_rational(&self) -> Option<BigRational>;

    /// Whether arithmetic in this field is exact.
    fn is_exact() -> bool;

    /// Whether the value should be treated as zero during elimination.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    /// Rough size of the value, used as a pivoting tie-breaker.
    fn complexity(&self) -> u64 {
        0
    }

    fn from_i64(v: i64) -> Self {
        Self::from_ratio(&BigInt::from(v), &BigInt::one())
    }

    fn from_rational(q: &BigRational) -> Self {
        Self::from_ratio(q.numer(), q.denom())
    }

    fn frac(num: i64, den: i64) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigInt::from(den))
    }

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn is_exact() -> bool {
        true
    }

    fn complexity(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let q = BigRational::new(num.clone(), den.clone());
    q.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for f64 {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        ratio_to_f64(num, den)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f64(*self)
    }

    fn is_exact() -> bool {
        false
    }

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-9
    }
}

impl Scalar for f32 {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        ratio_to_f64(num, den) as f32
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f32(*self)
    }

    fn is_exact() -> bool {
        false
    }

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-4
    }
}

/// The prime used by [`Fp`]: 2^62 - 57.
pub const MODULUS: u64 = 4_611_686_018_427_387_847;

/// Integers modulo [`MODULUS`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Fp(u64);

impl Fp {
    pub fn new(v: u64) -> Self {
        Fp(v % MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn from_bigint(v: &BigInt) -> Fp {
        let m = BigInt::from(MODULUS);
        let r = v.mod_floor(&m);
        Fp(r.to_u64().expect("reduced residue fits in u64"))
    }
}

impl Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        let s = self.0 + o.0;
        Fp(if s >= MODULUS { s - MODULUS } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + MODULUS - o.0 })
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp(((self.0 as u128 * o.0 as u128) % MODULUS as u128) as u64)
    }
}

impl Div for Fp {
    type Output = Fp;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Fp) -> Fp {
        assert!(o.0 != 0, "division by zero in Fp");
        self * o.pow(MODULUS - 2)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp(if self.0 == 0 { 0 } else { MODULUS - self.0 })
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, o: Fp) {
        *self = *self + o;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, o: Fp) {
        *self = *self - o;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, o: Fp) {
        *self = *self * o;
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp(1)
    }
}

impl Scalar for Fp {
    /// Panics if the denominator vanishes modulo the prime.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Fp::from_bigint(num) / Fp::from_bigint(den)
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn is_exact() -> bool {
        true
    }
}

/// Renders a rational as `p/q`, or `p` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q` or `p` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let den = BigInt::from_str(den).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Formats any scalar, using exact notation where available.
pub fn format_scalar<S: Scalar>(x: &S) -> String {
    if S::is_exact() {
        if let Some(q) = x.to_rational() {
            return format_rational(&q);
        }
    }
    x.to_string()
}

/// Absolute value of a rational, exposed for pivot heuristics.
pub fn rational_abs(q: &BigRational) -> BigRational {
    q.abs()
}
