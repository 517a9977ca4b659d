//! First-order forward-mode dual numbers.
//!
//! Every observable in the registry is evaluated generically over a scalar
//! type implementing [`RsScalar`]. Plain `f64` gives values; [`Dual`] gives
//! values together with one directional derivative, propagated exactly
//! through complex matrix products and linear solves. Gradients are taken by
//! seeding one phase-space coordinate per sweep.

use num_complex::Complex;
use num_traits::{Num, One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

/// Scalar abstraction shared by the value path (`f64`) and the derivative
/// path ([`Dual`]).
pub trait RsScalar:
    Copy + fmt::Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    /// Primal (value) component.
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
}

impl RsScalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Dual number `val + der·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub val: f64,
    pub der: f64,
}

impl Dual {
    #[inline]
    pub const fn new(val: f64, der: f64) -> Self {
        Self { val, der }
    }

    /// Constant with zero derivative.
    #[inline]
    pub const fn constant(val: f64) -> Self {
        Self { val, der: 0.0 }
    }

    /// Seeded independent variable with unit derivative.
    #[inline]
    pub const fn seeded(val: f64) -> Self {
        Self { val, der: 1.0 }
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}e", self.val, self.der)
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.val + rhs.val, self.der + rhs.der)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.val - rhs.val, self.der - rhs.der)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.val * rhs.val, self.val * rhs.der + self.der * rhs.val)
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.val;
        Self::new(
            self.val * inv,
            (self.der - self.val * rhs.der * inv) * inv,
        )
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.val, -self.der)
    }
}

impl Rem for Dual {
    type Output = Self;
    fn rem(self, _rhs: Self) -> Self {
        // Required by the `Num` bound of `Complex<T>` but meaningless for a
        // derivative carrier; nothing in the crate takes remainders.
        unimplemented!("remainder is not defined for dual numbers")
    }
}

impl Zero for Dual {
    #[inline]
    fn zero() -> Self {
        Self::constant(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.val == 0.0 && self.der == 0.0
    }
}

impl One for Dual {
    #[inline]
    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;

    fn from_str_radix(str: &str, radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(str, radix).map(Self::constant)
    }
}

impl RsScalar for Dual {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.val
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.val.exp();
        Self::new(e, self.der * e)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        Self::new(s, self.der / (2.0 * s))
    }
}

/// Complex number over an arbitrary lab scalar.
pub type CScalar<S> = Complex<S>;

/// Complex constant lifted into the scalar type `S`.
#[inline]
pub fn complex_const<S: RsScalar>(re: f64, im: f64) -> Complex<S> {
    Complex::new(S::from_f64(re), S::from_f64(im))
}

/// Magnitude proxy `|Re| + |Im|` of the value parts, used for pivoting.
#[inline]
pub fn value_magnitude<S: RsScalar>(z: &Complex<S>) -> f64 {
    z.re.value().abs() + z.im.value().abs()
}
