//! Scalar abstraction shared by the exact-rational, high-precision and `f64` paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use dashu::base::{Abs, SquareRoot};
use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::IBig;
use dashu::rational::RBig;

/// Ordered field operations. Implemented by [`RBig`] (exact), [`Hp`] and `f64`.
pub trait Field:
    Clone
    + Debug
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
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(r: &RBig) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact rational value of this scalar.
    fn to_ratio(&self) -> RBig;
    /// Largest integer not exceeding the value.
    fn floor_int(&self) -> IBig;
    /// Default feasibility slack for the active-set test: `tol * (1 + |b|)`.
    fn activity_tol() -> Option<f64>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// A [`Field`] with square roots.
pub trait Real: Field {
    fn sqrt(&self) -> Self;
}

impl Field for RBig {
    fn zero() -> Self {
        RBig::ZERO
    }
    fn one() -> Self {
        RBig::ONE
    }
    fn from_i64(v: i64) -> Self {
        RBig::from(v)
    }
    fn from_ratio(r: &RBig) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        RBig::try_from(v).expect("finite f64")
    }
    fn to_f64(&self) -> f64 {
        RBig::to_f64(self).value()
    }
    fn to_ratio(&self) -> RBig {
        self.clone()
    }
    fn floor_int(&self) -> IBig {
        self.floor()
    }
    fn activity_tol() -> Option<f64> {
        None
    }
    fn abs(&self) -> Self {
        Abs::abs(self.clone())
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(r: &RBig) -> Self {
        r.to_f64().value()
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_ratio(&self) -> RBig {
        RBig::try_from(*self).expect("finite f64")
    }
    fn floor_int(&self) -> IBig {
        IBig::from(self.floor() as i128)
    }
    fn activity_tol() -> Option<f64> {
        Some(1e-9)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

static HP_PRECISION: AtomicUsize = AtomicUsize::new(DEFAULT_HP_BITS);

/// Default binary precision of [`Hp`].
pub const DEFAULT_HP_BITS: usize = 192;

/// Sets the working precision (in bits, at least 128) used for new [`Hp`] values.
pub fn set_hp_precision(bits: usize) {
    HP_PRECISION.store(bits.max(128), Ordering::Relaxed);
}

pub fn hp_precision() -> usize {
    HP_PRECISION.load(Ordering::Relaxed)
}

type Fb = FBig<HalfEven, 2>;

/// Binary floating point with at least 128 bits of significand.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Hp(Fb);

impl Hp {
    fn wrap(v: Fb) -> Self {
        let p = hp_precision();
        if v.precision() == p {
            Hp(v)
        } else {
            Hp(v.with_precision(p).value())
        }
    }

    pub fn inner(&self) -> &FBig<HalfEven, 2> {
        &self.0
    }

    /// `2^e` exactly.
    pub fn pow2(e: isize) -> Self {
        Hp::wrap(Fb::from_parts(IBig::ONE, e))
    }
}

impl Debug for Hp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

macro_rules! hp_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Hp {
            type Output = Hp;
            fn $m(self, rhs: Hp) -> Hp {
                Hp::wrap($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Hp> for &'a Hp {
            type Output = Hp;
            fn $m(self, rhs: &'a Hp) -> Hp {
                Hp::wrap($tr::$m(&self.0, &rhs.0))
            }
        }
    };
}
hp_binop!(Add, add);
hp_binop!(Sub, sub);
hp_binop!(Mul, mul);
hp_binop!(Div, div);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(-self.0)
    }
}

impl Field for Hp {
    fn zero() -> Self {
        Hp::wrap(Fb::ZERO)
    }
    fn one() -> Self {
        Hp::wrap(Fb::ONE)
    }
    fn from_i64(v: i64) -> Self {
        Hp::wrap(Fb::from(v))
    }
    fn from_ratio(r: &RBig) -> Self {
        Hp(r.to_float::<HalfEven, 2>(hp_precision()).value())
    }
    fn from_f64(v: f64) -> Self {
        Hp::wrap(Fb::try_from(v).expect("finite f64"))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn to_ratio(&self) -> RBig {
        RBig::try_from(self.0.clone()).expect("finite value")
    }
    fn floor_int(&self) -> IBig {
        self.0.floor().to_int().value()
    }
    fn activity_tol() -> Option<f64> {
        Some(1e-30)
    }
    fn abs(&self) -> Self {
        Hp(Abs::abs(self.0.clone()))
    }
    fn is_zero(&self) -> bool {
        self.0.repr().is_zero()
    }
}

impl Real for Hp {
    fn sqrt(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Hp::wrap(SquareRoot::sqrt(&self.0))
    }
}

/// `floor(sqrt(n))` for a non-negative integer.
pub fn isqrt(n: &IBig) -> IBig {
    let u = dashu::integer::UBig::try_from(n.clone()).expect("non-negative");
    IBig::from(dashu::base::SquareRoot::sqrt(&u))
}
