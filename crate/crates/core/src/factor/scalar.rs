use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// Numeric type usable as a factor entry.
///
/// Floating types support both domains; exact rationals support the linear
/// domain only, which is enough for enumeration and elimination.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// `log(exp(a) + exp(b))`, or `None` when the type has no logarithm.
    fn log_add(a: Self, b: Self) -> Option<Self>;

    fn to_f64(self) -> f64;

    fn from_f64(v: f64) -> Option<Self>;
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn log_add(a: Self, b: Self) -> Option<Self> {
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                if hi == <$t>::NEG_INFINITY {
                    return Some(hi);
                }
                Some(hi + (lo - hi).exp().ln_1p())
            }

            fn to_f64(self) -> f64 {
                self as f64
            }

            fn from_f64(v: f64) -> Option<Self> {
                Some(v as $t)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

macro_rules! ratio_scalar {
    ($t:ty) => {
        impl Scalar for Ratio<$t> {
            fn log_add(_: Self, _: Self) -> Option<Self> {
                None
            }

            fn to_f64(self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }

            fn from_f64(v: f64) -> Option<Self> {
                Ratio::<$t>::approximate_float(v)
            }
        }
    };
}

ratio_scalar!(i64);
ratio_scalar!(i128);
