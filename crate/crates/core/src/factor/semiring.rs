use super::{Domain, Scalar};

/// Commutative semiring used for combining and eliminating factors.
///
/// `MinSum` works on energies; `OrAnd` treats zero as false and any other
/// value as true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semiring {
    SumProduct,
    MaxProduct,
    MinSum,
    OrAnd,
}

impl Semiring {
    pub fn name(self) -> &'static str {
        match self {
            Semiring::SumProduct => "sum_product",
            Semiring::MaxProduct => "max_product",
            Semiring::MinSum => "min_sum",
            Semiring::OrAnd => "or_and",
        }
    }

    pub fn combine<T: Scalar>(self, domain: Domain, a: T, b: T) -> T {
        match (self, domain) {
            (Semiring::SumProduct | Semiring::MaxProduct, Domain::Linear) => a * b,
            (Semiring::SumProduct | Semiring::MaxProduct, Domain::Log) => a + b,
            (Semiring::MinSum, _) => a + b,
            (Semiring::OrAnd, _) => bool_to(a != T::zero() && b != T::zero()),
        }
    }

    /// Aggregation; `None` only for log-domain sums over a type without logarithms.
    pub fn aggregate<T: Scalar>(self, domain: Domain, a: T, b: T) -> Option<T> {
        Some(match (self, domain) {
            (Semiring::SumProduct, Domain::Linear) => a + b,
            (Semiring::SumProduct, Domain::Log) => return T::log_add(a, b),
            (Semiring::MaxProduct, _) => {
                if b > a {
                    b
                } else {
                    a
                }
            }
            (Semiring::MinSum, _) => {
                if b < a {
                    b
                } else {
                    a
                }
            }
            (Semiring::OrAnd, _) => bool_to(a != T::zero() || b != T::zero()),
        })
    }

    /// Neutral element of `combine`.
    pub fn combine_identity<T: Scalar>(self, domain: Domain) -> T {
        match (self, domain) {
            (Semiring::SumProduct | Semiring::MaxProduct, Domain::Linear) => T::one(),
            (Semiring::SumProduct | Semiring::MaxProduct, Domain::Log) => T::zero(),
            (Semiring::MinSum, _) => T::zero(),
            (Semiring::OrAnd, _) => T::one(),
        }
    }

    /// Neutral element of `aggregate` for linear-domain floating factors.
    pub fn aggregate_identity(self) -> f64 {
        match self {
            Semiring::SumProduct | Semiring::MaxProduct | Semiring::OrAnd => 0.0,
            Semiring::MinSum => f64::INFINITY,
        }
    }
}

fn bool_to<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}
