//! Scalar abstraction for the numeric kernels.
//!
//! Every model in this crate (embeddings, linear classifiers, the CNN) is
//! generic over [`Real`], so the same code runs in `f32` for throughput and
//! in `f64` for gradient verification.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for converting an `f64` constant into the working scalar.
#[inline]
pub fn cast<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<S: Real>(x: S) -> S {
    let one = S::one();
    if x >= S::zero() {
        one / (one + (-x).exp())
    } else {
        let e = x.exp();
        e / (one + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_extremes() {
        assert!(sigmoid(50.0f64) > 1.0 - 1e-12);
        assert!(sigmoid(-50.0f64) < 1e-12);
        assert_eq!(sigmoid(0.0f32), 0.5);
    }

    #[test]
    fn sigmoid_symmetry() {
        for &x in &[0.1f64, 1.0, 3.7, 12.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }
}
