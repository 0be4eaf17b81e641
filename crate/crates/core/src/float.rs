use core::fmt::{Debug, Display, LowerExp};
use core::iter::Sum;
use core::num::ParseFloatError;
use core::str::FromStr;

use num_traits::{Float as NumFloat, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type for all numerical routines in this crate.
///
/// This bundles the `num-traits` floating-point operations with the
/// conversion, formatting, and threading bounds the solvers need, so that
/// every algorithm is written once and instantiated at `f32` or `f64`.
pub trait Float:
    NumFloat
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + FromStr<Err = ParseFloatError>
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Casts an `f64` constant into this scalar type.
    ///
    /// Shorthand for `T::from_f64(v).unwrap()` on literals that are always
    /// representable (tolerances, small integers, algorithm constants).
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in this scalar type")
    }

    /// Machine epsilon for this scalar type.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Float for f32 {}
impl Float for f64 {}

#[cfg(test)]
mod tests {
    use super::Float;

    fn l2<T: Float>(v: &[T]) -> T {
        v.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    #[test]
    fn generic_code_runs_at_both_precisions() {
        let a32: Vec<f32> = vec![3.0, 4.0];
        let a64: Vec<f64> = vec![3.0, 4.0];
        assert_eq!(l2(&a32), 5.0f32);
        assert_eq!(l2(&a64), 5.0f64);
    }

    #[test]
    fn constant_cast_is_exact_for_small_integers() {
        assert_eq!(f32::c(42.0), 42.0f32);
        assert_eq!(f64::c(0.5), 0.5f64);
    }
}
