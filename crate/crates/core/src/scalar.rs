//! Scalar abstraction shared by every spectral operator.

use std::cell::RefCell;
use std::fmt::{Debug, Display, LowerExp};
use std::sync::Arc;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::{Fft, FftDirection, FftNum, FftPlanner};

/// Floating point type the solver can run on (`f32` or `f64`).
///
/// Besides the usual numeric traits this carries a per-thread FFT planner so
/// that repeated transforms of the same length reuse their plans.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Planned 1-D complex FFT of length `n`.
    fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<Self>>;

    /// Converts an `f64` literal. Every literal used by the crate is
    /// representable in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

macro_rules! impl_scalar {
    ($t:ty, $planner:ident) => {
        thread_local! {
            static $planner: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
        }

        impl Scalar for $t {
            fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<Self>> {
                $planner.with(|p| p.borrow_mut().plan_fft(n, direction))
            }
        }
    };
}

impl_scalar!(f32, PLANNER_F32);
impl_scalar!(f64, PLANNER_F64);
