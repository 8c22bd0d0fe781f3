//! Scalar abstraction for tensor payloads.
//!
//! All pipeline math is written against [`Real`] so the same code runs in
//! f32 and f64. The crate root exposes f64 aliases; f64 is the default for
//! every numeric path, f32 exists to mirror the file payload width.

use core::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable as a tensor payload.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` config value into `Self`, rounding if narrowing.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to any Real")
    }

    /// Converts a count or index into `Self`.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any Real")
    }

    /// Widens into `f64` for reporting and digests.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("any Real widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
