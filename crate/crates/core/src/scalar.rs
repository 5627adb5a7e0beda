//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type used for vectors, radii and norms: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Slack strictly above this value verifies a strict inequality.
pub const STRICT_SLACK: f64 = 1e-9;

/// Outcome of checking a strict inequality `lhs < rhs` in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// slack > 1e-9
    Verified,
    /// slack in (0, 1e-9], or exactly zero for non-strict checks
    Degenerate,
    Violated,
}

impl Strictness {
    pub fn of_slack<T: Scalar>(slack: T) -> Self {
        let s = slack.to_f64_lossy();
        if s > STRICT_SLACK {
            Strictness::Verified
        } else if s >= 0.0 {
            Strictness::Degenerate
        } else {
            Strictness::Violated
        }
    }

    pub fn holds(self) -> bool {
        self != Strictness::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictness_bands() {
        assert_eq!(Strictness::of_slack(1e-3_f64), Strictness::Verified);
        assert_eq!(Strictness::of_slack(1e-10_f64), Strictness::Degenerate);
        assert_eq!(Strictness::of_slack(0.0_f64), Strictness::Degenerate);
        assert_eq!(Strictness::of_slack(-1e-15_f64), Strictness::Violated);
        assert_eq!(Strictness::of_slack(0.5_f32), Strictness::Verified);
    }
}
