//! Angle arithmetic on the circle.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to (−π, π].
pub fn wrap(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    // rem_euclid maps −π to π already; guard the open end.
    if a <= -PI {
        a += TAU;
    }
    a
}

/// Distance on the circle between two angles, in [0, π].
pub fn distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}
