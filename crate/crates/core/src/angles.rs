//! Degree-based angle helpers shared by the audio, label and projection code.
//!
//! Azimuth is counterclockwise-positive seen from above (left = +90°),
//! elevation is up-positive.

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_deg(deg: f64) -> f64 {
    if (-180.0..180.0).contains(&deg) {
        return deg;
    }
    let mut r = (deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 180.0 {
        r -= 360.0;
    }
    r
}

/// Wraps an angle in degrees into `[0, 360)`.
pub fn wrap_deg_positive(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, in `[0, 180]`.
pub fn circular_distance_deg(a: f64, b: f64) -> f64 {
    wrap_deg(a - b).abs()
}

/// `(sin, cos)` of an angle in degrees.
///
/// The argument is reduced to the nearest multiple of 90° first, so the
/// cardinal directions produce exact 0 and ±1 instead of `cos(π/2) ≈ 6e-17`.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let quadrant = (deg / 90.0).round();
    let rest = (deg - quadrant * 90.0).to_radians();
    let (s, c) = if rest == 0.0 { (0.0, 1.0) } else { rest.sin_cos() };
    match (quadrant as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_deg(200.0), -160.0);
        assert_eq!(wrap_deg(180.0), -180.0);
        assert_eq!(wrap_deg(-180.0), -180.0);
        assert_eq!(wrap_deg(-1e-17), -1e-17);
        assert_eq!(wrap_deg(540.0), -180.0);
        let r = wrap_deg(-1e-14 - 180.0);
        assert!((-180.0..180.0).contains(&r));
    }

    #[test]
    fn cardinal_directions_are_exact() {
        assert_eq!(sin_cos_deg(0.0), (0.0, 1.0));
        assert_eq!(sin_cos_deg(90.0), (1.0, -0.0));
        assert_eq!(sin_cos_deg(180.0), (-0.0, -1.0));
        assert_eq!(sin_cos_deg(-90.0), (-1.0, 0.0));
        assert_eq!(sin_cos_deg(270.0), (-1.0, 0.0));
    }

    #[test]
    fn matches_plain_trig() {
        for i in -720..=720 {
            let deg = i as f64 * 0.73;
            let (s, c) = sin_cos_deg(deg);
            assert!((s - deg.to_radians().sin()).abs() < 1e-12, "{deg}");
            assert!((c - deg.to_radians().cos()).abs() < 1e-12, "{deg}");
        }
    }

    #[test]
    fn circular_distance() {
        assert_eq!(circular_distance_deg(170.0, -170.0), 20.0);
        assert_eq!(circular_distance_deg(10.0, 30.0), 20.0);
    }
}
