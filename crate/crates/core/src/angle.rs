//! Degree/radian conversions. Computation is in radians; degrees only
//! appear at I/O boundaries.

pub fn deg(degrees: f64) -> f64 {
    degrees.to_radians()
}

/// Degrees rounded to 4 decimals, the serialization precision for angles.
pub fn to_degrees_4dp(radians: f64) -> f64 {
    round_to(radians.to_degrees(), 4)
}

/// Degrees rounded to 2 decimals, used in human-facing renderings.
pub fn to_degrees_2dp(radians: f64) -> f64 {
    round_to(radians.to_degrees(), 2)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}
