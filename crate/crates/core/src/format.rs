//! Fixed-precision number formatting for reports and golden files.

/// Formats `x` rounded to six significant digits, using the shortest decimal
/// representation of the rounded value (`944.607`, `0.05`, `inf`). Magnitudes
/// below 1e-4 or from 1e15 up switch to exponent form (`7.44019e-18`).
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".to_string();
    }
    if rounded.abs() < 1e-4 || rounded.abs() >= 1e15 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}
