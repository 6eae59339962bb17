//! Number formatting shared by reports.

/// Significant digits used for every printed number.
pub const REPORT_DIGITS: usize = 12;

/// Rounds to [`REPORT_DIGITS`] significant digits; `-0` becomes `0`.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", REPORT_DIGITS - 1, x).parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Text form of [`sig12`]; exponent notation outside `[1e-4, 1e15)`.
pub fn fmt12(x: f64) -> String {
    let r = sig12(x);
    if r != 0.0 && r.is_finite() && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}
