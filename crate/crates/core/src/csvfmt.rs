//! Fixed textual forms for CSV and summary output.

/// 17 significant digits in scientific notation, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}
