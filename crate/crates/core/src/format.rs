//! Fixed-precision number formatting for tabular output.

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
