//! Number formatting for machine-readable output.

/// Fixed-point rendering with `digits` significant digits (exact zero and
/// non-finite values are rendered as-is).
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).clamp(0, 300) as usize;
    format!("{x:.decimals$}")
}
