/// `x` rounded to six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let factor = 10f64.powi(5 - magnitude);
    let rounded = (x * factor).round() / factor;
    format!("{rounded:.decimals$}")
}
