//! `%.Ng`-style number formatting.
//!
//! Rust's formatter has no `%g`; the CSV contract needs one, so it lives here.

/// Formats `v` like C's `printf("%.{sig}g", v)`.
///
/// Negative zero prints as `0`. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_g(v: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // Round to `sig` significant digits first; the exponent is taken after
    // rounding so 9.9999999996 becomes 10 rather than 9.99999999e0.
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
