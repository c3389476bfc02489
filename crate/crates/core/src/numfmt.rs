//! Fixed-precision float rendering for stable text output.

/// Significant digits kept in serialized output.
pub const SIG_DIGITS: usize = 9;

/// Rounds to [`SIG_DIGITS`] significant digits. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("scientific float literal")
}

/// Rounded value in plain decimal notation; `nan`, `inf`, `-inf` otherwise.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        round_sig(x).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(format_sig(std::f64::consts::SQRT_2), "1.41421356");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(8.0), "8");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(f64::NAN), "nan");
        assert_eq!(format_sig(1.234_567_891_234e-7), "0.000000123456789");
        assert_eq!(round_sig(0.427_050_983_124_842_3), 0.427_050_983);
    }
}
