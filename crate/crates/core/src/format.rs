//! Deterministic decimal formatting for exported tables.

/// Format with 9 significant digits following C's `%.9g` rules: fixed
/// notation for decimal exponents in `[-5, 9)`, scientific otherwise,
/// trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    const PRECISION: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // Round once in scientific form so the exponent reflects carries (9.99999999e9 -> 1e10).
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..PRECISION).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn matches_c_printf_g() {
        // Expected strings produced by printf("%.9g").
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-14.25, "-14.25"),
            (45.0, "45"),
            (std::f64::consts::PI, "3.14159265"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001234, "0.0001234"),
            (0.00001234, "1.234e-05"),
            (-40.3984563, "-40.3984563"),
            (9.999999999, "10"),
            (2.5e9, "2.5e+09"),
            (1e-300, "1e-300"),
        ];
        for (x, want) in cases {
            assert_eq!(sig9(x), want, "x = {x}");
        }
    }
}
