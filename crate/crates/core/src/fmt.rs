//! Locale-free numeric formatting for CSV output.

/// Formats `x` with `digits` significant digits, like C's `%.{digits}g`.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    // Round first: 9.9999 may carry into the next decade.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let exp_rounded: i32 = e.parse().unwrap_or(exp);
    if exp_rounded < -5 || exp_rounded >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{exp_rounded}")
    } else {
        let decimals = (digits as i32 - 1 - exp_rounded).max(0) as usize;
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

/// Twelve significant digits, the CSV convention of this crate.
pub fn num(x: f64) -> String {
    sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig(0.0, 12), "0");
        assert_eq!(sig(1.0, 12), "1");
        assert_eq!(sig(-0.5, 12), "-0.5");
        assert_eq!(sig(std::f64::consts::FRAC_1_SQRT_2, 12), "0.707106781187");
        assert_eq!(sig(1.5e-7, 12), "1.5e-7");
        assert_eq!(sig(123456789012345.0, 12), "1.23456789012e14");
        assert_eq!(sig(9.9999999999999, 12), "10");
        assert_eq!(sig(std::f64::consts::PI, 3), "3.14");
    }
}
