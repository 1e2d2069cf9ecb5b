//! Deterministic number rendering for CSV and `key = value` output.

pub const DEFAULT_PRECISION: usize = 6;
pub const MAX_PRECISION: usize = 17;

/// Renders `x` in fixed notation with `sig` significant digits.
///
/// Values of magnitude at least `10^sig` keep all their integer digits.
pub fn fixed(x: f64, sig: usize) -> String {
    let sig = sig.clamp(1, MAX_PRECISION);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", sig - 1, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = |mag: i32| (sig as i32 - 1 - mag).max(0) as usize;
    let mut out = format!("{:.*}", decimals(magnitude), x);
    // rounding can carry into a new leading digit, e.g. 9.9999996 -> 10.00000
    let rounded: f64 = out.parse().expect("formatted float parses");
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 > magnitude {
        out = format!("{:.*}", decimals(magnitude + 1), x);
    }
    if out.starts_with('-') && out[1..].chars().all(|c| c == '0' || c == '.') {
        out.remove(0);
    }
    out
}

/// Renders `x` in scientific notation with `sig` significant digits, for
/// quantities such as residual sums that span many orders of magnitude.
pub fn scientific(x: f64, sig: usize) -> String {
    let sig = sig.clamp(1, MAX_PRECISION);
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.*e}", sig - 1, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fixed(0.173_611_231, 6), "0.173611");
        assert_eq!(fixed(381.070_026, 6), "381.070");
        assert_eq!(fixed(6.301_403_266, 6), "6.30140");
        assert_eq!(fixed(0.0, 6), "0.00000");
        assert_eq!(fixed(1_234_567.8, 6), "1234568");
        assert_eq!(fixed(0.000_012_345_67, 3), "0.0000123");
        assert_eq!(fixed(-2.5, 2), "-2.5");
    }

    #[test]
    fn carry_and_negative_zero() {
        assert_eq!(fixed(9.999_999_6, 6), "10.0000");
        assert_eq!(fixed(0.099_999_99, 3), "0.100");
        assert_eq!(fixed(-1e-12, 3), "-0.00000000000100");
        assert_eq!(fixed(-0.0, 3), "0.00");
    }

    #[test]
    fn scientific_rendering() {
        assert_eq!(scientific(7.896_31e-33, 3), "7.90e-33");
        assert_eq!(scientific(-0.0, 2), "0.0e0");
        assert_eq!(scientific(1234.5, 2), "1.2e3");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, 1.0 / 3.0, 381.070_026_023_448_35, 6.3e-5] {
            let s = fixed(x, MAX_PRECISION);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
