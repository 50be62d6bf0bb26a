//! Shared float formatting for text outputs.

/// 17 significant digits, enough to round-trip any `f64`. Negative zero
/// prints as zero.
pub fn csv_float(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Empty cell for undefined values.
pub fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(csv_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_opt(None), "");
        assert_eq!(csv_float(-0.0), csv_float(0.0));
    }
}
