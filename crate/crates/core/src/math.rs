//! Float helpers that `core` does not provide.

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Round half away from zero.
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Round to `decimals` places, half away from zero.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    libm::round(x * scale) / scale
}

/// Relative-or-absolute closeness used for path ties and constraint checks.
#[inline]
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_to(3.372_713, 2), 3.37);
        assert_eq!(round_to(1.349_085, 2), 1.35);
        assert_eq!(round(88.5), 89.0);
        assert_eq!(mean(&[]), 0.0);
        assert_eq!(mean(&[4.0, 8.0]), 6.0);
    }
}
