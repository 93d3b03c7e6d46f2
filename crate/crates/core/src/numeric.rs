//! Small numeric building blocks: rubric level normalization, weighted
//! means and display rounding.

use crate::error::{DomainError, Result};

/// Tolerance used when a computed score is compared against a threshold or
/// a band boundary. Sums of binary fractions drift by a few ulps; a score
/// within this distance of a boundary counts as reaching it.
pub const SCORE_EPSILON: f64 = 1e-9;

/// Linear map of `level` from `[min_level, max_level]` onto `[0, 1]`.
pub fn normalize_level(level: i64, min_level: i64, max_level: i64) -> Result<f64> {
    if max_level <= min_level {
        return Err(DomainError::DegenerateRange);
    }
    if level < min_level || level > max_level {
        return Err(DomainError::OutOfRange(format!(
            "level {level} (expected {min_level}..={max_level})"
        )));
    }
    Ok((level - min_level) as f64 / (max_level - min_level) as f64)
}

/// `Σ wᵢvᵢ / Σ wᵢ`.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(DomainError::LengthMismatch);
    }
    if values.is_empty() {
        return Err(DomainError::EmptyInput);
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(DomainError::NonPositiveWeight);
    }
    let (num, den) = values
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(n, d), (v, w)| (n + w * v, d + w));
    Ok(clamp_into(num / den, values))
}

// Division can land one ulp outside the input range; the mean is bounded
// by its inputs, so pull it back.
fn clamp_into(mean: f64, values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mean.clamp(lo, hi)
}

/// `a >= b`, allowing for [`SCORE_EPSILON`] of accumulated error.
pub fn reaches(a: f64, b: f64) -> bool {
    a >= b - SCORE_EPSILON
}

/// Round half away from zero to `dp` decimal places, treating values within
/// 1e-9 of a half step as exactly on it (so 84.005 rounds to 84.01 even
/// though its binary form sits just below).
pub fn round_half_up(x: f64, dp: u32) -> f64 {
    let factor = 10f64.powi(dp as i32);
    let scaled = x.abs() * factor;
    let floor = scaled.floor();
    let rounded = if scaled - floor >= 0.5 - 1e-9 {
        floor + 1.0
    } else {
        floor
    };
    (rounded / factor).copysign(x)
}

/// Formats with exactly `dp` decimals after [`round_half_up`].
pub fn format_fixed(x: f64, dp: u32) -> String {
    format!("{:.*}", dp as usize, round_half_up(x, dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_identities() {
        assert_eq!(normalize_level(1, 1, 4).unwrap(), 0.0);
        assert_eq!(normalize_level(4, 1, 4).unwrap(), 1.0);
        assert_eq!(format_fixed(normalize_level(3, 1, 4).unwrap(), 4), "0.6667");
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(
            normalize_level(5, 1, 4),
            Err(DomainError::OutOfRange(_))
        ));
        assert!(matches!(
            normalize_level(0, 1, 4),
            Err(DomainError::OutOfRange(_))
        ));
        assert!(matches!(
            normalize_level(2, 2, 2),
            Err(DomainError::DegenerateRange)
        ));
    }

    #[test]
    fn weighted_mean_examples() {
        let table = [4.49, 4.53, 4.34, 4.49, 4.52, 4.20];
        let m = weighted_mean(&table, &[1.0; 6]).unwrap();
        assert_eq!(format_fixed(m, 2), "4.43");
        assert_eq!(weighted_mean(&[0.37], &[5.0]).unwrap(), 0.37);
        // (2*0.9 + 0.6) / 3
        assert!((weighted_mean(&[0.9, 0.6], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn weighted_mean_errors() {
        assert!(matches!(
            weighted_mean(&[], &[]),
            Err(DomainError::EmptyInput)
        ));
        assert!(matches!(
            weighted_mean(&[1.0], &[0.0]),
            Err(DomainError::NonPositiveWeight)
        ));
        assert!(matches!(
            weighted_mean(&[1.0], &[-2.0]),
            Err(DomainError::NonPositiveWeight)
        ));
        assert!(matches!(
            weighted_mean(&[1.0, 2.0], &[1.0]),
            Err(DomainError::LengthMismatch)
        ));
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(format_fixed(84.005, 2), "84.01");
        assert_eq!(format_fixed(84.004, 2), "84.00");
        assert_eq!(format_fixed(1.005, 2), "1.01");
        assert_eq!(format_fixed(2.5, 0), "3");
        assert_eq!(format_fixed(0.0, 2), "0.00");
        assert_eq!(round_half_up(83.999999, 2), 84.0);
    }

    proptest! {
        #[test]
        fn mean_is_bounded(
            pairs in prop::collection::vec((-1e3f64..1e3, 1e-3f64..1e3), 1..20)
        ) {
            let (v, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m = weighted_mean(&v, &w).unwrap();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi);
        }

        #[test]
        fn normalized_level_in_unit_interval(min in -5i64..5, span in 1i64..10, off in 0i64..10) {
            let max = min + span;
            let level = min + off.min(span);
            let x = normalize_level(level, min, max).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }
}
