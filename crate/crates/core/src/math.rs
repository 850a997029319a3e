//! Scalar helpers used throughout the likelihood code.

/// Largest `f64` strictly below 1; probabilities are clamped into
/// `[f64::MIN_POSITIVE, ONE_MINUS_ULP]` so variance weights `p(1-p)`
/// never collapse to exactly zero.
pub(crate) const ONE_MINUS_ULP: f64 = 1.0 - 0.5 * f64::EPSILON;

/// Logistic function `1/(1 + e^{-z})`, overflow-safe for any finite `z`.
///
/// The result is clamped into the open interval (0, 1): extreme arguments
/// saturate at the nearest representable value instead of rounding to an
/// exact 0 or 1.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

/// `log(1 + e^z)` without overflow: `max(z, 0) + log1p(e^{-|z|})`.
#[inline]
pub fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Inverse logistic function; requires `p` in (0, 1).
#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigmoid_matches_naive_in_moderate_range() {
        for k in -40..=40 {
            let z = k as f64 * 0.25;
            assert_relative_eq!(sigmoid(z), 1.0 / (1.0 + (-z).exp()), max_relative = 1e-15);
        }
    }

    #[test]
    fn sigmoid_saturates_without_reaching_zero_or_one() {
        let hi = sigmoid(60.0);
        assert!(hi > 1.0 - 1e-15 && hi < 1.0);
        let lo = sigmoid(-60.0);
        assert!(lo > 0.0 && lo < 1e-15);
        // Far past the overflow threshold of exp.
        assert!(sigmoid(800.0) < 1.0);
        assert!(sigmoid(-800.0) > 0.0);
        assert!(sigmoid(800.0) * (1.0 - sigmoid(800.0)) > 0.0);
    }

    #[test]
    fn log1p_exp_is_stable_at_both_extremes() {
        assert_relative_eq!(log1p_exp(0.0), 2.0f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(log1p_exp(-40.0), (-40.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(log1p_exp(40.0), 40.0 + (-40.0f64).exp(), max_relative = 1e-15);
        assert_eq!(log1p_exp(800.0), 800.0);
        assert!(log1p_exp(-800.0) >= 0.0);
    }

    #[test]
    fn logit_inverts_sigmoid() {
        for k in -8..=8 {
            let z = k as f64 * 0.5;
            assert_relative_eq!(logit(sigmoid(z)), z, max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}
