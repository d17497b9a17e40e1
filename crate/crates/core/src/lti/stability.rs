use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Routh–Hurwitz test: true iff every root has a strictly negative real part.
///
/// The polynomial is sign-normalized so the leading coefficient is
/// positive. A zero in the first column is reported as not Hurwitz (root on
/// or right of the imaginary axis); no epsilon substitution is done.
pub fn is_hurwitz(p: &Polynomial) -> Result<bool> {
    if p.degree() == 0 {
        return Err(Error::invalid(
            "stability of a constant polynomial is undefined",
        ));
    }
    let sign = p.leading().signum();
    let c: Vec<f64> = p.coeffs().iter().map(|v| v * sign).collect();
    // Necessary condition, and it keeps the table free of sign-flip ambiguity.
    if c.iter().any(|&v| v <= 0.0) {
        return Ok(false);
    }
    let n = p.degree();
    let width = n / 2 + 1;
    let mut upper: Vec<f64> = c.iter().step_by(2).copied().collect();
    let mut lower: Vec<f64> = c.iter().skip(1).step_by(2).copied().collect();
    upper.resize(width, 0.0);
    lower.resize(width, 0.0);
    for row in 1..=n {
        let pivot = lower[0];
        if pivot <= 0.0 || !pivot.is_finite() {
            return Ok(false);
        }
        if row == n {
            break;
        }
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (pivot * upper[j + 1] - upper[0] * lower[j + 1]) / pivot;
        }
        upper = std::mem::replace(&mut lower, next);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hurwitz(c: &[f64]) -> bool {
        is_hurwitz(&Polynomial::new(c)).unwrap()
    }

    #[test]
    fn examples() {
        assert!(hurwitz(&[1.0, 2.5, 1.0]));
        assert!(!hurwitz(&[1.0, -6.5, 14.5]));
        assert!(!hurwitz(&[1.0, 0.0]));
        assert!(is_hurwitz(&Polynomial::constant(3.0)).is_err());
    }

    #[test]
    fn sign_normalization() {
        assert!(hurwitz(&[-1.0, -3.0, -2.0]));
        assert!(hurwitz(&[-2.0, -1.0]));
    }

    #[test]
    fn third_and_fourth_order() {
        // (s+1)(s+2)(s+3)
        assert!(hurwitz(&[1.0, 6.0, 11.0, 6.0]));
        // s³ + s² + s + 1 has roots ±j: marginal
        assert!(!hurwitz(&[1.0, 1.0, 1.0, 1.0]));
        // s³ + s² + 2s + 8: positive coefficients, two RHP roots
        assert!(!hurwitz(&[1.0, 1.0, 2.0, 8.0]));
        // (s+1)^4
        assert!(hurwitz(&[1.0, 4.0, 6.0, 4.0, 1.0]));
        // s⁴ + s³ + s² + s + 1: unstable
        assert!(!hurwitz(&[1.0, 1.0, 1.0, 1.0, 1.0]));
    }
}
