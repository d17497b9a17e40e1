//! Real polynomials in the Laplace variable, highest degree first.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration cap for the Durand–Kerner root finder.
pub const ROOT_MAX_ITERATIONS: usize = 200;
/// Convergence threshold on the largest root correction.
pub const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Leading zeros are stripped; an empty slice yields the zero polynomial.
    pub fn new(coeffs: &[f64]) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        let coeffs = match first {
            Some(i) => coeffs[i..].to_vec(),
            None => vec![0.0],
        };
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(&[c])
    }

    pub fn one() -> Self {
        Polynomial::constant(1.0)
    }

    /// Monic polynomial whose roots are `roots`.
    ///
    /// Complex roots must come in conjugate pairs; the imaginary residue of
    /// the expanded product is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        Polynomial::new(&c.iter().map(|z| z.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of `s^k`.
    pub fn coeff_of_power(&self, k: usize) -> f64 {
        if k > self.degree() {
            0.0
        } else {
            self.coeffs[self.degree() - k]
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(&self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Result<Polynomial> {
        if self.is_zero() {
            return Err(Error::invalid("zero polynomial has no monic form"));
        }
        Ok(self.scale(1.0 / self.leading()))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(&out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let pad = |p: &Polynomial| {
            let mut v = vec![0.0; n - p.coeffs.len()];
            v.extend_from_slice(&p.coeffs);
            v
        };
        let (a, b) = (pad(self), pad(other));
        Polynomial::new(&a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    /// Coefficients padded with leading zeros to length `len`.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        assert!(len >= self.coeffs.len());
        let mut v = vec![0.0; len - self.coeffs.len()];
        v.extend_from_slice(&self.coeffs);
        v
    }

    /// All complex roots by Durand–Kerner (Weierstrass) iteration.
    ///
    /// Runs at most [`ROOT_MAX_ITERATIONS`] sweeps and stops once every
    /// correction is below [`ROOT_TOLERANCE`] relative to the root size.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        let p = Polynomial { coeffs: monic };
        // Cauchy bound on root magnitude.
        let radius = 1.0 + p.coeffs[1..].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                Complex64::from_polar(radius, angle)
            })
            .collect();
        for _ in 0..ROOT_MAX_ITERATIONS {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if j != i {
                        denom *= z[i] - z[j];
                    }
                }
                if denom.norm() == 0.0 {
                    denom = Complex64::new(f64::EPSILON, f64::EPSILON);
                }
                let step = p.eval_complex(z[i]) / denom;
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
            if max_step <= ROOT_TOLERANCE {
                break;
            }
        }
        for r in &mut z {
            if r.im.abs() <= 1e-10 * (1.0 + r.re.abs()) {
                r.im = 0.0;
            }
        }
        z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        z
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let pow = n - i;
            if c == 0.0 && n != 0 {
                continue;
            }
            let mag = crate::lti::fmt_num(c.abs());
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = pow == 0 || c.abs() != 1.0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match pow {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{pow}")?,
            }
        }
        Ok(())
    }
}
