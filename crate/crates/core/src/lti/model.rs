use std::fmt;

use num_complex::Complex64;

use super::matrix::Matrix;
use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Real rational function `num(s) / den(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid(
                "transfer function denominator is identically zero",
            ));
        }
        Ok(TransferFunction { num, den })
    }

    /// Convenience constructor from coefficient slices, highest power first.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        TransferFunction::new(Polynomial::new(num), Polynomial::new(den))
    }

    pub fn gain(k: f64) -> Self {
        TransferFunction {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_proper(&self) -> bool {
        self.num.degree() <= self.den.degree() || self.num.is_zero()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Same function with a monic denominator.
    pub fn normalized(&self) -> TransferFunction {
        let lead = self.den.leading();
        TransferFunction {
            num: self.num.scale(1.0 / lead),
            den: self.den.scale(1.0 / lead),
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpaceModel {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::dim(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n {
            return Err(Error::dim(format!("B has {} rows, A has {n}", b.rows())));
        }
        if c.cols() != n {
            return Err(Error::dim(format!("C has {} columns, A has {n}", c.cols())));
        }
        if d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(Error::dim(format!(
                "D must be {}x{}, got {}x{}",
                c.rows(),
                b.cols(),
                d.rows(),
                d.cols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !m.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} contains non-finite entries"
                )));
            }
        }
        Ok(StateSpaceModel { a, b, c, d })
    }

    /// Memoryless gain `y = k·u`.
    pub fn static_gain(k: f64) -> Self {
        StateSpaceModel {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, 1),
            c: Matrix::zeros(1, 0),
            d: Matrix::scalar(k),
        }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn is_siso(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }

    pub fn char_poly(&self) -> Polynomial {
        char_poly(&self.a)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        eigenvalues(&self.a)
    }

    /// Steady-state output per unit constant input, `D − C A⁻¹ B`.
    pub fn dc_gain(&self) -> Result<Matrix> {
        if self.states() == 0 {
            return Ok(self.d.clone());
        }
        let x = self.a.solve(&self.b).map_err(|_| Error::PoleAtOrigin)?;
        Ok(&self.d - &(&self.c * &x))
    }
}

/// Controllable-canonical realization of a proper SISO transfer function.
///
/// The denominator is made monic first. With `den = sⁿ + a₁sⁿ⁻¹ + … + aₙ`
/// the first row of `A` is `[−a₁ … −aₙ]`, ones fill the subdiagonal,
/// `B = e₁`, and `D` is the direct-feedthrough part of the numerator.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpaceModel> {
    if tf.den.is_zero() {
        return Err(Error::invalid(
            "transfer function denominator is identically zero",
        ));
    }
    if !tf.is_proper() {
        return Err(Error::Unsupported(format!(
            "improper transfer function (numerator degree {} > denominator degree {})",
            tf.num.degree(),
            tf.den.degree()
        )));
    }
    let g = tf.normalized();
    let n = g.den.degree();
    let den = g.den.coeffs();
    let num = g.num.padded(n + 1);
    let d = num[0];

    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, 1);
    let mut c = Matrix::zeros(1, n);
    for j in 0..n {
        a[(0, j)] = -den[j + 1];
        c[(0, j)] = num[j + 1] - d * den[j + 1];
        if j + 1 < n {
            a[(j + 1, j)] = 1.0;
        }
    }
    if n > 0 {
        b[(0, 0)] = 1.0;
    }
    StateSpaceModel::new(a, b, c, Matrix::scalar(d))
}

/// `det(sI − A)`.
///
/// `A` is balanced by powers of two and reduced to upper Hessenberg form by
/// Householder reflections; the determinant recurrence over leading
/// Hessenberg blocks then gives the coefficients. Both steps are similarity
/// transforms, and the recurrence stays accurate for badly scaled matrices
/// where trace-power methods lose digits.
pub fn char_poly(a: &Matrix) -> Polynomial {
    assert!(a.is_square(), "char_poly needs a square matrix");
    let h = hessenberg(&balance(a));
    let n = h.rows();
    // p[k] = det(sI − H[..k, ..k])
    let mut p: Vec<Polynomial> = vec![Polynomial::one()];
    for k in 1..=n {
        let mut next = Polynomial::new(&[1.0, -h[(k - 1, k - 1)]]).mul(&p[k - 1]);
        let mut sub = 1.0;
        for i in (1..k).rev() {
            sub *= h[(i, i - 1)];
            if sub == 0.0 {
                break;
            }
            let term = p[i - 1].scale(h[(i - 1, k - 1)] * sub);
            next = next.add(&term.scale(-1.0));
        }
        p.push(next);
    }
    p.pop().expect("at least the empty product")
}

/// Diagonal similarity with power-of-two entries that evens out row and
/// column norms. Exact in floating point.
fn balance(a: &Matrix) -> Matrix {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut m = a.clone();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                c += m[(j, i)].abs();
                r += m[(i, j)].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / RADIX {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            while c > r * RADIX {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        for j in 0..n {
            let s: f64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi * h[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= 2.0 * vi * s;
            }
        }
        for i in 0..n {
            let s: f64 = v
                .iter()
                .enumerate()
                .map(|(j, vj)| h[(i, k + 1 + j)] * vj)
                .sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= 2.0 * s * vj;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

/// Eigenvalues as the roots of the characteristic polynomial.
pub fn eigenvalues(a: &Matrix) -> Vec<Complex64> {
    char_poly(a).roots()
}

/// `C adj(sI − A) B / det(sI − A) + D` for a SISO model.
pub fn ss_to_tf(ss: &StateSpaceModel) -> Result<TransferFunction> {
    if !ss.is_siso() {
        return Err(Error::Unsupported(format!(
            "ss_to_tf handles SISO models only ({} inputs, {} outputs)",
            ss.inputs(),
            ss.outputs()
        )));
    }
    // det(sI − A + BC) = det(sI − A)·(1 + C(sI − A)⁻¹B)
    let den = char_poly(&ss.a);
    let loop_poly = char_poly(&(&ss.a - &(&ss.b * &ss.c)));
    let num = loop_poly.add(&den.scale(ss.d[(0, 0)] - 1.0));
    TransferFunction::new(num, den)
}

/// Cascade `g1` then `g2`; no pole-zero cancellation is attempted.
pub fn tf_series(g1: &TransferFunction, g2: &TransferFunction) -> TransferFunction {
    TransferFunction {
        num: g1.num.mul(&g2.num),
        den: g1.den.mul(&g2.den),
    }
}

/// `num(0) / den(0)`.
pub fn dc_gain(tf: &TransferFunction) -> Result<f64> {
    let den0 = tf.den.eval(0.0);
    if den0 == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    Ok(tf.num.eval(0.0) / den0)
}

/// Unity negative feedback around `controller` in series with `plant`.
///
/// The loop is `e = r − y`, `u = K(e)`, `y = G(u)`. The returned model has
/// state `[x_plant; x_controller]`, input `r` and output `y`. A nonzero
/// feedthrough product is resolved exactly through the scalar
/// `1 + D_plant·D_controller`.
pub fn feedback_interconnect(
    plant: &StateSpaceModel,
    controller: &StateSpaceModel,
) -> Result<StateSpaceModel> {
    if !plant.is_siso() || !controller.is_siso() {
        return Err(Error::Unsupported(
            "feedback_interconnect handles SISO blocks only".into(),
        ));
    }
    let np = plant.states();
    let nc = controller.states();
    let dp = plant.d[(0, 0)];
    let dc = controller.d[(0, 0)];
    let loop_den = 1.0 + dp * dc;
    if loop_den.abs() <= f64::EPSILON * (1.0 + (dp * dc).abs()) {
        return Err(Error::SingularLoop);
    }
    let s = 1.0 / loop_den;

    // y = cy·x + dy·r
    let cy = plant.c.hstack(&controller.c.scale(dp))?.scale(s);
    let dy = s * dp * dc;
    // e = r − y
    let ce = -&cy;
    let de = 1.0 - dy;
    // u = [0, Cc]·x + Dc·e
    let cu = &Matrix::zeros(1, np).hstack(&controller.c)? + &ce.scale(dc);
    let du = dc * de;

    let a_blk = Matrix::block(
        &plant.a,
        &Matrix::zeros(np, nc),
        &Matrix::zeros(nc, np),
        &controller.a,
    )?;
    let bp0 = plant.b.vstack(&Matrix::zeros(nc, 1))?;
    let zbc = Matrix::zeros(np, 1).vstack(&controller.b)?;
    let a_cl = &(&a_blk + &(&bp0 * &cu)) + &(&zbc * &ce);
    let b_cl = &bp0.scale(du) + &zbc.scale(de);
    StateSpaceModel::new(a_cl, b_cl, cy, Matrix::scalar(dy))
}
