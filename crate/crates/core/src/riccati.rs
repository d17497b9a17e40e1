//! Continuous algebraic Riccati equation and LQR synthesis.
//!
//! `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` is solved by Newton–Kleinman iteration:
//! each step solves one Lyapunov equation for the current closed loop and
//! updates the gain, converging quadratically from any stabilizing start.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{char_poly, is_hurwitz, Matrix};
use crate::observer::place_poles;

/// Residual below which the iteration stops early.
pub const ITERATION_TOLERANCE: f64 = 1e-10;
/// Residual a returned solution is guaranteed to meet.
pub const SUCCESS_RESIDUAL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
const REFINEMENT_STEPS: usize = 3;

/// LQR weights. `q` is stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct CostWeights {
    q: Matrix,
    r: Matrix,
}

impl CostWeights {
    /// Validates `q ⪰ 0` (after symmetrization) and `r ≻ 0`.
    pub fn new(q: Matrix, r: Matrix) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::dim("Q must be square"));
        }
        if !r.is_square() {
            return Err(Error::dim("R must be square"));
        }
        if !q.is_finite() || !r.is_finite() {
            return Err(Error::invalid("weights contain non-finite entries"));
        }
        let q = q.symmetrized();
        let floor = -1e-9 * q.max_abs().max(1.0);
        if let Some(&min) = q.symmetric_eigenvalues().first() {
            if min < floor {
                return Err(Error::invalid(format!(
                    "Q must be positive semidefinite (smallest eigenvalue {min:.3e})"
                )));
            }
        }
        if r.asymmetry() > 1e-12 * r.max_abs().max(1.0) {
            return Err(Error::invalid("R must be symmetric"));
        }
        let r = r.symmetrized();
        if !r.is_positive_definite() {
            return Err(Error::invalid("R must be positive definite"));
        }
        Ok(CostWeights { q, r })
    }

    /// `Q = diag(q_diag)`, `R = r·I₁`.
    pub fn diagonal(q_diag: &[f64], r: f64) -> Result<Self> {
        CostWeights::new(Matrix::from_diagonal(q_diag), Matrix::scalar(r))
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    pub p: Matrix,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CareOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for CareOptions {
    fn default() -> Self {
        CareOptions {
            max_iterations: MAX_ITERATIONS,
            tolerance: ITERATION_TOLERANCE,
        }
    }
}

/// LQR design result: `K = R⁻¹BᵀP` and the Riccati solution behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Lqr {
    pub k: Matrix,
    pub solution: RiccatiSolution,
}

impl Lqr {
    /// First (for single-input plants, only) row of `K`.
    pub fn gain_row(&self) -> Vec<f64> {
        self.k.row_slice(0).to_vec()
    }
}

/// Solves `AᵀX + XA + M = 0` through the Kronecker-vectorized system
/// `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(X) = −vec(M)`.
pub fn solve_lyapunov(a: &Matrix, m: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if !a.is_square() || m.shape() != (n, n) {
        return Err(Error::dim(
            "Lyapunov equation needs square A and M of equal size",
        ));
    }
    let at = a.transpose();
    let ident = Matrix::identity(n);
    let op = &ident.kron(&at) + &at.kron(&ident);
    let rhs = Matrix::column(&m.vectorize()).scale(-1.0);
    let x = op.solve(&rhs)?;
    Ok(Matrix::unvectorize(n, n, x.as_slice()))
}

/// `‖AᵀP + PA − PBR⁻¹BᵀP + Q‖_F`.
pub fn care_residual(a: &Matrix, b: &Matrix, weights: &CostWeights, p: &Matrix) -> Result<f64> {
    Ok(care_defect(a, b, weights, p)?.frobenius_norm())
}

fn care_defect(a: &Matrix, b: &Matrix, weights: &CostWeights, p: &Matrix) -> Result<Matrix> {
    let r_inv_bt = weights.r.solve(&b.transpose())?;
    let pb = p * b;
    let quad = &pb * &(&r_inv_bt * p);
    Ok(&(&(&(&a.transpose() * p) + &(p * a)) - &quad) + &weights.q)
}

pub fn solve_care(a: &Matrix, b: &Matrix, weights: &CostWeights) -> Result<RiccatiSolution> {
    solve_care_with(a, b, weights, &CareOptions::default())
}

pub fn solve_care_with(
    a: &Matrix,
    b: &Matrix,
    weights: &CostWeights,
    opts: &CareOptions,
) -> Result<RiccatiSolution> {
    let n = a.rows();
    let m = b.cols();
    if !a.is_square() {
        return Err(Error::dim("A must be square"));
    }
    if b.rows() != n {
        return Err(Error::dim(format!("B has {} rows, A has {n}", b.rows())));
    }
    if weights.q.rows() != n {
        return Err(Error::dim(format!(
            "Q is {0}x{0}, A is {n}x{n}",
            weights.q.rows()
        )));
    }
    if weights.r.rows() != m {
        return Err(Error::dim(format!(
            "R is {0}x{0}, B has {m} columns",
            weights.r.rows()
        )));
    }
    if n == 0 {
        return Ok(RiccatiSolution {
            p: Matrix::zeros(0, 0),
            residual_norm: 0.0,
            iterations: 0,
        });
    }

    let r_inv_bt = weights.r.solve(&b.transpose())?;
    let mut k = initial_gain(a, b)?;
    let mut p = Matrix::zeros(n, n);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut polishing = false;
    for it in 1..=opts.max_iterations {
        let closed = a - &(b * &k);
        let kt_r_k = &(&k.transpose() * &weights.r) * &k;
        let p_next = solve_lyapunov(&closed, &(&weights.q + &kt_r_k))?.symmetrized();
        let next = care_residual(a, b, weights, &p_next)?;
        if polishing && !(next < residual) {
            break;
        }
        p = p_next;
        k = &r_inv_bt * &p;
        residual = next;
        iterations = it;
        if !residual.is_finite() || polishing {
            break;
        }
        // One extra step past the tolerance: quadratic convergence takes
        // the iterate from ~1e-10 to roundoff.
        polishing = residual <= opts.tolerance;
    }
    // Defect correction: Newton steps computed from the residual itself lose
    // less to cancellation than re-solving for P when P is large.
    for _ in 0..REFINEMENT_STEPS {
        if !residual.is_finite() || residual <= f64::EPSILON {
            break;
        }
        let closed = a - &(b * &k);
        let defect = care_defect(a, b, weights, &p)?;
        let candidate = (&p + &solve_lyapunov(&closed, &defect)?).symmetrized();
        let next = care_residual(a, b, weights, &candidate)?;
        if !(next < residual) {
            break;
        }
        p = candidate;
        k = &r_inv_bt * &p;
        residual = next;
    }
    if !(residual <= SUCCESS_RESIDUAL) {
        return Err(Error::NotConverged {
            iterations,
            residual,
        });
    }
    let closed = a - &(b * &k);
    if !is_hurwitz(&char_poly(&closed))? {
        return Err(Error::invalid(
            "Riccati solution is not stabilizing; (A, B) may not be stabilizable",
        ));
    }
    Ok(RiccatiSolution {
        p,
        residual_norm: residual,
        iterations,
    })
}

/// Stabilizing starting gain for Newton–Kleinman.
///
/// Zero when `A` is already Hurwitz. Single-input pairs use pole placement
/// at `−1, −2, …, −n`. Multi-input pairs use the Bass construction
/// `K = BᵀZ⁻¹` with `(A + βI)Z + Z(A + βI)ᵀ = 2BBᵀ`, `β > ‖A‖`.
fn initial_gain(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let m = b.cols();
    if is_hurwitz(&char_poly(a))? {
        return Ok(Matrix::zeros(m, n));
    }
    if m == 1 {
        let poles: Vec<Complex64> = (1..=n).map(|i| Complex64::new(-(i as f64), 0.0)).collect();
        return Ok(Matrix::row(&place_poles(a, b, &poles)?));
    }
    let beta = a.frobenius_norm() + 1.0;
    let shifted = a + &Matrix::identity(n).scale(beta);
    let z = solve_lyapunov(&shifted.transpose(), &(b * &b.transpose()).scale(-2.0))?;
    let z_inv = z.inverse().map_err(|_| Error::Uncontrollable {
        rank: crate::observer::controllability_matrix(a, b).rank(1e-10),
        n,
    })?;
    Ok(&b.transpose() * &z_inv)
}

/// `K = R⁻¹BᵀP` from the stabilizing CARE solution.
pub fn lqr_gain(a: &Matrix, b: &Matrix, weights: &CostWeights) -> Result<Lqr> {
    let solution = solve_care(a, b, weights)?;
    let k = weights.r.solve(&(&b.transpose() * &solution.p))?;
    Ok(Lqr { k, solution })
}
