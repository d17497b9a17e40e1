//! Reference implementations used as independent oracles.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use rand::rngs::StdRng;
use rand::Rng;
use regforge::lti::Matrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Eigenvalues via nalgebra's real Schur decomposition.
pub fn eigenvalues(m: &Matrix) -> Vec<Complex<f64>> {
    to_na(m).complex_eigenvalues().iter().copied().collect()
}

pub fn max_real_part(m: &Matrix) -> f64 {
    eigenvalues(m)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Roots of `c[0] s^n + ... + c[n]` as eigenvalues of the companion matrix.
pub fn poly_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

pub fn eval_poly(c: &[f64], s: Complex<f64>) -> Complex<f64> {
    c.iter().fold(Complex::new(0.0, 0.0), |acc, &k| acc * s + k)
}

/// Controllability matrix rank from an SVD.
pub fn controllable(a: &Matrix, b: &Matrix) -> bool {
    let sv = controllability_singular_values(a, b);
    let tol = 1e-8 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol).count() == a.rows()
}

/// `σ_min / σ_max` of the controllability matrix.
pub fn controllability_ratio(a: &Matrix, b: &Matrix) -> f64 {
    let sv = controllability_singular_values(a, b);
    sv.min() / sv.max()
}

fn controllability_singular_values(a: &Matrix, b: &Matrix) -> nalgebra::DVector<f64> {
    let (a, b) = (to_na(a), to_na(b));
    let n = a.nrows();
    let mut blocks = b.clone();
    let mut cur = b;
    for _ in 1..n {
        cur = &a * &cur;
        blocks = DMatrix::from_columns(
            &blocks
                .column_iter()
                .chain(cur.column_iter())
                .collect::<Vec<_>>(),
        );
    }
    blocks.singular_values()
}

/// Full CARE residual `AᵀP + PA − PBR⁻¹BᵀP + Q`, computed with nalgebra.
pub fn care_residual(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> f64 {
    let (a, b, q, r, p) = (to_na(a), to_na(b), to_na(q), to_na(r), to_na(p));
    let rinv = r.try_inverse().expect("R invertible");
    let res = a.transpose() * &p + &p * &a - &p * &b * rinv * b.transpose() * &p + q;
    res.norm()
}

/// Positive-definite CARE roots for n = 2, m = 1, found by damped Newton
/// on the three scalar equations in (p11, p12, p22) from a spread of
/// positive-definite starting points. Returns every distinct root found.
pub fn care_2x2_brute_force(a: &Matrix, b: &Matrix, q: &Matrix, r: f64) -> Vec<[f64; 3]> {
    use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
    use rand::{Rng, SeedableRng};
    let a = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let b = Vector2::new(b[(0, 0)], b[(1, 0)]);
    let q = Matrix2::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
    let sym = |p: &Vector3<f64>| Matrix2::new(p[0], p[1], p[1], p[2]);
    let pack = |m: &Matrix2<f64>| Vector3::new(m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    // Residual and its magnitude scale.
    let f = |p: &Vector3<f64>| {
        let pm = sym(p);
        let pb = pm * b;
        let lin = a.transpose() * pm + pm * a;
        let quad = pb * pb.transpose() / r;
        let scale = lin.norm() + quad.norm() + q.norm();
        (pack(&(lin - quad + q)), scale)
    };
    let basis = [
        Matrix2::new(1.0, 0.0, 0.0, 0.0),
        Matrix2::new(0.0, 1.0, 1.0, 0.0),
        Matrix2::new(0.0, 0.0, 0.0, 1.0),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    let mut roots: Vec<[f64; 3]> = Vec::new();
    for _ in 0..200 {
        let p11 = 10f64.powf(rng.gen_range(-1.0..4.0));
        let p22 = 10f64.powf(rng.gen_range(-1.0..4.0));
        let rho = rng.gen_range(-4.0f64..4.0).tanh();
        let mut p = Vector3::new(p11, rho * (p11 * p22).sqrt(), p22);
        let mut converged = false;
        for _ in 0..200 {
            let (fp, scale) = f(&p);
            if fp.norm() <= 1e-13 * scale {
                converged = true;
                break;
            }
            // Directional derivative along E is Aclᵀ E + E Acl.
            let acl = a - b * (b.transpose() * sym(&p)) / r;
            let mut jac = Matrix3::zeros();
            for (j, e) in basis.iter().enumerate() {
                jac.set_column(j, &pack(&(acl.transpose() * e + e * acl)));
            }
            let Some(step) = jac.lu().solve(&-fp) else {
                break;
            };
            let mut t = 1.0;
            while t > 1e-8 && f(&(p + step * t)).0.norm() >= fp.norm() {
                t *= 0.5;
            }
            p += step * t;
            if step.norm() * t <= 1e-14 * (1.0 + p.amax()) {
                let (fp, scale) = f(&p);
                converged = fp.norm() <= 1e-10 * scale;
                break;
            }
            if !p.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        let pd = p[0] > 0.0 && p[0] * p[2] - p[1] * p[1] > 0.0;
        let seen = roots
            .iter()
            .any(|r| (0..3).all(|i| (r[i] - p[i]).abs() < 1e-6 * (1.0 + p[i].abs())));
        if converged && pd && !seen {
            roots.push([p[0], p[1], p[2]]);
        }
    }
    roots
}

/// Step response of `18 / (s² + 2.5s + 1)` by partial fractions.
pub fn rounded_plant_step(t: f64) -> f64 {
    18.0 * (1.0 - (4.0 / 3.0) * (-0.5 * t).exp() + (1.0 / 3.0) * (-2.0 * t).exp())
}

/// Largest deviation of a simulated unit step of `18 / (s² + 2.5s + 1)`
/// from the analytic response over ten seconds.
pub fn rounded_plant_max_error(dt: f64) -> f64 {
    use regforge::lti::{tf_to_ss, TransferFunction};
    use regforge::sim::{simulate, SimConfig};
    let tf = TransferFunction::from_coeffs(&[18.0], &[1.0, 2.5, 1.0]).unwrap();
    let ss = tf_to_ss(&tf).unwrap();
    let cfg = SimConfig {
        dt,
        ..SimConfig::step(1.0, 10.0)
    };
    let ts = simulate(&ss, &cfg).unwrap();
    ts.times
        .iter()
        .zip(&ts.outputs)
        .map(|(&t, &y)| (y - rounded_plant_step(t)).abs())
        .fold(0.0, f64::max)
}

/// Near-uncontrollable pairs have Riccati solutions with norms around 1e7,
/// where an absolute residual of 1e-8 is below double precision.
pub const WELL_CONDITIONED: f64 = 1e-2;

pub struct Problem {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub r: Matrix,
}

pub fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.gen_range(-scale..scale))
            .collect(),
    )
    .unwrap()
}

/// Random controllable pair with Q ≻ 0 and R ≻ 0. `None` when the pair is
/// uncontrollable or its controllability matrix is badly conditioned.
pub fn problem(rng: &mut StdRng) -> Option<Problem> {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=2.min(n));
    let a = random_matrix(rng, n, n, 2.0);
    let b = random_matrix(rng, n, m, 1.5);
    if !controllable(&a, &b) || controllability_ratio(&a, &b) < WELL_CONDITIONED {
        return None;
    }
    let l = random_matrix(rng, n, n, 1.0);
    let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
    let q = &(&l * &l.transpose()) + &Matrix::from_diagonal(&diag);
    let lr = random_matrix(rng, m, m, 1.0);
    let r = &(&lr * &lr.transpose()) + &Matrix::identity(m).scale(rng.gen_range(0.2..2.0));
    Some(Problem { a, b, q, r })
}
