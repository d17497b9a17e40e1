//! Observer-based output-feedback compensators and pole placement.
//!
//! The compensator dynamics are always `A_c = A − BK − HC`. How that block
//! is wired into the loop is not unique in the literature the plant model
//! comes from, so the input/output matrices are chosen by a
//! [`Convention`] tag and carried along with the model.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{
    char_poly, feedback_interconnect, is_hurwitz, Matrix, Polynomial, StateSpaceModel,
};

/// Observer injection gain `H` (n × p).
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverGain {
    h: Matrix,
}

impl ObserverGain {
    pub fn new(h: Matrix) -> Self {
        ObserverGain { h }
    }

    /// Single-output gain from a column of values.
    pub fn column(values: &[f64]) -> Self {
        ObserverGain {
            h: Matrix::column(values),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }
}

/// Input/output wiring of the compensator block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `B_c = B`, `C_c = −K`, `D_c = I`: the block form `I − K(sI − A + BK + HC)⁻¹B`.
    Eq17Literal,
    /// `B_c = H`, `C_c = +K`, `D_c = 0`: the printed numeric realization.
    PaperNumeric,
    /// `B_c = H`, `C_c = −K`, `D_c = 0`, with `u = N·r − K·x̂` and the
    /// plant output driving the observer.
    StandardLuenberger,
}

impl Convention {
    pub const ALL: [Convention; 3] = [
        Convention::Eq17Literal,
        Convention::PaperNumeric,
        Convention::StandardLuenberger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Convention::Eq17Literal => "eq17-literal",
            Convention::PaperNumeric => "paper-numeric",
            Convention::StandardLuenberger => "standard-luenberger",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Convention::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown convention `{s}` (expected eq17-literal, paper-numeric or standard-luenberger)"
                ))
            })
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimation-error dynamics `ė = (A − HC)e` and their stability verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorDynamics {
    pub matrix: Matrix,
    pub char_poly: Polynomial,
    pub hurwitz: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObserverBasedController {
    model: StateSpaceModel,
    convention: Convention,
    k: Vec<f64>,
    h: ObserverGain,
    plant_b: Matrix,
    audit: ErrorDynamics,
}

impl ObserverBasedController {
    pub fn model(&self) -> &StateSpaceModel {
        &self.model
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn state_gain(&self) -> &[f64] {
        &self.k
    }

    pub fn observer_gain(&self) -> &ObserverGain {
        &self.h
    }

    /// Stability audit of `A − HC`, computed at construction.
    pub fn error_dynamics(&self) -> &ErrorDynamics {
        &self.audit
    }

    /// Closes the loop around `plant` with reference `r` as input and the
    /// plant output as output. No reference prescaling is applied.
    ///
    /// For [`Convention::StandardLuenberger`] the state is `[x; x̂]` and
    /// the reference enters both plant and observer through `B`, so the
    /// characteristic polynomial factors as `det(sI − A + BK)·det(sI − A + HC)`.
    /// The other conventions sit in the forward path of a unity negative
    /// feedback loop.
    pub fn close_loop(&self, plant: &StateSpaceModel) -> Result<StateSpaceModel> {
        check_plant(plant)?;
        if plant.states() != self.model.states() {
            return Err(Error::dim("controller and plant state dimensions differ"));
        }
        match self.convention {
            Convention::StandardLuenberger => {
                let n = plant.states();
                let a = Matrix::block(
                    plant.a(),
                    &(plant.b() * self.model.c()),
                    &(self.model.b() * plant.c()),
                    self.model.a(),
                )?;
                let b = plant.b().vstack(&self.plant_b)?;
                let c = plant.c().hstack(&Matrix::zeros(1, n))?;
                StateSpaceModel::new(a, b, c, Matrix::scalar(0.0))
            }
            Convention::Eq17Literal | Convention::PaperNumeric => {
                feedback_interconnect(plant, &self.model)
            }
        }
    }
}

fn check_plant(plant: &StateSpaceModel) -> Result<()> {
    if !plant.is_siso() {
        return Err(Error::Unsupported(
            "observer-based control needs a SISO plant".into(),
        ));
    }
    if plant.d()[(0, 0)] != 0.0 {
        return Err(Error::Unsupported(
            "observer-based control needs a plant without direct feedthrough (D = 0)".into(),
        ));
    }
    Ok(())
}

/// Assembles the compensator with dynamics `A − BK − HC`.
///
/// The audit of `A − HC` is attached to the result and never fails the
/// construction: an unstable observer is still a valid object to study.
pub fn build_observer_controller(
    plant: &StateSpaceModel,
    k: &[f64],
    h: &ObserverGain,
    convention: Convention,
) -> Result<ObserverBasedController> {
    check_plant(plant)?;
    let n = plant.states();
    if k.len() != n {
        return Err(Error::dim(format!(
            "K has {} entries, plant has {n} states",
            k.len()
        )));
    }
    if h.matrix().shape() != (n, 1) {
        return Err(Error::dim(format!(
            "H must be {n}x1, got {}x{}",
            h.matrix().rows(),
            h.matrix().cols()
        )));
    }
    let k_row = Matrix::row(k);
    let a_c = &(plant.a() - &(plant.b() * &k_row)) - &(h.matrix() * plant.c());
    let (b_c, c_c, d_c) = match convention {
        Convention::Eq17Literal => (plant.b().clone(), -&k_row, Matrix::identity(1)),
        Convention::PaperNumeric => (h.matrix().clone(), k_row, Matrix::scalar(0.0)),
        Convention::StandardLuenberger => (h.matrix().clone(), -&k_row, Matrix::scalar(0.0)),
    };
    let model = StateSpaceModel::new(a_c, b_c, c_c, d_c)?;
    let audit = observer_error_dynamics(plant, h)?;
    Ok(ObserverBasedController {
        model,
        convention,
        k: k.to_vec(),
        h: h.clone(),
        plant_b: plant.b().clone(),
        audit,
    })
}

/// `A − HC` with its characteristic polynomial and Hurwitz verdict.
pub fn observer_error_dynamics(plant: &StateSpaceModel, h: &ObserverGain) -> Result<ErrorDynamics> {
    if h.matrix().rows() != plant.states() || h.matrix().cols() != plant.outputs() {
        return Err(Error::dim(format!(
            "H must be {}x{}, got {}x{}",
            plant.states(),
            plant.outputs(),
            h.matrix().rows(),
            h.matrix().cols()
        )));
    }
    let matrix = plant.a() - &(h.matrix() * plant.c());
    let char_poly = char_poly(&matrix);
    let hurwitz = if char_poly.degree() == 0 {
        true
    } else {
        is_hurwitz(&char_poly)?
    };
    Ok(ErrorDynamics {
        matrix,
        char_poly,
        hurwitz,
    })
}

/// `[B, AB, …, Aⁿ⁻¹B]`.
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    let mut blocks = b.clone();
    let mut last = b.clone();
    for _ in 1..n {
        last = a * &last;
        blocks = blocks.hstack(&last).expect("same row count");
    }
    blocks
}

/// State-feedback gain placing the eigenvalues of `A − BK` at `desired`.
///
/// `desired` must hold `n` poles closed under complex conjugation.
pub fn place_poles(a: &Matrix, b: &Matrix, desired: &[Complex64]) -> Result<Vec<f64>> {
    if desired.len() != a.rows() {
        return Err(Error::invalid(format!(
            "need {} desired poles, got {}",
            a.rows(),
            desired.len()
        )));
    }
    check_conjugate_closed(desired)?;
    place_char_poly(a, b, &Polynomial::from_roots(desired))
}

/// Ackermann's formula: `K = e_nᵀ 𝒞⁻¹ φ(A)` for a monic target polynomial `φ`.
pub fn place_char_poly(a: &Matrix, b: &Matrix, target: &Polynomial) -> Result<Vec<f64>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::dim("A must be square"));
    }
    if b.shape() != (n, 1) {
        return Err(Error::Unsupported(format!(
            "pole placement needs a single-input B of shape {n}x1, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if target.degree() != n {
        return Err(Error::invalid(format!(
            "target polynomial has degree {}, expected {n}",
            target.degree()
        )));
    }
    let target = target.monic()?;
    let ctrb = controllability_matrix(a, b);
    let rank = ctrb.rank(1e-10);
    if rank < n {
        return Err(Error::Uncontrollable { rank, n });
    }
    // φ(A) by Horner's scheme.
    let mut phi = Matrix::zeros(n, n);
    let ident = Matrix::identity(n);
    for &c in target.coeffs() {
        phi = &(&phi * a) + &ident.scale(c);
    }
    let mut e_n = Matrix::zeros(n, 1);
    e_n[(n - 1, 0)] = 1.0;
    // zᵀ = e_nᵀ 𝒞⁻¹  ⇔  𝒞ᵀ z = e_n
    let z = ctrb
        .transpose()
        .solve(&e_n)
        .map_err(|_| Error::Uncontrollable { rank, n })?;
    Ok((&z.transpose() * &phi).into_vec())
}

/// Observer gain placing the eigenvalues of `A − HC` at `desired`, by
/// pole placement on the dual pair `(Aᵀ, Cᵀ)`.
pub fn place_observer_poles(a: &Matrix, c: &Matrix, desired: &[Complex64]) -> Result<ObserverGain> {
    let k = place_poles(&a.transpose(), &c.transpose(), desired)?;
    Ok(ObserverGain::column(&k))
}

fn check_conjugate_closed(poles: &[Complex64]) -> Result<()> {
    for p in poles {
        if p.im == 0.0 {
            continue;
        }
        let scale = 1e-9 * (1.0 + p.norm());
        let count = |z: Complex64| poles.iter().filter(|q| (**q - z).norm() <= scale).count();
        if count(*p) != count(p.conj()) {
            return Err(Error::invalid(format!(
                "desired poles are not closed under conjugation ({p} has no partner)"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plant() -> StateSpaceModel {
        StateSpaceModel::new(
            Matrix::from_rows(&[[-2.5, -1.0], [1.0, 0.0]]),
            Matrix::column(&[1.0, 0.0]),
            Matrix::row(&[0.0, 18.0]),
            Matrix::scalar(0.0),
        )
        .unwrap()
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    const K: [f64; 2] = [1.7720, 2.0];

    #[test]
    fn compensator_dynamics_match_printed_matrix() {
        let h = ObserverGain::column(&[2.0, -0.5]);
        for conv in Convention::ALL {
            let ctrl = build_observer_controller(&plant(), &K, &h, conv).unwrap();
            let want = Matrix::from_rows(&[[-4.272, -39.0], [1.0, 9.0]]);
            assert!((ctrl.model().a() - &want).max_abs() < 1e-12, "{conv}");
        }
    }

    #[test]
    fn paper_numeric_io_matrices() {
        let h = ObserverGain::column(&[2.0, -0.5]);
        let ctrl = build_observer_controller(&plant(), &K, &h, Convention::PaperNumeric).unwrap();
        assert_eq!(ctrl.model().b(), &Matrix::column(&[2.0, -0.5]));
        assert_eq!(ctrl.model().c(), &Matrix::row(&[1.772, 2.0]));
        assert_eq!(ctrl.model().d(), &Matrix::scalar(0.0));
    }

    #[test]
    fn literal_and_standard_io_matrices() {
        let h = ObserverGain::column(&[2.0, -0.5]);
        let lit = build_observer_controller(&plant(), &K, &h, Convention::Eq17Literal).unwrap();
        assert_eq!(lit.model().b(), plant().b());
        assert_eq!(lit.model().c(), &Matrix::row(&[-1.772, -2.0]));
        assert_eq!(lit.model().d(), &Matrix::identity(1));
        let std =
            build_observer_controller(&plant(), &K, &h, Convention::StandardLuenberger).unwrap();
        assert_eq!(std.model().b(), &Matrix::column(&[2.0, -0.5]));
        assert_eq!(std.model().c(), &Matrix::row(&[-1.772, -2.0]));
    }

    #[test]
    fn zero_gains_copy_plant_dynamics() {
        let ctrl = build_observer_controller(
            &plant(),
            &[0.0, 0.0],
            &ObserverGain::column(&[0.0, 0.0]),
            Convention::StandardLuenberger,
        )
        .unwrap();
        assert_eq!(ctrl.model().a(), plant().a());
        assert!(ctrl.error_dynamics().hurwitz);
    }

    #[test]
    fn published_observer_is_unstable() {
        let e = observer_error_dynamics(&plant(), &ObserverGain::column(&[2.0, -0.5])).unwrap();
        assert_eq!(e.matrix, Matrix::from_rows(&[[-2.5, -37.0], [1.0, 9.0]]));
        assert_eq!(e.char_poly.coeffs(), &[1.0, -6.5, 14.5]);
        assert!(!e.hurwitz);
    }

    #[test]
    fn non_negative_trace_is_never_hurwitz() {
        for h in [[0.0, 0.5], [1.0, -1.0], [-3.0, -0.2]] {
            let e = observer_error_dynamics(&plant(), &ObserverGain::column(&h)).unwrap();
            if e.matrix.trace() >= 0.0 {
                assert!(!e.hurwitz, "{h:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_plants_and_dims() {
        let with_d = StateSpaceModel::new(
            plant().a().clone(),
            plant().b().clone(),
            plant().c().clone(),
            Matrix::scalar(1.0),
        )
        .unwrap();
        let h = ObserverGain::column(&[2.0, -0.5]);
        assert!(matches!(
            build_observer_controller(&with_d, &K, &h, Convention::PaperNumeric),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            build_observer_controller(&plant(), &[1.0], &h, Convention::PaperNumeric),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn place_open_loop_poles_gives_zero_gain() {
        let k = place_poles(plant().a(), plant().b(), &real(&[-0.5, -2.0])).unwrap();
        assert!(k.iter().all(|v| v.abs() < 1e-12), "{k:?}");
    }

    #[test]
    fn place_reproduces_published_state_gain() {
        let target = Polynomial::new(&[1.0, 4.272, 3.0]);
        let k = place_char_poly(plant().a(), plant().b(), &target).unwrap();
        assert!(
            (k[0] - 1.772).abs() < 1e-12 && (k[1] - 2.0).abs() < 1e-12,
            "{k:?}"
        );
        let k = place_poles(plant().a(), plant().b(), &target.roots()).unwrap();
        assert!(
            (k[0] - 1.772).abs() < 1e-9 && (k[1] - 2.0).abs() < 1e-9,
            "{k:?}"
        );
    }

    #[test]
    fn dual_placement_for_observer() {
        let h = place_observer_poles(plant().a(), plant().c(), &real(&[-5.0, -6.0])).unwrap();
        let e = observer_error_dynamics(&plant(), &h).unwrap();
        for (a, b) in e.char_poly.coeffs().iter().zip([1.0, 11.0, 30.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(e.hurwitz);
    }

    #[test]
    fn uncontrollable_pair_reports_rank() {
        let a = Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]);
        let b = Matrix::column(&[1.0, 0.0]);
        assert_eq!(
            place_poles(&a, &b, &real(&[-1.0, -3.0])),
            Err(Error::Uncontrollable { rank: 1, n: 2 })
        );
    }

    #[test]
    fn non_conjugate_set_is_rejected() {
        let poles = [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, 2.0)];
        assert!(place_poles(plant().a(), plant().b(), &poles).is_err());
        let ok = [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)];
        let k = place_poles(plant().a(), plant().b(), &ok).unwrap();
        let cl = plant().a() - &(plant().b() * &Matrix::row(&k));
        for (a, b) in char_poly(&cl).coeffs().iter().zip([1.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_on_published_design() {
        let h = ObserverGain::column(&[2.0, -0.5]);
        let ctrl =
            build_observer_controller(&plant(), &K, &h, Convention::StandardLuenberger).unwrap();
        let cl = ctrl.close_loop(&plant()).unwrap();
        let a_bk = plant().a() - &(plant().b() * &Matrix::row(&K));
        let want = char_poly(&a_bk).mul(&ctrl.error_dynamics().char_poly);
        for (a, b) in cl.char_poly().coeffs().iter().zip(want.coeffs()) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
        }
        assert!(!is_hurwitz(&cl.char_poly()).unwrap());
    }

    #[test]
    fn convention_names_round_trip() {
        for c in Convention::ALL {
            assert_eq!(Convention::parse(c.name()).unwrap(), c);
        }
        assert!(Convention::parse("luenberger").is_err());
    }
}
