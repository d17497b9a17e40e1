//! Steam turbine and series-wound DC generator models.
//!
//! The steam vessel is a first-order lag with time constant `tau_t`; the
//! generator armature circuit is an RL load driven by an EMF proportional
//! to shaft speed. Everything downstream is built from these two transfer
//! functions.

use crate::error::{Error, Result};
use crate::lti::{dc_gain, tf_series, Polynomial, TransferFunction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurbineParams {
    /// Steam vessel time constant, seconds.
    pub tau_t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorParams {
    /// Speed-proportional EMF constant, V·s/rad.
    pub k1: f64,
    /// Gear ratio between turbine and generator shafts.
    pub n: f64,
    /// Field winding inductance, H.
    pub l_f: f64,
    /// Field winding resistance, Ω.
    pub r_f: f64,
    /// Armature winding inductance, H.
    pub l_a: f64,
    /// Armature winding resistance, Ω.
    pub r_a: f64,
    /// Load resistance, Ω.
    pub r_l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantParams {
    pub turbine: TurbineParams,
    pub generator: GeneratorParams,
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("turbine.tau_t", self.tau_t)
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("generator.k1", self.k1)?;
        check_positive("generator.n", self.n)?;
        check_positive("generator.l_f", self.l_f)?;
        check_positive("generator.r_f", self.r_f)?;
        check_positive("generator.l_a", self.l_a)?;
        check_positive("generator.r_a", self.r_a)?;
        check_positive("generator.r_l", self.r_l)
    }

    /// Series inductance of field and armature windings.
    pub fn total_inductance(&self) -> f64 {
        self.l_f + self.l_a
    }

    /// Field, armature and load resistance in series.
    pub fn total_resistance(&self) -> f64 {
        self.r_f + self.r_a + self.r_l
    }
}

impl PlantParams {
    /// Reference parameter set: τ_T = 2 s, k₁ = 4, n = 4, L_f = 3 H,
    /// R_f = 2 Ω, L_a = 4 H, R_a = 4 Ω, R_L = 8 Ω.
    pub fn reference() -> Self {
        PlantParams {
            turbine: TurbineParams { tau_t: 2.0 },
            generator: GeneratorParams {
                k1: 4.0,
                n: 4.0,
                l_f: 3.0,
                r_f: 2.0,
                l_a: 4.0,
                r_a: 4.0,
                r_l: 8.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.generator.validate()
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{field} must be a finite value > 0, got {v}"
        )))
    }
}

/// Which plant transfer function to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlantPreset {
    /// Built from the physical parameters.
    Exact,
    /// The published rounded model `18 / (s² + 2.5s + 1)`.
    PaperRounded,
}

impl PlantPreset {
    pub const ALL: [PlantPreset; 2] = [PlantPreset::Exact, PlantPreset::PaperRounded];

    pub fn name(self) -> &'static str {
        match self {
            PlantPreset::Exact => "exact",
            PlantPreset::PaperRounded => "paper-rounded",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PlantPreset::Exact),
            "paper-rounded" => Ok(PlantPreset::PaperRounded),
            other => Err(Error::invalid(format!(
                "unknown plant preset `{other}` (expected exact or paper-rounded)"
            ))),
        }
    }
}

/// Steam flow to turbine speed, `τ / (τs + 1)`.
pub fn turbine_tf(p: &TurbineParams) -> TransferFunction {
    TransferFunction::from_coeffs(&[p.tau_t], &[p.tau_t, 1.0])
        .expect("denominator has a unit constant term")
}

/// Turbine speed to terminal voltage, `n·R_L·k₁ / ((L_f + L_a)s + R_f + R_a + R_L)`.
pub fn generator_tf(p: &GeneratorParams) -> TransferFunction {
    TransferFunction::from_coeffs(
        &[p.n * p.r_l * p.k1],
        &[p.total_inductance(), p.total_resistance()],
    )
    .expect("generator denominator is nonzero for valid parameters")
}

/// Steam flow to terminal voltage: turbine and generator in cascade.
pub fn plant_tf(p: &PlantParams) -> TransferFunction {
    tf_series(&turbine_tf(&p.turbine), &generator_tf(&p.generator))
}

/// The rounded published model `18 / (s² + 2.5s + 1)`.
pub fn paper_rounded_tf() -> TransferFunction {
    TransferFunction::new(Polynomial::new(&[18.0]), Polynomial::new(&[1.0, 2.5, 1.0]))
        .expect("constant model")
}

/// Plant transfer function for a preset.
pub fn plant_model(p: &PlantParams, preset: PlantPreset) -> TransferFunction {
    match preset {
        PlantPreset::Exact => plant_tf(p),
        PlantPreset::PaperRounded => paper_rounded_tf(),
    }
}

/// Electrical operating point of the generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectricalReport {
    /// Turbine shaft speed, rad/s.
    pub omega: f64,
    /// Terminal voltage across the load, V.
    pub v_out: f64,
    /// Armature current, A.
    pub i_a: f64,
    /// Induced EMF, V.
    pub e_g: f64,
    /// Power delivered to the load, W.
    pub p_out: f64,
    /// Electrical power converted at the armature, W.
    pub p_in: f64,
    /// `100 · p_out / p_in`, percent.
    pub efficiency: f64,
}

/// Steady state for a constant steam flow `f_in` (g/s).
///
/// Shaft speed settles at `τ·f_in`, the EMF is `k₁·n·ω`, and the armature
/// current is that EMF over the series resistance. With zero flow the
/// efficiency is reported as its limit `R_L / (R_f + R_a + R_L)`.
pub fn steady_state_report(p: &PlantParams, f_in: f64) -> Result<ElectricalReport> {
    p.validate()?;
    if !(f_in.is_finite() && f_in >= 0.0) {
        return Err(Error::invalid(format!(
            "steam flow must be ≥ 0, got {f_in}"
        )));
    }
    let g = &p.generator;
    let omega = p.turbine.tau_t * f_in;
    let e_g = g.k1 * g.n * omega;
    let i_a = e_g / g.total_resistance();
    let v_out = g.r_l * i_a;
    let p_out = v_out * i_a;
    let p_in = e_g * i_a;
    let efficiency = if p_in > 0.0 {
        100.0 * p_out / p_in
    } else {
        100.0 * g.r_l / g.total_resistance()
    };
    Ok(ElectricalReport {
        omega,
        v_out,
        i_a,
        e_g,
        p_out,
        p_in,
        efficiency,
    })
}

/// Terminal voltage reached for a constant flow, via the transfer function.
pub fn steady_state_voltage(p: &PlantParams, preset: PlantPreset, f_in: f64) -> Result<f64> {
    Ok(dc_gain(&plant_model(p, preset))? * f_in)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn turbine_examples() {
        let g = turbine_tf(&TurbineParams { tau_t: 2.0 });
        assert_eq!(g.num().coeffs(), &[2.0]);
        assert_eq!(g.den().coeffs(), &[2.0, 1.0]);
        let g = turbine_tf(&TurbineParams { tau_t: 1.0 });
        assert_eq!(g.den().coeffs(), &[1.0, 1.0]);
        for tau in [0.1, 2.0, 37.5] {
            assert_eq!(
                dc_gain(&turbine_tf(&TurbineParams { tau_t: tau })).unwrap(),
                tau
            );
        }
    }

    #[test]
    fn generator_examples() {
        let g = generator_tf(&PlantParams::reference().generator);
        assert_eq!(g.num().coeffs(), &[128.0]);
        assert_eq!(g.den().coeffs(), &[7.0, 14.0]);
        assert!(close(dc_gain(&g).unwrap(), 128.0 / 14.0, 1e-14));

        let unit = GeneratorParams {
            k1: 1.0,
            n: 1.0,
            l_f: 0.5,
            r_f: 0.25,
            l_a: 0.5,
            r_a: 0.25,
            r_l: 0.5,
        };
        let g = generator_tf(&unit);
        assert_eq!(g.den().coeffs(), &[1.0, 1.0]);
        assert_eq!(g.num().coeffs(), &[0.5]);
    }

    #[test]
    fn combined_plant() {
        let g = plant_tf(&PlantParams::reference());
        assert_eq!(g.num().coeffs(), &[256.0]);
        assert_eq!(g.den().coeffs(), &[14.0, 35.0, 14.0]);
        assert_eq!(g.normalized().den().coeffs(), &[1.0, 2.5, 1.0]);
        assert!(close(
            g.normalized().num().coeffs()[0],
            18.285714285714285,
            1e-12
        ));
    }

    #[test]
    fn all_unity_parameters() {
        let p = PlantParams {
            turbine: TurbineParams { tau_t: 1.0 },
            generator: GeneratorParams {
                k1: 1.0,
                n: 1.0,
                l_f: 1.0,
                r_f: 1.0,
                l_a: 1.0,
                r_a: 1.0,
                r_l: 1.0,
            },
        };
        // 1/(s+1) · 1/(2s+3)
        let g = plant_tf(&p);
        assert_eq!(g.num().coeffs(), &[1.0]);
        assert_eq!(g.den().coeffs(), &[2.0, 5.0, 3.0]);
    }

    #[test]
    fn reference_steady_state() {
        let r = steady_state_report(&PlantParams::reference(), 5.0).unwrap();
        assert!(close(r.omega, 10.0, 1e-12));
        assert!(close(r.e_g, 160.0, 1e-12));
        assert!(close(r.i_a, 11.428571428571429, 1e-12));
        assert!(close(r.v_out, 91.42857142857143, 1e-12));
        assert!(close(r.p_out, 1044.8979591836735, 1e-9));
        assert!(close(r.p_in, 1828.5714285714287, 1e-9));
        assert!(close(r.efficiency, 57.142857142857146, 1e-9));
    }

    #[test]
    fn zero_flow_report() {
        let r = steady_state_report(&PlantParams::reference(), 0.0).unwrap();
        assert_eq!(
            (r.v_out, r.i_a, r.e_g, r.p_out, r.p_in),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert!(close(r.efficiency, 800.0 / 14.0, 1e-12));
    }

    #[test]
    fn doubling_flow() {
        let p = PlantParams::reference();
        let a = steady_state_report(&p, 3.0).unwrap();
        let b = steady_state_report(&p, 6.0).unwrap();
        assert!(close(b.v_out, 2.0 * a.v_out, 1e-12));
        assert!(close(b.i_a, 2.0 * a.i_a, 1e-12));
        assert!(close(b.e_g, 2.0 * a.e_g, 1e-12));
        assert!(close(b.p_out, 4.0 * a.p_out, 1e-9));
        assert!(close(b.p_in, 4.0 * a.p_in, 1e-9));
        assert!(close(b.efficiency, a.efficiency, 1e-12));
    }

    #[test]
    fn validation_names_the_field() {
        let mut p = PlantParams::reference();
        p.generator.r_l = 0.0;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("generator.r_l"), "{err}");
        let mut p = PlantParams::reference();
        p.turbine.tau_t = -1.0;
        assert!(p
            .validate()
            .unwrap_err()
            .to_string()
            .contains("turbine.tau_t"));
        assert!(steady_state_report(&PlantParams::reference(), -1.0).is_err());
    }

    #[test]
    fn presets() {
        let p = PlantParams::reference();
        assert!(close(
            steady_state_voltage(&p, PlantPreset::PaperRounded, 5.0).unwrap(),
            90.0,
            1e-12
        ));
        assert!(close(
            steady_state_voltage(&p, PlantPreset::Exact, 5.0).unwrap(),
            640.0 / 7.0,
            1e-12
        ));
        assert_eq!(
            PlantPreset::parse("paper-rounded").unwrap(),
            PlantPreset::PaperRounded
        );
        assert!(PlantPreset::parse("rounded").is_err());
    }
}
