//! Plain-text run reports.

use std::fmt::{self, Write as _};
use std::path::PathBuf;

use crate::lti::{Polynomial, StateSpaceModel, TransferFunction};
use crate::numfmt::format_g;
use crate::observer::Convention;
use crate::plant::{ElectricalReport, PlantParams, PlantPreset};
use crate::sim::StepMetrics;

/// Stability verdict for one matrix of the design.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub label: String,
    pub char_poly: Polynomial,
    pub hurwitz: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerSummary {
    pub kind: String,
    pub k: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub care_residual: Option<f64>,
    pub care_iterations: Option<usize>,
    pub convention: Option<Convention>,
    pub model: Option<StateSpaceModel>,
    pub prescale: Option<f64>,
}

impl ControllerSummary {
    pub fn new(kind: impl Into<String>) -> Self {
        ControllerSummary {
            kind: kind.into(),
            k: None,
            h: None,
            care_residual: None,
            care_iterations: None,
            convention: None,
            model: None,
            prescale: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Electrical {
    pub flow: f64,
    pub report: ElectricalReport,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub preset: Option<PlantPreset>,
    pub plant_tf: Option<TransferFunction>,
    pub plant_ss: Option<StateSpaceModel>,
    pub dc_gain: Option<f64>,
    pub controller: Option<ControllerSummary>,
    pub verdicts: Vec<Verdict>,
    pub final_output: Option<f64>,
    pub diverged: bool,
    pub metrics: Option<StepMetrics>,
    pub electrical: Option<Electrical>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(name: impl Into<String>) -> Self {
        RunReport {
            name: name.into(),
            ..RunReport::default()
        }
    }

    pub fn verdict(&mut self, label: impl Into<String>, char_poly: Polynomial, hurwitz: bool) {
        self.verdicts.push(Verdict {
            label: label.into(),
            char_poly,
            hurwitz,
        });
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format_g(*x, 6)).collect();
    format!("[{}]", items.join(", "))
}

fn ss_lines(out: &mut String, indent: &str, ss: &StateSpaceModel) {
    let _ = writeln!(out, "{indent}A = {}", ss.a());
    let _ = writeln!(out, "{indent}B = {}", ss.b());
    let _ = writeln!(out, "{indent}C = {}", ss.c());
    let _ = writeln!(out, "{indent}D = {}", ss.d());
}

pub fn write_metrics(out: &mut String, m: &StepMetrics) {
    let _ = writeln!(out, "  steady state: {}", format_g(m.steady_state, 6));
    if m.degenerate {
        let _ = writeln!(
            out,
            "  (steady state is zero; overshoot, settling and rise time undefined)"
        );
        return;
    }
    let _ = writeln!(out, "  overshoot: {} %", format_g(m.overshoot_pct, 4));
    match m.settling_time {
        Some(t) => {
            let _ = writeln!(out, "  settling time (2 % band): {} s", format_g(t, 4));
        }
        None => {
            let _ = writeln!(
                out,
                "  settling time (2 % band): not settled within the run"
            );
        }
    }
    match m.rise_time {
        Some(t) => {
            let _ = writeln!(out, "  rise time (10-90 %): {} s", format_g(t, 4));
        }
        None => {
            let _ = writeln!(out, "  rise time (10-90 %): not reached");
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "== {} ==", self.name);
        if let Some(p) = self.preset {
            let _ = writeln!(s, "plant preset: {}", p.name());
        }
        if let Some(tf) = &self.plant_tf {
            let _ = writeln!(s, "plant G(s) = {tf}");
        }
        if let Some(ss) = &self.plant_ss {
            let _ = writeln!(s, "plant state space:");
            ss_lines(&mut s, "  ", ss);
        }
        if let Some(g) = self.dc_gain {
            let _ = writeln!(s, "plant dc gain: {}", format_g(g, 6));
        }
        if let Some(c) = &self.controller {
            let _ = writeln!(s, "controller: {}", c.kind);
            if let Some(k) = &c.k {
                let _ = writeln!(s, "  K = {}", list(k));
            }
            if let Some(h) = &c.h {
                let _ = writeln!(s, "  H = {}", list(h));
            }
            if let Some(r) = c.care_residual {
                let iters = c
                    .care_iterations
                    .map(|i| format!(" after {i} iterations"))
                    .unwrap_or_default();
                let _ = writeln!(s, "  Riccati residual: {r:.3e}{iters}");
            }
            if let Some(conv) = c.convention {
                let _ = writeln!(s, "  convention: {conv}");
            }
            if let Some(m) = &c.model {
                let _ = writeln!(s, "  compensator state space:");
                ss_lines(&mut s, "    ", m);
            }
            if let Some(n) = c.prescale {
                let _ = writeln!(s, "  reference prescale N = {}", format_g(n, 6));
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(s, "stability:");
            for v in &self.verdicts {
                let word = if v.hurwitz { "Hurwitz" } else { "NOT Hurwitz" };
                let _ = writeln!(s, "  {}: {word} (char poly {})", v.label, v.char_poly);
            }
        }
        if self.diverged {
            let _ = writeln!(s, "simulation: DIVERGED");
        }
        if let Some(y) = self.final_output {
            let _ = writeln!(s, "final output: {}", format_g(y, 6));
        }
        if let Some(m) = &self.metrics {
            let _ = writeln!(s, "step metrics:");
            write_metrics(&mut s, m);
        }
        if let Some(e) = &self.electrical {
            let r = &e.report;
            let _ = writeln!(s, "electrical steady state at {} g/s:", format_g(e.flow, 6));
            let _ = writeln!(s, "  shaft speed: {} rad/s", format_g(r.omega, 6));
            let _ = writeln!(s, "  terminal voltage: {:.2} V", r.v_out);
            let _ = writeln!(s, "  armature current: {} A", format_g(r.i_a, 6));
            let _ = writeln!(s, "  induced emf: {} V", format_g(r.e_g, 6));
            let _ = writeln!(s, "  output power: {:.1} W", r.p_out);
            let _ = writeln!(s, "  input power: {:.1} W", r.p_in);
            let _ = writeln!(s, "  efficiency: {:.2} %", r.efficiency);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        for p in &self.files {
            let _ = writeln!(s, "wrote {}", p.display());
        }
        f.write_str(&s)
    }
}

/// Flow (g/s) at which published operating-point figures are quoted.
pub const PUBLISHED_FLOW: f64 = 5.0;

/// Published operating point for the reference parameter set:
/// (quantity, unit, value, decimals for the computed counterpart).
const PUBLISHED_OPERATING_POINT: [(&str, &str, f64, usize); 4] = [
    ("steady-state voltage", "V", 90.0, 2),
    ("output power", "W", 1000.0, 1),
    ("input power", "W", 1300.0, 1),
    ("efficiency", "%", 76.92, 2),
];

/// Relative gap above which a published value is flagged.
const DISCREPANCY_TOLERANCE: f64 = 5e-3;

/// Warnings for published operating-point values that the circuit equations
/// do not reproduce. Only the reference parameter set at the published flow
/// has published values to compare against.
pub fn published_discrepancies(
    params: &PlantParams,
    flow: f64,
    computed: &ElectricalReport,
) -> Vec<String> {
    if *params != PlantParams::reference() || flow != PUBLISHED_FLOW {
        return Vec::new();
    }
    let values = [
        computed.v_out,
        computed.p_out,
        computed.p_in,
        computed.efficiency,
    ];
    PUBLISHED_OPERATING_POINT
        .iter()
        .zip(values)
        .filter(|((_, _, published, _), value)| ((value - published) / published).abs() > DISCREPANCY_TOLERANCE)
        .map(|((what, unit, published, decimals), value)| {
            format!(
                "published {what} {published} {unit} is not reproduced by the circuit equations; computed {value:.decimals$} {unit}"
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::steady_state_report;

    #[test]
    fn reference_operating_point_is_flagged() {
        let p = PlantParams::reference();
        let r = steady_state_report(&p, 5.0).unwrap();
        let w = published_discrepancies(&p, 5.0, &r);
        assert_eq!(w.len(), 4, "{w:?}");
        assert!(
            w[3].contains("76.92 %") && w[3].contains("computed 57.14 %"),
            "{}",
            w[3]
        );
        assert!(w[1].contains("computed 1044.9 W"), "{}", w[1]);
        assert!(
            w[2].contains("1300 W") && w[2].contains("computed 1828.6 W"),
            "{}",
            w[2]
        );
        assert!(
            w[0].contains("90 V") && w[0].contains("computed 91.43 V"),
            "{}",
            w[0]
        );
        assert!(
            published_discrepancies(&p, 4.0, &steady_state_report(&p, 4.0).unwrap()).is_empty()
        );
    }

    #[test]
    fn display_lists_sections() {
        let mut r = RunReport::new("demo");
        r.verdict("plant", Polynomial::new(&[1.0, 2.5, 1.0]), true);
        r.warnings.push("something".into());
        let text = r.to_string();
        assert!(text.starts_with("== demo =="));
        assert!(text.contains("plant: Hurwitz"));
        assert!(text.contains("warning: something"));
    }
}
