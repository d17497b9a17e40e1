//! Flat `key = value` configuration files.
//!
//! One pair per line, dotted section keys (`generator.r_l = 8`), `#`
//! starts a comment. Lists are whitespace separated; matrix rows are
//! separated by `;`.

use std::collections::BTreeMap;

use super::CliError;
use crate::lti::{Matrix, StateSpaceModel, TransferFunction};
use crate::observer::Convention;
use crate::plant::{GeneratorParams, PlantParams, PlantPreset, TurbineParams};
use crate::sim::{
    InputKind, SimConfig, DEFAULT_CLOSED_LOOP_DURATION, DEFAULT_DT, DEFAULT_OPEN_LOOP_DURATION,
};

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed key-value file. Keys are tracked so unknown ones can be reported.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::validation(format!("line {line}: expected `key = value`"))
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::validation(format!(
                    "line {line}: invalid key `{key}`"
                )));
            }
            let entry = Entry {
                line,
                value: value.trim().to_string(),
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(CliError::validation(format!(
                    "line {line}: duplicate key `{key}` (first set on line {})",
                    prev.line
                )));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value).map(Some).map_err(|_| {
                CliError::validation(format!(
                    "line {}: `{key}` is not a number: `{}`",
                    e.line, e.value
                ))
            }),
        }
    }

    pub fn required_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::validation(format!("missing required parameter `{key}`")))
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split_whitespace()
                .map(parse_f64)
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| {
                    CliError::validation(format!(
                        "line {}: `{key}` must be a list of numbers",
                        e.line
                    ))
                }),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<Option<Matrix>, CliError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        let bad = || {
            CliError::validation(format!(
                "line {}: `{key}` must be rows of numbers separated by `;`",
                e.line
            ))
        };
        let rows: Vec<Vec<f64>> = e
            .value
            .split(';')
            .map(|row| {
                row.split_whitespace()
                    .map(parse_f64)
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let rows: Vec<Vec<f64>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(bad());
        }
        let n = rows.len();
        Matrix::from_vec(n, cols, rows.concat())
            .map(Some)
            .map_err(|_| bad())
    }

    /// Fails on any key outside `known` (exact names or `prefix.*` patterns).
    pub fn reject_unknown(&self, known: &[&str]) -> Result<(), CliError> {
        for (key, entry) in &self.entries {
            let ok = known.iter().any(|k| match k.strip_suffix('*') {
                Some(prefix) => key.starts_with(prefix),
                None => key == k,
            });
            if !ok {
                return Err(CliError::validation(format!(
                    "line {}: unknown key `{key}`",
                    entry.line
                )));
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64, ()> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(()),
    }
}

const PARAM_KEYS: [&str; 8] = [
    "turbine.tau_t",
    "generator.k1",
    "generator.n",
    "generator.l_f",
    "generator.r_f",
    "generator.l_a",
    "generator.r_a",
    "generator.r_l",
];

/// Reads every physical parameter; each one is required.
pub fn plant_params(kv: &KeyValues) -> Result<PlantParams, CliError> {
    let p = PlantParams {
        turbine: TurbineParams {
            tau_t: kv.required_f64("turbine.tau_t")?,
        },
        generator: GeneratorParams {
            k1: kv.required_f64("generator.k1")?,
            n: kv.required_f64("generator.n")?,
            l_f: kv.required_f64("generator.l_f")?,
            r_f: kv.required_f64("generator.r_f")?,
            l_a: kv.required_f64("generator.l_a")?,
            r_a: kv.required_f64("generator.r_a")?,
            r_l: kv.required_f64("generator.r_l")?,
        },
    };
    p.validate()?;
    Ok(p)
}

/// Parameter file for the `plant` subcommand.
pub fn parse_params_file(text: &str) -> Result<PlantParams, CliError> {
    let kv = KeyValues::parse(text)?;
    let mut known: Vec<&str> = PARAM_KEYS.to_vec();
    known.push("name");
    kv.reject_unknown(&known)?;
    plant_params(&kv)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlantSource {
    Physical(PlantParams),
    Tf(TransferFunction),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObserverGainSpec {
    Explicit(Vec<f64>),
    Poles(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ControllerSpec {
    None,
    Lqr {
        q_diag: Vec<f64>,
        r: f64,
    },
    Observer {
        q_diag: Vec<f64>,
        r: f64,
        h: ObserverGainSpec,
        convention: Convention,
    },
    StateSpace(StateSpaceModel),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Artifact {
    Csv,
    Svg,
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantSource,
    pub preset: PlantPreset,
    pub controller: ControllerSpec,
    pub sim: SimConfig,
    pub reference: Option<f64>,
    pub outputs: Vec<Artifact>,
}

const SCENARIO_KEYS: &[&str] = &[
    "name",
    "turbine.tau_t",
    "generator.*",
    "plant.preset",
    "plant.num",
    "plant.den",
    "controller.kind",
    "controller.q_diag",
    "controller.r",
    "controller.h",
    "controller.h_poles",
    "controller.convention",
    "controller.a",
    "controller.b",
    "controller.c",
    "controller.d",
    "sim.dt",
    "sim.duration",
    "sim.input",
    "sim.amplitude",
    "reference",
    "outputs",
];

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let kv = KeyValues::parse(text)?;
        kv.reject_unknown(SCENARIO_KEYS)?;

        let name = kv.str("name").unwrap_or("scenario").to_string();
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(CliError::validation(format!(
                "`name` must be a non-empty identifier of [A-Za-z0-9_-], got `{name}`"
            )));
        }

        let preset = kv
            .str("plant.preset")
            .map(PlantPreset::parse)
            .transpose()?
            .unwrap_or(PlantPreset::Exact);
        let plant = match (kv.list("plant.num")?, kv.list("plant.den")?) {
            (Some(num), Some(den)) => {
                if kv.has_prefix("turbine.") || kv.has_prefix("generator.") {
                    return Err(CliError::validation(
                        "give either an explicit plant.num/plant.den or physical parameters, not both",
                    ));
                }
                PlantSource::Tf(TransferFunction::from_coeffs(&num, &den)?)
            }
            (None, None) => {
                if kv.has_prefix("turbine.") || kv.has_prefix("generator.") {
                    PlantSource::Physical(plant_params(&kv)?)
                } else {
                    PlantSource::Physical(PlantParams::reference())
                }
            }
            _ => {
                return Err(CliError::validation(
                    "plant.num and plant.den must be given together",
                ))
            }
        };

        let controller = parse_controller(&kv)?;
        let reference = kv.f64("reference")?;
        if reference.is_some() && controller == ControllerSpec::None {
            return Err(CliError::validation(
                "`reference` requires a controller (controller.kind)",
            ));
        }

        let closed = controller != ControllerSpec::None;
        let sim = SimConfig {
            dt: kv.f64("sim.dt")?.unwrap_or(DEFAULT_DT),
            duration: kv.f64("sim.duration")?.unwrap_or(if closed {
                DEFAULT_CLOSED_LOOP_DURATION
            } else {
                DEFAULT_OPEN_LOOP_DURATION
            }),
            input: kv
                .str("sim.input")
                .map(InputKind::parse)
                .transpose()?
                .unwrap_or(InputKind::Step),
            amplitude: kv.f64("sim.amplitude")?.unwrap_or(1.0),
            record_states: true,
            ..SimConfig::default()
        };
        sim.validate()?;

        let outputs = match kv.str("outputs") {
            None => vec![Artifact::Csv, Artifact::Report],
            Some(list) => list
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s {
                    "csv" => Ok(Artifact::Csv),
                    "svg" => Ok(Artifact::Svg),
                    "report" => Ok(Artifact::Report),
                    other => Err(CliError::validation(format!(
                        "unknown output artifact `{other}`"
                    ))),
                })
                .collect::<Result<_, _>>()?,
        };

        Ok(Scenario {
            name,
            plant,
            preset,
            controller,
            sim,
            reference,
            outputs,
        })
    }

    pub fn wants(&self, a: Artifact) -> bool {
        self.outputs.contains(&a)
    }
}

fn parse_controller(kv: &KeyValues) -> Result<ControllerSpec, CliError> {
    let kind = kv.str("controller.kind").unwrap_or("none");
    let weights = || -> Result<(Vec<f64>, f64), CliError> {
        let q = kv.list("controller.q_diag")?.ok_or_else(|| {
            CliError::validation("missing required parameter `controller.q_diag`")
        })?;
        let r = kv.required_f64("controller.r")?;
        Ok((q, r))
    };
    match kind {
        "none" => {
            let extra = kv
                .entries
                .keys()
                .any(|k| k.starts_with("controller.") && k != "controller.kind");
            if extra {
                return Err(CliError::validation(
                    "controller settings given but controller.kind is none",
                ));
            }
            Ok(ControllerSpec::None)
        }
        "lqr" => {
            let (q_diag, r) = weights()?;
            Ok(ControllerSpec::Lqr { q_diag, r })
        }
        "observer" => {
            let (q_diag, r) = weights()?;
            let h = match (kv.list("controller.h")?, kv.list("controller.h_poles")?) {
                (Some(h), None) => ObserverGainSpec::Explicit(h),
                (None, Some(p)) => ObserverGainSpec::Poles(p),
                (None, None) => {
                    return Err(CliError::validation(
                        "observer controller needs `controller.h` or `controller.h_poles`",
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::validation(
                        "give only one of `controller.h` and `controller.h_poles`",
                    ))
                }
            };
            let convention = kv
                .str("controller.convention")
                .map(Convention::parse)
                .transpose()?
                .unwrap_or(Convention::StandardLuenberger);
            Ok(ControllerSpec::Observer {
                q_diag,
                r,
                h,
                convention,
            })
        }
        "ss" => {
            let get = |k: &str| {
                kv.matrix(k)?.ok_or_else(|| {
                    CliError::validation(format!("missing required parameter `{k}`"))
                })
            };
            let d = get("controller.d")?;
            let a = kv
                .matrix("controller.a")?
                .unwrap_or_else(|| Matrix::zeros(0, 0));
            let b = kv
                .matrix("controller.b")?
                .unwrap_or_else(|| Matrix::zeros(a.rows(), 1));
            let c = kv
                .matrix("controller.c")?
                .unwrap_or_else(|| Matrix::zeros(1, a.rows()));
            Ok(ControllerSpec::StateSpace(StateSpaceModel::new(
                a, b, c, d,
            )?))
        }
        other => Err(CliError::validation(format!(
            "unknown controller.kind `{other}` (expected none, lqr, observer or ss)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = "\
# reference parameter set
turbine.tau_t = 2
generator.k1 = 4
generator.n = 4
generator.l_f = 3
generator.r_f = 2
generator.l_a = 4
generator.r_a = 4
generator.r_l = 8
";

    #[test]
    fn params_file_round_trip() {
        assert_eq!(parse_params_file(TABLE1).unwrap(), PlantParams::reference());
    }

    #[test]
    fn missing_parameter_is_named() {
        let text = TABLE1.replace("turbine.tau_t = 2\n", "");
        let err = parse_params_file(&text).unwrap_err();
        assert!(err.to_string().contains("turbine.tau_t"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn nonpositive_parameter_is_rejected() {
        let text = TABLE1.replace("generator.r_l = 8", "generator.r_l = 0");
        let err = parse_params_file(&text).unwrap_err();
        assert!(err.to_string().contains("generator.r_l"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = KeyValues::parse("a = 1\nnot a pair\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = KeyValues::parse("a = 1\na = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = parse_params_file(&format!("{TABLE1}generator.rl = 3\n")).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn observer_scenario() {
        let s = Scenario::parse(
            "name = paper-observer\ncontroller.kind = observer\ncontroller.q_diag = 8 8\n\
             controller.r = 1\ncontroller.h = 2 -0.5  # published gain\ncontroller.convention = paper-numeric\nreference = 220\n",
        )
        .unwrap();
        assert_eq!(s.name, "paper-observer");
        assert_eq!(s.plant, PlantSource::Physical(PlantParams::reference()));
        assert_eq!(
            s.controller,
            ControllerSpec::Observer {
                q_diag: vec![8.0, 8.0],
                r: 1.0,
                h: ObserverGainSpec::Explicit(vec![2.0, -0.5]),
                convention: Convention::PaperNumeric,
            }
        );
        assert_eq!(s.reference, Some(220.0));
        assert_eq!(s.sim.duration, DEFAULT_CLOSED_LOOP_DURATION);
    }

    #[test]
    fn reference_without_controller() {
        assert!(Scenario::parse("reference = 220\n").is_err());
    }

    #[test]
    fn duration_guard() {
        let err = Scenario::parse("sim.dt = 0.1\nsim.duration = 0.01\n").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn explicit_tf_and_ss_controller() {
        let s = Scenario::parse(
            "plant.num = 1\nplant.den = 1 0\ncontroller.kind = ss\ncontroller.d = 1\nreference = 1\n",
        )
        .unwrap();
        assert!(matches!(s.plant, PlantSource::Tf(_)));
        match s.controller {
            ControllerSpec::StateSpace(ss) => {
                assert_eq!(ss.states(), 0);
                assert_eq!(ss.d(), &Matrix::scalar(1.0));
            }
            other => panic!("{other:?}"),
        }
        let s = Scenario::parse(
            "controller.kind = ss\ncontroller.a = -1 0; 0 -2\ncontroller.b = 1; 1\ncontroller.c = 1 1\ncontroller.d = 0\n",
        )
        .unwrap();
        assert!(matches!(s.controller, ControllerSpec::StateSpace(ref m) if m.states() == 2));
    }
}
