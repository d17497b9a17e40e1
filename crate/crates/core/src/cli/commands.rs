use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::csv::CsvTable;
use super::report::{
    published_discrepancies, write_metrics, ControllerSummary, Electrical, RunReport,
};
use super::scenario::{parse_params_file, ControllerSpec, ObserverGainSpec, PlantSource, Scenario};
use super::svg::{Chart, Series};
use super::{Artifact, Cli, CliError, Command, Figure8Controller, Format};
use crate::lti::{
    char_poly, dc_gain, is_hurwitz, tf_to_ss, Matrix, Polynomial, StateSpaceModel, TransferFunction,
};
use crate::observer::{build_observer_controller, place_observer_poles, Convention, ObserverGain};
use crate::plant::{plant_model, steady_state_report, PlantParams, PlantPreset};
use crate::riccati::{lqr_gain, CostWeights};
use crate::sim::{
    closed_loop_model, closed_loop_step, electrical_trace, simulate, step_metrics, Compensator,
    SimConfig, StepMetrics, TimeSeries, DEFAULT_CLOSED_LOOP_DURATION, DEFAULT_OPEN_LOOP_DURATION,
    MIN_METRIC_SAMPLES,
};

const SCENARIO_EXTENSION: &str = "scenario";

pub(super) fn dispatch(
    cli: &Cli,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    match &cli.command {
        Command::Plant { params } => {
            let report = plant_report(&parse_params_file(&read(params)?)?, cli.preset)?;
            emit(out, &report)?;
            Ok(0)
        }
        Command::Synthesize { scenario } => {
            let scn = Scenario::parse(&read(scenario)?)?;
            if scn.controller == ControllerSpec::None {
                return Err(CliError::validation(
                    "scenario has no controller to synthesize (controller.kind)",
                ));
            }
            let plant = prepare_plant(&scn, cli.preset)?;
            let mut report = plant.report(&scn.name);
            let design =
                design(&plant.ss, &scn.controller, cli.convention)?.expect("controller present");
            design.annotate(&mut report);
            emit(out, &report)?;
            Ok(0)
        }
        Command::Simulate {
            scenario: Some(path),
            ..
        } => {
            let scn = Scenario::parse(&read(path)?)?;
            let run = run_scenario(&scn, cli, true)?;
            emit(out, &run.report)?;
            Ok(run.exit_code())
        }
        Command::Simulate {
            batch: Some(dir), ..
        } => run_batch(dir, cli, out, err),
        Command::Simulate { .. } => {
            Err(CliError::validation("simulate needs --scenario or --batch"))
        }
        Command::Metrics {
            scenario: Some(path),
            ..
        } => {
            let scn = Scenario::parse(&read(path)?)?;
            let run = run_scenario(&scn, cli, false)?;
            let mut text = format!("== {} ==\n", scn.name);
            match &run.report.metrics {
                Some(m) => write_metrics(&mut text, m),
                None => text.push_str("  no metrics: the run diverged or is too short\n"),
            }
            write_str(out, &text)?;
            Ok(run.exit_code())
        }
        Command::Metrics {
            input: Some(path), ..
        } => {
            let table = CsvTable::parse(&read(path)?)?;
            let m = step_metrics(&table.to_series()?)?;
            let mut text = format!("== {} ==\n", path.display());
            write_metrics(&mut text, &m);
            write_str(out, &text)?;
            Ok(0)
        }
        Command::Metrics { .. } => Err(CliError::validation("metrics needs --scenario or --input")),
        Command::Reproduce {
            figure: 8,
            controller,
        } => reproduce_fig8(cli, *controller, out),
        Command::Reproduce { figure, .. } => reproduce_open_loop(cli, *figure, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn write_str(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn emit(out: &mut dyn Write, report: &RunReport) -> Result<(), CliError> {
    write_str(out, &report.to_string())
}

fn verdict_of(a: &Matrix) -> Result<(Polynomial, bool), CliError> {
    let p = char_poly(a);
    let stable = a.rows() == 0 || is_hurwitz(&p)?;
    Ok((p, stable))
}

struct PreparedPlant {
    params: Option<PlantParams>,
    preset: Option<PlantPreset>,
    tf: TransferFunction,
    ss: StateSpaceModel,
}

impl PreparedPlant {
    fn new(
        params: Option<PlantParams>,
        preset: Option<PlantPreset>,
        tf: TransferFunction,
    ) -> Result<Self, CliError> {
        let ss = tf_to_ss(&tf)?;
        Ok(PreparedPlant {
            params,
            preset,
            tf,
            ss,
        })
    }

    fn report(&self, name: &str) -> RunReport {
        let mut r = RunReport::new(name);
        r.preset = self.preset;
        r.plant_tf = Some(self.tf.clone());
        r.plant_ss = Some(self.ss.clone());
        r.dc_gain = dc_gain(&self.tf).ok();
        let p = self.tf.den().clone();
        let stable = p.degree() == 0 || is_hurwitz(&p).unwrap_or(false);
        r.verdict("plant", p, stable);
        r
    }
}

fn prepare_plant(scn: &Scenario, preset: Option<PlantPreset>) -> Result<PreparedPlant, CliError> {
    match &scn.plant {
        PlantSource::Physical(p) => {
            let preset = preset.unwrap_or(scn.preset);
            PreparedPlant::new(Some(*p), Some(preset), plant_model(p, preset))
        }
        PlantSource::Tf(tf) => PreparedPlant::new(None, None, tf.clone()),
    }
}

fn plant_report(params: &PlantParams, preset: Option<PlantPreset>) -> Result<RunReport, CliError> {
    let presets = preset.map_or(PlantPreset::ALL.to_vec(), |p| vec![p]);
    let mut report = RunReport::new("plant");
    for preset in presets {
        let plant = PreparedPlant::new(Some(*params), Some(preset), plant_model(params, preset))?;
        let sub = plant.report(preset.name());
        if preset == PlantPreset::Exact || report.plant_tf.is_none() {
            report.preset = sub.preset;
            report.plant_tf = sub.plant_tf.clone();
            report.plant_ss = sub.plant_ss.clone();
            report.dc_gain = sub.dc_gain;
        }
        for mut v in sub.verdicts {
            v.label = format!("{} ({})", v.label, preset.name());
            report.verdicts.push(v);
        }
        if preset == PlantPreset::PaperRounded {
            report
                .notes
                .push(format!("paper-rounded G(s) = {}", plant.tf));
        }
    }
    Ok(report)
}

/// A synthesized controller and everything the report says about it.
struct Design {
    compensator: Compensator,
    summary: ControllerSummary,
    verdicts: Vec<(String, Polynomial, bool)>,
    warnings: Vec<String>,
}

impl Design {
    fn annotate(&self, report: &mut RunReport) {
        report.controller = Some(self.summary.clone());
        for (label, p, ok) in &self.verdicts {
            report.verdict(label.clone(), p.clone(), *ok);
        }
        report.warnings.extend(self.warnings.iter().cloned());
    }
}

fn lqr(
    plant: &StateSpaceModel,
    q_diag: &[f64],
    r: f64,
    summary: &mut ControllerSummary,
) -> Result<Vec<f64>, CliError> {
    let weights = CostWeights::diagonal(q_diag, r)?;
    let lqr = lqr_gain(plant.a(), plant.b(), &weights)?;
    summary.care_residual = Some(lqr.solution.residual_norm);
    summary.care_iterations = Some(lqr.solution.iterations);
    let k = lqr.gain_row();
    summary.k = Some(k.clone());
    Ok(k)
}

fn design(
    plant: &StateSpaceModel,
    spec: &ControllerSpec,
    convention_override: Option<Convention>,
) -> Result<Option<Design>, CliError> {
    let mut verdicts = Vec::new();
    let mut warnings = Vec::new();
    let (compensator, mut summary) = match spec {
        ControllerSpec::None => return Ok(None),
        ControllerSpec::Lqr { q_diag, r } => {
            let mut summary = ControllerSummary::new("lqr");
            let k = lqr(plant, q_diag, *r, &mut summary)?;
            (Compensator::StateFeedback(k), summary)
        }
        ControllerSpec::Observer {
            q_diag,
            r,
            h,
            convention,
        } => {
            let mut summary = ControllerSummary::new("observer");
            let k = lqr(plant, q_diag, *r, &mut summary)?;
            let h = match h {
                ObserverGainSpec::Explicit(v) => ObserverGain::column(v),
                ObserverGainSpec::Poles(p) => {
                    let poles: Vec<Complex64> = p.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    place_observer_poles(plant.a(), plant.c(), &poles)?
                }
            };
            let convention = convention_override.unwrap_or(*convention);
            let ctrl = build_observer_controller(plant, &k, &h, convention)?;
            summary.h = Some(h.matrix().column_vec(0));
            summary.convention = Some(convention);
            summary.model = Some(ctrl.model().clone());
            let audit = ctrl.error_dynamics();
            if !audit.hurwitz {
                warnings.push(format!(
                    "observer error dynamics A-HC are not Hurwitz (char poly {}); the state estimate diverges from the plant state",
                    audit.char_poly
                ));
            }
            (Compensator::Observer(ctrl), summary)
        }
        ControllerSpec::StateSpace(m) => {
            let mut summary = ControllerSummary::new("state space");
            summary.model = Some(m.clone());
            (Compensator::Output(m.clone()), summary)
        }
    };
    if let Some(k) = &summary.k {
        let (p, ok) = verdict_of(&(plant.a() - &(plant.b() * &Matrix::row(k))))?;
        verdicts.push(("A-BK".to_string(), p, ok));
    }
    if let Compensator::Observer(c) = &compensator {
        let audit = c.error_dynamics();
        verdicts.push(("A-HC".to_string(), audit.char_poly.clone(), audit.hurwitz));
    }
    let closed = closed_loop_model(plant, &compensator)?;
    let (p, ok) = verdict_of(closed.a())?;
    if !ok {
        warnings.push("closed loop is not Hurwitz".to_string());
    }
    verdicts.push(("closed loop".to_string(), p, ok));
    if compensator.uses_prescaler() {
        summary.prescale = crate::sim::reference_prescale(&closed).ok();
    }
    Ok(Some(Design {
        compensator,
        summary,
        verdicts,
        warnings,
    }))
}

struct ScenarioRun {
    report: RunReport,
}

impl ScenarioRun {
    fn exit_code(&self) -> i32 {
        if self.report.diverged {
            2
        } else {
            0
        }
    }
}

fn metrics_if_possible(ts: &TimeSeries) -> Option<StepMetrics> {
    if ts.diverged || ts.len() < MIN_METRIC_SAMPLES {
        None
    } else {
        step_metrics(ts).ok()
    }
}

fn run_scenario(scn: &Scenario, cli: &Cli, write_files: bool) -> Result<ScenarioRun, CliError> {
    let plant = prepare_plant(scn, cli.preset)?;
    let mut report = plant.report(&scn.name);
    let design = design(&plant.ss, &scn.controller, cli.convention)?;

    let series = match &design {
        None => {
            let ts = simulate(&plant.ss, &scn.sim)?;
            report.metrics = metrics_if_possible(&ts);
            if let Some(params) = &plant.params {
                let flow = scn.sim.amplitude;
                if let Ok(e) = steady_state_report(params, flow) {
                    report
                        .warnings
                        .extend(published_discrepancies(params, flow, &e));
                    report.electrical = Some(Electrical { flow, report: e });
                }
            }
            ts
        }
        Some(d) => {
            d.annotate(&mut report);
            let reference = scn.reference.unwrap_or(scn.sim.amplitude);
            let resp = closed_loop_step(&plant.ss, &d.compensator, reference, &scn.sim)?;
            report.metrics = resp.metrics;
            resp.series
        }
    };
    report.final_output = series.final_output();
    if series.diverged {
        report.diverged = true;
        let t = series.times.last().copied().unwrap_or(0.0);
        report.warnings.push(format!(
            "simulation diverged; trajectory truncated at t = {} s",
            crate::numfmt::format_g(t, 6)
        ));
    }

    if write_files {
        let electrical = match &plant.params {
            Some(p) => Some(electrical_trace(p, &series)?),
            None => None,
        };
        let (csv, svg) = match cli.format {
            Some(f) => (f.csv(), f.svg()),
            None => (scn.wants(Artifact::Csv), scn.wants(Artifact::Svg)),
        };
        if csv {
            let text = CsvTable::from_series(&series, electrical.as_ref()).render();
            report.files.push(write_artifact(
                &cli.out,
                &format!("{}.csv", scn.name),
                &text,
            )?);
        }
        if svg {
            let mut chart = Chart::new(&scn.name, "time (s)", "output y").with(Series::new(
                "y",
                &series.times,
                &series.outputs,
            ));
            if let (Some(r), Some(t)) = (scn.reference, series.times.last()) {
                chart = chart.with(Series::new("reference", &[0.0, *t], &[r, r]).dashed());
            }
            report.files.push(write_artifact(
                &cli.out,
                &format!("{}.svg", scn.name),
                &chart.render(),
            )?);
        }
        if scn.wants(Artifact::Report) {
            let name = format!("{}.report.txt", scn.name);
            let path = cli.out.join(&name);
            report.files.push(path);
            let text = report.to_string();
            write_artifact(&cli.out, &name, &text)?;
        }
    }
    Ok(ScenarioRun { report })
}

fn run_batch(
    dir: &Path,
    cli: &Cli,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == SCENARIO_EXTENSION))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no *.{SCENARIO_EXTENSION} files",
            dir.display()
        )));
    }
    let mut scenarios = Vec::with_capacity(paths.len());
    for p in &paths {
        let scn = Scenario::parse(&read(p)?).map_err(|e| CliError {
            message: format!("{}: {e}", p.display()),
            ..e
        })?;
        if let Some(prev) = scenarios.iter().position(|s: &Scenario| s.name == scn.name) {
            return Err(CliError::validation(format!(
                "{} and {} share the scenario name `{}`",
                paths[prev].display(),
                p.display(),
                scn.name
            )));
        }
        scenarios.push(scn);
    }
    let results: Vec<Result<ScenarioRun, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|scn| s.spawn(move || run_scenario(scn, cli, true)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::numerical("scenario run panicked")))
            })
            .collect()
    });
    let mut code = 0;
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(run) => {
                emit(out, &run.report)?;
                code = code.max(run.exit_code());
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    Ok(code)
}

/// Steam flow of the open-loop figure runs, g/s.
const FIGURE_FLOW: f64 = 5.0;
/// Terminal-voltage set point of the closed-loop figure, V.
const FIGURE_REFERENCE: f64 = 220.0;
/// Settling time quoted for the observer-based loop, s.
const PUBLISHED_OBSERVER_SETTLING: f64 = 7.0;

fn figure_presets(cli: &Cli) -> Vec<PlantPreset> {
    cli.preset.map_or(PlantPreset::ALL.to_vec(), |p| vec![p])
}

fn figure_format(cli: &Cli) -> Format {
    cli.format.unwrap_or(Format::Both)
}

type TracePick = fn(&crate::sim::ElectricalTrace, &TimeSeries) -> Vec<f64>;

fn reproduce_open_loop(cli: &Cli, figure: u8, out: &mut dyn Write) -> Result<i32, CliError> {
    let (label, pick): (&str, TracePick) = match figure {
        4 => ("terminal voltage (V)", |_, ts| ts.outputs.clone()),
        5 => ("output power (W)", |e, _| e.p_out.clone()),
        6 => ("induced emf (V)", |e, _| e.e_g.clone()),
        7 => ("input power (W)", |e, _| e.p_in.clone()),
        other => return Err(CliError::validation(format!("no open-loop figure {other}"))),
    };
    let params = PlantParams::reference();
    let format = figure_format(cli);
    let cfg = SimConfig {
        amplitude: FIGURE_FLOW,
        duration: DEFAULT_OPEN_LOOP_DURATION,
        record_states: true,
        ..SimConfig::default()
    };
    let mut text = String::new();
    let mut chart_series = Vec::new();
    for preset in figure_presets(cli) {
        let plant = PreparedPlant::new(Some(params), Some(preset), plant_model(&params, preset))?;
        let ts = simulate(&plant.ss, &cfg)?;
        let e = electrical_trace(&params, &ts)?;
        let stem = format!("fig{figure}_{}", preset.name());
        let mut report = plant.report(&stem);
        report.metrics = metrics_if_possible(&ts);
        report.final_output = ts.final_output();
        let op = steady_state_report(&params, FIGURE_FLOW)?;
        report
            .warnings
            .extend(published_discrepancies(&params, FIGURE_FLOW, &op));
        report.electrical = Some(Electrical {
            flow: FIGURE_FLOW,
            report: op,
        });
        if format.csv() {
            let csv = CsvTable::from_series(&ts, Some(&e)).render();
            report
                .files
                .push(write_artifact(&cli.out, &format!("{stem}.csv"), &csv)?);
        }
        chart_series.push((preset, ts.times.clone(), pick(&e, &ts)));
        text.push_str(&report.to_string());
    }
    if format.svg() {
        for (preset, t, y) in &chart_series {
            let title = format!("open loop, {} g/s step ({})", FIGURE_FLOW, preset.name());
            let chart = Chart::new(title, "time (s)", label).with(Series::new(label, t, y));
            let path = write_artifact(
                &cli.out,
                &format!("fig{figure}_{}.svg", preset.name()),
                &chart.render(),
            )?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
    }
    write_str(out, &text)?;
    Ok(0)
}

fn fig8_controllers(choice: Figure8Controller) -> Vec<Figure8Controller> {
    use Figure8Controller::*;
    match choice {
        All => vec![OpenLoop, Lqr, Observer, ObserverStable],
        one => vec![one],
    }
}

fn fig8_name(c: Figure8Controller) -> &'static str {
    match c {
        Figure8Controller::OpenLoop => "open-loop",
        Figure8Controller::Lqr => "lqr",
        Figure8Controller::Observer => "observer",
        Figure8Controller::ObserverStable => "observer-stable",
        Figure8Controller::All => "all",
    }
}

fn fig8_spec(c: Figure8Controller, convention: Convention) -> ControllerSpec {
    match c {
        Figure8Controller::Lqr => ControllerSpec::Lqr {
            q_diag: vec![3.0, 3.0],
            r: 5.0,
        },
        Figure8Controller::Observer => ControllerSpec::Observer {
            q_diag: vec![8.0, 8.0],
            r: 1.0,
            h: ObserverGainSpec::Explicit(vec![2.0, -0.5]),
            convention,
        },
        Figure8Controller::ObserverStable => ControllerSpec::Observer {
            q_diag: vec![8.0, 8.0],
            r: 1.0,
            h: ObserverGainSpec::Poles(vec![-5.0, -6.0]),
            convention: Convention::StandardLuenberger,
        },
        Figure8Controller::OpenLoop | Figure8Controller::All => ControllerSpec::None,
    }
}

fn reproduce_fig8(
    cli: &Cli,
    choice: Figure8Controller,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let params = PlantParams::reference();
    let format = figure_format(cli);
    let convention = cli.convention.unwrap_or(Convention::StandardLuenberger);
    let cfg = SimConfig {
        duration: DEFAULT_CLOSED_LOOP_DURATION,
        record_states: true,
        ..SimConfig::default()
    };
    let mut text = String::new();
    for preset in figure_presets(cli) {
        let plant = PreparedPlant::new(Some(params), Some(preset), plant_model(&params, preset))?;
        let mut chart = Chart::new(
            format!("{FIGURE_REFERENCE} V set point ({})", preset.name()),
            "time (s)",
            "terminal voltage (V)",
        );
        for c in fig8_controllers(choice) {
            let stem = format!("fig8_{}_{}", fig8_name(c), preset.name());
            let mut report = plant.report(&stem);
            let series = match design(&plant.ss, &fig8_spec(c, convention), None)? {
                None => {
                    let flow = FIGURE_REFERENCE / dc_gain(&plant.tf)?;
                    report.notes.push(format!(
                        "open-loop flow scaled to {} g/s so the steady state equals the set point",
                        crate::numfmt::format_g(flow, 6)
                    ));
                    let ts = simulate(
                        &plant.ss,
                        &SimConfig {
                            amplitude: flow,
                            ..cfg
                        },
                    )?;
                    report.metrics = metrics_if_possible(&ts);
                    ts
                }
                Some(d) => {
                    d.annotate(&mut report);
                    let resp = closed_loop_step(&plant.ss, &d.compensator, FIGURE_REFERENCE, &cfg)?;
                    report.metrics = resp.metrics;
                    if c == Figure8Controller::ObserverStable {
                        let settle = resp.metrics.and_then(|m| m.settling_time);
                        report.notes.push(format!(
                            "published observer-based settling time {PUBLISHED_OBSERVER_SETTLING} s; with observer poles at -5, -6 it is {}",
                            settle.map_or("not settled".to_string(), |t| format!("{} s", crate::numfmt::format_g(t, 4)))
                        ));
                    }
                    resp.series
                }
            };
            report.final_output = series.final_output();
            if series.diverged {
                report.diverged = true;
                let t = series.times.last().copied().unwrap_or(0.0);
                report.warnings.push(format!(
                    "simulation diverged; trajectory truncated at t = {} s",
                    crate::numfmt::format_g(t, 6)
                ));
            }
            if format.csv() {
                let e = electrical_trace(&params, &series)?;
                let csv = CsvTable::from_series(&series, Some(&e)).render();
                report
                    .files
                    .push(write_artifact(&cli.out, &format!("{stem}.csv"), &csv)?);
            }
            chart = chart.with(Series::new(fig8_name(c), &series.times, &series.outputs));
            text.push_str(&report.to_string());
        }
        if format.svg() {
            chart = chart.with(
                Series::new(
                    "set point",
                    &[0.0, cfg.duration],
                    &[FIGURE_REFERENCE, FIGURE_REFERENCE],
                )
                .dashed(),
            );
            let path = write_artifact(
                &cli.out,
                &format!("fig8_{}.svg", preset.name()),
                &chart.render(),
            )?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
    }
    write_str(out, &text)?;
    Ok(0)
}
