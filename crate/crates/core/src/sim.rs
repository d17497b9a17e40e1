//! Fixed-step simulation of SISO state-space models and step-response
//! metrics.

use crate::error::{Error, Result};
use crate::lti::{char_poly, feedback_interconnect, is_hurwitz, Matrix, StateSpaceModel};
use crate::observer::{Convention, ObserverBasedController};
use crate::plant::PlantParams;

/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_OPEN_LOOP_DURATION: f64 = 20.0;
pub const DEFAULT_CLOSED_LOOP_DURATION: f64 = 15.0;
/// Half-width of the settling band as a fraction of the steady state.
pub const SETTLING_BAND: f64 = 0.02;
/// Fraction of the trailing samples averaged into the steady state.
pub const STEADY_STATE_WINDOW: f64 = 0.05;
pub const MIN_METRIC_SAMPLES: usize = 100;
const MAX_STEPS: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Step,
    Constant,
    Zero,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Step => "step",
            InputKind::Constant => "constant",
            InputKind::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(InputKind::Step),
            "constant" => Ok(InputKind::Constant),
            "zero" => Ok(InputKind::Zero),
            other => Err(Error::invalid(format!(
                "unknown input kind `{other}` (expected step, constant or zero)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub input: InputKind,
    pub amplitude: f64,
    pub record_states: bool,
    /// A state or output magnitude beyond this ends the run as diverged.
    pub divergence_limit: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            duration: DEFAULT_OPEN_LOOP_DURATION,
            input: InputKind::Step,
            amplitude: 1.0,
            record_states: false,
            divergence_limit: 1e12,
        }
    }
}

impl SimConfig {
    pub fn step(amplitude: f64, duration: f64) -> Self {
        SimConfig {
            amplitude,
            duration,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "sim.dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::invalid(format!(
                "sim.duration ({}) must be at least sim.dt ({})",
                self.duration, self.dt
            )));
        }
        if self.duration / self.dt > MAX_STEPS {
            return Err(Error::invalid(format!(
                "sim.duration / sim.dt exceeds {MAX_STEPS:e} steps"
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("input amplitude must be finite"));
        }
        if !(self.divergence_limit > 0.0) {
            return Err(Error::invalid("divergence limit must be > 0"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn input_value(&self) -> f64 {
        match self.input {
            InputKind::Step | InputKind::Constant => self.amplitude,
            InputKind::Zero => 0.0,
        }
    }
}

/// Uniformly sampled trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    /// One inner vector per sample when recorded.
    pub states: Option<Vec<Vec<f64>>>,
    /// The run stopped early on a non-finite or out-of-bound value.
    pub diverged: bool,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_output(&self) -> Option<f64> {
        self.outputs.last().copied()
    }
}

/// Classical RK4 on `ẋ = Ax + Bu`, `y = Cx + Du`, from `x(0) = 0`.
///
/// The input is held at its sample value over each step; every step is
/// emitted, so the series has `round(duration / dt) + 1` samples.
pub fn simulate(ss: &StateSpaceModel, cfg: &SimConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    if !ss.is_siso() {
        return Err(Error::Unsupported(
            "simulation handles SISO models only".into(),
        ));
    }
    let n = ss.states();
    let steps = cfg.steps();
    let u = cfg.input_value();
    let a = ss.a();
    let bu: Vec<f64> = ss.b().column_vec(0).iter().map(|b| b * u).collect();
    let c = ss.c().row_slice(0).to_vec();
    let du = ss.d()[(0, 0)] * u;

    let output = |x: &[f64]| c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + du;
    let deriv = |x: &[f64]| -> Vec<f64> {
        a.mul_vec(x)
            .iter()
            .zip(&bu)
            .map(|(ax, bu)| ax + bu)
            .collect()
    };
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(x, k)| x + h * k).collect()
    };

    let mut ts = TimeSeries {
        dt: cfg.dt,
        times: Vec::with_capacity(steps + 1),
        inputs: Vec::with_capacity(steps + 1),
        outputs: Vec::with_capacity(steps + 1),
        states: cfg.record_states.then(|| Vec::with_capacity(steps + 1)),
        diverged: false,
    };
    let mut x = vec![0.0; n];
    let h = cfg.dt;
    for step in 0..=steps {
        let y = output(&x);
        let bad = |v: f64| !v.is_finite() || v.abs() > cfg.divergence_limit;
        if bad(y) || x.iter().any(|&v| bad(v)) {
            ts.diverged = true;
            break;
        }
        ts.times.push(step as f64 * h);
        ts.inputs.push(u);
        ts.outputs.push(y);
        if let Some(states) = ts.states.as_mut() {
            states.push(x.clone());
        }
        if step == steps {
            break;
        }
        let k1 = deriv(&x);
        let k2 = deriv(&axpy(&x, &k1, h / 2.0));
        let k3 = deriv(&axpy(&x, &k2, h / 2.0));
        let k4 = deriv(&axpy(&x, &k3, h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(ts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMetrics {
    /// Mean of the trailing 5 % of samples.
    pub steady_state: f64,
    /// Peak excursion beyond the final level (the larger of the steady state
    /// and the last sample), percent of the steady state, clamped at 0.
    pub overshoot_pct: f64,
    /// Time after which the response stays inside the ±2 % band; `None`
    /// when the final sample is still outside it.
    pub settling_time: Option<f64>,
    /// 10 %–90 % rise time; `None` if the 90 % level is never reached.
    pub rise_time: Option<f64>,
    /// Steady state is zero (or negligible next to the peak); the relative
    /// figures are reported as zero.
    pub degenerate: bool,
}

impl StepMetrics {
    pub fn settled(&self) -> bool {
        self.settling_time.is_some()
    }
}

pub fn step_metrics(ts: &TimeSeries) -> Result<StepMetrics> {
    let y = &ts.outputs;
    if y.len() < MIN_METRIC_SAMPLES {
        return Err(Error::invalid(format!(
            "step metrics need at least {MIN_METRIC_SAMPLES} samples, got {}",
            y.len()
        )));
    }
    let window = ((y.len() as f64 * STEADY_STATE_WINDOW).ceil() as usize).max(1);
    let tail = &y[y.len() - window..];
    let steady_state = tail.iter().sum::<f64>() / window as f64;
    let peak_abs = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak_abs == 0.0 || steady_state.abs() <= 1e-12 * peak_abs {
        return Ok(StepMetrics {
            steady_state,
            overshoot_pct: 0.0,
            settling_time: Some(0.0),
            rise_time: Some(0.0),
            degenerate: true,
        });
    }
    // Work on the response normalized by its final value so negative
    // steps are handled like positive ones.
    let norm: Vec<f64> = y.iter().map(|v| v / steady_state).collect();
    let peak = norm.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    // A response still creeping up at the end has its last sample above the
    // window mean; that is not overshoot.
    let final_level = norm.last().copied().unwrap_or(1.0).max(1.0);
    let overshoot_pct = (100.0 * (peak - final_level)).max(0.0);

    let last_outside = norm.iter().rposition(|v| (v - 1.0).abs() > SETTLING_BAND);
    let settling_time = match last_outside {
        None => Some(0.0),
        Some(i) if i + 1 < norm.len() => Some(ts.times[i + 1]),
        Some(_) => None,
    };

    let crossing = |level: f64| norm.iter().position(|&v| v >= level).map(|i| ts.times[i]);
    let rise_time = match (crossing(0.1), crossing(0.9)) {
        (Some(t10), Some(t90)) => Some(t90 - t10),
        _ => None,
    };
    Ok(StepMetrics {
        steady_state,
        overshoot_pct,
        settling_time,
        rise_time,
        degenerate: false,
    })
}

/// Armature-side quantities reconstructed from a terminal-voltage trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectricalTrace {
    pub times: Vec<f64>,
    pub i_a: Vec<f64>,
    pub e_g: Vec<f64>,
    pub p_out: Vec<f64>,
    pub p_in: Vec<f64>,
}

/// `i_a = v/R_L`, `p_out = v·i_a`, `e_g = L·di_a/dt + R·i_a`, `p_in = e_g·i_a`.
///
/// The derivative is a backward difference; the first sample uses a
/// forward difference.
pub fn electrical_trace(p: &PlantParams, ts: &TimeSeries) -> Result<ElectricalTrace> {
    p.validate()?;
    let g = &p.generator;
    let i_a: Vec<f64> = ts.outputs.iter().map(|v| v / g.r_l).collect();
    let p_out: Vec<f64> = ts.outputs.iter().zip(&i_a).map(|(v, i)| v * i).collect();
    let didt: Vec<f64> = (0..i_a.len())
        .map(|k| match (k, i_a.len()) {
            (_, 1) => 0.0,
            (0, _) => (i_a[1] - i_a[0]) / ts.dt,
            (k, _) => (i_a[k] - i_a[k - 1]) / ts.dt,
        })
        .collect();
    let e_g: Vec<f64> = didt
        .iter()
        .zip(&i_a)
        .map(|(d, i)| g.total_inductance() * d + g.total_resistance() * i)
        .collect();
    let p_in: Vec<f64> = e_g.iter().zip(&i_a).map(|(e, i)| e * i).collect();
    Ok(ElectricalTrace {
        times: ts.times.clone(),
        i_a,
        e_g,
        p_out,
        p_in,
    })
}

fn truncate(ts: &mut TimeSeries, len: usize) {
    ts.times.truncate(len);
    ts.inputs.truncate(len);
    ts.outputs.truncate(len);
    if let Some(states) = ts.states.as_mut() {
        states.truncate(len);
    }
}

/// What closes the loop around the plant.
#[derive(Clone, Debug, PartialEq)]
pub enum Compensator {
    /// Dynamic or static output-feedback block in the forward path of a
    /// unity negative feedback loop.
    Output(StateSpaceModel),
    /// Full state feedback `u = N·r − Kx`.
    StateFeedback(Vec<f64>),
    /// Observer-based compensator, wired per its convention.
    Observer(ObserverBasedController),
}

impl Compensator {
    /// Whether the reference is scaled so the output tracks it in steady
    /// state. State-feedback style loops regulate to zero otherwise.
    pub fn uses_prescaler(&self) -> bool {
        match self {
            Compensator::Output(_) => false,
            Compensator::StateFeedback(_) => true,
            Compensator::Observer(c) => c.convention() == Convention::StandardLuenberger,
        }
    }
}

/// Closed-loop model from reference to plant output, without prescaling.
pub fn closed_loop_model(plant: &StateSpaceModel, comp: &Compensator) -> Result<StateSpaceModel> {
    match comp {
        Compensator::Output(c) => feedback_interconnect(plant, c),
        Compensator::StateFeedback(k) => {
            if !plant.is_siso() {
                return Err(Error::Unsupported(
                    "state feedback loop needs a SISO plant".into(),
                ));
            }
            if k.len() != plant.states() {
                return Err(Error::dim(format!(
                    "K has {} entries, plant has {} states",
                    k.len(),
                    plant.states()
                )));
            }
            let k = Matrix::row(k);
            let a = plant.a() - &(plant.b() * &k);
            let c = plant.c() - &(plant.d() * &k);
            StateSpaceModel::new(a, plant.b().clone(), c, plant.d().clone())
        }
        Compensator::Observer(c) => c.close_loop(plant),
    }
}

/// `N = 1 / (C(−A)⁻¹B + D)`: unit DC gain from scaled reference to output.
///
/// For state feedback this is `1 / (C(−(A − BK))⁻¹B)`.
pub fn reference_prescale(closed: &StateSpaceModel) -> Result<f64> {
    let dc = closed.dc_gain()?[(0, 0)];
    if dc == 0.0 || !dc.is_finite() {
        return Err(Error::invalid(
            "closed loop has zero DC gain; reference cannot be prescaled",
        ));
    }
    Ok(1.0 / dc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopResponse {
    /// Closed-loop model with the prescaler folded into its input matrix.
    pub model: StateSpaceModel,
    pub prescale: f64,
    pub hurwitz: bool,
    pub series: TimeSeries,
    /// `None` when the run diverged.
    pub metrics: Option<StepMetrics>,
}

/// Output magnitude, relative to the reference, beyond which a closed-loop
/// run counts as diverged.
pub const CLOSED_LOOP_DIVERGENCE_FACTOR: f64 = 10.0;

/// Step-reference response of plant and compensator.
///
/// `cfg.dt` and `cfg.duration` are honoured; the input is a step of height
/// `reference`.
pub fn closed_loop_step(
    plant: &StateSpaceModel,
    comp: &Compensator,
    reference: f64,
    cfg: &SimConfig,
) -> Result<ClosedLoopResponse> {
    let closed = closed_loop_model(plant, comp)?;
    let prescale = if comp.uses_prescaler() {
        reference_prescale(&closed)?
    } else {
        1.0
    };
    let model = StateSpaceModel::new(
        closed.a().clone(),
        closed.b().scale(prescale),
        closed.c().clone(),
        closed.d().scale(prescale),
    )?;
    let hurwitz = model.states() == 0 || is_hurwitz(&char_poly(model.a()))?;
    let run = SimConfig {
        input: InputKind::Step,
        amplitude: reference,
        ..*cfg
    };
    let mut series = simulate(&model, &run)?;
    let bound = CLOSED_LOOP_DIVERGENCE_FACTOR * reference.abs().max(1.0);
    if let Some(i) = series.outputs.iter().position(|y| y.abs() > bound) {
        truncate(&mut series, i);
        series.diverged = true;
    }
    let metrics = if series.diverged {
        None
    } else {
        Some(step_metrics(&series)?)
    };
    Ok(ClosedLoopResponse {
        model,
        prescale,
        hurwitz,
        series,
        metrics,
    })
}
