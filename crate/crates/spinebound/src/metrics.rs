//! Gait analysis over trajectory logs: cost of transport, Froude number,
//! stride lengths, gait diagrams, torque/power profiles, and multi-trial
//! aggregation.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("net forward displacement {0:.2e} m too small for cost of transport")]
    ZeroDistance(f64),
    #[error("need at least two touchdowns of the same foot, found {0}")]
    InsufficientStrides(usize),
    #[error("trial config hashes differ: {0} vs {1}")]
    ConfigMismatch(String, String),
    #[error("malformed trajectory log: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Minimum stance/swing duration in control steps; shorter runs are treated
/// as contact chatter.
pub const DEBOUNCE_STEPS: usize = 2;

/// Fraction of the episode (from the end) used as the steady-state window
/// for headline speed numbers.
pub const STEADY_WINDOW: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Foot {
    Front,
    Rear,
}

/// Geometry and provenance read from the log's metadata line; enough to
/// reconstruct foot world positions offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMeta {
    pub config_hash: String,
    pub control_dt: f64,
    pub mass: f64,
    pub gravity: f64,
    pub upper: f64,
    pub lower: f64,
    pub hip_sep: f64,
    pub front_body_len: f64,
    pub spine_len: f64,
    pub rear_body_len: f64,
    pub front_hip: [f64; 2],
    pub rear_hip: [f64; 2],
}

impl LogMeta {
    /// Leg length datum for Froude numbers.
    pub fn leg_length(&self) -> f64 {
        self.upper + self.lower
    }
}

/// Uniformly sampled trajectory, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub meta: LogMeta,
    pub t: Vec<f64>,
    pub base_x: Vec<f64>,
    pub base_z: Vec<f64>,
    pub pitch: Vec<f64>,
    pub v_x: Vec<f64>,
    /// Joint angles, 10 slots in observation order.
    pub q: Vec<[f64; 10]>,
    pub qd: Vec<[f64; 10]>,
    pub tau: Vec<[f64; 10]>,
    pub contact: [Vec<bool>; 2],
    pub reward: Vec<f64>,
    pub delta_e: Vec<f64>,
    pub done: Vec<bool>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.meta.control_dt
    }

    pub fn read_csv(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines();
        let meta_line = lines
            .next()
            .ok_or_else(|| MetricsError::Parse("empty file".into()))?;
        let meta = parse_meta(meta_line)?;
        let header = lines
            .next()
            .ok_or_else(|| MetricsError::Parse("missing header".into()))?;
        let arity = header.split(',').count();
        if arity != 40 {
            return Err(MetricsError::Parse(format!(
                "expected 40 columns, header has {arity}"
            )));
        }

        let mut log = TrajectoryLog {
            meta,
            t: Vec::new(),
            base_x: Vec::new(),
            base_z: Vec::new(),
            pitch: Vec::new(),
            v_x: Vec::new(),
            q: Vec::new(),
            qd: Vec::new(),
            tau: Vec::new(),
            contact: [Vec::new(), Vec::new()],
            reward: Vec::new(),
            delta_e: Vec::new(),
            done: Vec::new(),
        };
        for (line_no, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 40 {
                return Err(MetricsError::Parse(format!(
                    "row {line_no}: {} fields, expected 40",
                    fields.len()
                )));
            }
            let num = |i: usize| -> Result<f64, MetricsError> {
                fields[i]
                    .parse::<f64>()
                    .map_err(|_| MetricsError::Parse(format!("row {line_no} col {i}")))
            };
            log.t.push(num(0)?);
            log.base_x.push(num(1)?);
            log.base_z.push(num(2)?);
            log.pitch.push(num(3)?);
            log.v_x.push(num(4)?);
            let mut q = [0.0; 10];
            let mut qd = [0.0; 10];
            let mut tau = [0.0; 10];
            for j in 0..10 {
                q[j] = num(5 + 3 * j)?;
                qd[j] = num(6 + 3 * j)?;
                tau[j] = num(7 + 3 * j)?;
            }
            log.q.push(q);
            log.qd.push(qd);
            log.tau.push(tau);
            log.contact[0].push(num(35)? != 0.0);
            log.contact[1].push(num(36)? != 0.0);
            log.reward.push(num(37)?);
            log.delta_e.push(num(38)?);
            log.done.push(num(39)? != 0.0);
        }
        log.validate()?;
        Ok(log)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.len() < 2 {
            return Err(MetricsError::Parse("log needs at least two rows".into()));
        }
        let dt = self.meta.control_dt;
        for w in self.t.windows(2) {
            let step = w[1] - w[0];
            if step <= 0.0 {
                return Err(MetricsError::Parse("time not strictly increasing".into()));
            }
            if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(MetricsError::Parse(format!(
                    "sampling interval {step} deviates from control_dt {dt}"
                )));
            }
        }
        Ok(())
    }

    /// World position of a foot at row `i`, reconstructed from base pose,
    /// joint angles, and the logged geometry.
    pub fn foot_position(&self, foot: Foot, i: usize) -> [f64; 2] {
        let m = &self.meta;
        let p = self.pitch[i];
        let base = [self.base_x[i], self.base_z[i]];
        let leg_dir = |theta: f64| [theta.sin(), -theta.cos()];
        let rot = |angle: f64, v: [f64; 2]| {
            let (s, c) = angle.sin_cos();
            [c * v[0] - s * v[1], s * v[0] + c * v[1]]
        };
        let add = |a: [f64; 2], b: [f64; 2]| [a[0] + b[0], a[1] + b[1]];
        let scale = |k: f64, v: [f64; 2]| [k * v[0], k * v[1]];

        let (pivot, body_angle, hip, knee) = match foot {
            Foot::Front => {
                let anchor = [m.front_hip[0] + 0.5 * m.hip_sep, m.front_hip[1]];
                (add(base, rot(p, anchor)), p, self.q[i][0], self.q[i][1])
            }
            Foot::Rear => {
                let spine_joint = add(base, rot(p, [-0.5 * m.front_body_len, 0.0]));
                let link_angle = p + self.q[i][8];
                let far = add(spine_joint, rot(link_angle, [-m.spine_len, 0.0]));
                let rear_angle = link_angle + self.q[i][9];
                let anchor = [
                    -0.5 * m.rear_body_len + m.rear_hip[0] + 0.5 * m.hip_sep,
                    m.rear_hip[1],
                ];
                (
                    add(far, rot(rear_angle, anchor)),
                    rear_angle,
                    self.q[i][4],
                    self.q[i][5],
                )
            }
        };
        let thigh = scale(m.upper, leg_dir(body_angle + hip));
        let shank = scale(m.lower, leg_dir(body_angle + hip + knee));
        add(add(pivot, thigh), shank)
    }
}

fn parse_meta(line: &str) -> Result<LogMeta, MetricsError> {
    if !line.starts_with("# spinebound-log v1 ") {
        return Err(MetricsError::Parse(
            "missing `# spinebound-log v1` metadata line".into(),
        ));
    }
    let mut kv = HashMap::new();
    for token in line.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = token.split_once('=') {
            kv.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| -> Result<f64, MetricsError> {
        kv.get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| MetricsError::Parse(format!("metadata key `{k}`")))
    };
    Ok(LogMeta {
        config_hash: kv
            .get("config")
            .cloned()
            .ok_or_else(|| MetricsError::Parse("metadata key `config`".into()))?,
        control_dt: get("control_dt")?,
        mass: get("mass")?,
        gravity: get("gravity")?,
        upper: get("upper")?,
        lower: get("lower")?,
        hip_sep: get("hip_sep")?,
        front_body_len: get("front_body_len")?,
        spine_len: get("spine_len")?,
        rear_body_len: get("rear_body_len")?,
        front_hip: [get("front_hip_x")?, get("front_hip_y")?],
        rear_hip: [get("rear_hip_x")?, get("rear_hip_y")?],
    })
}

/// Cost of transport: positive actuator work per weight per distance,
/// `integral(max(tau*omega, 0)) / (M g X)` with a rectangle rule at the
/// log's sampling interval. Note the positive-work clamp here versus the
/// absolute value in the per-step energy term; the two are never conflated.
pub fn cost_of_transport(log: &TrajectoryLog, mass: f64, gravity: f64) -> Result<f64, MetricsError> {
    let distance = log.base_x.last().unwrap() - log.base_x.first().unwrap();
    if distance <= 1e-6 {
        return Err(MetricsError::ZeroDistance(distance));
    }
    let dt = log.dt();
    let mut work = 0.0;
    for i in 0..log.len() {
        for j in 0..10 {
            work += (log.tau[i][j] * log.qd[i][j]).max(0.0) * dt;
        }
    }
    Ok(work / (mass * gravity * distance))
}

/// Froude number `v^2 / (g l0)`.
pub fn froude(v: f64, l0: f64, g: f64) -> f64 {
    assert!(l0 > 0.0 && g > 0.0, "l0 and g must be positive");
    v * v / (g * l0)
}

/// Remove contact runs shorter than `min_run` samples (chatter), then fill
/// interior swing gaps shorter than `min_run`.
pub fn debounce_contacts(contact: &[bool], min_run: usize) -> Vec<bool> {
    let mut out = contact.to_vec();
    drop_short_runs(&mut out, true, min_run, true);
    drop_short_runs(&mut out, false, min_run, false);
    out
}

fn drop_short_runs(series: &mut [bool], value: bool, min_run: usize, include_edges: bool) {
    let n = series.len();
    let mut i = 0;
    while i < n {
        if series[i] != value {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && series[i] == value {
            i += 1;
        }
        let at_edge = start == 0 || i == n;
        if i - start < min_run && (include_edges || !at_edge) {
            for s in &mut series[start..i] {
                *s = !value;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideStats {
    pub mean: f64,
    pub strides: Vec<f64>,
}

/// Stride lengths of one foot: world-x distance between consecutive
/// (debounced) touchdown positions.
pub fn stride_length(log: &TrajectoryLog, foot: Foot) -> Result<StrideStats, MetricsError> {
    let idx = match foot {
        Foot::Front => 0,
        Foot::Rear => 1,
    };
    let contact = debounce_contacts(&log.contact[idx], DEBOUNCE_STEPS);
    let mut touchdown_x = Vec::new();
    for i in 0..contact.len() {
        let rising = contact[i] && (i == 0 || !contact[i - 1]);
        if rising {
            touchdown_x.push(log.foot_position(foot, i)[0]);
        }
    }
    if touchdown_x.len() < 2 {
        return Err(MetricsError::InsufficientStrides(touchdown_x.len()));
    }
    let strides: Vec<f64> = touchdown_x.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = strides.iter().sum::<f64>() / strides.len() as f64;
    Ok(StrideStats { mean, strides })
}

/// Per-foot stance intervals (start, end) in seconds after debouncing.
pub fn gait_diagram(log: &TrajectoryLog) -> [Vec<(f64, f64)>; 2] {
    let dt = log.dt();
    [0, 1].map(|foot| {
        let contact = debounce_contacts(&log.contact[foot], DEBOUNCE_STEPS);
        let mut intervals = Vec::new();
        let mut i = 0;
        while i < contact.len() {
            if !contact[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < contact.len() && contact[i] {
                i += 1;
            }
            intervals.push((log.t[start], log.t[start] + (i - start) as f64 * dt));
        }
        intervals
    })
}

/// Torque/power summary segmented by gait cycle (front-foot touchdowns).
#[derive(Debug, Clone, PartialEq)]
pub struct TorquePowerProfile {
    /// Row ranges of complete gait cycles.
    pub cycles: Vec<Range<usize>>,
    /// Peak |torque| per joint within each cycle.
    pub cycle_peak_torque: Vec<[f64; 10]>,
    /// Peak |torque| per joint over the whole log.
    pub peak_torque: [f64; 10],
    /// Mean |torque * omega| per joint over the whole log.
    pub mean_abs_power: [f64; 10],
}

pub fn torque_power_profile(log: &TrajectoryLog) -> TorquePowerProfile {
    let contact = debounce_contacts(&log.contact[0], DEBOUNCE_STEPS);
    let mut touchdowns = Vec::new();
    for i in 0..contact.len() {
        if contact[i] && (i == 0 || !contact[i - 1]) {
            touchdowns.push(i);
        }
    }
    let cycles: Vec<Range<usize>> = touchdowns.windows(2).map(|w| w[0]..w[1]).collect();

    let mut peak = [0.0f64; 10];
    let mut power = [0.0f64; 10];
    for i in 0..log.len() {
        for j in 0..10 {
            peak[j] = peak[j].max(log.tau[i][j].abs());
            power[j] += (log.tau[i][j] * log.qd[i][j]).abs();
        }
    }
    for p in &mut power {
        *p /= log.len() as f64;
    }
    let cycle_peak_torque = cycles
        .iter()
        .map(|c| {
            let mut peak = [0.0f64; 10];
            for i in c.clone() {
                for j in 0..10 {
                    peak[j] = peak[j].max(log.tau[i][j].abs());
                }
            }
            peak
        })
        .collect();

    TorquePowerProfile {
        cycles,
        cycle_peak_torque,
        peak_torque: peak,
        mean_abs_power: power,
    }
}

/// Per-trial (or trial-averaged) gait metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitReport {
    pub config_hash: String,
    pub n_trials: usize,
    /// Undefined (None) when the trial covered no forward distance.
    pub cot: Option<f64>,
    /// Froude number at the steady-window mean speed (headline) and at the
    /// peak speed (the alternative definition); both reported.
    pub froude_mean: f64,
    pub froude_max: f64,
    pub mean_forward_speed: f64,
    pub max_forward_speed: f64,
    pub mean_stride_length: f64,
    pub stride_count: f64,
    pub peak_torque: [f64; 10],
    pub mean_abs_power: [f64; 10],
    /// Stance intervals per foot, retained per trial (never averaged).
    pub gait_diagrams: Vec<[Vec<(f64, f64)>; 2]>,
}

impl GaitReport {
    /// Flat key-value text rendering for report files.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("config_hash = {}\n", self.config_hash));
        s.push_str(&format!("n_trials = {}\n", self.n_trials));
        match self.cot {
            Some(c) => s.push_str(&format!("cot = {c}\n")),
            None => s.push_str("cot = undefined\n"),
        }
        s.push_str(&format!("froude_mean = {}\n", self.froude_mean));
        s.push_str(&format!("froude_max = {}\n", self.froude_max));
        s.push_str(&format!("mean_forward_speed = {}\n", self.mean_forward_speed));
        s.push_str(&format!("max_forward_speed = {}\n", self.max_forward_speed));
        s.push_str(&format!("mean_stride_length = {}\n", self.mean_stride_length));
        s.push_str(&format!("stride_count = {}\n", self.stride_count));
        for j in 0..10 {
            s.push_str(&format!("peak_torque_{j} = {}\n", self.peak_torque[j]));
        }
        for j in 0..10 {
            s.push_str(&format!("mean_abs_power_{j} = {}\n", self.mean_abs_power[j]));
        }
        s
    }
}

/// All headline metrics of one trial log.
pub fn gait_report(log: &TrajectoryLog) -> Result<GaitReport, MetricsError> {
    let meta = &log.meta;
    let cot = match cost_of_transport(log, meta.mass, meta.gravity) {
        Ok(c) => Some(c),
        Err(MetricsError::ZeroDistance(_)) => None,
        Err(e) => return Err(e),
    };

    let window_start = ((1.0 - STEADY_WINDOW) * log.len() as f64) as usize;
    let steady = &log.v_x[window_start..];
    let mean_speed = steady.iter().sum::<f64>() / steady.len() as f64;
    let max_speed = log.v_x.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut stride_sum = 0.0;
    let mut stride_n = 0usize;
    for foot in [Foot::Front, Foot::Rear] {
        if let Ok(s) = stride_length(log, foot) {
            stride_sum += s.strides.iter().sum::<f64>();
            stride_n += s.strides.len();
        }
    }
    let mean_stride = if stride_n > 0 {
        stride_sum / stride_n as f64
    } else {
        0.0
    };

    let profile = torque_power_profile(log);
    Ok(GaitReport {
        config_hash: meta.config_hash.clone(),
        n_trials: 1,
        cot,
        froude_mean: froude(mean_speed, meta.leg_length(), meta.gravity),
        froude_max: froude(max_speed, meta.leg_length(), meta.gravity),
        mean_forward_speed: mean_speed,
        max_forward_speed: max_speed,
        mean_stride_length: mean_stride,
        stride_count: stride_n as f64,
        peak_torque: profile.peak_torque,
        mean_abs_power: profile.mean_abs_power,
        gait_diagrams: vec![gait_diagram(log)],
    })
}

/// Arithmetic mean of the scalar fields across trials; gait diagrams are
/// concatenated, never averaged. Requires matching config hashes.
pub fn average_trials(reports: &[GaitReport]) -> Result<GaitReport, MetricsError> {
    let first = reports
        .first()
        .ok_or_else(|| MetricsError::Parse("no reports to average".into()))?;
    for r in reports {
        if r.config_hash != first.config_hash {
            return Err(MetricsError::ConfigMismatch(
                first.config_hash.clone(),
                r.config_hash.clone(),
            ));
        }
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&GaitReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let cots: Vec<f64> = reports.iter().filter_map(|r| r.cot).collect();
    let cot = if cots.is_empty() {
        None
    } else {
        Some(cots.iter().sum::<f64>() / cots.len() as f64)
    };
    let mut peak_torque = [0.0; 10];
    let mut mean_abs_power = [0.0; 10];
    for j in 0..10 {
        peak_torque[j] = reports.iter().map(|r| r.peak_torque[j]).sum::<f64>() / n;
        mean_abs_power[j] = reports.iter().map(|r| r.mean_abs_power[j]).sum::<f64>() / n;
    }
    Ok(GaitReport {
        config_hash: first.config_hash.clone(),
        n_trials: reports.iter().map(|r| r.n_trials).sum(),
        cot,
        froude_mean: mean(|r| r.froude_mean),
        froude_max: mean(|r| r.froude_max),
        mean_forward_speed: mean(|r| r.mean_forward_speed),
        max_forward_speed: mean(|r| r.max_forward_speed),
        mean_stride_length: mean(|r| r.mean_stride_length),
        stride_count: mean(|r| r.stride_count),
        peak_torque,
        mean_abs_power,
        gait_diagrams: reports
            .iter()
            .flat_map(|r| r.gait_diagrams.clone())
            .collect(),
    })
}

#[cfg(test)]
pub(crate) fn test_meta() -> LogMeta {
    LogMeta {
        config_hash: "test".into(),
        control_dt: 0.025,
        mass: 5.0,
        gravity: 9.81,
        upper: 0.1225,
        lower: 0.1225,
        hip_sep: 0.04,
        front_body_len: 0.18,
        spine_len: 0.102,
        rear_body_len: 0.18,
        front_hip: [0.05, 0.0],
        rear_hip: [-0.05, 0.0],
    }
}

#[cfg(test)]
pub(crate) fn synthetic_log(
    meta: LogMeta,
    rows: usize,
    mut fill: impl FnMut(usize, &mut SyntheticRow),
) -> TrajectoryLog {
    let mut log = TrajectoryLog {
        meta,
        t: Vec::new(),
        base_x: Vec::new(),
        base_z: Vec::new(),
        pitch: Vec::new(),
        v_x: Vec::new(),
        q: Vec::new(),
        qd: Vec::new(),
        tau: Vec::new(),
        contact: [Vec::new(), Vec::new()],
        reward: Vec::new(),
        delta_e: Vec::new(),
        done: Vec::new(),
    };
    for i in 0..rows {
        let mut row = SyntheticRow::default();
        fill(i, &mut row);
        log.t.push(i as f64 * log.meta.control_dt);
        log.base_x.push(row.base_x);
        log.base_z.push(row.base_z);
        log.pitch.push(row.pitch);
        log.v_x.push(row.v_x);
        log.q.push(row.q);
        log.qd.push(row.qd);
        log.tau.push(row.tau);
        log.contact[0].push(row.contact_front);
        log.contact[1].push(row.contact_rear);
        log.reward.push(0.0);
        log.delta_e.push(0.0);
        log.done.push(i + 1 == rows);
    }
    log
}

#[cfg(test)]
#[derive(Default, Clone)]
pub(crate) struct SyntheticRow {
    pub base_x: f64,
    pub base_z: f64,
    pub pitch: f64,
    pub v_x: f64,
    pub q: [f64; 10],
    pub qd: [f64; 10],
    pub tau: [f64; 10],
    pub contact_front: bool,
    pub contact_rear: bool,
}
