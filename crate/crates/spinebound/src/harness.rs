//! Command layer: train, evaluate, compare, and inspect-checkpoint, plus the
//! run-directory layout and manifest bookkeeping. The CLI binary is a thin
//! wrapper over these functions.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, EnvKind, RunConfig};
use crate::dynamics::SpineMode;
use crate::env::BoundingEnv;
use crate::learner::{
    deterministic_action, reset_seed, train, Checkpoint, CheckpointError, CheckpointSink,
    Environment, IterationStats, LearnerError, PolicyParams, RunningNorm,
};
use crate::metrics::{average_trials, gait_report, GaitReport, TrajectoryLog};
use crate::toy::ToyVelocityEnv;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error("incompatible artifact: {0}")]
    Incompatible(String),
    #[error("{0}")]
    Other(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Script-facing exit code: 2 config, 3 divergence, 4 incompatible
    /// artifact, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Divergence(_) => 3,
            HarnessError::Incompatible(_) => 4,
            _ => 1,
        }
    }
}

impl From<LearnerError> for HarnessError {
    fn from(e: LearnerError) -> Self {
        match e {
            LearnerError::NumericalDivergence { .. } => HarnessError::Divergence(e.to_string()),
            LearnerError::Checkpoint(c) => c.into(),
            other => HarnessError::Other(other.to_string()),
        }
    }
}

impl From<CheckpointError> for HarnessError {
    fn from(e: CheckpointError) -> Self {
        match e {
            CheckpointError::BadMagic | CheckpointError::Version { .. } => {
                HarnessError::Incompatible(e.to_string())
            }
            other => HarnessError::Other(other.to_string()),
        }
    }
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub checkpoints: Vec<String>,
    pub outputs: Vec<String>,
    pub final_metrics: serde_json::Value,
}

impl RunManifest {
    fn new(config_hash: &str, seed: u64) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: String::new(),
            checkpoints: Vec::new(),
            outputs: Vec::new(),
            final_metrics: serde_json::Value::Null,
        }
    }

    fn record(&mut self, dir: &Path, path: &Path) {
        let rel = path
            .strip_prefix(dir)
            .unwrap_or(path)
            .to_string_lossy()
            .to_string();
        if !self.outputs.contains(&rel) {
            self.outputs.push(rel);
        }
    }

    fn finish(mut self, dir: &Path) -> Result<PathBuf, HarnessError> {
        self.finished_at = chrono::Utc::now().to_rfc3339();
        let path = dir.join("manifest.json");
        self.outputs.push("manifest.json".into());
        std::fs::write(&path, serde_json::to_string_pretty(&self).unwrap())?;
        Ok(path)
    }
}

/// Build one environment instance of the configured kind.
pub fn build_env(cfg: &RunConfig) -> Box<dyn Environment> {
    match cfg.environment {
        EnvKind::Robot => Box::new(build_robot_env(cfg)),
        EnvKind::Toy => Box::new(ToyVelocityEnv::new(
            cfg.reward.v_des,
            cfg.reward.sigma_value(),
        )),
    }
}

pub fn build_robot_env(cfg: &RunConfig) -> BoundingEnv {
    BoundingEnv::new(
        cfg.robot.clone(),
        cfg.contact,
        cfg.action,
        cfg.reward,
        cfg.episode,
        cfg.mode,
    )
}

#[derive(Debug)]
pub struct TrainSummary {
    pub out_dir: PathBuf,
    pub curve_path: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub iterations: u64,
    pub total_steps: u64,
    pub final_stats: Option<IterationStats>,
}

/// Run (or resume) training into `out_dir`: checkpoints, an appendable
/// learning-curve CSV, the resolved config, and a manifest.
pub fn cmd_train(cfg: &RunConfig, out_dir: &Path, resume: bool) -> Result<TrainSummary, HarnessError> {
    let hash = cfg.hash();
    std::fs::create_dir_all(out_dir)?;
    let ckpt_dir = out_dir.join("checkpoints");
    let mut manifest = RunManifest::new(&hash, cfg.seed);

    let config_path = out_dir.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml())?;
    manifest.record(out_dir, &config_path);

    let latest = ckpt_dir.join("ckpt_latest.bin");
    let resume_ckpt = if resume && latest.exists() {
        let ckpt = Checkpoint::load(&latest)?;
        if ckpt.config_hash != hash {
            return Err(HarnessError::Incompatible(format!(
                "resume checkpoint was trained with config {} but the current config hashes to {hash}",
                ckpt.config_hash
            )));
        }
        Some(ckpt)
    } else {
        None
    };

    let mut factory = |_idx: usize| build_env(cfg);
    let sink = CheckpointSink {
        dir: &ckpt_dir,
        config_hash: &hash,
    };
    let output = train(&cfg.ppo_for_run(), &mut factory, Some(sink), resume_ckpt.as_ref())?;

    let curve_path = out_dir.join("learning_curve.csv");
    append_curve(&curve_path, &hash, &output.curve, resume_ckpt.is_some())?;
    manifest.record(out_dir, &curve_path);
    for p in &output.checkpoints {
        manifest.record(out_dir, p);
        manifest.checkpoints.push(
            p.strip_prefix(out_dir)
                .unwrap_or(p)
                .to_string_lossy()
                .to_string(),
        );
    }
    let latest_rel = ckpt_dir.join("ckpt_latest.bin");
    if latest_rel.exists() {
        manifest.record(out_dir, &latest_rel);
    }

    let final_stats = output.curve.last().copied();
    if let Some(s) = final_stats {
        manifest.final_metrics = serde_json::json!({
            "iterations": output.iterations,
            "total_steps": output.total_steps,
            "mean_episode_reward": s.mean_episode_reward,
            "mean_forward_speed": s.mean_forward_speed,
        });
    }
    manifest.finish(out_dir)?;

    Ok(TrainSummary {
        out_dir: out_dir.to_path_buf(),
        curve_path,
        checkpoints: output.checkpoints,
        iterations: output.iterations,
        total_steps: output.total_steps,
        final_stats,
    })
}

fn append_curve(
    path: &Path,
    hash: &str,
    rows: &[IterationStats],
    appending: bool,
) -> Result<(), HarnessError> {
    let fresh = !(appending && path.exists());
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(!fresh)
        .write(true)
        .truncate(fresh)
        .open(path)?;
    if fresh {
        writeln!(file, "# spinebound-curve v1 config={hash}")?;
        writeln!(
            file,
            "iteration,total_steps,mean_episode_reward,mean_forward_speed,policy_loss,value_loss,entropy,clip_fraction"
        )?;
    }
    for r in rows {
        writeln!(
            file,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            r.total_steps,
            r.mean_episode_reward,
            r.mean_forward_speed,
            r.policy_loss,
            r.value_loss,
            r.entropy,
            r.clip_fraction
        )?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct EvalSummary {
    pub report: GaitReport,
    pub trial_logs: Vec<PathBuf>,
    pub report_path: PathBuf,
}

/// Run `n_trials` deterministic-policy episodes from a checkpoint, log each
/// trajectory, and write per-trial plus averaged gait reports.
pub fn cmd_eval(
    checkpoint: &Path,
    cfg: &RunConfig,
    out_dir: &Path,
    n_trials: usize,
) -> Result<EvalSummary, HarnessError> {
    if cfg.environment != EnvKind::Robot {
        return Err(HarnessError::Config(ConfigError::Invalid(
            "eval requires environment = \"robot\"".into(),
        )));
    }
    let hash = cfg.hash();
    let ckpt = Checkpoint::load(checkpoint)?;
    if ckpt.config_hash != hash {
        return Err(HarnessError::Incompatible(format!(
            "checkpoint config hash {} does not match current config hash {hash}",
            ckpt.config_hash
        )));
    }
    let params = ckpt.to_params()?;
    let normalizer = ckpt.normalizer.clone();

    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new(&hash, cfg.seed);
    let mut reports = Vec::new();
    let mut trial_logs = Vec::new();
    let mut first_log: Option<TrajectoryLog> = None;
    for trial in 0..n_trials {
        let log_path = out_dir.join(format!("trial_{trial}.csv"));
        let seed = reset_seed(cfg.seed, 1_000_000 + trial as u64, 0);
        run_deterministic_episode(cfg, &params, &normalizer, seed, &log_path, &hash)?;
        let log = TrajectoryLog::read_csv(&log_path)
            .map_err(|e| HarnessError::Other(e.to_string()))?;
        reports.push(gait_report(&log).map_err(|e| HarnessError::Other(e.to_string()))?);
        if first_log.is_none() {
            first_log = Some(log);
        }
        manifest.record(out_dir, &log_path);
        trial_logs.push(log_path);
    }
    let report = average_trials(&reports).map_err(|e| HarnessError::Other(e.to_string()))?;

    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, report.to_text())?;
    manifest.record(out_dir, &report_path);
    let json_path = out_dir.join("report.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report).unwrap())?;
    manifest.record(out_dir, &json_path);

    if let Some(log) = &first_log {
        let torque_path = out_dir.join("torque_profile.csv");
        write_torque_profile(&torque_path, log)?;
        manifest.record(out_dir, &torque_path);
    }
    let diagram_path = out_dir.join("gait_diagram.csv");
    write_gait_diagram(&diagram_path, &report)?;
    manifest.record(out_dir, &diagram_path);

    manifest.final_metrics = serde_json::to_value(&report).unwrap();
    manifest.finish(out_dir)?;

    Ok(EvalSummary {
        report,
        trial_logs,
        report_path,
    })
}

/// One deterministic-policy episode with trajectory logging.
pub fn run_deterministic_episode(
    cfg: &RunConfig,
    params: &PolicyParams,
    normalizer: &RunningNorm,
    seed: u64,
    log_path: &Path,
    config_hash: &str,
) -> Result<(), HarnessError> {
    let mut env = build_robot_env(cfg);
    env.start_log(log_path, config_hash)
        .map_err(|e| HarnessError::Other(e.to_string()))?;
    let mut obs = env.reset(seed);
    loop {
        let action_vec = deterministic_action(params, normalizer, obs.as_slice());
        let mut action = [0.0; 5];
        action.copy_from_slice(&action_vec);
        let result = env
            .step(&action)
            .map_err(|e| HarnessError::Other(e.to_string()))?;
        if result.done {
            break;
        }
        obs = result.observation;
    }
    env.finish_log().map_err(|e| HarnessError::Other(e.to_string()))?;
    Ok(())
}

fn write_torque_profile(path: &Path, log: &TrajectoryLog) -> Result<(), HarnessError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = String::from("t");
    for j in 0..10 {
        header.push_str(&format!(",tau{j}"));
    }
    for j in 0..10 {
        header.push_str(&format!(",power{j}"));
    }
    writeln!(out, "# spinebound-torque-profile v1 config={}", log.meta.config_hash)?;
    writeln!(out, "{header}")?;
    for i in 0..log.len() {
        let mut row = format!("{}", log.t[i]);
        for j in 0..10 {
            row.push_str(&format!(",{}", log.tau[i][j]));
        }
        for j in 0..10 {
            row.push_str(&format!(",{}", log.tau[i][j] * log.qd[i][j]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn write_gait_diagram(path: &Path, report: &GaitReport) -> Result<(), HarnessError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# spinebound-gait-diagram v1 config={}", report.config_hash)?;
    writeln!(out, "trial,foot,stance_start,stance_end")?;
    for (trial, diagram) in report.gait_diagrams.iter().enumerate() {
        for (foot, name) in diagram.iter().zip(["front", "rear"]) {
            for (start, end) in foot {
                writeln!(out, "{trial},{name},{start},{end}")?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub v_des: f64,
    pub mode: String,
    pub status: String,
    pub mean_forward_speed: f64,
    pub cot: f64,
    pub mean_stride_length: f64,
    pub froude_mean: f64,
    pub peak_torque_max: f64,
}

#[derive(Debug)]
pub struct CompareSummary {
    pub rows: Vec<ComparisonRow>,
    pub table_path: PathBuf,
}

/// Sweep target speeds across spine modes: evaluate existing checkpoints
/// (training each missing cell when `train_missing` is set), and emit the
/// per-cell metric table. Missing cells are reported and the partial table
/// still written.
pub fn cmd_compare(
    base: &RunConfig,
    speeds: &[f64],
    modes: &[SpineMode],
    out_dir: &Path,
    n_trials: usize,
    train_missing: bool,
) -> Result<CompareSummary, HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for &speed in speeds {
        for &mode in modes {
            let mode_name = match mode {
                SpineMode::Active => "active",
                SpineMode::Rigid => "rigid",
            };
            let mut cfg = base.clone();
            cfg.reward.v_des = speed;
            cfg.mode = mode;
            let cell_dir = out_dir.join(format!("v{speed:.2}_{mode_name}"));
            let ckpt_path = cell_dir.join("checkpoints").join("ckpt_latest.bin");

            if !ckpt_path.exists() && train_missing {
                cmd_train(&cfg, &cell_dir, false)?;
            }
            if !ckpt_path.exists() {
                eprintln!("compare: missing checkpoint for v_des={speed} mode={mode_name}");
                rows.push(ComparisonRow {
                    v_des: speed,
                    mode: mode_name.into(),
                    status: "missing".into(),
                    mean_forward_speed: f64::NAN,
                    cot: f64::NAN,
                    mean_stride_length: f64::NAN,
                    froude_mean: f64::NAN,
                    peak_torque_max: f64::NAN,
                });
                continue;
            }
            let eval_dir = cell_dir.join("eval");
            let summary = cmd_eval(&ckpt_path, &cfg, &eval_dir, n_trials)?;
            let r = &summary.report;
            rows.push(ComparisonRow {
                v_des: speed,
                mode: mode_name.into(),
                status: "ok".into(),
                mean_forward_speed: r.mean_forward_speed,
                cot: r.cot.unwrap_or(f64::NAN),
                mean_stride_length: r.mean_stride_length,
                froude_mean: r.froude_mean,
                peak_torque_max: r.peak_torque.iter().cloned().fold(0.0, f64::max),
            });
        }
    }

    let table_path = out_dir.join("comparison.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&table_path)?);
    writeln!(out, "# spinebound-comparison v1 config={}", base.hash())?;
    writeln!(
        out,
        "v_des,mode,status,mean_forward_speed,cot,mean_stride_length,froude_mean,peak_torque_max"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.v_des,
            r.mode,
            r.status,
            r.mean_forward_speed,
            r.cot,
            r.mean_stride_length,
            r.froude_mean,
            r.peak_torque_max
        )?;
    }
    drop(out);
    Ok(CompareSummary { rows, table_path })
}

/// Human-readable checkpoint summary.
pub fn cmd_inspect(path: &Path) -> Result<String, HarnessError> {
    let ckpt = Checkpoint::load(path)?;
    let mut s = String::new();
    s.push_str(&format!("version: {}\n", ckpt.version));
    s.push_str(&format!("config_hash: {}\n", ckpt.config_hash));
    s.push_str(&format!(
        "normalizer: dim={} count={}\n",
        ckpt.normalizer.dim(),
        ckpt.normalizer.count
    ));
    match &ckpt.resume {
        Some(r) => s.push_str(&format!(
            "resume: iteration={} total_steps={} workers={}\n",
            r.iteration,
            r.total_steps,
            r.workers.len()
        )),
        None => s.push_str("resume: none\n"),
    }
    s.push_str("arrays:\n");
    for a in &ckpt.arrays {
        let shape: Vec<String> = a.shape.iter().map(|d| d.to_string()).collect();
        s.push_str(&format!("  {:<12} [{}]\n", a.name, shape.join(", ")));
    }
    Ok(s)
}
