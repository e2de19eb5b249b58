//! Run configuration: a single TOML file covering the robot model, physics,
//! reward, episode shape, and PPO hyperparameters, with dotted-path command
//! line overrides and a stable content hash for provenance.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

use crate::dynamics::{ContactParams, RobotModel, SpineMode};
use crate::env::{EpisodeConfig, RewardConfig};
use crate::kinematics::ActionBox;
use crate::learner::PpoConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: {1}")]
    Override(String, String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Robot,
    Toy,
}

/// Everything one run needs, serializable to a human-editable TOML file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: SpineMode,
    pub environment: EnvKind,
    pub robot: RobotModel,
    pub contact: ContactParams,
    pub action: ActionBox,
    pub reward: RewardConfig,
    pub episode: EpisodeConfig,
    pub ppo: PpoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mode: SpineMode::Active,
            environment: EnvKind::Robot,
            robot: RobotModel::default(),
            contact: ContactParams::default(),
            action: ActionBox::default(),
            reward: RewardConfig::default(),
            episode: EpisodeConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

impl RunConfig {
    /// Load a config file (or start from defaults when `path` is `None`)
    /// and apply dotted-path overrides like `ppo.n_envs=8`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: toml::Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => toml::Value::try_from(RunConfig::default())
                .map_err(|e| ConfigError::Parse(e.to_string()))?,
        };
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// The PPO config with the run seed injected; the learner's seed always
    /// comes from the run-level `seed` field.
    pub fn ppo_for_run(&self) -> PpoConfig {
        let mut ppo = self.ppo.clone();
        ppo.seed = self.seed;
        ppo
    }

    /// Stable content hash identifying the experiment. The step budget
    /// (`ppo.max_total_steps`) is a stopping condition rather than part of
    /// the experiment's identity, so it is excluded; a resumed run that only
    /// extends the budget stays compatible with its earlier artifacts.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.ppo.max_total_steps = 0;
        canonical.ppo.seed = 0;
        let mut hasher = Sha256::new();
        hasher.update(canonical.to_toml().as_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate().map_err(plus("robot"))?;
        self.contact.validate().map_err(plus("contact"))?;
        self.action.validate().map_err(plus("action"))?;
        self.reward.validate().map_err(plus("reward"))?;
        self.episode.validate().map_err(plus("episode"))?;
        self.ppo.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }
}

fn plus(section: &'static str) -> impl Fn(String) -> ConfigError {
    move |msg| ConfigError::Invalid(format!("{section}: {msg}"))
}

/// Set `a.b.c=value` inside a TOML tree, creating tables along the path.
/// Values parse as bool, integer, float, then string, in that order.
fn apply_override(root: &mut toml::Value, entry: &str) -> Result<(), ConfigError> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(entry.into(), "expected key=value".into()))?;
    let parsed = parse_scalar(raw);
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| {
            ConfigError::Override(entry.into(), format!("`{}` is not a table", segments[..i].join(".")))
        })?;
        if i + 1 == segments.len() {
            table.insert(seg.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("split always yields at least one segment")
}

fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}
