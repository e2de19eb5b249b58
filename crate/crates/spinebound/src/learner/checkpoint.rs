//! Versioned binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "SPNBCKPT"
//! version      u32
//! config_hash  u32 length + utf8
//! n_arrays     u32
//! arrays       name (u32 len + utf8), ndim u32, dims (u64 each),
//!              data (f32 LE, row-major)
//! normalizer   JSON blob (u64 len + bytes)
//! resume flag  u8; if 1: resume JSON blob (u64 len + bytes)
//! ```
//!
//! Parameter arrays are exact f32 images of the in-memory parameters, which
//! is what makes resume-then-continue bit-identical to an uninterrupted run.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::net::{Activation, AdamState, Linear, Mlp};
use super::normalizer::RunningNorm;
use super::policy::PolicyParams;
use super::rollout::WorkerState;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SPNBCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("incompatible checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

/// Mid-training state for exact resume.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResumeState {
    pub iteration: u64,
    pub total_steps: u64,
    pub last_mean_episode_reward: f64,
    pub workers: Vec<WorkerState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub arrays: Vec<NamedArray>,
    pub normalizer: RunningNorm,
    pub resume: Option<ResumeState>,
}

impl Checkpoint {
    pub fn from_params(
        params: &PolicyParams,
        normalizer: &RunningNorm,
        config_hash: &str,
        resume: Option<ResumeState>,
    ) -> Self {
        let mut arrays = Vec::new();
        let push_mlp = |arrays: &mut Vec<NamedArray>, prefix: &str, mlp: &Mlp| {
            for (i, layer) in mlp.layers.iter().enumerate() {
                arrays.push(NamedArray {
                    name: format!("{prefix}.{i}.w"),
                    shape: vec![layer.rows, layer.cols],
                    data: layer.w.clone(),
                });
                arrays.push(NamedArray {
                    name: format!("{prefix}.{i}.b"),
                    shape: vec![layer.rows],
                    data: layer.b.clone(),
                });
            }
        };
        push_mlp(&mut arrays, "actor", &params.actor);
        push_mlp(&mut arrays, "critic", &params.critic);
        arrays.push(NamedArray {
            name: "log_std".into(),
            shape: vec![params.log_std.len()],
            data: params.log_std.clone(),
        });
        arrays.push(NamedArray {
            name: "adam.m".into(),
            shape: vec![params.adam.m.len()],
            data: params.adam.m.clone(),
        });
        arrays.push(NamedArray {
            name: "adam.v".into(),
            shape: vec![params.adam.v.len()],
            data: params.adam.v.clone(),
        });
        arrays.push(NamedArray {
            name: "adam.t".into(),
            shape: vec![1],
            data: vec![params.adam.t as f32],
        });
        Self {
            version: CHECKPOINT_VERSION,
            config_hash: config_hash.to_string(),
            arrays,
            normalizer: normalizer.clone(),
            resume,
        }
    }

    fn array(&self, name: &str) -> Result<&NamedArray, CheckpointError> {
        self.arrays
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| CheckpointError::Malformed(format!("missing array `{name}`")))
    }

    /// Rebuild the policy (shapes inferred from the stored arrays).
    pub fn to_params(&self) -> Result<PolicyParams, CheckpointError> {
        let build_mlp = |prefix: &str, out_act: Activation| -> Result<Mlp, CheckpointError> {
            let mut layers = Vec::new();
            let mut i = 0;
            while let Ok(w) = self.array(&format!("{prefix}.{i}.w")) {
                let b = self.array(&format!("{prefix}.{i}.b"))?;
                if w.shape.len() != 2 || b.shape.len() != 1 || w.shape[0] != b.shape[0] {
                    return Err(CheckpointError::Malformed(format!(
                        "bad shapes for layer {prefix}.{i}"
                    )));
                }
                layers.push(Linear {
                    rows: w.shape[0],
                    cols: w.shape[1],
                    w: w.data.clone(),
                    b: b.data.clone(),
                });
                i += 1;
            }
            if layers.is_empty() {
                return Err(CheckpointError::Malformed(format!("no {prefix} layers")));
            }
            let mut acts = vec![Activation::Relu; layers.len() - 1];
            acts.push(out_act);
            Ok(Mlp {
                layers,
                activations: acts,
            })
        };
        let actor = build_mlp("actor", Activation::Tanh)?;
        let critic = build_mlp("critic", Activation::Linear)?;
        let log_std = self.array("log_std")?.data.clone();
        let m = self.array("adam.m")?.data.clone();
        let v = self.array("adam.v")?.data.clone();
        let t = self.array("adam.t")?.data[0] as u64;
        let n = actor.param_count() + critic.param_count() + log_std.len();
        if m.len() != n || v.len() != n {
            return Err(CheckpointError::Malformed(
                "optimizer moment size mismatch".into(),
            ));
        }
        let mut adam = AdamState::new(n);
        adam.m = m;
        adam.v = v;
        adam.t = t;
        Ok(PolicyParams {
            actor,
            critic,
            log_std,
            adam,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(CHECKPOINT_MAGIC)?;
        out.write_all(&self.version.to_le_bytes())?;
        write_str(&mut out, &self.config_hash)?;
        out.write_all(&(self.arrays.len() as u32).to_le_bytes())?;
        for a in &self.arrays {
            write_str(&mut out, &a.name)?;
            out.write_all(&(a.shape.len() as u32).to_le_bytes())?;
            for d in &a.shape {
                out.write_all(&(*d as u64).to_le_bytes())?;
            }
            for v in &a.data {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        write_blob(
            &mut out,
            &serde_json::to_vec(&self.normalizer)
                .map_err(|e| CheckpointError::Malformed(e.to_string()))?,
        )?;
        match &self.resume {
            Some(resume) => {
                out.write_all(&[1u8])?;
                write_blob(
                    &mut out,
                    &serde_json::to_vec(resume)
                        .map_err(|e| CheckpointError::Malformed(e.to_string()))?,
                )?;
            }
            None => out.write_all(&[0u8])?,
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut input)?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version {
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let config_hash = read_str(&mut input)?;
        let n_arrays = read_u32(&mut input)? as usize;
        let mut arrays = Vec::with_capacity(n_arrays);
        for _ in 0..n_arrays {
            let name = read_str(&mut input)?;
            let ndim = read_u32(&mut input)? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(read_u64(&mut input)? as usize);
            }
            let len: usize = shape.iter().product();
            let mut data = vec![0f32; len];
            let mut buf = [0u8; 4];
            for v in &mut data {
                input.read_exact(&mut buf)?;
                *v = f32::from_le_bytes(buf);
            }
            arrays.push(NamedArray { name, shape, data });
        }
        let normalizer: RunningNorm = serde_json::from_slice(&read_blob(&mut input)?)
            .map_err(|e| CheckpointError::Malformed(format!("normalizer: {e}")))?;
        let mut flag = [0u8; 1];
        input.read_exact(&mut flag)?;
        let resume = if flag[0] == 1 {
            Some(
                serde_json::from_slice(&read_blob(&mut input)?)
                    .map_err(|e| CheckpointError::Malformed(format!("resume: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            version,
            config_hash,
            arrays,
            normalizer,
            resume,
        })
    }
}

fn write_str(out: &mut impl Write, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn write_blob(out: &mut impl Write, bytes: &[u8]) -> std::io::Result<()> {
    out.write_all(&(bytes.len() as u64).to_le_bytes())?;
    out.write_all(bytes)
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(input: &mut impl Read) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_str(input: &mut impl Read) -> Result<String, CheckpointError> {
    let len = read_u32(input)? as usize;
    if len > 1 << 20 {
        return Err(CheckpointError::Malformed("oversized string".into()));
    }
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| CheckpointError::Malformed("non-utf8 string".into()))
}

fn read_blob(input: &mut impl Read) -> Result<Vec<u8>, CheckpointError> {
    let len = read_u64(input)? as usize;
    if len > 1 << 30 {
        return Err(CheckpointError::Malformed("oversized blob".into()));
    }
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_everything() {
        let params = PolicyParams::new(7, 3, &[16, 8], (0.5f64).ln(), 42);
        let mut norm = RunningNorm::new(7);
        for i in 0..50 {
            norm.update(&vec![i as f64 * 0.1; 7]);
        }
        let resume = ResumeState {
            iteration: 12,
            total_steps: 34_567,
            last_mean_episode_reward: 1.25,
            workers: vec![],
        };
        let ckpt = Checkpoint::from_params(&params, &norm, "cafebabe", Some(resume));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(ckpt, loaded);

        let restored = loaded.to_params().unwrap();
        assert_eq!(restored, params);
        assert_eq!(loaded.normalizer, norm);
        assert_eq!(loaded.resume.unwrap().total_steps, 34_567);
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTACKPTxxxxxxxxxxx").unwrap();
        assert!(matches!(
            Checkpoint::load(&path),
            Err(CheckpointError::BadMagic)
        ));

        let params = PolicyParams::new(3, 2, &[4], 0.0, 0);
        let norm = RunningNorm::new(3);
        let ckpt = Checkpoint::from_params(&params, &norm, "x", None);
        let good = dir.path().join("good.bin");
        ckpt.save(&good).unwrap();
        let mut bytes = std::fs::read(&good).unwrap();
        bytes[8] = 99; // bump the version field
        std::fs::write(&good, &bytes).unwrap();
        assert!(matches!(
            Checkpoint::load(&good),
            Err(CheckpointError::Version { found: 99, .. })
        ));
    }

    #[test]
    fn array_names_and_shapes_are_stable() {
        let params = PolicyParams::new(34, 5, &[128, 64], 0.0, 0);
        let ckpt = Checkpoint::from_params(&params, &RunningNorm::new(34), "h", None);
        let names: Vec<&str> = ckpt.arrays.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "actor.0.w",
                "actor.0.b",
                "actor.1.w",
                "actor.1.b",
                "actor.2.w",
                "actor.2.b",
                "critic.0.w",
                "critic.0.b",
                "critic.1.w",
                "critic.1.b",
                "critic.2.w",
                "critic.2.b",
                "log_std",
                "adam.m",
                "adam.v",
                "adam.t",
            ]
        );
        assert_eq!(ckpt.arrays[0].shape, vec![128, 34]);
        assert_eq!(ckpt.arrays[4].shape, vec![5, 64]);
    }
}
