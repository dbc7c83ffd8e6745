//! Architecture search space, the accuracy/speed reward and a seeded random
//! search over pluggable metrics oracles.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;

/// Operation a learnable block can take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateOp {
    Conv3x3,
    Conv1x3,
    Conv3x1,
    Identity,
}

impl CandidateOp {
    pub const ALL: [CandidateOp; 4] = [Self::Conv3x3, Self::Conv1x3, Self::Conv3x1, Self::Identity];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Conv3x3 => "conv3x3",
            Self::Conv1x3 => "conv1x3",
            Self::Conv3x1 => "conv3x1",
            Self::Identity => "identity",
        }
    }

    pub fn is_asymmetric(self) -> bool {
        matches!(self, Self::Conv1x3 | Self::Conv3x1)
    }
}

impl fmt::Display for CandidateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CandidateOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown op `{s}`")))
    }
}

pub const STAGES: usize = 4;
pub const DEFAULT_CHANNELS: [u32; STAGES] = [64, 128, 256, 512];
/// Blocks per stage used when none is given; 36 blocks in total.
pub const DEFAULT_PARTITION: [usize; STAGES] = [9, 9, 9, 9];

/// Four stages of learnable blocks with their output widths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ArchitectureRepr", into = "ArchitectureRepr")]
pub struct Architecture {
    stages: [Vec<CandidateOp>; STAGES],
    channels: [u32; STAGES],
}

/// Wire form. Field order is the serialized key order.
#[derive(Serialize, Deserialize)]
struct ArchitectureRepr {
    partition: [usize; STAGES],
    channels: [u32; STAGES],
    stages: [Vec<CandidateOp>; STAGES],
}

impl TryFrom<ArchitectureRepr> for Architecture {
    type Error = Error;
    fn try_from(r: ArchitectureRepr) -> Result<Self> {
        for (i, (ops, &n)) in r.stages.iter().zip(&r.partition).enumerate() {
            if ops.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "stage {} lists {} ops but partition says {n}",
                    i + 1,
                    ops.len()
                )));
            }
        }
        Architecture::new(r.stages, r.channels)
    }
}

impl From<Architecture> for ArchitectureRepr {
    fn from(a: Architecture) -> Self {
        Self {
            partition: a.partition(),
            channels: a.channels,
            stages: a.stages,
        }
    }
}

impl Architecture {
    pub fn new(stages: [Vec<CandidateOp>; STAGES], channels: [u32; STAGES]) -> Result<Self> {
        if channels.contains(&0) {
            return Err(Error::InvalidArgument(
                "stage channels must be positive".into(),
            ));
        }
        Ok(Self { stages, channels })
    }

    /// Every block set to `op`.
    pub fn uniform(partition: [usize; STAGES], op: CandidateOp) -> Self {
        Self {
            stages: partition.map(|n| vec![op; n]),
            channels: DEFAULT_CHANNELS,
        }
    }

    pub fn stages(&self) -> &[Vec<CandidateOp>; STAGES] {
        &self.stages
    }

    pub fn channels(&self) -> [u32; STAGES] {
        self.channels
    }

    /// Blocks per stage.
    pub fn partition(&self) -> [usize; STAGES] {
        [0, 1, 2, 3].map(|i| self.stages[i].len())
    }

    /// Total number of learnable blocks.
    pub fn blocks(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    pub fn ops(&self) -> impl Iterator<Item = CandidateOp> + '_ {
        self.stages.iter().flatten().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("architecture serializes")
    }
}

/// Number of distinct architectures with `blocks` learnable blocks: 4^blocks.
pub fn search_space_size(blocks: u32) -> BigUint {
    BigUint::from(4u32).pow(blocks)
}

/// Layers that are not skipped.
pub fn effective_depth(arch: &Architecture) -> usize {
    arch.ops().filter(|&op| op != CandidateOp::Identity).count()
}

fn sample_with(rng: &mut impl Rng, partition: [usize; STAGES]) -> Architecture {
    let stages = partition.map(|n| {
        (0..n)
            .map(|_| CandidateOp::ALL[rng.gen_range(0..4)])
            .collect()
    });
    Architecture {
        stages,
        channels: DEFAULT_CHANNELS,
    }
}

fn check_partition(partition: [usize; STAGES]) -> Result<()> {
    if partition.iter().sum::<usize>() == 0 {
        return Err(Error::InvalidArgument(
            "partition must contain at least one block".into(),
        ));
    }
    Ok(())
}

/// Architecture with every op drawn uniformly and independently; the same
/// seed always yields the same architecture.
pub fn sample_architecture(seed: u64, partition: [usize; STAGES]) -> Result<Architecture> {
    check_partition(partition)?;
    Ok(sample_with(&mut ChaCha8Rng::seed_from_u64(seed), partition))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Weight of the text-region IoU.
    pub alpha: f64,
    /// Target speed in frames per second.
    pub target_fps: f64,
    /// Exponent trading accuracy against speed.
    pub w: f64,
}

impl RewardParams {
    pub fn new(alpha: f64, target_fps: f64, w: f64) -> Result<Self> {
        if !(target_fps > 0.0 && target_fps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "target FPS must be positive, got {target_fps}"
            )));
        }
        if !(w >= 0.0 && w.is_finite()) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid reward weights alpha={alpha}, w={w}"
            )));
        }
        Ok(Self {
            alpha,
            target_fps,
            w,
        })
    }

    pub fn with_target(target_fps: f64) -> Result<Self> {
        Self::new(0.5, target_fps, 0.1)
    }
}

/// Quality and speed of one candidate model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub iou_k: f64,
    pub iou_t: f64,
    pub fps: f64,
}

impl ModelMetrics {
    pub fn new(iou_k: f64, iou_t: f64, fps: f64) -> Result<Self> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(iou_k) || !unit(iou_t) {
            return Err(Error::InvalidArgument(format!(
                "IoU outside [0, 1]: ({iou_k}, {iou_t})"
            )));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "FPS must be positive, got {fps}"
            )));
        }
        Ok(Self { iou_k, iou_t, fps })
    }
}

/// `(iou_k + alpha·iou_t) × (fps / target)^w`.
pub fn reward(m: &ModelMetrics, p: &RewardParams) -> f64 {
    (m.iou_k + p.alpha * m.iou_t) * (m.fps / p.target_fps).powf(p.w)
}

/// Source of accuracy and speed measurements for an architecture.
pub trait MetricsOracle: Send + Sync {
    fn name(&self) -> &'static str;
    fn evaluate(&self, arch: &Architecture) -> std::result::Result<ModelMetrics, String>;
}

/// Same metrics for every architecture.
#[derive(Clone, Copy, Debug)]
pub struct ConstantOracle(pub ModelMetrics);

impl MetricsOracle for ConstantOracle {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn evaluate(&self, _: &Architecture) -> std::result::Result<ModelMetrics, String> {
        Ok(self.0)
    }
}

/// Synthetic stand-in for training: IoU saturates with depth and gains a
/// bonus per asymmetric convolution; latency grows linearly with depth.
/// Its numbers are illustrative only.
#[derive(Clone, Copy, Debug)]
pub struct SaturatingOracle {
    /// IoU of an all-identity network.
    pub base_iou: f64,
    /// IoU gained as depth goes to infinity.
    pub gain: f64,
    /// Depth at which `1 − 1/e` of the gain is reached.
    pub depth_scale: f64,
    pub asymmetric_bonus: f64,
    pub base_ms: f64,
    pub ms_per_block: f64,
}

impl Default for SaturatingOracle {
    fn default() -> Self {
        Self {
            base_iou: 0.45,
            gain: 0.4,
            depth_scale: 12.0,
            asymmetric_bonus: 0.002,
            base_ms: 6.0,
            ms_per_block: 0.25,
        }
    }
}

impl MetricsOracle for SaturatingOracle {
    fn name(&self) -> &'static str {
        "saturating"
    }

    fn evaluate(&self, arch: &Architecture) -> std::result::Result<ModelMetrics, String> {
        let depth = effective_depth(arch) as f64;
        let asym = arch.ops().filter(|op| op.is_asymmetric()).count() as f64;
        let iou = (self.base_iou
            + self.gain * (1.0 - (-depth / self.depth_scale).exp())
            + self.asymmetric_bonus * asym)
            .min(1.0);
        let fps = 1000.0 / (self.base_ms + self.ms_per_block * depth);
        // Text regions are rebuilt from kernels, so they score slightly higher.
        let iou_t = (iou + 0.05).min(1.0);
        ModelMetrics::new(iou, iou_t, fps).map_err(|e| e.to_string())
    }
}

/// Multiplies another oracle's FPS by a constant.
pub struct ScaledFpsOracle {
    pub inner: Arc<dyn MetricsOracle>,
    pub factor: f64,
}

impl MetricsOracle for ScaledFpsOracle {
    fn name(&self) -> &'static str {
        "scaled-fps"
    }

    fn evaluate(&self, arch: &Architecture) -> std::result::Result<ModelMetrics, String> {
        let m = self.inner.evaluate(arch)?;
        ModelMetrics::new(m.iou_k, m.iou_t, m.fps * self.factor).map_err(|e| e.to_string())
    }
}

/// Built-in oracles: `saturating` and `constant`.
pub fn oracles() -> Registry<dyn MetricsOracle> {
    let mut r: Registry<dyn MetricsOracle> = Registry::empty("oracle");
    r.register("saturating", Arc::new(SaturatingOracle::default()));
    r.register(
        "constant",
        Arc::new(ConstantOracle(ModelMetrics {
            iou_k: 0.8,
            iou_t: 0.8,
            fps: 100.0,
        })),
    );
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub budget: usize,
    pub seed: u64,
    pub partition: [usize; STAGES],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub architecture: Architecture,
    pub metrics: ModelMetrics,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_index: usize,
    pub best: Architecture,
    pub best_reward: f64,
    pub trace: Vec<TraceEntry>,
}

/// Samples `budget` architectures from one seeded stream, scores them
/// (concurrently) and returns the highest reward, earliest on ties. The trace
/// is in sampling order regardless of evaluation order.
pub fn random_search(
    oracle: &dyn MetricsOracle,
    params: &RewardParams,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    if cfg.budget == 0 {
        return Err(Error::InvalidArgument(
            "search budget must be at least 1".into(),
        ));
    }
    check_partition(cfg.partition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let candidates: Vec<Architecture> = (0..cfg.budget)
        .map(|_| sample_with(&mut rng, cfg.partition))
        .collect();

    let evaluated: Vec<std::result::Result<ModelMetrics, String>> =
        candidates.par_iter().map(|a| oracle.evaluate(a)).collect();

    let mut trace = Vec::with_capacity(cfg.budget);
    for (index, (architecture, metrics)) in candidates.into_iter().zip(evaluated).enumerate() {
        let metrics = metrics.map_err(|message| Error::Oracle {
            index,
            arch: architecture.to_json(),
            message,
        })?;
        let reward = reward(&metrics, params);
        trace.push(TraceEntry {
            architecture,
            metrics,
            reward,
        });
    }
    let best_index = trace.iter().enumerate().fold(0, |best, (i, e)| {
        if e.reward > trace[best].reward {
            i
        } else {
            best
        }
    });
    Ok(SearchOutcome {
        best_index,
        best: trace[best_index].architecture.clone(),
        best_reward: trace[best_index].reward,
        trace,
    })
}
