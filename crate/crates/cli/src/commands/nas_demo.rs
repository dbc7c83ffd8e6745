use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use textkernel::nas::{
    oracles, random_search, search_space_size, Architecture, ModelMetrics, RewardParams,
    SearchConfig, STAGES,
};

use super::{emit, to_json, write_file};
use crate::failure::CliResult;

/// Random architecture search against a synthetic metrics oracle.
#[derive(Debug, Args)]
pub struct NasDemo {
    #[arg(long, default_value_t = 100)]
    budget: usize,
    /// Target frames per second of the speed term.
    #[arg(long, default_value_t = 60.0)]
    target_fps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics oracle: `saturating` or `constant`.
    #[arg(long, default_value = "saturating")]
    oracle: String,
    /// Blocks per stage, `L1,L2,L3,L4`.
    #[arg(long, default_value = "9,9,9,9", value_parser = parse_partition)]
    partition: [usize; STAGES],
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Exponent of the speed term.
    #[arg(long, default_value_t = 0.1)]
    w: f64,
    /// Also write the full search trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_partition(s: &str) -> Result<[usize; STAGES], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{v}` is not a block count"))
        })
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<usize>| format!("expected {STAGES} stage counts, got {}", v.len()))
}

#[derive(Serialize)]
struct Summary<'a> {
    oracle: &'a str,
    budget: usize,
    seed: u64,
    blocks: usize,
    search_space: String,
    best_index: usize,
    best_reward: f64,
    metrics: ModelMetrics,
    architecture: &'a Architecture,
}

impl NasDemo {
    pub fn run(self) -> CliResult<()> {
        let oracle = oracles().get(&self.oracle)?;
        let params = RewardParams::new(self.alpha, self.target_fps, self.w)?;
        let cfg = SearchConfig {
            budget: self.budget,
            seed: self.seed,
            partition: self.partition,
        };
        let outcome = random_search(oracle.as_ref(), &params, &cfg)?;
        if let Some(path) = &self.trace {
            write_file(path, to_json(&outcome.trace).as_bytes())?;
        }
        let blocks = self.partition.iter().sum::<usize>();
        let summary = Summary {
            oracle: oracle.name(),
            budget: self.budget,
            seed: self.seed,
            blocks,
            search_space: search_space_size(blocks as u32).to_string(),
            best_index: outcome.best_index,
            best_reward: outcome.best_reward,
            metrics: outcome.trace[outcome.best_index].metrics,
            architecture: &outcome.best,
        };
        emit(self.out.as_deref(), &to_json(&summary))
    }
}
