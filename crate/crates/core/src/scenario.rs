//! Scenario configuration shared by the command line and the tests.

use serde::{Deserialize, Serialize};

use crate::abm::{self, SimConfig, Trajectory};
use crate::doublespend::{
    ConfirmationDepth, MinerPower, TransmissionTimeDistribution, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::network::{generate_sbm, BlockProbabilityMatrix, CommunityGraph, CommunitySpec};
use crate::rng::{replicate_seed, substream, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub sizes: Vec<usize>,
    pub block_probabilities: Vec<Vec<f64>>,
    pub contact_rates: Vec<f64>,
    pub recovery_rates: Vec<f64>,
}

/// Miner rates, given either directly or as a dishonest share `p` of a total
/// rate `mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockchainConfig {
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Block-time units per network step.
    pub l: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl BlockchainConfig {
    pub fn power(&self) -> Result<MinerPower> {
        match (self.mu_d, self.mu_h, self.p) {
            (Some(d), Some(h), None) => MinerPower::new(d, h),
            (None, None, Some(p)) => MinerPower::from_share(p, self.mu.unwrap_or(1.0)),
            _ => Err(Error::domain(
                "blockchain",
                "give either mu_d and mu_h, or p (with optional mu)",
            )),
        }
    }

    pub fn depth(&self) -> Result<ConfirmationDepth> {
        ConfirmationDepth::new(self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub horizon: usize,
    #[serde(default = "default_seeds")]
    pub seeds_per_community: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub rng_seed: u64,
}

fn default_seeds() -> usize {
    3
}

fn default_replicates() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub network: NetworkConfig,
    pub blockchain: BlockchainConfig,
    pub simulation: SimulationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    /// Three communities of 100, 60 and 40 users; `k = 2`, `p = 0.3`,
    /// `l = 15`.
    pub fn three_community() -> Self {
        Self {
            network: NetworkConfig {
                sizes: vec![100, 60, 40],
                block_probabilities: vec![
                    vec![0.2, 0.015, 0.012],
                    vec![0.015, 0.2, 0.02],
                    vec![0.012, 0.02, 0.2],
                ],
                contact_rates: vec![0.02, 0.0425, 0.07],
                recovery_rates: vec![0.1, 0.022, 0.005],
            },
            blockchain: BlockchainConfig {
                k: 2,
                mu_d: None,
                mu_h: None,
                p: Some(0.3),
                mu: Some(1.0),
                l: 15,
                tol: DEFAULT_TOL,
            },
            simulation: SimulationConfig {
                horizon: 3000,
                seeds_per_community: 3,
                replicates: 100,
                rng_seed: 2024,
            },
            output_dir: None,
        }
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let spec = CommunitySpec::new(
            self.network.sizes.clone(),
            self.network.contact_rates.clone(),
            self.network.recovery_rates.clone(),
        )?;
        let b = BlockProbabilityMatrix::new(self.network.block_probabilities.clone())?;
        if b.dim() != spec.community_count() {
            return Err(Error::DimensionMismatch {
                expected: spec.community_count(),
                found: b.dim(),
            });
        }
        let power = self.blockchain.power()?;
        let depth = self.blockchain.depth()?;
        if self.blockchain.l == 0 {
            return Err(Error::domain("l", "time-scale ratio must be >= 1"));
        }
        if !(self.blockchain.tol > 0.0) {
            return Err(Error::domain("tol", "must be > 0"));
        }
        if self.simulation.replicates == 0 {
            return Err(Error::domain("replicates", "must be >= 1"));
        }
        if self.simulation.horizon == 0 {
            return Err(Error::domain("horizon", "must be >= 1"));
        }
        for (m, &size) in spec.sizes().iter().enumerate() {
            if self.simulation.seeds_per_community > size {
                return Err(Error::SeedsExceedCommunity {
                    community: m + 1,
                    seeds: self.simulation.seeds_per_community,
                    size,
                });
            }
        }
        Ok(Scenario {
            spec,
            b,
            power,
            depth,
            config: self.clone(),
        })
    }
}

/// A validated [`ScenarioConfig`].
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: CommunitySpec,
    pub b: BlockProbabilityMatrix,
    pub power: MinerPower,
    pub depth: ConfirmationDepth,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn transmission_time(&self) -> Result<TransmissionTimeDistribution> {
        TransmissionTimeDistribution::new(self.depth, self.power, self.config.blockchain.tol)
    }

    pub fn replicate_seed(&self, index: usize) -> u64 {
        replicate_seed(self.config.simulation.rng_seed, index as u64)
    }

    /// The replicate's own graph. Both modes of a replicate share it.
    pub fn graph(&self, index: usize) -> Result<CommunityGraph> {
        let mut rng = substream(self.replicate_seed(index), Stream::Graph);
        generate_sbm(&mut rng, &self.spec, &self.b)
    }

    pub fn sim_config(&self, index: usize, blockchain: bool) -> SimConfig {
        SimConfig {
            time_scale: self.config.blockchain.l,
            depth: self.depth,
            power: self.power,
            seeds_per_community: self.config.simulation.seeds_per_community,
            horizon: self.config.simulation.horizon,
            blockchain_enabled: blockchain,
            rng_seed: self.replicate_seed(index),
        }
    }

    /// Runs replicate `index` on `graph`; `ttd` selects the blockchain engine.
    pub fn run(
        &self,
        index: usize,
        graph: &CommunityGraph,
        ttd: Option<&TransmissionTimeDistribution>,
    ) -> Result<Trajectory> {
        let cfg = self.sim_config(index, ttd.is_some());
        abm::run(graph, &self.spec, &cfg, ttd)
    }
}
