//! Agent-based SIR dynamics on a [`CommunityGraph`].
//!
//! Every step reads a frozen snapshot of the previous state. Without the
//! blockchain a susceptible node is infected as soon as a contact with an
//! infected neighbour succeeds. With the blockchain a successful contact only
//! arms a transmission timer, drawn from the double-spend distribution in
//! block-time units, which then counts down `l` block-times per step.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::doublespend::{
    sample_transmission_time, BlockTime, ConfirmationDepth, MinerPower,
    TransmissionTimeDistribution,
};
use crate::error::{Error, Result};
use crate::network::{CommunityGraph, CommunitySpec};
use crate::rng::{substream, SimRng, Stream};
use crate::series::SirSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeState {
    /// `pending` is the remaining transmission time in block-time units.
    Susceptible {
        pending: BlockTime,
    },
    Infected,
    Recovered,
}

impl NodeState {
    pub const FRESH: NodeState = NodeState::Susceptible {
        pending: BlockTime::Infinite,
    };

    pub fn is_susceptible(self) -> bool {
        matches!(self, NodeState::Susceptible { .. })
    }

    pub fn is_infected(self) -> bool {
        self == NodeState::Infected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Block-time units per network step (`l`).
    pub time_scale: u64,
    pub depth: ConfirmationDepth,
    pub power: MinerPower,
    pub seeds_per_community: usize,
    pub horizon: usize,
    pub blockchain_enabled: bool,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn validate(&self, graph: &CommunityGraph) -> Result<()> {
        if self.time_scale == 0 {
            return Err(Error::domain("l", "time-scale ratio must be >= 1"));
        }
        for (m, size) in graph.community_sizes().into_iter().enumerate() {
            if self.seeds_per_community > size {
                return Err(Error::SeedsExceedCommunity {
                    community: m + 1,
                    seeds: self.seeds_per_community,
                    size,
                });
            }
        }
        Ok(())
    }
}

/// Node states at one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState {
    pub nodes: Vec<NodeState>,
}

impl SimState {
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for s in &self.nodes {
            match s {
                NodeState::Susceptible { .. } => c.0 += 1,
                NodeState::Infected => c.1 += 1,
                NodeState::Recovered => c.2 += 1,
            }
        }
        c
    }

    pub fn infected_count(&self) -> usize {
        self.nodes.iter().filter(|s| s.is_infected()).count()
    }

    pub fn armed_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|s| {
                matches!(
                    s,
                    NodeState::Susceptible {
                        pending: BlockTime::Finite(_)
                    }
                )
            })
            .count()
    }

    /// No infected nodes and no armed timers: nothing can change any more.
    pub fn is_absorbed(&self) -> bool {
        self.nodes.iter().all(|s| match s {
            NodeState::Infected => false,
            NodeState::Susceptible { pending } => !pending.is_finite(),
            NodeState::Recovered => true,
        })
    }
}

/// Per-purpose random streams for one run.
pub struct SimRngs {
    pub contacts: SimRng,
    pub sampling: SimRng,
    pub recovery: SimRng,
}

impl SimRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            contacts: substream(seed, Stream::Contacts),
            sampling: substream(seed, Stream::Sampling),
            recovery: substream(seed, Stream::Recovery),
        }
    }
}

/// Chooses `seeds_per_community` nodes uniformly without replacement in
/// every community as the initial infected set.
pub fn initialize<R: Rng + ?Sized>(
    rng: &mut R,
    graph: &CommunityGraph,
    cfg: &SimConfig,
) -> Result<SimState> {
    cfg.validate(graph)?;
    let mut nodes = vec![NodeState::FRESH; graph.node_count()];
    for m in 0..graph.community_count() {
        let members = graph.members(m);
        for pick in index::sample(rng, members.len(), cfg.seeds_per_community) {
            nodes[members[pick]] = NodeState::Infected;
        }
    }
    Ok(SimState { nodes })
}

/// Infected neighbours of `i` that belong to community `m`.
pub fn infected_neighbors(
    state: &SimState,
    graph: &CommunityGraph,
    i: usize,
    m: usize,
) -> Vec<usize> {
    graph
        .neighbors(i)
        .iter()
        .copied()
        .filter(|&j| state.nodes[j].is_infected() && graph.label(j) == m)
        .collect()
}

/// Infection probability of a susceptible node without the blockchain:
/// `1 - Π_m (1 - beta_m)^{|infected neighbours in m|}`.
pub fn baseline_infection_probability(
    state: &SimState,
    graph: &CommunityGraph,
    rates: &CommunitySpec,
    i: usize,
) -> f64 {
    let escape: f64 = (0..graph.community_count())
        .map(|m| {
            let n = infected_neighbors(state, graph, i, m).len();
            (1.0 - rates.contact_rate(m)).powi(n as i32)
        })
        .product();
    1.0 - escape
}

fn recover_into(
    prev: &SimState,
    next: &mut SimState,
    graph: &CommunityGraph,
    rates: &CommunitySpec,
    rng: &mut SimRng,
) {
    for (i, s) in prev.nodes.iter().enumerate() {
        if s.is_infected() && rng.random::<f64>() < rates.recovery_rate(graph.label(i)) {
            next.nodes[i] = NodeState::Recovered;
        }
    }
}

/// One synchronous step without the blockchain.
///
/// Each infected neighbour `j` of a susceptible node gets an independent
/// contact draw with probability `beta_{c_j}`; any success infects. This
/// realises the product form of the transition probability with one draw
/// per neighbour.
pub fn step_baseline(
    state: &SimState,
    graph: &CommunityGraph,
    rates: &CommunitySpec,
    rngs: &mut SimRngs,
) -> SimState {
    let mut next = state.clone();
    for (i, s) in state.nodes.iter().enumerate() {
        if !s.is_susceptible() {
            continue;
        }
        let mut infected = false;
        for &j in graph.neighbors(i) {
            if state.nodes[j].is_infected()
                && rngs.contacts.random::<f64>() < rates.contact_rate(graph.label(j))
            {
                infected = true;
            }
        }
        if infected {
            next.nodes[i] = NodeState::Infected;
        }
    }
    recover_into(state, &mut next, graph, rates, &mut rngs.recovery);
    next
}

/// One synchronous step with the blockchain transmission delay.
///
/// Unarmed susceptible nodes draw contacts with every infected neighbour;
/// each successful contact samples a transmission time and the timer keeps
/// the minimum. Armed nodes take no new contacts: a timer at or below
/// `time_scale` fires this step, otherwise it is decremented by
/// `time_scale`.
pub fn step_blockchain(
    state: &SimState,
    graph: &CommunityGraph,
    rates: &CommunitySpec,
    time_scale: u64,
    ttd: &TransmissionTimeDistribution,
    rngs: &mut SimRngs,
) -> Result<SimState> {
    let mut next = state.clone();
    for (i, s) in state.nodes.iter().enumerate() {
        match *s {
            NodeState::Susceptible {
                pending: BlockTime::Infinite,
            } => {
                let mut pending = BlockTime::Infinite;
                for &j in graph.neighbors(i) {
                    if state.nodes[j].is_infected()
                        && rngs.contacts.random::<f64>() < rates.contact_rate(graph.label(j))
                    {
                        pending = pending.min(sample_transmission_time(&mut rngs.sampling, ttd)?);
                    }
                }
                next.nodes[i] = NodeState::Susceptible { pending };
            }
            NodeState::Susceptible {
                pending: BlockTime::Finite(v),
            } => {
                next.nodes[i] = if v <= time_scale {
                    NodeState::Infected
                } else {
                    NodeState::Susceptible {
                        pending: BlockTime::Finite(v - time_scale),
                    }
                };
            }
            NodeState::Infected | NodeState::Recovered => {}
        }
    }
    recover_into(state, &mut next, graph, rates, &mut rngs.recovery);
    Ok(next)
}

/// Aggregate and per-community counts at every recorded step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub aggregate: SirSeries,
    pub communities: Vec<SirSeries>,
}

impl Trajectory {
    fn new(community_count: usize) -> Self {
        Self {
            aggregate: SirSeries::default(),
            communities: vec![SirSeries::default(); community_count],
        }
    }

    fn record(&mut self, state: &SimState, graph: &CommunityGraph) {
        let mut per = vec![[0usize; 3]; graph.community_count()];
        for (i, s) in state.nodes.iter().enumerate() {
            let slot = match s {
                NodeState::Susceptible { .. } => 0,
                NodeState::Infected => 1,
                NodeState::Recovered => 2,
            };
            per[graph.label(i)][slot] += 1;
        }
        let mut total = [0usize; 3];
        for (series, c) in self.communities.iter_mut().zip(&per) {
            series.push(c[0] as f64, c[1] as f64, c[2] as f64);
            for k in 0..3 {
                total[k] += c[k];
            }
        }
        self.aggregate
            .push(total[0] as f64, total[1] as f64, total[2] as f64);
    }

    /// Number of recorded steps, including `t = 0`.
    pub fn len(&self) -> usize {
        self.aggregate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregate.is_empty()
    }

    pub fn final_step(&self) -> usize {
        self.len().saturating_sub(1)
    }
}

/// Runs one replicate on a fixed graph: seeding, then steps until the
/// horizon or until the state is absorbed.
pub fn run(
    graph: &CommunityGraph,
    rates: &CommunitySpec,
    cfg: &SimConfig,
    ttd: Option<&TransmissionTimeDistribution>,
) -> Result<Trajectory> {
    if rates.community_count() != graph.community_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.community_count(),
            found: rates.community_count(),
        });
    }
    let ttd = match (cfg.blockchain_enabled, ttd) {
        (true, Some(t)) => Some(t),
        (false, None) => None,
        (true, None) => {
            return Err(Error::domain(
                "ttd",
                "blockchain runs need a transmission-time distribution",
            ))
        }
        (false, Some(_)) => {
            return Err(Error::domain(
                "ttd",
                "baseline runs take no transmission-time distribution",
            ))
        }
    };
    let mut seeding = substream(cfg.rng_seed, Stream::Seeding);
    let mut state = initialize(&mut seeding, graph, cfg)?;
    let mut rngs = SimRngs::new(cfg.rng_seed);
    let mut traj = Trajectory::new(graph.community_count());
    traj.record(&state, graph);
    for _ in 0..cfg.horizon {
        if state.is_absorbed() {
            break;
        }
        state = match ttd {
            Some(ttd) => step_blockchain(&state, graph, rates, cfg.time_scale, ttd, &mut rngs)?,
            None => step_baseline(&state, graph, rates, &mut rngs),
        };
        traj.record(&state, graph);
    }
    Ok(traj)
}
