use misinfo_core::abm::{
    baseline_infection_probability, step_baseline, step_blockchain, NodeState, SimRngs, SimState,
};
use misinfo_core::doublespend::{BlockTime, TransmissionTimeDistribution};
use misinfo_core::network::{CommunityGraph, CommunitySpec};

/// Two communities; nodes 0, 1 and 5 start infected.
fn fixture() -> (CommunityGraph, CommunitySpec, SimState) {
    let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let edges = [
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 4),
        (2, 5),
        (3, 6),
        (4, 5),
        (5, 7),
        (6, 7),
        (7, 8),
        (8, 9),
        (1, 9),
        (3, 5),
    ];
    let g = CommunityGraph::from_edges(labels, 2, edges).unwrap();
    let spec = CommunitySpec::new(vec![5, 5], vec![0.4, 0.7], vec![0.3, 0.2]).unwrap();
    let mut nodes = vec![NodeState::FRESH; 10];
    for i in [0, 1, 5] {
        nodes[i] = NodeState::Infected;
    }
    (g, spec, SimState { nodes })
}

fn infected(s: &SimState) -> Vec<usize> {
    (0..s.nodes.len())
        .filter(|&i| s.nodes[i].is_infected())
        .collect()
}

#[test]
fn unit_delay_lags_baseline_by_one_step() {
    let (g, spec, start) = fixture();
    let ttd = TransmissionTimeDistribution::point_mass(1, 1.0).unwrap();
    for seed in 0..50 {
        let base = step_baseline(&start, &g, &spec, &mut SimRngs::new(seed));
        let mut rngs = SimRngs::new(seed);
        let one = step_blockchain(&start, &g, &spec, 15, &ttd, &mut rngs).unwrap();
        let armed: Vec<usize> = (0..10)
            .filter(|&i| {
                one.nodes[i]
                    == NodeState::Susceptible {
                        pending: BlockTime::Finite(1),
                    }
            })
            .collect();
        let newly: Vec<usize> = infected(&base)
            .into_iter()
            .filter(|&i| start.nodes[i].is_susceptible())
            .collect();
        assert_eq!(armed, newly, "seed {seed}");
        // Same recovery draws on the same initial infected set.
        let rec = |s: &SimState| -> Vec<usize> {
            (0..10)
                .filter(|&i| s.nodes[i] == NodeState::Recovered)
                .collect()
        };
        assert_eq!(rec(&one), rec(&base));

        let two = step_blockchain(&one, &g, &spec, 15, &ttd, &mut rngs).unwrap();
        for i in armed {
            assert_eq!(two.nodes[i], NodeState::Infected);
        }
    }
}

/// Exact one-step infection probability by enumerating every contact
/// outcome with the infected neighbours.
fn enumerated_probability(g: &CommunityGraph, spec: &CommunitySpec, s: &SimState, i: usize) -> f64 {
    let sources: Vec<f64> = g
        .neighbors(i)
        .iter()
        .filter(|&&j| s.nodes[j].is_infected())
        .map(|&j| spec.contact_rate(g.label(j)))
        .collect();
    let mut p_infect = 0.0;
    for mask in 0..(1u32 << sources.len()) {
        let mut p = 1.0;
        for (b, beta) in sources.iter().enumerate() {
            p *= if mask >> b & 1 == 1 {
                *beta
            } else {
                1.0 - beta
            };
        }
        if mask != 0 {
            p_infect += p;
        }
    }
    p_infect
}

#[test]
fn one_step_transition_probabilities_match_enumeration() {
    // Five nodes, two communities, infected hub 0 and node 4.
    let g = CommunityGraph::from_edges(
        vec![0, 0, 1, 1, 1],
        2,
        [(0, 1), (0, 2), (0, 3), (4, 1), (4, 3), (2, 3)],
    )
    .unwrap();
    let spec = CommunitySpec::new(vec![2, 3], vec![0.3, 0.6], vec![0.0, 0.0]).unwrap();
    let mut nodes = vec![NodeState::FRESH; 5];
    nodes[0] = NodeState::Infected;
    nodes[4] = NodeState::Infected;
    let start = SimState { nodes };
    let ttd = TransmissionTimeDistribution::point_mass(3, 1.0).unwrap();

    let trials = 40_000;
    let mut base_hits = [0u32; 5];
    let mut chain_hits = [0u32; 5];
    for seed in 0..trials {
        let b = step_baseline(&start, &g, &spec, &mut SimRngs::new(seed));
        let c = step_blockchain(
            &start,
            &g,
            &spec,
            15,
            &ttd,
            &mut SimRngs::new(seed + trials),
        )
        .unwrap();
        for i in 1..4 {
            base_hits[i] += u32::from(b.nodes[i].is_infected());
            chain_hits[i] += u32::from(matches!(
                c.nodes[i],
                NodeState::Susceptible {
                    pending: BlockTime::Finite(_)
                }
            ));
        }
    }
    for i in 1..4 {
        let exact = enumerated_probability(&g, &spec, &start, i);
        assert!((baseline_infection_probability(&start, &g, &spec, i) - exact).abs() < 1e-15);
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        for hits in [base_hits[i], chain_hits[i]] {
            let freq = f64::from(hits) / trials as f64;
            assert!(
                (freq - exact).abs() < 5.0 * sd,
                "node {i}: {freq} vs {exact}"
            );
        }
    }
}

#[test]
fn pending_timer_fires_after_ceil_v_over_l_steps() {
    let g = CommunityGraph::from_edges(vec![0, 0], 1, [(0, 1)]).unwrap();
    let spec = CommunitySpec::new(vec![2], vec![1.0], vec![0.0]).unwrap();
    for (v, l) in [
        (1u64, 15u64),
        (15, 15),
        (16, 15),
        (45, 15),
        (46, 15),
        (7, 1),
    ] {
        let ttd = TransmissionTimeDistribution::point_mass(v as usize, 1.0).unwrap();
        let mut state = SimState {
            nodes: vec![NodeState::Infected, NodeState::FRESH],
        };
        let mut rngs = SimRngs::new(1);
        // Armed at step 1.
        state = step_blockchain(&state, &g, &spec, l, &ttd, &mut rngs).unwrap();
        assert_eq!(
            state.nodes[1],
            NodeState::Susceptible {
                pending: BlockTime::Finite(v)
            }
        );
        let mut steps = 0;
        while !state.nodes[1].is_infected() {
            state = step_blockchain(&state, &g, &spec, l, &ttd, &mut rngs).unwrap();
            steps += 1;
        }
        assert_eq!(steps, v.div_ceil(l), "v = {v}, l = {l}");
    }
}
