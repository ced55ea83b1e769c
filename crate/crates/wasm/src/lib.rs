//! Browser bindings for three interactive views: the transmission-time
//! curve, a classical vs. delayed mean-field comparison, and per-community
//! infected counts from one network simulation.
//!
//! Every binding returns a flat `Float64Array`; the layouts are documented
//! per function.

use misinfo_core::doublespend::{
    ConfirmationDepth, MinerPower, TransmissionTimeDistribution, DEFAULT_TOL,
};
use misinfo_core::meanfield::{
    blockchain_sir_run, classical_sir_run, DelayModel, MeanFieldParams, PmfConvention,
    TransmissionKernel, WindowConvention,
};
use misinfo_core::scenario::ScenarioConfig;
use wasm_bindgen::prelude::*;

type Out = Result<Vec<f64>, String>;

fn chain(k: u32, p: f64) -> Result<(ConfirmationDepth, MinerPower), String> {
    let depth = ConfirmationDepth::new(k).map_err(|e| e.to_string())?;
    let power = MinerPower::from_share(p, 1.0).map_err(|e| e.to_string())?;
    Ok((depth, power))
}

/// `[success, cdf(0), .., cdf(s_max)]` with `cdf` conditional on success.
pub fn transmission_curve_impl(k: u32, p: f64, s_max: usize) -> Out {
    let (depth, power) = chain(k, p)?;
    let ttd = TransmissionTimeDistribution::with_grid(depth, power, DEFAULT_TOL, s_max)
        .map_err(|e| e.to_string())?;
    let succ = ttd.success_probability();
    let mut out = Vec::with_capacity(s_max + 2);
    out.push(succ);
    out.extend(ttd.cdf_grid().iter().map(|c| c / succ));
    Ok(out)
}

/// `I(t)` of the classical model for `t = 0..=horizon`, followed by `I(t)` of
/// the delayed model over the same range.
#[allow(clippy::too_many_arguments)]
pub fn meanfield_compare_impl(
    beta: f64,
    alpha: f64,
    s0: f64,
    i0: f64,
    k: u32,
    p: f64,
    l: u32,
    horizon: usize,
) -> Out {
    let params = MeanFieldParams {
        beta,
        alpha,
        s0,
        i0,
        r0: 0.0,
    };
    let (depth, power) = chain(k, p)?;
    let ttd =
        TransmissionTimeDistribution::new(depth, power, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let delay = DelayModel {
        kernel: TransmissionKernel::from_distribution(&ttd, PmfConvention::Literal),
        time_scale: u64::from(l),
        windows: WindowConvention::Inclusive,
    };
    let classical = classical_sir_run(&params, horizon).map_err(|e| e.to_string())?;
    let delayed = blockchain_sir_run(&params, &delay, horizon).map_err(|e| e.to_string())?;
    Ok(classical.i.into_iter().chain(delayed.i).collect())
}

/// One replicate of the three-community scenario with dishonest share `p`.
/// Layout: `[M, T, I_1(0..T), .., I_M(0..T)]` as fractions of each
/// community, where `T` is the number of recorded steps.
pub fn community_infections_impl(seed: u32, p: f64, blockchain: bool, horizon: usize) -> Out {
    let mut cfg = ScenarioConfig::three_community();
    cfg.blockchain.p = Some(p);
    cfg.simulation.rng_seed = u64::from(seed);
    cfg.simulation.horizon = horizon;
    cfg.simulation.replicates = 1;
    let scenario = cfg.resolve().map_err(|e| e.to_string())?;
    let graph = scenario.graph(0).map_err(|e| e.to_string())?;
    let ttd = if blockchain {
        Some(scenario.transmission_time().map_err(|e| e.to_string())?)
    } else {
        None
    };
    let traj = scenario
        .run(0, &graph, ttd.as_ref())
        .map_err(|e| e.to_string())?;
    let sizes = scenario.spec.sizes();
    let mut out = vec![sizes.len() as f64, traj.len() as f64];
    for (c, &n) in traj.communities.iter().zip(sizes) {
        out.extend(c.i.iter().map(|i| i / n as f64));
    }
    Ok(out)
}

fn js(r: Out) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = transmissionCurve)]
pub fn transmission_curve(k: u32, p: f64, s_max: usize) -> Result<Vec<f64>, JsError> {
    js(transmission_curve_impl(k, p, s_max))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = meanfieldCompare)]
pub fn meanfield_compare(
    beta: f64,
    alpha: f64,
    s0: f64,
    i0: f64,
    k: u32,
    p: f64,
    l: u32,
    horizon: usize,
) -> Result<Vec<f64>, JsError> {
    js(meanfield_compare_impl(
        beta, alpha, s0, i0, k, p, l, horizon,
    ))
}

#[wasm_bindgen(js_name = communityInfections)]
pub fn community_infections(
    seed: u32,
    p: f64,
    blockchain: bool,
    horizon: usize,
) -> Result<Vec<f64>, JsError> {
    js(community_infections_impl(seed, p, blockchain, horizon))
}
