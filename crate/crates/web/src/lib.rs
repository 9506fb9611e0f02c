//! Browser bindings for the planner and executor. Every export takes and
//! returns JSON strings; the `*_json` functions hold the logic and run
//! natively as well.

use icomm_core::config::Config;
use icomm_core::executor::{
    consensus_report, initial_values, simulate, total_cost, verify_connectivity_over_time, SimOptions,
};
use icomm_core::gen::{generate, GenOptions};
use icomm_core::{report, LocationId, Network, PlanOptions, Planner, GOLDEN_CONFIG};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Animation frames per simulation.
const FRAMES: f64 = 900.0;

fn network(config: &str) -> Result<Network, String> {
    let config = Config::from_json(config).map_err(|e| e.to_string())?;
    Network::from_config(&config).map_err(|d| d.to_string())
}

fn xy(net: &Network, l: LocationId) -> [f64; 2] {
    let p = net.graph().position(l);
    [p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)]
}

fn geometry(net: &Network) -> Value {
    let locations: Vec<Value> =
        (0..net.graph().len()).map(LocationId::from_index).map(|l| json!({ "id": l.0, "xy": xy(net, l) })).collect();
    let edges: Vec<[usize; 2]> = net.graph().edges().iter().map(|e| [e.a.0, e.b.0]).collect();
    let teams: Vec<Value> = net
        .team_ids()
        .map(|m| {
            let t = net.team(m);
            json!({
                "members": t.members.iter().map(|r| r.0).collect::<Vec<_>>(),
                "comm_points": t.comm_points.iter().map(|l| l.0).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "locations": locations, "edges": edges, "teams": teams })
}

pub fn plan_json(config: &str, relax: bool) -> Result<String, String> {
    let net = network(config)?;
    let planner = Planner::new(&net, PlanOptions { relax_footnote1: relax }).map_err(|e| e.to_string())?;
    let plan = planner.plan().map_err(|e| e.to_string())?;
    let out = json!({
        "k_p": plan.k_p,
        "k_s": plan.k_s,
        "slot_count": plan.slots.slot_count,
        "slots_used": plan.slots_used(),
        "listing": report::plan_text(&plan, planner.wts()),
        "geometry": geometry(&net),
    });
    Ok(out.to_string())
}

/// `speeds` overrides the configured speeds when nonempty.
pub fn simulate_json(
    config: &str,
    cycles: usize,
    speeds: &[f64],
    consensus_seed: Option<u64>,
) -> Result<String, String> {
    let mut parsed = Config::from_json(config).map_err(|e| e.to_string())?;
    if !speeds.is_empty() {
        if speeds.len() != parsed.robots.len() {
            return Err(format!("expected {} speeds, got {}", parsed.robots.len(), speeds.len()));
        }
        for (r, &v) in parsed.robots.iter_mut().zip(speeds) {
            r.speed = v;
        }
    }
    let net = Network::from_config(&parsed).map_err(|d| d.to_string())?;
    let plan = Planner::new(&net, PlanOptions::default()).and_then(|p| p.plan()).map_err(|e| e.to_string())?;
    let mut options = SimOptions::cycles(cycles);
    if let Some(seed) = consensus_seed {
        options = options.with_consensus(initial_values(net.num_robots(), seed));
    }
    let trace = simulate(&plan, &net, &options).map_err(|e| e.to_string())?;
    let connectivity = verify_connectivity_over_time(&trace, &net);
    let consensus = consensus_seed.map(|_| consensus_report(&trace));
    let cost = total_cost(&trace);
    let frames = if trace.end_time > 0.0 {
        trace
            .sample_positions(&net, trace.end_time / FRAMES)
            .into_iter()
            .map(|(t, ps)| {
                let ps: Vec<[f64; 2]> =
                    ps.iter().map(|p| [p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)]).collect();
                json!({ "t": t, "p": ps })
            })
            .collect()
    } else {
        Vec::new()
    };
    let meetings: Vec<Value> = trace
        .meetings
        .iter()
        .map(|m| {
            json!({
                "team": m.team.0,
                "round": m.round,
                "location": m.location.0,
                "start": m.start,
                "members": m.members.iter().map(|r| r.0).collect::<Vec<_>>(),
                "waits": m.waits,
            })
        })
        .collect();
    let out = json!({
        "geometry": geometry(&net),
        "end_time": trace.end_time,
        "frames": frames,
        "meetings": meetings,
        "spreads": consensus.as_ref().map(|c| &c.spreads),
        "summary": report::summary_text(&trace, &connectivity, consensus.as_ref(), &cost),
        "connected": connectivity.is_clean(),
    });
    Ok(out.to_string())
}

pub fn generate_json(seed: u64, robots: usize, teams: usize, locations: usize) -> Result<String, String> {
    let mut options = GenOptions::new(robots, teams, locations);
    options.speed = (0.5, 1.5);
    generate(seed, &options).map(|c| c.to_json()).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn golden_config() -> String {
    GOLDEN_CONFIG.to_string()
}

#[wasm_bindgen]
pub fn generate_config(seed: u32, robots: usize, teams: usize, locations: usize) -> Result<String, JsValue> {
    generate_json(seed.into(), robots, teams, locations).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn plan(config: &str, relax: bool) -> Result<String, JsValue> {
    plan_json(config, relax).map_err(|e| JsValue::from_str(&e))
}

/// A negative `consensus_seed` turns consensus off.
#[wasm_bindgen]
pub fn run(config: &str, cycles: usize, speeds: Vec<f64>, consensus_seed: i32) -> Result<String, JsValue> {
    let seed = u64::try_from(consensus_seed).ok();
    simulate_json(config, cycles, &speeds, seed).map_err(|e| JsValue::from_str(&e))
}
