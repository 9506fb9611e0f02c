//! Acceptance suite. Prints one line per criterion and exits non-zero when a
//! criterion fails, unless it is listed in `KNOWN_RED` (set
//! `ACCEPTANCE_STRICT=1` to fail on those as well).

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force_prefix, golden, lasso_sweep};
use icomm_core::config::Config;
use icomm_core::coordination::{assign_slots, build_sequence, check_admissible, SlotAssignment, Violation};
use icomm_core::executor::{consensus_report, initial_values, simulate, verify_connectivity_over_time, SimOptions};
use icomm_core::gen::{generate, GenOptions};
use icomm_core::planner::TeamPlanner;
use icomm_core::report::waits_csv;
use icomm_core::ts::build_wts;
use icomm_core::{LocationId, Network, PlanOptions, Planner, RobotId, TeamId, GOLDEN_CONFIG};

/// Criteria expected to fail; see the decisions ledger.
const KNOWN_RED: &[usize] = &[1];

const GOLDEN_WAITS: &str = include_str!("../golden/waits.csv");

type Criterion = (usize, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn net_of(config: &Config) -> Network {
    Network::from_config(config).expect("generated configs validate")
}

fn slot_structure() -> Outcome {
    let net = golden();
    let planner = Planner::new(&net, PlanOptions::default()).unwrap();
    let plan = planner.plan().unwrap();
    let expected = [["T1", "T5", "X"], ["T1", "T2", "T4"], ["T3", "T2", "X"], ["T3", "X", "T4"], ["X", "T5", "T4"]];
    let layout_ok = plan.rounds.iter().all(|round| {
        (0..5).all(|i| {
            let row: Vec<String> = round
                .layout(RobotId::from_index(i))
                .into_iter()
                .map(|t| t.map_or_else(|| "X".to_string(), |t| t.to_string()))
                .collect();
            row == expected[i]
        })
    });
    let discarded = plan.slots.slot_count - plan.slots_used();
    let ell = plan.slots.slot_count;
    let pass = ell == 4 && discarded == 1 && plan.slots_used() == 3 && layout_ok;
    outcome(
        pass,
        format!(
            "l={ell} (expected 4), used={}, discarded={discarded}, layout {}",
            plan.slots_used(),
            match layout_ok {
                true => "matches",
                false => "differs",
            }
        ),
    )
}

fn prefix_suffix() -> Outcome {
    let net = golden();
    let planner = Planner::new(&net, PlanOptions::default()).unwrap();
    let plan = planner.plan().unwrap();
    let extra = plan.k_s + 3 * plan.period();
    let replay = planner.rounds().take(extra).enumerate().all(|(k0, round)| plan.round(k0 + 1) == &round.unwrap());
    outcome(
        plan.k_p == 1 && plan.k_s == 2 && replay,
        format!(
            "k_p={} k_s={}, {extra} streamed rounds {}",
            plan.k_p,
            plan.k_s,
            if replay { "match" } else { "differ" }
        ),
    )
}

fn connectivity_over_time() -> Outcome {
    let net = golden();
    let plan = Planner::new(&net, PlanOptions::default()).unwrap().plan().unwrap();
    let trace = simulate(&plan, &net, &SimOptions::cycles(10)).unwrap();
    let report = verify_connectivity_over_time(&trace, &net);
    let counts: Vec<usize> = report.teams.iter().map(|t| t.meetings).collect();
    let pass = report.complete_cycles == 10
        && report.is_clean()
        && report.teams.len() == 5
        && report.teams.iter().all(|t| t.meetings >= 10 && t.per_cycle.iter().all(|&c| c >= 1));
    outcome(pass, format!("cycles={} meetings per team {counts:?}", report.complete_cycles))
}

fn prefix_optimality() -> Outcome {
    let mut opts = GenOptions::new(4, 3, 6);
    opts.max_team_size = 3;
    opts.max_comm_points = Some(4);
    let mut worst: f64 = 0.0;
    let mut teams = 0;
    for seed in 0..50 {
        let net = net_of(&generate(seed, &opts).unwrap());
        let wts: Vec<_> = net.robot_ids().map(|i| build_wts(&net, i, false).unwrap()).collect();
        for m in net.team_ids() {
            let start: Vec<LocationId> = net.team(m).members.iter().map(|&i| net.robot(i).start).collect();
            let cost = TeamPlanner::new(&net, m, &wts).unwrap().plan_prefix(&start).unwrap().cost;
            worst = worst.max((cost - brute_force_prefix(&net, m, &start, 3)).abs());
            teams += 1;
        }
    }
    outcome(worst <= 1e-9, format!("50 instances, {teams} teams, max |A* - brute| = {worst:.3e}"))
}

fn admissibility() -> Outcome {
    let mut clean = 0;
    let mut dirty = Vec::new();
    for seed in 0..100u64 {
        let teams = 2 + (seed / 7) as usize % 7;
        let robots = (2 + seed as usize % 7).min(3 + (teams - 1) * 2);
        let net = net_of(&generate(seed, &GenOptions::new(robots, teams, 10)).unwrap());
        let planner = Planner::new(&net, PlanOptions::default()).unwrap();
        let plan = planner.plan().unwrap();
        if check_admissible(&plan, planner.wts()).is_clean() {
            clean += 1;
        } else {
            dirty.push(seed);
        }
    }

    // corrupted plans
    let net = golden();
    let planner = Planner::new(&net, PlanOptions::default()).unwrap();
    let plan = planner.plan().unwrap();
    let mut teleport = plan.clone();
    teleport.rounds[0].robots[0][0].states[1] = net.team(TeamId(3)).comm_points[0];
    let teleport_flagged =
        check_admissible(&teleport, planner.wts()).violations.iter().any(|v| matches!(v, Violation::Transition { .. }));
    let mut chain = plan.clone();
    let other = chain.rounds[1].robots[0][0].states[0];
    let elsewhere = *planner.wts()[0].states().iter().find(|&&q| q != other).unwrap();
    chain.rounds[1].robots[0][0].states.iter_mut().for_each(|s| *s = elsewhere);
    let chain_flagged =
        check_admissible(&chain, planner.wts()).violations.iter().any(|v| matches!(v, Violation::ChainBreak { .. }));
    let shared =
        Planner::with_slots(&net, PlanOptions::default(), SlotAssignment { slot_count: 1, slots: vec![1; 5] }).unwrap();
    let shared_flagged = check_admissible(&shared.plan().unwrap(), shared.wts())
        .violations
        .iter()
        .any(|v| matches!(v, Violation::SlotConflict { .. }));
    let controls = [teleport_flagged, chain_flagged, shared_flagged];
    outcome(
        clean == 100 && controls.iter().all(|&c| c),
        format!("{clean}/100 clean (dirty seeds {dirty:?}), controls flagged {controls:?}"),
    )
}

fn coloring_bound() -> Outcome {
    let mut worst_margin = i64::MAX;
    let mut improper = 0;
    for seed in 0..100u64 {
        let teams = 2 + seed as usize % 11;
        let robots = teams + 1 + (seed as usize / 11) % teams;
        let net = net_of(&generate(seed, &GenOptions::new(robots, teams, 12)).unwrap());
        let tg = net.team_graph();
        let slots = assign_slots(tg, &build_sequence(&net));
        if !slots.is_proper(tg) {
            improper += 1;
        }
        worst_margin = worst_margin.min((tg.max_degree() + 1) as i64 - slots.used_slots().len() as i64);
    }
    outcome(
        improper == 0 && worst_margin >= 0,
        format!("100 team graphs, improper={improper}, min (max degree + 1 - used) = {worst_margin}"),
    )
}

fn asynchronous_execution() -> Outcome {
    let net = golden();
    let plan = Planner::new(&net, PlanOptions::default()).unwrap().plan().unwrap();
    let speeds: Vec<f64> = net.robot_ids().map(|i| net.robot(i).speed).collect();
    let heterogeneous = speeds.windows(2).any(|w| w[0] != w[1]);
    let trace = simulate(&plan, &net, &SimOptions::cycles(10)).unwrap();
    let report = verify_connectivity_over_time(&trace, &net);
    let waits: Vec<f64> = trace.meetings.iter().flat_map(|m| m.waits.iter().copied()).collect();
    let fractional = waits.iter().any(|w| w.fract().abs() > 1e-6);
    let distinct = {
        let mut w: Vec<i64> = waits.iter().map(|w| (w * 1e6).round() as i64).collect();
        w.sort_unstable();
        w.dedup();
        w.len()
    };
    let zero = trace.meetings.iter().any(|m| m.waits.contains(&0.0));
    let one_cycle = simulate(&plan, &net, &SimOptions::cycles(1)).unwrap();
    let golden_file = waits_csv(&one_cycle) == GOLDEN_WAITS;
    let pass = heterogeneous
        && report.is_clean()
        && report.complete_cycles == 10
        && fractional
        && distinct > 2
        && zero
        && golden_file;
    outcome(
        pass,
        format!(
            "speeds {}, every cycle met: {}, {distinct} distinct waits, zero wait: {zero}, golden waits file: {}",
            if heterogeneous { "mixed" } else { "uniform" },
            report.is_clean(),
            if golden_file { "matches" } else { "differs" }
        ),
    )
}

fn consensus() -> Outcome {
    let mut cases: Vec<(String, Network)> = vec![("golden".to_string(), golden())];
    for seed in 0..20 {
        cases.push((format!("seed {seed}"), common::random(1000 + seed, 6, 4, 10)));
    }
    let mut slowest = 0;
    let mut missed = Vec::new();
    for (k, (name, net)) in cases.iter().enumerate() {
        let plan = Planner::new(net, PlanOptions::default()).unwrap().plan().unwrap();
        let values = initial_values(net.num_robots(), k as u64);
        let trace = simulate(&plan, net, &SimOptions::cycles(50).with_consensus(values)).unwrap();
        // sample 0 is the initial state, sample j follows meeting j - 1
        let first = consensus_report(&trace).spreads.iter().position(|&(_, s)| s < 1e-9);
        match first {
            Some(0) => {}
            Some(j) => slowest = slowest.max(trace.meetings[j - 1].cycle.map_or(0, |c| c + 1)),
            None => missed.push(name.clone()),
        }
    }
    outcome(missed.is_empty(), format!("21 instances, missed {missed:?}, slowest below 1e-9 in cycle {slowest} of 50"))
}

fn nba_correctness() -> Outcome {
    let and = lasso_sweep(true, 6);
    let or = lasso_sweep(false, 6);
    let bad = and.mismatches.len() + or.mismatches.len();
    outcome(bad == 0, format!("{} lasso words, {bad} disagreements", and.words + or.words))
}

fn main() -> ExitCode {
    let _ = Config::from_json(GOLDEN_CONFIG).expect("golden config parses");
    let criteria: [Criterion; 9] = [
        (1, "slot structure", Duration::from_secs(1), slot_structure),
        (2, "prefix-suffix", Duration::from_secs(1), prefix_suffix),
        (3, "connectivity over time", Duration::from_secs(5), connectivity_over_time),
        (4, "prefix optimality", Duration::from_secs(30), prefix_optimality),
        (5, "admissibility", Duration::from_secs(60), admissibility),
        (6, "coloring bound", Duration::from_secs(5), coloring_bound),
        (7, "asynchronous execution", Duration::from_secs(30), asynchronous_execution),
        (8, "consensus", Duration::from_secs(30), consensus),
        (9, "nba correctness", Duration::from_secs(5), nba_correctness),
    ];
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= budget;
        let verdict = match (pass, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {id} {name}: {verdict} [{:.3}s / {}s] {}",
            elapsed.as_secs_f64(),
            budget.as_secs(),
            result.detail
        );
        if !pass && (strict || !KNOWN_RED.contains(&id)) {
            failed.push(id);
        }
        if pass && KNOWN_RED.contains(&id) {
            println!("criterion {id} is listed as known red but passed");
            failed.push(id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
