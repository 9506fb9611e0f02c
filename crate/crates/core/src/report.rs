//! Text, CSV and JSON renderings of plans and traces. Numbers are printed
//! with nine decimals so outputs diff cleanly.

use std::fmt::Write;

use crate::coordination::{AdmissibilityReport, MotionPlan};
use crate::executor::{ConnectivityReport, ConsensusReport, CostReport, ExecutionTrace};
use crate::ids::{RobotId, TeamId};
use crate::ts::Wts;

pub fn num(x: f64) -> String {
    format!("{x:.9}")
}

pub fn plan_json(plan: &MotionPlan) -> String {
    serde_json::to_string_pretty(plan).expect("plans serialize")
}

pub fn plan_text(plan: &MotionPlan, wts: &[Wts]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "plan k_p={} k_s={} period={} slots={} of {}",
        plan.k_p,
        plan.k_s,
        plan.period(),
        plan.slots_used(),
        plan.slots.slot_count
    );
    let slots: Vec<String> =
        plan.slots.slots.iter().enumerate().map(|(m, s)| format!("{}={s}", TeamId::from_index(m))).collect();
    let _ = writeln!(out, "slots {}", slots.join(" "));
    let seq: Vec<String> = plan.sequence.entries.iter().map(|e| format!("{}@{}", e.team, e.location)).collect();
    let _ = writeln!(out, "sequence {}", seq.join(" "));
    for (k0, round) in plan.rounds.iter().enumerate() {
        let k = k0 + 1;
        let tag = if k < plan.k_p { "prefix" } else { "suffix" };
        let _ = writeln!(out, "round {k} ({tag})");
        for (i, cols) in round.robots.iter().enumerate() {
            let cells: Vec<String> = cols
                .iter()
                .map(|c| {
                    let name = c.teams.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("+");
                    let name = if name.is_empty() { "X".to_string() } else { name };
                    let states: Vec<String> = c.states.iter().map(|s| s.to_string()).collect();
                    format!("{name}: {}", states.join(" "))
                })
                .collect();
            let _ = writeln!(out, "  {} | {}", RobotId::from_index(i), cells.join(" | "));
        }
    }
    if let Ok(costs) = plan.robot_costs(wts) {
        let _ = writeln!(out, "costs");
        for (i, (prefix, cycle)) in costs.iter().enumerate() {
            let _ = writeln!(out, "  {} prefix={} cycle={}", RobotId::from_index(i), num(*prefix), num(*cycle));
        }
        let total: f64 = costs.iter().map(|c| c.1).sum();
        let _ = writeln!(out, "  total cycle={}", num(total));
    }
    out
}

/// One row per plan step: `robot,round,column,slot,team,step,location`.
pub fn plan_csv(plan: &MotionPlan) -> String {
    let mut out = String::from("robot,round,column,slot,team,step,location\n");
    for (k0, round) in plan.rounds.iter().enumerate() {
        for (i, cols) in round.robots.iter().enumerate() {
            for (c, col) in cols.iter().enumerate() {
                let team = col.teams.iter().map(|t| t.0.to_string()).collect::<Vec<_>>().join("+");
                for (step, s) in col.states.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{},{},{team},{step},{}", i + 1, k0 + 1, c + 1, col.slot, s.0);
                }
            }
        }
    }
    out
}

pub fn admissibility_text(report: &AdmissibilityReport) -> String {
    if report.is_clean() {
        return "admissible: no violations\n".to_string();
    }
    let mut out = format!("admissible: {} violations\n", report.violations.len());
    for v in &report.violations {
        let _ = writeln!(out, "  {v}");
    }
    out
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn trace_csv(trace: &ExecutionTrace) -> String {
    let mut out = String::from("time,robot,event,location,team,value\n");
    for e in &trace.events {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(e.time),
            e.robot.0,
            e.kind.name(),
            e.location.0,
            opt(e.team.map(|t| t.0)),
            opt(e.value.map(num))
        );
    }
    out
}

pub fn trace_text(trace: &ExecutionTrace) -> String {
    let mut out = String::new();
    for e in &trace.events {
        let team = e.team.map(|t| format!(" {t}")).unwrap_or_default();
        let value = e.value.map(|v| format!(" v={}", num(v))).unwrap_or_default();
        let _ = writeln!(out, "{} {} {} {}{team}{value}", num(e.time), e.robot, e.kind.name(), e.location);
    }
    out
}

pub fn waits_csv(trace: &ExecutionTrace) -> String {
    let mut out = String::from("team,round,cycle,location,start,robot,arrival,wait\n");
    for m in &trace.meetings {
        for ((r, a), w) in m.members.iter().zip(&m.arrivals).zip(&m.waits) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                m.team.0,
                m.round,
                opt(m.cycle),
                m.location.0,
                num(m.start),
                r.0,
                num(*a),
                num(*w)
            );
        }
    }
    out
}

pub fn consensus_csv(trace: &ExecutionTrace) -> String {
    let n = trace.starts.len();
    let mut out = String::from("time");
    for i in 1..=n {
        let _ = write!(out, ",v{i}");
    }
    out.push_str(",spread\n");
    for s in &trace.consensus {
        out.push_str(&num(s.time));
        for v in &s.values {
            let _ = write!(out, ",{}", num(*v));
        }
        let _ = writeln!(out, ",{}", num(crate::executor::spread(&s.values)));
    }
    out
}

pub fn summary_text(
    trace: &ExecutionTrace,
    connectivity: &ConnectivityReport,
    consensus: Option<&ConsensusReport>,
    cost: &CostReport,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "simulated t={} rounds={} cycles={} meetings={}",
        num(trace.end_time),
        trace.completed_rounds,
        connectivity.complete_cycles,
        trace.meetings.len()
    );
    for t in &connectivity.teams {
        let max_gap = t.gaps.iter().copied().fold(0.0, f64::max);
        let per_cycle: Vec<String> = t.per_cycle.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(
            out,
            "  {} meetings={} per-cycle=[{}] max-gap={}",
            t.team,
            t.meetings,
            per_cycle.join(","),
            num(max_gap)
        );
    }
    if connectivity.is_clean() {
        let _ = writeln!(out, "connectivity: every team met in every complete cycle");
    } else {
        for (team, cycle) in &connectivity.failures {
            let _ = writeln!(out, "connectivity: FAILED {team} did not meet in cycle {}", cycle + 1);
        }
    }
    for (i, d) in cost.per_robot.iter().enumerate() {
        let _ = writeln!(out, "  {} odometer={}", RobotId::from_index(i), num(*d));
    }
    let _ = writeln!(out, "  total odometer={}", num(cost.total));
    if let Some(c) = consensus {
        if let Some(s) = c.final_spread() {
            let _ = writeln!(out, "consensus: final spread={}", num(s));
        }
    }
    out
}
