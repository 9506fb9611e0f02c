mod common;

use common::golden;
use icomm_core::executor::{simulate, SimOptions};
use icomm_core::report::{plan_text, waits_csv};
use icomm_core::{LocationId, PlanOptions, Planner, RobotId, TeamId};

const WAITS: &str = include_str!("../golden/waits.csv");
const PLAN: &str = include_str!("../golden/plan.txt");

#[test]
fn plan_listing_is_stable() {
    let net = golden();
    let planner = Planner::new(&net, PlanOptions::default()).unwrap();
    let plan = planner.plan().unwrap();
    assert_eq!(plan_text(&plan, planner.wts()), PLAN);
}

#[test]
fn one_cycle_of_waits_is_stable() {
    let net = golden();
    let plan = Planner::new(&net, PlanOptions::default()).unwrap().plan().unwrap();
    let trace = simulate(&plan, &net, &SimOptions::cycles(1)).unwrap();
    assert_eq!(waits_csv(&trace), WAITS);
}

#[test]
fn team_four_waits_in_the_first_round() {
    let net = golden();
    let plan = Planner::new(&net, PlanOptions::default()).unwrap().plan().unwrap();
    let trace = simulate(&plan, &net, &SimOptions::cycles(1)).unwrap();
    let m = trace.meetings.iter().find(|m| m.team == TeamId(4) && m.round == 1).unwrap();
    assert_eq!(m.location, LocationId(13));
    assert_eq!(m.members, vec![RobotId(2), RobotId(4), RobotId(5)]);
    for (w, expected) in m.waits.iter().zip([0.0, 3.4, 0.8]) {
        assert!((w - expected).abs() < 1e-9, "{w} vs {expected}");
    }
    // robot 2 is the slowest to arrive at every meeting it joins
    for m in trace.meetings.iter().filter(|m| m.members.contains(&RobotId(2))) {
        let k = m.members.iter().position(|&r| r == RobotId(2)).unwrap();
        assert_eq!(m.waits[k], 0.0);
    }
}
