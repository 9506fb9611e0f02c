//! Asynchronous execution of motion plans.
//!
//! Each robot walks its own plan at its own constant speed along geodesics
//! of the mobility graph. When it reaches the last state of a team leg it
//! waits there until every other member has reached the same point; the
//! meeting then fires (optionally averaging the members' consensus values)
//! and all members leave together. Everywhere else robots keep moving.
//!
//! The simulation is a discrete-event loop. Events at equal times are
//! processed by robot id, so runs are bit-for-bit reproducible.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coordination::MotionPlan;
use crate::ids::{LocationId, RobotId, TeamId};
use crate::network::Network;
use crate::EPS;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("deadlock at t={time}: meetings {pending:?} never complete")]
    Deadlock { time: f64, pending: Vec<(TeamId, usize)> },
    #[error("plan has {plan} robots but the network has {network}")]
    RobotCountMismatch { plan: usize, network: usize },
    #[error("expected {expected} initial consensus values, got {found}")]
    ConsensusArity { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Horizon {
    /// Prefix plus this many suffix cycles. Zero runs nothing.
    Cycles(usize),
    /// Everything that happens up to this time.
    Time(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub horizon: Horizon,
    /// Initial consensus values, one per robot; `None` disables consensus.
    pub consensus: Option<Vec<f64>>,
}

impl SimOptions {
    pub fn cycles(cycles: usize) -> Self {
        Self { horizon: Horizon::Cycles(cycles), consensus: None }
    }

    pub fn with_consensus(mut self, values: Vec<f64>) -> Self {
        self.consensus = Some(values);
        self
    }
}

/// Uniform values in `[0, 1)` drawn from a seeded generator.
pub fn initial_values(num_robots: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_robots).map(|_| rng.gen::<f64>()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EventKind {
    Arrival,
    MeetingStart,
    MeetingEnd,
    Departure,
    Finish,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::MeetingStart => "meeting-start",
            EventKind::MeetingEnd => "meeting-end",
            EventKind::Departure => "departure",
            EventKind::Finish => "finish",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub robot: RobotId,
    pub kind: EventKind,
    pub location: LocationId,
    pub team: Option<TeamId>,
    /// Consensus value after the event, when consensus is on.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeetingEvent {
    pub team: TeamId,
    pub round: usize,
    /// Suffix cycle of the round, `None` in the prefix.
    pub cycle: Option<usize>,
    pub location: LocationId,
    pub start: f64,
    pub members: Vec<RobotId>,
    pub arrivals: Vec<f64>,
    pub waits: Vec<f64>,
}

/// Straight run along a geodesic between two consecutive plan states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leg {
    pub robot: RobotId,
    pub from: LocationId,
    pub to: LocationId,
    pub path: Vec<LocationId>,
    pub depart: f64,
    pub arrive: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusSample {
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExecutionTrace {
    pub events: Vec<Event>,
    pub meetings: Vec<MeetingEvent>,
    pub legs: Vec<Leg>,
    pub starts: Vec<LocationId>,
    /// Initial values followed by the values after every meeting.
    pub consensus: Vec<ConsensusSample>,
    pub odometer: Vec<f64>,
    /// `distance_by_round[i][k - 1]`: distance robot `i + 1` covers in round `k`.
    pub distance_by_round: Vec<Vec<f64>>,
    /// Rounds every robot has fully executed.
    pub completed_rounds: usize,
    pub k_p: usize,
    pub period: usize,
    pub end_time: f64,
}

impl ExecutionTrace {
    /// Suffix cycles fully executed by every robot.
    pub fn complete_cycles(&self) -> usize {
        (self.completed_rounds + 1).saturating_sub(self.k_p) / self.period
    }

    pub fn meetings_of(&self, team: TeamId) -> impl Iterator<Item = &MeetingEvent> {
        self.meetings.iter().filter(move |m| m.team == team)
    }

    /// Robot position at time `t`, interpolated along the geodesic it is on.
    pub fn position_at(&self, net: &Network, robot: RobotId, t: f64) -> Vec<f64> {
        let mut at = self.starts[robot.index()];
        for leg in self.legs.iter().filter(|l| l.robot == robot) {
            if t < leg.depart {
                break;
            }
            if t >= leg.arrive {
                at = leg.to;
                continue;
            }
            let mut remaining = leg.length * (t - leg.depart) / (leg.arrive - leg.depart);
            for w in leg.path.windows(2) {
                let step = net.distance(w[0], w[1]);
                if remaining <= step {
                    let (a, b) = (net.graph().position(w[0]), net.graph().position(w[1]));
                    let s = if step > 0.0 { remaining / step } else { 0.0 };
                    return a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
                }
                remaining -= step;
            }
            at = leg.to;
        }
        net.graph().position(at).to_vec()
    }

    /// Positions of all robots every `dt` time units up to the end of the run.
    pub fn sample_positions(&self, net: &Network, dt: f64) -> Vec<(f64, Vec<Vec<f64>>)> {
        assert!(dt > 0.0, "sampling step must be positive");
        let steps = (self.end_time / dt).floor() as usize;
        (0..=steps)
            .map(|s| {
                let t = s as f64 * dt;
                let ps = (0..self.starts.len()).map(|i| self.position_at(net, RobotId::from_index(i), t)).collect();
                (t, ps)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cursor {
    round: usize,
    column: usize,
    index: usize,
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    time: f64,
    robot: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.robot.cmp(&self.robot))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Sim<'a> {
    plan: &'a MotionPlan,
    net: &'a Network,
    last_round: Option<usize>,
    max_time: f64,
    cursors: Vec<Option<Cursor>>,
    queue: BinaryHeap<Pending>,
    waiting: BTreeMap<(usize, usize), Vec<(RobotId, f64)>>,
    values: Option<Vec<f64>>,
    completed_by: Vec<usize>,
    moving: Vec<bool>,
    trace: ExecutionTrace,
}

impl Sim<'_> {
    fn state(&self, c: Cursor, robot: usize) -> LocationId {
        self.plan.round(c.round).robots[robot][c.column].states[c.index]
    }

    /// Team whose meeting is due at the cursor, if any.
    fn meeting(&self, c: Cursor, robot: usize) -> Option<TeamId> {
        let col = &self.plan.round(c.round).robots[robot][c.column];
        (col.meeting == Some(c.index)).then(|| *col.teams.last().expect("meeting column has a team"))
    }

    fn next_cursor(&self, c: Cursor, robot: usize) -> Option<Cursor> {
        let round = self.plan.round(c.round);
        let col = &round.robots[robot][c.column];
        if c.index + 1 < col.states.len() {
            return Some(Cursor { index: c.index + 1, ..c });
        }
        if c.column + 1 < round.robots[robot].len() {
            return Some(Cursor { column: c.column + 1, index: 0, ..c });
        }
        let next = c.round + 1;
        self.last_round.is_none_or(|r| next <= r).then_some(Cursor { round: next, column: 0, index: 0 })
    }

    fn log(&mut self, time: f64, robot: RobotId, kind: EventKind, location: LocationId, team: Option<TeamId>) {
        let value = self.values.as_ref().map(|v| v[robot.index()]);
        self.trace.events.push(Event { time, robot, kind, location, team, value });
    }

    fn depart(&mut self, robot: usize, time: f64) {
        let id = RobotId::from_index(robot);
        let current = self.cursors[robot].expect("active robot");
        let from = self.state(current, robot);
        match self.next_cursor(current, robot) {
            None => {
                self.cursors[robot] = None;
                self.completed_by[robot] = current.round;
                self.log(time, id, EventKind::Finish, from, None);
            }
            Some(next) => {
                let to = self.state(next, robot);
                let mut arrive = time;
                if from != to {
                    let geo = self.net.geodesic(from, to);
                    arrive = time + geo.length / self.net.robot(id).speed;
                    self.trace.odometer[robot] += geo.length;
                    let by_round = &mut self.trace.distance_by_round[robot];
                    if by_round.len() < next.round {
                        by_round.resize(next.round, 0.0);
                    }
                    by_round[next.round - 1] += geo.length;
                    self.moving[robot] = true;
                    self.log(time, id, EventKind::Departure, from, None);
                    self.trace.legs.push(Leg {
                        robot: id,
                        from,
                        to,
                        path: geo.path,
                        depart: time,
                        arrive,
                        length: geo.length,
                    });
                }
                if next.round > current.round {
                    self.completed_by[robot] = current.round;
                }
                self.cursors[robot] = Some(next);
                self.queue.push(Pending { time: arrive, robot });
            }
        }
    }

    fn arrive(&mut self, robot: usize, time: f64) {
        let id = RobotId::from_index(robot);
        let c = self.cursors[robot].expect("active robot");
        let at = self.state(c, robot);
        let moved = std::mem::take(&mut self.moving[robot]);
        if moved || (c.round == 1 && c.column == 0 && c.index == 0) {
            self.log(time, id, EventKind::Arrival, at, None);
        }
        let Some(team) = self.meeting(c, robot) else {
            self.depart(robot, time);
            return;
        };
        let members = self.net.team(team).members.clone();
        let present = self.waiting.entry((team.index(), c.round)).or_default();
        present.push((id, time));
        if present.len() < members.len() {
            return;
        }
        let mut present = self.waiting.remove(&(team.index(), c.round)).expect("just inserted");
        present.sort_by_key(|&(r, _)| r);
        let start = time;
        let arrivals: Vec<f64> = present.iter().map(|&(_, t)| t).collect();
        let waits = arrivals.iter().map(|&t| start - t).collect();
        if let Some(values) = &mut self.values {
            let mean = members.iter().map(|r| values[r.index()]).sum::<f64>() / members.len() as f64;
            for r in &members {
                values[r.index()] = mean;
            }
            self.trace.consensus.push(ConsensusSample { time: start, values: values.clone() });
        }
        for &r in &members {
            self.log(start, r, EventKind::MeetingStart, at, Some(team));
        }
        self.trace.meetings.push(MeetingEvent {
            team,
            round: c.round,
            cycle: self.plan.cycle_of(c.round),
            location: at,
            start,
            members: members.clone(),
            arrivals,
            waits,
        });
        for &r in &members {
            self.log(start, r, EventKind::MeetingEnd, at, Some(team));
        }
        for r in members {
            self.depart(r.index(), start);
        }
    }
}

/// Runs `plan` on `net` until the horizon.
pub fn simulate(plan: &MotionPlan, net: &Network, options: &SimOptions) -> Result<ExecutionTrace, SimError> {
    let n = net.num_robots();
    if plan.num_robots() != n {
        return Err(SimError::RobotCountMismatch { plan: plan.num_robots(), network: n });
    }
    if let Some(v) = &options.consensus {
        if v.len() != n {
            return Err(SimError::ConsensusArity { expected: n, found: v.len() });
        }
    }
    let (last_round, max_time) = match options.horizon {
        Horizon::Cycles(0) => (Some(0), f64::INFINITY),
        Horizon::Cycles(c) => (Some(plan.rounds_for(c)), f64::INFINITY),
        Horizon::Time(t) => (None, t),
    };
    let active = last_round.is_none_or(|r| r >= 1);
    let trace = ExecutionTrace {
        events: Vec::new(),
        meetings: Vec::new(),
        legs: Vec::new(),
        starts: plan.initial.clone(),
        consensus: options.consensus.iter().map(|v| ConsensusSample { time: 0.0, values: v.clone() }).collect(),
        odometer: vec![0.0; n],
        distance_by_round: vec![Vec::new(); n],
        completed_rounds: 0,
        k_p: plan.k_p,
        period: plan.period(),
        end_time: 0.0,
    };
    let mut sim = Sim {
        plan,
        net,
        last_round,
        max_time,
        cursors: vec![active.then_some(Cursor { round: 1, column: 0, index: 0 }); n],
        queue: BinaryHeap::new(),
        waiting: BTreeMap::new(),
        values: options.consensus.clone(),
        completed_by: vec![0; n],
        moving: vec![false; n],
        trace,
    };
    if active {
        for robot in 0..n {
            sim.queue.push(Pending { time: 0.0, robot });
        }
    }
    let mut now = 0.0;
    let mut truncated = false;
    while let Some(Pending { time, robot }) = sim.queue.pop() {
        if time > sim.max_time + EPS {
            truncated = true;
            break;
        }
        now = time;
        sim.arrive(robot, time);
    }
    if !truncated && !sim.waiting.is_empty() {
        let pending = sim.waiting.keys().map(|&(m, k)| (TeamId::from_index(m), k)).collect();
        return Err(SimError::Deadlock { time: now, pending });
    }
    let mut trace = sim.trace;
    trace.completed_rounds = sim.completed_by.iter().copied().min().unwrap_or(0);
    trace.end_time = if truncated { max_time } else { now };
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamConnectivity {
    pub team: TeamId,
    pub meetings: usize,
    /// Meetings in each complete suffix cycle.
    pub per_cycle: Vec<usize>,
    /// Times between consecutive meetings.
    pub gaps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityReport {
    pub complete_cycles: usize,
    pub teams: Vec<TeamConnectivity>,
    /// `(team, cycle)` pairs without a meeting.
    pub failures: Vec<(TeamId, usize)>,
}

impl ConnectivityReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that every team meets at one of its points in every complete
/// suffix cycle of the trace. A trailing partial cycle is ignored.
pub fn verify_connectivity_over_time(trace: &ExecutionTrace, net: &Network) -> ConnectivityReport {
    let cycles = trace.complete_cycles();
    let mut failures = Vec::new();
    let teams = net
        .team_ids()
        .map(|m| {
            let points = &net.team(m).comm_points;
            let valid: Vec<&MeetingEvent> =
                trace.meetings_of(m).filter(|e| points.binary_search(&e.location).is_ok()).collect();
            let mut per_cycle = vec![0usize; cycles];
            for e in &valid {
                if let Some(c) = e.cycle.filter(|&c| c < cycles) {
                    per_cycle[c] += 1;
                }
            }
            failures.extend(per_cycle.iter().enumerate().filter(|(_, &n)| n == 0).map(|(c, _)| (m, c)));
            let gaps = valid.windows(2).map(|w| w[1].start - w[0].start).collect();
            TeamConnectivity { team: m, meetings: valid.len(), per_cycle, gaps }
        })
        .collect();
    ConnectivityReport { complete_cycles: cycles, teams, failures }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusReport {
    /// `(time, max v - min v)` initially and after each meeting.
    pub spreads: Vec<(f64, f64)>,
    /// Running minimum of the spread.
    pub envelope: Vec<f64>,
}

impl ConsensusReport {
    pub fn final_spread(&self) -> Option<f64> {
        self.spreads.last().map(|&(_, s)| s)
    }

    /// First time the spread drops below `tol`.
    pub fn time_below(&self, tol: f64) -> Option<f64> {
        self.spreads.iter().find(|&&(_, s)| s < tol).map(|&(t, _)| t)
    }
}

pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

pub fn consensus_report(trace: &ExecutionTrace) -> ConsensusReport {
    let spreads: Vec<(f64, f64)> = trace.consensus.iter().map(|s| (s.time, spread(&s.values))).collect();
    let envelope = spreads
        .iter()
        .scan(f64::INFINITY, |low, &(_, s)| {
            *low = low.min(s);
            Some(*low)
        })
        .collect();
    ConsensusReport { spreads, envelope }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub per_robot: Vec<f64>,
    pub total: f64,
}

/// Distance travelled by each robot.
pub fn total_cost(trace: &ExecutionTrace) -> CostReport {
    CostReport { per_robot: trace.odometer.clone(), total: trace.odometer.iter().sum() }
}

/// Distance travelled by each robot during suffix cycle `cycle`.
pub fn cycle_distance(trace: &ExecutionTrace, cycle: usize) -> Vec<f64> {
    let first = trace.k_p + cycle * trace.period;
    trace
        .distance_by_round
        .iter()
        .map(|rounds| (first..first + trace.period).map(|k| rounds.get(k - 1).copied().unwrap_or(0.0)).sum())
        .collect()
}
