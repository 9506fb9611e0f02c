//! Conflict-free assembly of per-robot motion plans.
//!
//! Every robot's plan is an infinite sequence of rounds `p_i^1 p_i^2 ...`.
//! A round is split into slots (columns); each team owns one slot, and in
//! that slot every member follows its projection of the team's cheapest
//! rendezvous leg while robots outside the team wait (an `X` column entry).
//!
//! Slots come from a greedy coloring of the team graph in the order in which
//! a closed walk over that graph first visits each team, so teams that share
//! a robot never share a slot and at most `Δ + 1` slots are needed. Slots
//! that no team uses are dropped, and each remaining column is padded with
//! terminal waits so all robots spend the same number of steps in it.
//!
//! Rounds are chained (each starts where the previous one ended) and are a
//! deterministic function of the robots' start states, so the stream of
//! rounds eventually repeats; [`Planner::plan`] detects the first repetition
//! and returns the plan in prefix/suffix form.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{LocationId, RobotId, TeamId};
use crate::network::{Network, TeamGraph};
use crate::planner::{PlanError, TeamPlanner, TeamPrefix};
use crate::ts::{build_wts, TsError, Wts};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CoordError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Ts(#[from] TsError),
    #[error("robot {robot} starts slot {slot} at {found} but ended the previous slot at {expected}")]
    ChainingMismatch { robot: RobotId, slot: usize, expected: LocationId, found: LocationId },
    #[error("no repeated round start within {0} rounds")]
    HorizonExceeded(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PlanOptions {
    /// Use every communication point as a state of every robot.
    pub relax_footnote1: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceEntry {
    pub team: TeamId,
    pub location: LocationId,
}

/// Ordered communication points visited while negotiating plans; consecutive
/// entries belong to neighbouring teams.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeSequence {
    pub entries: Vec<SequenceEntry>,
}

impl NodeSequence {
    /// Teams in order of first appearance. Later appearances of a team do
    /// not trigger planning again.
    pub fn first_visits(&self) -> Vec<TeamId> {
        let mut seen = BTreeSet::new();
        self.entries.iter().filter(|e| seen.insert(e.team)).map(|e| e.team).collect()
    }
}

/// Closed depth-first walk over the team graph from team 1, taking
/// neighbours in increasing order and recording each return. Each visit is
/// represented by the team's smallest communication point.
pub fn build_sequence(net: &Network) -> NodeSequence {
    let tg = net.team_graph();
    let entry = |m: TeamId| SequenceEntry { team: m, location: net.team(m).comm_points[0] };
    let mut entries = Vec::new();
    if tg.num_teams() == 0 {
        return NodeSequence { entries };
    }
    let root = TeamId(1);
    let mut visited = vec![false; tg.num_teams()];
    visited[root.index()] = true;
    entries.push(entry(root));
    let mut stack: Vec<(TeamId, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let (m, next) = *top;
        if let Some(&n) = tg.neighbors(m).get(next) {
            top.1 += 1;
            if !visited[n.index()] {
                visited[n.index()] = true;
                entries.push(entry(n));
                stack.push((n, 0));
            }
        } else {
            stack.pop();
            if let Some(&(parent, _)) = stack.last() {
                entries.push(entry(parent));
            }
        }
    }
    NodeSequence { entries }
}

/// Slot index `n^{T_m}` (1-based) of every team.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlotAssignment {
    /// `ℓ`, the number of slots per round before unused ones are dropped.
    pub slot_count: usize,
    pub slots: Vec<usize>,
}

impl SlotAssignment {
    pub fn slot(&self, team: TeamId) -> usize {
        self.slots[team.index()]
    }

    /// Slots that hold at least one team, ascending.
    pub fn used_slots(&self) -> Vec<usize> {
        self.slots.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Whether neighbouring teams always get different slots.
    pub fn is_proper(&self, tg: &TeamGraph) -> bool {
        tg.edges().iter().all(|&(a, b)| self.slot(a) != self.slot(b))
    }
}

/// Greedy coloring in first-visit order: each team takes the smallest slot
/// not held by an already colored neighbour. `ℓ = Δ + 1`.
pub fn assign_slots(tg: &TeamGraph, sequence: &NodeSequence) -> SlotAssignment {
    let slot_count = tg.max_degree() + 1;
    let mut slots = vec![0usize; tg.num_teams()];
    let mut order = sequence.first_visits();
    // teams missing from the walk (never the case for a connected graph)
    for m in 0..tg.num_teams() {
        let id = TeamId::from_index(m);
        if !order.contains(&id) {
            order.push(id);
        }
    }
    for m in order {
        let taken: BTreeSet<usize> = tg.neighbors(m).iter().map(|n| slots[n.index()]).collect();
        slots[m.index()] = (1..).find(|s| !taken.contains(s)).expect("a free slot exists");
    }
    SlotAssignment { slot_count, slots }
}

/// One column of one robot's round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobotColumn {
    pub slot: usize,
    /// Teams whose leg this robot follows in this column; empty for `X`.
    /// More than one entry is a conflict.
    pub teams: Vec<TeamId>,
    pub states: Vec<LocationId>,
    /// Index in `states` where the team is co-located at the leg's end.
    pub meeting: Option<usize>,
}

/// A team leg and the slot it was scheduled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduledLeg {
    pub slot: usize,
    pub leg: TeamPrefix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundPlan {
    /// Surviving slot numbers in execution order.
    pub columns: Vec<usize>,
    /// Legs in planning order.
    pub legs: Vec<ScheduledLeg>,
    /// `robots[i][c]`: robot `i + 1`'s entry in column `c`.
    pub robots: Vec<Vec<RobotColumn>>,
}

impl RoundPlan {
    pub fn start_states(&self) -> Vec<LocationId> {
        self.robots.iter().map(|cols| cols[0].states[0]).collect()
    }

    pub fn final_states(&self) -> Vec<LocationId> {
        self.robots
            .iter()
            .map(|cols| *cols.last().expect("round has columns").states.last().expect("nonempty column"))
            .collect()
    }

    /// Concatenation of the robot's columns.
    pub fn robot_path(&self, robot: RobotId) -> Vec<LocationId> {
        self.robots[robot.index()].iter().flat_map(|c| c.states.iter().copied()).collect()
    }

    /// Team (or `None` for `X`) in each surviving column.
    pub fn layout(&self, robot: RobotId) -> Vec<Option<TeamId>> {
        self.robots[robot.index()].iter().map(|c| c.teams.last().copied()).collect()
    }

    pub fn column_lengths(&self) -> Vec<usize> {
        self.robots[0].iter().map(|c| c.states.len()).collect()
    }

    pub fn leg(&self, team: TeamId) -> Option<&ScheduledLeg> {
        self.legs.iter().find(|l| l.leg.team == team)
    }
}

/// Infinite plan `[p^1 .. p^{k_p - 1}] [p^{k_p} .. p^{k_s}]^ω` of all robots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MotionPlan {
    pub k_p: usize,
    pub k_s: usize,
    /// Rounds `1..=k_s`.
    pub rounds: Vec<RoundPlan>,
    pub initial: Vec<LocationId>,
    pub sequence: NodeSequence,
    pub slots: SlotAssignment,
}

impl MotionPlan {
    pub fn num_robots(&self) -> usize {
        self.initial.len()
    }

    /// Number of rounds in one suffix cycle.
    pub fn period(&self) -> usize {
        self.k_s - self.k_p + 1
    }

    /// Round `k` (1-based) of the unrolled infinite plan.
    pub fn round(&self, k: usize) -> &RoundPlan {
        assert!(k >= 1, "rounds are numbered from 1");
        let index = if k <= self.k_s { k } else { self.k_p + (k - self.k_p) % self.period() };
        &self.rounds[index - 1]
    }

    /// Suffix cycle (0-based) that round `k` belongs to, `None` in the prefix.
    pub fn cycle_of(&self, k: usize) -> Option<usize> {
        (k >= self.k_p).then(|| (k - self.k_p) / self.period())
    }

    /// Rounds needed to cover the prefix and `cycles` suffix cycles.
    pub fn rounds_for(&self, cycles: usize) -> usize {
        self.k_p - 1 + cycles * self.period()
    }

    pub fn robot_prefix(&self, robot: RobotId) -> Vec<LocationId> {
        (1..self.k_p).flat_map(|k| self.round(k).robot_path(robot)).collect()
    }

    pub fn robot_suffix(&self, robot: RobotId) -> Vec<LocationId> {
        (self.k_p..=self.k_s).flat_map(|k| self.round(k).robot_path(robot)).collect()
    }

    /// Number of columns that survive in every round.
    pub fn slots_used(&self) -> usize {
        self.rounds[0].columns.len()
    }

    /// `(prefix cost, per-cycle suffix cost)` for each robot.
    pub fn robot_costs(&self, wts: &[Wts]) -> Result<Vec<(f64, f64)>, TsError> {
        (0..self.num_robots())
            .map(|i| {
                let robot = RobotId::from_index(i);
                wts[i].lasso_cost(&self.robot_prefix(robot), &self.robot_suffix(robot))
            })
            .collect()
    }
}

/// A planning session over a validated network.
#[derive(Clone, Debug)]
pub struct Planner {
    net: Network,
    wts: Vec<Wts>,
    teams: Vec<TeamPlanner>,
    sequence: NodeSequence,
    slots: SlotAssignment,
}

impl Planner {
    pub fn new(net: &Network, options: PlanOptions) -> Result<Self, CoordError> {
        let sequence = build_sequence(net);
        let slots = assign_slots(net.team_graph(), &sequence);
        Self::with_slots(net, options, slots)
    }

    /// Session with a caller-provided slot assignment, which need not be a
    /// proper coloring.
    pub fn with_slots(net: &Network, options: PlanOptions, slots: SlotAssignment) -> Result<Self, CoordError> {
        let wts: Vec<Wts> =
            net.robot_ids().map(|i| build_wts(net, i, options.relax_footnote1)).collect::<Result<_, _>>()?;
        let teams = net.team_ids().map(|m| TeamPlanner::new(net, m, &wts)).collect::<Result<_, _>>()?;
        Ok(Self { net: net.clone(), wts, teams, sequence: build_sequence(net), slots })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn wts(&self) -> &[Wts] {
        &self.wts
    }

    pub fn team_planner(&self, team: TeamId) -> &TeamPlanner {
        &self.teams[team.index()]
    }

    pub fn sequence(&self) -> &NodeSequence {
        &self.sequence
    }

    pub fn slots(&self) -> &SlotAssignment {
        &self.slots
    }

    pub fn initial_states(&self) -> Vec<LocationId> {
        self.wts.iter().map(Wts::initial_location).collect()
    }

    /// Builds one round starting from `chain` (one location per robot).
    pub fn build_round(&self, chain: &[LocationId]) -> Result<RoundPlan, CoordError> {
        let n = self.net.num_robots();
        let order = self.sequence.first_visits();
        let mut current = chain.to_vec();
        let mut robots: Vec<Vec<RobotColumn>> = vec![Vec::new(); n];
        let mut legs = Vec::new();
        let mut columns = Vec::new();
        for slot in 1..=self.slots.slot_count.max(self.slots.slots.iter().copied().max().unwrap_or(1)) {
            let teams: Vec<TeamId> = order.iter().copied().filter(|&m| self.slots.slot(m) == slot).collect();
            if teams.is_empty() {
                // every robot would wait here
                continue;
            }
            let column_start = current.clone();
            let mut planned = Vec::with_capacity(teams.len());
            for &m in &teams {
                let start: Vec<LocationId> = self.net.team(m).members.iter().map(|i| column_start[i.index()]).collect();
                planned.push(self.teams[m.index()].plan_prefix(&start)?);
            }
            let len = planned.iter().map(|p| p.path.len()).max().expect("slot has a team");
            for i in 0..n {
                let robot = RobotId::from_index(i);
                let mine: Vec<&TeamPrefix> = planned.iter().filter(|p| p.members.contains(&robot)).collect();
                let column = match mine.last() {
                    None => RobotColumn { slot, teams: Vec::new(), states: vec![current[i]; len], meeting: None },
                    Some(leg) => {
                        let mut states = leg.projection(robot).expect("member");
                        let meeting = states.len() - 1;
                        let last = *states.last().expect("nonempty leg");
                        states.resize(len, last);
                        RobotColumn {
                            slot,
                            teams: mine.iter().map(|p| p.team).collect(),
                            states,
                            meeting: Some(meeting),
                        }
                    }
                };
                if column.states[0] != current[i] {
                    return Err(CoordError::ChainingMismatch {
                        robot,
                        slot,
                        expected: current[i],
                        found: column.states[0],
                    });
                }
                current[i] = *column.states.last().expect("nonempty column");
                robots[i].push(column);
            }
            columns.push(slot);
            legs.extend(planned.into_iter().map(|leg| ScheduledLeg { slot, leg }));
        }
        Ok(RoundPlan { columns, legs, robots })
    }

    /// Rounds `1, 2, ...` generated by chaining from the initial states.
    pub fn rounds(&self) -> RoundStream<'_> {
        RoundStream { planner: self, chain: self.initial_states() }
    }

    /// Upper bound on the rounds before a start signature must repeat.
    pub fn recurrence_bound(&self) -> usize {
        self.wts.iter().fold(1usize, |acc, w| acc.saturating_mul(w.len()))
    }

    /// Generates rounds until the joint round-start signature repeats.
    pub fn plan(&self) -> Result<MotionPlan, CoordError> {
        self.plan_within(self.recurrence_bound())
    }

    pub fn plan_within(&self, max_rounds: usize) -> Result<MotionPlan, CoordError> {
        let mut seen: HashMap<Vec<LocationId>, usize> = HashMap::new();
        let mut rounds = Vec::new();
        let mut chain = self.initial_states();
        for k in 1..=max_rounds.saturating_add(1) {
            if let Some(&first) = seen.get(&chain) {
                return Ok(MotionPlan {
                    k_p: first,
                    k_s: k - 1,
                    rounds,
                    initial: self.initial_states(),
                    sequence: self.sequence.clone(),
                    slots: self.slots.clone(),
                });
            }
            seen.insert(chain.clone(), k);
            let round = self.build_round(&chain)?;
            chain = round.final_states();
            rounds.push(round);
        }
        Err(CoordError::HorizonExceeded(max_rounds))
    }
}

pub struct RoundStream<'a> {
    planner: &'a Planner,
    chain: Vec<LocationId>,
}

impl Iterator for RoundStream<'_> {
    type Item = Result<RoundPlan, CoordError>;

    fn next(&mut self) -> Option<Self::Item> {
        let round = self.planner.build_round(&self.chain);
        if let Ok(r) = &round {
            self.chain = r.final_states();
        }
        Some(round)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    /// A step of a robot's plan is not a transition of its system.
    Transition { robot: RobotId, round: usize, from: LocationId, to: LocationId },
    /// A robot is scheduled for several teams in one slot.
    SlotConflict { robot: RobotId, round: usize, slot: usize, teams: Vec<TeamId> },
    /// The members' columns do not reproduce the team leg.
    Desync { team: TeamId, round: usize },
    /// Consecutive pieces of a robot's plan do not chain up.
    ChainBreak { robot: RobotId, round: usize, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Transition { robot, round, from, to } => {
                write!(f, "round {round}: robot {robot} step {from} -> {to} is not a transition")
            }
            Violation::SlotConflict { robot, round, slot, teams } => {
                write!(f, "round {round}: robot {robot} has teams {teams:?} in slot {slot}")
            }
            Violation::Desync { team, round } => write!(f, "round {round}: members of {team} are out of step"),
            Violation::ChainBreak { robot, round, detail } => write!(f, "round {round}: robot {robot}: {detail}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every step is a transition, that no robot serves two teams in
/// one slot, that team legs are reproduced by their members, and that all
/// pieces chain up, including the wrap from `k_s` back to `k_p`.
pub fn check_admissible(plan: &MotionPlan, wts: &[Wts]) -> AdmissibilityReport {
    let mut violations = Vec::new();
    for (k0, round) in plan.rounds.iter().enumerate() {
        let k = k0 + 1;
        for (i, cols) in round.robots.iter().enumerate() {
            let robot = RobotId::from_index(i);
            let path = round.robot_path(robot);
            for w in path.windows(2) {
                if !wts[i].has_transition(w[0], w[1]) {
                    violations.push(Violation::Transition { robot, round: k, from: w[0], to: w[1] });
                }
            }
            if let [only] = path.as_slice() {
                if wts[i].state_of(*only).is_none() {
                    violations.push(Violation::Transition { robot, round: k, from: *only, to: *only });
                }
            }
            for c in cols {
                if c.teams.len() > 1 {
                    violations.push(Violation::SlotConflict { robot, round: k, slot: c.slot, teams: c.teams.clone() });
                }
            }
            let mut by_slot: HashMap<usize, Vec<TeamId>> = HashMap::new();
            for leg in round.legs.iter().filter(|l| l.leg.members.contains(&robot)) {
                by_slot.entry(leg.slot).or_default().push(leg.leg.team);
            }
            let mut conflicted: Vec<(usize, Vec<TeamId>)> =
                by_slot.into_iter().filter(|(_, teams)| teams.len() > 1).collect();
            conflicted.sort();
            for (slot, teams) in conflicted {
                if !cols.iter().any(|c| c.slot == slot && c.teams.len() > 1) {
                    violations.push(Violation::SlotConflict { robot, round: k, slot, teams });
                }
            }
            for (c, w) in cols.windows(2).enumerate() {
                if w[0].states.last() != w[1].states.first() {
                    violations.push(Violation::ChainBreak {
                        robot,
                        round: k,
                        detail: format!("column {} does not start where column {} ends", c + 2, c + 1),
                    });
                }
            }
        }
        for scheduled in &round.legs {
            let leg = &scheduled.leg;
            let in_step = leg.members.iter().all(|&r| {
                let column = round.robots[r.index()].iter().find(|c| c.slot == scheduled.slot);
                let projection = leg.projection(r).expect("member");
                column.is_some_and(|c| {
                    c.states.len() >= projection.len()
                        && c.states[..projection.len()] == projection[..]
                        && c.meeting == Some(projection.len() - 1)
                })
            });
            if !in_step {
                violations.push(Violation::Desync { team: leg.team, round: k });
            }
        }
    }
    // chaining across rounds and around the suffix loop
    let n = plan.num_robots();
    for i in 0..n {
        let robot = RobotId::from_index(i);
        if plan.rounds[0].start_states()[i] != plan.initial[i] {
            violations.push(Violation::ChainBreak {
                robot,
                round: 1,
                detail: "does not start at its initial state".into(),
            });
        }
        for k in 1..=plan.k_s {
            let next = if k == plan.k_s { plan.k_p } else { k + 1 };
            if plan.round(k).final_states()[i] != plan.round(next).start_states()[i] {
                violations.push(Violation::ChainBreak {
                    robot,
                    round: k,
                    detail: format!("round {k} does not end where round {next} starts"),
                });
            }
        }
    }
    AdmissibilityReport { violations }
}
