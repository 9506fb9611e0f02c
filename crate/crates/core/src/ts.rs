//! Weighted transition systems for single robots and lazy team products.
//!
//! A robot's system has one state per communication point it may visit.
//! From every state the robot may either wait (weight 0) or go to any other
//! state along a geodesic of the mobility graph (weight = geodesic length).
//! Intermediate graph nodes are not states.
//!
//! Robot paths are sequences of [`LocationId`]s (states are identified by
//! their location). Joint paths of a team are sequences of [`JointState`]s in
//! member order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{LocationId, RobotId, TeamId};
use crate::network::Network;

/// `π_i^ℓ`: robot `i` is at location `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Proposition {
    pub robot: RobotId,
    pub location: LocationId,
}

pub type Label = BTreeSet<Proposition>;

/// Joint state of a team, one location per member in member order.
pub type JointState = Vec<LocationId>;

/// Joint state spaces larger than this are refused.
pub const MAX_PRODUCT_STATES: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TsError {
    #[error("start {start} of robot {robot} is not one of its states")]
    StartNotInStateSet { robot: RobotId, start: LocationId },
    #[error("robot {robot} is not a member of team {team}")]
    RobotNotInTeam { robot: RobotId, team: TeamId },
    #[error("inadmissible path: step {index} ({from} -> {to}) is not a transition")]
    InadmissiblePath { index: usize, from: String, to: String },
    #[error("path state {0} is outside the state space")]
    UnknownState(String),
    #[error("product of team {0} has no factors")]
    EmptyProduct(TeamId),
    #[error("product of team {team} has more than {limit} states")]
    StateSpaceTooLarge { team: TeamId, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Wait,
    GoTo(LocationId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wts {
    robot: RobotId,
    states: Vec<LocationId>,
    initial: usize,
    weights: Vec<f64>,
}

/// Builds robot `i`'s transition system. With `relax` the state set is every
/// communication point of the network instead of only the robot's own.
pub fn build_wts(net: &Network, robot: RobotId, relax: bool) -> Result<Wts, TsError> {
    let states = if relax { net.all_comm_points() } else { net.own_comm_points(robot) };
    let start = net.robot(robot).start;
    let initial = states.binary_search(&start).map_err(|_| TsError::StartNotInStateSet { robot, start })?;
    let n = states.len();
    let mut weights = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                weights[a * n + b] = net.distance(states[a], states[b]);
            }
        }
    }
    Ok(Wts { robot, states, initial, weights })
}

impl Wts {
    pub fn robot(&self) -> RobotId {
        self.robot
    }

    /// States as sorted locations.
    pub fn states(&self) -> &[LocationId] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_of(&self, location: LocationId) -> Option<usize> {
        self.states.binary_search(&location).ok()
    }

    pub fn location(&self, state: usize) -> LocationId {
        self.states[state]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn initial_location(&self) -> LocationId {
        self.states[self.initial]
    }

    /// Same system rooted at a different state.
    pub fn rooted_at(&self, location: LocationId) -> Result<Wts, TsError> {
        let initial =
            self.state_of(location).ok_or(TsError::StartNotInStateSet { robot: self.robot, start: location })?;
        Ok(Wts { initial, ..self.clone() })
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.len() + b]
    }

    pub(crate) fn weight_row(&self, a: usize) -> &[f64] {
        &self.weights[a * self.len()..(a + 1) * self.len()]
    }

    /// Weight of the transition between two locations, if it exists.
    pub fn transition_weight(&self, from: LocationId, to: LocationId) -> Option<f64> {
        Some(self.weight(self.state_of(from)?, self.state_of(to)?))
    }

    pub fn has_transition(&self, from: LocationId, to: LocationId) -> bool {
        self.state_of(from).is_some() && self.state_of(to).is_some()
    }

    pub fn actions(&self, state: usize) -> Vec<Action> {
        std::iter::once(Action::Wait)
            .chain(self.states.iter().enumerate().filter(|&(s, _)| s != state).map(|(_, &l)| Action::GoTo(l)))
            .collect()
    }

    pub fn label(&self, state: usize) -> Label {
        Label::from([Proposition { robot: self.robot, location: self.states[state] }])
    }

    /// Readable edge list, one transition per line.
    pub fn dump(&self) -> String {
        let mut out = format!("wts {} states={} initial={}\n", self.robot, self.len(), self.initial_location());
        for (a, &from) in self.states.iter().enumerate() {
            for (b, &to) in self.states.iter().enumerate() {
                let action = if a == b { "wait".to_string() } else { format!("go-to({to})") };
                let _ = writeln!(out, "{from} -> {to} {action} w={:.9}", self.weight(a, b));
            }
        }
        out
    }

    pub fn path_cost(&self, path: &[LocationId]) -> Result<f64, TsError> {
        let states = self.admissible_states(path)?;
        Ok(states.windows(2).fold(0.0, |acc, w| acc + self.weight(w[0], w[1])))
    }

    /// `(prefix cost, per-cycle suffix cost)` of `prefix [suffix]^ω`. The
    /// step from the last prefix state into the suffix belongs to the prefix;
    /// the closing step of the cycle belongs to the suffix.
    pub fn lasso_cost(&self, prefix: &[LocationId], suffix: &[LocationId]) -> Result<(f64, f64), TsError> {
        let head: Vec<LocationId> = prefix.iter().chain(suffix.first()).copied().collect();
        let cycle: Vec<LocationId> = suffix.iter().chain(suffix.first()).copied().collect();
        Ok((self.path_cost(&head)?, self.path_cost(&cycle)?))
    }

    pub fn trace_of(&self, path: &[LocationId]) -> Result<Vec<Label>, TsError> {
        Ok(self.admissible_states(path)?.into_iter().map(|s| self.label(s)).collect())
    }

    fn admissible_states(&self, path: &[LocationId]) -> Result<Vec<usize>, TsError> {
        let states: Vec<usize> = path
            .iter()
            .map(|&l| self.state_of(l).ok_or_else(|| TsError::UnknownState(l.to_string())))
            .collect::<Result<_, _>>()?;
        // every pair of own states is connected, so membership suffices
        Ok(states)
    }
}

/// Synchronous product of the members' systems, explored on demand.
#[derive(Clone, Debug)]
pub struct Wpts {
    team: TeamId,
    factors: Vec<Wts>,
    strides: Vec<usize>,
    size: usize,
}

pub fn build_wpts(team: TeamId, factors: Vec<Wts>) -> Result<Wpts, TsError> {
    if factors.is_empty() {
        return Err(TsError::EmptyProduct(team));
    }
    let mut strides = vec![1; factors.len()];
    let mut size: usize = 1;
    for k in (0..factors.len()).rev() {
        strides[k] = size;
        size = size
            .checked_mul(factors[k].len())
            .filter(|&s| s <= MAX_PRODUCT_STATES)
            .ok_or(TsError::StateSpaceTooLarge { team, limit: MAX_PRODUCT_STATES })?;
    }
    Ok(Wpts { team, factors, strides, size })
}

impl Wpts {
    pub fn team(&self) -> TeamId {
        self.team
    }

    pub fn members(&self) -> Vec<RobotId> {
        self.factors.iter().map(Wts::robot).collect()
    }

    pub fn factors(&self) -> &[Wts] {
        &self.factors
    }

    pub fn num_states(&self) -> usize {
        self.size
    }

    /// Mixed-radix code; the first member is the most significant digit so
    /// codes sort like joint states.
    pub fn encode(&self, joint: &[LocationId]) -> Option<usize> {
        if joint.len() != self.factors.len() {
            return None;
        }
        let mut code = 0;
        for ((wts, &l), stride) in self.factors.iter().zip(joint).zip(&self.strides) {
            code += wts.state_of(l)? * stride;
        }
        Some(code)
    }

    pub(crate) fn digits(&self, code: usize) -> Vec<usize> {
        self.factors.iter().zip(&self.strides).map(|(wts, stride)| (code / stride) % wts.len()).collect()
    }

    pub fn decode(&self, code: usize) -> JointState {
        self.digits(code).into_iter().zip(&self.factors).map(|(d, wts)| wts.location(d)).collect()
    }

    pub fn initial(&self) -> JointState {
        self.factors.iter().map(Wts::initial_location).collect()
    }

    /// Joint successors of `code` with their summed weights. Every member
    /// independently waits or moves to another of its states.
    pub fn successors(&self, code: usize) -> Successors<'_> {
        let rows = self.digits(code).into_iter().zip(&self.factors).map(|(d, wts)| wts.weight_row(d)).collect();
        Successors { rows, digits: vec![0; self.factors.len()], next: 0, size: self.size }
    }

    pub fn has_transition(&self, from: &[LocationId], to: &[LocationId]) -> bool {
        from.len() == self.factors.len()
            && to.len() == self.factors.len()
            && self.factors.iter().zip(from.iter().zip(to)).all(|(w, (&a, &b))| w.has_transition(a, b))
    }

    pub fn weight(&self, from: &[LocationId], to: &[LocationId]) -> Option<f64> {
        if from.len() != self.factors.len() || to.len() != self.factors.len() {
            return None;
        }
        self.factors.iter().zip(from.iter().zip(to)).map(|(w, (&a, &b))| w.transition_weight(a, b)).sum()
    }

    /// Union of the members' labels.
    pub fn label(&self, joint: &[LocationId]) -> Label {
        self.factors.iter().zip(joint).map(|(w, &l)| Proposition { robot: w.robot(), location: l }).collect()
    }

    pub fn path_cost(&self, path: &[JointState]) -> Result<f64, TsError> {
        let mut total = 0.0;
        for (index, w) in path.windows(2).enumerate() {
            total += self.weight(&w[0], &w[1]).ok_or_else(|| TsError::InadmissiblePath {
                index,
                from: format!("{:?}", w[0]),
                to: format!("{:?}", w[1]),
            })?;
        }
        if let [only] = path {
            self.encode(only).ok_or_else(|| TsError::UnknownState(format!("{only:?}")))?;
        }
        Ok(total)
    }

    pub fn trace_of(&self, path: &[JointState]) -> Vec<Label> {
        path.iter().map(|q| self.label(q)).collect()
    }

    pub fn member_index(&self, robot: RobotId) -> Result<usize, TsError> {
        self.factors.iter().position(|w| w.robot() == robot).ok_or(TsError::RobotNotInTeam { robot, team: self.team })
    }

    /// Componentwise projection onto one member; length is preserved.
    pub fn project(&self, path: &[JointState], robot: RobotId) -> Result<Vec<LocationId>, TsError> {
        let k = self.member_index(robot)?;
        Ok(path.iter().map(|q| q[k]).collect())
    }
}

pub struct Successors<'a> {
    rows: Vec<&'a [f64]>,
    digits: Vec<usize>,
    next: usize,
    size: usize,
}

impl Iterator for Successors<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        if self.next >= self.size {
            return None;
        }
        let code = self.next;
        let weight = self.rows.iter().zip(&self.digits).map(|(row, &d)| row[d]).sum();
        self.next += 1;
        for k in (0..self.digits.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.rows[k].len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some((code, weight))
    }
}

/// Zips equal-length member paths into a joint path.
pub fn compose(paths: &[Vec<LocationId>]) -> Option<Vec<JointState>> {
    let len = paths.first()?.len();
    if paths.iter().any(|p| p.len() != len) {
        return None;
    }
    Some((0..len).map(|n| paths.iter().map(|p| p[n]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{validate_network, Location, MobilityGraph, TeamStructure};

    fn l(i: usize) -> LocationId {
        LocationId(i)
    }

    /// Four points on a line 0, 1, 3, 6 fully connected; robot 1 owns
    /// {1, 2}, robot 2 owns {3, 4}, both share team 3 at {2, 3}.
    pub(crate) fn line_network() -> Network {
        let xs = [0.0, 1.0, 3.0, 6.0];
        let locations = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| Location { id: LocationId::from_index(k), position: vec![x] })
            .collect();
        let mut edges = Vec::new();
        for a in 1..=4 {
            for b in a + 1..=4 {
                edges.push((l(a), l(b), None));
            }
        }
        let graph = MobilityGraph::new(locations, &edges).unwrap();
        let teams = TeamStructure::new(
            vec![
                (vec![RobotId(1)], vec![l(1), l(2)]),
                (vec![RobotId(2)], vec![l(3), l(4)]),
                (vec![RobotId(1), RobotId(2)], vec![l(2), l(3)]),
            ],
            vec![(l(1), 1.0), (l(4), 2.0)],
        );
        validate_network(graph, teams).unwrap()
    }

    #[test]
    fn wts_states_and_weights() {
        let net = line_network();
        let wts = build_wts(&net, RobotId(1), false).unwrap();
        assert_eq!(wts.states(), &[l(1), l(2), l(3)]);
        assert_eq!(wts.initial_location(), l(1));
        assert_eq!(wts.transition_weight(l(1), l(3)), Some(3.0));
        assert_eq!(wts.transition_weight(l(3), l(3)), Some(0.0));
        assert_eq!(wts.transition_weight(l(1), l(4)), None);
        assert_eq!(wts.actions(0), vec![Action::Wait, Action::GoTo(l(2)), Action::GoTo(l(3))]);
        assert_eq!(wts.label(1), Label::from([Proposition { robot: RobotId(1), location: l(2) }]));
        let relaxed = build_wts(&net, RobotId(1), true).unwrap();
        assert_eq!(relaxed.len(), 4);
        assert!(wts.dump().contains("l1 -> l3 go-to(l3) w=3.000000000"));
    }

    #[test]
    fn start_outside_state_set() {
        let net = line_network();
        let wts = build_wts(&net, RobotId(1), false).unwrap();
        assert_eq!(wts.rooted_at(l(4)).unwrap_err(), TsError::StartNotInStateSet { robot: RobotId(1), start: l(4) });
    }

    #[test]
    fn costs() {
        let net = line_network();
        let wts = build_wts(&net, RobotId(1), false).unwrap();
        assert_eq!(wts.path_cost(&[l(1), l(1), l(1)]).unwrap(), 0.0);
        assert_eq!(wts.path_cost(&[l(1), l(2), l(3)]).unwrap(), 3.0);
        assert!(matches!(wts.path_cost(&[l(1), l(4)]), Err(TsError::UnknownState(_))));
        // 1 -> [2 3]^ω : prefix 1, cycle 2+2
        assert_eq!(wts.lasso_cost(&[l(1)], &[l(2), l(3)]).unwrap(), (1.0, 4.0));
    }

    #[test]
    fn product_successors_and_weights() {
        let net = line_network();
        let a = build_wts(&net, RobotId(1), false).unwrap();
        let b = build_wts(&net, RobotId(2), false).unwrap();
        let wpts = build_wpts(TeamId(3), vec![a, b]).unwrap();
        assert_eq!(wpts.num_states(), 9);
        let start = wpts.encode(&[l(1), l(4)]).unwrap();
        let succ: Vec<(usize, f64)> = wpts.successors(start).collect();
        assert_eq!(succ.len(), 9);
        for (code, w) in succ {
            let q = wpts.decode(code);
            assert_eq!(Some(w), wpts.weight(&[l(1), l(4)], &q));
        }
        // robot 1 moves 3, robot 2 waits
        assert_eq!(wpts.weight(&[l(1), l(4)], &[l(3), l(4)]), Some(3.0));
        assert_eq!(
            wpts.label(&[l(2), l(2)]),
            Label::from([
                Proposition { robot: RobotId(1), location: l(2) },
                Proposition { robot: RobotId(2), location: l(2) }
            ])
        );
    }

    #[test]
    fn projection() {
        let net = line_network();
        let a = build_wts(&net, RobotId(1), false).unwrap();
        let b = build_wts(&net, RobotId(2), false).unwrap();
        let wpts = build_wpts(TeamId(3), vec![a.clone(), b]).unwrap();
        let path = vec![vec![l(1), l(3)], vec![l(2), l(3)]];
        assert_eq!(wpts.project(&path, RobotId(2)).unwrap(), vec![l(3), l(3)]);
        let solo = build_wpts(TeamId(1), vec![a]).unwrap();
        assert_eq!(
            solo.project(&[vec![l(1)]], RobotId(2)).unwrap_err(),
            TsError::RobotNotInTeam { robot: RobotId(2), team: TeamId(1) }
        );
        assert!(build_wpts(TeamId(1), vec![]).is_err());
    }

    #[test]
    fn unary_product_matches_factor() {
        let net = line_network();
        let a = build_wts(&net, RobotId(1), false).unwrap();
        let solo = build_wpts(TeamId(1), vec![a.clone()]).unwrap();
        assert_eq!(solo.num_states(), a.len());
        for s in 0..a.len() {
            let succ: Vec<(usize, f64)> = solo.successors(s).collect();
            let expected: Vec<(usize, f64)> = (0..a.len()).map(|t| (t, a.weight(s, t))).collect();
            assert_eq!(succ, expected);
        }
    }
}
