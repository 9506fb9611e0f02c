//! Cheapest rendezvous legs over the product Büchi automaton.
//!
//! A team's prefix is a minimum-weight path from the team's current joint
//! state to an accepting product state, projected back to joint states. With
//! the two-state automaton, reaching an accepting state means the last step
//! lands on a joint state where the whole team shares a communication point.
//!
//! The search is label-setting (Dijkstra) over the implicit product graph.
//! By default it is guided by the distance-to-nearest-meeting lower bound,
//! which is consistent because transition weights are geodesic lengths; the
//! unguided variant is kept for cross-checking.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::buchi::{build_pba, build_team_nba, Pba, PbaState};
use crate::ids::{LocationId, RobotId, TeamId};
use crate::network::Network;
use crate::search::{Entry, Frontier, Label};
use crate::ts::{build_wpts, JointState, TsError, Wts};
use crate::EPS;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PlanError {
    #[error("no accepting state reachable for team {0}")]
    NoAcceptingReachable(TeamId),
    #[error("final state {0:?} does not co-locate team {1} at one of its points")]
    NotAMeetingState(JointState, TeamId),
    #[error("joint state {0:?} is not a state of team {1}")]
    InvalidInitialState(JointState, TeamId),
    #[error(transparent)]
    Ts(#[from] TsError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Guidance {
    /// Plain Dijkstra.
    None,
    /// Dijkstra on reduced costs (A*) with the meeting-distance bound.
    #[default]
    MeetingDistance,
}

/// One planned rendezvous leg of a team.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamPrefix {
    pub team: TeamId,
    pub members: Vec<RobotId>,
    /// Joint path; the first state is the request's start, the last state
    /// co-locates the team at `meeting_point`.
    pub path: Vec<JointState>,
    pub meeting_point: LocationId,
    pub cost: f64,
}

impl TeamPrefix {
    /// Robot `robot`'s coordinate along the leg.
    pub fn projection(&self, robot: RobotId) -> Option<Vec<LocationId>> {
        let k = self.members.iter().position(|&r| r == robot)?;
        Some(self.path.iter().map(|q| q[k]).collect())
    }
}

/// A cycle through an accepting product state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeamCycle {
    pub team: TeamId,
    /// Joint path starting and ending at the accepting state's joint state.
    pub path: Vec<JointState>,
    pub cost: f64,
}

/// Product automaton of one team plus the per-member distance tables used to
/// guide the search.
#[derive(Clone, Debug)]
pub struct TeamPlanner {
    pba: Pba,
    /// `member_dist[p][k][s]`: distance from state `s` of member `k` to
    /// meeting point `p`.
    member_dist: Vec<Vec<Vec<f64>>>,
}

impl TeamPlanner {
    /// `wts` holds one system per robot, indexed by robot.
    pub fn new(net: &Network, team: TeamId, wts: &[Wts]) -> Result<Self, PlanError> {
        let factors = net.team(team).members.iter().map(|i| wts[i.index()].clone()).collect();
        let wpts = build_wpts(team, factors)?;
        Ok(Self::from_pba(build_pba(wpts, build_team_nba(net, team))))
    }

    pub fn from_pba(pba: Pba) -> Self {
        let member_dist = pba
            .meeting_codes()
            .iter()
            .map(|&(_, point)| {
                pba.wpts()
                    .factors()
                    .iter()
                    .map(|w| {
                        let target = w.state_of(point).expect("meeting point is a member state");
                        (0..w.len()).map(|s| w.weight(s, target)).collect()
                    })
                    .collect()
            })
            .collect();
        Self { pba, member_dist }
    }

    pub fn pba(&self) -> &Pba {
        &self.pba
    }

    pub fn team(&self) -> TeamId {
        self.pba.team()
    }

    fn lower_bound(&self, state: PbaState, digits: &[usize]) -> f64 {
        if self.pba.is_accepting(state) {
            return 0.0;
        }
        self.member_dist
            .iter()
            .map(|per_member| per_member.iter().zip(digits).map(|(d, &s)| d[s]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn plan_prefix(&self, start: &[LocationId]) -> Result<TeamPrefix, PlanError> {
        self.plan_prefix_with(start, Guidance::default())
    }

    /// Cheapest path from `start` to an accepting product state. Ties within
    /// [`EPS`] go to fewer transitions, then to the smaller product state id
    /// (joint states compare lexicographically, so the smaller meeting point
    /// wins).
    pub fn plan_prefix_with(&self, start: &[LocationId], guidance: Guidance) -> Result<TeamPrefix, PlanError> {
        let team = self.team();
        let inits =
            self.pba.initial_states(start).ok_or_else(|| PlanError::InvalidInitialState(start.to_vec(), team))?;
        let sources: Vec<(usize, f64)> = inits.iter().map(|&s| (self.pba.id(s), 0.0)).collect();
        // initial automaton states are never accepting, so the target is
        // always entered through at least one transition
        let (ids, cost) = self
            .search(&sources, guidance, |s| self.pba.is_accepting(s), false)
            .ok_or(PlanError::NoAcceptingReachable(team))?;
        let path: Vec<JointState> = ids.iter().map(|&id| self.pba.wpts().decode(self.pba.state(id).joint)).collect();
        let last = self.pba.state(*ids.last().expect("nonempty"));
        let meeting_point = self
            .pba
            .meeting_point(last.joint)
            .ok_or_else(|| PlanError::NotAMeetingState(path.last().cloned().unwrap_or_default(), team))?;
        Ok(TeamPrefix { team, members: self.pba.wpts().members(), path, meeting_point, cost })
    }

    /// Cheapest cycle through the accepting product state whose joint state
    /// is `at`. With `allow_wait == false`, steps that leave the joint state
    /// unchanged are excluded.
    pub fn plan_suffix(&self, at: &[LocationId], allow_wait: bool) -> Result<Option<TeamCycle>, PlanError> {
        let team = self.team();
        let code = self.pba.wpts().encode(at).ok_or_else(|| PlanError::InvalidInitialState(at.to_vec(), team))?;
        let accepting = (0..self.pba.nba().num_states())
            .map(|b| PbaState { joint: code, buchi: b })
            .find(|&s| self.pba.is_accepting(s))
            .expect("automaton has an accepting state");
        if self.pba.meeting_point(code).is_none() {
            return Err(PlanError::NotAMeetingState(at.to_vec(), team));
        }
        let seed = self.pba.id(accepting);
        // start from the seed's successors so the seed is re-entered by a
        // transition
        let sources: Vec<(usize, f64)> = self
            .pba
            .successors(accepting)
            .filter(|(next, _)| allow_wait || next.joint != code)
            .map(|(next, w)| (self.pba.id(next), w))
            .collect();
        let found = self.search(&sources, Guidance::None, |s| self.pba.id(s) == seed, !allow_wait);
        Ok(found.map(|(ids, cost)| TeamCycle {
            team,
            path: std::iter::once(seed).chain(ids).map(|id| self.pba.wpts().decode(self.pba.state(id).joint)).collect(),
            cost,
        }))
    }

    /// Label-setting search from `sources` (given as `(id, cost)` pairs) to
    /// the first settled state satisfying `is_target`. Returns the product
    /// ids along the path, sources included.
    fn search(
        &self,
        sources: &[(usize, f64)],
        guidance: Guidance,
        is_target: impl Fn(PbaState) -> bool,
        forbid_wait: bool,
    ) -> Option<(Vec<usize>, f64)> {
        const ROOT: usize = usize::MAX;
        let wpts = self.pba.wpts();
        let bound = |id: usize| match guidance {
            Guidance::None => 0.0,
            Guidance::MeetingDistance => {
                let s = self.pba.state(id);
                self.lower_bound(s, &wpts.digits(s.joint))
            }
        };
        let mut labels: HashMap<usize, Label> = HashMap::new();
        let mut heap = Frontier::new();
        for &(id, cost) in sources {
            let entry = labels.entry(id).or_insert(Label::UNSEEN);
            if entry.improved_by(cost, 0, ROOT, EPS) {
                *entry = Label { cost, hops: 0, pred: ROOT, settled: false };
                heap.push(Entry { priority: cost + bound(id), hops: 0, node: id });
            }
        }
        while let Some(Entry { node, .. }) = heap.pop() {
            let label = labels[&node];
            if label.settled {
                continue;
            }
            labels.get_mut(&node).expect("present").settled = true;
            let state = self.pba.state(node);
            if is_target(state) {
                let mut ids = vec![node];
                let mut at = node;
                while labels[&at].pred != ROOT {
                    at = labels[&at].pred;
                    ids.push(at);
                }
                ids.reverse();
                return Some((ids, label.cost));
            }
            for (next, weight) in self.pba.successors(state) {
                if forbid_wait && next.joint == state.joint {
                    continue;
                }
                let id = self.pba.id(next);
                let cost = label.cost + weight;
                let hops = label.hops + 1;
                let entry = labels.entry(id).or_insert(Label::UNSEEN);
                if entry.improved_by(cost, hops, node, EPS) {
                    *entry = Label { cost, hops, pred: node, settled: false };
                    heap.push(Entry { priority: cost + bound(id), hops, node: id });
                }
            }
        }
        None
    }
}

/// Meeting point of a finished leg.
pub fn meeting_point_of(planner: &TeamPlanner, path: &[JointState]) -> Result<LocationId, PlanError> {
    let last = path.last().cloned().unwrap_or_default();
    planner.pba().nba().predicate().meeting_point(&last).ok_or(PlanError::NotAMeetingState(last, planner.team()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{validate_network, Location, MobilityGraph, TeamStructure};
    use crate::ts::build_wts;

    fn l(i: usize) -> LocationId {
        LocationId(i)
    }

    /// Points on a line at the given x positions, fully connected.
    fn line(xs: &[f64], teams: Vec<(Vec<usize>, Vec<usize>)>, starts: &[usize]) -> Network {
        let locations = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| Location { id: LocationId::from_index(k), position: vec![x] })
            .collect();
        let mut edges = Vec::new();
        for a in 1..=xs.len() {
            for b in a + 1..=xs.len() {
                edges.push((l(a), l(b), None));
            }
        }
        let graph = MobilityGraph::new(locations, &edges).unwrap();
        let teams = TeamStructure::new(
            teams
                .into_iter()
                .map(|(m, c)| (m.into_iter().map(RobotId).collect(), c.into_iter().map(LocationId).collect()))
                .collect(),
            starts.iter().map(|&s| (l(s), 1.0)).collect(),
        );
        validate_network(graph, teams).unwrap()
    }

    fn planner(net: &Network, team: usize) -> TeamPlanner {
        let wts: Vec<Wts> = net.robot_ids().map(|i| build_wts(net, i, false).unwrap()).collect();
        TeamPlanner::new(net, TeamId(team), &wts).unwrap()
    }

    #[test]
    fn co_located_team_waits_once() {
        let net = line(&[0.0, 5.0], vec![(vec![1, 2], vec![1, 2])], &[2, 2]);
        let p = planner(&net, 1).plan_prefix(&[l(2), l(2)]).unwrap();
        assert_eq!(p.path, vec![vec![l(2), l(2)], vec![l(2), l(2)]]);
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.meeting_point, l(2));
    }

    #[test]
    fn equal_cost_meeting_points_go_to_the_smaller_id() {
        // on a line every point between the robots costs the same total
        let net = line(
            &[0.0, 6.0, 1.0, 4.5],
            vec![(vec![1], vec![1, 3, 4]), (vec![2], vec![2, 3, 4]), (vec![1, 2], vec![3, 4])],
            &[1, 2],
        );
        for guidance in [Guidance::None, Guidance::MeetingDistance] {
            let p = planner(&net, 3).plan_prefix_with(&[l(1), l(2)], guidance).unwrap();
            assert_eq!(p.meeting_point, l(3));
            assert_eq!(p.path.len(), 2);
            assert!((p.cost - 6.0).abs() < EPS);
        }
    }

    #[test]
    fn cost_five_versus_four() {
        // a=0, b=3; x=-1 costs 1 + 4, y=3.5 costs 3.5 + 0.5
        let net = line(
            &[0.0, 3.0, -1.0, 3.5],
            vec![(vec![1], vec![1, 3, 4]), (vec![2], vec![2, 3, 4]), (vec![1, 2], vec![3, 4])],
            &[1, 2],
        );
        let p = planner(&net, 3).plan_prefix(&[l(1), l(2)]).unwrap();
        assert_eq!(p.meeting_point, l(4));
        assert!((p.cost - 4.0).abs() < EPS);
        assert_eq!(p.path, vec![vec![l(1), l(2)], vec![l(4), l(4)]]);
    }

    #[test]
    fn suffix_with_and_without_wait() {
        // one robot, two points 4 apart
        let net = line(&[0.0, 4.0], vec![(vec![1], vec![1, 2])], &[1]);
        let p = planner(&net, 1);
        let cycle = p.plan_suffix(&[l(1)], true).unwrap().unwrap();
        assert_eq!(cycle.path, vec![vec![l(1)], vec![l(1)]]);
        assert_eq!(cycle.cost, 0.0);
        let cycle = p.plan_suffix(&[l(1)], false).unwrap().unwrap();
        assert_eq!(cycle.path, vec![vec![l(1)], vec![l(2)], vec![l(1)]]);
        assert!((cycle.cost - 8.0).abs() < EPS);
        assert!(matches!(p.plan_suffix(&[l(3)], true), Err(PlanError::InvalidInitialState(..))));
    }

    #[test]
    fn suffix_without_wait_on_single_point_is_empty() {
        let net = line(&[0.0], vec![(vec![1], vec![1])], &[1]);
        assert_eq!(planner(&net, 1).plan_suffix(&[l(1)], false).unwrap(), None);
    }

    #[test]
    fn meeting_point_checks() {
        let net = line(&[0.0, 4.0], vec![(vec![1, 2], vec![1, 2])], &[1, 2]);
        let p = planner(&net, 1);
        assert_eq!(meeting_point_of(&p, &[vec![l(1), l(2)], vec![l(2), l(2)]]), Ok(l(2)));
        assert!(matches!(meeting_point_of(&p, &[vec![l(1), l(2)]]), Err(PlanError::NotAMeetingState(..))));
        let solo = line(&[0.0], vec![(vec![1], vec![1])], &[1]);
        let p = planner(&solo, 1).plan_prefix(&[l(1)]).unwrap();
        assert_eq!(p.meeting_point, l(1));
    }

    #[test]
    fn invalid_start_is_rejected() {
        let net = line(&[0.0, 4.0], vec![(vec![1, 2], vec![1, 2])], &[1, 2]);
        assert!(matches!(planner(&net, 1).plan_prefix(&[l(1)]), Err(PlanError::InvalidInitialState(..))));
    }
}
