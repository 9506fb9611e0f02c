//! Büchi automaton for "the team meets infinitely often" and its product
//! with a team's transition system.
//!
//! The team formula is always `□◇ meet_m`, where `meet_m` holds when every
//! member stands on one common communication point of the team. Its
//! automaton is fixed and built by hand:
//!
//! ```text
//!         true              meet
//!        ┌────┐   meet    ┌────┐
//!        │    ▼ ────────▶ │    ▼
//!   ──▶  q0 (init)        q1 (accepting)
//!             ◀────────
//!               true
//! ```
//!
//! Transitions carry guards that are evaluated on labels, so the alphabet
//! `2^AP` is never enumerated.

use std::collections::HashSet;
use std::hash::Hash;

use crate::ids::{LocationId, RobotId, TeamId};
use crate::network::{Network, Team};
use crate::ts::{Label, Proposition, Successors, Wpts};

/// `∨_{ℓ ∈ C_m} ∧_{i ∈ T_m} π_i^ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeetPredicate {
    pub team: TeamId,
    pub members: Vec<RobotId>,
    pub points: Vec<LocationId>,
}

impl MeetPredicate {
    pub fn new(team: &Team) -> Self {
        Self { team: team.id, members: team.members.clone(), points: team.comm_points.clone() }
    }

    pub fn holds(&self, label: &Label) -> bool {
        self.points
            .iter()
            .any(|&location| self.members.iter().all(|&robot| label.contains(&Proposition { robot, location })))
    }

    /// Common communication point of a joint state given in member order.
    pub fn meeting_point(&self, joint: &[LocationId]) -> Option<LocationId> {
        let first = *joint.first()?;
        (joint.iter().all(|&l| l == first) && self.points.binary_search(&first).is_ok()).then_some(first)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guard {
    True,
    Meet,
}

impl Guard {
    pub fn enabled(self, meet: bool) -> bool {
        match self {
            Guard::True => true,
            Guard::Meet => meet,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nba {
    predicate: MeetPredicate,
    num_states: usize,
    initial: Vec<usize>,
    accepting: Vec<bool>,
    transitions: Vec<(usize, Guard, usize)>,
}

impl Nba {
    /// The two-state automaton for `□◇ predicate`.
    pub fn infinitely_often(predicate: MeetPredicate) -> Self {
        Self {
            predicate,
            num_states: 2,
            initial: vec![0],
            accepting: vec![false, true],
            transitions: vec![(0, Guard::True, 0), (0, Guard::Meet, 1), (1, Guard::True, 0), (1, Guard::Meet, 1)],
        }
    }

    pub fn predicate(&self) -> &MeetPredicate {
        &self.predicate
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial_states(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn transitions(&self) -> &[(usize, Guard, usize)] {
        &self.transitions
    }

    /// Successors of `state` when the meet predicate evaluates to `meet`.
    pub fn step(&self, state: usize, meet: bool) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .iter()
            .filter(move |&&(from, guard, _)| from == state && guard.enabled(meet))
            .map(|&(_, _, to)| to)
    }

    pub fn successors(&self, state: usize, letter: &Label) -> Vec<usize> {
        self.step(state, self.predicate.holds(letter)).collect()
    }

    /// Whether the automaton accepts the ultimately periodic word
    /// `prefix cycle^ω`. `cycle` must be nonempty.
    pub fn accepts_lasso(&self, prefix: &[Label], cycle: &[Label]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let len = prefix.len() + cycle.len();
        let letter = |pos: usize| if pos < prefix.len() { &prefix[pos] } else { &cycle[pos - prefix.len()] };
        let meets: Vec<bool> = (0..len).map(|pos| self.predicate.holds(letter(pos))).collect();
        let succ = |(state, pos): (usize, usize)| {
            let next = if pos + 1 == len { prefix.len() } else { pos + 1 };
            self.step(state, meets[pos]).map(|s| (s, next)).collect::<Vec<_>>()
        };
        let inits: Vec<(usize, usize)> = self.initial.iter().map(|&s| (s, 0)).collect();
        nested_dfs(&inits, succ, |(state, _)| self.accepting[state]).is_some()
    }
}

pub fn build_team_nba(net: &Network, team: TeamId) -> Nba {
    Nba::infinitely_often(MeetPredicate::new(net.team(team)))
}

/// Nested depth-first search for a reachable accepting cycle. Returns the
/// stem (from an initial node up to the accepting seed) and the cycle (from
/// the seed back to it, both ends included).
pub fn nested_dfs<N, S, A>(inits: &[N], succ: S, accepting: A) -> Option<(Vec<N>, Vec<N>)>
where
    N: Copy + Eq + Hash,
    S: Fn(N) -> Vec<N>,
    A: Fn(N) -> bool,
{
    let mut outer_seen: HashSet<N> = HashSet::new();
    let mut inner_seen: HashSet<N> = HashSet::new();
    for &init in inits {
        if !outer_seen.insert(init) {
            continue;
        }
        let mut stack: Vec<(N, Vec<N>, usize)> = vec![(init, succ(init), 0)];
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let next = top.1[top.2];
                top.2 += 1;
                if outer_seen.insert(next) {
                    stack.push((next, succ(next), 0));
                }
                continue;
            }
            let (node, _, _) = stack.pop().expect("nonempty");
            if accepting(node) {
                if let Some(cycle) = inner_search(node, &succ, &mut inner_seen) {
                    let mut stem: Vec<N> = stack.iter().map(|(n, _, _)| *n).collect();
                    stem.push(node);
                    return Some((stem, cycle));
                }
            }
        }
    }
    None
}

fn inner_search<N, S>(seed: N, succ: &S, seen: &mut HashSet<N>) -> Option<Vec<N>>
where
    N: Copy + Eq + Hash,
    S: Fn(N) -> Vec<N>,
{
    let mut stack: Vec<(N, Vec<N>, usize)> = vec![(seed, succ(seed), 0)];
    while let Some(top) = stack.last_mut() {
        if top.2 < top.1.len() {
            let next = top.1[top.2];
            top.2 += 1;
            if next == seed {
                let mut cycle: Vec<N> = stack.iter().map(|(n, _, _)| *n).collect();
                cycle.push(seed);
                return Some(cycle);
            }
            if seen.insert(next) {
                stack.push((next, succ(next), 0));
            }
            continue;
        }
        stack.pop();
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PbaState {
    /// Joint-state code of the team product.
    pub joint: usize,
    pub buchi: usize,
}

/// Product of a team's transition system with its automaton, explored on
/// demand. Edge weights are those of the team product.
#[derive(Clone, Debug)]
pub struct Pba {
    wpts: Wpts,
    nba: Nba,
    /// Codes of joint states that satisfy the meet predicate, with their point.
    meeting_codes: Vec<(usize, LocationId)>,
}

pub fn build_pba(wpts: Wpts, nba: Nba) -> Pba {
    let k = wpts.factors().len();
    let mut meeting_codes: Vec<(usize, LocationId)> =
        nba.predicate().points.iter().filter_map(|&l| wpts.encode(&vec![l; k]).map(|code| (code, l))).collect();
    meeting_codes.sort();
    Pba { wpts, nba, meeting_codes }
}

impl Pba {
    pub fn wpts(&self) -> &Wpts {
        &self.wpts
    }

    pub fn nba(&self) -> &Nba {
        &self.nba
    }

    pub fn team(&self) -> TeamId {
        self.wpts.team()
    }

    /// Joint states where the team is co-located at one of its points.
    pub fn meeting_codes(&self) -> &[(usize, LocationId)] {
        &self.meeting_codes
    }

    pub fn meeting_point(&self, joint_code: usize) -> Option<LocationId> {
        self.meeting_codes.binary_search_by_key(&joint_code, |&(c, _)| c).ok().map(|k| self.meeting_codes[k].1)
    }

    pub fn num_states(&self) -> usize {
        self.wpts.num_states() * self.nba.num_states()
    }

    pub fn id(&self, state: PbaState) -> usize {
        state.joint * self.nba.num_states() + state.buchi
    }

    pub fn state(&self, id: usize) -> PbaState {
        PbaState { joint: id / self.nba.num_states(), buchi: id % self.nba.num_states() }
    }

    /// `q^0 × Q_B^0` for the given joint start (member order).
    pub fn initial_states(&self, joint: &[LocationId]) -> Option<Vec<PbaState>> {
        let code = self.wpts.encode(joint)?;
        Some(self.nba.initial_states().iter().map(|&b| PbaState { joint: code, buchi: b }).collect())
    }

    pub fn is_accepting(&self, state: PbaState) -> bool {
        self.nba.is_accepting(state.buchi)
    }

    /// Product successors: a team move paired with every automaton move
    /// enabled by the label of the team's next state.
    pub fn successors(&self, state: PbaState) -> PbaSuccessors<'_> {
        PbaSuccessors { pba: self, buchi: state.buchi, inner: self.wpts.successors(state.joint), pending: Vec::new() }
    }
}

pub struct PbaSuccessors<'a> {
    pba: &'a Pba,
    buchi: usize,
    inner: Successors<'a>,
    pending: Vec<(PbaState, f64)>,
}

impl Iterator for PbaSuccessors<'_> {
    type Item = (PbaState, f64);

    fn next(&mut self) -> Option<(PbaState, f64)> {
        loop {
            if let Some(item) = self.pending.pop() {
                return Some(item);
            }
            let (code, weight) = self.inner.next()?;
            let meet = self.pba.meeting_point(code).is_some();
            let mut next: Vec<(PbaState, f64)> =
                self.pba.nba.step(self.buchi, meet).map(|b| (PbaState { joint: code, buchi: b }, weight)).collect();
            next.reverse();
            self.pending = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(robot: usize, location: usize) -> Proposition {
        Proposition { robot: RobotId(robot), location: LocationId(location) }
    }

    fn pair_predicate() -> MeetPredicate {
        MeetPredicate { team: TeamId(1), members: vec![RobotId(1), RobotId(2)], points: vec![LocationId(1)] }
    }

    #[test]
    fn predicate_on_labels_and_joint_states() {
        let pred = MeetPredicate {
            team: TeamId(1),
            members: vec![RobotId(1), RobotId(2)],
            points: vec![LocationId(3), LocationId(5)],
        };
        assert!(pred.holds(&Label::from([p(1, 5), p(2, 5)])));
        assert!(!pred.holds(&Label::from([p(1, 5), p(2, 3)])));
        assert!(!pred.holds(&Label::from([p(1, 4), p(2, 4)])));
        assert_eq!(pred.meeting_point(&[LocationId(3), LocationId(3)]), Some(LocationId(3)));
        assert_eq!(pred.meeting_point(&[LocationId(4), LocationId(4)]), None);
    }

    #[test]
    fn never_blocks() {
        let nba = Nba::infinitely_often(pair_predicate());
        for s in 0..nba.num_states() {
            for meet in [false, true] {
                assert!(nba.step(s, meet).next().is_some());
            }
        }
    }

    #[test]
    fn gf_semantics_on_simple_words() {
        let nba = Nba::infinitely_often(pair_predicate());
        let meet = Label::from([p(1, 1), p(2, 1)]);
        let idle = Label::from([p(1, 1)]);
        assert!(nba.accepts_lasso(&[], &[meet.clone(), idle.clone(), idle.clone()]));
        assert!(nba.accepts_lasso(std::slice::from_ref(&idle), &[idle.clone(), meet.clone()]));
        assert!(!nba.accepts_lasso(&[meet.clone(), meet.clone()], std::slice::from_ref(&idle)));
        assert!(!nba.accepts_lasso(&[], &[Label::new()]));
    }

    #[test]
    fn nested_dfs_finds_cycles() {
        // 0 -> 1 -> 2 -> 1, accepting {2}
        let succ = |n: u32| match n {
            0 => vec![1],
            1 => vec![2],
            2 => vec![1],
            _ => vec![],
        };
        let (stem, cycle) = nested_dfs(&[0], succ, |n| n == 2).unwrap();
        assert_eq!(stem, vec![0, 1, 2]);
        assert_eq!(cycle, vec![2, 1, 2]);
        // accepting node not on any cycle
        let succ = |n: u32| match n {
            0 => vec![1, 2],
            1 => vec![1],
            _ => vec![],
        };
        assert!(nested_dfs(&[0], succ, |n| n == 2).is_none());
    }
}
