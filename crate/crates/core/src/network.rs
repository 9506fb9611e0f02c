//! Mobility graph, robot teams and the derived team graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::config::Config;
use crate::ids::{LocationId, RobotId, TeamId};
use crate::search::{Entry, Frontier, Label};
use crate::EPS;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NetworkError {
    #[error("location ids must be contiguous from 1 (found {found} at position {position})")]
    NonContiguousLocation { position: usize, found: usize },
    #[error("location {0} has coordinates of dimension {1}, expected {2}")]
    DimensionMismatch(LocationId, usize, usize),
    #[error("location {0} has no coordinates")]
    EmptyCoordinates(LocationId),
    #[error("unknown location {0}")]
    UnknownLocation(LocationId),
    #[error("unknown robot {0}")]
    UnknownRobot(RobotId),
    #[error("self-loop at {0}")]
    SelfLoop(LocationId),
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NonPositiveWeight(LocationId, LocationId, f64),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(LocationId, LocationId),
    #[error("mobility graph is empty")]
    EmptyMobilityGraph,
    #[error("mobility graph is disconnected")]
    DisconnectedMobilityGraph,
    #[error("no teams defined")]
    NoTeams,
    #[error("no robots defined")]
    NoRobots,
    #[error("team {0} has no members")]
    EmptyTeam(TeamId),
    #[error("team {0} has no communication points")]
    EmptyCommSet(TeamId),
    #[error("robot {0} belongs to no team")]
    UnassignedRobot(RobotId),
    #[error("robot {0} has non-positive speed {1}")]
    NonPositiveSpeed(RobotId, f64),
    #[error("team graph is disconnected")]
    DisconnectedTeamGraph,
}

/// Every problem found while validating a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics(pub Vec<NetworkError>);

impl Diagnostics {
    pub fn contains(&self, error: &NetworkError) -> bool {
        self.0.contains(error)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, error) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "error: {error}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub id: LocationId,
    pub position: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: LocationId,
    pub b: LocationId,
    pub weight: f64,
}

/// Shortest path between two locations.
#[derive(Clone, Debug, PartialEq)]
pub struct Geodesic {
    pub length: f64,
    pub path: Vec<LocationId>,
}

#[derive(Clone, Debug)]
pub struct MobilityGraph {
    locations: Vec<Location>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl MobilityGraph {
    /// Builds the graph; a missing edge weight defaults to the Euclidean
    /// distance between the endpoints.
    pub fn new(locations: Vec<Location>, edges: &[(LocationId, LocationId, Option<f64>)]) -> Result<Self, Diagnostics> {
        let mut errors = Vec::new();
        let dim = locations.first().map(|l| l.position.len()).unwrap_or(0);
        for (position, location) in locations.iter().enumerate() {
            if location.id.0 != position + 1 {
                errors.push(NetworkError::NonContiguousLocation { position: position + 1, found: location.id.0 });
            }
            if location.position.is_empty() {
                errors.push(NetworkError::EmptyCoordinates(location.id));
            } else if location.position.len() != dim {
                errors.push(NetworkError::DimensionMismatch(location.id, location.position.len(), dim));
            }
        }
        if locations.is_empty() {
            errors.push(NetworkError::EmptyMobilityGraph);
        }
        if !errors.is_empty() {
            return Err(Diagnostics(errors));
        }

        let n = locations.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b, weight) in edges {
            let mut bad = false;
            for end in [a, b] {
                if end.0 == 0 || end.0 > n {
                    errors.push(NetworkError::UnknownLocation(end));
                    bad = true;
                }
            }
            if bad {
                continue;
            }
            if a == b {
                errors.push(NetworkError::SelfLoop(a));
                continue;
            }
            let weight =
                weight.unwrap_or_else(|| euclidean(&locations[a.index()].position, &locations[b.index()].position));
            if weight <= 0.0 || !weight.is_finite() {
                errors.push(NetworkError::NonPositiveWeight(a, b, weight));
                continue;
            }
            if !seen.insert((a.min(b), a.max(b))) {
                errors.push(NetworkError::DuplicateEdge(a, b));
                continue;
            }
            adjacency[a.index()].push((b.index(), weight));
            adjacency[b.index()].push((a.index(), weight));
            out.push(Edge { a, b, weight });
        }
        if !errors.is_empty() {
            return Err(Diagnostics(errors));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Self { locations, edges: out, adjacency })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, id: LocationId) -> &Location {
        &self.locations[id.index()]
    }

    pub fn position(&self, id: LocationId) -> &[f64] {
        &self.locations[id.index()].position
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, id: LocationId) -> bool {
        id.0 >= 1 && id.0 <= self.len()
    }

    /// Breadth-first reachability from location 1.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.len()
    }

    /// Single-source shortest paths; returns distances and predecessors.
    fn shortest_paths_from(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let mut labels = vec![Label::UNSEEN; self.len()];
        labels[source] = Label { cost: 0.0, hops: 0, pred: usize::MAX, settled: false };
        let mut heap = Frontier::new();
        heap.push(Entry { priority: 0.0, hops: 0, node: source });
        while let Some(Entry { node: u, .. }) = heap.pop() {
            if labels[u].settled {
                continue;
            }
            labels[u].settled = true;
            let (cost, hops) = (labels[u].cost, labels[u].hops);
            for &(v, w) in &self.adjacency[u] {
                if labels[v].improved_by(cost + w, hops + 1, u, EPS) {
                    labels[v] = Label { cost: cost + w, hops: hops + 1, pred: u, settled: false };
                    heap.push(Entry { priority: cost + w, hops: hops + 1, node: v });
                }
            }
        }
        (labels.iter().map(|l| l.cost).collect(), labels.iter().map(|l| l.pred).collect())
    }

    /// Minimum-weight path from `a` to `b`. Unreachable targets yield an
    /// infinite length and an empty path.
    pub fn geodesic(&self, a: LocationId, b: LocationId) -> Geodesic {
        let (dist, pred) = self.shortest_paths_from(a.index());
        trace_back(&dist, &pred, a.index(), b.index())
    }
}

fn trace_back(dist: &[f64], pred: &[usize], source: usize, target: usize) -> Geodesic {
    if !dist[target].is_finite() {
        return Geodesic { length: f64::INFINITY, path: Vec::new() };
    }
    let mut path = vec![LocationId::from_index(target)];
    let mut at = target;
    while at != source {
        at = pred[at];
        path.push(LocationId::from_index(at));
    }
    path.reverse();
    Geodesic { length: dist[target], path }
}

/// All-pairs geodesics of a connected mobility graph.
#[derive(Clone, Debug)]
pub struct GeodesicTable {
    dist: Vec<Vec<f64>>,
    pred: Vec<Vec<usize>>,
}

impl GeodesicTable {
    pub fn new(graph: &MobilityGraph) -> Self {
        let (dist, pred) = (0..graph.len()).map(|s| graph.shortest_paths_from(s)).unzip();
        Self { dist, pred }
    }

    pub fn length(&self, a: LocationId, b: LocationId) -> f64 {
        self.dist[a.index()][b.index()]
    }

    pub fn path(&self, a: LocationId, b: LocationId) -> Vec<LocationId> {
        trace_back(&self.dist[a.index()], &self.pred[a.index()], a.index(), b.index()).path
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Team {
    pub id: TeamId,
    /// Sorted, deduplicated member ids.
    pub members: Vec<RobotId>,
    /// Sorted, deduplicated communication points.
    pub comm_points: Vec<LocationId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Robot {
    pub id: RobotId,
    pub start: LocationId,
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeamStructure {
    pub teams: Vec<Team>,
    pub robots: Vec<Robot>,
}

impl TeamStructure {
    /// Numbers teams and robots from 1 in the given order.
    pub fn new(teams: Vec<(Vec<RobotId>, Vec<LocationId>)>, robots: Vec<(LocationId, f64)>) -> Self {
        let teams = teams
            .into_iter()
            .enumerate()
            .map(|(m, (mut members, mut comm_points))| {
                members.sort();
                members.dedup();
                comm_points.sort();
                comm_points.dedup();
                Team { id: TeamId::from_index(m), members, comm_points }
            })
            .collect();
        let robots = robots
            .into_iter()
            .enumerate()
            .map(|(i, (start, speed))| Robot { id: RobotId::from_index(i), start, speed })
            .collect();
        Self { teams, robots }
    }

    pub fn team(&self, id: TeamId) -> &Team {
        &self.teams[id.index()]
    }

    pub fn robot(&self, id: RobotId) -> &Robot {
        &self.robots[id.index()]
    }

    pub fn num_teams(&self) -> usize {
        self.teams.len()
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }
}

/// Graph over teams with an edge wherever two teams share a robot.
#[derive(Clone, Debug, PartialEq)]
pub struct TeamGraph {
    edges: Vec<(TeamId, TeamId)>,
    neighbors: Vec<Vec<TeamId>>,
    robot_teams: Vec<Vec<TeamId>>,
    robot_neighbors: Vec<Vec<RobotId>>,
}

impl TeamGraph {
    pub fn num_teams(&self) -> usize {
        self.neighbors.len()
    }

    /// Edges `(m, n)` with `m < n`, sorted.
    pub fn edges(&self) -> &[(TeamId, TeamId)] {
        &self.edges
    }

    /// Neighbouring teams of `m`, sorted.
    pub fn neighbors(&self, m: TeamId) -> &[TeamId] {
        &self.neighbors[m.index()]
    }

    pub fn degree(&self, m: TeamId) -> usize {
        self.neighbors[m.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn are_adjacent(&self, m: TeamId, n: TeamId) -> bool {
        self.neighbors[m.index()].binary_search(&n).is_ok()
    }

    /// Teams robot `i` belongs to.
    pub fn teams_of(&self, i: RobotId) -> &[TeamId] {
        &self.robot_teams[i.index()]
    }

    /// Robots sharing at least one team with `i`, excluding `i`.
    pub fn robot_neighbors(&self, i: RobotId) -> &[RobotId] {
        &self.robot_neighbors[i.index()]
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_teams();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in &self.neighbors[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    stack.push(v.index());
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

pub fn build_team_graph(teams: &TeamStructure) -> TeamGraph {
    let m = teams.num_teams();
    let n = teams.num_robots();
    let mut robot_teams = vec![Vec::new(); n];
    for team in &teams.teams {
        for &i in &team.members {
            if i.0 >= 1 && i.0 <= n {
                robot_teams[i.index()].push(team.id);
            }
        }
    }
    let mut edges = Vec::new();
    let mut neighbors = vec![Vec::new(); m];
    for a in 0..m {
        for b in a + 1..m {
            let shared = teams.teams[a].members.iter().any(|i| teams.teams[b].members.binary_search(i).is_ok());
            if shared {
                let (ta, tb) = (TeamId::from_index(a), TeamId::from_index(b));
                edges.push((ta, tb));
                neighbors[a].push(tb);
                neighbors[b].push(ta);
            }
        }
    }
    let robot_neighbors = (0..n)
        .map(|i| {
            let me = RobotId::from_index(i);
            let set: BTreeSet<RobotId> = robot_teams[i]
                .iter()
                .flat_map(|t: &TeamId| teams.teams[t.index()].members.iter().copied())
                .filter(|&j| j != me)
                .collect();
            set.into_iter().collect()
        })
        .collect();
    TeamGraph { edges, neighbors, robot_teams, robot_neighbors }
}

/// A route a robot would take between two of its own states that passes
/// through a communication point of a team it does not belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct ForeignPassage {
    pub robot: RobotId,
    pub from: LocationId,
    pub to: LocationId,
    pub via: LocationId,
}

impl fmt::Display for ForeignPassage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "robot {} travelling {} -> {} passes foreign communication point {}",
            self.robot, self.from, self.to, self.via
        )
    }
}

/// Validated network: immutable after construction.
#[derive(Clone, Debug)]
pub struct Network {
    graph: MobilityGraph,
    teams: TeamStructure,
    team_graph: TeamGraph,
    geodesics: GeodesicTable,
    foreign_passages: Vec<ForeignPassage>,
}

pub fn validate_network(graph: MobilityGraph, teams: TeamStructure) -> Result<Network, Diagnostics> {
    let mut errors = Vec::new();
    if !graph.is_connected() {
        errors.push(NetworkError::DisconnectedMobilityGraph);
    }
    if teams.teams.is_empty() {
        errors.push(NetworkError::NoTeams);
    }
    if teams.robots.is_empty() {
        errors.push(NetworkError::NoRobots);
    }
    let n = teams.num_robots();
    for team in &teams.teams {
        if team.members.is_empty() {
            errors.push(NetworkError::EmptyTeam(team.id));
        }
        if team.comm_points.is_empty() {
            errors.push(NetworkError::EmptyCommSet(team.id));
        }
        for &i in &team.members {
            if i.0 == 0 || i.0 > n {
                errors.push(NetworkError::UnknownRobot(i));
            }
        }
        for &l in &team.comm_points {
            if !graph.contains(l) {
                errors.push(NetworkError::UnknownLocation(l));
            }
        }
    }
    for robot in &teams.robots {
        if !graph.contains(robot.start) {
            errors.push(NetworkError::UnknownLocation(robot.start));
        }
        if robot.speed <= 0.0 || !robot.speed.is_finite() {
            errors.push(NetworkError::NonPositiveSpeed(robot.id, robot.speed));
        }
    }
    let team_graph = build_team_graph(&teams);
    for robot in &teams.robots {
        if team_graph.teams_of(robot.id).is_empty() {
            errors.push(NetworkError::UnassignedRobot(robot.id));
        }
    }
    if !teams.teams.is_empty() && !team_graph.is_connected() {
        errors.push(NetworkError::DisconnectedTeamGraph);
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    let geodesics = GeodesicTable::new(&graph);
    let mut network = Network { graph, teams, team_graph, geodesics, foreign_passages: Vec::new() };
    network.foreign_passages = network.find_foreign_passages();
    Ok(network)
}

impl Network {
    pub fn from_config(config: &Config) -> Result<Self, Diagnostics> {
        let locations =
            config.locations.iter().map(|l| Location { id: LocationId(l.id), position: l.coords.clone() }).collect();
        let edges: Vec<_> = config.edges.iter().map(|e| (LocationId(e.i), LocationId(e.j), e.weight)).collect();
        let graph = MobilityGraph::new(locations, &edges)?;
        let teams = TeamStructure::new(
            config
                .teams
                .iter()
                .map(|t| {
                    (
                        t.members.iter().map(|&i| RobotId(i)).collect(),
                        t.comm_points.iter().map(|&l| LocationId(l)).collect(),
                    )
                })
                .collect(),
            config.robots.iter().map(|r| (LocationId(r.start), r.speed)).collect(),
        );
        validate_network(graph, teams)
    }

    pub fn graph(&self) -> &MobilityGraph {
        &self.graph
    }

    pub fn teams(&self) -> &TeamStructure {
        &self.teams
    }

    pub fn team(&self, m: TeamId) -> &Team {
        self.teams.team(m)
    }

    pub fn robot(&self, i: RobotId) -> &Robot {
        self.teams.robot(i)
    }

    pub fn team_graph(&self) -> &TeamGraph {
        &self.team_graph
    }

    pub fn num_robots(&self) -> usize {
        self.teams.num_robots()
    }

    pub fn num_teams(&self) -> usize {
        self.teams.num_teams()
    }

    pub fn robot_ids(&self) -> impl Iterator<Item = RobotId> {
        (0..self.num_robots()).map(RobotId::from_index)
    }

    pub fn team_ids(&self) -> impl Iterator<Item = TeamId> {
        (0..self.num_teams()).map(TeamId::from_index)
    }

    pub fn geodesic(&self, a: LocationId, b: LocationId) -> Geodesic {
        Geodesic { length: self.geodesics.length(a, b), path: self.geodesics.path(a, b) }
    }

    pub fn distance(&self, a: LocationId, b: LocationId) -> f64 {
        self.geodesics.length(a, b)
    }

    /// Union of the communication sets of the teams robot `i` belongs to.
    pub fn own_comm_points(&self, i: RobotId) -> Vec<LocationId> {
        let set: BTreeSet<LocationId> =
            self.team_graph.teams_of(i).iter().flat_map(|&m| self.team(m).comm_points.iter().copied()).collect();
        set.into_iter().collect()
    }

    pub fn all_comm_points(&self) -> Vec<LocationId> {
        let set: BTreeSet<LocationId> = self.teams.teams.iter().flat_map(|t| t.comm_points.iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Routes that break the "own states are reachable without crossing
    /// foreign communication points" assumption. Empty when it holds.
    pub fn foreign_passages(&self) -> &[ForeignPassage] {
        &self.foreign_passages
    }

    fn find_foreign_passages(&self) -> Vec<ForeignPassage> {
        let all = self.all_comm_points();
        let mut found = Vec::new();
        for i in self.robot_ids() {
            let own = self.own_comm_points(i);
            for &from in &own {
                for &to in &own {
                    if from >= to {
                        continue;
                    }
                    let path = self.geodesics.path(from, to);
                    let interior = &path[1..path.len() - 1];
                    if let Some(&via) =
                        interior.iter().find(|l| all.binary_search(l).is_ok() && own.binary_search(l).is_err())
                    {
                        found.push(ForeignPassage { robot: i, from, to, via });
                    }
                }
            }
        }
        found
    }
}
