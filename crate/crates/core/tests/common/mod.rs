//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use icomm_core::config::Config;
use icomm_core::gen::{generate, GenOptions};
use icomm_core::{LocationId, Network, TeamId, GOLDEN_CONFIG};

pub fn golden() -> Network {
    Network::from_config(&Config::from_json(GOLDEN_CONFIG).unwrap()).unwrap()
}

pub fn random(seed: u64, robots: usize, teams: usize, locations: usize) -> Network {
    Network::from_config(&generate(seed, &GenOptions::new(robots, teams, locations)).unwrap()).unwrap()
}

/// All-pairs shortest path lengths.
pub fn floyd_warshall(net: &Network) -> Vec<Vec<f64>> {
    let n = net.graph().len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in net.graph().edges() {
        let (a, b) = (e.a.index(), e.b.index());
        d[a][b] = d[a][b].min(e.weight);
        d[b][a] = d[b][a].min(e.weight);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }

    pub fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Cheapest joint path from `start` to a state where the whole team stands on
/// one communication point, found by enumerating every joint path with at
/// most `max_states` states over the members' own state sets.
pub fn brute_force_prefix(net: &Network, team: TeamId, start: &[LocationId], max_states: usize) -> f64 {
    let d = floyd_warshall(net);
    let t = net.team(team);
    let spaces: Vec<Vec<LocationId>> = t.members.iter().map(|&i| net.own_comm_points(i)).collect();
    let meets = |joint: &[LocationId]| joint.iter().all(|&q| q == joint[0]) && t.comm_points.contains(&joint[0]);
    let mut best = f64::INFINITY;
    let mut frontier: Vec<(Vec<LocationId>, f64)> = vec![(start.to_vec(), 0.0)];
    // a path of one state only counts if the next step is taken
    for _ in 1..max_states {
        let mut next = Vec::new();
        for (joint, cost) in &frontier {
            for succ in cartesian(&spaces) {
                let step: f64 = joint.iter().zip(&succ).map(|(a, b)| d[a.index()][b.index()]).sum();
                let c = cost + step;
                if meets(&succ) {
                    best = best.min(c);
                }
                next.push((succ, c));
            }
        }
        frontier = next;
    }
    best
}

pub fn cartesian(spaces: &[Vec<LocationId>]) -> Vec<Vec<LocationId>> {
    spaces.iter().fold(vec![Vec::new()], |acc, space| {
        acc.iter()
            .flat_map(|prefix| {
                space.iter().map(move |&q| {
                    let mut v = prefix.clone();
                    v.push(q);
                    v
                })
            })
            .collect()
    })
}

/// Smallest number of colors in a proper coloring, by exhaustive search.
pub fn chromatic_number(n: usize, edges: &[(usize, usize)]) -> usize {
    fn colorable(k: usize, v: usize, colors: &mut Vec<usize>, adj: &[Vec<usize>]) -> bool {
        if v == colors.len() {
            return true;
        }
        for c in 0..k {
            if adj[v].iter().all(|&u| u >= v || colors[u] != c) {
                colors[v] = c;
                if colorable(k, v + 1, colors, adj) {
                    return true;
                }
            }
        }
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (1..=n.max(1)).find(|&k| colorable(k, 0, &mut vec![0; n], &adj)).unwrap_or(0)
}

/// Outcome of running an automaton over every lasso word with
/// `prefix + cycle <= max_len` over the four letters built from two
/// propositions.
pub struct LassoSweep {
    pub words: usize,
    pub mismatches: Vec<String>,
}

/// `conjunction` decides the shape of the predicate: two members on one point make
/// it a conjunction, one member with two points a disjunction.
pub fn lasso_sweep(conjunction: bool, max_len: usize) -> LassoSweep {
    use icomm_core::buchi::{MeetPredicate, Nba};
    use icomm_core::network::Team;
    use icomm_core::ts::{Label, Proposition};
    use icomm_core::RobotId;

    let (team, props) = if conjunction {
        let at = LocationId(1);
        let team = Team { id: TeamId(1), members: vec![RobotId(1), RobotId(2)], comm_points: vec![at] };
        let props = [Proposition { robot: RobotId(1), location: at }, Proposition { robot: RobotId(2), location: at }];
        (team, props)
    } else {
        let team = Team { id: TeamId(1), members: vec![RobotId(1)], comm_points: vec![LocationId(1), LocationId(2)] };
        let props = [
            Proposition { robot: RobotId(1), location: LocationId(1) },
            Proposition { robot: RobotId(1), location: LocationId(2) },
        ];
        (team, props)
    };
    let nba = Nba::infinitely_often(MeetPredicate::new(&team));
    let label = |bits: usize| -> Label { (0..2).filter(|b| bits >> b & 1 == 1).map(|b| props[b]).collect() };
    let holds = |bits: usize| if conjunction { bits == 3 } else { bits != 0 };
    let words_of = |len: usize| -> Vec<Vec<usize>> {
        (0..4usize.pow(len as u32)).map(|code| (0..len).map(|k| code / 4usize.pow(k as u32) % 4).collect()).collect()
    };

    let mut sweep = LassoSweep { words: 0, mismatches: Vec::new() };
    for cycle_len in 1..=max_len {
        for prefix_len in 0..=max_len - cycle_len {
            for prefix in words_of(prefix_len) {
                for cycle in words_of(cycle_len) {
                    let expected = cycle.iter().any(|&b| holds(b));
                    let p: Vec<Label> = prefix.iter().map(|&b| label(b)).collect();
                    let c: Vec<Label> = cycle.iter().map(|&b| label(b)).collect();
                    sweep.words += 1;
                    if nba.accepts_lasso(&p, &c) != expected {
                        sweep.mismatches.push(format!("{prefix:?} ({cycle:?})^w"));
                    }
                }
            }
        }
    }
    sweep
}
