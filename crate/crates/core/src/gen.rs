//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, EdgeSpec, LocationSpec, RobotSpec, TeamSpec};
use crate::network::Network;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GenError {
    #[error("infeasible sizes: {0}")]
    SizeInfeasible(String),
    #[error("no valid instance after {0} attempts")]
    Exhausted(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenOptions {
    pub robots: usize,
    pub teams: usize,
    pub locations: usize,
    pub max_team_size: usize,
    /// Largest communication set; defaults to `locations`.
    pub max_comm_points: Option<usize>,
    /// Probability of each non-tree edge of the mobility graph.
    pub edge_probability: f64,
    /// Speeds are drawn from this range.
    pub speed: (f64, f64),
    pub max_attempts: usize,
}

impl GenOptions {
    pub fn new(robots: usize, teams: usize, locations: usize) -> Self {
        Self {
            robots,
            teams,
            locations,
            max_team_size: 3,
            max_comm_points: None,
            edge_probability: 0.3,
            speed: (1.0, 1.0),
            max_attempts: 1000,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let infeasible = |why: &str| Err(GenError::SizeInfeasible(why.to_string()));
        if self.locations == 0 {
            return infeasible("at least one location is required");
        }
        if self.robots == 0 || self.teams == 0 {
            return infeasible("at least one robot and one team are required");
        }
        if self.max_team_size == 0 || self.max_comm_points == Some(0) {
            return infeasible("teams and communication sets must be nonempty");
        }
        // the first team covers up to s robots, every later one at most s - 1 new ones
        let s = self.max_team_size.min(self.robots);
        if self.robots > s + (self.teams - 1) * (s - 1) {
            return infeasible("too few teams to cover every robot with a connected team graph");
        }
        if !(self.speed.0 > 0.0 && self.speed.0 <= self.speed.1) {
            return infeasible("speed range must be positive and ordered");
        }
        Ok(())
    }
}

/// Random valid instance. Locations are points in `[0, 100]^2` joined by a
/// random spanning tree plus extra edges; teams are grown so that each one
/// shares a robot with an earlier one and every robot is covered. Candidates
/// failing validation are redrawn.
pub fn generate(seed: u64, options: &GenOptions) -> Result<Config, GenError> {
    options.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..options.max_attempts {
        let config = draw(&mut rng, options);
        if Network::from_config(&config).is_ok() {
            return Ok(config);
        }
    }
    Err(GenError::Exhausted(options.max_attempts))
}

fn draw(rng: &mut ChaCha8Rng, o: &GenOptions) -> Config {
    let locations = (1..=o.locations)
        .map(|id| LocationSpec { id, coords: vec![rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)] })
        .collect();
    let mut edges = Vec::new();
    for j in 2..=o.locations {
        edges.push(EdgeSpec { i: rng.gen_range(1..j), j, weight: None });
    }
    for i in 1..=o.locations {
        for j in i + 1..=o.locations {
            if !edges.iter().any(|e| e.i == i && e.j == j) && rng.gen_bool(o.edge_probability) {
                edges.push(EdgeSpec { i, j, weight: None });
            }
        }
    }

    let s = o.max_team_size.min(o.robots);
    let mut uncovered: Vec<usize> = (1..=o.robots).collect();
    uncovered.shuffle(rng);
    let mut covered: Vec<usize> = Vec::new();
    let mut member_sets: Vec<Vec<usize>> = Vec::new();
    for m in 0..o.teams {
        let later = o.teams - m - 1;
        let mut members = Vec::new();
        if m > 0 {
            members.push(*covered.choose(rng).expect("earlier teams cover someone"));
        }
        let room = s - members.len();
        let needed = uncovered.len().saturating_sub(later * (s - 1));
        let fresh = rng.gen_range(needed.min(room)..=room.min(uncovered.len()));
        let fresh = if members.is_empty() { fresh.max(1) } else { fresh };
        for _ in 0..fresh {
            let r = uncovered.pop().expect("counted");
            members.push(r);
            covered.push(r);
        }
        // optionally add robots that are already covered
        let extra = rng.gen_range(0..=s - members.len());
        for _ in 0..extra {
            let r = *covered.choose(rng).expect("nonempty");
            if !members.contains(&r) {
                members.push(r);
            }
        }
        members.sort_unstable();
        member_sets.push(members);
    }

    let pool = o.max_comm_points.unwrap_or(o.locations).min(o.locations);
    let all: Vec<usize> = (1..=o.locations).collect();
    let teams: Vec<TeamSpec> = member_sets
        .into_iter()
        .map(|members| {
            let k = rng.gen_range(1..=pool);
            let mut comm_points: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
            comm_points.sort_unstable();
            TeamSpec { members, comm_points }
        })
        .collect();

    let robots = (1..=o.robots)
        .map(|i| {
            let mut own: Vec<usize> =
                teams.iter().filter(|t| t.members.contains(&i)).flat_map(|t| t.comm_points.iter().copied()).collect();
            own.sort_unstable();
            own.dedup();
            let speed = if o.speed.0 == o.speed.1 { o.speed.0 } else { rng.gen_range(o.speed.0..=o.speed.1) };
            RobotSpec { start: *own.choose(rng).expect("every robot is in a team"), speed }
        })
        .collect();

    Config { locations, edges, teams, robots }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_locations_is_infeasible() {
        assert!(matches!(generate(1, &GenOptions::new(5, 5, 0)), Err(GenError::SizeInfeasible(_))));
    }

    #[test]
    fn one_robot_two_teams() {
        let config = generate(3, &GenOptions::new(1, 2, 4)).unwrap();
        assert_eq!(config.teams.len(), 2);
        assert!(config.teams.iter().all(|t| t.members == vec![1]));
    }

    #[test]
    fn same_seed_same_instance() {
        let o = GenOptions::new(5, 5, 20);
        assert_eq!(generate(1, &o).unwrap(), generate(1, &o).unwrap());
        assert_ne!(generate(1, &o).unwrap(), generate(2, &o).unwrap());
    }

    #[test]
    fn pairs_cannot_cover_many_robots_with_few_teams() {
        let mut o = GenOptions::new(6, 2, 5);
        o.max_team_size = 2;
        assert!(matches!(generate(0, &o), Err(GenError::SizeInfeasible(_))));
    }
}
