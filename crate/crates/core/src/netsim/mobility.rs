use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::geometry::{Arena, Vec2};
use crate::Tick;

/// Initial node positions.
#[derive(Clone, Debug, PartialEq)]
pub enum Placement {
    /// Uniform over the arena, drawn from the mobility stream.
    Uniform,
    /// Nodes on a horizontal line through the arena's middle, `spacing`
    /// meters apart, starting at x = 0.
    Line { spacing: f64 },
    Explicit(Vec<Vec2>),
}

/// One point of a scripted position timeline.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Waypoint {
    pub tick: Tick,
    pub position: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mobility {
    Static,
    /// Speeds in meters per tick; `pause` in ticks.
    RandomWaypoint {
        speed_min: f64,
        speed_max: f64,
        pause: Tick,
    },
    /// Per-node timelines, linearly interpolated and held after the last
    /// point. Overrides the placement.
    Trace(Vec<Vec<Waypoint>>),
}

#[derive(Clone, Debug)]
struct Leg {
    target: Vec2,
    speed: f64,
    pause_left: Tick,
}

/// Advances node positions one tick at a time.
#[derive(Clone, Debug)]
pub(crate) struct MobilityModel {
    arena: Arena,
    mobility: Mobility,
    positions: Vec<Vec2>,
    legs: Vec<Leg>,
    tick: Tick,
    rng: ChaCha20Rng,
}

fn random_point(arena: &Arena, rng: &mut ChaCha20Rng) -> Vec2 {
    Vec2::new(
        rng.random::<f64>() * arena.width,
        rng.random::<f64>() * arena.height,
    )
}

/// Position on a timeline at `tick`: linear between points, held outside them.
pub fn trajectory_position(points: &[Waypoint], tick: Tick) -> Vec2 {
    let after = points.partition_point(|w| w.tick <= tick);
    if after == 0 {
        return points[0].position;
    }
    if after == points.len() {
        return points[after - 1].position;
    }
    let (a, b) = (points[after - 1], points[after]);
    let f = (tick - a.tick) as f64 / (b.tick - a.tick) as f64;
    Vec2::new(
        a.position.x + f * (b.position.x - a.position.x),
        a.position.y + f * (b.position.y - a.position.y),
    )
}

impl MobilityModel {
    pub fn new(
        arena: Arena,
        placement: &Placement,
        mobility: &Mobility,
        node_count: usize,
        mut rng: ChaCha20Rng,
    ) -> Self {
        let positions: Vec<Vec2> = match (mobility, placement) {
            (Mobility::Trace(traces), _) => traces.iter().map(|t| trajectory_position(t, 0)).collect(),
            (_, Placement::Uniform) => (0..node_count).map(|_| random_point(&arena, &mut rng)).collect(),
            (_, Placement::Line { spacing }) => (0..node_count)
                .map(|i| Vec2::new(i as f64 * spacing, arena.height / 2.0))
                .collect(),
            (_, Placement::Explicit(points)) => points.clone(),
        };
        let legs = match mobility {
            Mobility::RandomWaypoint { speed_min, speed_max, .. } => (0..node_count)
                .map(|_| Leg {
                    target: random_point(&arena, &mut rng),
                    speed: rng.random_range(*speed_min..=*speed_max),
                    pause_left: 0,
                })
                .collect(),
            _ => Vec::new(),
        };
        Self {
            arena,
            mobility: mobility.clone(),
            positions,
            legs,
            tick: 0,
            rng,
        }
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    /// Moves every node to its position at the next tick.
    pub fn advance(&mut self) {
        self.tick += 1;
        match &self.mobility {
            Mobility::Static => {}
            Mobility::Trace(traces) => {
                for (pos, trace) in self.positions.iter_mut().zip(traces) {
                    *pos = trajectory_position(trace, self.tick);
                }
            }
            Mobility::RandomWaypoint { speed_min, speed_max, pause } => {
                let (speed_min, speed_max, pause) = (*speed_min, *speed_max, *pause);
                for (pos, leg) in self.positions.iter_mut().zip(self.legs.iter_mut()) {
                    if leg.pause_left > 0 {
                        leg.pause_left -= 1;
                        if leg.pause_left == 0 {
                            leg.target = random_point(&self.arena, &mut self.rng);
                            leg.speed = self.rng.random_range(speed_min..=speed_max);
                        }
                        continue;
                    }
                    let (dx, dy) = (leg.target.x - pos.x, leg.target.y - pos.y);
                    let dist = sqrt(dx * dx + dy * dy);
                    if dist <= leg.speed {
                        *pos = leg.target;
                        if pause == 0 {
                            leg.target = random_point(&self.arena, &mut self.rng);
                            leg.speed = self.rng.random_range(speed_min..=speed_max);
                        } else {
                            leg.pause_left = pause;
                        }
                    } else {
                        pos.x = (pos.x + dx / dist * leg.speed).clamp(0.0, self.arena.width);
                        pos.y = (pos.y + dy / dist * leg.speed).clamp(0.0, self.arena.height);
                    }
                }
            }
        }
    }
}
