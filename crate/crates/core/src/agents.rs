//! Shrimp agent behaviour: smell, hunting, exploration, feeding and stress.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::TuningDefaults;
use crate::error::Result;
use crate::fuzzy::{self, ShrimpState, StateLabel};
use crate::genome::{Chromosome, MAX_SIZE};
use crate::habitat::{HabitatGrid, PelletField, Pos, QualityLevel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exploratory,
    /// Chasing the pellet with this id.
    Hunting(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrimpAgent {
    pub id: usize,
    pub position: Pos,
    pub chromosome: Chromosome,
    /// Pellets eaten since the last gram gained.
    pub feed_count: u32,
    /// Pellets eaten over the whole crop.
    pub pellets_eaten: u32,
    pub state: StateLabel,
    pub mode: Mode,
}

impl ShrimpAgent {
    pub fn new(id: usize, position: Pos, chromosome: Chromosome) -> Self {
        Self {
            id,
            position,
            chromosome,
            feed_count: 0,
            pellets_eaten: 0,
            state: StateLabel::Normal,
            mode: Mode::Exploratory,
        }
    }

    pub fn size(&self) -> u32 {
        self.chromosome.properties.size
    }

    /// Fuzzy state at the agent's cell, judged against its own tolerances.
    pub fn evaluate_state(&self, grid: &HabitatGrid) -> Result<ShrimpState> {
        let w = grid.params(self.position);
        fuzzy::evaluate(w.o2, w.ph, w.temp, Some(&self.chromosome.tolerance))
    }

    /// One decide-move-eat pass. Returns true if a pellet was eaten.
    pub fn act<R: Rng + ?Sized>(
        &mut self,
        grid: &HabitatGrid,
        pellets: &mut PelletField,
        tuning: &TuningDefaults,
        rng: &mut R,
    ) -> Result<bool> {
        let state = self.evaluate_state(grid)?;
        self.state = state.label;
        let (displacement, smell) = apply_state(
            state.label,
            self.chromosome.properties.displacement,
            self.chromosome.properties.smell,
        );
        match sense_food(self.position, smell, pellets) {
            Some(target) => {
                self.mode = Mode::Hunting(target);
                let at = pellets.get(target).expect("sensed pellet exists").position;
                self.position = hunt_step(self.position, at, displacement);
                if self.position == at {
                    eat(self, target, pellets, tuning.growth_pellets_per_gram)?;
                    return Ok(true);
                }
            }
            None => {
                self.mode = Mode::Exploratory;
                self.position = explore_step(self.position, grid, displacement, rng);
            }
        }
        Ok(false)
    }
}

/// Nearest live pellet with Euclidean distance `<= radius`; ties go to the
/// lowest pellet id.
pub fn sense_food(at: Pos, radius: f64, pellets: &PelletField) -> Option<usize> {
    pellets.nearest(at, radius).map(|(_, id)| id)
}

/// Moves up to `displacement` steps toward `target`, adjusting each
/// coordinate by at most one per step.
pub fn hunt_step(from: Pos, target: Pos, displacement: u32) -> Pos {
    let mut p = from;
    for _ in 0..displacement {
        if p == target {
            break;
        }
        p.col += (target.col - p.col).signum();
        p.row += (target.row - p.row).signum();
    }
    p
}

const CARDINAL: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// `displacement` unit moves in random cardinal directions, avoiding Bad
/// cells when any alternative exists. Off-grid moves are never drawn.
pub fn explore_step<R: Rng + ?Sized>(
    from: Pos,
    grid: &HabitatGrid,
    displacement: u32,
    rng: &mut R,
) -> Pos {
    let mut p = from;
    let mut open = Vec::with_capacity(4);
    let mut fallback = Vec::with_capacity(4);
    for _ in 0..displacement {
        open.clear();
        fallback.clear();
        for (dc, dr) in CARDINAL {
            let n = Pos::new(p.col + dc, p.row + dr);
            if grid.contains(n) {
                fallback.push(n);
                if grid.quality(n) != QualityLevel::Bad {
                    open.push(n);
                }
            }
        }
        let pool = if open.is_empty() { &fallback } else { &open };
        if let Some(&n) = pool.choose(rng) {
            p = n;
        }
    }
    p
}

/// Consumes the pellet and grows one gram per `growth_pellets_per_gram`
/// pellets, up to the size cap.
pub fn eat(
    agent: &mut ShrimpAgent,
    pellet: usize,
    pellets: &mut PelletField,
    growth_pellets_per_gram: u32,
) -> Result<()> {
    pellets.consume(pellet)?;
    agent.pellets_eaten += 1;
    agent.feed_count += 1;
    if agent.feed_count >= growth_pellets_per_gram {
        agent.feed_count = 0;
        let size = &mut agent.chromosome.properties.size;
        *size = (*size + 1).min(MAX_SIZE);
    }
    agent.mode = Mode::Exploratory;
    Ok(())
}

pub fn stress_multiplier(label: StateLabel) -> f64 {
    match label {
        StateLabel::Normal => 1.0,
        StateLabel::Tolerable => 0.5,
        StateLabel::Bad => 0.25,
    }
}

/// Effective (displacement, smell radius) under a fuzzy state.
pub fn apply_state(label: StateLabel, displacement_base: u32, smell_base: f64) -> (u32, f64) {
    let m = stress_multiplier(label);
    let d = ((displacement_base as f64 * m).floor() as u32).max(1);
    (d, smell_base * m)
}
