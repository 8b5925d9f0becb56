//! Shrimp chromosomes and the genetic operators of the generation loop.
//!
//! A chromosome has two segments. The tolerance segment holds a (min, max)
//! pair per physico-chemical parameter and is the only part subject to
//! crossover. The properties segment (displacement, smell, size) is acquired
//! during a crop and is never inherited.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::TuningDefaults;
use crate::error::{Error, Result};
use crate::fuzzy::{ParamUniverse, OXYGEN, PH, TEMPERATURE};

pub const NEWBORN_SIZE: u32 = 1;
pub const MAX_SIZE: u32 = 38;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePair {
    pub min: f64,
    pub max: f64,
}

impl TolerancePair {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub o2: TolerancePair,
    pub ph: TolerancePair,
    pub temp: TolerancePair,
}

impl Tolerances {
    pub fn species_optimal() -> Self {
        Self {
            o2: OXYGEN.optimal_pair(),
            ph: PH.optimal_pair(),
            temp: TEMPERATURE.optimal_pair(),
        }
    }

    pub fn pairs(&self) -> [(&'static ParamUniverse, TolerancePair); 3] {
        [(&OXYGEN, self.o2), (&PH, self.ph), (&TEMPERATURE, self.temp)]
    }

    fn pair_mut(&mut self, i: usize) -> &mut TolerancePair {
        match i {
            0 => &mut self.o2,
            1 => &mut self.ph,
            _ => &mut self.temp,
        }
    }

    fn pair(&self, i: usize) -> TolerancePair {
        self.pairs()[i].1
    }
}

/// Acquired properties.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Properties {
    /// Cells per epoch.
    pub displacement: u32,
    /// Smell radius in cells.
    pub smell: f64,
    /// Grams.
    pub size: u32,
}

impl Properties {
    pub fn newborn(tuning: &TuningDefaults) -> Self {
        Self {
            displacement: tuning.displacement_base,
            smell: tuning.smell_radius_base,
            size: NEWBORN_SIZE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub tolerance: Tolerances,
    pub properties: Properties,
}

impl Chromosome {
    pub fn newborn(tolerance: Tolerances, tuning: &TuningDefaults) -> Self {
        Self { tolerance, properties: Properties::newborn(tuning) }
    }

    /// Checks ordering and universe bounds of every tolerance pair and the
    /// size range.
    pub fn validate(&self) -> Result<()> {
        for (u, p) in self.tolerance.pairs() {
            if p.min > p.max {
                return Err(Error::InvalidTolerance { min: p.min, max: p.max });
            }
            if p.min < u.lo || p.max > u.hi {
                return Err(Error::Consistency(format!(
                    "{:?} tolerance [{}, {}] outside universe [{}, {}]",
                    u.kind, p.min, p.max, u.lo, u.hi
                )));
            }
        }
        let s = self.properties.size;
        if !(NEWBORN_SIZE..=MAX_SIZE).contains(&s) {
            return Err(Error::Consistency(format!("size {s} g outside [1, 38]")));
        }
        Ok(())
    }
}

/// Sum of the three tolerance widths plus displacement, smell and size.
pub fn fitness(c: &Chromosome) -> f64 {
    let widths: f64 = c.tolerance.pairs().iter().map(|(_, p)| p.width()).sum();
    let p = &c.properties;
    widths + p.displacement as f64 + p.smell + p.size as f64
}

/// Best member of a tournament subgroup; ties go to the lowest index.
pub fn tournament_pick(fitnesses: &[f64], members: &[usize]) -> Option<usize> {
    members.iter().copied().reduce(|b, i| {
        if fitnesses[i] > fitnesses[b] || (fitnesses[i] == fitnesses[b] && i < b) {
            i
        } else {
            b
        }
    })
}

/// Runs one tournament over a random subgroup of `k` distinct members and
/// returns the winner's index.
pub fn tournament_winner<R: Rng + ?Sized>(
    fitnesses: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<usize> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if k == 0 {
        return Err(Error::Config("tournament_size must be >= 1".into()));
    }
    let members = index::sample(rng, fitnesses.len(), k.min(fitnesses.len())).into_vec();
    Ok(tournament_pick(fitnesses, &members).expect("k >= 1"))
}

/// Draws `count` parents, one tournament each.
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &[Chromosome],
    k: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let fitnesses: Vec<f64> = pop.iter().map(fitness).collect();
    (0..count)
        .map(|_| tournament_winner(&fitnesses, k, rng).map(|i| pop[i]))
        .collect()
}

/// Pairwise crossover of the tolerance segment followed by optional
/// mutation. Each parameter's whole (min, max) pair comes from one parent;
/// the offspring's properties are those of a newborn.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    tuning: &TuningDefaults,
    rng: &mut R,
) -> Chromosome {
    let mut tol = a.tolerance;
    for i in 0..3 {
        if rng.random_bool(0.5) {
            *tol.pair_mut(i) = b.tolerance.pair(i);
        }
    }
    if tuning.mutation_sigma > 0.0 {
        for (i, u) in [&OXYGEN, &PH, &TEMPERATURE].into_iter().enumerate() {
            let sd = tuning.mutation_sigma * (u.opt_hi - u.opt_lo);
            let noise = Normal::new(0.0, sd).expect("finite non-negative sigma");
            let p = tol.pair_mut(i);
            let x = u.clamp(p.min + noise.sample(rng));
            let y = u.clamp(p.max + noise.sample(rng));
            *p = TolerancePair { min: x.min(y), max: x.max(y) };
        }
    }
    Chromosome::newborn(tol, tuning)
}

/// A homogeneous population of newborns with the species optimal tolerances.
pub fn spawn_initial_population(n: usize, tuning: &TuningDefaults) -> Result<Vec<Chromosome>> {
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    Ok(vec![Chromosome::newborn(Tolerances::species_optimal(), tuning); n])
}

/// Full generational replacement: `pop.len()` offspring, each from two
/// tournament winners.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[Chromosome],
    tuning: &TuningDefaults,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let parents = tournament_select(pop, tuning.tournament_size, 2 * pop.len(), rng)?;
    Ok(parents
        .chunks_exact(2)
        .map(|p| crossover(&p[0], &p[1], tuning, rng))
        .collect())
}

/// Population variance of fitness.
pub fn fitness_variance(pop: &[Chromosome]) -> f64 {
    if pop.is_empty() {
        return 0.0;
    }
    let f: Vec<f64> = pop.iter().map(fitness).collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / f.len() as f64
}
