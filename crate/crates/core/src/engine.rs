//! Epoch loop, generation loop and the ten-generation pre-experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::ShrimpAgent;
use crate::analytics::{self, Histogram};
use crate::config::{derive_seed, matrix_configs, ExperimentConfig, TuningDefaults, GENERATIONS_PER_CONFIG};
use crate::error::{Error, Result};
use crate::genome::{self, Chromosome};
use crate::habitat::{drop_feed, feeder_positions, stocking_positions, HabitatGrid, PelletField, Pos};

/// Stream id for the GA's RNG, away from the per-generation world streams.
const GA_STREAM: u64 = 1 << 32;

pub struct World {
    pub epoch: u32,
    pub grid: HabitatGrid,
    pub agents: Vec<ShrimpAgent>,
    pub pellets: PelletField,
    pub feeders: Vec<Pos>,
    pub rng: ChaCha8Rng,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EpochStats {
    pub dropped: usize,
    pub eaten: usize,
    pub remaining: usize,
}

impl World {
    /// A fresh pond with one agent per chromosome, stocked by jittered sampling.
    pub fn new(config: &ExperimentConfig, population: &[Chromosome], seed: u64) -> Result<Self> {
        config.validate()?;
        if population.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let t = &config.tuning;
        let grid = HabitatGrid::new(
            config.grid_width,
            config.grid_height,
            t.density_radius,
            t.density_thresholds,
            t.quality_param_table,
        )?;
        let feeders = feeder_positions(
            config.disposition,
            config.grid_width,
            config.grid_height,
            t.feeder_spread_radius,
        )?;
        let reach = population
            .iter()
            .map(|c| c.properties.smell)
            .fold(0.0f64, f64::max)
            .ceil() as i32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = stocking_positions(config.grid_width, config.grid_height, population.len(), &mut rng);
        let agents = population
            .iter()
            .zip(positions)
            .enumerate()
            .map(|(id, (c, p))| ShrimpAgent::new(id, p, *c))
            .collect();
        Ok(Self {
            epoch: 0,
            grid,
            agents,
            pellets: PelletField::with_reach(config.grid_width, config.grid_height, reach),
            feeders,
            rng,
        })
    }

    pub fn biomass(&self) -> f64 {
        self.agents.iter().map(|a| a.size() as f64).sum()
    }

    pub fn mean_size(&self) -> f64 {
        self.biomass() / self.agents.len() as f64
    }

    pub fn agent_positions(&self) -> Vec<Pos> {
        self.agents.iter().map(|a| a.position).collect()
    }

    pub fn render(&self) -> String {
        self.grid.render_frame(&self.pellets, &self.agent_positions())
    }
}

/// One epoch: feed drop on schedule, quality refresh, then every agent in id
/// order, then the epoch counter.
pub fn run_epoch(world: &mut World, config: &ExperimentConfig) -> Result<EpochStats> {
    let t = &config.tuning;
    let live_before = world.pellets.live_count();
    let agent_count = world.agents.len();

    let mut dropped = 0;
    if world.epoch % t.feeding_period == 0 {
        let n = t.pellets_per_drop(config.feeding_mode, world.biomass());
        for p in drop_feed(
            &world.feeders,
            config.grid_width,
            config.grid_height,
            t.feeder_spread_radius,
            n,
            &mut world.rng,
        ) {
            world.pellets.add(p);
        }
        dropped = n;
    }

    world.grid.recompute_quality(world.agents.iter().map(|a| a.position));

    let mut eaten = 0;
    for agent in world.agents.iter_mut() {
        if agent.act(&world.grid, &mut world.pellets, t, &mut world.rng)? {
            eaten += 1;
        }
    }
    world.epoch += 1;

    let remaining = world.pellets.live_count();
    if live_before + dropped - eaten != remaining {
        return Err(Error::Consistency(format!(
            "pellet conservation broken at epoch {}: {live_before} + {dropped} - {eaten} != {remaining}",
            world.epoch
        )));
    }
    if world.agents.len() != agent_count {
        return Err(Error::Consistency("agent count changed within an epoch".into()));
    }
    Ok(EpochStats { dropped, eaten, remaining })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub generation_index: usize,
    pub epochs_used: u32,
    /// The epoch cap was hit before the mean size reached the stop criterion.
    pub capped: bool,
    /// (epoch, mean grams) after each epoch.
    pub mean_size_trajectory: Vec<(u32, f64)>,
    pub final_sizes: Vec<u32>,
    pub mean_size: f64,
    pub mse: f64,
    pub std: f64,
    pub histogram: Histogram,
    pub group_count: usize,
    pub min_size: u32,
    pub max_size: u32,
    /// Fitness variance of the population as spawned, before the crop.
    pub spawn_fitness_variance: f64,
    pub pellets_dropped: usize,
    pub pellets_eaten: usize,
    /// Chromosomes at the end of the crop, acquired properties included.
    #[serde(skip)]
    pub final_population: Vec<Chromosome>,
}

pub fn run_generation(
    config: &ExperimentConfig,
    population: &[Chromosome],
    generation_index: usize,
    seed: u64,
) -> Result<GenerationResult> {
    run_generation_observed(config, population, generation_index, seed, &mut |_| {})
}

/// Like [`run_generation`], calling `observer` on the initial world and
/// after every epoch.
pub fn run_generation_observed(
    config: &ExperimentConfig,
    population: &[Chromosome],
    generation_index: usize,
    seed: u64,
    observer: &mut dyn FnMut(&World),
) -> Result<GenerationResult> {
    if population.len() != config.population_size {
        return Err(Error::Config(format!(
            "population has {} chromosomes, config expects {}",
            population.len(),
            config.population_size
        )));
    }
    let spawn_fitness_variance = genome::fitness_variance(population);
    let mut world = World::new(config, population, seed)?;
    let mut trajectory = Vec::new();
    let mut capped = false;
    let mut eaten_total = 0;
    observer(&world);
    loop {
        if world.mean_size() >= config.stop_mean_size {
            break;
        }
        if world.epoch >= config.epoch_cap {
            capped = true;
            break;
        }
        let stats = run_epoch(&mut world, config)?;
        eaten_total += stats.eaten;
        trajectory.push((world.epoch, world.mean_size()));
        observer(&world);
    }

    let final_sizes: Vec<u32> = world.agents.iter().map(|a| a.size()).collect();
    let sizes_f: Vec<f64> = final_sizes.iter().map(|&s| s as f64).collect();
    let histogram = analytics::histogram40(&sizes_f)?;
    let mse = if trajectory.len() >= 2 {
        let pts: Vec<(f64, f64)> = trajectory.iter().map(|&(e, m)| (e as f64, m)).collect();
        analytics::mse_vs_regression(&pts)?
    } else {
        0.0
    };
    Ok(GenerationResult {
        generation_index,
        epochs_used: world.epoch,
        capped,
        mean_size: world.mean_size(),
        std: analytics::std_dev(&sizes_f)?,
        group_count: histogram.group_count(),
        histogram,
        min_size: *final_sizes.iter().min().expect("non-empty"),
        max_size: *final_sizes.iter().max().expect("non-empty"),
        mse,
        mean_size_trajectory: trajectory,
        final_sizes,
        spawn_fitness_variance,
        pellets_dropped: world.pellets.total_dropped(),
        pellets_eaten: eaten_total,
        final_population: world.agents.iter().map(|a| a.chromosome).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreExperiment {
    pub config: ExperimentConfig,
    pub best_index: usize,
    pub generations: Vec<GenerationResult>,
}

impl PreExperiment {
    pub fn best(&self) -> &GenerationResult {
        &self.generations[self.best_index]
    }
}

/// Index of the minimum-MSE generation; ties go to the earliest.
pub fn best_generation(results: &[GenerationResult]) -> Option<usize> {
    results
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, m)) if m <= r.mse => best,
            _ => Some((i, r.mse)),
        })
        .map(|(i, _)| i)
}

pub fn run_pre_experiment(config: &ExperimentConfig) -> Result<PreExperiment> {
    run_pre_experiment_observed(config, &mut |_, _| {})
}

/// Ten generations linked by tournament selection and crossover.
/// `observer(generation, world)` sees every world state.
pub fn run_pre_experiment_observed(
    config: &ExperimentConfig,
    observer: &mut dyn FnMut(usize, &World),
) -> Result<PreExperiment> {
    config.validate()?;
    let mut ga_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, GA_STREAM));
    let mut population = genome::spawn_initial_population(config.population_size, &config.tuning)?;
    let mut generations = Vec::with_capacity(GENERATIONS_PER_CONFIG);
    for g in 0..GENERATIONS_PER_CONFIG {
        let seed = derive_seed(config.rng_seed, g as u64);
        let result = run_generation_observed(config, &population, g, seed, &mut |w| observer(g, w))?;
        if g + 1 < GENERATIONS_PER_CONFIG {
            population = genome::next_generation(&result.final_population, &config.tuning, &mut ga_rng)?;
        }
        generations.push(result);
    }
    let best_index = best_generation(&generations).expect("ten generations");
    Ok(PreExperiment { config: config.clone(), best_index, generations })
}

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub exp_no: usize,
    pub config: String,
    pub mse: f64,
    pub std: f64,
    pub mean_size: f64,
    pub max_size: u32,
    pub min_size: u32,
    pub epochs: u32,
    pub groups: usize,
    pub weeks: f64,
}

impl MatrixRow {
    pub fn from_pre_experiment(exp_no: usize, pre: &PreExperiment) -> Self {
        let b = pre.best();
        Self {
            exp_no,
            config: pre.config.code(),
            mse: b.mse,
            std: b.std,
            mean_size: b.mean_size,
            max_size: b.max_size,
            min_size: b.min_size,
            epochs: b.epochs_used,
            groups: b.group_count,
            weeks: analytics::epochs_to_weeks(b.epochs_used as f64),
        }
    }
}

pub struct MatrixResult {
    pub experiments: Vec<PreExperiment>,
    pub rows: Vec<MatrixRow>,
}

/// All 16 pre-experiments. Configs run in parallel on the current rayon
/// pool; results come back in table order whatever the pool size.
pub fn run_matrix(base: &TuningDefaults, seed: u64) -> Result<MatrixResult> {
    run_configs(matrix_configs(base, seed))
}

pub fn run_configs(configs: Vec<ExperimentConfig>) -> Result<MatrixResult> {
    let experiments = configs
        .par_iter()
        .map(|c| {
            run_pre_experiment(c)
                .map_err(|e| Error::Experiment { config: c.code(), source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = experiments
        .iter()
        .enumerate()
        .map(|(i, p)| MatrixRow::from_pre_experiment(i + 1, p))
        .collect();
    Ok(MatrixResult { experiments, rows })
}
