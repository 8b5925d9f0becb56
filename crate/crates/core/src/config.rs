//! Scenario parameters, the 16-configuration experiment matrix and every
//! tuning default of the model in one place.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Agents per real animal: one agent stands for 8,000 shrimp.
pub const SCALE_ANIMALS_PER_AGENT: u32 = 8_000;
/// Agents in an intensive pond (4,000,000 animals at 1:8000).
pub const INTENSIVE_POPULATION: usize = 500;
pub const SEMI_INTENSIVE_POPULATION: usize = 250;
pub const DEFAULT_GRID: usize = 100;
pub const DEFAULT_EPOCH_CAP: u32 = 2000;
pub const DEFAULT_STOP_MEAN_SIZE: f64 = 24.0;
/// Generations per pre-experiment.
pub const GENERATIONS_PER_CONFIG: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Disposition {
    #[serde(alias = "3Z")]
    ThreeZones,
    #[serde(alias = "2Z")]
    TwoZones,
    #[serde(alias = "1Z")]
    OneZone,
    #[serde(alias = "U")]
    Uniform,
}

impl Disposition {
    pub const ALL: [Disposition; 4] = [
        Disposition::ThreeZones,
        Disposition::TwoZones,
        Disposition::OneZone,
        Disposition::Uniform,
    ];

    /// Number of discrete feeders; zero for uniform scatter.
    pub fn feeder_count(self) -> usize {
        match self {
            Disposition::ThreeZones => 3,
            Disposition::TwoZones => 2,
            Disposition::OneZone => 1,
            Disposition::Uniform => 0,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Disposition::ThreeZones => "3Z",
            Disposition::TwoZones => "2Z",
            Disposition::OneZone => "1Z",
            Disposition::Uniform => "U",
        }
    }

    pub fn is_zoned(self) -> bool {
        self != Disposition::Uniform
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedingMode {
    #[serde(alias = "N")]
    Normal,
    #[serde(alias = "A", alias = "High")]
    Alta,
}

impl FeedingMode {
    pub const ALL: [FeedingMode; 2] = [FeedingMode::Normal, FeedingMode::Alta];

    pub fn code(self) -> &'static str {
        match self {
            FeedingMode::Normal => "N",
            FeedingMode::Alta => "A",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Density {
    #[serde(alias = "I")]
    Intensive,
    #[serde(alias = "SI", alias = "S.I")]
    SemiIntensive,
}

impl Density {
    pub const ALL: [Density; 2] = [Density::Intensive, Density::SemiIntensive];

    pub fn code(self) -> &'static str {
        match self {
            Density::Intensive => "I",
            Density::SemiIntensive => "SI",
        }
    }

    pub fn population_size(self) -> usize {
        match self {
            Density::Intensive => INTENSIVE_POPULATION,
            Density::SemiIntensive => SEMI_INTENSIVE_POPULATION,
        }
    }
}

/// Parameters the model needs but that are not pinned by field data.
///
/// Every field has a default; [`TuningDefaults::default`] never fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningDefaults {
    /// Epochs between feed drops.
    pub feeding_period: u32,
    /// Pellets per Normal drop, as a fraction of the live biomass in grams
    /// (rounded up).
    pub feed_fraction: f64,
    /// Alta / Normal pellet ratio.
    pub alta_multiplier: f64,
    /// Chebyshev radius, in cells, of the scatter area around a feeder.
    pub feeder_spread_radius: usize,
    /// Smell radius of a newborn agent, in cells.
    pub smell_radius_base: f64,
    /// Cells moved per epoch by a newborn agent.
    pub displacement_base: u32,
    pub growth_pellets_per_gram: u32,
    /// Gaussian noise on each tolerance bound at reproduction, as a fraction
    /// of the species optimal range width of that parameter. Zero disables
    /// mutation.
    pub mutation_sigma: f64,
    pub tournament_size: usize,
    /// Moore radius of the area over which local density is counted.
    pub density_radius: usize,
    /// Inclusive upper counts for Good, Medium and Tolerable cells.
    pub density_thresholds: [u32; 3],
    /// (O2 ppm, pH, temperature °C) for Good, Medium, Tolerable and Bad cells.
    pub quality_param_table: [[f64; 3]; 4],
}

impl Default for TuningDefaults {
    fn default() -> Self {
        Self {
            feeding_period: 4,
            feed_fraction: 0.54,
            alta_multiplier: 1.2,
            feeder_spread_radius: 20,
            smell_radius_base: 16.0,
            displacement_base: 1,
            growth_pellets_per_gram: 9,
            mutation_sigma: 0.05,
            tournament_size: 3,
            density_radius: 2,
            density_thresholds: [2, 5, 9],
            quality_param_table: [
                [8.0, 7.5, 26.0],
                [6.0, 7.0, 28.0],
                [4.5, 7.0, 28.0],
                [3.5, 6.0, 28.0],
            ],
        }
    }
}

impl TuningDefaults {
    /// Pellets in a Normal drop for the given live biomass.
    pub fn pellets_per_drop_normal(&self, biomass_grams: f64) -> usize {
        ceil_tolerant(self.feed_fraction * biomass_grams)
    }

    /// Pellets in one drop under `mode`.
    pub fn pellets_per_drop(&self, mode: FeedingMode, biomass_grams: f64) -> usize {
        let normal = self.pellets_per_drop_normal(biomass_grams);
        match mode {
            FeedingMode::Normal => normal,
            FeedingMode::Alta => ceil_tolerant(normal as f64 * self.alta_multiplier),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [t1, t2, t3] = self.density_thresholds;
        if !(t1 < t2 && t2 < t3) {
            return Err(Error::Config(format!(
                "density_thresholds must be strictly increasing, got ({t1}, {t2}, {t3})"
            )));
        }
        if self.feeding_period == 0 {
            return Err(Error::Config("feeding_period must be > 0".into()));
        }
        if self.growth_pellets_per_gram == 0 {
            return Err(Error::Config("growth_pellets_per_gram must be > 0".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament_size must be >= 1".into()));
        }
        if self.displacement_base == 0 {
            return Err(Error::Config("displacement_base must be >= 1".into()));
        }
        for (name, v) in [
            ("feed_fraction", self.feed_fraction),
            ("alta_multiplier", self.alta_multiplier),
            ("smell_radius_base", self.smell_radius_base),
            ("mutation_sigma", self.mutation_sigma),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `ceil` that ignores floating-point dust, so 1.2 × 15 gives 18 and not 19.
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub disposition: Disposition,
    pub feeding_mode: FeedingMode,
    pub density: Density,
    pub rng_seed: u64,
    pub grid_width: usize,
    pub grid_height: usize,
    pub population_size: usize,
    pub epoch_cap: u32,
    /// Mean size in grams that ends a generation.
    pub stop_mean_size: f64,
    pub tuning: TuningDefaults,
}

impl ExperimentConfig {
    pub fn new(
        disposition: Disposition,
        feeding_mode: FeedingMode,
        density: Density,
        rng_seed: u64,
        tuning: TuningDefaults,
    ) -> Self {
        Self {
            disposition,
            feeding_mode,
            density,
            rng_seed,
            grid_width: DEFAULT_GRID,
            grid_height: DEFAULT_GRID,
            population_size: density.population_size(),
            epoch_cap: DEFAULT_EPOCH_CAP,
            stop_mean_size: DEFAULT_STOP_MEAN_SIZE,
            tuning,
        }
    }

    /// Short nomenclature code such as `3Z-N-I` or `U-A-SI`.
    pub fn code(&self) -> String {
        config_code(self.disposition, self.feeding_mode, self.density)
    }

    pub fn validate(&self) -> Result<()> {
        self.tuning.validate()?;
        if self.epoch_cap == 0 {
            return Err(Error::Config("epoch_cap must be > 0".into()));
        }
        if self.population_size == 0 {
            return Err(Error::Config("population_size must be > 0".into()));
        }
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(Error::Config("grid dimensions must be > 0".into()));
        }
        if !self.stop_mean_size.is_finite() {
            return Err(Error::Config("stop_mean_size must be finite".into()));
        }
        if self.disposition.is_zoned() {
            let min = 4 * self.tuning.feeder_spread_radius;
            if self.grid_width < min || self.grid_height < min {
                return Err(Error::Config(format!(
                    "grid {}x{} smaller than 4 x feeder_spread_radius ({min})",
                    self.grid_width, self.grid_height
                )));
            }
        }
        Ok(())
    }
}

pub fn config_code(disposition: Disposition, mode: FeedingMode, density: Density) -> String {
    format!("{}-{}-{}", disposition.code(), mode.code(), density.code())
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The 16 configurations in results-table order: density outermost
/// (Intensive first), then feeding mode (Normal first), then disposition
/// (3Z, 2Z, 1Z, U).
pub fn matrix_configs(base: &TuningDefaults, seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::with_capacity(16);
    for density in Density::ALL {
        for mode in FeedingMode::ALL {
            for disposition in Disposition::ALL {
                let idx = out.len() as u64;
                out.push(ExperimentConfig::new(
                    disposition,
                    mode,
                    density,
                    derive_seed(seed, idx),
                    base.clone(),
                ));
            }
        }
    }
    out
}

/// A scenario file: the three matrix axes, a seed, and optional overrides.
/// Unknown keys are rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub disposition: Option<Disposition>,
    pub feeding_mode: Option<FeedingMode>,
    pub density: Option<Density>,
    pub seed: Option<u64>,

    pub grid_width: Option<usize>,
    pub grid_height: Option<usize>,
    pub population_size: Option<usize>,
    pub epoch_cap: Option<u32>,
    pub stop_mean_size: Option<f64>,

    pub feeding_period: Option<u32>,
    pub feed_fraction: Option<f64>,
    pub alta_multiplier: Option<f64>,
    pub feeder_spread_radius: Option<usize>,
    pub smell_radius_base: Option<f64>,
    pub displacement_base: Option<u32>,
    pub growth_pellets_per_gram: Option<u32>,
    pub mutation_sigma: Option<f64>,
    pub tournament_size: Option<usize>,
    pub density_radius: Option<usize>,
    pub density_thresholds: Option<[u32; 3]>,
    pub quality_param_table: Option<[[f64; 3]; 4]>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the experiment config. `seed_override` wins over the file's
    /// `seed`; one of the two must be present.
    pub fn into_config(self, seed_override: Option<u64>) -> Result<ExperimentConfig> {
        let missing = |k: &str| Error::Config(format!("missing key `{k}`"));
        let disposition = self.disposition.ok_or_else(|| missing("disposition"))?;
        let feeding_mode = self.feeding_mode.ok_or_else(|| missing("feeding_mode"))?;
        let density = self.density.ok_or_else(|| missing("density"))?;
        let seed = seed_override.or(self.seed).ok_or_else(|| missing("seed"))?;

        let mut t = TuningDefaults::default();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { t.$f = v; } )* };
        }
        set!(
            feeding_period,
            feed_fraction,
            alta_multiplier,
            feeder_spread_radius,
            smell_radius_base,
            displacement_base,
            growth_pellets_per_gram,
            mutation_sigma,
            tournament_size,
            density_radius,
            density_thresholds,
            quality_param_table
        );

        let mut cfg = ExperimentConfig::new(disposition, feeding_mode, density, seed, t);
        if let Some(v) = self.grid_width {
            cfg.grid_width = v;
        }
        if let Some(v) = self.grid_height {
            cfg.grid_height = v;
        }
        if let Some(v) = self.population_size {
            cfg.population_size = v;
        }
        if let Some(v) = self.epoch_cap {
            cfg.epoch_cap = v;
        }
        if let Some(v) = self.stop_mean_size {
            cfg.stop_mean_size = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (seed {})", self.code(), self.rng_seed)
    }
}
