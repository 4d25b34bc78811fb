use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kpi::{Kpi, Orientation, OrientationConfig};
use crate::market::{
    generate_synthetic, load_dataset, DatasetPaths, MarketDataset, SyntheticParams,
};
use crate::mcdm::McdmSettings;
use crate::site::{
    default_curve, default_tiers, experiment_id, parse_experiment_id, ElectrolyzerSpec,
    ExperimentConfig, FleetSpec, RenewableSpec, SchedulingPolicy, StorageSpec, Strategy, Tier,
    DEFAULT_MIN_LOAD_FRACTION, DEFAULT_ROUND_TRIP_HOURS, DEFAULT_TRUCK_CAPACITY_KG, LHV_KWH_PER_KG,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_YEAR: i32 = 2024;

fn default_year() -> i32 {
    DEFAULT_YEAR
}

/// Where the hourly market and weather data come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic {
        seed: u64,
        #[serde(default = "default_year")]
        year: i32,
        #[serde(default)]
        params: SyntheticParams,
    },
    /// Directory holding spot.csv, co2.csv, pv_cf.csv, wind_cf.csv, tariffs.csv.
    Files { dir: PathBuf },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            seed: DEFAULT_SEED,
            year: DEFAULT_YEAR,
            params: SyntheticParams::default(),
        }
    }
}

impl DatasetSource {
    pub fn load(&self) -> Result<MarketDataset> {
        match self {
            DatasetSource::Synthetic { seed, year, params } => {
                params.tariffs.validate()?;
                Ok(generate_synthetic(*seed, *year, params))
            }
            DatasetSource::Files { dir } => load_dataset(&DatasetPaths::in_dir(dir)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub tiers: Vec<u8>,
    pub strategies: Vec<Strategy>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            tiers: vec![1, 2, 3],
            strategies: vec![Strategy::S1, Strategy::S2, Strategy::S3],
        }
    }
}

/// Per-tier replacements for the sized demand, storage and fleet.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TierOverride {
    pub capacity_mw: Option<f64>,
    pub daily_demand_kg: Option<f64>,
    pub storage_kg: Option<f64>,
    pub n_trucks: Option<u32>,
}

/// Plant parameters shared by every tier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SiteParams {
    pub pv_capacity: f64,
    pub wind_capacity: f64,
    pub min_load_fraction: f64,
    pub truck_capacity_kg: f64,
    pub round_trip_hours: u32,
}

impl Default for SiteParams {
    fn default() -> Self {
        let re = RenewableSpec::default();
        Self {
            pv_capacity: re.pv_capacity,
            wind_capacity: re.wind_capacity,
            min_load_fraction: DEFAULT_MIN_LOAD_FRACTION,
            truck_capacity_kg: DEFAULT_TRUCK_CAPACITY_KG,
            round_trip_hours: DEFAULT_ROUND_TRIP_HOURS,
        }
    }
}

/// Full description of a study. Read from TOML; see the README for an example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub dataset: DatasetSource,
    pub grid: GridSpec,
    pub tiers: Vec<Tier>,
    /// Keyed by tier id.
    pub overrides: BTreeMap<String, TierOverride>,
    pub site: SiteParams,
    pub policy: SchedulingPolicy,
    /// DKK/kg.
    pub base_variable_cost: f64,
    pub mcdm: McdmSettings,
    /// KPI name → orientation, replacing the default for that KPI.
    pub orientations: BTreeMap<String, Orientation>,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            grid: GridSpec::default(),
            tiers: default_tiers().to_vec(),
            overrides: BTreeMap::new(),
            site: SiteParams::default(),
            policy: SchedulingPolicy::CheapestHours,
            base_variable_cost: 0.0,
            mcdm: McdmSettings::default(),
            orientations: BTreeMap::new(),
            output_dir: PathBuf::from("study_output"),
        }
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str, file: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{file}: {e}")))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        if let DatasetSource::Files { dir } = &mut config.dataset {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.tiers.is_empty() || self.grid.strategies.is_empty() {
            return Err(Error::Config("experiment grid is empty".into()));
        }
        let mut ids = BTreeSet::new();
        for t in &self.tiers {
            if !ids.insert(t.id) {
                return Err(Error::Config(format!("tier {} defined twice", t.id)));
            }
        }
        let mut seen = BTreeSet::new();
        for id in &self.grid.tiers {
            if !ids.contains(id) {
                return Err(Error::Config(format!(
                    "grid references undefined tier {id}"
                )));
            }
            if !seen.insert(*id) {
                return Err(Error::Config(format!("tier {id} listed twice in grid")));
            }
        }
        let mut strategies = BTreeSet::new();
        for s in &self.grid.strategies {
            if !strategies.insert(*s) {
                return Err(Error::Config(format!("strategy {s} listed twice in grid")));
            }
        }
        for key in self.overrides.keys() {
            match key.parse::<u8>() {
                Ok(id) if ids.contains(&id) => {}
                _ => {
                    return Err(Error::Config(format!(
                        "override for undefined tier '{key}'"
                    )))
                }
            }
        }
        self.orientation_config()?;
        if !(0.0..=1.0).contains(&self.mcdm.vikor_v) {
            return Err(Error::Config(format!(
                "mcdm.vikor_v = {} outside [0, 1]",
                self.mcdm.vikor_v
            )));
        }
        if !(self.mcdm.linear_threshold > 0.0 && self.mcdm.linear_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "mcdm.linear_threshold = {} must be positive",
                self.mcdm.linear_threshold
            )));
        }
        if !self.base_variable_cost.is_finite() {
            return Err(Error::Config("base_variable_cost must be finite".into()));
        }
        Ok(())
    }

    pub fn orientation_config(&self) -> Result<OrientationConfig> {
        let mut o = OrientationConfig::default();
        for (name, orientation) in &self.orientations {
            let kpi = Kpi::from_name(name)
                .ok_or_else(|| Error::Config(format!("unknown KPI '{name}' in orientations")))?;
            o.set(kpi, *orientation);
        }
        Ok(o)
    }

    /// Tier definition after applying its override.
    pub fn tier(&self, id: u8) -> Option<Tier> {
        let mut tier = *self.tiers.iter().find(|t| t.id == id)?;
        if let Some(o) = self.overrides.get(&id.to_string()) {
            tier.capacity_mw = o.capacity_mw.unwrap_or(tier.capacity_mw);
            tier.daily_demand_kg = o.daily_demand_kg.unwrap_or(tier.daily_demand_kg);
            tier.storage_kg = o.storage_kg.unwrap_or(tier.storage_kg);
            tier.n_trucks = o.n_trucks.unwrap_or(tier.n_trucks);
        }
        Some(tier)
    }

    /// Builds one experiment from any defined tier, whether or not it is in the grid.
    pub fn experiment(&self, id: &str) -> Result<ExperimentConfig> {
        let (tier_id, strategy) = parse_experiment_id(id)
            .ok_or_else(|| Error::Config(format!("unknown experiment id '{id}'")))?;
        let tier = self.tier(tier_id).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment id '{id}': tier {tier_id} is not defined"
            ))
        })?;
        self.build(&tier, strategy)
            .map_err(|e| e.in_step(id, "configure"))
    }

    /// Experiments of the grid, tier-major in listed order.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>> {
        self.validate()?;
        let mut out = Vec::new();
        for &t in &self.grid.tiers {
            for &s in &self.grid.strategies {
                out.push(self.experiment(&experiment_id(t, s))?);
            }
        }
        Ok(out)
    }

    fn build(&self, tier: &Tier, strategy: Strategy) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            id: experiment_id(tier.id, strategy),
            electrolyzer: ElectrolyzerSpec::new(
                tier.capacity_mw,
                default_curve(),
                self.site.min_load_fraction,
                LHV_KWH_PER_KG,
            )?,
            renewables: RenewableSpec {
                pv_capacity: self.site.pv_capacity,
                wind_capacity: self.site.wind_capacity,
            },
            storage: StorageSpec {
                capacity: tier.storage_kg,
            },
            fleet: FleetSpec {
                n_trucks: tier.n_trucks,
                truck_capacity: self.site.truck_capacity_kg,
                round_trip_duration: self.site.round_trip_hours,
            },
            strategy,
            daily_demand: tier.daily_demand_kg,
            policy: self.policy,
            base_variable_cost: self.base_variable_cost,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_dataset(&self) -> Result<MarketDataset> {
        self.dataset.load()
    }

    /// SHA-256 over everything that shapes the outputs. Output location and
    /// the dataset directory are excluded; the data itself is covered by
    /// the dataset fingerprint.
    pub fn content_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        if let DatasetSource::Files { dir } = &mut canonical.dataset {
            *dir = PathBuf::new();
        }
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
