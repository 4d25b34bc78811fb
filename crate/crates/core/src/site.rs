//! Plant description: electrolyzer, renewable park, hydrogen storage, truck
//! fleet and the experiment configuration that ties them to a strategy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketDataset;

/// Lower heating value of hydrogen, kWh/kg (120 MJ/kg).
pub const LHV_KWH_PER_KG: f64 = 33.33;

/// Full-load specific consumption of the default curve, kWh/kg. Equals the
/// ratio of annual grid energy to hydrogen output of a 10 MW grid-only plant
/// (49,865 MWh for 868 t).
pub const FULL_LOAD_SPECIFIC_CONSUMPTION: f64 = 57.45;

/// Part-load knot of the default curve and its efficiency gain over full load.
pub const PART_LOAD_FRACTION: f64 = 0.25;
pub const PART_LOAD_GAIN: f64 = 0.05;

pub const DEFAULT_MIN_LOAD_FRACTION: f64 = 0.1;

const BISECTION_TOLERANCE_MW: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveKnot {
    pub load_fraction: f64,
    /// kWh per kg H₂.
    pub specific_consumption: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectrolyzerSpec {
    capacity: f64,
    curve: Vec<CurveKnot>,
    min_load_fraction: f64,
    lhv: f64,
}

pub fn default_curve() -> Vec<CurveKnot> {
    vec![
        CurveKnot {
            load_fraction: PART_LOAD_FRACTION,
            specific_consumption: FULL_LOAD_SPECIFIC_CONSUMPTION * (1.0 - PART_LOAD_GAIN),
        },
        CurveKnot {
            load_fraction: 1.0,
            specific_consumption: FULL_LOAD_SPECIFIC_CONSUMPTION,
        },
    ]
}

impl ElectrolyzerSpec {
    pub fn new(
        capacity: f64,
        curve: Vec<CurveKnot>,
        min_load_fraction: f64,
        lhv: f64,
    ) -> Result<Self> {
        let spec_err = |m: String| Err(Error::Spec(m));
        if !(capacity.is_finite() && capacity > 0.0) {
            return spec_err(format!(
                "electrolyzer capacity {capacity} MW must be positive"
            ));
        }
        if !(lhv.is_finite() && lhv > 0.0) {
            return spec_err(format!("LHV {lhv} kWh/kg must be positive"));
        }
        let Some(first) = curve.first() else {
            return spec_err("efficiency curve has no knots".into());
        };
        if curve.last().map(|k| k.load_fraction) != Some(1.0) {
            return spec_err("efficiency curve must end at load fraction 1.0".into());
        }
        for k in &curve {
            if !(k.load_fraction > 0.0 && k.load_fraction <= 1.0) {
                return spec_err(format!(
                    "knot load fraction {} outside (0, 1]",
                    k.load_fraction
                ));
            }
            if !(k.specific_consumption.is_finite() && k.specific_consumption >= lhv) {
                return spec_err(format!(
                    "specific consumption {} kWh/kg below LHV {lhv} kWh/kg",
                    k.specific_consumption
                ));
            }
        }
        for w in curve.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.load_fraction <= a.load_fraction {
                return spec_err("knot load fractions must be strictly increasing".into());
            }
            // Output per MW is l / sc(l); on a linear segment sc = c + s·l this
            // rises with load only while the intercept c stays non-negative.
            let slope = (b.specific_consumption - a.specific_consumption)
                / (b.load_fraction - a.load_fraction);
            let intercept = a.specific_consumption - slope * a.load_fraction;
            if intercept < 0.0 {
                return spec_err(format!(
                    "curve segment {}..{} makes hydrogen output fall with rising power",
                    a.load_fraction, b.load_fraction
                ));
            }
        }
        if !(0.0..=first.load_fraction).contains(&min_load_fraction) {
            return spec_err(format!(
                "min load fraction {min_load_fraction} outside [0, {}]",
                first.load_fraction
            ));
        }
        Ok(Self {
            capacity,
            curve,
            min_load_fraction,
            lhv,
        })
    }

    /// Two-knot calibrated curve with the default turndown.
    pub fn with_default_curve(capacity: f64) -> Result<Self> {
        Self::new(
            capacity,
            default_curve(),
            DEFAULT_MIN_LOAD_FRACTION,
            LHV_KWH_PER_KG,
        )
    }

    /// Constant efficiency, no turndown limit.
    pub fn constant(capacity: f64, specific_consumption: f64) -> Result<Self> {
        Self::new(
            capacity,
            vec![CurveKnot {
                load_fraction: 1.0,
                specific_consumption,
            }],
            0.0,
            LHV_KWH_PER_KG,
        )
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn curve(&self) -> &[CurveKnot] {
        &self.curve
    }

    pub fn min_load_fraction(&self) -> f64 {
        self.min_load_fraction
    }

    pub fn lhv(&self) -> f64 {
        self.lhv
    }

    pub fn min_power(&self) -> f64 {
        self.min_load_fraction * self.capacity
    }

    /// Piecewise-linear specific consumption, clamped to the first knot below it.
    pub fn specific_consumption(&self, load_fraction: f64) -> f64 {
        let first = self.curve[0];
        if load_fraction <= first.load_fraction {
            return first.specific_consumption;
        }
        for w in self.curve.windows(2) {
            let (a, b) = (w[0], w[1]);
            if load_fraction <= b.load_fraction {
                let t = (load_fraction - a.load_fraction) / (b.load_fraction - a.load_fraction);
                return a.specific_consumption
                    + t * (b.specific_consumption - a.specific_consumption);
            }
        }
        self.curve[self.curve.len() - 1].specific_consumption
    }

    pub fn efficiency(&self, load_fraction: f64) -> f64 {
        self.lhv / self.specific_consumption(load_fraction)
    }

    /// Hydrogen produced (kg) running at `power` MW for `duration` hours.
    pub fn h2_output(&self, power: f64, duration: f64) -> Result<f64> {
        if !(power >= 0.0 && power <= self.capacity) {
            return Err(Error::PowerOutOfRange {
                power,
                capacity: self.capacity,
            });
        }
        Ok(self.output_unchecked(power) * duration)
    }

    fn output_unchecked(&self, power: f64) -> f64 {
        if power <= 0.0 || power < self.min_power() {
            return 0.0;
        }
        power * 1000.0 / self.specific_consumption(power / self.capacity)
    }

    pub fn max_hourly_output(&self) -> f64 {
        self.output_unchecked(self.capacity)
    }

    /// Least power (MW) whose hourly output reaches `target` kg/h.
    pub fn power_for_rate(&self, target: f64) -> Result<f64> {
        let max = self.max_hourly_output();
        if !(target >= 0.0) || target > max * (1.0 + 1e-12) {
            return Err(Error::RateUnreachable { target, max });
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (self.min_power(), self.capacity);
        if self.output_unchecked(lo) >= target && lo > 0.0 {
            return Ok(lo);
        }
        while hi - lo > BISECTION_TOLERANCE_MW {
            let mid = 0.5 * (lo + hi);
            if self.output_unchecked(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Greatest power (MW) whose hourly output stays within `limit` kg/h.
    pub fn max_power_within(&self, limit: f64) -> f64 {
        if self.output_unchecked(self.capacity) <= limit {
            return self.capacity;
        }
        let min = self.min_power();
        if min > 0.0 && self.output_unchecked(min) > limit {
            return 0.0;
        }
        let (mut lo, mut hi) = (min, self.capacity);
        while hi - lo > BISECTION_TOLERANCE_MW {
            let mid = 0.5 * (lo + hi);
            if self.output_unchecked(mid) <= limit {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenewableSpec {
    pub pv_capacity: f64,
    pub wind_capacity: f64,
}

impl Default for RenewableSpec {
    fn default() -> Self {
        // Four 4.2 MW turbines; PV makes up the rest of the 272.8 MW site peak.
        Self {
            pv_capacity: 256.0,
            wind_capacity: 16.8,
        }
    }
}

impl RenewableSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pv_capacity >= 0.0 && self.wind_capacity >= 0.0)
            || !self.pv_capacity.is_finite()
            || !self.wind_capacity.is_finite()
        {
            return Err(Error::Spec(format!(
                "renewable capacities must be non-negative, got PV {} MW and wind {} MW",
                self.pv_capacity, self.wind_capacity
            )));
        }
        Ok(())
    }

    pub fn peak(&self) -> f64 {
        self.pv_capacity + self.wind_capacity
    }

    /// On-site renewable output in MW for the given hour.
    pub fn re_available(&self, dataset: &MarketDataset, hour: usize) -> Result<f64> {
        Ok(dataset.pv_cf().get(hour)? * self.pv_capacity
            + dataset.wind_cf().get(hour)? * self.wind_capacity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageSpec {
    /// kg H₂.
    pub capacity: f64,
}

impl StorageSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(Error::Spec(format!(
                "storage capacity {} kg must be positive",
                self.capacity
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_TRUCK_CAPACITY_KG: f64 = 1000.0;
pub const DEFAULT_ROUND_TRIP_HOURS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub n_trucks: u32,
    /// kg H₂ per truck.
    pub truck_capacity: f64,
    pub round_trip_duration: u32,
}

impl FleetSpec {
    pub fn with_trucks(n_trucks: u32) -> Self {
        Self {
            n_trucks,
            truck_capacity: DEFAULT_TRUCK_CAPACITY_KG,
            round_trip_duration: DEFAULT_ROUND_TRIP_HOURS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trucks < 1 {
            return Err(Error::Spec("fleet needs at least one truck".into()));
        }
        if !(self.truck_capacity.is_finite() && self.truck_capacity > 0.0) {
            return Err(Error::Spec(format!(
                "truck capacity {} kg must be positive",
                self.truck_capacity
            )));
        }
        if self.round_trip_duration < 1 {
            return Err(Error::Spec("round trip must last at least one hour".into()));
        }
        Ok(())
    }
}

/// Electricity sourcing strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Grid only; all renewable output is sold.
    S1,
    /// On-site renewables only; surplus is sold.
    S2,
    /// Renewables first, grid top-up to meet demand.
    S3,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::S1, Strategy::S2, Strategy::S3];

    pub fn index(self) -> u8 {
        match self {
            Strategy::S1 => 1,
            Strategy::S2 => 2,
            Strategy::S3 => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Strategy::ALL.into_iter().find(|s| s.index() == i)
    }

    pub fn description(self) -> &'static str {
        match self {
            Strategy::S1 => "Grid-only",
            Strategy::S2 => "On-site RE only",
            Strategy::S3 => "Hybrid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S1" | "s1" => Ok(Strategy::S1),
            "S2" | "s2" => Ok(Strategy::S2),
            "S3" | "s3" => Ok(Strategy::S3),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Intra-day placement of grid energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulingPolicy {
    /// Cheapest buy-price hours first, with perfect day-ahead foresight.
    #[default]
    CheapestHours,
    /// Uniform electrolyzer power across the day.
    Flat,
}

/// One electrolyzer size class with its sized demand, storage and fleet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub id: u8,
    pub capacity_mw: f64,
    pub daily_demand_kg: f64,
    pub storage_kg: f64,
    pub n_trucks: u32,
}

pub fn default_tiers() -> [Tier; 3] {
    [
        Tier {
            id: 1,
            capacity_mw: 10.0,
            daily_demand_kg: 2_390.0,
            storage_kg: 100.0,
            n_trucks: 2,
        },
        Tier {
            id: 2,
            capacity_mw: 50.0,
            daily_demand_kg: 11_952.0,
            storage_kg: 1_000.0,
            n_trucks: 6,
        },
        Tier {
            id: 3,
            capacity_mw: 100.0,
            daily_demand_kg: 23_903.0,
            storage_kg: 2_000.0,
            n_trucks: 11,
        },
    ]
}

/// Experiment label `<tier>.<strategy>`, e.g. `2.3`.
pub fn experiment_id(tier: u8, strategy: Strategy) -> String {
    format!("{tier}.{}", strategy.index())
}

pub fn parse_experiment_id(id: &str) -> Option<(u8, Strategy)> {
    let (t, s) = id.split_once('.')?;
    Some((t.parse().ok()?, Strategy::from_index(s.parse().ok()?)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub electrolyzer: ElectrolyzerSpec,
    pub renewables: RenewableSpec,
    pub storage: StorageSpec,
    pub fleet: FleetSpec,
    pub strategy: Strategy,
    /// kg H₂ per day.
    pub daily_demand: f64,
    pub policy: SchedulingPolicy,
    /// DKK per kg added to the hydrogen cost on top of grid purchases.
    pub base_variable_cost: f64,
}

impl ExperimentConfig {
    /// Default plant for a tier: calibrated curve, default renewables and fleet.
    pub fn for_tier(tier: &Tier, strategy: Strategy) -> Result<Self> {
        let cfg = Self {
            id: experiment_id(tier.id, strategy),
            electrolyzer: ElectrolyzerSpec::with_default_curve(tier.capacity_mw)?,
            renewables: RenewableSpec::default(),
            storage: StorageSpec {
                capacity: tier.storage_kg,
            },
            fleet: FleetSpec::with_trucks(tier.n_trucks),
            strategy,
            daily_demand: tier.daily_demand_kg,
            policy: SchedulingPolicy::CheapestHours,
            base_variable_cost: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.renewables.validate()?;
        self.storage.validate()?;
        self.fleet.validate()?;
        if !(self.daily_demand.is_finite() && self.daily_demand >= 0.0) {
            return Err(Error::Spec(format!(
                "daily demand {} kg must be non-negative",
                self.daily_demand
            )));
        }
        let max_daily = 24.0 * self.electrolyzer.max_hourly_output();
        if self.daily_demand > max_daily {
            return Err(Error::Spec(format!(
                "daily demand {} kg exceeds 24 h full-load output {max_daily:.1} kg",
                self.daily_demand
            )));
        }
        if !self.base_variable_cost.is_finite() {
            return Err(Error::Spec("base variable cost must be finite".into()));
        }
        Ok(())
    }
}
