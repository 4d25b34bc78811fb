//! Day-ahead planning and hour-by-hour operation of the plant: electrolyzer
//! sourcing per strategy, storage and truck logistics, grid settlement.
//!
//! Hydrogen masses are tracked in whole grams so that the plant's mass
//! balance closes exactly over a full year.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{comment_block, MarketDataset};
use crate::site::{ElectrolyzerSpec, ExperimentConfig, FleetSpec, SchedulingPolicy, Strategy};

const SHORTFALL_EPS_KG: f64 = 1e-9;

pub(crate) fn kg_to_g_floor(kg: f64) -> i64 {
    (kg * 1000.0).floor() as i64
}

pub(crate) fn kg_to_g_ceil(kg: f64) -> i64 {
    (kg * 1000.0).ceil() as i64
}

pub(crate) fn g_to_kg(g: i64) -> f64 {
    g as f64 / 1000.0
}

/// Planned electrolyzer input for one hour, MW.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HourPlan {
    pub re_mw: f64,
    pub grid_mw: f64,
}

impl HourPlan {
    pub fn power(&self) -> f64 {
        self.re_mw + self.grid_mw
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayPlan {
    pub day: usize,
    pub hours: Vec<HourPlan>,
    /// kg H₂ the plan produces if executed unthrottled.
    pub planned_h2: f64,
    /// kg H₂ of daily demand the plan cannot cover (S1/S3 only).
    pub shortfall: f64,
}

fn hour_output(e: &ElectrolyzerSpec, power: f64) -> f64 {
    e.h2_output(power.clamp(0.0, e.capacity()), 1.0)
        .expect("power clamped to operating range")
}

/// Renewable power the electrolyzer can take: capped at capacity, zero below min load.
fn usable_re(e: &ElectrolyzerSpec, re_available: f64) -> f64 {
    let p = re_available.min(e.capacity());
    if p > 0.0 && p >= e.min_power() {
        p
    } else {
        0.0
    }
}

fn stable_order(values: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    idx
}

/// Raises power in the given hour order toward `ceiling` MW until `shortfall`
/// kg is covered. Returns the shortfall left over.
fn top_up(
    e: &ElectrolyzerSpec,
    hours: &mut [HourPlan],
    order: &[usize],
    ceiling: f64,
    mut shortfall: f64,
) -> f64 {
    let full = hour_output(e, ceiling);
    for &h in order {
        if shortfall <= SHORTFALL_EPS_KG {
            break;
        }
        let base = hours[h].power();
        if base >= ceiling {
            continue;
        }
        let base_out = hour_output(e, base);
        let gain = full - base_out;
        if gain <= 0.0 {
            continue;
        }
        if shortfall >= gain {
            hours[h].grid_mw = ceiling - hours[h].re_mw;
            shortfall -= gain;
        } else {
            let target = (base_out + shortfall).min(e.max_hourly_output());
            let p = e
                .power_for_rate(target)
                .expect("target within producible range");
            hours[h].grid_mw = (p - hours[h].re_mw).max(0.0);
            shortfall = 0.0;
        }
    }
    shortfall.max(0.0)
}

/// Plans one day (midnight to midnight) with perfect day-ahead foresight.
pub fn plan_day(config: &ExperimentConfig, dataset: &MarketDataset, day: usize) -> Result<DayPlan> {
    let first = day * 24;
    if day >= dataset.days() {
        return Err(Error::HourOutOfRange {
            hour: first,
            hours: dataset.hours(),
        });
    }
    let e = &config.electrolyzer;
    let demand = config.daily_demand;
    let buy = &dataset.buy_prices()[first..first + 24];
    let sell = &dataset.sell_prices()[first..first + 24];
    let mut hours = vec![HourPlan::default(); 24];

    if config.strategy != Strategy::S1 {
        for (h, plan) in hours.iter_mut().enumerate() {
            plan.re_mw = usable_re(e, config.renewables.re_available(dataset, first + h)?);
        }
    }

    let mut shortfall = 0.0;
    match config.strategy {
        Strategy::S2 => {}
        Strategy::S1 | Strategy::S3 => {
            let re_out: f64 = hours.iter().map(|p| hour_output(e, p.re_mw)).sum();
            if config.strategy == Strategy::S3 && re_out > demand {
                // Sell the renewable surplus in the best-paid hours.
                trim_surplus(e, &mut hours, &stable_order(sell, true), re_out - demand);
            }
            let missing = (demand - re_out).max(0.0);
            shortfall = match config.policy {
                SchedulingPolicy::CheapestHours => top_up(
                    e,
                    &mut hours,
                    &stable_order(buy, false),
                    e.capacity(),
                    missing,
                ),
                SchedulingPolicy::Flat => {
                    let level = e.power_for_rate((demand / 24.0).min(e.max_hourly_output()))?;
                    let chronological: Vec<usize> = (0..24).collect();
                    top_up(e, &mut hours, &chronological, level, missing)
                }
            };
        }
    }

    let planned_h2 = hours.iter().map(|p| hour_output(e, p.power())).sum();
    Ok(DayPlan {
        day,
        hours,
        planned_h2,
        shortfall,
    })
}

fn trim_surplus(e: &ElectrolyzerSpec, hours: &mut [HourPlan], order: &[usize], mut excess: f64) {
    for &h in order {
        if excess <= SHORTFALL_EPS_KG {
            break;
        }
        let out = hour_output(e, hours[h].re_mw);
        if out <= 0.0 {
            continue;
        }
        if out <= excess {
            hours[h].re_mw = 0.0;
            excess -= out;
        } else {
            hours[h].re_mw = e
                .power_for_rate(out - excess)
                .expect("below current output");
            excess = 0.0;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruckState {
    Idle,
    /// Docked with cargo, extending the buffer until full.
    Loading {
        load_g: i64,
    },
    /// On a round trip; becomes idle when `remaining` reaches zero.
    Away {
        remaining: u32,
    },
}

/// Storage tank and truck fleet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticsState {
    pub storage_g: i64,
    pub storage_capacity_g: i64,
    pub trucks: Vec<TruckState>,
    pub truck_capacity_g: i64,
    pub round_trip_duration: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LogisticsStep {
    pub delivered_g: i64,
    pub departures: u32,
    /// Trucks loading or on the road at the end of the hour.
    pub busy_trucks: u32,
}

impl LogisticsState {
    pub fn new(storage_capacity_kg: f64, fleet: &FleetSpec) -> Self {
        Self {
            storage_g: 0,
            storage_capacity_g: kg_to_g_floor(storage_capacity_kg),
            trucks: vec![TruckState::Idle; fleet.n_trucks as usize],
            truck_capacity_g: kg_to_g_floor(fleet.truck_capacity),
            round_trip_duration: fleet.round_trip_duration,
        }
    }

    /// Advances trucks on the road by one hour.
    pub fn begin_hour(&mut self) {
        for t in self.trucks.iter_mut() {
            if let TruckState::Away { remaining } = t {
                *remaining -= 1;
                if *remaining == 0 {
                    *t = TruckState::Idle;
                }
            }
        }
    }

    /// Grams of hydrogen the tank plus docked and idle trucks can still take.
    pub fn absorb_capacity_g(&self) -> i64 {
        let truck_room: i64 = self
            .trucks
            .iter()
            .map(|t| match t {
                TruckState::Idle => self.truck_capacity_g,
                TruckState::Loading { load_g } => self.truck_capacity_g - load_g,
                TruckState::Away { .. } => 0,
            })
            .sum();
        self.storage_capacity_g - self.storage_g + truck_room
    }

    pub fn truck_inventory_g(&self) -> i64 {
        self.trucks
            .iter()
            .map(|t| match t {
                TruckState::Loading { load_g } => *load_g,
                _ => 0,
            })
            .sum()
    }
}

/// Moves one hour's production through storage into trucks. Partially
/// loaded trucks fill first, then idle ones in fleet order; a full truck
/// departs and its cargo counts as delivered.
pub fn step_logistics(state: &mut LogisticsState, produced_g: i64) -> LogisticsStep {
    let mut pool = state.storage_g + produced_g;
    let mut step = LogisticsStep::default();
    let cap = state.truck_capacity_g;
    let mut fill = |t: &mut TruckState, pool: &mut i64| {
        let load = match *t {
            TruckState::Loading { load_g } => load_g,
            TruckState::Idle => 0,
            TruckState::Away { .. } => return,
        };
        let take = (cap - load).min(*pool);
        if take <= 0 {
            return;
        }
        *pool -= take;
        let load = load + take;
        if load >= cap {
            step.delivered_g += load;
            step.departures += 1;
            *t = TruckState::Away {
                remaining: state.round_trip_duration,
            };
        } else {
            *t = TruckState::Loading { load_g: load };
        }
    };
    for t in state
        .trucks
        .iter_mut()
        .filter(|t| matches!(t, TruckState::Loading { .. }))
    {
        fill(t, &mut pool);
    }
    for t in state
        .trucks
        .iter_mut()
        .filter(|t| matches!(t, TruckState::Idle))
    {
        fill(t, &mut pool);
    }
    debug_assert!(pool <= state.storage_capacity_g, "storage overflow");
    state.storage_g = pool;
    step.busy_trucks = state
        .trucks
        .iter()
        .filter(|t| !matches!(t, TruckState::Idle))
        .count() as u32;
    step
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub hour: usize,
    /// MWh.
    pub re_generated: f64,
    pub re_to_electrolyzer: f64,
    pub grid_purchased: f64,
    pub re_sold: f64,
    /// Grams H₂.
    pub h2_produced_g: i64,
    pub storage_level_end_g: i64,
    pub h2_delivered_g: i64,
    pub truck_inventory_g: i64,
    /// DKK.
    pub purchase_cost: f64,
    pub sale_revenue: f64,
    /// kg CO₂.
    pub co2_emitted: f64,
    pub trucks_busy: u32,
}

impl HourRecord {
    pub fn h2_produced(&self) -> f64 {
        g_to_kg(self.h2_produced_g)
    }

    pub fn storage_level_end(&self) -> f64 {
        g_to_kg(self.storage_level_end_g)
    }

    pub fn h2_delivered(&self) -> f64 {
        g_to_kg(self.h2_delivered_g)
    }

    pub fn electrolyzer_input(&self) -> f64 {
        self.re_to_electrolyzer + self.grid_purchased
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub config_id: String,
    pub year: i32,
    pub records: Vec<HourRecord>,
    pub unserved_demand_g: i64,
    pub throttled_hours: u32,
    /// Hours in which surplus renewables were sold at a negative net price.
    pub negative_price_sales: u32,
}

impl SimulationTrace {
    pub fn unserved_demand(&self) -> f64 {
        g_to_kg(self.unserved_demand_g)
    }

    pub fn final_storage_g(&self) -> i64 {
        self.records.last().map_or(0, |r| r.storage_level_end_g)
    }

    pub fn final_truck_inventory_g(&self) -> i64 {
        self.records.last().map_or(0, |r| r.truck_inventory_g)
    }

    pub fn summary(&self) -> TraceSummary {
        let sum = |f: fn(&HourRecord) -> f64| self.records.iter().map(f).sum::<f64>();
        let sum_g = |f: fn(&HourRecord) -> i64| self.records.iter().map(f).sum::<i64>();
        TraceSummary {
            config_id: self.config_id.clone(),
            year: self.year,
            hours: self.records.len(),
            re_generated_mwh: sum(|r| r.re_generated),
            re_to_electrolyzer_mwh: sum(|r| r.re_to_electrolyzer),
            grid_purchased_mwh: sum(|r| r.grid_purchased),
            re_sold_mwh: sum(|r| r.re_sold),
            h2_produced_kg: g_to_kg(sum_g(|r| r.h2_produced_g)),
            h2_delivered_kg: g_to_kg(sum_g(|r| r.h2_delivered_g)),
            final_storage_kg: g_to_kg(self.final_storage_g()),
            final_truck_inventory_kg: g_to_kg(self.final_truck_inventory_g()),
            purchase_cost_dkk: sum(|r| r.purchase_cost),
            sale_revenue_dkk: sum(|r| r.sale_revenue),
            co2_emitted_kg: sum(|r| r.co2_emitted),
            unserved_demand_kg: self.unserved_demand(),
            throttled_hours: self.throttled_hours,
            negative_price_sales: self.negative_price_sales,
        }
    }
}

/// Annual totals of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub config_id: String,
    pub year: i32,
    pub hours: usize,
    pub re_generated_mwh: f64,
    pub re_to_electrolyzer_mwh: f64,
    pub grid_purchased_mwh: f64,
    pub re_sold_mwh: f64,
    pub h2_produced_kg: f64,
    pub h2_delivered_kg: f64,
    pub final_storage_kg: f64,
    pub final_truck_inventory_kg: f64,
    pub purchase_cost_dkk: f64,
    pub sale_revenue_dkk: f64,
    pub co2_emitted_kg: f64,
    pub unserved_demand_kg: f64,
    pub throttled_hours: u32,
    pub negative_price_sales: u32,
}

/// Runs one experiment over the dataset's full year.
pub fn simulate(config: &ExperimentConfig, dataset: &MarketDataset) -> Result<SimulationTrace> {
    config.validate()?;
    let e = &config.electrolyzer;
    let mut logistics = LogisticsState::new(config.storage.capacity, &config.fleet);
    let mut records = Vec::with_capacity(dataset.hours());
    let mut throttled_hours = 0;
    let mut negative_price_sales = 0;
    let mut unserved_demand_g = 0;
    let demand_g = kg_to_g_floor(config.daily_demand);
    let co2 = dataset.co2().values();

    for day in 0..dataset.days() {
        let plan = plan_day(config, dataset, day)?;
        let mut produced_today = 0;
        for (i, hp) in plan.hours.iter().enumerate() {
            let hour = day * 24 + i;
            let re_generated = config.renewables.re_available(dataset, hour)?;
            logistics.begin_hour();

            let mut re_mw = hp.re_mw;
            let mut grid_mw = hp.grid_mw;
            let power = (re_mw + grid_mw).min(e.capacity());
            let absorb_g = logistics.absorb_capacity_g();
            let mut produced_g = kg_to_g_ceil(hour_output(e, power));
            if produced_g > absorb_g {
                // No room left: back off grid power first, then renewables.
                let p = e.max_power_within(g_to_kg(absorb_g));
                grid_mw = grid_mw.min((p - re_mw).max(0.0));
                re_mw = (p - grid_mw).min(re_mw);
                produced_g = kg_to_g_floor(hour_output(e, re_mw + grid_mw)).min(absorb_g);
                throttled_hours += 1;
            }
            produced_today += produced_g;

            let re_sold = re_generated - re_mw;
            let sell = dataset.sell_prices()[hour];
            if re_sold > 0.0 && sell < 0.0 {
                negative_price_sales += 1;
            }
            let step = step_logistics(&mut logistics, produced_g);
            records.push(HourRecord {
                hour,
                re_generated,
                re_to_electrolyzer: re_mw,
                grid_purchased: grid_mw,
                re_sold,
                h2_produced_g: produced_g,
                storage_level_end_g: logistics.storage_g,
                h2_delivered_g: step.delivered_g,
                truck_inventory_g: logistics.truck_inventory_g(),
                purchase_cost: grid_mw * dataset.buy_prices()[hour],
                sale_revenue: re_sold * sell,
                co2_emitted: grid_mw * co2[hour],
                trucks_busy: step.busy_trucks,
            });
        }
        // One gram of slack absorbs per-hour rounding.
        unserved_demand_g += (demand_g - produced_today - 1).max(0);
    }

    Ok(SimulationTrace {
        config_id: config.id.clone(),
        year: dataset.year(),
        records,
        unserved_demand_g,
        throttled_hours,
        negative_price_sales,
    })
}

pub const TRACE_COLUMNS: [&str; 14] = [
    "hour",
    "re_generated_mwh",
    "re_to_electrolyzer_mwh",
    "grid_purchased_mwh",
    "re_sold_mwh",
    "h2_produced_kg",
    "storage_level_end_kg",
    "h2_delivered_kg",
    "truck_inventory_kg",
    "purchase_cost_dkk",
    "sale_revenue_dkk",
    "co2_emitted_kg",
    "trucks_busy",
    "year",
];

fn grams_str(g: i64) -> String {
    let sign = if g < 0 { "-" } else { "" };
    let a = g.unsigned_abs();
    format!("{sign}{}.{:03}", a / 1000, a % 1000)
}

fn parse_grams(s: &str) -> Option<i64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then(|| (v * 1000.0).round() as i64)
}

/// CSV text of the trace: one row per hour, full float precision.
pub fn trace_csv(trace: &SimulationTrace, header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str(&format!(
        "# config_id={} unserved_demand_kg={} throttled_hours={} negative_price_sales={}\n",
        trace.config_id,
        grams_str(trace.unserved_demand_g),
        trace.throttled_hours,
        trace.negative_price_sales
    ));
    out.push_str(&TRACE_COLUMNS.join(","));
    out.push('\n');
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.hour,
            r.re_generated,
            r.re_to_electrolyzer,
            r.grid_purchased,
            r.re_sold,
            grams_str(r.h2_produced_g),
            grams_str(r.storage_level_end_g),
            grams_str(r.h2_delivered_g),
            grams_str(r.truck_inventory_g),
            r.purchase_cost,
            r.sale_revenue,
            r.co2_emitted,
            r.trucks_busy,
            trace.year
        ));
    }
    out
}

pub fn write_trace_csv(
    trace: &SimulationTrace,
    path: impl AsRef<Path>,
    header: &[String],
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, trace_csv(trace, header)).map_err(|e| Error::io(path, e))
}

/// Reads a trace written by [`write_trace_csv`].
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<SimulationTrace> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut config_id = String::new();
    let mut unserved_demand_g = 0;
    let mut throttled_hours = 0;
    let mut negative_price_sales = 0;
    for line in text.lines().filter_map(|l| l.strip_prefix("# config_id=")) {
        let mut parts = line.split(' ');
        config_id = parts.next().unwrap_or_default().to_string();
        for kv in parts {
            match kv.split_once('=') {
                Some(("unserved_demand_kg", v)) => unserved_demand_g = parse_grams(v).unwrap_or(0),
                Some(("throttled_hours", v)) => throttled_hours = v.parse().unwrap_or(0),
                Some(("negative_price_sales", v)) => negative_price_sales = v.parse().unwrap_or(0),
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers != TRACE_COLUMNS {
        return Err(Error::Parse {
            file,
            row: 1,
            column: "header".into(),
            message: format!("unexpected trace header '{}'", headers.join(",")),
        });
    }
    let mut records = Vec::new();
    let mut year = 0;
    for rec in reader.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let err = |col: usize| Error::Parse {
            file: file.clone(),
            row,
            column: TRACE_COLUMNS[col].to_string(),
            message: format!("unparsable value '{}'", rec.get(col).unwrap_or("")),
        };
        let f = |col: usize| -> Result<f64> {
            rec.get(col)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| err(col))
        };
        let g = |col: usize| -> Result<i64> {
            rec.get(col).and_then(parse_grams).ok_or_else(|| err(col))
        };
        let u = |col: usize| -> Result<u64> {
            rec.get(col)
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| err(col))
        };
        year = u(13)? as i32;
        records.push(HourRecord {
            hour: u(0)? as usize,
            re_generated: f(1)?,
            re_to_electrolyzer: f(2)?,
            grid_purchased: f(3)?,
            re_sold: f(4)?,
            h2_produced_g: g(5)?,
            storage_level_end_g: g(6)?,
            h2_delivered_g: g(7)?,
            truck_inventory_g: g(8)?,
            purchase_cost: f(9)?,
            sale_revenue: f(10)?,
            co2_emitted: f(11)?,
            trucks_busy: u(12)? as u32,
        });
    }
    Ok(SimulationTrace {
        config_id,
        year,
        records,
        unserved_demand_g,
        throttled_hours,
        negative_price_sales,
    })
}
