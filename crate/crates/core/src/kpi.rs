//! The thirteen plant KPIs and their assembly into a decision matrix.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dispatch::SimulationTrace;
use crate::error::{Error, Result};
use crate::market::comment_block;
use crate::site::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Benefit,
    Cost,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Benefit => "benefit",
            Orientation::Cost => "cost",
        })
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "benefit" => Ok(Orientation::Benefit),
            "cost" => Ok(Orientation::Cost),
            other => Err(Error::Matrix(format!("unknown orientation '{other}'"))),
        }
    }
}

/// KPI identifiers in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kpi {
    ProducedH2,
    GridConsumption,
    GridCost,
    H2Cost,
    ElectricitySold,
    SaleRevenue,
    Co2Total,
    Co2PerKg,
    ElectrolyzerFlh,
    StorageSize,
    StorageUtilization,
    NTrucks,
    TruckUtilization,
}

impl Kpi {
    pub const ALL: [Kpi; 13] = [
        Kpi::ProducedH2,
        Kpi::GridConsumption,
        Kpi::GridCost,
        Kpi::H2Cost,
        Kpi::ElectricitySold,
        Kpi::SaleRevenue,
        Kpi::Co2Total,
        Kpi::Co2PerKg,
        Kpi::ElectrolyzerFlh,
        Kpi::StorageSize,
        Kpi::StorageUtilization,
        Kpi::NTrucks,
        Kpi::TruckUtilization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kpi::ProducedH2 => "produced_h2",
            Kpi::GridConsumption => "grid_consumption",
            Kpi::GridCost => "grid_cost",
            Kpi::H2Cost => "h2_cost",
            Kpi::ElectricitySold => "electricity_sold",
            Kpi::SaleRevenue => "sale_revenue",
            Kpi::Co2Total => "co2_total",
            Kpi::Co2PerKg => "co2_per_kg",
            Kpi::ElectrolyzerFlh => "electrolyzer_flh",
            Kpi::StorageSize => "storage_size",
            Kpi::StorageUtilization => "storage_utilization",
            Kpi::NTrucks => "n_trucks",
            Kpi::TruckUtilization => "truck_utilization",
        }
    }

    /// Row label used in the Markdown tier tables.
    pub fn label(self) -> &'static str {
        match self {
            Kpi::ProducedH2 => "Produced hydrogen [ton]",
            Kpi::GridConsumption => "Total grid electricity consumption [MWh]",
            Kpi::GridCost => "Cost of grid electricity consumption [mDKK]",
            Kpi::H2Cost => "Hydrogen production cost [DKK/kg]",
            Kpi::ElectricitySold => "Total electricity sold to grid [MWh]",
            Kpi::SaleRevenue => "Revenue from selling electricity [mDKK]",
            Kpi::Co2Total => "CO2 emissions [ton]",
            Kpi::Co2PerKg => "CO2 emissions [kgCO2/kgH2]",
            Kpi::ElectrolyzerFlh => "Electrolyzer usage [full load hours]",
            Kpi::StorageSize => "On-site storage size [kgH2]",
            Kpi::StorageUtilization => "On-site storage utilization [%]",
            Kpi::NTrucks => "Number of trucks",
            Kpi::TruckUtilization => "Hydrogen transportation truck utilization [%]",
        }
    }

    pub fn default_orientation(self) -> Orientation {
        match self {
            Kpi::ProducedH2
            | Kpi::ElectricitySold
            | Kpi::SaleRevenue
            | Kpi::ElectrolyzerFlh
            | Kpi::StorageUtilization
            | Kpi::TruckUtilization => Orientation::Benefit,
            _ => Orientation::Cost,
        }
    }

    pub fn from_name(name: &str) -> Option<Kpi> {
        Kpi::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// KPIs of one experiment. Per-kg values are `None` when nothing was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    /// Tonnes.
    pub produced_h2: f64,
    /// MWh.
    pub grid_consumption: f64,
    /// Million DKK.
    pub grid_cost: f64,
    /// DKK/kg.
    pub h2_cost: Option<f64>,
    /// MWh.
    pub electricity_sold: f64,
    /// Million DKK.
    pub sale_revenue: f64,
    /// Tonnes.
    pub co2_total: f64,
    /// kg CO₂ per kg H₂.
    pub co2_per_kg: Option<f64>,
    pub electrolyzer_flh: f64,
    /// kg.
    pub storage_size: f64,
    /// Time-averaged fill fraction.
    pub storage_utilization: f64,
    pub n_trucks: f64,
    /// Busy fraction of fleet-hours.
    pub truck_utilization: f64,
}

impl KpiReport {
    pub fn get(&self, kpi: Kpi) -> Option<f64> {
        match kpi {
            Kpi::ProducedH2 => Some(self.produced_h2),
            Kpi::GridConsumption => Some(self.grid_consumption),
            Kpi::GridCost => Some(self.grid_cost),
            Kpi::H2Cost => self.h2_cost,
            Kpi::ElectricitySold => Some(self.electricity_sold),
            Kpi::SaleRevenue => Some(self.sale_revenue),
            Kpi::Co2Total => Some(self.co2_total),
            Kpi::Co2PerKg => self.co2_per_kg,
            Kpi::ElectrolyzerFlh => Some(self.electrolyzer_flh),
            Kpi::StorageSize => Some(self.storage_size),
            Kpi::StorageUtilization => Some(self.storage_utilization),
            Kpi::NTrucks => Some(self.n_trucks),
            Kpi::TruckUtilization => Some(self.truck_utilization),
        }
    }

    pub fn from_values(values: &[Option<f64>; 13]) -> Self {
        let v = |k: Kpi| values[k as usize];
        let req = |k: Kpi| v(k).unwrap_or(f64::NAN);
        Self {
            produced_h2: req(Kpi::ProducedH2),
            grid_consumption: req(Kpi::GridConsumption),
            grid_cost: req(Kpi::GridCost),
            h2_cost: v(Kpi::H2Cost),
            electricity_sold: req(Kpi::ElectricitySold),
            sale_revenue: req(Kpi::SaleRevenue),
            co2_total: req(Kpi::Co2Total),
            co2_per_kg: v(Kpi::Co2PerKg),
            electrolyzer_flh: req(Kpi::ElectrolyzerFlh),
            storage_size: req(Kpi::StorageSize),
            storage_utilization: req(Kpi::StorageUtilization),
            n_trucks: req(Kpi::NTrucks),
            truck_utilization: req(Kpi::TruckUtilization),
        }
    }

    /// Checks the cross-KPI relations at relative tolerance `tol`.
    pub fn consistency_violations(
        &self,
        base_variable_cost: f64,
        hours: usize,
        tol: f64,
    ) -> Vec<String> {
        let mut out = Vec::new();
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12);
        if let Some(c) = self.co2_per_kg {
            if !close(c * self.produced_h2, self.co2_total) {
                out.push(format!(
                    "co2_per_kg × produced_h2 = {} ≠ co2_total {}",
                    c * self.produced_h2,
                    self.co2_total
                ));
            }
        }
        if let Some(h) = self.h2_cost {
            // h2_cost [DKK/kg] × t = kDKK; grid_cost in mDKK.
            let lhs = h * self.produced_h2 / 1000.0;
            let rhs = self.grid_cost + base_variable_cost * self.produced_h2 / 1000.0;
            if !close(lhs, rhs) {
                out.push(format!("h2_cost × produced_h2 = {lhs} mDKK ≠ {rhs} mDKK"));
            }
        }
        if self.electrolyzer_flh > hours as f64 + 1e-9 {
            out.push(format!(
                "{} full-load hours exceed {hours} h",
                self.electrolyzer_flh
            ));
        }
        for (name, u) in [
            ("storage", self.storage_utilization),
            ("truck", self.truck_utilization),
        ] {
            if !(0.0..=1.0).contains(&u) {
                out.push(format!("{name} utilization {u} outside [0, 1]"));
            }
        }
        out
    }
}

/// Reduces a full-year trace to its KPI report.
pub fn compute_kpis(trace: &SimulationTrace, config: &ExperimentConfig) -> Result<KpiReport> {
    let hours = trace.records.len();
    if hours == 0 {
        return Err(Error::Series(format!(
            "trace {} has no records",
            trace.config_id
        )));
    }
    let sum =
        |f: &dyn Fn(&crate::dispatch::HourRecord) -> f64| trace.records.iter().map(f).sum::<f64>();
    let produced_g: i64 = trace.records.iter().map(|r| r.h2_produced_g).sum();
    let produced_kg = produced_g as f64 / 1000.0;
    let purchase = sum(&|r| r.purchase_cost);
    let co2_kg = sum(&|r| r.co2_emitted);
    let input_mwh = sum(&|r| r.electrolyzer_input());
    let storage_g: i64 = trace.records.iter().map(|r| r.storage_level_end_g).sum();
    let busy: u64 = trace.records.iter().map(|r| r.trucks_busy as u64).sum();

    let per_kg = |x: f64| (produced_g > 0).then(|| x / produced_kg);
    Ok(KpiReport {
        produced_h2: produced_kg / 1000.0,
        grid_consumption: sum(&|r| r.grid_purchased),
        grid_cost: purchase / 1e6,
        h2_cost: per_kg(purchase + config.base_variable_cost * produced_kg),
        electricity_sold: sum(&|r| r.re_sold),
        sale_revenue: sum(&|r| r.sale_revenue) / 1e6,
        co2_total: co2_kg / 1000.0,
        co2_per_kg: per_kg(co2_kg),
        electrolyzer_flh: input_mwh / config.electrolyzer.capacity(),
        storage_size: config.storage.capacity,
        storage_utilization: storage_g as f64 / 1000.0 / hours as f64 / config.storage.capacity,
        n_trucks: config.fleet.n_trucks as f64,
        truck_utilization: busy as f64 / (config.fleet.n_trucks as f64 * hours as f64),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn parse_opt(s: &str) -> Option<Option<f64>> {
    match s.trim() {
        "NA" => Some(None),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
    }
}

/// `kpis_<id>.csv`: one header row of the 13 KPI names, one value row.
pub fn kpi_csv(report: &KpiReport, header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str(&Kpi::ALL.map(Kpi::name).join(","));
    out.push('\n');
    out.push_str(&Kpi::ALL.map(|k| fmt_opt(report.get(k))).join(","));
    out.push('\n');
    out
}

pub fn read_kpi_csv(path: impl AsRef<Path>) -> Result<KpiReport> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers != Kpi::ALL.map(|k| k.name().to_string()) {
        return Err(Error::Parse {
            file,
            row: 1,
            column: "header".into(),
            message: "expected the 13 KPI columns".into(),
        });
    }
    let rec = reader
        .records()
        .next()
        .ok_or_else(|| Error::Series(format!("{file}: no KPI row")))??;
    let mut values = [None; 13];
    for (i, k) in Kpi::ALL.iter().enumerate() {
        let raw = rec.get(i).unwrap_or("");
        values[i] = parse_opt(raw).ok_or_else(|| Error::Parse {
            file: file.clone(),
            row: 2,
            column: k.name().into(),
            message: format!("unparsable value '{raw}'"),
        })?;
    }
    Ok(KpiReport::from_values(&values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub orientation: Orientation,
}

/// Alternatives × criteria values with benefit/cost orientation per criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionMatrix {
    alternatives: Vec<String>,
    criteria: Vec<Criterion>,
    values: Vec<Vec<f64>>,
}

impl DecisionMatrix {
    pub fn new(
        alternatives: Vec<String>,
        criteria: Vec<Criterion>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if alternatives.is_empty() || criteria.is_empty() {
            return Err(Error::Matrix(
                "needs at least one alternative and one criterion".into(),
            ));
        }
        if values.len() != alternatives.len() {
            return Err(Error::Matrix(format!(
                "{} value rows for {} alternatives",
                values.len(),
                alternatives.len()
            )));
        }
        for (i, c) in criteria.iter().enumerate() {
            if criteria[..i].iter().any(|p| p.name == c.name) {
                return Err(Error::Matrix(format!("duplicate criterion '{}'", c.name)));
            }
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != criteria.len() {
                return Err(Error::Matrix(format!(
                    "row '{}' has {} values for {} criteria",
                    alternatives[i],
                    row.len(),
                    criteria.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Matrix(format!(
                    "non-finite value for '{}' / '{}'",
                    alternatives[i], criteria[j].name
                )));
            }
        }
        Ok(Self {
            alternatives,
            criteria,
            values,
        })
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    pub fn n_criteria(&self) -> usize {
        self.criteria.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[j])
    }

    pub fn with_orientation(mut self, name: &str, orientation: Orientation) -> Result<Self> {
        let c = self
            .criteria
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Matrix(format!("unknown criterion '{name}'")))?;
        c.orientation = orientation;
        Ok(self)
    }

    /// Copy with alternatives reordered by `order` (a permutation of row indices).
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            alternatives: order
                .iter()
                .map(|&i| self.alternatives[i].clone())
                .collect(),
            criteria: self.criteria.clone(),
            values: order.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }

    /// Copy with column `j` replaced by `f(x)`.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row[j] = f(row[j]);
                row
            })
            .collect();
        Self::new(self.alternatives.clone(), self.criteria.clone(), values)
    }
}

/// Orientation per KPI; starts from the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationConfig(pub [Orientation; 13]);

impl Default for OrientationConfig {
    fn default() -> Self {
        Self(Kpi::ALL.map(Kpi::default_orientation))
    }
}

impl OrientationConfig {
    pub fn set(&mut self, kpi: Kpi, orientation: Orientation) {
        self.0[kpi as usize] = orientation;
    }

    pub fn get(&self, kpi: Kpi) -> Orientation {
        self.0[kpi as usize]
    }
}

/// One row per report in the given order, the 13 KPIs as columns.
pub fn build_decision_matrix(
    labels: &[String],
    reports: &[KpiReport],
    orientations: &OrientationConfig,
) -> Result<DecisionMatrix> {
    if reports.len() < 2 {
        return Err(Error::Matrix(format!(
            "needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    if labels.len() != reports.len() {
        return Err(Error::Matrix(format!(
            "{} labels for {} reports",
            labels.len(),
            reports.len()
        )));
    }
    let criteria = Kpi::ALL
        .iter()
        .map(|&k| Criterion {
            name: k.name().to_string(),
            orientation: orientations.get(k),
        })
        .collect();
    let mut values = Vec::with_capacity(reports.len());
    for (label, report) in labels.iter().zip(reports) {
        let row = Kpi::ALL
            .iter()
            .map(|&k| {
                report.get(k).ok_or_else(|| Error::UndefinedKpi {
                    alternative: label.clone(),
                    criterion: k.name().to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    DecisionMatrix::new(labels.to_vec(), criteria, values)
}

/// `decision_matrix.csv`: header of criterion names, an orientation row,
/// then one row per alternative.
pub fn decision_matrix_csv(matrix: &DecisionMatrix, header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str("alternative");
    for c in matrix.criteria() {
        out.push(',');
        out.push_str(&c.name);
    }
    out.push_str("\norientation");
    for c in matrix.criteria() {
        out.push(',');
        out.push_str(&c.orientation.to_string());
    }
    out.push('\n');
    for (label, row) in matrix.alternatives().iter().zip(matrix.values()) {
        out.push_str(label);
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn read_decision_matrix(path: impl AsRef<Path>) -> Result<DecisionMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_decision_matrix(&text, &path.display().to_string())
}

pub fn parse_decision_matrix(text: &str, file: &str) -> Result<DecisionMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(Error::Parse {
            file: file.into(),
            row: 1,
            column: "header".into(),
            message: "expected an alternative column followed by criteria".into(),
        });
    }
    let names = &headers[1..];
    let mut records = reader.records();
    let orient = records.next().ok_or_else(|| Error::Parse {
        file: file.into(),
        row: 2,
        column: "orientation".into(),
        message: "missing orientation row".into(),
    })??;
    let row_no = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
    if orient.get(0) != Some("orientation") {
        return Err(Error::Parse {
            file: file.into(),
            row: row_no(&orient),
            column: "alternative".into(),
            message: "second row must be the orientation row".into(),
        });
    }
    let mut criteria = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let raw = orient.get(j + 1).unwrap_or("");
        let orientation = raw.parse().map_err(|_| Error::Parse {
            file: file.into(),
            row: row_no(&orient),
            column: name.clone(),
            message: format!("orientation '{raw}' is neither benefit nor cost"),
        })?;
        criteria.push(Criterion {
            name: name.clone(),
            orientation,
        });
    }
    let mut alternatives = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec?;
        alternatives.push(rec.get(0).unwrap_or("").to_string());
        let mut row = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let raw = rec.get(j + 1).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                file: file.into(),
                row: row_no(&rec),
                column: name.clone(),
                message: format!("unparsable number '{raw}'"),
            })?;
            row.push(v);
        }
        values.push(row);
    }
    DecisionMatrix::new(alternatives, criteria, values)
}
