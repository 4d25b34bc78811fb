//! Hourly market and resource data: spot prices, grid CO₂ intensity, layered
//! grid tariffs and renewable capacity factors for one calendar year.
//!
//! Datasets either come from the canonical CSV layout (`spot.csv`, `co2.csv`,
//! `pv_cf.csv`, `wind_cf.csv`, `tariffs.csv`) or from the seeded synthetic
//! generator in [`generate_synthetic`].

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn hours_in_year(year: i32) -> usize {
    if is_leap_year(year) {
        8784
    } else {
        8760
    }
}

fn year_start(year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("January 1st exists in every year")
}

/// UTC timestamp of the given hour of the year.
pub fn hour_timestamp(year: i32, hour: usize) -> NaiveDateTime {
    year_start(year) + Duration::hours(hour as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesUnit {
    DkkPerMwh,
    KgCo2PerMwh,
    CapacityFactor,
}

impl SeriesUnit {
    fn column(self) -> &'static str {
        match self {
            SeriesUnit::DkkPerMwh => "price_dkk_per_mwh",
            SeriesUnit::KgCo2PerMwh => "kg_co2_per_mwh",
            SeriesUnit::CapacityFactor => "capacity_factor",
        }
    }
}

/// One value per hour of a calendar year.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    start_year: i32,
    values: Vec<f64>,
    unit: SeriesUnit,
}

impl HourlySeries {
    pub fn new(start_year: i32, values: Vec<f64>, unit: SeriesUnit) -> Result<Self> {
        let expected = hours_in_year(start_year);
        if values.len() != expected {
            return Err(Error::Series(format!(
                "{} values for year {start_year}, expected {expected}",
                values.len()
            )));
        }
        for (hour, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Series(format!("non-finite value at hour {hour}")));
            }
            match unit {
                SeriesUnit::CapacityFactor if !(0.0..=1.0).contains(&v) => {
                    return Err(Error::Series(format!(
                        "capacity factor {v} at hour {hour} outside [0, 1]"
                    )));
                }
                SeriesUnit::KgCo2PerMwh if v < 0.0 => {
                    return Err(Error::Series(format!(
                        "negative CO2 intensity {v} at hour {hour}"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            start_year,
            values,
            unit,
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn unit(&self) -> SeriesUnit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, hour: usize) -> Result<f64> {
        self.values.get(hour).copied().ok_or(Error::HourOutOfRange {
            hour,
            hours: self.values.len(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Summer runs April through September, winter the remaining months.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    All,
    Summer,
    Winter,
}

impl Season {
    pub fn of_month(month: u32) -> Season {
        if (4..=9).contains(&month) {
            Season::Summer
        } else {
            Season::Winter
        }
    }

    fn covers(self, season: Season) -> bool {
        self == Season::All || self == season
    }
}

impl FromStr for Season {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(Season::All),
            "summer" => Ok(Season::Summer),
            "winter" => Ok(Season::Winter),
            other => Err(format!("unknown season '{other}'")),
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Season::All => "all",
            Season::Summer => "summer",
            Season::Winter => "winter",
        })
    }
}

/// Inclusive hour-of-day range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HourRange {
    pub first: u8,
    pub last: u8,
}

impl HourRange {
    pub const ALL: HourRange = HourRange { first: 0, last: 23 };

    pub fn new(first: u8, last: u8) -> Result<Self> {
        if first > last || last > 23 {
            return Err(Error::Tariff(format!("invalid hour range {first}-{last}")));
        }
        Ok(Self { first, last })
    }

    pub fn contains(&self, hour_of_day: u32) -> bool {
        (self.first as u32..=self.last as u32).contains(&hour_of_day)
    }
}

impl FromStr for HourRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "all" {
            return Ok(HourRange::ALL);
        }
        let parse = |p: &str| {
            p.trim()
                .parse::<u8>()
                .map_err(|_| format!("invalid hour '{p}' in range '{s}'"))
        };
        let (first, last) = match s.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let h = parse(s)?;
                (h, h)
            }
        };
        HourRange::new(first, last).map_err(|e| e.to_string())
    }
}

impl fmt::Display for HourRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == HourRange::ALL {
            f.write_str("all")
        } else {
            write!(f, "{}-{}", self.first, self.last)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TariffBand {
    pub season: Season,
    pub hours: HourRange,
    pub rate: f64,
}

impl TariffBand {
    pub fn flat(rate: f64) -> Self {
        Self {
            season: Season::All,
            hours: HourRange::ALL,
            rate,
        }
    }

    fn covers(&self, season: Season, hour_of_day: u32) -> bool {
        self.season.covers(season) && self.hours.contains(hour_of_day)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TariffKind {
    TsoConsumption,
    DsoConsumption,
    TsoProduction,
    DsoProduction,
}

impl TariffKind {
    pub const ALL: [TariffKind; 4] = [
        TariffKind::TsoConsumption,
        TariffKind::DsoConsumption,
        TariffKind::TsoProduction,
        TariffKind::DsoProduction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TariffKind::TsoConsumption => "tso_consumption",
            TariffKind::DsoConsumption => "dso_consumption",
            TariffKind::TsoProduction => "tso_production",
            TariffKind::DsoProduction => "dso_production",
        }
    }
}

impl FromStr for TariffKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        TariffKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| format!("unknown tariff kind '{}'", s.trim()))
    }
}

/// Grid tariffs layered on top of the spot price. Each kind is a set of
/// season × hour-of-day bands that together cover every hour exactly once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    tso_consumption: Vec<TariffBand>,
    dso_consumption: Vec<TariffBand>,
    tso_production: Vec<TariffBand>,
    dso_production: Vec<TariffBand>,
}

impl TariffSchedule {
    pub fn new(
        tso_consumption: Vec<TariffBand>,
        dso_consumption: Vec<TariffBand>,
        tso_production: Vec<TariffBand>,
        dso_production: Vec<TariffBand>,
    ) -> Result<Self> {
        let schedule = Self {
            tso_consumption,
            dso_consumption,
            tso_production,
            dso_production,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Re-checks the partition and rate invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        for kind in TariffKind::ALL {
            validate_partition(kind, self.bands(kind))?;
        }
        Ok(())
    }

    pub fn flat(
        tso_consumption: f64,
        dso_consumption: f64,
        tso_production: f64,
        dso_production: f64,
    ) -> Result<Self> {
        Self::new(
            vec![TariffBand::flat(tso_consumption)],
            vec![TariffBand::flat(dso_consumption)],
            vec![TariffBand::flat(tso_production)],
            vec![TariffBand::flat(dso_production)],
        )
    }

    pub fn zero() -> Self {
        Self::flat(0.0, 0.0, 0.0, 0.0).expect("zero tariffs are valid")
    }

    /// Danish-style time-of-use structure used by the synthetic generator:
    /// a flat TSO charge and a DSO charge with a winter evening peak.
    pub fn danish_time_of_use() -> Self {
        let band = |season, first, last, rate| TariffBand {
            season,
            hours: HourRange { first, last },
            rate,
        };
        let dso = vec![
            band(Season::Winter, 0, 5, 60.0),
            band(Season::Winter, 6, 16, 180.0),
            band(Season::Winter, 17, 20, 540.0),
            band(Season::Winter, 21, 23, 180.0),
            band(Season::Summer, 0, 5, 60.0),
            band(Season::Summer, 6, 16, 90.0),
            band(Season::Summer, 17, 20, 240.0),
            band(Season::Summer, 21, 23, 90.0),
        ];
        Self::new(
            vec![TariffBand::flat(140.0)],
            dso,
            vec![TariffBand::flat(4.0)],
            vec![TariffBand::flat(2.0)],
        )
        .expect("built-in tariff bands partition the year")
    }

    pub fn bands(&self, kind: TariffKind) -> &[TariffBand] {
        match kind {
            TariffKind::TsoConsumption => &self.tso_consumption,
            TariffKind::DsoConsumption => &self.dso_consumption,
            TariffKind::TsoProduction => &self.tso_production,
            TariffKind::DsoProduction => &self.dso_production,
        }
    }

    pub fn rate(&self, kind: TariffKind, season: Season, hour_of_day: u32) -> f64 {
        self.bands(kind)
            .iter()
            .find(|b| b.covers(season, hour_of_day))
            .map(|b| b.rate)
            .expect("validated bands cover every hour")
    }

    /// Consumption tariff sum (TSO + DSO) for an hour of the given year.
    pub fn consumption_rate(&self, year: i32, hour: usize) -> f64 {
        let (season, hod) = season_and_hour(year, hour);
        self.rate(TariffKind::TsoConsumption, season, hod)
            + self.rate(TariffKind::DsoConsumption, season, hod)
    }

    /// Production tariff sum (TSO + DSO) for an hour of the given year.
    pub fn production_rate(&self, year: i32, hour: usize) -> f64 {
        let (season, hod) = season_and_hour(year, hour);
        self.rate(TariffKind::TsoProduction, season, hod)
            + self.rate(TariffKind::DsoProduction, season, hod)
    }
}

fn season_and_hour(year: i32, hour: usize) -> (Season, u32) {
    let ts = hour_timestamp(year, hour);
    (Season::of_month(ts.month()), ts.hour())
}

fn validate_partition(kind: TariffKind, bands: &[TariffBand]) -> Result<()> {
    for band in bands {
        if !band.rate.is_finite() || band.rate < 0.0 {
            return Err(Error::Tariff(format!(
                "{} rate {} must be finite and non-negative",
                kind.as_str(),
                band.rate
            )));
        }
    }
    for season in [Season::Summer, Season::Winter] {
        for hod in 0..24 {
            let n = bands.iter().filter(|b| b.covers(season, hod)).count();
            if n != 1 {
                return Err(Error::Tariff(format!(
                    "{} bands cover {season} hour {hod} {n} times, expected exactly once",
                    kind.as_str()
                )));
            }
        }
    }
    Ok(())
}

/// Validated market and resource data for one year. Immutable once built.
#[derive(Clone, Debug)]
pub struct MarketDataset {
    spot: HourlySeries,
    co2: HourlySeries,
    tariffs: TariffSchedule,
    pv_cf: HourlySeries,
    wind_cf: HourlySeries,
    buy: Vec<f64>,
    sell: Vec<f64>,
}

impl MarketDataset {
    pub fn new(
        spot: HourlySeries,
        co2: HourlySeries,
        tariffs: TariffSchedule,
        pv_cf: HourlySeries,
        wind_cf: HourlySeries,
    ) -> Result<Self> {
        let expect_unit = |s: &HourlySeries, unit: SeriesUnit, name: &str| {
            if s.unit() != unit {
                Err(Error::Series(format!(
                    "{name} series has unit {:?}, expected {unit:?}",
                    s.unit()
                )))
            } else {
                Ok(())
            }
        };
        expect_unit(&spot, SeriesUnit::DkkPerMwh, "spot")?;
        expect_unit(&co2, SeriesUnit::KgCo2PerMwh, "co2")?;
        expect_unit(&pv_cf, SeriesUnit::CapacityFactor, "pv_cf")?;
        expect_unit(&wind_cf, SeriesUnit::CapacityFactor, "wind_cf")?;
        let year = spot.start_year();
        for (name, s) in [("co2", &co2), ("pv_cf", &pv_cf), ("wind_cf", &wind_cf)] {
            if s.start_year() != year || s.len() != spot.len() {
                return Err(Error::Series(format!(
                    "{name} covers year {} ({} h), spot covers {year} ({} h)",
                    s.start_year(),
                    s.len(),
                    spot.len()
                )));
            }
        }
        let buy = (0..spot.len())
            .map(|h| spot.values()[h] + tariffs.consumption_rate(year, h))
            .collect();
        let sell = (0..spot.len())
            .map(|h| spot.values()[h] - tariffs.production_rate(year, h))
            .collect();
        Ok(Self {
            spot,
            co2,
            tariffs,
            pv_cf,
            wind_cf,
            buy,
            sell,
        })
    }

    pub fn year(&self) -> i32 {
        self.spot.start_year()
    }

    pub fn hours(&self) -> usize {
        self.spot.len()
    }

    pub fn days(&self) -> usize {
        self.hours() / 24
    }

    pub fn spot(&self) -> &HourlySeries {
        &self.spot
    }

    pub fn co2(&self) -> &HourlySeries {
        &self.co2
    }

    pub fn tariffs(&self) -> &TariffSchedule {
        &self.tariffs
    }

    pub fn pv_cf(&self) -> &HourlySeries {
        &self.pv_cf
    }

    pub fn wind_cf(&self) -> &HourlySeries {
        &self.wind_cf
    }

    fn check_hour(&self, hour: usize) -> Result<()> {
        if hour < self.hours() {
            Ok(())
        } else {
            Err(Error::HourOutOfRange {
                hour,
                hours: self.hours(),
            })
        }
    }

    /// Spot price plus TSO and DSO consumption tariffs, DKK/MWh.
    pub fn buy_price(&self, hour: usize) -> Result<f64> {
        self.check_hour(hour)?;
        Ok(self.buy[hour])
    }

    /// Spot price net of TSO and DSO production tariffs, DKK/MWh. May be negative.
    pub fn sell_price(&self, hour: usize) -> Result<f64> {
        self.check_hour(hour)?;
        Ok(self.sell[hour])
    }

    pub fn buy_prices(&self) -> &[f64] {
        &self.buy
    }

    pub fn sell_prices(&self) -> &[f64] {
        &self.sell
    }

    /// SHA-256 over every series value and tariff band, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.year().to_le_bytes());
        for series in [&self.spot, &self.co2, &self.pv_cf, &self.wind_cf] {
            for v in series.values() {
                hasher.update(v.to_le_bytes());
            }
        }
        for kind in TariffKind::ALL {
            for band in self.tariffs.bands(kind) {
                hasher.update(format!(
                    "{}|{}|{}|{}",
                    kind.as_str(),
                    band.season,
                    band.hours,
                    band.rate
                ));
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// File locations of the five canonical dataset files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub spot: PathBuf,
    pub co2: PathBuf,
    pub pv_cf: PathBuf,
    pub wind_cf: PathBuf,
    pub tariffs: PathBuf,
}

impl DatasetPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            spot: dir.join("spot.csv"),
            co2: dir.join("co2.csv"),
            pv_cf: dir.join("pv_cf.csv"),
            wind_cf: dir.join("wind_cf.csv"),
            tariffs: dir.join("tariffs.csv"),
        }
    }
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<MarketDataset> {
    let spot = read_series(&paths.spot, SeriesUnit::DkkPerMwh)?;
    let co2 = read_series(&paths.co2, SeriesUnit::KgCo2PerMwh)?;
    let pv_cf = read_series(&paths.pv_cf, SeriesUnit::CapacityFactor)?;
    let wind_cf = read_series(&paths.wind_cf, SeriesUnit::CapacityFactor)?;
    let tariffs = read_tariffs(&paths.tariffs)?;
    MarketDataset::new(spot, co2, tariffs, pv_cf, wind_cf)
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn expect_header(path: &Path, reader: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::Parse {
            file: path.display().to_string(),
            row: 1,
            column: "header".into(),
            message: format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    chrono::DateTime::parse_from_rfc3339(s)
        .map(|dt| dt.naive_utc())
        .ok()
        .or_else(|| NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M").ok())
}

fn read_series(path: &Path, unit: SeriesUnit) -> Result<HourlySeries> {
    let file = path.display().to_string();
    let value_col = unit.column();
    let mut reader = open_csv(path)?;
    expect_header(path, &mut reader, &["timestamp_utc", value_col])?;

    let mut year = None;
    let mut values = Vec::with_capacity(8784);
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |column: &str, message: String| Error::Parse {
            file: file.clone(),
            row,
            column: column.to_string(),
            message,
        };
        let raw_ts = record.get(0).unwrap_or("");
        let ts = parse_timestamp(raw_ts).ok_or_else(|| {
            parse_err("timestamp_utc", format!("unparsable timestamp '{raw_ts}'"))
        })?;
        let y = *year.get_or_insert(ts.year());
        let expected_ts = hour_timestamp(y, values.len());
        if ts != expected_ts {
            return Err(parse_err(
                "timestamp_utc",
                format!(
                    "expected {}, found {raw_ts}",
                    expected_ts.format(TIMESTAMP_FORMAT)
                ),
            ));
        }
        let raw = record.get(1).unwrap_or("");
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(value_col, format!("unparsable number '{raw}'")))?;
        match unit {
            SeriesUnit::CapacityFactor if !(0.0..=1.0).contains(&value) => {
                return Err(Error::CapacityFactor { file, row, value });
            }
            SeriesUnit::KgCo2PerMwh if value < 0.0 => {
                return Err(parse_err(
                    value_col,
                    format!("negative CO2 intensity {value}"),
                ));
            }
            _ => {}
        }
        values.push(value);
    }
    let year = year.ok_or_else(|| Error::Series(format!("{file}: no data rows")))?;
    let expected = hours_in_year(year);
    if values.len() != expected {
        return Err(Error::RowCount {
            file,
            year,
            expected,
            found: values.len(),
        });
    }
    HourlySeries::new(year, values, unit)
}

fn read_tariffs(path: &Path) -> Result<TariffSchedule> {
    let file = path.display().to_string();
    let mut reader = open_csv(path)?;
    expect_header(
        path,
        &mut reader,
        &["kind", "season", "hours", "rate_dkk_per_mwh"],
    )?;
    let mut bands: [Vec<TariffBand>; 4] = Default::default();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |column: &str, message: String| Error::Parse {
            file: file.clone(),
            row,
            column: column.to_string(),
            message,
        };
        let kind: TariffKind = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|m| parse_err("kind", m))?;
        let season: Season = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|m| parse_err("season", m))?;
        let hours: HourRange = record
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|m| parse_err("hours", m))?;
        let raw = record.get(3).unwrap_or("");
        let rate: f64 = raw
            .parse()
            .map_err(|_| parse_err("rate_dkk_per_mwh", format!("unparsable number '{raw}'")))?;
        let idx = TariffKind::ALL
            .iter()
            .position(|k| *k == kind)
            .expect("known kind");
        bands[idx].push(TariffBand {
            season,
            hours,
            rate,
        });
    }
    // A kind with no rows is an all-zero tariff.
    for b in bands.iter_mut() {
        if b.is_empty() {
            b.push(TariffBand::flat(0.0));
        }
    }
    let [tc, dc, tp, dp] = bands;
    TariffSchedule::new(tc, dc, tp, dp).map_err(|e| Error::Tariff(format!("{file}: {e}")))
}

/// Writes the dataset in the canonical CSV layout. `header` lines are
/// emitted as `#` comments before the column header.
pub fn write_dataset(
    dataset: &MarketDataset,
    dir: impl AsRef<Path>,
    header: &[String],
) -> Result<DatasetPaths> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = DatasetPaths::in_dir(dir);
    for (path, series) in [
        (&paths.spot, dataset.spot()),
        (&paths.co2, dataset.co2()),
        (&paths.pv_cf, dataset.pv_cf()),
        (&paths.wind_cf, dataset.wind_cf()),
    ] {
        let mut out = comment_block(header);
        out.push_str("timestamp_utc,");
        out.push_str(series.unit().column());
        out.push('\n');
        for (h, v) in series.values().iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                hour_timestamp(series.start_year(), h).format(TIMESTAMP_FORMAT),
                v
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))?;
    }
    let mut out = comment_block(header);
    out.push_str("kind,season,hours,rate_dkk_per_mwh\n");
    for kind in TariffKind::ALL {
        for band in dataset.tariffs().bands(kind) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                kind.as_str(),
                band.season,
                band.hours,
                band.rate
            ));
        }
    }
    fs::write(&paths.tariffs, out).map_err(|e| Error::io(&paths.tariffs, e))?;
    Ok(paths)
}

pub(crate) fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

/// Shape parameters for [`generate_synthetic`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub spot_mean: f64,
    pub spot_seasonal_amplitude: f64,
    pub spot_diurnal_amplitude: f64,
    pub spot_noise_sd: f64,
    pub spot_noise_persistence: f64,
    /// Price drop per unit of wind capacity factor above its annual mean.
    pub spot_wind_sensitivity: f64,
    pub co2_base: f64,
    pub co2_price_slope: f64,
    pub co2_noise_sd: f64,
    pub pv_summer_peak: f64,
    pub pv_winter_peak: f64,
    /// Hours of PV output per day, averaged over the year.
    pub pv_day_length: f64,
    /// Summer-winter swing of the PV day length in hours.
    pub pv_day_length_amplitude: f64,
    /// Exponent on the clear-sky sine arc; larger values narrow the midday peak.
    pub pv_shape_exponent: f64,
    /// Shifts the daily clearness index; negative values mean more overcast days.
    pub pv_clearness_bias: f64,
    /// Clearness index on the most overcast day.
    pub pv_clearness_floor: f64,
    pub wind_persistence: f64,
    pub wind_bias: f64,
    pub wind_seasonal_bias: f64,
    pub tariffs: TariffSchedule,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            spot_mean: 600.0,
            spot_seasonal_amplitude: 120.0,
            spot_diurnal_amplitude: 150.0,
            spot_noise_sd: 100.0,
            spot_noise_persistence: 0.9,
            spot_wind_sensitivity: 300.0,
            co2_base: 110.0,
            co2_price_slope: 0.12,
            co2_noise_sd: 12.0,
            pv_summer_peak: 0.8,
            pv_winter_peak: 0.2,
            pv_day_length: 8.0,
            pv_day_length_amplitude: 4.0,
            pv_shape_exponent: 0.7,
            pv_clearness_bias: 1.0,
            pv_clearness_floor: 0.25,
            wind_persistence: 0.96,
            wind_bias: -3.0,
            wind_seasonal_bias: 0.5,
            tariffs: TariffSchedule::danish_time_of_use(),
        }
    }
}

/// Deterministic synthetic year. Identical `(seed, year, params)` always
/// yields bit-identical series.
pub fn generate_synthetic(seed: u64, year: i32, params: &SyntheticParams) -> MarketDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let hours = hours_in_year(year);
    let days = hours / 24;
    let n = hours as f64;

    // Wind: persistent latent weather state squashed into [0, 1], windier in winter.
    let mut latent = 0.0;
    let innovation = (1.0 - params.wind_persistence.powi(2)).sqrt();
    let wind: Vec<f64> = (0..hours)
        .map(|h| {
            latent = params.wind_persistence * latent + innovation * normal();
            let season = params.wind_seasonal_bias * (2.0 * PI * h as f64 / n).cos();
            1.0 / (1.0 + (-(1.6 * latent + params.wind_bias + season)).exp())
        })
        .collect();
    let wind_mean = wind.iter().sum::<f64>() / n;

    // PV: clear-sky arc between sunrise and sunset scaled by a daily clearness index.
    let mut pv = Vec::with_capacity(hours);
    let mut cloud = 0.0;
    for day in 0..days {
        cloud = 0.7 * cloud + (1.0 - 0.49f64).sqrt() * normal();
        let floor = params.pv_clearness_floor;
        let clearness =
            floor + (1.0 - floor) / (1.0 + (-(1.5 * cloud + params.pv_clearness_bias)).exp());
        let phase = (2.0 * PI * (day as f64 - 80.0) / days as f64).sin();
        let day_length = params.pv_day_length + params.pv_day_length_amplitude * phase;
        let peak = params.pv_winter_peak
            + (params.pv_summer_peak - params.pv_winter_peak) * (phase + 1.0) / 2.0;
        let sunrise = 11.5 - day_length / 2.0;
        for hod in 0..24 {
            let t = hod as f64 + 0.5;
            let jitter = 0.08 * normal();
            let cf = if t > sunrise && t < sunrise + day_length {
                let arc = (PI * (t - sunrise) / day_length)
                    .sin()
                    .powf(params.pv_shape_exponent);
                (peak * arc * (clearness + jitter).clamp(0.01, 1.0)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            pv.push(cf);
        }
    }

    let mut noise = 0.0;
    let noise_innovation = (1.0 - params.spot_noise_persistence.powi(2)).sqrt();
    let mut spot = Vec::with_capacity(hours);
    let mut co2 = Vec::with_capacity(hours);
    for h in 0..hours {
        let hod = (h % 24) as f64;
        noise = params.spot_noise_persistence * noise + noise_innovation * normal();
        let seasonal = params.spot_seasonal_amplitude * (2.0 * PI * h as f64 / n).cos();
        let diurnal = params.spot_diurnal_amplitude
            * (0.6 * (2.0 * PI * (hod - 18.0) / 24.0).cos()
                + 0.4 * (4.0 * PI * (hod - 8.0) / 24.0).cos());
        let price = params.spot_mean + seasonal + diurnal + params.spot_noise_sd * noise
            - params.spot_wind_sensitivity * (wind[h] - wind_mean);
        spot.push(price);
        let intensity = params.co2_base
            + params.co2_price_slope * (price - params.spot_mean)
            + params.co2_noise_sd * normal();
        co2.push(intensity.max(0.0));
    }

    let series =
        |values, unit| HourlySeries::new(year, values, unit).expect("generated series are valid");
    MarketDataset::new(
        series(spot, SeriesUnit::DkkPerMwh),
        series(co2, SeriesUnit::KgCo2PerMwh),
        params.tariffs.clone(),
        series(pv, SeriesUnit::CapacityFactor),
        series(wind, SeriesUnit::CapacityFactor),
    )
    .expect("generated dataset is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_dataset(year: i32, spot: f64, tariffs: TariffSchedule) -> MarketDataset {
        let n = hours_in_year(year);
        MarketDataset::new(
            HourlySeries::new(year, vec![spot; n], SeriesUnit::DkkPerMwh).unwrap(),
            HourlySeries::new(year, vec![100.0; n], SeriesUnit::KgCo2PerMwh).unwrap(),
            tariffs,
            HourlySeries::new(year, vec![0.0; n], SeriesUnit::CapacityFactor).unwrap(),
            HourlySeries::new(year, vec![0.0; n], SeriesUnit::CapacityFactor).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn buy_price_adds_tariffs() {
        let d = constant_dataset(
            2023,
            400.0,
            TariffSchedule::flat(100.0, 150.0, 0.0, 0.0).unwrap(),
        );
        assert_eq!(d.buy_price(0).unwrap(), 650.0);
        let d = constant_dataset(
            2023,
            -50.0,
            TariffSchedule::flat(100.0, 150.0, 0.0, 0.0).unwrap(),
        );
        assert_eq!(d.buy_price(17).unwrap(), 200.0);
        let d = constant_dataset(2023, 321.5, TariffSchedule::zero());
        assert_eq!(d.buy_price(5000).unwrap(), 321.5);
    }

    #[test]
    fn sell_price_nets_production_tariffs() {
        let d = constant_dataset(
            2023,
            400.0,
            TariffSchedule::flat(0.0, 0.0, 20.0, 10.0).unwrap(),
        );
        assert_eq!(d.sell_price(3).unwrap(), 370.0);
        let d = constant_dataset(
            2023,
            10.0,
            TariffSchedule::flat(0.0, 0.0, 30.0, 0.0).unwrap(),
        );
        assert_eq!(d.sell_price(3).unwrap(), -20.0);
        let d = constant_dataset(2023, 10.0, TariffSchedule::zero());
        assert_eq!(d.sell_price(3).unwrap(), 10.0);
    }

    #[test]
    fn hour_out_of_range() {
        let d = constant_dataset(2023, 1.0, TariffSchedule::zero());
        assert!(matches!(
            d.buy_price(8760),
            Err(Error::HourOutOfRange {
                hour: 8760,
                hours: 8760
            })
        ));
        assert!(d.sell_price(8760).is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(HourlySeries::new(2023, vec![0.0; 8784], SeriesUnit::DkkPerMwh).is_err());
        let mut cf = vec![0.5; 8760];
        cf[10] = 1.3;
        assert!(HourlySeries::new(2023, cf, SeriesUnit::CapacityFactor).is_err());
        assert!(HourlySeries::new(2023, vec![-1.0; 8760], SeriesUnit::KgCo2PerMwh).is_err());
        assert!(HourlySeries::new(2023, vec![-1.0; 8760], SeriesUnit::DkkPerMwh).is_ok());
    }

    #[test]
    fn overlapping_or_missing_bands_rejected() {
        let overlap = vec![
            TariffBand::flat(1.0),
            TariffBand {
                season: Season::Winter,
                hours: HourRange::new(17, 20).unwrap(),
                rate: 2.0,
            },
        ];
        assert!(TariffSchedule::new(
            vec![TariffBand::flat(0.0)],
            overlap,
            vec![TariffBand::flat(0.0)],
            vec![TariffBand::flat(0.0)]
        )
        .is_err());
        let gap = vec![TariffBand {
            season: Season::Summer,
            hours: HourRange::ALL,
            rate: 2.0,
        }];
        assert!(TariffSchedule::new(
            vec![TariffBand::flat(0.0)],
            gap,
            vec![TariffBand::flat(0.0)],
            vec![TariffBand::flat(0.0)]
        )
        .is_err());
        assert!(TariffSchedule::flat(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn band_partition_covers_year_once() {
        let t = TariffSchedule::danish_time_of_use();
        for year in [2023, 2024] {
            let covered: usize = t
                .bands(TariffKind::DsoConsumption)
                .iter()
                .map(|b| {
                    (0..hours_in_year(year))
                        .filter(|&h| {
                            let (s, hod) = season_and_hour(year, h);
                            b.covers(s, hod)
                        })
                        .count()
                })
                .sum();
            assert_eq!(covered, hours_in_year(year));
        }
    }

    #[test]
    fn time_of_use_band_lookup() {
        let d = constant_dataset(2024, 0.0, TariffSchedule::danish_time_of_use());
        // 2024-01-01 18:00 UTC is a winter peak hour.
        assert_eq!(d.buy_price(18).unwrap(), 140.0 + 540.0);
        // 2024-07-01 03:00 UTC: day 182 of the leap year.
        assert_eq!(d.buy_price(182 * 24 + 3).unwrap(), 140.0 + 60.0);
        assert_eq!(d.sell_price(18).unwrap(), -6.0);
    }

    #[test]
    fn hour_range_parsing() {
        assert_eq!(
            "17-20".parse::<HourRange>().unwrap(),
            HourRange {
                first: 17,
                last: 20
            }
        );
        assert_eq!("all".parse::<HourRange>().unwrap(), HourRange::ALL);
        assert_eq!(
            "5".parse::<HourRange>().unwrap(),
            HourRange { first: 5, last: 5 }
        );
        assert!("20-17".parse::<HourRange>().is_err());
        assert!("0-24".parse::<HourRange>().is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let p = SyntheticParams::default();
        let a = generate_synthetic(42, 2024, &p);
        let b = generate_synthetic(42, 2024, &p);
        assert_eq!(a.spot(), b.spot());
        assert_eq!(a.co2(), b.co2());
        assert_eq!(a.pv_cf(), b.pv_cf());
        assert_eq!(a.wind_cf(), b.wind_cf());
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = generate_synthetic(43, 2024, &p);
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn synthetic_pv_dark_at_midnight() {
        let d = generate_synthetic(42, 2024, &SyntheticParams::default());
        assert_eq!(d.hours(), 8784);
        for day in 0..d.days() {
            assert_eq!(d.pv_cf().values()[day * 24], 0.0);
            assert_eq!(d.pv_cf().values()[day * 24 + 23], 0.0);
        }
    }

    #[test]
    fn synthetic_spot_mean_near_configured() {
        for seed in [1, 42, 7_000] {
            let p = SyntheticParams::default();
            let d = generate_synthetic(seed, 2024, &p);
            let mean = d.spot().mean();
            assert!(
                (mean - p.spot_mean).abs() <= 0.05 * p.spot_mean,
                "seed {seed}: mean {mean}"
            );
        }
    }

    #[test]
    fn synthetic_co2_tracks_price() {
        let d = generate_synthetic(42, 2023, &SyntheticParams::default());
        let (s, c) = (d.spot().values(), d.co2().values());
        let (ms, mc) = (d.spot().mean(), d.co2().mean());
        let cov: f64 = s.iter().zip(c).map(|(a, b)| (a - ms) * (b - mc)).sum();
        assert!(cov > 0.0);
        assert!(c.iter().all(|&v| v >= 0.0));
    }
}
