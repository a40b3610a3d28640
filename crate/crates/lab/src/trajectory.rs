//! Trajectory CSV files: one row per simulated day, columns in [`COLUMNS`]
//! order. Money columns use six fixed decimals so files are byte-stable.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use echelon_core::env::{StepRecord, TerminationCause};
use echelon_core::{CommKind, Money};
use thiserror::Error;

pub const COLUMNS: [&str; 23] = [
    "episode",
    "day",
    "retailer_order",
    "factory_order",
    "comm_kind",
    "omega",
    "communicated_inventory",
    "customer_demand",
    "shipped_to_retailer",
    "retailer_inventory",
    "factory_inventory",
    "retailer_stockout_qty",
    "factory_stockout_qty",
    "retailer_backlog_qty",
    "factory_backlog_qty",
    "retailer_stockout_events",
    "factory_stockout_events",
    "reward_retailer_base",
    "reward_factory_base",
    "reward_retailer_shaped",
    "reward_factory_shaped",
    "terminated",
    "termination_cause",
];

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: unexpected columns (expected the {} documented trajectory columns)", COLUMNS.len())]
    Schema { path: PathBuf },
    #[error("{path}: row {row}, column `{column}`: cannot parse `{value}`")]
    Field { path: PathBuf, row: usize, column: &'static str, value: String },
}

pub fn record_fields(r: &StepRecord) -> [String; 23] {
    [
        r.episode.to_string(),
        r.day.to_string(),
        r.retailer_order.to_string(),
        r.factory_order.to_string(),
        r.comm_kind.as_str().to_string(),
        r.omega.to_string(),
        r.communicated_inventory.to_string(),
        r.customer_demand.to_string(),
        r.shipped_to_retailer.to_string(),
        r.retailer_inventory.to_string(),
        r.factory_inventory.to_string(),
        r.retailer_stockout_qty.to_string(),
        r.factory_stockout_qty.to_string(),
        r.retailer_backlog_qty.to_string(),
        r.factory_backlog_qty.to_string(),
        r.retailer_stockout_events.to_string(),
        r.factory_stockout_events.to_string(),
        r.reward_retailer_base.to_string(),
        r.reward_factory_base.to_string(),
        r.reward_retailer_shaped.to_string(),
        r.reward_factory_shaped.to_string(),
        u8::from(r.terminated).to_string(),
        r.termination_cause.as_str().to_string(),
    ]
}

pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
    path: PathBuf,
}

impl TrajectoryWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self, TrajectoryError> {
        let file = File::create(path).map_err(|source| TrajectoryError::Io { path: path.into(), source })?;
        Self::new(BufWriter::new(file), path)
    }
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W, label: &Path) -> Result<Self, TrajectoryError> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(COLUMNS).map_err(|source| TrajectoryError::Csv { path: label.into(), source })?;
        Ok(TrajectoryWriter { inner, path: label.into() })
    }

    pub fn write(&mut self, rec: &StepRecord) -> Result<(), TrajectoryError> {
        self.inner.write_record(record_fields(rec)).map_err(|source| TrajectoryError::Csv { path: self.path.clone(), source })
    }

    pub fn finish(mut self) -> Result<(), TrajectoryError> {
        self.inner.flush().map_err(|source| TrajectoryError::Io { path: self.path.clone(), source })
    }
}

pub fn write_trajectory(path: &Path, records: &[StepRecord]) -> Result<(), TrajectoryError> {
    let mut w = TrajectoryWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

pub fn read_trajectory(path: &Path) -> Result<Vec<StepRecord>, TrajectoryError> {
    let file = File::open(path).map_err(|source| TrajectoryError::Io { path: path.into(), source })?;
    parse_trajectory(BufReader::new(file), path)
}

pub fn parse_trajectory<R: Read>(input: R, label: &Path) -> Result<Vec<StepRecord>, TrajectoryError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers().map_err(|source| TrajectoryError::Csv { path: label.into(), source })?;
    if headers.len() != COLUMNS.len() || headers.iter().zip(COLUMNS).any(|(h, c)| h != c) {
        return Err(TrajectoryError::Schema { path: label.into() });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|source| TrajectoryError::Csv { path: label.into(), source })?;
        if row.len() != COLUMNS.len() {
            return Err(TrajectoryError::Schema { path: label.into() });
        }
        let field = |k: usize| -> &str { &row[k] };
        let bad = |k: usize| TrajectoryError::Field { path: label.into(), row: i + 1, column: COLUMNS[k], value: row[k].to_string() };
        let int = |k: usize| field(k).parse::<u32>().map_err(|_| bad(k));
        let money = |k: usize| Money::parse(field(k)).ok_or_else(|| bad(k));
        out.push(StepRecord {
            episode: int(0)?,
            day: int(1)?,
            retailer_order: int(2)?,
            factory_order: int(3)?,
            comm_kind: field(4).parse::<CommKind>().map_err(|_| bad(4))?,
            omega: field(5).parse::<f64>().map_err(|_| bad(5))?,
            communicated_inventory: int(6)?,
            customer_demand: int(7)?,
            shipped_to_retailer: int(8)?,
            retailer_inventory: int(9)?,
            factory_inventory: int(10)?,
            retailer_stockout_qty: int(11)?,
            factory_stockout_qty: int(12)?,
            retailer_backlog_qty: int(13)?,
            factory_backlog_qty: int(14)?,
            retailer_stockout_events: int(15)?,
            factory_stockout_events: int(16)?,
            reward_retailer_base: money(17)?,
            reward_factory_base: money(18)?,
            reward_retailer_shaped: money(19)?,
            reward_factory_shaped: money(20)?,
            terminated: match field(21) {
                "0" => false,
                "1" => true,
                _ => return Err(bad(21)),
            },
            termination_cause: TerminationCause::parse(field(22)).ok_or_else(|| bad(22))?,
        });
    }
    Ok(out)
}
