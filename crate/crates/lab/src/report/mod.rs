//! Aggregation of run directories into summary tables and plots.
//!
//! A run directory is any directory holding `config.toml` next to one or
//! more `rep_*` replicate directories. Each replicate's trajectory is
//! reduced to a [`MetricsSummary`]; cells then report mean and sample std
//! over replicates. Output files (all under the output directory):
//!
//! ```text
//! summary.json, summary.csv                    every cell, every measure
//! rewards_<demand>_<scheme>.{csv,txt}          Factory/Retailer/Global x scenario
//! rewards_shaped_<demand>_collaborative.*      raw shaped rewards
//! delta_<demand>_<scheme>.*                    scenario minus NoComms
//! inventory_<demand>_<scheme>.*                inventories, stockout and backlog rates
//! mixed_<demand>.*                             disclosure-kind percentages
//! delta_<agent>_<demand>.svg, inventory_<demand>_<scheme>.svg   with --plots
//! ```
//!
//! Rewards in tables are per-day means scaled to a 30-day episode. For the
//! collaborative scheme the comparability-adjusted reward is reported.

pub mod svg;
pub mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use echelon_core::metrics::{AgentSummary, MetricsAccumulator, MetricsSummary, RewardStats};
use echelon_core::reward::SchemeKind;
use echelon_core::{CommKind, CommScenario};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoints::CONFIG_FILE;
use crate::config::{ConfigError, Demand, ExperimentConfig};
use crate::runner::{EVAL_FILE, TRAIN_FILE};
use crate::trajectory::{read_trajectory, TrajectoryError};

use svg::BarChart;
use table::{Entry, Table};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("{path}: no replicate directories (rep_*) with {file}")]
    NoReplicates { path: PathBuf, file: &'static str },
    #[error("{path}: trajectory has no complete day")]
    Empty { path: PathBuf },
    #[error("{path}: global reward {global} differs from factory + retailer {sum}")]
    Identity { path: PathBuf, global: f64, sum: f64 },
    #[error("no run directories under {0}")]
    NoRuns(PathBuf),
    #[error("bad grid `{0}`: {1}")]
    Grid(String, String),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.into(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Source {
    /// Deterministic evaluation episodes written after training.
    Eval,
    /// The last `tail_episodes` episodes of the training trajectory.
    Train { tail_episodes: usize },
}

impl Source {
    fn file(self) -> &'static str {
        match self {
            Source::Eval => EVAL_FILE,
            Source::Train { .. } => TRAIN_FILE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub demand: Demand,
    pub scheme: SchemeKind,
    pub scenario: CommScenario,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.demand, self.scheme, self.scenario.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replicate.
    pub std: f64,
}

impl Stat {
    /// Values are sorted first so the result does not depend on replicate
    /// order.
    pub fn of(mut xs: Vec<f64>) -> Stat {
        xs.sort_by(f64::total_cmp);
        Stat { mean: echelon_core::stats::mean(&xs), std: echelon_core::stats::variance(&xs).sqrt() }
    }

    fn entry(self) -> Entry {
        Entry::with_std(self.mean, self.std)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardStat {
    pub per_episode: Stat,
    pub per_day: Stat,
    pub per_30_days: Stat,
}

impl RewardStat {
    fn of(reps: &[&RewardStats]) -> Self {
        RewardStat {
            per_episode: Stat::of(reps.iter().map(|r| r.per_episode).collect()),
            per_day: Stat::of(reps.iter().map(|r| r.per_day).collect()),
            per_30_days: Stat::of(reps.iter().map(|r| r.per_30_days).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentStat {
    pub base: RewardStat,
    pub shaped: RewardStat,
    pub adjusted: RewardStat,
    /// `base` under the baseline scheme, `adjusted` under the collaborative one.
    pub reported: RewardStat,
    pub mean_inventory: Stat,
    pub stockout_rate: Stat,
    pub backlog_rate: Stat,
}

impl AgentStat {
    fn of(scheme: SchemeKind, reps: &[&AgentSummary]) -> Self {
        let reward = |f: fn(&AgentSummary) -> &RewardStats| RewardStat::of(&reps.iter().map(|a| f(a)).collect::<Vec<_>>());
        let stat = |f: fn(&AgentSummary) -> f64| Stat::of(reps.iter().map(|a| f(a)).collect());
        let base = reward(|a| &a.base);
        let adjusted = reward(|a| &a.adjusted);
        AgentStat {
            base,
            shaped: reward(|a| &a.shaped),
            adjusted,
            reported: match scheme {
                SchemeKind::Baseline => base,
                SchemeKind::Collaborative => adjusted,
            },
            mean_inventory: stat(|a| a.mean_inventory),
            stockout_rate: stat(|a| a.stockout_rate),
            backlog_rate: stat(|a| a.backlog_rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub key: CellKey,
    pub replicates: usize,
    pub episodes: usize,
    pub days: u64,
    pub factory: AgentStat,
    pub retailer: AgentStat,
    pub global: AgentStat,
    /// Percent of days per disclosure kind; sums to 100.
    pub kind_percent: Vec<(CommKind, Stat)>,
    /// Global reward per replicate (per 30 days), sorted ascending.
    pub replicate_global: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub source: Source,
    pub cells: Vec<CellSummary>,
}

impl ReportSummary {
    pub fn cell(&self, key: CellKey) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.key == key)
    }
}

/// A replicate's reduced trajectory, tagged with where it came from.
#[derive(Debug, Clone)]
pub struct ReplicateInput {
    pub key: CellKey,
    pub path: PathBuf,
    pub summary: MetricsSummary,
}

/// Run directories under `root` (including `root` itself), sorted.
pub fn discover_runs(root: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), ReportError> {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir).map_err(io(dir))?.map(|e| e.map(|e| e.path()).map_err(io(dir))).collect::<Result<_, _>>()?;
        entries.sort();
        let is_rep = |p: &PathBuf| p.is_dir() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("rep_"));
        if dir.join(CONFIG_FILE).is_file() && entries.iter().any(is_rep) {
            out.push(dir.to_path_buf());
            return Ok(());
        }
        for e in entries.iter().filter(|p| p.is_dir()) {
            walk(e, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, &mut out)?;
    Ok(out)
}

/// Reads every replicate trajectory of one run directory.
pub fn load_run(dir: &Path, source: Source) -> Result<Vec<ReplicateInput>, ReportError> {
    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let key = CellKey { demand: cfg.demand, scheme: cfg.scheme, scenario: cfg.scenario };
    let mut reps: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("rep_")))
        .collect();
    reps.sort();
    if reps.is_empty() {
        return Err(ReportError::NoReplicates { path: dir.into(), file: source.file() });
    }
    reps.iter()
        .map(|rep| {
            let path = rep.join(source.file());
            let records = read_trajectory(&path)?;
            let mut acc = MetricsAccumulator::new(cfg.scheme());
            records.iter().for_each(|r| acc.push(r));
            let episodes = acc.episodes();
            let chosen = match source {
                Source::Eval => episodes,
                Source::Train { tail_episodes } => &episodes[episodes.len().saturating_sub(tail_episodes)..],
            };
            let summary = MetricsSummary::from_episodes(chosen);
            if summary.is_empty() {
                return Err(ReportError::Empty { path });
            }
            check_identity(&path, &summary)?;
            Ok(ReplicateInput { key, path, summary })
        })
        .collect()
}

fn check_identity(path: &Path, s: &MetricsSummary) -> Result<(), ReportError> {
    let pairs = [
        (s.global.base, s.factory.base, s.retailer.base),
        (s.global.shaped, s.factory.shaped, s.retailer.shaped),
        (s.global.adjusted, s.factory.adjusted, s.retailer.adjusted),
    ];
    for (g, f, r) in pairs {
        for (g, sum) in [(g.per_episode, f.per_episode + r.per_episode), (g.per_day, f.per_day + r.per_day)] {
            if (g - sum).abs() > 1e-9 * g.abs().max(1.0) {
                return Err(ReportError::Identity { path: path.into(), global: g, sum });
            }
        }
    }
    Ok(())
}

/// Groups replicates by cell and reduces each group.
pub fn aggregate(inputs: &[ReplicateInput], source: Source) -> ReportSummary {
    let mut groups: BTreeMap<CellKey, Vec<&MetricsSummary>> = BTreeMap::new();
    for inp in inputs {
        groups.entry(inp.key).or_default().push(&inp.summary);
    }
    let cells = groups
        .into_iter()
        .map(|(key, reps)| {
            let agent = |f: fn(&MetricsSummary) -> &AgentSummary| AgentStat::of(key.scheme, &reps.iter().map(|m| f(m)).collect::<Vec<_>>());
            let kind_percent = CommKind::ALL
                .iter()
                .map(|&k| {
                    let per_rep = reps.iter().map(|m| 100.0 * m.kind_share.iter().find(|(kk, _)| *kk == k).map_or(0.0, |(_, v)| *v)).collect();
                    (k, Stat::of(per_rep))
                })
                .collect();
            let global = agent(|m| &m.global);
            let mut replicate_global: Vec<f64> = reps
                .iter()
                .map(|m| match key.scheme {
                    SchemeKind::Baseline => m.global.base.per_30_days,
                    SchemeKind::Collaborative => m.global.adjusted.per_30_days,
                })
                .collect();
            replicate_global.sort_by(f64::total_cmp);
            CellSummary {
                key,
                replicates: reps.len(),
                episodes: reps.iter().map(|m| m.episodes).sum(),
                days: reps.iter().map(|m| m.days).sum(),
                factory: agent(|m| &m.factory),
                retailer: agent(|m| &m.retailer),
                global,
                kind_percent,
                replicate_global,
            }
        })
        .collect();
    ReportSummary { source, cells }
}

/// Discovers, loads and aggregates everything under `root`.
pub fn summarize(root: &Path, source: Source) -> Result<ReportSummary, ReportError> {
    let runs = discover_runs(root)?;
    if runs.is_empty() {
        return Err(ReportError::NoRuns(root.into()));
    }
    let mut inputs = Vec::new();
    for run in &runs {
        inputs.extend(load_run(run, source)?);
    }
    Ok(aggregate(&inputs, source))
}

/// Cells to render. `None` fields mean "whatever the summary contains"
/// (scenarios default to all four).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grid {
    pub demands: Option<Vec<Demand>>,
    pub schemes: Option<Vec<SchemeKind>>,
    pub scenarios: Option<Vec<CommScenario>>,
}

fn parse_list<T: FromStr>(part: &str, whole: &str) -> Result<Option<Vec<T>>, ReportError> {
    if part == "all" || part.is_empty() {
        return Ok(None);
    }
    part.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| ReportError::Grid(whole.into(), format!("unknown value `{s}`"))))
        .collect::<Result<Vec<T>, _>>()
        .map(Some)
}

impl FromStr for Grid {
    type Err = ReportError;

    /// `demands/schemes/scenarios`, each a comma list or `all`; missing
    /// trailing parts mean `all`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('/').collect();
        if parts.len() > 3 {
            return Err(ReportError::Grid(s.into(), "expected at most three `/`-separated parts".into()));
        }
        let part = |i: usize| parts.get(i).copied().unwrap_or("all");
        Ok(Grid { demands: parse_list(part(0), s)?, schemes: parse_list(part(1), s)?, scenarios: parse_list(part(2), s)? })
    }
}

impl Grid {
    fn resolve(&self, summary: &ReportSummary) -> (Vec<Demand>, Vec<SchemeKind>, Vec<CommScenario>) {
        let mut demands = self.demands.clone().unwrap_or_else(|| summary.cells.iter().map(|c| c.key.demand).collect());
        let mut schemes = self.schemes.clone().unwrap_or_else(|| summary.cells.iter().map(|c| c.key.scheme).collect());
        let scenarios = self.scenarios.clone().unwrap_or_else(|| CommScenario::ALL.to_vec());
        demands.sort();
        demands.dedup();
        schemes.sort();
        schemes.dedup();
        (demands, schemes, scenarios)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub txt: bool,
    pub plots: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, txt: true, plots: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportOutput {
    pub files: Vec<PathBuf>,
    /// Requested cells with no data; rendered as NA.
    pub missing: Vec<CellKey>,
}

#[derive(Debug, Clone, Copy)]
enum Measure {
    Reported,
    Shaped,
}

fn agents(cell: &CellSummary) -> [(&'static str, &AgentStat); 3] {
    [("Factory", &cell.factory), ("Retailer", &cell.retailer), ("Global", &cell.global)]
}

fn scenario_columns(scenarios: &[CommScenario]) -> Vec<String> {
    scenarios.iter().map(|s| s.label().to_string()).collect()
}

fn rewards_table(summary: &ReportSummary, demand: Demand, scheme: SchemeKind, scenarios: &[CommScenario], measure: Measure) -> Table {
    let what = match (measure, scheme) {
        (Measure::Shaped, _) => "shaped rewards",
        (Measure::Reported, SchemeKind::Baseline) => "rewards",
        (Measure::Reported, SchemeKind::Collaborative) => "comparability-adjusted rewards",
    };
    let mut t = Table::new(format!("{demand} demand, {scheme} scheme: {what} per 30 days (mean ± std over replicates)"), "agent", scenario_columns(scenarios));
    for (i, name) in ["Factory", "Retailer", "Global"].into_iter().enumerate() {
        let cells = scenarios
            .iter()
            .map(|&scenario| {
                summary.cell(CellKey { demand, scheme, scenario }).map(|c| {
                    let a = agents(c)[i].1;
                    match measure {
                        Measure::Reported => a.reported.per_30_days.entry(),
                        Measure::Shaped => a.shaped.per_30_days.entry(),
                    }
                })
            })
            .collect();
        t.push_row(name, cells);
    }
    t
}

fn inventory_table(summary: &ReportSummary, demand: Demand, scheme: SchemeKind, scenarios: &[CommScenario]) -> Table {
    let mut t = Table::new(format!("{demand} demand, {scheme} scheme: mean inventory (units) and per-day rates"), "measure", scenario_columns(scenarios));
    t.decimals = 4;
    type Pick = fn(&CellSummary) -> Stat;
    let rows: [(&str, Pick); 6] = [
        ("Factory inventory", |c| c.factory.mean_inventory),
        ("Retailer inventory", |c| c.retailer.mean_inventory),
        ("Factory stockout rate", |c| c.factory.stockout_rate),
        ("Retailer stockout rate", |c| c.retailer.stockout_rate),
        ("Factory backlog rate", |c| c.factory.backlog_rate),
        ("Retailer backlog rate", |c| c.retailer.backlog_rate),
    ];
    for (name, pick) in rows {
        let cells = scenarios.iter().map(|&scenario| summary.cell(CellKey { demand, scheme, scenario }).map(|c| pick(c).entry())).collect();
        t.push_row(name, cells);
    }
    t
}

fn mixed_table(summary: &ReportSummary, demand: Demand, schemes: &[SchemeKind]) -> Table {
    let kinds = [CommKind::NoComms, CommKind::Truth, CommKind::Lying];
    let columns = ["NoComms", "Truth", "Lying"].map(String::from).to_vec();
    let mut t = Table::new(format!("{demand} demand, Mixed scenario: percent of days per disclosure kind"), "scheme", columns);
    for &scheme in schemes {
        let cell = summary.cell(CellKey { demand, scheme, scenario: CommScenario::Mixed });
        let cells = kinds.iter().map(|k| cell.and_then(|c| c.kind_percent.iter().find(|(kk, _)| kk == k)).map(|(_, s)| s.entry())).collect();
        t.push_row(scheme.as_str(), cells);
    }
    t
}

fn write_file(out: &mut ReportOutput, path: PathBuf, text: &str) -> Result<(), ReportError> {
    std::fs::write(&path, text).map_err(io(&path))?;
    out.files.push(path);
    Ok(())
}

fn write_table(out: &mut ReportOutput, dir: &Path, stem: &str, t: &Table, formats: Formats) -> Result<(), ReportError> {
    if formats.csv {
        write_file(out, dir.join(format!("{stem}.csv")), &t.to_csv())?;
    }
    if formats.txt {
        write_file(out, dir.join(format!("{stem}.txt")), &t.to_text())?;
    }
    Ok(())
}

/// Long-form CSV of every cell and measure.
pub fn summary_csv(summary: &ReportSummary) -> String {
    let mut s = String::from("demand,scheme,scenario,replicates,agent,measure,mean,std\n");
    for c in &summary.cells {
        let k = c.key;
        let mut row = |agent: &str, measure: &str, st: Stat| {
            s.push_str(&format!("{},{},{},{},{agent},{measure},{:.6},{:.6}\n", k.demand, k.scheme, k.scenario.as_str(), c.replicates, st.mean, st.std));
        };
        for (name, a) in agents(c) {
            let name = name.to_lowercase();
            for (m, r) in [("base", a.base), ("shaped", a.shaped), ("adjusted", a.adjusted), ("reported", a.reported)] {
                row(&name, &format!("{m}_per_episode"), r.per_episode);
                row(&name, &format!("{m}_per_day"), r.per_day);
                row(&name, &format!("{m}_per_30_days"), r.per_30_days);
            }
            row(&name, "mean_inventory", a.mean_inventory);
            row(&name, "stockout_rate", a.stockout_rate);
            row(&name, "backlog_rate", a.backlog_rate);
        }
        for (kind, st) in &c.kind_percent {
            row("factory", &format!("percent_{}", kind.as_str()), *st);
        }
    }
    s
}

/// Writes summary files, tables and (optionally) plots for `grid`.
pub fn render(summary: &ReportSummary, grid: &Grid, formats: Formats, out_dir: &Path) -> Result<ReportOutput, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut out = ReportOutput::default();
    let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
    json.push('\n');
    write_file(&mut out, out_dir.join("summary.json"), &json)?;
    write_file(&mut out, out_dir.join("summary.csv"), &summary_csv(summary))?;

    let (demands, schemes, scenarios) = grid.resolve(summary);
    for &demand in &demands {
        for &scheme in &schemes {
            for &scenario in &scenarios {
                let key = CellKey { demand, scheme, scenario };
                if summary.cell(key).is_none() {
                    out.missing.push(key);
                }
            }
        }
    }

    let no_comms = scenarios.iter().position(|s| *s == CommScenario::NoComms);
    for &demand in &demands {
        let mut deltas: Vec<(SchemeKind, Table)> = Vec::new();
        for &scheme in &schemes {
            let tag = format!("{demand}_{scheme}");
            let rewards = rewards_table(summary, demand, scheme, &scenarios, Measure::Reported);
            write_table(&mut out, out_dir, &format!("rewards_{tag}"), &rewards, formats)?;
            if scheme == SchemeKind::Collaborative {
                let shaped = rewards_table(summary, demand, scheme, &scenarios, Measure::Shaped);
                write_table(&mut out, out_dir, &format!("rewards_shaped_{tag}"), &shaped, formats)?;
            }
            if let Some(base) = no_comms {
                let delta = rewards.delta_vs(base, format!("{demand} demand, {scheme} scheme: reward difference to NoComms per 30 days"));
                write_table(&mut out, out_dir, &format!("delta_{tag}"), &delta, formats)?;
                deltas.push((scheme, delta));
            }
            let inventory = inventory_table(summary, demand, scheme, &scenarios);
            write_table(&mut out, out_dir, &format!("inventory_{tag}"), &inventory, formats)?;
            if formats.plots {
                let chart = BarChart {
                    title: format!("Mean inventory, {demand} demand, {scheme} scheme"),
                    y_label: "units".into(),
                    categories: scenario_columns(&scenarios),
                    series: vec!["Factory".into(), "Retailer".into()],
                    values: (0..scenarios.len())
                        .map(|c| vec![inventory.rows[0].cells[c].map(|e| e.value), inventory.rows[1].cells[c].map(|e| e.value)])
                        .collect(),
                };
                write_file(&mut out, out_dir.join(format!("inventory_{tag}.svg")), &chart.render())?;
            }
        }
        if scenarios.contains(&CommScenario::Mixed) {
            write_table(&mut out, out_dir, &format!("mixed_{demand}"), &mixed_table(summary, demand, &schemes), formats)?;
        }
        if formats.plots && !deltas.is_empty() {
            for (row, agent) in ["Factory", "Retailer", "Global"].into_iter().enumerate() {
                let chart = BarChart {
                    title: format!("{agent} reward difference to NoComms, {demand} demand"),
                    y_label: "reward per 30 days".into(),
                    categories: deltas.iter().map(|(s, _)| s.as_str().to_string()).collect(),
                    series: deltas[0].1.columns.clone(),
                    values: deltas.iter().map(|(_, t)| t.rows[row].cells.iter().map(|c| c.map(|e| e.value)).collect()).collect(),
                };
                write_file(&mut out, out_dir.join(format!("delta_{}_{demand}.svg", agent.to_lowercase())), &chart.render())?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use echelon_core::metrics::AgentTotals;
    use echelon_core::metrics::EpisodeTotals;
    use echelon_core::Money;

    fn episode(r: i64, f: i64, days: u32) -> EpisodeTotals {
        let agent = |x: i64| AgentTotals {
            base: Money::from_micros(x * 1_000_000),
            shaped: Money::from_micros(x * 1_000_000),
            adjusted: Money::from_micros(x * 1_000_000),
            inventory: 10 * u64::from(days),
            ..Default::default()
        };
        EpisodeTotals { episode: 0, days, retailer: agent(r), factory: agent(f), kinds: [u64::from(days), 0, 0] }
    }

    fn input(key: CellKey, global: i64) -> ReplicateInput {
        ReplicateInput { key, path: PathBuf::from("x"), summary: MetricsSummary::from_episodes(&[episode(global - 1, 1, 30)]) }
    }

    const KEY: CellKey = CellKey { demand: Demand::High, scheme: SchemeKind::Baseline, scenario: CommScenario::Truth };

    #[test]
    fn mean_over_replicates() {
        let s = aggregate(&[input(KEY, 1), input(KEY, 2), input(KEY, 3)], Source::Eval);
        assert_eq!(s.cells.len(), 1);
        assert_eq!(s.cells[0].global.reported.per_episode.mean, 2.0);
        assert_eq!(s.cells[0].global.reported.per_episode.std, 1.0);
        assert_eq!(s.cells[0].replicate_global, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn single_episode_is_identity() {
        let e = episode(-7, 12, 30);
        let s = aggregate(&[ReplicateInput { key: KEY, path: "x".into(), summary: MetricsSummary::from_episodes(&[e]) }], Source::Eval);
        let c = &s.cells[0];
        assert_eq!(c.retailer.base.per_episode.mean, -7.0);
        assert_eq!(c.factory.base.per_episode.mean, 12.0);
        assert_eq!(c.global.base.per_episode.mean, 5.0);
        assert_eq!(c.global.base.per_episode.std, 0.0);
        assert_eq!(c.retailer.mean_inventory.mean, 10.0);
    }

    #[test]
    fn order_of_replicates_does_not_matter() {
        let values = [0.1, 1e6, -3.3, 7.0, 2.2];
        let inputs: Vec<_> = values
            .iter()
            .map(|&g| ReplicateInput { key: KEY, path: "x".into(), summary: MetricsSummary::from_episodes(&[episode((g * 1e6) as i64 / 1_000_000, 0, 30)]) })
            .collect();
        let mut rev = inputs.clone();
        rev.reverse();
        assert_eq!(aggregate(&inputs, Source::Eval), aggregate(&rev, Source::Eval));
    }

    #[test]
    fn percentages_sum_to_hundred() {
        let mut e = episode(1, 1, 30);
        e.kinds = [7, 11, 12];
        let s = aggregate(&[ReplicateInput { key: KEY, path: "x".into(), summary: MetricsSummary::from_episodes(&[e]) }], Source::Eval);
        let total: f64 = s.cells[0].kind_percent.iter().map(|(_, p)| p.mean).sum();
        assert!((total - 100.0).abs() < 0.01);
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "low,high/collaborative".parse().unwrap();
        assert_eq!(g.demands, Some(vec![Demand::Low, Demand::High]));
        assert_eq!(g.schemes, Some(vec![SchemeKind::Collaborative]));
        assert_eq!(g.scenarios, None);
        assert_eq!("all/all/all".parse::<Grid>().unwrap(), Grid::default());
        assert!("medium".parse::<Grid>().is_err());
        assert!("a/b/c/d".parse::<Grid>().is_err());
    }

    #[test]
    fn missing_cells_are_marked() {
        let s = aggregate(&[input(KEY, 1)], Source::Eval);
        let dir = tempfile::tempdir().unwrap();
        let out = render(&s, &Grid::default(), Formats { plots: true, ..Formats::default() }, dir.path()).unwrap();
        assert_eq!(out.missing.len(), 3);
        let text = std::fs::read_to_string(dir.path().join("rewards_high_baseline.txt")).unwrap();
        assert!(text.contains("NA"));
        assert!(dir.path().join("delta_factory_high.svg").is_file());
        assert!(!dir.path().join("rewards_shaped_high_baseline.csv").exists());
    }

    #[test]
    fn identity_violation_is_reported() {
        let mut m = MetricsSummary::from_episodes(&[episode(1, 2, 30)]);
        assert!(check_identity(Path::new("x"), &m).is_ok());
        m.global.base.per_episode += 1e-3;
        assert!(matches!(check_identity(Path::new("x"), &m), Err(ReportError::Identity { .. })));
    }
}
