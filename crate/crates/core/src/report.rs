//! Experiment driver and plot-ready summaries.
//!
//! Every instance is solved once under the baseline model with the
//! recording search; the recorded tree is then replayed under each other
//! requested variant. Results are rows of a fixed CSV schema from which the
//! performance profile and the gap cactus data are derived.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::engine::Time;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Model, ModelVariant};
use crate::search::{gap, replay, solve, SearchLimits};

/// Column order of the experiment CSV.
pub const COLUMNS: [&str; 8] = [
    "instance",
    "variant",
    "width",
    "nodes",
    "failures",
    "time_ms",
    "best_cost",
    "gap_vs_bc",
];

/// Exact bound consistency is skipped above this many jobs unless
/// configured otherwise.
pub const DEFAULT_EXACT_MAX_JOBS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance: String,
    pub variant: String,
    pub width: Option<usize>,
    pub nodes: u64,
    pub failures: u64,
    /// Empty in deterministic mode.
    pub time_ms: Option<u128>,
    pub best_cost: Option<Time>,
    /// `(Z - Z_bc) / Z_bc` against the exact bound-consistent replay.
    pub gap_vs_bc: Option<f64>,
}

impl ExperimentRow {
    /// `variant` or `variant:width`.
    pub fn method(&self) -> String {
        match self.width {
            Some(w) => format!("{}:{w}", self.variant),
            None => self.variant.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Variants replayed on the baseline tree. The baseline row is always
    /// emitted; listing it again has no effect.
    pub variants: Vec<ModelVariant>,
    pub limits: SearchLimits,
    /// Omit wall-clock times so that output only depends on the inputs.
    pub deterministic: bool,
    pub exact_max_jobs: usize,
}

impl ExperimentConfig {
    pub fn new(variants: Vec<ModelVariant>, limits: SearchLimits) -> Self {
        Self {
            variants,
            limits,
            deterministic: false,
            exact_max_jobs: DEFAULT_EXACT_MAX_JOBS,
        }
    }

    /// Deterministic runs must be bounded by nodes, not time.
    pub fn validate(&self) -> Result<()> {
        if self.deterministic && (self.limits.nodes.is_none() || self.limits.time.is_some()) {
            return Err(Error::InvalidArgument(
                "deterministic mode needs a node limit and no time limit".into(),
            ));
        }
        for v in &self.variants {
            if v.width() == Some(0) {
                return Err(Error::InvalidArgument("width must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Rows for one instance: the baseline recording, then each replay.
pub fn run_instance(name: &str, instance: &Instance, config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let time = |ms: u128| (!config.deterministic).then_some(ms);
    let mut baseline = Model::new(instance, ModelVariant::Baseline);
    let recorded = solve(&mut baseline, config.limits);
    let mut rows = vec![ExperimentRow {
        instance: name.to_string(),
        variant: ModelVariant::Baseline.name().to_string(),
        width: None,
        nodes: recorded.stats.nodes,
        failures: recorded.stats.failures,
        time_ms: time(recorded.stats.elapsed.as_millis()),
        best_cost: recorded.stats.best_cost,
        gap_vs_bc: None,
    }];
    for &variant in &config.variants {
        if variant == ModelVariant::Baseline
            || (variant == ModelVariant::ExactBc && instance.len() > config.exact_max_jobs)
        {
            continue;
        }
        let mut model = Model::new(instance, variant);
        let stats = replay(&recorded.log, &mut model)?;
        rows.push(ExperimentRow {
            instance: name.to_string(),
            variant: variant.name().to_string(),
            width: variant.width(),
            nodes: stats.nodes,
            failures: stats.failures,
            time_ms: time(stats.elapsed.as_millis()),
            best_cost: stats.best_cost,
            gap_vs_bc: None,
        });
    }
    let exact = ModelVariant::ExactBc.name();
    if let Some(z_bc) = rows.iter().find(|r| r.variant == exact).map(|r| r.nodes) {
        for row in &mut rows {
            row.gap_vs_bc = Some(gap(row.nodes, z_bc)?);
        }
    }
    Ok(rows)
}

/// Runs every instance, in parallel, keeping the input order in the output.
pub fn run_experiment(instances: &[(String, Instance)], config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let per_instance: Vec<Result<Vec<ExperimentRow>>> = instances
        .par_iter()
        .map(|(name, inst)| run_instance(name, inst, config))
        .collect();
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.variant.clone(),
            opt(&r.width),
            r.nodes.to_string(),
            r.failures.to_string(),
            opt(&r.time_ms),
            opt(&r.best_cost),
            r.gap_vs_bc.map_or_else(String::new, |g| format!("{g:.6}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let mut index = [0usize; 8];
    for (k, name) in COLUMNS.iter().enumerate() {
        index[k] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| record.get(index[k]).unwrap_or("").trim();
        let bad = |k: usize| Error::Parse {
            line: line + 2,
            msg: format!("bad value `{}` in column `{}`", field(k), COLUMNS[k]),
        };
        fn parse_opt<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| ())
            }
        }
        rows.push(ExperimentRow {
            instance: field(0).to_string(),
            variant: field(1).to_string(),
            width: parse_opt(field(2)).map_err(|_| bad(2))?,
            nodes: field(3).parse().map_err(|_| bad(3))?,
            failures: field(4).parse().map_err(|_| bad(4))?,
            time_ms: parse_opt(field(5)).map_err(|_| bad(5))?,
            best_cost: parse_opt(field(6)).map_err(|_| bad(6))?,
            gap_vs_bc: parse_opt(field(7)).map_err(|_| bad(7))?,
        });
    }
    Ok(rows)
}

/// Quantity compared by the performance profile.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Measure {
    Nodes,
    TimeMs,
}

/// One step of a cumulative curve: `fraction` of the method's instances
/// have a value at most `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: String,
    pub x: f64,
    pub fraction: f64,
}

fn cumulative(method: &str, mut values: Vec<f64>) -> Vec<CurvePoint> {
    values.sort_by(f64::total_cmp);
    let total = values.len() as f64;
    let mut out: Vec<CurvePoint> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let fraction = (k + 1) as f64 / total;
        match out.last_mut() {
            Some(p) if p.x == v => p.fraction = fraction,
            _ => out.push(CurvePoint {
                method: method.to_string(),
                x: v,
                fraction,
            }),
        }
    }
    out
}

/// Performance profile: for every method, the cumulative distribution over
/// instances of its value divided by the best value on that instance.
/// Values below 1 count as 1 so that ratios stay finite. Rows lacking the
/// measure are ignored.
pub fn performance_profile(rows: &[ExperimentRow], measure: Measure) -> Vec<CurvePoint> {
    let value = |r: &ExperimentRow| match measure {
        Measure::Nodes => Some(r.nodes as f64),
        Measure::TimeMs => r.time_ms.map(|t| t as f64),
    };
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for r in rows {
        if let Some(v) = value(r) {
            let v = v.max(1.0);
            let b = best.entry(&r.instance).or_insert(v);
            *b = b.min(v);
        }
    }
    let mut ratios: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let Some(v) = value(r) {
            ratios.entry(r.method()).or_default().push(v.max(1.0) / best[r.instance.as_str()]);
        }
    }
    ratios.into_iter().flat_map(|(m, v)| cumulative(&m, v)).collect()
}

/// Cactus data: for every method, the cumulative distribution of its gap to
/// exact bound consistency over the instances where that gap is known.
pub fn gap_cactus(rows: &[ExperimentRow]) -> Vec<CurvePoint> {
    let exact = ModelVariant::ExactBc.name();
    let mut gaps: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.variant != exact) {
        if let Some(g) = r.gap_vs_bc {
            gaps.entry(r.method()).or_default().push(g);
        }
    }
    gaps.into_iter().flat_map(|(m, v)| cumulative(&m, v)).collect()
}

/// Writes `method,<x_name>,fraction` rows.
pub fn write_curve<W: Write>(points: &[CurvePoint], x_name: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", x_name, "fraction"])?;
    for p in points {
        w.write_record([p.method.clone(), format!("{:.6}", p.x), format!("{:.6}", p.fraction)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_instance;

    fn row(instance: &str, variant: &str, width: Option<usize>, nodes: u64) -> ExperimentRow {
        ExperimentRow {
            instance: instance.into(),
            variant: variant.into(),
            width,
            nodes,
            failures: 0,
            time_ms: None,
            best_cost: None,
            gap_vs_bc: None,
        }
    }

    fn points(curve: &[CurvePoint], method: &str) -> Vec<(f64, f64)> {
        curve.iter().filter(|p| p.method == method).map(|p| (p.x, p.fraction)).collect()
    }

    #[test]
    fn single_method_profile_is_one_at_one() {
        let rows = vec![row("a", "baseline", None, 10), row("b", "baseline", None, 30)];
        assert_eq!(points(&performance_profile(&rows, Measure::Nodes), "baseline"), vec![(1.0, 1.0)]);
    }

    #[test]
    fn dominant_method_reaches_one_at_one() {
        let rows = vec![
            row("a", "baseline", None, 10),
            row("a", "exact-bc", None, 5),
            row("b", "baseline", None, 30),
            row("b", "exact-bc", None, 30),
        ];
        let p = performance_profile(&rows, Measure::Nodes);
        assert_eq!(points(&p, "exact-bc"), vec![(1.0, 1.0)]);
        assert_eq!(points(&p, "baseline"), vec![(1.0, 0.5), (2.0, 1.0)]);
    }

    #[test]
    fn hand_computed_profile() {
        // best per instance: a 4, b 6, c 3
        let rows = vec![
            row("a", "pe", Some(8), 4),
            row("a", "relaxed-bc", Some(8), 6),
            row("b", "pe", Some(8), 9),
            row("b", "relaxed-bc", Some(8), 6),
            row("c", "pe", Some(8), 3),
            row("c", "relaxed-bc", Some(8), 12),
        ];
        let p = performance_profile(&rows, Measure::Nodes);
        let third = 1.0 / 3.0;
        assert_eq!(points(&p, "pe:8"), vec![(1.0, 2.0 * third), (1.5, 1.0)]);
        assert_eq!(points(&p, "relaxed-bc:8"), vec![(1.0, third), (1.5, 2.0 * third), (4.0, 1.0)]);
    }

    #[test]
    fn cactus_excludes_the_reference() {
        let mut rows = vec![
            row("a", "exact-bc", None, 10),
            row("a", "baseline", None, 12),
            row("b", "exact-bc", None, 10),
            row("b", "baseline", None, 10),
        ];
        for r in &mut rows {
            r.gap_vs_bc = Some(gap(r.nodes, 10).unwrap());
        }
        let c = gap_cactus(&rows);
        assert!(points(&c, "exact-bc").is_empty());
        let pts = points(&c, "baseline");
        assert_eq!(pts[0], (0.0, 0.5));
        assert!((pts[1].0 - 0.2).abs() < 1e-12 && pts[1].1 == 1.0);
    }

    #[test]
    fn csv_roundtrip_and_missing_column() {
        let mut rows = vec![row("x", "relaxed-bc", Some(4), 7), row("x", "exact-bc", None, 5)];
        rows[0].time_ms = Some(12);
        rows[0].best_cost = Some(40);
        rows[0].gap_vs_bc = Some(0.4);
        rows[1].gap_vs_bc = Some(0.0);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("instance,variant,width,nodes,failures,time_ms,best_cost,gap_vs_bc\n"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
        assert!(matches!(
            read_csv("instance,variant\nx,pe\n".as_bytes()),
            Err(Error::MissingColumn(_))
        ));
        assert!(matches!(
            read_csv(text.replace(",7,", ",seven,").as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn baseline_only_has_no_gap() {
        let inst = generate_instance(6, 2);
        let config = ExperimentConfig::new(vec![ModelVariant::Baseline], SearchLimits::nodes(100));
        let rows = run_experiment(&[("i".into(), inst)], &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].gap_vs_bc, None);
    }

    #[test]
    fn exact_is_skipped_on_large_instances() {
        let mut config = ExperimentConfig::new(vec![ModelVariant::ExactBc], SearchLimits::nodes(20));
        config.exact_max_jobs = 5;
        let rows = run_experiment(&[("i".into(), generate_instance(6, 2))], &config).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn deterministic_runs_repeat() {
        let instances: Vec<(String, Instance)> = (0..3).map(|s| (format!("i{s}"), generate_instance(8, s))).collect();
        let mut config = ExperimentConfig::new(
            vec![ModelVariant::RelaxedBc { width: 4 }, ModelVariant::ExactBc],
            SearchLimits::nodes(80),
        );
        config.deterministic = true;
        let csv = || {
            let mut buf = Vec::new();
            write_csv(&run_experiment(&instances, &config).unwrap(), &mut buf).unwrap();
            buf
        };
        let first = csv();
        assert_eq!(first, csv());
        let rows = read_csv(first.as_slice()).unwrap();
        assert!(rows.iter().all(|r| r.time_ms.is_none() && r.gap_vs_bc.is_some()));

        config.limits = SearchLimits {
            nodes: None,
            time: Some(std::time::Duration::from_secs(1)),
        };
        assert!(run_experiment(&instances, &config).is_err());
    }
}
