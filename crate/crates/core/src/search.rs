//! Depth-first branch and bound with conflict ordering search, plus the
//! recording and replay of its search tree.
//!
//! Every node entered by [`solve`] is logged in pre-order with the decision
//! leading to it and its outcome. [`replay`] walks the same tree under a
//! different model: a node is entered only if it was entered in the
//! recording, and its recorded subtree is skipped as soon as the replaying
//! model fails there. Objective cuts are taken from the recorded solutions,
//! so only the propagation strength differs between replays.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::engine::{Checkpoint, Infeasible, Outcome, Time};
use crate::error::{Error, Result};
use crate::instance::Schedule;
use crate::model::Model;

pub const LOG_VERSION: u32 = 1;
pub const HEURISTIC: &str = "cos";

#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub enum DecisionKind {
    /// `s_var = value`
    Assign,
    /// `s_var >= value`
    ExcludeBelow,
}

/// A branching decision on a start variable, identified by job index.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct Decision {
    pub var: usize,
    pub kind: DecisionKind,
    pub value: Time,
}

impl Decision {
    fn apply(&self, model: &mut Model) -> std::result::Result<(), Infeasible> {
        let v = model.starts[self.var];
        match self.kind {
            DecisionKind::Assign => model.store.assign(v, self.value)?,
            DecisionKind::ExcludeBelow => model.store.set_min(v, self.value)?,
        };
        Ok(())
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum NodeStatus {
    /// Propagation failed, or the fixed schedule was rejected.
    Fail,
    /// All starts fixed; the schedule's cost.
    Solution(Time),
    /// The node was branched on; its children follow in the log.
    Branch,
}

/// One logged node.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub depth: usize,
    /// `None` for the root.
    pub decision: Option<Decision>,
    pub status: NodeStatus,
}

/// Node and time limits. Both `None` means run to completion.
#[derive(Debug, Copy, Clone, Default, PartialEq, Eq)]
pub struct SearchLimits {
    pub nodes: Option<u64>,
    pub time: Option<Duration>,
}

impl SearchLimits {
    pub fn nodes(n: u64) -> Self {
        Self {
            nodes: Some(n),
            time: None,
        }
    }
}

/// A recorded search tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayLog {
    /// Digest of the instance the tree was recorded on.
    pub digest: String,
    pub heuristic: String,
    pub limits: SearchLimits,
    /// True when the recorded search explored its whole tree.
    pub complete: bool,
    /// Nodes in pre-order.
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes entered, the root included.
    pub nodes: u64,
    pub failures: u64,
    pub solutions: u64,
    pub best_cost: Option<Time>,
    pub complete: bool,
    pub elapsed: Duration,
}

pub struct SearchResult {
    pub best: Option<Schedule>,
    pub stats: SearchStats,
    pub log: ReplayLog,
}

/// `(Z - Z') / Z'`: extra nodes explored relative to a reference count.
pub fn gap(z: u64, z_ref: u64) -> Result<f64> {
    if z_ref == 0 {
        return Err(Error::ZeroReference);
    }
    Ok((z as f64 - z_ref as f64) / z_ref as f64)
}

/// Conflict ordering: the unfixed variable that failed most recently,
/// otherwise the one with the smallest lower bound (then the smallest id).
/// Branches are `s = lo` then `s >= lo + 1`.
pub fn cos_next_decision(model: &Model, stamps: &[u64]) -> Option<(Decision, Decision)> {
    let store = &model.store;
    let var = (0..model.starts.len())
        .filter(|&i| !store.is_fixed(model.starts[i]))
        .min_by_key(|&i| (std::cmp::Reverse(stamps[i]), store.lo(model.starts[i]), i))?;
    let lo = store.lo(model.starts[var]);
    Some((
        Decision {
            var,
            kind: DecisionKind::Assign,
            value: lo,
        },
        Decision {
            var,
            kind: DecisionKind::ExcludeBelow,
            value: lo + 1,
        },
    ))
}

/// Enters a node: applies its decision and the objective cut, then
/// propagates. A node whose starts are all fixed is a solution.
fn enter(model: &mut Model, decision: Option<&Decision>, cut: Option<Time>) -> NodeStatus {
    let applied = decision.map_or(Ok(()), |d| d.apply(model)).and_then(|()| match cut {
        Some(best) => model.store.set_max(model.objective, best - 1).map(|_| ()),
        None => Ok(()),
    });
    if applied.is_err() || model.propagate() == Outcome::Infeasible {
        return NodeStatus::Fail;
    }
    if !model.all_fixed() {
        return NodeStatus::Branch;
    }
    let schedule = model.schedule();
    match model.instance.evaluate_objective(&schedule) {
        Ok(cost) if cut.is_none_or(|b| cost < b) => NodeStatus::Solution(cost),
        _ => NodeStatus::Fail,
    }
}

enum Task {
    Enter(usize, Option<Decision>),
    Leave(Checkpoint),
}

struct Limiter {
    start: Instant,
    limits: SearchLimits,
}

impl Limiter {
    fn reached(&self, nodes: u64) -> bool {
        self.limits.nodes.is_some_and(|n| nodes >= n) || self.limits.time.is_some_and(|t| self.start.elapsed() >= t)
    }
}

/// Minimises total earliness plus tardiness by depth-first branch and bound.
pub fn solve(model: &mut Model, limits: SearchLimits) -> SearchResult {
    let limiter = Limiter {
        start: Instant::now(),
        limits,
    };
    let n = model.starts.len();
    let mut stamps = vec![0u64; n];
    let mut clock = 0u64;
    let mut stats = SearchStats::default();
    let mut entries = Vec::new();
    let mut best: Option<Schedule> = None;
    let mut complete = true;
    let mut tasks = vec![Task::Enter(0, None)];

    while let Some(task) = tasks.pop() {
        let (depth, decision) = match task {
            Task::Leave(cp) => {
                model.store.restore(cp);
                continue;
            }
            Task::Enter(depth, decision) => (depth, decision),
        };
        if limiter.reached(stats.nodes) {
            complete = false;
            break;
        }
        stats.nodes += 1;
        let cp = model.store.checkpoint();
        let status = enter(model, decision.as_ref(), stats.best_cost);
        match status {
            NodeStatus::Fail => {
                stats.failures += 1;
                if let Some(d) = decision {
                    clock += 1;
                    stamps[d.var] = clock;
                }
                model.store.restore(cp);
            }
            NodeStatus::Solution(cost) => {
                stats.solutions += 1;
                stats.best_cost = Some(cost);
                best = Some(model.schedule());
                model.store.restore(cp);
            }
            NodeStatus::Branch => {
                let (left, right) = cos_next_decision(model, &stamps).expect("unfixed variable at a branch node");
                tasks.push(Task::Leave(cp));
                tasks.push(Task::Enter(depth + 1, Some(right)));
                tasks.push(Task::Enter(depth + 1, Some(left)));
            }
        }
        entries.push(LogEntry {
            depth,
            decision,
            status,
        });
    }
    // unwind whatever the limit left open
    while let Some(task) = tasks.pop() {
        if let Task::Leave(cp) = task {
            model.store.restore(cp);
        }
    }
    stats.complete = complete;
    stats.elapsed = limiter.start.elapsed();
    SearchResult {
        best,
        log: ReplayLog {
            digest: model.instance.digest(),
            heuristic: HEURISTIC.to_string(),
            limits,
            complete,
            entries,
        },
        stats,
    }
}

/// Re-explores a recorded tree under `model`.
pub fn replay(log: &ReplayLog, model: &mut Model) -> Result<SearchStats> {
    let digest = model.instance.digest();
    if digest != log.digest {
        return Err(Error::DigestMismatch {
            expected: log.digest.clone(),
            actual: digest,
        });
    }
    let start = Instant::now();
    let entries = &log.entries;
    // cut[i]: best recorded cost strictly before entry i
    let mut cuts = Vec::with_capacity(entries.len());
    let mut incumbent: Option<Time> = None;
    for e in entries {
        cuts.push(incumbent);
        if let NodeStatus::Solution(c) = e.status {
            incumbent = Some(incumbent.map_or(c, |b| b.min(c)));
        }
    }

    let mut stats = SearchStats::default();
    let mut open: Vec<(usize, Checkpoint)> = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let e = &entries[i];
        while open.last().is_some_and(|(d, _)| *d >= e.depth) {
            let (_, cp) = open.pop().unwrap();
            model.store.restore(cp);
        }
        stats.nodes += 1;
        let cp = model.store.checkpoint();
        match enter(model, e.decision.as_ref(), cuts[i]) {
            NodeStatus::Branch => {
                open.push((e.depth, cp));
                i += 1;
                continue;
            }
            NodeStatus::Fail => stats.failures += 1,
            NodeStatus::Solution(cost) => {
                stats.solutions += 1;
                stats.best_cost = Some(stats.best_cost.map_or(cost, |b| b.min(cost)));
            }
        }
        model.store.restore(cp);
        i += 1;
        while i < entries.len() && entries[i].depth > e.depth {
            i += 1;
        }
    }
    while let Some((_, cp)) = open.pop() {
        model.store.restore(cp);
    }
    stats.complete = log.complete;
    stats.elapsed = start.elapsed();
    Ok(stats)
}

impl fmt::Display for DecisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionKind::Assign => "assign",
            DecisionKind::ExcludeBelow => "exclude-below",
        })
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeStatus::Fail => f.write_str("fail"),
            NodeStatus::Branch => f.write_str("branch"),
            NodeStatus::Solution(c) => write!(f, "sol={c}"),
        }
    }
}

fn opt_to_string<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

/// Line format:
///
/// ```text
/// nomdd-replay 1
/// digest <sha256>
/// heuristic cos
/// time_limit_ms <ms|none>
/// node_limit <n|none>
/// complete <true|false>
/// nodes <count>
/// <depth> <var|-> <kind|-> <value|-> <status>
/// ```
impl fmt::Display for ReplayLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nomdd-replay {LOG_VERSION}")?;
        writeln!(f, "digest {}", self.digest)?;
        writeln!(f, "heuristic {}", self.heuristic)?;
        writeln!(f, "time_limit_ms {}", opt_to_string(self.limits.time.map(|t| t.as_millis())))?;
        writeln!(f, "node_limit {}", opt_to_string(self.limits.nodes))?;
        writeln!(f, "complete {}", self.complete)?;
        writeln!(f, "nodes {}", self.entries.len())?;
        for e in &self.entries {
            match e.decision {
                None => writeln!(f, "{} - - - {}", e.depth, e.status)?,
                Some(d) => writeln!(f, "{} {} {} {} {}", e.depth, d.var, d.kind, d.value, e.status)?,
            }
        }
        Ok(())
    }
}

impl FromStr for ReplayLog {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        let bad = |line: usize, msg: &str| Error::Log {
            line,
            msg: msg.to_string(),
        };
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (k, l) = lines.next().ok_or_else(|| bad(0, &format!("missing `{key}` line")))?;
            match l.split_once(' ') {
                Some((name, value)) if name == key => Ok((k, value.trim().to_string())),
                _ => Err(bad(k, &format!("expected `{key} <value>`"))),
            }
        };
        let (k, version) = header("nomdd-replay")?;
        if version != LOG_VERSION.to_string() {
            return Err(bad(k, &format!("unsupported version {version}")));
        }
        let (_, digest) = header("digest")?;
        let (_, heuristic) = header("heuristic")?;
        let parse_opt = |(k, v): (usize, String)| -> Result<Option<u64>> {
            if v == "none" {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| bad(k, "expected a number or `none`"))
            }
        };
        let time = parse_opt(header("time_limit_ms")?)?.map(Duration::from_millis);
        let nodes = parse_opt(header("node_limit")?)?;
        let (k, complete) = header("complete")?;
        let complete = complete.parse().map_err(|_| bad(k, "expected `true` or `false`"))?;
        let (k, count) = header("nodes")?;
        let count: usize = count.parse().map_err(|_| bad(k, "expected a node count"))?;

        let mut entries = Vec::with_capacity(count);
        for (k, l) in lines {
            if l.is_empty() {
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad(k, "expected `depth var kind value status`"));
            }
            let depth = f[0].parse().map_err(|_| bad(k, "bad depth"))?;
            let decision = if f[1] == "-" {
                None
            } else {
                let kind = match f[2] {
                    "assign" => DecisionKind::Assign,
                    "exclude-below" => DecisionKind::ExcludeBelow,
                    _ => return Err(bad(k, "bad decision kind")),
                };
                Some(Decision {
                    var: f[1].parse().map_err(|_| bad(k, "bad variable"))?,
                    kind,
                    value: f[3].parse().map_err(|_| bad(k, "bad value"))?,
                })
            };
            let status = match f[4] {
                "fail" => NodeStatus::Fail,
                "branch" => NodeStatus::Branch,
                s => match s.strip_prefix("sol=").map(str::parse) {
                    Some(Ok(c)) => NodeStatus::Solution(c),
                    _ => return Err(bad(k, "bad status")),
                },
            };
            entries.push(LogEntry {
                depth,
                decision,
                status,
            });
        }
        if entries.len() != count {
            return Err(bad(0, &format!("header announces {count} nodes, found {}", entries.len())));
        }
        Ok(ReplayLog {
            digest,
            heuristic,
            limits: SearchLimits { nodes, time },
            complete,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Instance, Job};
    use crate::model::ModelVariant;
    use crate::oracle::oracle_report;

    fn four_jobs() -> Instance {
        Instance::new(vec![
            Job::window(4, 2, 6),
            Job::window(0, 3, 10),
            Job::window(0, 2, 9),
            Job::window(7, 6, 19),
        ])
        .unwrap()
    }

    #[test]
    fn gap_formula() {
        assert!((gap(110, 100).unwrap() - 0.10).abs() < 1e-12);
        assert_eq!(gap(7, 7).unwrap(), 0.0);
        assert!(matches!(gap(3, 0), Err(Error::ZeroReference)));
    }

    #[test]
    fn fallback_picks_smallest_lower_bound() {
        let mut model = Model::new(&four_jobs(), ModelVariant::Baseline);
        assert_eq!(model.propagate(), Outcome::Feasible);
        let (left, right) = cos_next_decision(&model, &[0; 4]).unwrap();
        assert_eq!((left.var, left.kind, left.value), (1, DecisionKind::Assign, 0));
        assert_eq!((right.kind, right.value), (DecisionKind::ExcludeBelow, 1));
        // a stamp takes precedence
        let (left, _) = cos_next_decision(&model, &[0, 0, 0, 5]).unwrap();
        assert_eq!(left.var, 3);
    }

    #[test]
    fn single_job_search() {
        let inst = Instance::new(vec![Job::new(0, 3, 10, 5)]).unwrap();
        let mut model = Model::new(&inst, ModelVariant::Baseline);
        let r = solve(&mut model, SearchLimits::default());
        assert_eq!(r.stats.best_cost, Some(0));
        assert_eq!(r.best.unwrap().start, vec![2]);
        assert!(r.stats.complete);
    }

    #[test]
    fn optimum_matches_oracle_and_store_is_restored() {
        for seed in 0..15 {
            let inst = generate_instance(6, seed);
            let expected = oracle_report(&inst, None).unwrap().optimum;
            let mut model = Model::new(&inst, ModelVariant::Baseline);
            let before = model.store.bounds();
            let r = solve(&mut model, SearchLimits::default());
            assert_eq!(r.stats.best_cost, expected, "seed {seed}");
            assert_eq!(model.store.bounds(), before);
            assert_eq!(model.store.depth(), 0);
            let best = r.best.unwrap();
            inst.check_schedule(&best).unwrap();
            assert_eq!(inst.evaluate_objective(&best).unwrap(), expected.unwrap());
        }
    }

    #[test]
    fn log_roundtrip_and_self_replay() {
        let inst = generate_instance(9, 3);
        let mut model = Model::new(&inst, ModelVariant::Baseline);
        let r = solve(&mut model, SearchLimits::nodes(300));
        assert_eq!(r.log.entries.len() as u64, r.stats.nodes);
        let text = r.log.to_string();
        let parsed: ReplayLog = text.parse().unwrap();
        assert_eq!(parsed, r.log);

        let mut again = Model::new(&inst, ModelVariant::Baseline);
        let z = replay(&parsed, &mut again).unwrap();
        assert_eq!((z.nodes, z.failures, z.best_cost), (r.stats.nodes, r.stats.failures, r.stats.best_cost));
        assert_eq!(again.store.depth(), 0);
    }

    #[test]
    fn replay_rejects_other_instances() {
        let mut model = Model::new(&generate_instance(5, 1), ModelVariant::Baseline);
        let r = solve(&mut model, SearchLimits::nodes(20));
        let mut other = Model::new(&generate_instance(5, 2), ModelVariant::Baseline);
        assert!(matches!(replay(&r.log, &mut other), Err(Error::DigestMismatch { .. })));
    }

    #[test]
    fn malformed_logs() {
        assert!("".parse::<ReplayLog>().is_err());
        let ok = "nomdd-replay 1\ndigest x\nheuristic cos\ntime_limit_ms none\nnode_limit 5\ncomplete false\nnodes 1\n0 - - - branch\n";
        assert_eq!(ok.parse::<ReplayLog>().unwrap().limits.nodes, Some(5));
        let bad = ok.replace("branch", "maybe");
        assert!(matches!(bad.parse::<ReplayLog>(), Err(Error::Log { line: 8, .. })));
        let short = ok.replace("nodes 1", "nodes 2");
        assert!(short.parse::<ReplayLog>().is_err());
        let version = ok.replace("nomdd-replay 1", "nomdd-replay 9");
        assert!(version.parse::<ReplayLog>().is_err());
    }

    #[test]
    fn node_limit_is_deterministic() {
        let inst = generate_instance(10, 4);
        let run = || {
            let mut model = Model::new(&inst, ModelVariant::RelaxedBc { width: 4 });
            let r = solve(&mut model, SearchLimits::nodes(150));
            (r.stats.nodes, r.stats.failures, r.stats.best_cost, r.log.to_string())
        };
        assert_eq!(run(), run());
    }
}
