//! Exact No-Overlap decision diagram.
//!
//! Nodes on layer `k` are the distinct states `(placed, est)` reachable by
//! sequencing `k` jobs, each job started at the earliest time allowed by its
//! window and the previous job. After the top-down pass every node without
//! a path to the sink is removed, so root-to-sink paths are exactly the job
//! permutations whose greedy-earliest schedule meets every deadline.

use crate::engine::{DomainStore, Infeasible, PropResult, Propagator, Time, VarId};
use crate::instance::{Instance, Windows};
use crate::jobset::JobSet;

use super::{apply_windows, Edge, PrecedenceSet};

#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct ExactState {
    pub placed: JobSet,
    pub est: Time,
}

impl ExactState {
    pub const ROOT: ExactState = ExactState {
        placed: JobSet::EMPTY,
        est: 0,
    };

    pub fn sink(n: usize, horizon: Time) -> Self {
        ExactState {
            placed: JobSet::full(n),
            est: horizon,
        }
    }
}

/// Jobs that may be sequenced next from `state`: not yet placed, and able to
/// finish by their latest completion when started no earlier than `est`.
pub fn lambda(state: &ExactState, w: &Windows) -> JobSet {
    (0..w.len())
        .filter(|&i| !state.placed.contains(i))
        .filter(|&i| state.est.max(w.est[i]) + w.processing[i] <= w.lct[i])
        .collect()
}

/// Transition on `label`; placing the last job leads to the sink.
pub fn tau(state: &ExactState, label: usize, w: &Windows) -> ExactState {
    let placed = state.placed.with(label);
    if placed == JobSet::full(w.len()) {
        ExactState::sink(w.len(), w.horizon)
    } else {
        ExactState {
            placed,
            est: state.est.max(w.est[label]) + w.processing[label],
        }
    }
}

/// False when some unplaced job can no longer meet its deadline, so the
/// state has no path to the sink.
fn can_complete(state: &ExactState, w: &Windows) -> bool {
    (0..w.len())
        .filter(|&i| !state.placed.contains(i))
        .all(|i| state.est.max(w.est[i]) + w.processing[i] <= w.lct[i])
}

/// A compiled and pruned exact diagram.
#[derive(Debug, Clone)]
pub struct ExactMdd {
    n: usize,
    states: Vec<ExactState>,
    layers: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    compiled_width: usize,
}

impl ExactMdd {
    /// Compiles the diagram for the current windows. Fails when no
    /// permutation is feasible.
    pub fn compile(w: &Windows) -> Result<Self, Infeasible> {
        Self::build(w, true)
    }

    /// Same diagram, but the top-down pass keeps states that can no longer
    /// complete until the final pruning. Its [`compiled_width`] is the
    /// width at which a relaxed diagram of the same windows merges nothing.
    ///
    /// [`compiled_width`]: ExactMdd::compiled_width
    pub fn compile_unpruned(w: &Windows) -> Result<Self, Infeasible> {
        Self::build(w, false)
    }

    fn build(w: &Windows, prune_early: bool) -> Result<Self, Infeasible> {
        let n = w.len();
        let mut states = vec![ExactState::ROOT];
        let mut layers = vec![vec![0usize]];
        let mut edges: Vec<Edge> = Vec::new();
        let mut compiled_width = 1;

        for k in 0..n {
            let mut children: Vec<(ExactState, usize, usize)> = Vec::new();
            for &u in &layers[k] {
                let su = states[u];
                for label in lambda(&su, w).iter() {
                    let child = tau(&su, label, w);
                    if !prune_early || can_complete(&child, w) {
                        children.push((child, u, label));
                    }
                }
            }
            children.sort_unstable_by_key(|&(c, u, label)| (c.placed, c.est, u, label));
            let mut next = Vec::new();
            let mut last: Option<ExactState> = None;
            for (child, u, label) in children {
                if last != Some(child) {
                    states.push(child);
                    next.push(states.len() - 1);
                    last = Some(child);
                }
                edges.push(Edge { from: u, to: states.len() - 1, label });
            }
            compiled_width = compiled_width.max(next.len());
            if next.is_empty() {
                return Err(Infeasible);
            }
            layers.push(next);
        }

        // bottom-up: keep nodes with a path to the sink
        let sink = layers[n][0];
        let mut alive = vec![false; states.len()];
        alive[sink] = true;
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
        for (e, edge) in edges.iter().enumerate() {
            out[edge.from].push(e);
        }
        for k in (0..n).rev() {
            for &u in &layers[k] {
                alive[u] = out[u].iter().any(|&e| alive[edges[e].to]);
            }
        }
        if !alive[0] {
            return Err(Infeasible);
        }

        let mut remap = vec![usize::MAX; states.len()];
        let mut kept_states = Vec::new();
        let mut kept_layers = Vec::with_capacity(n + 1);
        for layer in &layers {
            let mut kl = Vec::new();
            for &u in layer {
                if alive[u] {
                    remap[u] = kept_states.len();
                    kl.push(kept_states.len());
                    kept_states.push(states[u]);
                }
            }
            kept_layers.push(kl);
        }
        let kept_edges = edges
            .iter()
            .filter(|e| alive[e.from] && alive[e.to])
            .map(|e| Edge {
                from: remap[e.from],
                to: remap[e.to],
                label: e.label,
            })
            .collect();

        Ok(ExactMdd {
            n,
            states: kept_states,
            layers: kept_layers,
            edges: kept_edges,
            compiled_width,
        })
    }

    pub fn num_jobs(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn state(&self, node: usize) -> &ExactState {
        &self.states[node]
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn num_nodes(&self) -> usize {
        self.states.len()
    }

    /// Largest layer after pruning.
    pub fn width(&self) -> usize {
        self.layers.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest layer produced by the top-down pass, before the final
    /// pruning.
    pub fn compiled_width(&self) -> usize {
        self.compiled_width
    }

    /// Number of root-to-sink paths.
    pub fn count_paths(&self) -> u128 {
        count_paths(self.states.len(), 0, &self.layers, &self.edges)
    }

    /// Label sequences of all root-to-sink paths. Exponential; test aid.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        enumerate_paths(self.states.len(), 0, &self.edges)
    }

    /// Earliest-start filtering: for every job, the minimum `est` over the
    /// origins of edges carrying it, in a single pass over the edges.
    pub fn bc_filter(&self, w: &Windows) -> Result<FilterPass, Infeasible> {
        let mut best = vec![Time::MAX; self.n];
        let mut visits = 0usize;
        for e in &self.edges {
            visits += 1;
            let est = self.states[e.from].est;
            if est < best[e.label] {
                best[e.label] = est;
            }
        }
        if best.contains(&Time::MAX) {
            return Err(Infeasible);
        }
        let bounds = best.iter().zip(&w.est).map(|(&b, &cur)| b.max(cur)).collect();
        Ok(FilterPass {
            bounds,
            edge_visits: visits,
        })
    }
}

impl ExactMdd {
    /// `i ≺ j` holds when no node has `j` already placed and `i` still to
    /// come. Below a node every path sequences exactly the unplaced jobs.
    pub fn extract_precedences(&self) -> PrecedenceSet {
        let mut prec = PrecedenceSet::all_pairs(self.n);
        let full = JobSet::full(self.n);
        for s in &self.states {
            let rest = full.difference(s.placed);
            for j in s.placed.iter() {
                for i in rest.iter() {
                    prec.remove(i, j);
                }
            }
        }
        prec
    }
}

/// Output of one filtering pass, with the number of edges inspected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterPass {
    pub bounds: Vec<Time>,
    pub edge_visits: usize,
}

pub(crate) fn count_paths(num_nodes: usize, root: usize, layers: &[Vec<usize>], edges: &[Edge]) -> u128 {
    if edges.is_empty() {
        return if layers.len() == 1 && num_nodes > 0 { 1 } else { 0 };
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for (k, e) in edges.iter().enumerate() {
        out[e.from].push(k);
    }
    let mut count = vec![0u128; num_nodes];
    count[root] = 1;
    let mut last = 0;
    for layer in layers {
        for &u in layer {
            last = u;
            let c = count[u];
            for &k in &out[u] {
                let v = edges[k].to;
                count[v] = count[v].saturating_add(c);
            }
        }
    }
    count[last]
}

pub(crate) fn enumerate_paths(num_nodes: usize, root: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for (k, e) in edges.iter().enumerate() {
        out[e.from].push(k);
    }
    let mut paths = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(root, Vec::new())];
    while let Some((u, prefix)) = stack.pop() {
        if out[u].is_empty() {
            if !prefix.is_empty() {
                paths.push(prefix);
            }
            continue;
        }
        for &k in &out[u] {
            let mut p = prefix.clone();
            p.push(edges[k].label);
            stack.push((edges[k].to, p));
        }
    }
    paths.sort();
    paths
}

/// Bound-consistent windows: earliest starts from the forward diagram, then
/// latest completions from the diagram of the mirrored windows.
pub fn exact_bc(w: &Windows) -> Result<Windows, Infeasible> {
    exact_bc_with_width(w).map(|(tightened, _)| tightened)
}

/// [`exact_bc`], also returning the compiled width of the forward diagram.
pub fn exact_bc_with_width(w: &Windows) -> Result<(Windows, usize), Infeasible> {
    let forward = ExactMdd::compile(w)?;
    let est = forward.bc_filter(w)?.bounds;
    let mut tightened = Windows { est, ..w.clone() };
    let mirrored = tightened.mirrored();
    let backward = ExactMdd::compile(&mirrored)?;
    let mirrored_est = backward.bc_filter(&mirrored)?.bounds;
    tightened.lct = mirrored_est
        .iter()
        .zip(&w.lct)
        .map(|(&s, &lct)| lct.min(w.horizon - s))
        .collect();
    Ok((tightened, forward.compiled_width()))
}

/// Bound-consistent No-Overlap propagator backed by exact diagrams rebuilt
/// on every call.
pub struct ExactBcPropagator {
    instance: Instance,
    starts: Vec<VarId>,
    max_width: usize,
    /// Windows left by the last successful call; the filtering is a function
    /// of the windows alone and idempotent, so an unchanged input is a no-op.
    last_seen: Option<Windows>,
}

impl ExactBcPropagator {
    pub fn new(instance: Instance, starts: Vec<VarId>) -> Self {
        Self {
            instance,
            starts,
            max_width: 0,
            last_seen: None,
        }
    }

    /// Largest compiled layer seen so far.
    pub fn max_width(&self) -> usize {
        self.max_width
    }
}

impl Propagator for ExactBcPropagator {
    fn name(&self) -> &str {
        "exact-bc"
    }

    fn priority(&self) -> u8 {
        3
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult {
        let w = Windows::from_store(&self.instance, store, &self.starts);
        if self.last_seen.as_ref() == Some(&w) {
            return Ok(());
        }
        let (tightened, width) = exact_bc_with_width(&w)?;
        self.max_width = self.max_width.max(width);
        apply_windows(store, &self.starts, &tightened)?;
        self.last_seen = Some(Windows::from_store(&self.instance, store, &self.starts));
        Ok(())
    }
}
