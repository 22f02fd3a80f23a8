//! Width-bounded No-Overlap decision diagram.
//!
//! Each node carries a downward state (jobs on every / some root path, a
//! lower bound on the next start, the layer index) and an upward state (jobs
//! on every / some sink path, an upper bound on the completion of the job
//! entering the node). Layers are capped to `W` nodes by merging states
//! bucketed on `est`; refinement splits merged nodes back apart.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::engine::{DomainStore, Infeasible, PropResult, Propagator, Time, VarId};
use crate::instance::{Instance, Windows};
use crate::jobset::JobSet;

use super::exact::FilterPass;
use super::{apply_windows, Edge, PrecedenceSet};

/// Top-down state of a relaxed node.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct DownState {
    /// Jobs on every path from the root.
    pub all: JobSet,
    /// Jobs on at least one path from the root.
    pub some: JobSet,
    /// Lower bound on the start of the next job.
    pub est: Time,
    /// Number of sequenced jobs (the layer).
    pub layer: usize,
}

impl DownState {
    pub const ROOT: DownState = DownState {
        all: JobSet::EMPTY,
        some: JobSet::EMPTY,
        est: 0,
        layer: 0,
    };

    pub fn sink(n: usize, horizon: Time) -> Self {
        DownState {
            all: JobSet::full(n),
            some: JobSet::full(n),
            est: horizon,
            layer: n,
        }
    }

    /// True when every root path holds exactly the jobs of `some`.
    pub fn is_exact_set(&self) -> bool {
        self.some.len() == self.layer
    }
}

/// Bottom-up state of a relaxed node.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct UpState {
    /// Jobs on every path to the sink.
    pub all: JobSet,
    /// Jobs on at least one path to the sink.
    pub some: JobSet,
    /// Upper bound on when the suffix can start.
    pub lst: Time,
}

impl UpState {
    pub fn sink(horizon: Time) -> Self {
        UpState {
            all: JobSet::EMPTY,
            some: JobSet::EMPTY,
            lst: horizon,
        }
    }

    /// Carries no information; used before the first bottom-up pass.
    fn unknown(n: usize, horizon: Time) -> Self {
        UpState {
            all: JobSet::EMPTY,
            some: JobSet::full(n),
            lst: horizon,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct RelaxedState {
    pub down: DownState,
    pub up: UpState,
}

/// Admissible labels out of a downward state. Equals the exact label set,
/// minus `some` when the node is known to hold exactly those jobs.
pub fn lambda_relaxed(state: &DownState, w: &Windows) -> JobSet {
    let mut forbidden = state.all;
    if state.is_exact_set() {
        forbidden = forbidden.union(state.some);
    }
    (0..w.len())
        .filter(|&i| !forbidden.contains(i))
        .filter(|&i| state.est.max(w.est[i]) + w.processing[i] <= w.lct[i])
        .collect()
}

/// Downward transition. The last layer collapses onto the sink.
pub fn tau_relaxed(state: &DownState, label: usize, w: &Windows) -> DownState {
    let n = w.len();
    if state.layer + 1 >= n {
        DownState::sink(n, w.horizon)
    } else {
        DownState {
            all: state.all.with(label),
            some: state.some.with(label),
            est: state.est.max(w.est[label]) + w.processing[label],
            layer: state.layer + 1,
        }
    }
}

/// Upward transition across an edge labeled `label` entering a node with
/// upward state `state`.
pub fn tau_up(state: &UpState, label: usize, w: &Windows) -> UpState {
    UpState {
        all: state.all.with(label),
        some: state.some.with(label),
        lst: w.lct[label].min(state.lst) - w.processing[label],
    }
}

/// Merge of two same-layer downward states.
pub fn merge_down(a: &DownState, b: &DownState) -> DownState {
    assert_eq!(a.layer, b.layer, "merging states from different layers");
    DownState {
        all: a.all.intersection(b.all),
        some: a.some.union(b.some),
        est: a.est.min(b.est),
        layer: a.layer,
    }
}

/// Dual merge of upward states: latest start is relaxed with `max`.
pub fn merge_up(a: &UpState, b: &UpState) -> UpState {
    UpState {
        all: a.all.intersection(b.all),
        some: a.some.union(b.some),
        lst: a.lst.max(b.lst),
    }
}

/// Groups a layer into at most `width` buckets and merges each bucket.
///
/// Returns the merged states and, for every input state, the index of its
/// bucket. Layers that fit are returned as is. When the distinct `est`
/// values fit, nodes sharing an `est` are merged; otherwise `[min, max]` is
/// cut into `width` equal half-open intervals, the last one closed.
pub fn bucket_layer(states: &[DownState], width: usize) -> (Vec<DownState>, Vec<usize>) {
    assert!(width >= 1);
    if states.len() <= width {
        return (states.to_vec(), (0..states.len()).collect());
    }
    let mut distinct: Vec<Time> = states.iter().map(|s| s.est).collect();
    distinct.sort_unstable();
    distinct.dedup();

    let bucket_of: Box<dyn Fn(Time) -> usize> = if distinct.len() <= width {
        let d = distinct.clone();
        Box::new(move |est| d.binary_search(&est).unwrap())
    } else {
        let lo = distinct[0] as i128;
        let span = (*distinct.last().unwrap() as i128 - lo).max(1);
        let w = width as i128;
        Box::new(move |est| (((est as i128 - lo) * w / span) as usize).min(width - 1))
    };

    // bucket index -> compacted output index, in increasing est order
    let mut slot: Vec<Option<usize>> = vec![None; width.max(distinct.len())];
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by_key(|&k| states[k].est);
    let mut merged: Vec<DownState> = Vec::new();
    let mut assignment = vec![0; states.len()];
    for k in order {
        let b = bucket_of(states[k].est);
        match slot[b] {
            Some(o) => {
                merged[o] = merge_down(&merged[o], &states[k]);
                assignment[k] = o;
            }
            None => {
                slot[b] = Some(merged.len());
                assignment[k] = merged.len();
                merged.push(states[k]);
            }
        }
    }
    (merged, assignment)
}

#[derive(Debug, Clone)]
struct Node {
    layer: usize,
    down: DownState,
    up: UpState,
    alive: bool,
    ins: Vec<usize>,
    outs: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Arc {
    from: usize,
    to: usize,
    label: usize,
    alive: bool,
}

/// Counters describing the work done on a diagram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelaxedStats {
    pub splits: usize,
    pub edges_deleted: usize,
    pub nodes_deleted: usize,
    /// Set-membership tests performed by the last precedence extraction.
    pub membership_tests: usize,
}

/// A width-bounded diagram compiled for given windows.
#[derive(Debug, Clone)]
pub struct RelaxedMdd {
    n: usize,
    width: usize,
    horizon: Time,
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    layers: Vec<Vec<usize>>,
    root: usize,
    sink: usize,
    live_arcs: usize,
    stats: RelaxedStats,
}

impl RelaxedMdd {
    /// Top-down compilation with per-layer bucketing, followed by removal of
    /// dead ends and the bottom-up state pass.
    pub fn compile(w: &Windows, width: usize) -> Result<Self, Infeasible> {
        assert!(width >= 1, "width must be at least 1");
        let n = w.len();
        let mut mdd = RelaxedMdd {
            n,
            width,
            horizon: w.horizon,
            nodes: Vec::new(),
            arcs: Vec::new(),
            layers: vec![Vec::new(); n + 1],
            root: 0,
            sink: 0,
            live_arcs: 0,
            stats: RelaxedStats::default(),
        };
        mdd.root = mdd.add_node(0, DownState::ROOT);
        mdd.sink = usize::MAX;

        for k in 0..n {
            let mut pending: Vec<(usize, usize, DownState)> = Vec::new();
            for &u in &mdd.layers[k] {
                let du = mdd.nodes[u].down;
                for label in lambda_relaxed(&du, w).iter() {
                    pending.push((u, label, tau_relaxed(&du, label, w)));
                }
            }
            if pending.is_empty() {
                return Err(Infeasible);
            }
            if k + 1 == n {
                let sink = mdd.add_node(n, DownState::sink(n, w.horizon));
                mdd.sink = sink;
                for (u, label, _) in pending {
                    mdd.add_arc(u, sink, label);
                }
                break;
            }
            let mut index: HashMap<DownState, usize> = HashMap::new();
            let mut distinct: Vec<DownState> = Vec::new();
            let targets: Vec<usize> = pending
                .iter()
                .map(|(_, _, s)| {
                    *index.entry(*s).or_insert_with(|| {
                        distinct.push(*s);
                        distinct.len() - 1
                    })
                })
                .collect();
            let (merged, assignment) = bucket_layer(&distinct, width);
            let ids: Vec<usize> = merged.into_iter().map(|s| mdd.add_node(k + 1, s)).collect();
            for ((u, label, _), t) in pending.into_iter().zip(targets) {
                mdd.add_arc(u, ids[assignment[t]], label);
            }
        }
        let unknown = UpState::unknown(n, w.horizon);
        for node in &mut mdd.nodes {
            node.up = unknown;
        }
        mdd.nodes[mdd.sink].up = UpState::sink(w.horizon);
        mdd.stabilize(w)?;
        Ok(mdd)
    }

    fn add_node(&mut self, layer: usize, down: DownState) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            layer,
            down,
            up: UpState::unknown(self.n, self.horizon),
            alive: true,
            ins: Vec::new(),
            outs: Vec::new(),
        });
        self.layers[layer].push(id);
        id
    }

    fn add_arc(&mut self, from: usize, to: usize, label: usize) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            from,
            to,
            label,
            alive: true,
        });
        self.nodes[from].outs.push(id);
        self.nodes[to].ins.push(id);
        self.live_arcs += 1;
        id
    }

    fn kill_arc(&mut self, a: usize) {
        if self.arcs[a].alive {
            self.arcs[a].alive = false;
            self.live_arcs -= 1;
            self.stats.edges_deleted += 1;
        }
    }

    fn kill_node(&mut self, u: usize) {
        self.nodes[u].alive = false;
        self.stats.nodes_deleted += 1;
        let arcs: Vec<usize> = self.nodes[u].ins.iter().chain(&self.nodes[u].outs).copied().collect();
        for a in arcs {
            self.kill_arc(a);
        }
    }

    fn live_ins(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[u].ins.iter().copied().filter(|&a| self.arcs[a].alive)
    }

    fn live_outs(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[u].outs.iter().copied().filter(|&a| self.arcs[a].alive)
    }

    /// Whether an arc survives the checks against the states at both ends:
    /// the label must not be forced on the prefix or the suffix, and the job
    /// must fit between the prefix's earliest start and the suffix's latest
    /// start.
    pub fn edge_check(&self, from: &DownState, label: usize, to: &UpState, to_layer: usize, w: &Windows) -> bool {
        if from.all.contains(label) || to.all.contains(label) {
            return false;
        }
        if from.is_exact_set() && from.some.contains(label) {
            return false;
        }
        if to.some.len() == self.n - to_layer && to.some.contains(label) {
            return false;
        }
        from.est.max(w.est[label]) + w.processing[label] <= w.lct[label].min(to.lst)
    }

    fn arc_ok(&self, a: usize, w: &Windows) -> bool {
        let arc = &self.arcs[a];
        let to = &self.nodes[arc.to];
        self.edge_check(&self.nodes[arc.from].down, arc.label, &to.up, to.layer, w)
    }

    /// Top-down pass: drops failing arcs, recomputes every downward state
    /// as the merge of its incoming transitions and removes orphans.
    pub fn update_down(&mut self, w: &Windows) -> Result<bool, Infeasible> {
        let mut changed = false;
        for k in 1..=self.n {
            for idx in 0..self.layers[k].len() {
                let v = self.layers[k][idx];
                if !self.nodes[v].alive {
                    continue;
                }
                let mut merged: Option<DownState> = None;
                let ins: Vec<usize> = self.live_ins(v).collect();
                for a in ins {
                    if !self.arc_ok(a, w) {
                        self.kill_arc(a);
                        changed = true;
                        continue;
                    }
                    let arc = &self.arcs[a];
                    let t = tau_relaxed(&self.nodes[arc.from].down, arc.label, w);
                    merged = Some(match merged {
                        None => t,
                        Some(m) => merge_down(&m, &t),
                    });
                }
                match merged {
                    None => {
                        if v == self.sink {
                            return Err(Infeasible);
                        }
                        self.kill_node(v);
                        changed = true;
                    }
                    Some(s) if s != self.nodes[v].down => {
                        self.nodes[v].down = s;
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        self.prune_layers();
        Ok(changed)
    }

    /// Bottom-up pass: drops failing arcs, recomputes upward states and
    /// removes dead ends.
    pub fn update_up(&mut self, w: &Windows) -> Result<bool, Infeasible> {
        let mut changed = false;
        for k in (0..self.n).rev() {
            for idx in 0..self.layers[k].len() {
                let u = self.layers[k][idx];
                if !self.nodes[u].alive {
                    continue;
                }
                let mut merged: Option<UpState> = None;
                let outs: Vec<usize> = self.live_outs(u).collect();
                for a in outs {
                    if !self.arc_ok(a, w) {
                        self.kill_arc(a);
                        changed = true;
                        continue;
                    }
                    let arc = &self.arcs[a];
                    let t = tau_up(&self.nodes[arc.to].up, arc.label, w);
                    merged = Some(match merged {
                        None => t,
                        Some(m) => merge_up(&m, &t),
                    });
                }
                match merged {
                    None => {
                        if u == self.root {
                            return Err(Infeasible);
                        }
                        self.kill_node(u);
                        changed = true;
                    }
                    Some(s) if s != self.nodes[u].up => {
                        self.nodes[u].up = s;
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        self.prune_layers();
        Ok(changed)
    }

    /// Alternates both passes until neither changes anything.
    pub fn stabilize(&mut self, w: &Windows) -> Result<bool, Infeasible> {
        let mut any = false;
        loop {
            let down = self.update_down(w)?;
            let up = self.update_up(w)?;
            if !down && !up {
                return Ok(any);
            }
            any = true;
        }
    }

    fn prune_layers(&mut self) {
        let nodes = &self.nodes;
        for layer in &mut self.layers {
            layer.retain(|&u| nodes[u].alive);
        }
    }

    /// True when the node merges transitions that disagree with its state.
    fn is_relaxed_node(&self, u: usize, w: &Windows) -> bool {
        let down = self.nodes[u].down;
        let mut count = 0;
        let mut differs = false;
        for a in self.live_ins(u) {
            count += 1;
            let arc = &self.arcs[a];
            if tau_relaxed(&self.nodes[arc.from].down, arc.label, w) != down {
                differs = true;
            }
        }
        count >= 2 && differs
    }

    /// Picks the node to split and the incoming arc to extract: the relaxed
    /// node with the largest `|some \ all|` on the shallowest layer that
    /// still has room, and among its arcs the one whose own transition
    /// lands furthest above the merged `est`.
    fn refinement_candidate(&self, w: &Windows) -> Option<(usize, usize)> {
        for k in 1..self.n {
            if self.layers[k].len() >= self.width {
                continue;
            }
            let best = self.layers[k]
                .iter()
                .copied()
                .filter(|&u| self.is_relaxed_node(u, w))
                .max_by_key(|&u| {
                    let d = self.nodes[u].down;
                    (d.some.difference(d.all).len(), std::cmp::Reverse(u))
                });
            if let Some(u) = best {
                let down = self.nodes[u].down;
                let arc = self
                    .live_ins(u)
                    .filter_map(|a| {
                        let arc = &self.arcs[a];
                        let t = tau_relaxed(&self.nodes[arc.from].down, arc.label, w);
                        (t != down).then_some((t.est - down.est, t.some.difference(t.all).len(), a))
                    })
                    .max_by_key(|&(gap, loose, a)| (gap, std::cmp::Reverse(loose), std::cmp::Reverse(a)))
                    .map(|(_, _, a)| a)?;
                return Some((u, arc));
            }
        }
        None
    }

    /// Splits relaxed nodes until `budget` splits were made, every layer is
    /// full, or no relaxed node is left. Each split moves one incoming arc
    /// to a fresh node holding that arc's exact transition, copies the
    /// outgoing arcs that pass the edge check, and restabilizes.
    pub fn refine(&mut self, w: &Windows, budget: usize) -> Result<bool, Infeasible> {
        let mut splits = 0;
        while splits < budget {
            let Some((u, a)) = self.refinement_candidate(w) else {
                break;
            };
            let layer = self.nodes[u].layer;
            let from = self.arcs[a].from;
            let label = self.arcs[a].label;
            let state = tau_relaxed(&self.nodes[from].down, label, w);
            let fresh = self.add_node(layer, state);

            self.nodes[u].ins.retain(|&x| x != a);
            self.arcs[a].to = fresh;
            self.nodes[fresh].ins.push(a);

            let outs: Vec<usize> = self.live_outs(u).collect();
            let mut up: Option<UpState> = None;
            for o in outs {
                let (to, lbl) = (self.arcs[o].to, self.arcs[o].label);
                let target = &self.nodes[to];
                if self.edge_check(&state, lbl, &target.up, target.layer, w) {
                    let t = tau_up(&target.up, lbl, w);
                    self.add_arc(fresh, to, lbl);
                    up = Some(match up {
                        None => t,
                        Some(m) => merge_up(&m, &t),
                    });
                }
            }
            match up {
                Some(s) => self.nodes[fresh].up = s,
                None => self.kill_node(fresh),
            }
            splits += 1;
            self.stats.splits += 1;
            self.stabilize(w)?;
        }
        self.compact_if_sparse();
        Ok(splits > 0)
    }

    /// Earliest starts: minimum origin `est` over the arcs of each job.
    /// Latest completions: maximum of `min(lct, lst(destination))` over the
    /// arcs of each job. Both are sound, and exact when the diagram is.
    pub fn bc_filter(&self, w: &Windows) -> Result<(FilterPass, Vec<Time>), Infeasible> {
        let mut est = vec![Time::MAX; self.n];
        let mut lct = vec![Time::MIN; self.n];
        let mut visits = 0;
        for arc in self.arcs.iter().filter(|a| a.alive) {
            visits += 1;
            let i = arc.label;
            est[i] = est[i].min(self.nodes[arc.from].down.est);
            lct[i] = lct[i].max(w.lct[i].min(self.nodes[arc.to].up.lst));
        }
        if est.contains(&Time::MAX) {
            return Err(Infeasible);
        }
        let bounds = est.iter().zip(&w.est).map(|(&e, &cur)| e.max(cur)).collect();
        let ends = lct.iter().zip(&w.lct).map(|(&l, &cur)| l.min(cur)).collect();
        Ok((
            FilterPass {
                bounds,
                edge_visits: visits,
            },
            ends,
        ))
    }

    /// `i ≺ j` holds when no node has `j` on some root path and `i` on some
    /// sink path.
    pub fn extract_precedences(&mut self) -> PrecedenceSet {
        let mut prec = PrecedenceSet::all_pairs(self.n);
        let mut tests = 0;
        for node in self.nodes.iter().filter(|u| u.alive) {
            for j in node.down.some.iter() {
                for i in node.up.some.iter() {
                    tests += 1;
                    if i != j {
                        prec.remove(i, j);
                    }
                }
            }
        }
        self.stats.membership_tests = tests;
        prec
    }

    pub fn num_jobs(&self) -> usize {
        self.n
    }

    pub fn max_width(&self) -> usize {
        self.width
    }

    /// Largest current layer.
    pub fn width(&self) -> usize {
        self.layers.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.iter().filter(|u| u.alive).count()
    }

    pub fn num_edges(&self) -> usize {
        self.live_arcs
    }

    pub fn stats(&self) -> RelaxedStats {
        self.stats
    }

    /// Live edges with node ids.
    pub fn edges(&self) -> Vec<Edge> {
        self.arcs
            .iter()
            .filter(|a| a.alive)
            .map(|a| Edge {
                from: a.from,
                to: a.to,
                label: a.label,
            })
            .collect()
    }

    pub fn state(&self, u: usize) -> RelaxedState {
        RelaxedState {
            down: self.nodes[u].down,
            up: self.nodes[u].up,
        }
    }

    pub fn layer(&self, k: usize) -> &[usize] {
        &self.layers[k]
    }

    /// True when no node merges disagreeing transitions.
    pub fn is_exact(&self, w: &Windows) -> bool {
        (1..self.n).all(|k| self.layers[k].iter().all(|&u| !self.is_relaxed_node(u, w)))
    }

    pub fn count_paths(&self) -> u128 {
        super::exact::count_paths(self.nodes.len(), self.root, &self.layers, &self.edges())
    }

    /// Label sequences of all root-to-sink paths. Exponential; test aid.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        super::exact::enumerate_paths(self.nodes.len(), self.root, &self.edges())
    }

    fn compact_if_sparse(&mut self) {
        if self.arcs.len() > 2 * self.live_arcs + 64 {
            self.compact();
        }
    }

    /// Drops dead nodes and arcs from the arenas.
    fn compact(&mut self) {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut layers = vec![Vec::new(); self.n + 1];
        for layer in &self.layers {
            for &u in layer {
                remap[u] = nodes.len();
                let mut node = self.nodes[u].clone();
                node.ins.clear();
                node.outs.clear();
                layers[node.layer].push(nodes.len());
                nodes.push(node);
            }
        }
        let mut arcs = Vec::with_capacity(self.live_arcs);
        for arc in self.arcs.iter().filter(|a| a.alive) {
            let id = arcs.len();
            let (from, to) = (remap[arc.from], remap[arc.to]);
            nodes[from].outs.push(id);
            nodes[to].ins.push(id);
            arcs.push(Arc {
                from,
                to,
                label: arc.label,
                alive: true,
            });
        }
        self.root = remap[self.root];
        self.sink = remap[self.sink];
        self.nodes = nodes;
        self.arcs = arcs;
        self.layers = layers;
    }

    /// Graphviz rendering; node labels read `A↓/S↓, est | A↑/S↑, lst`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nomdd {\n  rankdir=TB;\n");
        for (k, layer) in self.layers.iter().enumerate() {
            write!(out, "  {{ rank=same;").unwrap();
            for &u in layer {
                write!(out, " n{u};").unwrap();
            }
            writeln!(out, " }} // layer {k}").unwrap();
            for &u in layer {
                let s = &self.nodes[u];
                writeln!(
                    out,
                    "  n{u} [label=\"{:?}/{:?}, {} | {:?}/{:?}, {}\"];",
                    s.down.all, s.down.some, s.down.est, s.up.all, s.up.some, s.up.lst
                )
                .unwrap();
            }
        }
        for arc in self.arcs.iter().filter(|a| a.alive) {
            writeln!(out, "  n{} -> n{} [label=\"{}\"];", arc.from, arc.to, arc.label + 1).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// What the relaxed-diagram propagator derives from the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelaxedMode {
    /// Relaxed bound-consistent filtering of starts and ends.
    BoundFiltering,
    /// Precedence extraction followed by pairwise precedence propagation.
    Precedences,
}

/// No-Overlap propagator over a relaxed diagram.
///
/// The diagram is compiled on the first call and kept while the store's
/// restore epoch is unchanged (bounds have only tightened since); each call
/// then restabilizes it under the new bounds and refines up to `budget`
/// splits before filtering. A restore triggers a fresh compilation.
pub struct RelaxedMddPropagator {
    instance: Instance,
    starts: Vec<VarId>,
    width: usize,
    budget: usize,
    mode: RelaxedMode,
    cache: Option<(u64, RelaxedMdd)>,
    last_seen: Option<(u64, Windows)>,
}

impl RelaxedMddPropagator {
    pub fn new(instance: Instance, starts: Vec<VarId>, mode: RelaxedMode, width: usize, budget: usize) -> Self {
        assert!(width >= 1, "width must be at least 1");
        Self {
            instance,
            starts,
            width,
            budget,
            mode,
            cache: None,
            last_seen: None,
        }
    }

    /// Default refinement budget: two splits per job.
    pub fn default_budget(n: usize) -> usize {
        2 * n
    }

    pub fn diagram(&self) -> Option<&RelaxedMdd> {
        self.cache.as_ref().map(|(_, m)| m)
    }

    fn run(&mut self, store: &mut DomainStore, w: &Windows) -> PropResult {
        let epoch = store.epoch();
        let mut mdd = match self.cache.take() {
            Some((e, mut m)) if e == epoch => {
                m.stabilize(w)?;
                m
            }
            _ => RelaxedMdd::compile(w, self.width)?,
        };
        mdd.refine(w, self.budget)?;
        let result = match self.mode {
            RelaxedMode::BoundFiltering => {
                let (starts, ends) = mdd.bc_filter(w)?;
                let tightened = Windows {
                    est: starts.bounds,
                    lct: ends,
                    ..w.clone()
                };
                apply_windows(store, &self.starts, &tightened)
            }
            RelaxedMode::Precedences => {
                let prec = mdd.extract_precedences();
                prec.propagate(store, &self.starts, &w.processing)
            }
        };
        self.cache = Some((epoch, mdd));
        result
    }
}

impl Propagator for RelaxedMddPropagator {
    fn name(&self) -> &str {
        match self.mode {
            RelaxedMode::BoundFiltering => "relaxed-bc",
            RelaxedMode::Precedences => "precedence-extraction",
        }
    }

    fn priority(&self) -> u8 {
        2
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult {
        let w = Windows::from_store(&self.instance, store, &self.starts);
        if let Some((epoch, seen)) = &self.last_seen {
            if *epoch == store.epoch() && *seen == w {
                return Ok(());
            }
        }
        let result = self.run(store, &w);
        if result.is_err() {
            self.cache = None;
            self.last_seen = None;
        } else {
            self.last_seen = Some((store.epoch(), Windows::from_store(&self.instance, store, &self.starts)));
        }
        result
    }
}
