//! Classic No-Overlap filtering: overload checking, detectable precedences,
//! not-first/not-last and edge finding, on Θ-trees and Θ-Λ-trees.
//!
//! Every rule is written for earliest starts (or latest completions for
//! not-last) and the symmetric rule is obtained by running it on the
//! time-reversed task set, where `est' = -lct` and `lct' = -est`.

use crate::engine::{DomainStore, Infeasible, PropResult, Propagator, Time, VarId};
use crate::instance::{Instance, Windows};
use crate::mdd::apply_windows;

const NEG_INF: Time = Time::MIN / 4;

/// Scheduling view of one job.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct TaskView {
    pub est: Time,
    pub lct: Time,
    pub p: Time,
}

impl TaskView {
    pub fn ect(&self) -> Time {
        self.est + self.p
    }

    pub fn lst(&self) -> Time {
        self.lct - self.p
    }

    fn mirrored(&self) -> TaskView {
        TaskView {
            est: -self.lct,
            lct: -self.est,
            p: self.p,
        }
    }
}

pub fn task_views(w: &Windows) -> Vec<TaskView> {
    (0..w.len())
        .map(|i| TaskView {
            est: w.est[i],
            lct: w.lct[i],
            p: w.processing[i],
        })
        .collect()
}

fn mirror_all(tasks: &[TaskView]) -> Vec<TaskView> {
    tasks.iter().map(TaskView::mirrored).collect()
}

/// Earliest completion time of a task set, by definition: the largest
/// `est(Ω') + p(Ω')` over non-empty subsets. Only the subsets
/// `{k : est_k >= est_i}` matter, which makes this quadratic.
pub fn ect_of(tasks: &[TaskView], set: &[usize]) -> Time {
    set.iter()
        .map(|&i| {
            let from = tasks[i].est;
            from + set.iter().filter(|&&k| tasks[k].est >= from).map(|&k| tasks[k].p).sum::<Time>()
        })
        .max()
        .unwrap_or(NEG_INF)
}

#[derive(Debug, Copy, Clone)]
struct ThetaNode {
    sum: Time,
    ect: Time,
    sum_bar: Time,
    ect_bar: Time,
    /// Gray leaf responsible for `sum_bar` / `ect_bar`.
    resp_sum: Option<usize>,
    resp_ect: Option<usize>,
}

impl ThetaNode {
    const EMPTY: ThetaNode = ThetaNode {
        sum: 0,
        ect: NEG_INF,
        sum_bar: 0,
        ect_bar: NEG_INF,
        resp_sum: None,
        resp_ect: None,
    };

    fn combine(l: &ThetaNode, r: &ThetaNode) -> ThetaNode {
        let sum = l.sum + r.sum;
        let ect = r.ect.max(l.ect + r.sum);

        let (sum_bar, resp_sum) = if l.sum_bar + r.sum >= l.sum + r.sum_bar {
            (l.sum_bar + r.sum, l.resp_sum)
        } else {
            (l.sum + r.sum_bar, r.resp_sum)
        };

        let mut ect_bar = r.ect_bar;
        let mut resp_ect = r.resp_ect;
        if l.ect + r.sum_bar > ect_bar {
            ect_bar = l.ect + r.sum_bar;
            resp_ect = r.resp_sum;
        }
        if l.ect_bar + r.sum > ect_bar {
            ect_bar = l.ect_bar + r.sum;
            resp_ect = l.resp_ect;
        }
        ThetaNode {
            sum,
            ect,
            sum_bar,
            ect_bar,
            resp_sum,
            resp_ect,
        }
    }
}

/// Θ-Λ-tree over tasks ordered by earliest start. White tasks form Θ, gray
/// tasks form Λ; `ect_bar` is the largest ECT obtainable by adding at most
/// one gray task to Θ. A tree with no gray task is a plain Θ-tree.
#[derive(Debug, Clone)]
pub struct ThetaLambdaTree {
    size: usize,
    nodes: Vec<ThetaNode>,
    /// Leaf position of each task.
    leaf: Vec<usize>,
    tasks: Vec<TaskView>,
}

impl ThetaLambdaTree {
    /// An empty tree able to hold `tasks`.
    pub fn new(tasks: &[TaskView]) -> Self {
        let n = tasks.len();
        let size = n.next_power_of_two().max(1);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (tasks[i].est, i));
        let mut leaf = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            leaf[i] = pos;
        }
        Self {
            size,
            nodes: vec![ThetaNode::EMPTY; 2 * size],
            leaf,
            tasks: tasks.to_vec(),
        }
    }

    fn set_leaf(&mut self, i: usize, node: ThetaNode) {
        let mut k = self.size + self.leaf[i];
        self.nodes[k] = node;
        while k > 1 {
            k /= 2;
            self.nodes[k] = ThetaNode::combine(&self.nodes[2 * k], &self.nodes[2 * k + 1]);
        }
    }

    pub fn insert(&mut self, i: usize) {
        let t = self.tasks[i];
        self.set_leaf(
            i,
            ThetaNode {
                sum: t.p,
                ect: t.ect(),
                sum_bar: t.p,
                ect_bar: t.ect(),
                resp_sum: None,
                resp_ect: None,
            },
        );
    }

    pub fn insert_gray(&mut self, i: usize) {
        let t = self.tasks[i];
        self.set_leaf(
            i,
            ThetaNode {
                sum: 0,
                ect: NEG_INF,
                sum_bar: t.p,
                ect_bar: t.ect(),
                resp_sum: Some(i),
                resp_ect: Some(i),
            },
        );
    }

    pub fn remove(&mut self, i: usize) {
        self.set_leaf(i, ThetaNode::EMPTY);
    }

    pub fn ect(&self) -> Time {
        self.nodes[1].ect
    }

    pub fn ect_bar(&self) -> Time {
        self.nodes[1].ect_bar
    }

    pub fn responsible_gray(&self) -> Option<usize> {
        self.nodes[1].resp_ect
    }
}

/// Fails when some task set cannot fit between its earliest start and its
/// latest completion.
pub fn overload_check(tasks: &[TaskView]) -> Result<(), Infeasible> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| tasks[i].lct);
    let mut theta = ThetaLambdaTree::new(tasks);
    for j in order {
        theta.insert(j);
        if theta.ect() > tasks[j].lct {
            return Err(Infeasible);
        }
    }
    Ok(())
}

/// New earliest starts from detectable precedences: whenever
/// `ect_i > lst_j`, job `j` must precede `i`, and `i` starts no earlier than
/// the ECT of all its detectable predecessors.
pub fn detectable_precedences_est(tasks: &[TaskView]) -> Vec<Time> {
    let n = tasks.len();
    let mut by_ect: Vec<usize> = (0..n).collect();
    by_ect.sort_by_key(|&i| tasks[i].ect());
    let mut by_lst: Vec<usize> = (0..n).collect();
    by_lst.sort_by_key(|&i| tasks[i].lst());

    let mut theta = ThetaLambdaTree::new(tasks);
    let mut in_theta = vec![false; n];
    let mut q = 0;
    let mut est: Vec<Time> = tasks.iter().map(|t| t.est).collect();
    for &i in &by_ect {
        while q < n && tasks[i].ect() > tasks[by_lst[q]].lst() {
            theta.insert(by_lst[q]);
            in_theta[by_lst[q]] = true;
            q += 1;
        }
        let bound = if in_theta[i] {
            theta.remove(i);
            let b = theta.ect();
            theta.insert(i);
            b
        } else {
            theta.ect()
        };
        est[i] = est[i].max(bound);
    }
    est
}

/// New latest completions from the not-last rule: if the tasks that must
/// start before `lct_i` cannot all finish before `lst_i`, job `i` cannot be
/// last among them and must end by the latest of their latest starts.
pub fn not_last_lct(tasks: &[TaskView]) -> Vec<Time> {
    let n = tasks.len();
    let mut by_lct: Vec<usize> = (0..n).collect();
    by_lct.sort_by_key(|&i| tasks[i].lct);
    let mut by_lst: Vec<usize> = (0..n).collect();
    by_lst.sort_by_key(|&i| tasks[i].lst());

    let mut theta = ThetaLambdaTree::new(tasks);
    let mut inserted: Vec<usize> = Vec::new();
    let mut q = 0;
    let mut lct: Vec<Time> = tasks.iter().map(|t| t.lct).collect();
    for &i in &by_lct {
        while q < n && tasks[i].lct > tasks[by_lst[q]].lst() {
            theta.insert(by_lst[q]);
            inserted.push(by_lst[q]);
            q += 1;
        }
        let Some(&last_other) = inserted.iter().rev().find(|&&j| j != i) else {
            continue;
        };
        let i_in = inserted.contains(&i);
        if i_in {
            theta.remove(i);
        }
        let ect = theta.ect();
        if i_in {
            theta.insert(i);
        }
        if ect > tasks[i].lst() {
            lct[i] = lct[i].min(tasks[last_other].lst());
        }
    }
    lct
}

/// New earliest starts from edge finding: if `Ω ∪ {j}` cannot complete by
/// `lct(Ω)`, job `j` runs after all of `Ω`. Fails on overload.
pub fn edge_finding_est(tasks: &[TaskView]) -> Result<Vec<Time>, Infeasible> {
    let n = tasks.len();
    let mut est: Vec<Time> = tasks.iter().map(|t| t.est).collect();
    if n == 0 {
        return Ok(est);
    }
    let mut tree = ThetaLambdaTree::new(tasks);
    for i in 0..n {
        tree.insert(i);
    }
    let mut by_lct_desc: Vec<usize> = (0..n).collect();
    by_lct_desc.sort_by_key(|&i| std::cmp::Reverse(tasks[i].lct));

    let mut k = 0;
    let mut j = by_lct_desc[0];
    while k + 1 < n {
        if tree.ect() > tasks[j].lct {
            return Err(Infeasible);
        }
        tree.insert_gray(j);
        k += 1;
        j = by_lct_desc[k];
        while tree.ect_bar() > tasks[j].lct {
            let Some(i) = tree.responsible_gray() else {
                break;
            };
            est[i] = est[i].max(tree.ect());
            tree.remove(i);
        }
    }
    if tree.ect() > tasks[j].lct {
        return Err(Infeasible);
    }
    Ok(est)
}

fn check_windows(w: &Windows) -> Result<(), Infeasible> {
    for i in 0..w.len() {
        if w.est[i] + w.processing[i] > w.lct[i] {
            return Err(Infeasible);
        }
    }
    Ok(())
}

fn negate(v: Vec<Time>) -> Vec<Time> {
    v.into_iter().map(|x| -x).collect()
}

/// Overload check on current windows.
pub fn overload(w: &Windows) -> Result<(), Infeasible> {
    overload_check(&task_views(w))
}

/// Detectable precedences on starts and, mirrored, on ends.
pub fn detectable_precedences(w: &Windows) -> Result<Windows, Infeasible> {
    let tasks = task_views(w);
    let est = detectable_precedences_est(&tasks);
    let lct = negate(detectable_precedences_est(&mirror_all(&tasks)));
    tightened(w, est, lct)
}

/// Not-last on ends and, mirrored, not-first on starts.
pub fn not_first_not_last(w: &Windows) -> Result<Windows, Infeasible> {
    let tasks = task_views(w);
    let lct = not_last_lct(&tasks);
    let est = negate(not_last_lct(&mirror_all(&tasks)));
    tightened(w, est, lct)
}

/// Edge finding on starts and, mirrored, on ends.
pub fn edge_finding(w: &Windows) -> Result<Windows, Infeasible> {
    let tasks = task_views(w);
    let est = edge_finding_est(&tasks)?;
    let lct = negate(edge_finding_est(&mirror_all(&tasks))?);
    tightened(w, est, lct)
}

fn tightened(w: &Windows, est: Vec<Time>, lct: Vec<Time>) -> Result<Windows, Infeasible> {
    let out = Windows {
        est: est.iter().zip(&w.est).map(|(&a, &b)| a.max(b)).collect(),
        lct: lct.iter().zip(&w.lct).map(|(&a, &b)| a.min(b)).collect(),
        ..w.clone()
    };
    check_windows(&out)?;
    Ok(out)
}

/// All four rules in cost order, repeated until none tightens anything.
pub fn classic_fixpoint(w: &Windows) -> Result<Windows, Infeasible> {
    let mut cur = w.clone();
    check_windows(&cur)?;
    loop {
        overload(&cur)?;
        let next = edge_finding(&not_first_not_last(&detectable_precedences(&cur)?)?)?;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
}

/// The baseline No-Overlap propagator.
pub struct ClassicNoOverlap {
    instance: Instance,
    starts: Vec<VarId>,
}

impl ClassicNoOverlap {
    pub fn new(instance: Instance, starts: Vec<VarId>) -> Self {
        Self { instance, starts }
    }
}

impl Propagator for ClassicNoOverlap {
    fn name(&self) -> &str {
        "classic-no-overlap"
    }

    fn priority(&self) -> u8 {
        1
    }

    fn propagate(&mut self, store: &mut DomainStore) -> PropResult {
        let w = Windows::from_store(&self.instance, store, &self.starts);
        let out = classic_fixpoint(&w)?;
        apply_windows(store, &self.starts, &out)
    }
}
