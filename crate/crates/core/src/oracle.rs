//! Brute-force ground truth for small instances.
//!
//! A job order is feasible iff scheduling every job as early as possible in
//! that order meets every latest completion: delaying a job never lets a
//! later job start earlier, so the greedy schedule gives each job its
//! smallest start for that order. Enumerating orders therefore yields the
//! exact earliest starts, latest ends, forced precedences and optimum.

use std::fmt::Write as _;

use crate::engine::Time;
use crate::error::{Error, Result};
use crate::instance::{Instance, Windows};
use crate::mdd::PrecedenceSet;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_JOBS: usize = 10;

/// Orders up to this size use the time-grid timing evaluation; larger ones
/// use the piecewise-linear sweep.
pub const GRID_TIMING_MAX_JOBS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    /// Number of feasible job orders.
    pub feasible_count: u64,
    /// Smallest start of each job over all feasible schedules; empty when
    /// infeasible.
    pub min_start: Vec<Time>,
    /// Largest end of each job over all feasible schedules; empty when
    /// infeasible.
    pub max_end: Vec<Time>,
    /// Pairs ordered the same way in every feasible order.
    pub precedences: PrecedenceSet,
    /// Optimal total earliness plus tardiness, `None` when infeasible.
    pub optimum: Option<Time>,
}

impl OracleReport {
    pub fn is_infeasible(&self) -> bool {
        self.feasible_count == 0
    }

    /// Text block used for golden files and by the CLI.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "feasible_orders {}", self.feasible_count).unwrap();
        match self.optimum {
            None => out.push_str("infeasible\n"),
            Some(opt) => {
                let join = |v: &[Time]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                writeln!(out, "min_start {}", join(&self.min_start)).unwrap();
                writeln!(out, "max_end {}", join(&self.max_end)).unwrap();
                let pairs: Vec<String> = self
                    .precedences
                    .pairs()
                    .iter()
                    .map(|(i, j)| format!("{}<{}", i + 1, j + 1))
                    .collect();
                writeln!(out, "precedences {}", pairs.join(" ")).unwrap();
                writeln!(out, "optimum {opt}").unwrap();
            }
        }
        out
    }
}

/// Greedy-earliest starts of `order`, or `None` if a deadline is missed.
pub fn greedy_schedule(w: &Windows, order: &[usize]) -> Option<Vec<Time>> {
    let mut start = vec![0; w.len()];
    let mut t = Time::MIN;
    for &i in order {
        let s = t.max(w.est[i]);
        if s + w.processing[i] > w.lct[i] {
            return None;
        }
        start[i] = s;
        t = s + w.processing[i];
    }
    Some(start)
}

/// Latest starts of `order`: jobs packed right, from the last one.
pub fn latest_schedule(w: &Windows, order: &[usize]) -> Option<Vec<Time>> {
    let mut start = vec![0; w.len()];
    let mut t = Time::MAX;
    for &i in order.iter().rev() {
        let s = t.min(w.lct[i]) - w.processing[i];
        if s < w.est[i] {
            return None;
        }
        start[i] = s;
        t = s;
    }
    Some(start)
}

/// All feasible orders, by depth-first enumeration with deadline pruning.
pub fn feasible_orders(w: &Windows) -> Vec<Vec<usize>> {
    fn rec(w: &Windows, t: Time, prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == w.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..w.len() {
            if used[i] {
                continue;
            }
            let s = t.max(w.est[i]);
            if s + w.processing[i] > w.lct[i] {
                continue;
            }
            used[i] = true;
            prefix.push(i);
            rec(w, s + w.processing[i], prefix, used, out);
            prefix.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    rec(w, Time::MIN, &mut Vec::new(), &mut vec![false; w.len()], &mut out);
    out
}

/// Minimal total `|e_j - d_j|` for a fixed order, by dynamic programming
/// over integer completion times: `best[e]` is the cheapest cost of the
/// scheduled prefix with its last job ending exactly at `e`.
pub fn timing_cost_grid(w: &Windows, due: &[Time], order: &[usize]) -> Option<Time> {
    let h = w.horizon.max(*w.lct.iter().max()?);
    let size = (h + 1) as usize;
    const INF: Time = Time::MAX / 4;
    // prefix_min[t] = cheapest prefix cost ending at or before t
    let mut prefix_min = vec![0; size];
    for &i in order {
        let p = w.processing[i];
        let mut best = vec![INF; size];
        for e in (w.est[i] + p).max(0)..=w.lct[i] {
            let before = prefix_min[(e - p) as usize];
            if before < INF {
                best[e as usize] = before + (e - due[i]).abs();
            }
        }
        let mut run = INF;
        for (t, b) in best.iter().enumerate() {
            run = run.min(*b);
            prefix_min[t] = run;
        }
    }
    let v = prefix_min[size - 1];
    (v < INF).then_some(v)
}

/// Convex piecewise-linear function of a completion time, stored as its
/// breakpoints over a bounded domain.
#[derive(Debug, Clone)]
struct Pwl {
    /// `(x, f(x))`, strictly increasing `x`; linear in between.
    points: Vec<(Time, Time)>,
}

impl Pwl {
    fn eval(&self, x: Time) -> Time {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts.last().unwrap().1
    }

    /// `g(x) = min_{y <= x} f(y)`, extended flat to `+inf` (capped at `hi`).
    fn prefix_min(&self, hi: Time) -> Pwl {
        let mut points = Vec::with_capacity(self.points.len() + 1);
        let mut run = Time::MAX;
        for &(x, y) in &self.points {
            if y < run {
                run = y;
                points.push((x, y));
            } else {
                // convex: past the minimum everything is flat
                break;
            }
        }
        let last = points.last().unwrap().0;
        if hi > last {
            points.push((hi, run));
        }
        Pwl { points }
    }

    fn shift(&mut self, dx: Time) {
        for p in &mut self.points {
            p.0 += dx;
        }
    }

    /// Restriction to `[lo, hi]`; `None` if the domains do not meet.
    fn restrict(&self, lo: Time, hi: Time) -> Option<Pwl> {
        let (a, b) = (self.points[0].0, self.points.last().unwrap().0);
        let (lo, hi) = (lo.max(a), hi.min(b));
        if lo > hi {
            return None;
        }
        let mut points = vec![(lo, self.eval(lo))];
        points.extend(self.points.iter().copied().filter(|&(x, _)| x > lo && x < hi));
        if hi > lo {
            points.push((hi, self.eval(hi)));
        }
        Some(Pwl { points })
    }

    fn add_abs(&mut self, d: Time) {
        let (a, b) = (self.points[0].0, self.points.last().unwrap().0);
        if d > a && d < b && !self.points.iter().any(|&(x, _)| x == d) {
            let y = self.eval(d);
            let at = self.points.partition_point(|&(x, _)| x < d);
            self.points.insert(at, (d, y));
        }
        for p in &mut self.points {
            p.1 += (p.0 - d).abs();
        }
    }

    fn min(&self) -> Time {
        self.points.iter().map(|p| p.1).min().unwrap()
    }
}

/// Same value as [`timing_cost_grid`], by a left-to-right sweep of convex
/// piecewise-linear cost functions of the last completion time.
pub fn timing_cost_sweep(w: &Windows, due: &[Time], order: &[usize]) -> Option<Time> {
    let mut f: Option<Pwl> = None;
    let far = w.horizon.max(*w.lct.iter().max()?);
    for &i in order {
        let p = w.processing[i];
        let (lo, hi) = (w.est[i] + p, w.lct[i]);
        let mut g = match &f {
            None => Pwl {
                points: vec![(lo.min(hi), 0), (hi, 0)],
            }
            .restrict(lo, hi)?,
            Some(prev) => {
                let mut m = prev.prefix_min(far);
                m.shift(p);
                m.restrict(lo, hi)?
            }
        };
        g.points.dedup_by_key(|pt| pt.0);
        g.add_abs(due[i]);
        f = Some(g);
    }
    f.map(|g| g.min())
}

/// Optimal earliness/tardiness cost of a feasible `order` under windows `w`.
pub fn optimum_for_order(instance: &Instance, w: &Windows, order: &[usize]) -> Result<Time> {
    let due: Vec<Time> = instance.jobs().iter().map(|j| j.due).collect();
    let cost = if order.len() <= GRID_TIMING_MAX_JOBS {
        timing_cost_grid(w, &due, order)
    } else {
        timing_cost_sweep(w, &due, order)
    };
    cost.ok_or_else(|| Error::InfeasibleSchedule(format!("order {order:?} misses a deadline")))
}

/// Enumerates every feasible order of `instance` under `windows` (the
/// instance's own windows when `None`).
pub fn oracle_report(instance: &Instance, windows: Option<&Windows>) -> Result<OracleReport> {
    let n = instance.len();
    if n > ORACLE_MAX_JOBS {
        return Err(Error::TooManyJobs {
            n,
            max: ORACLE_MAX_JOBS,
        });
    }
    let w = windows.cloned().unwrap_or_else(|| Windows::from_instance(instance));
    let orders = feasible_orders(&w);
    if orders.is_empty() {
        return Ok(OracleReport {
            feasible_count: 0,
            min_start: Vec::new(),
            max_end: Vec::new(),
            precedences: PrecedenceSet::empty(n),
            optimum: None,
        });
    }
    let mut min_start = vec![Time::MAX; n];
    let mut max_end = vec![Time::MIN; n];
    let mut precedences = PrecedenceSet::all_pairs(n);
    let mut optimum = Time::MAX;
    for order in &orders {
        let early = greedy_schedule(&w, order).expect("enumerated orders are feasible");
        let late = latest_schedule(&w, order).expect("feasible orders have a latest schedule");
        for i in 0..n {
            min_start[i] = min_start[i].min(early[i]);
            max_end[i] = max_end[i].max(late[i] + w.processing[i]);
        }
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                precedences.remove(j, i);
            }
        }
        optimum = optimum.min(optimum_for_order(instance, &w, order)?);
    }
    Ok(OracleReport {
        feasible_count: orders.len() as u64,
        min_start,
        max_end,
        precedences,
        optimum: Some(optimum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Job, Schedule};
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg32;

    fn four_jobs() -> Instance {
        Instance::parse("4\n4 2 6\n0 3 10\n0 2 9\n7 6 19\n").unwrap()
    }

    #[test]
    fn four_jobs_report() {
        let r = oracle_report(&four_jobs(), None).unwrap();
        assert_eq!(r.feasible_count, 2);
        assert_eq!(r.min_start, vec![4, 0, 0, 8]);
        assert_eq!(r.max_end, vec![6, 10, 9, 19]);
        for i in 0..3 {
            assert!(r.precedences.contains(i, 3));
        }
        assert!(r.to_text().contains("min_start 4 0 0 8"));
    }

    #[test]
    fn single_job_and_overload() {
        let one = Instance::new(vec![Job::new(2, 3, 11, 6)]).unwrap();
        let r = oracle_report(&one, None).unwrap();
        assert_eq!((r.min_start.clone(), r.max_end.clone()), (vec![2], vec![11]));
        assert!(r.precedences.is_empty());
        assert_eq!(r.optimum, Some(0));

        let two = Instance::new(vec![Job::window(0, 2, 3), Job::window(0, 2, 3)]).unwrap();
        let r = oracle_report(&two, None).unwrap();
        assert!(r.is_infeasible());
        assert_eq!(r.optimum, None);
        assert_eq!(r.to_text(), "feasible_orders 0\ninfeasible\n");
    }

    #[test]
    fn guard_rejects_large_instances() {
        assert!(matches!(
            oracle_report(&generate_instance(11, 0), None),
            Err(Error::TooManyJobs { .. })
        ));
    }

    #[test]
    fn timing_examples() {
        let one = Instance::new(vec![Job::new(0, 2, 10, 5)]).unwrap();
        let w = Windows::from_instance(&one);
        assert_eq!(optimum_for_order(&one, &w, &[0]).unwrap(), 0);
        // windows allow every job to end exactly on time
        let slack = Instance::new(vec![Job::new(0, 2, 20, 4), Job::new(0, 3, 20, 9), Job::new(0, 1, 20, 12)]).unwrap();
        let w = Windows::from_instance(&slack);
        assert_eq!(optimum_for_order(&slack, &w, &[0, 1, 2]).unwrap(), 0);
        assert!(optimum_for_order(&four_jobs(), &Windows::from_instance(&four_jobs()), &[0, 1, 2, 3]).is_err());
    }

    /// Minimises over every integer start tuple respecting the order.
    fn grid_brute_force(inst: &Instance, order: &[usize]) -> Option<Time> {
        fn rec(inst: &Instance, order: &[usize], k: usize, t: Time, starts: &mut Vec<Time>, best: &mut Option<Time>) {
            if k == order.len() {
                let mut s = vec![0; inst.len()];
                for (pos, &i) in order.iter().enumerate() {
                    s[i] = starts[pos];
                }
                let c = inst.evaluate_objective(&Schedule { start: s }).unwrap();
                *best = Some(best.map_or(c, |b: Time| b.min(c)));
                return;
            }
            let j = inst.job(order[k]);
            for s in t.max(j.release)..=j.latest_start() {
                starts.push(s);
                rec(inst, order, k + 1, s + j.processing, starts, best);
                starts.pop();
            }
        }
        let mut best = None;
        rec(inst, order, 0, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn timing_routes_agree_with_full_grid() {
        let mut rng = Pcg32::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(1..=4);
            let jobs: Vec<Job> = (0..n)
                .map(|_| {
                    let r = rng.gen_range(0..6);
                    let p = rng.gen_range(1..4);
                    let dbar = r + p + rng.gen_range(0..7);
                    Job::new(r, p, dbar, rng.gen_range(r + p..=dbar))
                })
                .collect();
            let inst = Instance::new(jobs).unwrap();
            let w = Windows::from_instance(&inst);
            let due: Vec<Time> = inst.jobs().iter().map(|j| j.due).collect();
            let order: Vec<usize> = (0..n).collect();
            let brute = grid_brute_force(&inst, &order);
            assert_eq!(timing_cost_grid(&w, &due, &order), brute);
            assert_eq!(timing_cost_sweep(&w, &due, &order), brute);
        }
    }

    #[test]
    fn timing_routes_agree_on_generated_orders() {
        for seed in 0..40 {
            let inst = generate_instance(8, seed);
            let w = Windows::from_instance(&inst);
            let due: Vec<Time> = inst.jobs().iter().map(|j| j.due).collect();
            for order in feasible_orders(&w).iter().take(30) {
                assert_eq!(timing_cost_grid(&w, &due, order), timing_cost_sweep(&w, &due, order));
            }
        }
    }

    #[test]
    fn greedy_dominates_perturbed_schedules() {
        let mut rng = Pcg32::seed_from_u64(23);
        for seed in 0..30 {
            let inst = generate_instance(6, seed);
            let w = Windows::from_instance(&inst);
            for order in feasible_orders(&w).iter().take(10) {
                let early = greedy_schedule(&w, order).unwrap();
                let late = latest_schedule(&w, order).unwrap();
                // any schedule in between, kept in order, is no earlier
                let mut t = Time::MIN;
                for &i in order {
                    let lo = t.max(early[i]);
                    let s = if lo >= late[i] { lo } else { rng.gen_range(lo..=late[i]) };
                    assert!(s >= early[i]);
                    t = s + w.processing[i];
                }
            }
        }
    }

    #[test]
    fn mirror_consistency() {
        for seed in 0..30 {
            let inst = generate_instance(7, seed);
            let direct = oracle_report(&inst, None).unwrap();
            let mirrored = oracle_report(&inst.mirror(), None).unwrap();
            let h = inst.horizon();
            let via: Vec<Time> = mirrored.min_start.iter().map(|&s| h - s).collect();
            assert_eq!(direct.max_end, via);
            assert_eq!(direct.optimum, mirrored.optimum);
        }
    }
}
