//! Jobs, instances, schedules, the earliness/tardiness objective, the random
//! instance generator and the text file format.
//!
//! File format (UTF-8): the first non-comment line holds `n`, followed by
//! `n` lines `r p dbar [d]`. Lines starting with `#` and blank lines are
//! ignored. `d` defaults to `dbar`. [`Instance::to_text`] always writes the
//! four columns, so `to_text(parse(t))` is the canonical form of `t`.

use std::fmt::Write as _;

use rand::Rng;
use rand_pcg::Pcg32;

use crate::engine::{DomainStore, Time, VarId};
use crate::error::{Error, Result};
use crate::jobset::MAX_JOBS;

/// A job on the single machine (times are integral).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Job {
    /// Release date: earliest start.
    pub release: Time,
    /// Processing time, at least 1.
    pub processing: Time,
    /// Strict deadline: latest completion.
    pub deadline: Time,
    /// Desired completion time used by the objective.
    pub due: Time,
}

impl Job {
    pub fn new(release: Time, processing: Time, deadline: Time, due: Time) -> Self {
        Self {
            release,
            processing,
            deadline,
            due,
        }
    }

    /// A job whose due date is its deadline.
    pub fn window(release: Time, processing: Time, deadline: Time) -> Self {
        Self::new(release, processing, deadline, deadline)
    }

    pub fn latest_start(&self) -> Time {
        self.deadline - self.processing
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.processing < 1 {
            return Err(format!("processing time {} must be positive", self.processing));
        }
        if self.release < 0 {
            return Err(format!("release date {} is negative", self.release));
        }
        if self.release + self.processing > self.deadline {
            return Err(format!(
                "window too small: r + p = {} exceeds deadline {}",
                self.release + self.processing,
                self.deadline
            ));
        }
        if self.due < self.release + self.processing || self.due > self.deadline {
            return Err(format!(
                "due date {} outside [{}, {}]",
                self.due,
                self.release + self.processing,
                self.deadline
            ));
        }
        Ok(())
    }
}

/// An ordered list of jobs (ids are the 0-based positions) and a horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    jobs: Vec<Job>,
    horizon: Time,
}

impl Instance {
    /// Validates the jobs and sets the horizon to the largest deadline.
    pub fn new(jobs: Vec<Job>) -> Result<Self> {
        Self::check_jobs(&jobs, 0)?;
        let horizon = jobs.iter().map(|j| j.deadline).max().unwrap();
        Ok(Self { jobs, horizon })
    }

    fn check_jobs(jobs: &[Job], first_line: usize) -> Result<()> {
        if jobs.is_empty() {
            return Err(Error::Parse {
                line: first_line,
                msg: "empty job list".into(),
            });
        }
        if jobs.len() > MAX_JOBS {
            return Err(Error::TooManyJobs {
                n: jobs.len(),
                max: MAX_JOBS,
            });
        }
        for (k, j) in jobs.iter().enumerate() {
            j.validate().map_err(|msg| Error::Parse {
                line: first_line + k,
                msg: format!("job {}: {msg}", k + 1),
            })?;
        }
        Ok(())
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, i: usize) -> &Job {
        &self.jobs[i]
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    /// Time-reversed instance over the same horizon `H`: a job `(r, p, dbar, d)`
    /// becomes `(H - dbar, p, H - r, H - d + p)`. Mirroring twice is the
    /// identity.
    pub fn mirror(&self) -> Instance {
        let h = self.horizon;
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job::new(h - j.deadline, j.processing, h - j.release, h - j.due + j.processing))
            .collect();
        Instance { jobs, horizon: h }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing job count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("expected job count, found `{header}`"),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty job list".into(),
            });
        }
        if n > MAX_JOBS {
            return Err(Error::TooManyJobs { n, max: MAX_JOBS });
        }

        let mut jobs = Vec::with_capacity(n);
        for k in 0..n {
            let (line_no, line) = lines.next().ok_or_else(|| Error::Parse {
                line: line_no + k + 1,
                msg: format!("expected {n} jobs, found {k}"),
            })?;
            let fields: Vec<Time> = line
                .split_whitespace()
                .map(|f| f.parse::<Time>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad integer: {e}"),
                })?;
            let job = match fields[..] {
                [r, p, dbar] => Job::window(r, p, dbar),
                [r, p, dbar, d] => Job::new(r, p, dbar, d),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `r p dbar [d]`, found {} fields", fields.len()),
                    })
                }
            };
            job.validate().map_err(|msg| Error::Parse {
                line: line_no,
                msg: format!("job {}: {msg}", k + 1),
            })?;
            jobs.push(job);
        }
        if let Some((line_no, line)) = lines.next() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("unexpected trailing content `{line}`"),
            });
        }
        Instance::new(jobs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.jobs.len());
        for j in &self.jobs {
            writeln!(out, "{} {} {} {}", j.release, j.processing, j.deadline, j.due).unwrap();
        }
        out
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Checks that `schedule` respects every window and never overlaps.
    pub fn check_schedule(&self, schedule: &Schedule) -> Result<()> {
        if schedule.start.len() != self.len() {
            return Err(Error::InfeasibleSchedule(format!(
                "{} start times for {} jobs",
                schedule.start.len(),
                self.len()
            )));
        }
        for (i, (j, &s)) in self.jobs.iter().zip(&schedule.start).enumerate() {
            if s < j.release || s + j.processing > j.deadline {
                return Err(Error::InfeasibleSchedule(format!(
                    "job {} runs [{s}, {}) outside [{}, {}]",
                    i + 1,
                    s + j.processing,
                    j.release,
                    j.deadline
                )));
            }
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| schedule.start[i]);
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            if schedule.start[a] + self.jobs[a].processing > schedule.start[b] {
                return Err(Error::InfeasibleSchedule(format!(
                    "jobs {} and {} overlap",
                    a + 1,
                    b + 1
                )));
            }
        }
        Ok(())
    }

    /// Total earliness plus tardiness of a feasible schedule.
    pub fn evaluate_objective(&self, schedule: &Schedule) -> Result<Time> {
        self.check_schedule(schedule)?;
        Ok(self
            .jobs
            .iter()
            .zip(&schedule.start)
            .map(|(j, &s)| {
                let end = s + j.processing;
                let earliness = (j.due - end).max(0);
                let tardiness = (end - j.due).max(0);
                earliness + tardiness
            })
            .sum())
    }
}

/// Start time per job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub start: Vec<Time>,
}

/// Generates a just-in-time instance with `n` jobs.
///
/// Processing times are uniform in `[1, 25]`. Jobs are laid out back to back
/// from time 0 (cursor `c_j`), job `j` gets the window
/// `[c_{j-2}, c_{j+2} + p_{j+2}]` with indices clamped to the job range, and
/// its due date is uniform in `[r + p, dbar]`.
///
/// Randomness comes from PCG-XSH-RR 64/32 (`rand_pcg::Pcg32`) seeded with
/// state `seed` on stream `stream`, sampling through `rand` 0.8's uniform
/// integer ranges, in the order: all processing times, then all due dates.
pub fn generate_instance_on_stream(n: usize, seed: u64, stream: u64) -> Instance {
    assert!((1..=MAX_JOBS).contains(&n), "job count must be in 1..={MAX_JOBS}");
    let mut rng = Pcg32::new(seed, stream);
    let p: Vec<Time> = (0..n).map(|_| rng.gen_range(1..=25)).collect();
    let mut cursor = vec![0; n];
    for j in 1..n {
        cursor[j] = cursor[j - 1] + p[j - 1];
    }
    let jobs = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(2);
            let hi = (j + 2).min(n - 1);
            let r = cursor[lo];
            let dbar = cursor[hi] + p[hi];
            Job::new(r, p[j], dbar, rng.gen_range(r + p[j]..=dbar))
        })
        .collect();
    Instance::new(jobs).expect("generated jobs are valid by construction")
}

/// [`generate_instance_on_stream`] on stream 0.
pub fn generate_instance(n: usize, seed: u64) -> Instance {
    generate_instance_on_stream(n, seed, 0)
}

/// Current time windows of every job: earliest start `est` and latest
/// completion `lct`, with processing times and the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Windows {
    pub processing: Vec<Time>,
    pub est: Vec<Time>,
    pub lct: Vec<Time>,
    pub horizon: Time,
}

impl Windows {
    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            processing: instance.jobs.iter().map(|j| j.processing).collect(),
            est: instance.jobs.iter().map(|j| j.release).collect(),
            lct: instance.jobs.iter().map(|j| j.deadline).collect(),
            horizon: instance.horizon,
        }
    }

    /// Windows read from start variables: `est = lo(s)`, `lct = hi(s) + p`.
    pub fn from_store(instance: &Instance, store: &DomainStore, starts: &[VarId]) -> Self {
        let processing: Vec<Time> = instance.jobs.iter().map(|j| j.processing).collect();
        Self {
            est: starts.iter().map(|&v| store.lo(v)).collect(),
            lct: starts
                .iter()
                .zip(&processing)
                .map(|(&v, p)| store.hi(v) + p)
                .collect(),
            processing,
            horizon: instance.horizon,
        }
    }

    pub fn len(&self) -> usize {
        self.processing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processing.is_empty()
    }

    pub fn mirrored(&self) -> Self {
        let h = self.horizon;
        Self {
            processing: self.processing.clone(),
            est: self.lct.iter().map(|&x| h - x).collect(),
            lct: self.est.iter().map(|&x| h - x).collect(),
            horizon: h,
        }
    }
}
