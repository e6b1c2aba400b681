//! The solver: one search per vertex count `l`, run in rounds with doubling
//! node allowances until a verified curve is found or every search is
//! exhausted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{SearchOutcome, Searcher};
use super::QInstance;
use crate::config::Configuration;
use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMode {
    /// Configurations over all curves.
    Full,
    /// Configurations over each subset of `min(5l, n)` curves; candidates are
    /// still verified against every curve.
    Subset5l,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub mode: SolveMode,
    /// Total number of search nodes over all rounds.
    pub node_budget: u64,
    /// Worker threads for the per-`l` searches; 1 runs them in order.
    pub threads: usize,
    /// Grid parameter; defaults to `eps / (4 sqrt(d))`.
    pub eps_internal: Option<f64>,
    /// Allowance of the first round, per search.
    pub initial_slice: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Full,
            node_budget: 10_000_000,
            threads: 1,
            eps_internal: None,
            initial_slice: 1 << 12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub l: usize,
    pub nodes: u64,
    pub config: Option<Configuration>,
    pub subset: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Found { curve: PolygonalCurve, report: SolveReport },
    Null { nodes: u64 },
}

impl SolveOutcome {
    pub fn curve(&self) -> Option<&PolygonalCurve> {
        match self {
            SolveOutcome::Found { curve, .. } => Some(curve),
            SolveOutcome::Null { .. } => None,
        }
    }
}

/// A single search task: one vertex count on one subset of curves.
struct Task {
    l: usize,
    subset: Vec<usize>,
    inst: QInstance,
    done: bool,
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Finds a curve with at most `ell` vertices within `delta_i + eps delta_max`
/// of every input curve, or proves within the budget that the exact problem
/// has no solution.
pub fn solve_q(inst: &QInstance, opts: &SolveOptions) -> Result<SolveOutcome> {
    solve_range(inst, 1..=inst.ell, opts)
}

/// Like [`solve_q`], but only curves with exactly `l` vertices are searched.
pub fn solve_q_exact(inst: &QInstance, l: usize, opts: &SolveOptions) -> Result<SolveOutcome> {
    if l == 0 || l > inst.ell {
        return Err(Error::InvalidParameter(format!("vertex count {l} outside 1..={}", inst.ell)));
    }
    solve_range(inst, l..=l, opts)
}

fn solve_range(inst: &QInstance, ls: std::ops::RangeInclusive<usize>, opts: &SolveOptions) -> Result<SolveOutcome> {
    let eps = opts.eps_internal.unwrap_or_else(|| inst.eps_internal());
    let n = inst.n();
    let mut tasks: Vec<Task> = Vec::new();
    for l in ls {
        match opts.mode {
            SolveMode::Full => tasks.push(Task {
                l,
                subset: (0..n).collect(),
                inst: inst.clone(),
                done: false,
            }),
            SolveMode::Subset5l => {
                let size = (5 * l).min(n);
                for s in subsets(n, size) {
                    let sub = inst.subset(&s)?;
                    tasks.push(Task {
                        l,
                        subset: s,
                        inst: sub,
                        done: false,
                    });
                }
            }
        }
    }
    let pool = if opts.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let mut slice = opts.initial_slice.max(1);
    let mut spent = 0u64;
    loop {
        let active: Vec<usize> = (0..tasks.len()).filter(|&t| !tasks[t].done).collect();
        if active.is_empty() {
            return Ok(SolveOutcome::Null { nodes: spent });
        }
        let remaining = opts.node_budget.saturating_sub(spent);
        if remaining == 0 {
            return Err(Error::BudgetExceeded(format!(
                "{} search nodes used, {} searches unfinished",
                spent,
                active.len()
            )));
        }
        let per = slice.min(remaining.div_ceil(active.len() as u64)).max(1);
        let run = |t: &usize| -> Result<(SearchOutcome, u64)> {
            let task = &tasks[*t];
            let mut s = Searcher::new(&task.inst, inst, task.l, eps, per)?;
            let out = s.run();
            Ok((out, s.nodes().min(per)))
        };
        let results: Vec<Result<(SearchOutcome, u64)>> = match &pool {
            Some(pool) => pool.install(|| active.par_iter().map(run).collect()),
            None => active.iter().map(run).collect(),
        };
        let mut found = None;
        for (t, r) in active.iter().zip(results) {
            let (out, nodes) = r?;
            spent += nodes;
            match out {
                SearchOutcome::Found { curve, config, .. } => {
                    if found.is_none() {
                        found = Some((
                            curve,
                            SolveReport {
                                l: tasks[*t].l,
                                nodes: 0,
                                config: Some(*config),
                                subset: tasks[*t].subset.clone(),
                            },
                        ));
                    }
                }
                SearchOutcome::Exhausted => tasks[*t].done = true,
                SearchOutcome::OutOfBudget => {}
            }
        }
        if let Some((curve, mut report)) = found {
            report.nodes = spent;
            return Ok(SolveOutcome::Found { curve, report });
        }
        slice = slice.saturating_mul(2);
    }
}
