//! (k, l)-median clustering: a sampling candidate finder driven by the
//! two-phase construction, a heuristic 1-median used to bracket thresholds,
//! and exhaustive selection of `k` centres from the candidates.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};
use crate::frechet::frechet_distance;
use crate::simplify::bicriteria_simplify;
use crate::twophase::{solve_q_exact, QInstance, SolveOptions, SolveOutcome};

/// Tolerance of the Fréchet values used for costs.
pub const COST_TOL: f64 = 1e-6;

/// Sum over `t` of the distance to the nearest curve of `sigma`.
pub fn cost(t: &[PolygonalCurve], sigma: &[PolygonalCurve], tol: f64) -> Result<f64> {
    if sigma.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(t.iter()
        .map(|tau| {
            sigma
                .iter()
                .map(|s| frechet_distance(s, tau, tol).value)
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

/// Number of sampled curves: `ceil((80 beta l / eps) ln(80 l / mu))`.
pub fn sample_size(beta: f64, ell: usize, eps: f64, mu: f64) -> usize {
    let l = ell as f64;
    ((80.0 * beta * l / eps) * (80.0 * l / mu).ln()).ceil() as usize
}

/// Threshold range `(U, L)` derived from the cost of a sample around its median.
pub fn threshold_bounds(ell: usize, eps: f64, mu: f64, x_len: usize, cost_x: f64) -> (f64, f64) {
    let u = 10.0 * ell as f64 / (eps * eps) * cost_x;
    let l = eps * mu / (34.0 * x_len as f64) * cost_x;
    (u, l)
}

/// Largest multiplier `b` on the threshold grid `b L`.
pub fn threshold_steps(u: f64, l: f64) -> u64 {
    (u / l).ceil() as u64
}

/// `beta` for the selection step: `max(4 k^2 / eps + 2k + 1, 1)`.
pub fn framework_beta(k: usize, eps: f64) -> f64 {
    let k = k as f64;
    (4.0 * k * k / eps + 2.0 * k + 1.0).max(1.0)
}

/// Reduces a curve to exactly `ell` vertices: midpoints are inserted on the
/// longest edges, surplus vertices are dropped keeping evenly spaced ones
/// (always including both ends).
pub fn fit_to_ell(c: &PolygonalCurve, ell: usize) -> PolygonalCurve {
    let n = c.len();
    if n <= ell {
        return c.pad_to(ell);
    }
    if ell == 1 {
        return PolygonalCurve::new(vec![c.first().clone()]).unwrap();
    }
    let pts = (0..ell)
        .map(|i| c.vertex(((i * (n - 1)) as f64 / (ell - 1) as f64).round() as usize).clone())
        .collect();
    PolygonalCurve::new(pts).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Heuristic `(1, ell)`-median of `x`: simplifies each curve of a random
/// subsample of size `min(|x|, ceil(8 ln(4 / mu)))` at the median pairwise
/// distance of the subsample, fits the results to `ell` vertices and keeps
/// the cheapest one. Sampled curves with at most `ell` vertices also compete
/// as they are. A simplification that runs out of nodes is replaced by its
/// input fitted to `ell`. No approximation factor is claimed.
pub fn median34_standin(x: &[PolygonalCurve], ell: usize, mu: f64, seed: u64, node_budget: u64) -> Result<PolygonalCurve> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if ell == 0 || !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter("need ell >= 1 and mu in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = x.len().min((8.0 * (4.0 / mu).ln()).ceil() as usize);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(size);
    idx.sort_unstable();
    let mut pair = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            pair.push(frechet_distance(&x[i], &x[j], COST_TOL).value);
        }
    }
    let delta = median(pair);
    let alpha = (1.0 / ell as f64).min(0.5);
    let mut best: Option<(f64, PolygonalCurve)> = None;
    for &i in &idx {
        let simplified = if delta > 0.0 {
            match bicriteria_simplify(&x[i], delta, alpha, 0.25, node_budget) {
                Ok(s) => Some(s.curve),
                Err(Error::BudgetExceeded(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let mut cands = Vec::new();
        if let Some(s) = &simplified {
            cands.push(fit_to_ell(s, ell));
        }
        // raw inputs only compete when fitting them is lossless
        if simplified.is_none() || x[i].len() <= ell {
            cands.push(fit_to_ell(&x[i], ell));
        }
        for cand in cands {
            let c = cost(x, std::slice::from_ref(&cand), COST_TOL)?;
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, cand));
            }
        }
    }
    Ok(best.unwrap().1)
}

/// Desk-scale overrides. Every override that is in effect for a run is listed
/// in [`CandidateSet::flags`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinderOverrides {
    /// Replaces the sample size formula.
    pub sample_size: Option<usize>,
    /// Replaces `|Y| / (2 beta)` as the size of each subset `X`.
    pub subset_size: Option<usize>,
    /// Above this many subsets `X`, that many are drawn at random instead.
    pub max_subsets: usize,
    /// Cap on the sizes of the subsets `W`.
    pub max_w: Option<usize>,
    /// Threshold vectors tried per `W`: `delta_i` is the grid value nearest
    /// above `f * d_F(tau_i, c)` for each factor `f`. `None` enumerates the
    /// full grid.
    pub threshold_factors: Option<Vec<f64>>,
    /// Node budget of each two-phase search; a search that runs out is skipped.
    pub node_budget: u64,
    /// Node budget of each solver call inside the median heuristic.
    pub median_budget: u64,
    /// Refuse runs whose estimated number of two-phase searches exceeds this.
    pub max_searches: u64,
    pub threads: usize,
}

impl Default for FinderOverrides {
    fn default() -> Self {
        FinderOverrides {
            sample_size: None,
            subset_size: None,
            max_subsets: 64,
            max_w: None,
            threshold_factors: None,
            node_budget: 200_000,
            median_budget: 1_000_000,
            max_searches: 100_000,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinderParams {
    pub ell: usize,
    pub beta: f64,
    pub mu: f64,
    pub eps: f64,
    pub seed: u64,
    pub overrides: FinderOverrides,
}

/// Where a candidate came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CandidateSource {
    Median,
    TwoPhase { w: Vec<usize>, deltas: Vec<f64>, h: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateProvenance {
    /// Index of the subset `X` (see [`CandidateSet::subsets`]).
    pub subset: usize,
    pub source: CandidateSource,
}

/// One enumerated subset `X` with its median cost and threshold range.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubsetRecord {
    /// Indices into the input.
    pub members: Vec<usize>,
    pub cost: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateSet {
    pub curves: Vec<PolygonalCurve>,
    pub provenance: Vec<CandidateProvenance>,
    pub subsets: Vec<SubsetRecord>,
    pub flags: Vec<String>,
    /// Two-phase searches run, and how many of them ran out of nodes.
    pub searches: u64,
    pub exhausted_searches: u64,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All index subsets of `0..n` of the given size, in lexicographic order,
/// stopping once more than `cap` have been produced.
fn combinations(n: usize, size: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        if out.len() > cap {
            return out;
        }
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

/// Nonempty subsets of `0..n` with at most `max` elements, smaller sets first.
fn small_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1..=max.min(n)).flat_map(|s| combinations(n, s, usize::MAX)).collect()
}

struct Job {
    subset: usize,
    h: usize,
    w: Vec<usize>,
    deltas: Vec<f64>,
}

/// The sampling candidate finder.
pub fn candidate_finder(t: &[PolygonalCurve], params: &FinderParams) -> Result<CandidateSet> {
    let FinderParams {
        ell,
        beta,
        mu,
        eps,
        seed,
        ref overrides,
    } = *params;
    if t.is_empty() {
        return Err(Error::EmptyInput);
    }
    if ell == 0 || !(beta >= 1.0) || !(mu > 0.0 && mu < 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter("need ell >= 1, beta >= 1, mu and eps in (0, 1)".into()));
    }
    let mut flags = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y_size = match overrides.sample_size {
        Some(s) => {
            flags.push(format!("sample_size_override:{s}"));
            s
        }
        None => sample_size(beta, ell, eps, mu),
    };
    let y: Vec<usize> = (0..y_size).map(|_| rng.gen_range(0..t.len())).collect();
    let x_size = match overrides.subset_size {
        Some(s) => {
            flags.push(format!("subset_size_override:{s}"));
            s
        }
        None => ((y_size as f64) / (2.0 * beta)).round() as usize,
    }
    .clamp(1, y_size.max(1));
    // subsets X as index sets into Y
    let total_x = binom(y_size, x_size);
    let x_sets: Vec<Vec<usize>> = if total_x <= overrides.max_subsets as f64 {
        combinations(y_size, x_size, usize::MAX)
    } else {
        flags.push(format!("subset_sampling_fallback:{}of{total_x:.3e}", overrides.max_subsets));
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..y_size).collect();
        let mut tries = 0;
        while out.len() < overrides.max_subsets && tries < 100 * overrides.max_subsets {
            tries += 1;
            idx.shuffle(&mut rng);
            let mut s = idx[..x_size].to_vec();
            s.sort_unstable();
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
        out
    };
    flags.push("median_standin".into());
    if let Some(f) = &overrides.threshold_factors {
        flags.push(format!("threshold_grid_guided:{f:?}"));
    }
    if let Some(w) = overrides.max_w {
        flags.push(format!("w_size_cap:{w}"));
    }

    let mut curves = Vec::new();
    let mut provenance = Vec::new();
    let mut subsets = Vec::new();
    let mut jobs: Vec<Job> = Vec::new();
    let mut estimate = 0f64;
    for (xi, xs) in x_sets.iter().enumerate() {
        let members: Vec<usize> = xs.iter().map(|&p| y[p]).collect();
        let xc: Vec<PolygonalCurve> = members.iter().map(|&i| t[i].clone()).collect();
        let c = median34_standin(&xc, ell, mu / 4.0, rng.gen(), overrides.median_budget)?;
        let cx = cost(&xc, std::slice::from_ref(&c), COST_TOL)?;
        let (u, lo) = threshold_bounds(ell, eps, mu, xc.len(), cx);
        curves.push(c.clone());
        provenance.push(CandidateProvenance {
            subset: xi,
            source: CandidateSource::Median,
        });
        subsets.push(SubsetRecord {
            members: members.clone(),
            cost: cx,
            upper: u,
            lower: lo,
        });
        if !(lo > 0.0) {
            // X is already matched exactly by its median
            continue;
        }
        let steps = threshold_steps(u, lo);
        // W ranges over simple subsets of X: distinct input curves
        let distinct: Vec<usize> = members.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let dist_c: Vec<f64> = distinct.iter().map(|&i| frechet_distance(&t[i], &c, COST_TOL).value).collect();
        let mut done = BTreeSet::new();
        for l in 1..=ell {
            for h in 1..=l {
                let mut wmax = 3 * l + 2 * h;
                if let Some(cap) = overrides.max_w {
                    wmax = wmax.min(cap);
                }
                for w in small_subsets(distinct.len(), wmax) {
                    let vectors: Vec<Vec<u64>> = match &overrides.threshold_factors {
                        Some(fs) => fs
                            .iter()
                            .map(|&f| {
                                w.iter()
                                    .map(|&a| ((f * dist_c[a] / lo).ceil() as u64).clamp(1, steps))
                                    .collect()
                            })
                            .collect(),
                        None => {
                            let count = (steps as f64).powi(w.len() as i32);
                            estimate += count;
                            if estimate > overrides.max_searches as f64 {
                                return Err(Error::BudgetExceeded(format!(
                                    "full threshold grid needs about {estimate:.3e} searches, cap {}",
                                    overrides.max_searches
                                )));
                            }
                            grid_vectors(w.len(), steps)
                        }
                    };
                    for b in vectors {
                        let ids: Vec<usize> = w.iter().map(|&a| distinct[a]).collect();
                        if !done.insert((h, ids.clone(), b.clone())) {
                            continue;
                        }
                        jobs.push(Job {
                            subset: xi,
                            h,
                            w: ids,
                            deltas: b.iter().map(|&b| b as f64 * lo).collect(),
                        });
                    }
                }
            }
        }
        if jobs.len() as u64 > overrides.max_searches {
            return Err(Error::BudgetExceeded(format!(
                "at least {} two-phase searches needed, cap {}",
                jobs.len(),
                overrides.max_searches
            )));
        }
    }

    let inner_eps = eps * eps;
    let opts = SolveOptions {
        node_budget: overrides.node_budget,
        ..SolveOptions::default()
    };
    let run = |job: &Job| -> Result<Option<PolygonalCurve>> {
        let wc: Vec<PolygonalCurve> = job.w.iter().map(|&i| t[i].clone()).collect();
        let inst = QInstance::new(wc, job.deltas.clone(), job.h, inner_eps)?;
        match solve_q_exact(&inst, job.h, &opts) {
            Ok(SolveOutcome::Found { curve, .. }) => Ok(Some(curve)),
            Ok(SolveOutcome::Null { .. }) => Ok(None),
            Err(Error::BudgetExceeded(_)) => Err(Error::BudgetExceeded(String::new())),
            Err(e) => Err(e),
        }
    };
    let results: Vec<Result<Option<PolygonalCurve>>> = if overrides.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(overrides.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    } else {
        jobs.iter().map(run).collect()
    };
    let mut exhausted = 0;
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(Some(curve)) => {
                curves.push(fit_to_ell(&curve, ell));
                provenance.push(CandidateProvenance {
                    subset: job.subset,
                    source: CandidateSource::TwoPhase {
                        w: job.w.clone(),
                        deltas: job.deltas.clone(),
                        h: job.h,
                    },
                });
            }
            Ok(None) => {}
            Err(Error::BudgetExceeded(_)) => exhausted += 1,
            Err(e) => return Err(e),
        }
    }
    if exhausted > 0 {
        flags.push(format!("searches_out_of_budget:{exhausted}"));
    }
    Ok(CandidateSet {
        curves,
        provenance,
        subsets,
        flags,
        searches: jobs.len() as u64,
        exhausted_searches: exhausted,
    })
}

/// Every vector in `[1, steps]^len`, lexicographically.
fn grid_vectors(len: usize, steps: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![1u64; len];
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < steps {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = 1;
                }
                break;
            }
            cur[i] = 1;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlMedianResult {
    pub centers: Vec<PolygonalCurve>,
    pub cost: f64,
    /// Index of the nearest centre for every input curve.
    pub assignment: Vec<usize>,
    pub candidates: CandidateSet,
}

fn lex_cmp(a: &PolygonalCurve, b: &PolygonalCurve) -> std::cmp::Ordering {
    let fa = a.vertices().iter().flat_map(|p| p.coords().iter().copied());
    let fb = b.vertices().iter().flat_map(|p| p.coords().iter().copied());
    fa.zip(fb)
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Picks the `k` candidates with the smallest total cost over all size-`k`
/// subsets, candidates sorted lexicographically so ties go to the first.
pub fn select_centers(t: &[PolygonalCurve], cands: &[PolygonalCurve], k: usize, max_subsets: u64) -> Result<(Vec<usize>, f64)> {
    if cands.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = k.min(cands.len());
    let total = binom(cands.len(), k);
    if total > max_subsets as f64 {
        return Err(Error::BudgetExceeded(format!("{total:.3e} center subsets, cap {max_subsets}")));
    }
    let dist: Vec<Vec<f64>> = cands
        .par_iter()
        .map(|c| t.iter().map(|tau| frechet_distance(c, tau, COST_TOL).value).collect())
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut cur: Vec<usize> = (0..k).collect();
    let n = cands.len();
    loop {
        let c: f64 = (0..t.len())
            .map(|i| cur.iter().map(|&s| dist[s][i]).fold(f64::INFINITY, f64::min))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, cur.clone()));
        }
        let mut i = k;
        loop {
            if i == 0 {
                let (c, s) = best.unwrap();
                return Ok((s, c));
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `(k, ell)`-median: runs the candidate finder with
/// `beta = max(4 k^2 / eps + 2k + 1, 1)` and returns the best `k` candidates.
pub fn kl_median(t: &[PolygonalCurve], k: usize, ell: usize, mu: f64, eps: f64, seed: u64, overrides: &FinderOverrides) -> Result<KlMedianResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let params = FinderParams {
        ell,
        beta: framework_beta(k, eps),
        mu,
        eps,
        seed,
        overrides: overrides.clone(),
    };
    let mut set = candidate_finder(t, &params)?;
    // canonical order, duplicates dropped
    let mut order: Vec<usize> = (0..set.curves.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&set.curves[a], &set.curves[b]).then(a.cmp(&b)));
    order.dedup_by(|a, b| set.curves[*a] == set.curves[*b]);
    set.curves = order.iter().map(|&i| set.curves[i].clone()).collect();
    set.provenance = order.iter().map(|&i| set.provenance[i].clone()).collect();
    let (chosen, total) = select_centers(t, &set.curves, k, overrides.max_searches.max(1) * 100)?;
    let centers: Vec<PolygonalCurve> = chosen.iter().map(|&i| set.curves[i].clone()).collect();
    let assignment = t
        .iter()
        .map(|tau| {
            let d: Vec<f64> = centers.iter().map(|c| frechet_distance(c, tau, COST_TOL).value).collect();
            (0..d.len()).fold(0, |b, j| if d[j] < d[b] { j } else { b })
        })
        .collect();
    Ok(KlMedianResult {
        centers,
        cost: total,
        assignment,
        candidates: set,
    })
}
