//! Steepest-ascent hill climbing with random restarts over a discrete grid
//! of facet weights.
//!
//! The climb starts with every facet at the maximum weight. Each step
//! evaluates all single-coordinate neighbors one grid step away and moves to
//! the best strictly improving one (earlier facet, then the decrement, wins
//! ties). When no neighbor improves, the epoch ends and the next epoch
//! restarts from a uniformly drawn grid point. The best point seen is kept
//! across restarts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{inferred_metrics, mean, MetricConfig, SampledQrels};
use crate::index::Facet;
use crate::pipeline::Pipeline;
use crate::ranking::{FacetWeights, MAX_FACET_WEIGHT};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    facets: Vec<Facet>,
    step: f64,
    steps: u32,
}

impl WeightGrid {
    /// Weights `0, step, 2*step, ..., 2` for each facet. `step` must divide 2.
    pub fn new(facets: Vec<Facet>, step: f64) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::Config("weight grid needs at least one facet".into()));
        }
        let mut unique = facets.clone();
        unique.sort();
        unique.dedup();
        if unique.len() != facets.len() {
            return Err(Error::Config("weight grid facets must be distinct".into()));
        }
        if !(step > 0.0 && step <= MAX_FACET_WEIGHT) {
            return Err(Error::Config(format!("grid step must lie in (0, 2], got {step}")));
        }
        let steps = (MAX_FACET_WEIGHT / step).round();
        if (steps * step - MAX_FACET_WEIGHT).abs() > 1e-9 {
            return Err(Error::Config(format!("grid step {step} does not divide [0, 2] evenly")));
        }
        Ok(Self { facets, step, steps: steps as u32 })
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Grid indices per facet run from 0 to this value.
    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn weight(&self, index: u32) -> f64 {
        f64::from(index) * MAX_FACET_WEIGHT / f64::from(self.steps)
    }

    pub fn weights(&self, point: &[u32]) -> FacetWeights {
        let pairs = self.facets.iter().zip(point).map(|(&f, &i)| (f, self.weight(i)));
        FacetWeights::new(pairs).expect("grid weights lie in [0, 2]")
    }

    /// Every grid point, in lexicographic index order.
    pub fn points(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        let dims = self.facets.len();
        let base = u64::from(self.steps) + 1;
        (0..base.pow(dims as u32)).map(move |mut code| {
            let mut point = vec![0u32; dims];
            for slot in point.iter_mut().rev() {
                *slot = (code % base) as u32;
                code /= base;
            }
            point
        })
    }

    fn neighbors(&self, point: &[u32]) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(point.len() * 2);
        for i in 0..point.len() {
            if point[i] > 0 {
                let mut p = point.to_vec();
                p[i] -= 1;
                out.push(p);
            }
            if point[i] < self.steps {
                let mut p = point.to_vec();
                p[i] += 1;
                out.push(p);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub epoch: usize,
    pub step: usize,
    pub point: Vec<u32>,
    pub weights: Vec<f64>,
    pub objective: f64,
    /// The climb moved to (or restarted at) this point.
    pub accepted: bool,
    pub restart: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerRun {
    pub seed: u64,
    pub epochs: usize,
    pub facets: Vec<Facet>,
    pub trace: Vec<TraceEntry>,
    pub best_weights: FacetWeights,
    pub best_point: Vec<u32>,
    pub best_score: f64,
}

impl OptimizerRun {
    /// `epoch,step,<facet...>,objective,accepted,restart`
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,step");
        for f in &self.facets {
            write!(out, ",{f}").unwrap();
        }
        out.push_str(",objective,accepted,restart\n");
        for e in &self.trace {
            write!(out, "{},{}", e.epoch, e.step).unwrap();
            for w in &e.weights {
                write!(out, ",{w}").unwrap();
            }
            writeln!(out, ",{:.6},{},{}", e.objective, e.accepted, e.restart).unwrap();
        }
        out
    }
}

/// Maximize `objective` over `grid`. Neighbor evaluations run in parallel;
/// results do not depend on scheduling.
pub fn hill_climb<F>(objective: F, grid: &WeightGrid, seed: u64, epochs: usize) -> OptimizerRun
where
    F: Fn(&FacetWeights) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut trace = Vec::new();
    let entry = |epoch, step, point: &[u32], objective, accepted, restart| TraceEntry {
        epoch,
        step,
        point: point.to_vec(),
        weights: point.iter().map(|&i| grid.weight(i)).collect(),
        objective,
        accepted,
        restart,
    };

    let mut current = vec![grid.steps; grid.facets.len()];
    let mut current_score = objective(&grid.weights(&current));
    cache.insert(current.clone(), current_score);
    trace.push(entry(0, 0, &current, current_score, true, false));
    let (mut best_point, mut best_score) = (current.clone(), current_score);

    for epoch in 0..epochs {
        let mut step = 0;
        loop {
            let neighbors = grid.neighbors(&current);
            let fresh: Vec<Vec<u32>> =
                neighbors.iter().filter(|p| !cache.contains_key(*p)).cloned().collect();
            let scores: Vec<f64> = fresh.par_iter().map(|p| objective(&grid.weights(p))).collect();
            cache.extend(fresh.into_iter().zip(scores));

            step += 1;
            let first = trace.len();
            let mut chosen: Option<usize> = None;
            for (i, p) in neighbors.iter().enumerate() {
                let s = cache[p];
                trace.push(entry(epoch, step, p, s, false, false));
                if s > current_score && chosen.is_none_or(|c| s > cache[&neighbors[c]]) {
                    chosen = Some(i);
                }
            }
            let Some(i) = chosen else { break };
            trace[first + i].accepted = true;
            current = neighbors[i].clone();
            current_score = cache[&current];
            if current_score > best_score {
                best_score = current_score;
                best_point = current.clone();
            }
        }
        if epoch + 1 < epochs {
            current = (0..grid.facets.len()).map(|_| rng.gen_range(0..=grid.steps)).collect();
            current_score = *cache
                .entry(current.clone())
                .or_insert_with(|| objective(&grid.weights(&current)));
            trace.push(entry(epoch + 1, 0, &current, current_score, true, true));
            if current_score > best_score {
                best_score = current_score;
                best_point = current.clone();
            }
        }
    }

    OptimizerRun {
        seed,
        epochs,
        facets: grid.facets.clone(),
        trace,
        best_weights: grid.weights(&best_point),
        best_point,
        best_score,
    }
}

/// Best grid point by exhaustive enumeration (first in lexicographic order
/// on ties).
pub fn grid_search<F>(objective: F, grid: &WeightGrid) -> (Vec<u32>, f64)
where
    F: Fn(&FacetWeights) -> f64,
{
    let mut best: Option<(Vec<u32>, f64)> = None;
    for p in grid.points() {
        let s = objective(&grid.weights(&p));
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((p, s));
        }
    }
    best.expect("grid is nonempty")
}

/// Mean infNDCG of the pipeline's run under `weights`. All-zero weights
/// retrieve nothing and score 0.
pub fn evaluate_weights(
    pipeline: &Pipeline<'_>,
    weights: &FacetWeights,
    qrels: &SampledQrels,
    config: &MetricConfig,
) -> Result<f64> {
    if !weights.is_searchable() {
        return Ok(0.0);
    }
    let run = pipeline.run_with_weights(weights)?;
    let per_topic = inferred_metrics(&run, qrels, config)?;
    if per_topic.is_empty() {
        return Err(Error::Eval("no topic with judged relevant documents to optimize on".into()));
    }
    Ok(mean(per_topic.values().map(|m| &m.inf_ndcg)))
}

/// Hill-climb the pipeline's facet weights against `qrels`.
pub fn optimize_weights(
    pipeline: &Pipeline<'_>,
    qrels: &SampledQrels,
    config: &MetricConfig,
    grid: &WeightGrid,
    seed: u64,
    epochs: usize,
) -> Result<OptimizerRun> {
    evaluate_weights(pipeline, &FacetWeights::baseline(), qrels, config)?;
    let failure = Mutex::new(None);
    let run = hill_climb(
        |w| {
            evaluate_weights(pipeline, w, qrels, config).unwrap_or_else(|e| {
                failure.lock().expect("no panics while locked").get_or_insert(e);
                f64::NEG_INFINITY
            })
        },
        grid,
        seed,
        epochs,
    );
    match failure.into_inner().expect("no panics while locked") {
        Some(e) => Err(e),
        None => Ok(run),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(WeightGrid::new(vec![Facet::Title], 0.3).is_err());
        assert!(WeightGrid::new(vec![], 0.1).is_err());
        assert!(WeightGrid::new(vec![Facet::Title, Facet::Title], 0.5).is_err());
        let g = WeightGrid::new(vec![Facet::Title, Facet::Body], 0.1).unwrap();
        assert_eq!(g.steps(), 20);
        assert_eq!(g.weight(3), 0.3);
        assert_eq!(g.weight(20), 2.0);
        assert_eq!(g.points().count(), 21 * 21);
    }

    #[test]
    fn constant_objective_stays_at_start() {
        let g = WeightGrid::new(vec![Facet::Title, Facet::Abstract], 0.5).unwrap();
        let run = hill_climb(|_| 1.0, &g, 7, 4);
        assert_eq!(run.best_point, [4, 4]);
        assert_eq!(run.best_weights.get(Facet::Title), 2.0);
        // Start, then for each epoch: one round of neighbors and a restart.
        let restarts = run.trace.iter().filter(|e| e.restart).count();
        assert_eq!(restarts, 3);
        assert!(run.trace.iter().filter(|e| e.accepted && !e.restart).count() == 1);
    }

    #[test]
    fn trace_csv_header() {
        let g = WeightGrid::new(vec![Facet::Title], 1.0).unwrap();
        let run = hill_climb(|w| -w.get(Facet::Title), &g, 1, 1);
        let csv = run.trace_csv();
        assert!(csv.starts_with("epoch,step,title,objective,accepted,restart\n"));
        assert_eq!(run.best_weights.get(Facet::Title), 0.0);
    }
}
