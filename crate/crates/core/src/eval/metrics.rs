//! Exact and inferred effectiveness measures.
//!
//! Documents without a judgment count as nonrelevant for the exact measures.
//! The inferred measures extrapolate from each stratum's judged sample to
//! its full pool. Topics without any judged-relevant document are left out
//! of every result.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::qrels::{Grade, SampledQrels, TopicQrels};
use super::run::RankedRun;
use crate::error::{Error, Result};
use crate::ranking::ScoredDoc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Depth for precision-at-k.
    pub precision_cutoff: usize,
    pub alpha_95: f64,
    pub alpha_98: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { precision_cutoff: 10, alpha_95: 0.05, alpha_98: 0.02 }
    }
}

impl MetricConfig {
    /// `2^grade - 1`
    pub fn gain(&self, grade: Grade) -> f64 {
        2f64.powi(i32::from(grade)) - 1.0
    }

    /// `log2(rank + 1)` for 1-based ranks.
    pub fn discount(&self, rank: usize) -> f64 {
        ((rank + 1) as f64).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    InfNdcg,
    InfAp,
    RPrec,
    PAt10,
    Ap,
    Ndcg,
}

impl Metric {
    /// The four measures reported in comparison tables, main measure first.
    pub const REPORTED: [Metric; 4] = [Metric::InfNdcg, Metric::InfAp, Metric::RPrec, Metric::PAt10];

    pub fn name(self) -> &'static str {
        match self {
            Metric::InfNdcg => "infNDCG",
            Metric::InfAp => "infAP",
            Metric::RPrec => "R-Prec",
            Metric::PAt10 => "P@10",
            Metric::Ap => "AP",
            Metric::Ndcg => "NDCG",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match norm.as_str() {
            "infndcg" => Metric::InfNdcg,
            "infap" => Metric::InfAp,
            "rprec" => Metric::RPrec,
            "p10" => Metric::PAt10,
            "ap" | "map" => Metric::Ap,
            "ndcg" => Metric::Ndcg,
            _ => return Err(Error::Config(format!("unknown metric '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMetrics {
    pub p_at_k: f64,
    pub r_prec: f64,
    pub ap: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferredMetrics {
    pub inf_ap: f64,
    pub inf_ndcg: f64,
}

/// Exact measures for one topic; `None` when the topic has no relevant judgment.
pub fn exact_topic(ranked: &[ScoredDoc], qrels: &TopicQrels, config: &MetricConfig) -> Option<ExactMetrics> {
    let r = qrels.relevant_count();
    if r == 0 {
        return None;
    }
    let grades: Vec<Grade> = ranked.iter().map(|d| qrels.grade(&d.doc_id).unwrap_or(0)).collect();
    let relevant_in = |depth: usize| grades.iter().take(depth).filter(|&&g| g >= 1).count();

    let mut hits = 0usize;
    let mut ap = 0.0;
    let mut dcg = 0.0;
    for (i, &g) in grades.iter().enumerate() {
        let rank = i + 1;
        if g >= 1 {
            hits += 1;
            ap += hits as f64 / rank as f64;
        }
        dcg += config.gain(g) / config.discount(rank);
    }
    let mut ideal: Vec<Grade> = qrels.judged_grades().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal.iter().enumerate().map(|(i, &g)| config.gain(g) / config.discount(i + 1)).sum();

    Some(ExactMetrics {
        p_at_k: relevant_in(config.precision_cutoff) as f64 / config.precision_cutoff as f64,
        r_prec: relevant_in(r) as f64 / r as f64,
        ap: ap / r as f64,
        ndcg: dcg / idcg,
    })
}

/// P@k, R-Prec, AP and NDCG per evaluated topic.
pub fn exact_metrics(run: &RankedRun, qrels: &SampledQrels, config: &MetricConfig) -> BTreeMap<u32, ExactMetrics> {
    qrels
        .topics()
        .filter_map(|(t, q)| exact_topic(run.topic(t), q, config).map(|m| (t, m)))
        .collect()
}

/// Precision estimate among a stratum's docs above the current rank. When
/// nothing there is judged this is the limit of the `(rel + e) / (judged + 2e)`
/// smoothing, 1/2.
fn stratum_precision(rel: usize, judged: usize) -> f64 {
    if judged == 0 {
        0.5
    } else {
        rel as f64 / judged as f64
    }
}

/// DCG of an ideal ranking built from possibly fractional grade counts,
/// highest grade first. A rank covers the unit interval `[r-1, r)` of
/// ranking mass and earns the gain of whatever grade fills it.
fn fractional_ideal_dcg(counts: &[(Grade, f64)], config: &MetricConfig) -> f64 {
    let mut total = 0.0;
    let mut start = 0.0f64;
    for &(grade, count) in counts {
        let gain = config.gain(grade);
        let end = start + count;
        if gain > 0.0 {
            let mut rank = start.floor() as usize + 1;
            while (rank as f64 - 1.0) < end {
                let lo = start.max(rank as f64 - 1.0);
                let hi = end.min(rank as f64);
                total += gain * (hi - lo) / config.discount(rank);
                rank += 1;
            }
        }
        start = end;
    }
    total
}

/// Inferred AP and NDCG for one topic; `None` when no judged-relevant document exists.
pub fn inferred_topic(
    ranked: &[ScoredDoc],
    qrels: &TopicQrels,
    config: &MetricConfig,
) -> Result<Option<InferredMetrics>> {
    struct StratumStats {
        scale: f64,
        pooled_above: usize,
        judged_above: usize,
        relevant_above: usize,
    }
    let mut stats: HashMap<&str, StratumStats> = HashMap::new();
    let mut est_relevant = 0.0;
    let mut grade_mass: BTreeMap<Grade, f64> = BTreeMap::new();
    for (id, s) in qrels.strata() {
        let judged = s.judged_count();
        if judged == 0 {
            return Err(Error::Eval(format!("stratum {id} has no judged documents")));
        }
        let scale = s.pool_size() as f64 / judged as f64;
        est_relevant += scale * s.relevant_count() as f64;
        for (_, g) in s.judged() {
            *grade_mass.entry(g).or_default() += scale;
        }
        stats.insert(id, StratumStats { scale, pooled_above: 0, judged_above: 0, relevant_above: 0 });
    }
    if qrels.relevant_count() == 0 {
        return Ok(None);
    }

    let mut ap_sum = 0.0;
    let mut dcg = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        let k = i + 1;
        let Some(sid) = qrels.stratum_of(&d.doc_id) else { continue };
        let grade = qrels.grade(&d.doc_id);
        let scale = stats[sid].scale;
        if let Some(g) = grade {
            dcg += scale * config.gain(g) / config.discount(k);
            if g >= 1 {
                let above: f64 = stats
                    .values()
                    .map(|s| s.pooled_above as f64 * stratum_precision(s.relevant_above, s.judged_above))
                    .sum();
                ap_sum += scale * (1.0 + above) / k as f64;
            }
        }
        let s = stats.get_mut(sid).expect("stratum registered");
        s.pooled_above += 1;
        if let Some(g) = grade {
            s.judged_above += 1;
            if g >= 1 {
                s.relevant_above += 1;
            }
        }
    }

    let ideal: Vec<(Grade, f64)> = grade_mass.into_iter().rev().collect();
    let idcg = fractional_ideal_dcg(&ideal, config);
    Ok(Some(InferredMetrics { inf_ap: ap_sum / est_relevant, inf_ndcg: dcg / idcg }))
}

/// infAP and infNDCG per evaluated topic.
pub fn inferred_metrics(
    run: &RankedRun,
    qrels: &SampledQrels,
    config: &MetricConfig,
) -> Result<BTreeMap<u32, InferredMetrics>> {
    let mut out = BTreeMap::new();
    for (t, q) in qrels.topics() {
        if let Some(m) = inferred_topic(run.topic(t), q, config)? {
            out.insert(t, m);
        }
    }
    Ok(out)
}

/// Every measure for every evaluated topic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicEvaluation {
    pub exact: ExactMetrics,
    pub inferred: InferredMetrics,
}

impl TopicEvaluation {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::InfNdcg => self.inferred.inf_ndcg,
            Metric::InfAp => self.inferred.inf_ap,
            Metric::RPrec => self.exact.r_prec,
            Metric::PAt10 => self.exact.p_at_k,
            Metric::Ap => self.exact.ap,
            Metric::Ndcg => self.exact.ndcg,
        }
    }
}

pub fn evaluate(
    run: &RankedRun,
    qrels: &SampledQrels,
    config: &MetricConfig,
) -> Result<BTreeMap<u32, TopicEvaluation>> {
    let exact = exact_metrics(run, qrels, config);
    let inferred = inferred_metrics(run, qrels, config)?;
    Ok(exact
        .into_iter()
        .filter_map(|(t, e)| inferred.get(&t).map(|&i| (t, TopicEvaluation { exact: e, inferred: i })))
        .collect())
}

/// One metric per evaluated topic, ordered by topic id.
pub fn per_topic(
    run: &RankedRun,
    qrels: &SampledQrels,
    metric: Metric,
    config: &MetricConfig,
) -> Result<BTreeMap<u32, f64>> {
    Ok(evaluate(run, qrels, config)?.into_iter().map(|(t, e)| (t, e.get(metric))).collect())
}

/// Mean in ascending topic order; 0 for an empty set.
pub fn mean<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked(ids: &[&str]) -> Vec<ScoredDoc> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| ScoredDoc { doc_id: id.to_string(), score: 100.0 - i as f64 })
            .collect()
    }

    fn qrels(judgments: &[(&str, Grade)]) -> SampledQrels {
        SampledQrels::fully_judged(judgments.iter().map(|&(d, g)| (1, d, g))).unwrap()
    }

    #[test]
    fn perfect_prefix() {
        let q = qrels(&[("a", 1), ("b", 1), ("c", 1), ("x", 0)]);
        let docs = ranked(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let m = exact_topic(&docs, q.topic(1).unwrap(), &MetricConfig::default()).unwrap();
        assert_eq!(m.ap, 1.0);
        assert_eq!(m.r_prec, 1.0);
        assert!((m.p_at_k - 0.3).abs() < 1e-12);
        assert!((m.ndcg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graded_ndcg() {
        let q = qrels(&[("a", 1), ("b", 0), ("c", 2)]);
        let m = exact_topic(&ranked(&["a", "b", "c"]), q.topic(1).unwrap(), &MetricConfig::default()).unwrap();
        let expected = 2.5 / (3.0 + 1.0 / 3f64.log2());
        assert!((m.ndcg - expected).abs() < 1e-12);
        assert!((m.ndcg - 0.68852).abs() < 1e-5);
    }

    #[test]
    fn empty_run_scores_zero() {
        let q = qrels(&[("a", 1)]);
        let m = exact_topic(&[], q.topic(1).unwrap(), &MetricConfig::default()).unwrap();
        assert_eq!((m.p_at_k, m.r_prec, m.ap, m.ndcg), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn no_relevant_topic_excluded() {
        let q = qrels(&[("a", 0)]);
        assert!(exact_topic(&ranked(&["a"]), q.topic(1).unwrap(), &MetricConfig::default()).is_none());
        assert!(inferred_topic(&ranked(&["a"]), q.topic(1).unwrap(), &MetricConfig::default()).unwrap().is_none());
    }

    #[test]
    fn estimated_relevant_count() {
        // One stratum, pool 4, judged 2, one relevant: R-hat = 4 * 1/2 = 2.
        let q = SampledQrels::parse("1 s a 1\n1 s b 0\n1 s c -1\n1 s d -1\n", None).unwrap();
        let m = inferred_topic(&ranked(&["a"]), q.topic(1).unwrap(), &MetricConfig::default())
            .unwrap()
            .unwrap();
        // a at rank 1 contributes scale 2 * 1 -> infAP = 2 / R-hat.
        assert!((m.inf_ap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unjudged_stratum_is_error() {
        let q = SampledQrels::parse("1 s a 1\n1 t b -1\n", None).unwrap();
        assert!(inferred_topic(&ranked(&["a"]), q.topic(1).unwrap(), &MetricConfig::default()).is_err());
    }

    #[test]
    fn fractional_ideal_matches_integer_ideal() {
        let c = MetricConfig::default();
        let frac = fractional_ideal_dcg(&[(2, 1.0), (1, 2.0)], &c);
        let int = 3.0 / c.discount(1) + 1.0 / c.discount(2) + 1.0 / c.discount(3);
        assert!((frac - int).abs() < 1e-12);
        let half = fractional_ideal_dcg(&[(1, 0.5)], &c);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn metric_names_parse() {
        for m in [Metric::InfNdcg, Metric::InfAp, Metric::RPrec, Metric::PAt10, Metric::Ap, Metric::Ndcg] {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("bogus".parse::<Metric>().is_err());
    }
}
