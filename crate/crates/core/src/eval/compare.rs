use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::metrics::{evaluate, mean, Metric, MetricConfig};
use super::qrels::SampledQrels;
use super::run::RankedRun;
use super::stats::paired_t_test;
use crate::corpus::TopicField;
use crate::error::{Error, Result};

/// Significance mark against the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    None,
    /// Rejected at 95% only.
    Dagger,
    /// Rejected at 98%.
    DoubleDagger,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::None => "",
            Mark::Dagger => "\u{2020}",
            Mark::DoubleDagger => "\u{2021}",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub field: Option<TopicField>,
    pub metric: Metric,
    pub mean: f64,
    pub mark: Mark,
    /// `None` when fewer than two topics were evaluated.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub baseline: String,
    pub topics: usize,
    pub rows: Vec<ReportRow>,
}

/// A run and the topic field its queries came from.
#[derive(Debug, Clone, Copy)]
pub struct RunEntry<'a> {
    pub run: &'a RankedRun,
    pub field: Option<TopicField>,
}

fn same_topics(a: &RankedRun, b: &RankedRun) -> Result<()> {
    let ta: BTreeSet<u32> = a.topic_ids().collect();
    let tb: BTreeSet<u32> = b.topic_ids().collect();
    if ta != tb {
        let diff: Vec<String> = ta.symmetric_difference(&tb).map(u32::to_string).collect();
        return Err(Error::Eval(format!(
            "runs '{}' and '{}' cover different topics (differing: {})",
            a.tag(),
            b.tag(),
            diff.join(" ")
        )));
    }
    Ok(())
}

/// Mean of each reported measure per run, marked where a paired t-test
/// against the baseline rejects at 95% (†) or 98% (‡). Rows follow input
/// run order, then metric order.
pub fn compare_runs(
    runs: &[RunEntry<'_>],
    baseline: &RankedRun,
    qrels: &SampledQrels,
    config: &MetricConfig,
) -> Result<ComparisonReport> {
    let base = evaluate(baseline, qrels, config)?;
    let mut rows = Vec::new();
    for entry in runs {
        same_topics(entry.run, baseline)?;
        let eval = evaluate(entry.run, qrels, config)?;
        for metric in Metric::REPORTED {
            let a: Vec<f64> = eval.values().map(|e| e.get(metric)).collect();
            let b: Vec<f64> = base.values().map(|e| e.get(metric)).collect();
            let test = (a.len() >= 2).then(|| paired_t_test(&a, &b)).transpose()?;
            let mark = match test {
                Some(t) if t.sig98 => Mark::DoubleDagger,
                Some(t) if t.sig95 => Mark::Dagger,
                _ => Mark::None,
            };
            rows.push(ReportRow {
                method: entry.run.tag().to_string(),
                field: entry.field,
                metric,
                mean: mean(&a),
                mark,
                p_value: test.map(|t| t.p_two_tailed),
            });
        }
    }
    Ok(ComparisonReport { baseline: baseline.tag().to_string(), topics: base.len(), rows })
}

impl ComparisonReport {
    /// Aligned table, one line per run, measures as columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        write!(out, "{:<width$}  {:<5}", "method", "query").unwrap();
        for m in Metric::REPORTED {
            write!(out, "  {:<8}", m.name()).unwrap();
        }
        out.push('\n');
        for chunk in self.rows.chunks(Metric::REPORTED.len()) {
            let field = chunk[0].field.map_or("-".to_string(), |f| f.to_string());
            write!(out, "{:<width$}  {:<5}", chunk[0].method, field).unwrap();
            for r in chunk {
                let cell = format!("{:.4}{}", r.mean, r.mark.symbol());
                write!(out, "  {cell:<8}").unwrap();
            }
            out.push('\n');
        }
        writeln!(
            out,
            "\n\u{2020} p < 0.05, \u{2021} p < 0.02 (paired two-sided t-test against '{}', {} topics; topics without relevant judgments excluded)",
            self.baseline, self.topics
        )
        .unwrap();
        out
    }

    /// Long format: `method,field,metric,mean,mark,p_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,field,metric,mean,mark,p_value\n");
        for r in &self.rows {
            let field = r.field.map_or(String::new(), |f| f.to_string());
            let p = r.p_value.map_or(String::new(), |p| format!("{p:.6}"));
            writeln!(out, "{},{},{},{:.4},{},{}", r.method, field, r.metric, r.mean, r.mark.symbol(), p).unwrap();
        }
        out
    }
}

/// `metric(run_a) - metric(run_b)` per evaluated topic, by topic id.
pub fn per_query_delta(
    run_a: &RankedRun,
    run_b: &RankedRun,
    qrels: &SampledQrels,
    metric: &str,
    config: &MetricConfig,
) -> Result<Vec<(u32, f64)>> {
    let metric: Metric = metric.parse()?;
    same_topics(run_a, run_b)?;
    let a = evaluate(run_a, qrels, config)?;
    let b = evaluate(run_b, qrels, config)?;
    Ok(a.iter().map(|(&t, e)| (t, e.get(metric) - b[&t].get(metric))).collect())
}

/// `topic_id,delta` CSV with a header line.
pub fn deltas_to_csv(deltas: &[(u32, f64)]) -> String {
    let mut out = String::from("topic_id,delta\n");
    for (t, d) in deltas {
        writeln!(out, "{t},{d:.4}").unwrap();
    }
    out
}
