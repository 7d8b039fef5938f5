//! Stratified sampled relevance judgments.
//!
//! Judgment lines are `topic stratum doc grade`; grade `-1` marks a pooled
//! document that was not sampled for judging. An optional strata file of
//! `topic stratum pool_size` lines gives each stratum's full pool size; when
//! it is absent a stratum's pool is exactly its listed documents. Sampling
//! rates are derived (judged / pool size), never stored.
//!
//! Standard four-column qrels (`topic 0 doc grade`) read as one fully judged
//! stratum per topic.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Grade = u8;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stratum {
    pool_size: usize,
    /// Listed pool members; `None` for pooled but unjudged.
    members: BTreeMap<String, Option<Grade>>,
}

impl Stratum {
    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn members(&self) -> impl Iterator<Item = (&str, Option<Grade>)> {
        self.members.iter().map(|(d, &g)| (d.as_str(), g))
    }

    pub fn judged(&self) -> impl Iterator<Item = (&str, Grade)> {
        self.members.iter().filter_map(|(d, g)| g.map(|g| (d.as_str(), g)))
    }

    pub fn judged_count(&self) -> usize {
        self.members.values().filter(|g| g.is_some()).count()
    }

    pub fn relevant_count(&self) -> usize {
        self.judged().filter(|&(_, g)| g >= 1).count()
    }

    /// Judged / pool size.
    pub fn sampling_rate(&self) -> f64 {
        if self.pool_size == 0 {
            0.0
        } else {
            self.judged_count() as f64 / self.pool_size as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopicQrels {
    strata: BTreeMap<String, Stratum>,
    doc_stratum: HashMap<String, String>,
}

impl TopicQrels {
    pub fn strata(&self) -> impl Iterator<Item = (&str, &Stratum)> {
        self.strata.iter().map(|(id, s)| (id.as_str(), s))
    }

    pub fn stratum(&self, id: &str) -> Option<&Stratum> {
        self.strata.get(id)
    }

    /// Stratum id of a pooled document.
    pub fn stratum_of(&self, doc: &str) -> Option<&str> {
        self.doc_stratum.get(doc).map(String::as_str)
    }

    /// Judged grade, `None` when unjudged or unpooled.
    pub fn grade(&self, doc: &str) -> Option<Grade> {
        let s = self.doc_stratum.get(doc)?;
        self.strata[s].members[doc]
    }

    pub fn is_relevant(&self, doc: &str) -> bool {
        self.grade(doc).is_some_and(|g| g >= 1)
    }

    pub fn relevant_count(&self) -> usize {
        self.strata.values().map(Stratum::relevant_count).sum()
    }

    /// Every judged grade, in no particular order.
    pub fn judged_grades(&self) -> impl Iterator<Item = Grade> + '_ {
        self.strata.values().flat_map(|s| s.judged().map(|(_, g)| g))
    }

    pub fn is_fully_judged(&self) -> bool {
        self.strata.values().all(|s| s.judged_count() == s.pool_size)
    }

    fn add(&mut self, stratum: &str, doc: &str, grade: Option<Grade>) -> Result<()> {
        if let Some(prev) = self.doc_stratum.get(doc) {
            return Err(Error::format(format!(
                "document {doc} listed twice (strata {prev} and {stratum})"
            )));
        }
        self.doc_stratum.insert(doc.to_string(), stratum.to_string());
        let s = self.strata.entry(stratum.to_string()).or_default();
        s.members.insert(doc.to_string(), grade);
        s.pool_size = s.pool_size.max(s.members.len());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampledQrels {
    topics: BTreeMap<u32, TopicQrels>,
}

impl SampledQrels {
    /// Fully judged qrels: one stratum per topic, every listed doc judged.
    pub fn fully_judged<I, S>(judgments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, S, Grade)>,
        S: AsRef<str>,
    {
        let mut q = Self::default();
        for (topic, doc, grade) in judgments {
            check_grade(grade)?;
            q.topics.entry(topic).or_default().add("0", doc.as_ref(), Some(grade))?;
        }
        Ok(q)
    }

    /// Add one stratum listing. `grade` is `None` for pooled-unjudged docs.
    pub fn add(&mut self, topic: u32, stratum: &str, doc: &str, grade: Option<Grade>) -> Result<()> {
        if let Some(g) = grade {
            check_grade(g)?;
        }
        self.topics.entry(topic).or_default().add(stratum, doc, grade)
    }

    /// Declare the full pool size of a stratum (at least its listed docs).
    pub fn set_pool_size(&mut self, topic: u32, stratum: &str, pool_size: usize) -> Result<()> {
        let s = self.topics.entry(topic).or_default().strata.entry(stratum.to_string()).or_default();
        if pool_size < s.members.len() {
            return Err(Error::format(format!(
                "pool size {pool_size} for topic {topic} stratum {stratum} is below its {} listed documents",
                s.members.len()
            )));
        }
        s.pool_size = pool_size;
        Ok(())
    }

    pub fn topic(&self, topic: u32) -> Option<&TopicQrels> {
        self.topics.get(&topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = (u32, &TopicQrels)> {
        self.topics.iter().map(|(&t, q)| (t, q))
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.topics.keys().copied()
    }

    pub fn is_fully_judged(&self) -> bool {
        self.topics.values().all(TopicQrels::is_fully_judged)
    }

    /// Parse judgment lines and, optionally, the strata sidecar.
    pub fn parse(qrels: &str, strata: Option<&str>) -> Result<Self> {
        let mut q = Self::default();
        for (i, line) in qrels.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [topic, stratum, doc, grade] = fields[..] else {
                return Err(Error::format_at(line_no, format!("expected 4 fields, found {}", fields.len())));
            };
            let topic = parse_topic(topic, line_no)?;
            let grade = match grade {
                "-1" => None,
                g => Some(
                    g.parse::<Grade>()
                        .ok()
                        .filter(|&g| g <= 2)
                        .ok_or_else(|| Error::format_at(line_no, format!("invalid grade '{g}'")))?,
                ),
            };
            q.add(topic, stratum, doc, grade).map_err(|e| relocate(e, line_no))?;
        }
        if let Some(strata) = strata {
            for (i, line) in strata.lines().enumerate() {
                let line_no = i + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                let [topic, stratum, size] = fields[..] else {
                    return Err(Error::format_at(line_no, format!("expected 3 fields, found {}", fields.len())));
                };
                let topic = parse_topic(topic, line_no)?;
                let size: usize = size
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::format_at(line_no, format!("invalid pool size '{size}'")))?;
                q.set_pool_size(topic, stratum, size).map_err(|e| relocate(e, line_no))?;
            }
        }
        Ok(q)
    }

    /// Judgment lines (`-1` for unjudged pool members).
    pub fn to_qrels_string(&self) -> String {
        let mut out = String::new();
        for (topic, tq) in &self.topics {
            for (sid, s) in &tq.strata {
                for (doc, g) in &s.members {
                    let g = g.map_or("-1".to_string(), |g| g.to_string());
                    writeln!(out, "{topic} {sid} {doc} {g}").expect("writing to a String");
                }
            }
        }
        out
    }

    /// Strata sidecar lines.
    pub fn to_strata_string(&self) -> String {
        let mut out = String::new();
        for (topic, tq) in &self.topics {
            for (sid, s) in &tq.strata {
                writeln!(out, "{topic} {sid} {}", s.pool_size).expect("writing to a String");
            }
        }
        out
    }
}

fn check_grade(g: Grade) -> Result<()> {
    if g > 2 {
        return Err(Error::format(format!("grade {g} outside 0..=2")));
    }
    Ok(())
}

fn parse_topic(s: &str, line_no: usize) -> Result<u32> {
    s.parse().map_err(|_| Error::format_at(line_no, format!("invalid topic '{s}'")))
}

fn relocate(e: Error, line_no: usize) -> Error {
    match e {
        Error::Format { line: None, message } => Error::Format { line: Some(line_no), message },
        other => other,
    }
}

/// Read judgments and an optional strata file from disk.
pub fn read_qrels(
    qrels: impl AsRef<std::path::Path>,
    strata: Option<&std::path::Path>,
) -> Result<SampledQrels> {
    let q = std::fs::read_to_string(qrels)?;
    let s = strata.map(std::fs::read_to_string).transpose()?;
    SampledQrels::parse(&q, s.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trec_qrels_are_fully_judged() {
        let q = SampledQrels::parse("1 0 d1 1\n1 0 d2 0\n2 0 d3 2\n", None).unwrap();
        assert!(q.is_fully_judged());
        assert_eq!(q.topic(1).unwrap().relevant_count(), 1);
        assert_eq!(q.topic(2).unwrap().grade("d3"), Some(2));
    }

    #[test]
    fn strata_and_rates() {
        let q = SampledQrels::parse("1 a d1 1\n1 a d2 -1\n1 b d3 0\n", Some("1 a 4\n1 b 1\n")).unwrap();
        let t = q.topic(1).unwrap();
        let a = t.stratum("a").unwrap();
        assert_eq!(a.pool_size(), 4);
        assert_eq!(a.judged_count(), 1);
        assert_eq!(a.sampling_rate(), 0.25);
        assert_eq!(t.grade("d2"), None);
        assert_eq!(t.stratum_of("d2"), Some("a"));
        assert!(!q.is_fully_judged());
    }

    #[test]
    fn round_trip_text() {
        let q = SampledQrels::parse("1 a d1 1\n1 a d2 -1\n1 b d3 0\n", Some("1 a 4\n1 b 1\n")).unwrap();
        let back = SampledQrels::parse(&q.to_qrels_string(), Some(&q.to_strata_string())).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn errors() {
        assert!(SampledQrels::parse("1 a d1\n", None).is_err());
        assert!(SampledQrels::parse("1 a d1 3\n", None).is_err());
        assert!(SampledQrels::parse("1 a d1 1\n1 b d1 0\n", None).is_err());
        let err = SampledQrels::parse("1 a d1 1\n1 a d2 1\n", Some("1 a 1\n")).unwrap_err();
        assert!(matches!(err, Error::Format { line: Some(1), .. }));
    }
}
