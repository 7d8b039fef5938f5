use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ranking::ScoredDoc;

/// Maximum documents kept per topic.
pub const MAX_RUN_DEPTH: usize = 1000;

/// Scores compare at the four-decimal precision written to run files, so
/// in-memory order and file order always agree.
fn score_key(score: f64) -> i64 {
    (score * 1e4).round() as i64
}

fn canonical_order(docs: &mut [ScoredDoc]) {
    docs.sort_by(|a, b| {
        score_key(b.score).cmp(&score_key(a.score)).then_with(|| a.doc_id.cmp(&b.doc_id))
    });
}

/// Per-topic ranked document lists under one run tag. Ranks are implicit
/// (1-based position).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedRun {
    tag: String,
    topics: BTreeMap<u32, Vec<ScoredDoc>>,
}

impl RankedRun {
    pub fn new(tag: impl Into<String>) -> Result<Self> {
        let tag = tag.into();
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("run tag '{tag}' must be nonempty without whitespace")));
        }
        Ok(Self { tag, topics: BTreeMap::new() })
    }

    /// Add a topic's results, reordering by score (descending) then doc id.
    pub fn insert_topic(&mut self, topic: u32, mut docs: Vec<ScoredDoc>) -> Result<()> {
        let mut seen = HashSet::new();
        if let Some(d) = docs.iter().find(|d| !seen.insert(d.doc_id.as_str())) {
            return Err(Error::format(format!("duplicate document {} for topic {topic}", d.doc_id)));
        }
        if let Some(d) = docs.iter().find(|d| !d.score.is_finite()) {
            return Err(Error::format(format!("non-finite score for {} in topic {topic}", d.doc_id)));
        }
        canonical_order(&mut docs);
        docs.truncate(MAX_RUN_DEPTH);
        self.topics.insert(topic, docs);
        Ok(())
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Result<Self> {
        let renamed = RankedRun::new(tag)?;
        self.tag = renamed.tag;
        Ok(self)
    }

    /// Ranked documents for a topic; empty if the run has none.
    pub fn topic(&self, topic: u32) -> &[ScoredDoc] {
        self.topics.get(&topic).map_or(&[], Vec::as_slice)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.topics.keys().copied()
    }

    pub fn topics(&self) -> impl Iterator<Item = (u32, &[ScoredDoc])> {
        self.topics.iter().map(|(&t, d)| (t, d.as_slice()))
    }

    /// Total (topic, doc) entries.
    pub fn len(&self) -> usize {
        self.topics.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `topic Q0 doc_id rank score run_tag` lines, scores to four decimals.
    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (topic, docs) in &self.topics {
            let mut docs = docs.clone();
            canonical_order(&mut docs);
            for (i, d) in docs.iter().enumerate() {
                writeln!(out, "{topic} Q0 {} {} {:.4} {}", d.doc_id, i + 1, d.score, self.tag)
                    .expect("writing to a String");
            }
        }
        out
    }

    /// Parse a run file. Ranks must run 1, 2, ... per topic with
    /// non-increasing scores.
    pub fn parse(raw: &str) -> Result<Self> {
        let mut tag: Option<String> = None;
        let mut topics: BTreeMap<u32, Vec<ScoredDoc>> = BTreeMap::new();
        let mut seen: HashSet<(u32, String)> = HashSet::new();
        for (i, line) in raw.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [topic, _q0, doc, rank, score, run_tag] = fields[..] else {
                return Err(Error::format_at(line_no, format!("expected 6 fields, found {}", fields.len())));
            };
            let topic: u32 = topic
                .parse()
                .map_err(|_| Error::format_at(line_no, format!("invalid topic '{topic}'")))?;
            let rank: usize = rank
                .parse()
                .map_err(|_| Error::format_at(line_no, format!("invalid rank '{rank}'")))?;
            let score: f64 = score
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite())
                .ok_or_else(|| Error::format_at(line_no, format!("invalid score '{score}'")))?;
            match &tag {
                None => tag = Some(run_tag.to_string()),
                Some(t) if t != run_tag => {
                    return Err(Error::format_at(line_no, format!("run tag '{run_tag}' differs from '{t}'")))
                }
                Some(_) => {}
            }
            if !seen.insert((topic, doc.to_string())) {
                return Err(Error::format_at(line_no, format!("duplicate document {doc} for topic {topic}")));
            }
            let docs = topics.entry(topic).or_default();
            if rank != docs.len() + 1 {
                return Err(Error::format_at(
                    line_no,
                    format!("rank {rank} for topic {topic}, expected {}", docs.len() + 1),
                ));
            }
            if docs.last().is_some_and(|prev| score > prev.score) {
                return Err(Error::format_at(line_no, "score increases with rank"));
            }
            docs.push(ScoredDoc { doc_id: doc.to_string(), score });
        }
        let mut run = RankedRun::new(tag.unwrap_or_else(|| "empty".to_string()))?;
        run.topics = topics;
        Ok(run)
    }
}

/// Read a run file from disk.
pub fn read_run(path: impl AsRef<std::path::Path>) -> Result<RankedRun> {
    RankedRun::parse(&std::fs::read_to_string(path)?)
}

/// Write a run file atomically.
pub fn write_run(run: &RankedRun, path: impl AsRef<std::path::Path>) -> Result<()> {
    crate::io::write_atomic(path.as_ref(), run.to_trec_string().as_bytes())
}
