//! Documents, topics, concept lexicons and embedding tables, and the plain
//! text formats they are read from.
//!
//! Documents use a line-tagged format. Each record is a run of `#tag: value`
//! lines, records separated by a line holding only `---`. A tag's value
//! continues over following untagged lines until the next tag.
//!
//! ```text
//! #id: PMC100
//! #title: Sepsis in the elderly
//! #abstract: ...
//! #body: first paragraph
//! second paragraph
//! #mesh: Sepsis, Aged
//! ---
//! ```

mod ascii;
mod embeddings;
mod lexicon;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

pub use ascii::to_ascii;
pub use embeddings::{cosine, EmbeddingTable, Neighbor};
pub use lexicon::{ConceptLexicon, LexiconEntry, DEFAULT_ALLOWED_TYPES};

use crate::error::{Error, Result};
use crate::text::extract_concepts;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub abstract_text: String,
    pub body: String,
    pub mesh_keywords: Vec<String>,
    pub concept_ids: Vec<String>,
}

impl Document {
    /// Title, abstract and body, in that order.
    pub fn text_fields(&self) -> [&str; 3] {
        [&self.title, &self.abstract_text, &self.body]
    }
}

/// Documents addressable by id, in input order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if by_id.insert(d.doc_id.clone(), i).is_some() {
                return Err(Error::format(format!("duplicate document id '{}'", d.doc_id)));
            }
        }
        Ok(Self { docs, by_id })
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopicType {
    Treatment,
    Diagnosis,
    Test,
    Unknown,
}

impl FromStr for TopicType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "treatment" => Ok(TopicType::Treatment),
            "diagnosis" => Ok(TopicType::Diagnosis),
            "test" => Ok(TopicType::Test),
            "unknown" | "" => Ok(TopicType::Unknown),
            other => Err(Error::format(format!("unknown topic type '{other}'"))),
        }
    }
}

impl fmt::Display for TopicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicType::Treatment => "treatment",
            TopicType::Diagnosis => "diagnosis",
            TopicType::Test => "test",
            TopicType::Unknown => "unknown",
        })
    }
}

/// Which of a topic's three texts is used as the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopicField {
    Note,
    Desc,
    Sum,
}

impl TopicField {
    pub const ALL: [TopicField; 3] = [TopicField::Note, TopicField::Desc, TopicField::Sum];
}

impl FromStr for TopicField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "note" => Ok(TopicField::Note),
            "desc" | "description" => Ok(TopicField::Desc),
            "sum" | "summary" => Ok(TopicField::Sum),
            other => Err(Error::Config(format!("unknown topic field '{other}'"))),
        }
    }
}

impl fmt::Display for TopicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicField::Note => "note",
            TopicField::Desc => "desc",
            TopicField::Sum => "sum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub topic_id: u32,
    pub note: String,
    pub description: String,
    pub summary: String,
    pub topic_type: TopicType,
}

impl Topic {
    pub fn text(&self, field: TopicField) -> &str {
        match field {
            TopicField::Note => &self.note,
            TopicField::Desc => &self.description,
            TopicField::Sum => &self.summary,
        }
    }
}

/// One tagged record: (tag, value, line of the tag).
type Record = Vec<(String, String, usize)>;

fn tag_of(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('#')?;
    let colon = rest.find(':')?;
    let tag = &rest[..colon];
    (!tag.is_empty() && tag.bytes().all(|b| b.is_ascii_lowercase())).then(|| (tag, &rest[colon + 1..]))
}

/// Split tagged text into records. `new_record_tag`, when set, also starts a
/// new record whenever it appears.
fn records(text: &str, known: &[&str], new_record_tag: Option<&str>) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let mut current: Record = Vec::new();
    let mut values: Vec<Vec<&str>> = Vec::new();

    let flush = |current: &mut Record, values: &mut Vec<Vec<&str>>, out: &mut Vec<Record>| {
        for (field, lines) in current.iter_mut().zip(values.drain(..)) {
            field.1 = lines.join("\n").trim().to_string();
        }
        if !current.is_empty() {
            out.push(std::mem::take(current));
        }
    };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim() == "---" {
            flush(&mut current, &mut values, &mut out);
            continue;
        }
        match tag_of(line) {
            Some((tag, value)) => {
                if !known.contains(&tag) {
                    return Err(Error::format_at(line_no, format!("unknown tag #{tag}:")));
                }
                if Some(tag) == new_record_tag {
                    flush(&mut current, &mut values, &mut out);
                }
                if let Some((_, _, first)) = current.iter().find(|(t, _, _)| t == tag) {
                    return Err(Error::format_at(
                        line_no,
                        format!("tag #{tag}: repeated within a record (first on line {first})"),
                    ));
                }
                current.push((tag.to_string(), String::new(), line_no));
                values.push(vec![value]);
            }
            None => match values.last_mut() {
                Some(lines) => lines.push(line),
                None if line.trim().is_empty() => {}
                None => return Err(Error::format_at(line_no, "text outside of any tag")),
            },
        }
    }
    flush(&mut current, &mut values, &mut out);
    Ok(out)
}

fn split_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn dedup_in_order(items: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

const DOC_TAGS: &[&str] = &["id", "title", "abstract", "body", "mesh", "concepts"];

fn document_from_record(record: Record) -> Result<Document> {
    let first_line = record.first().map_or(1, |r| r.2);
    let mut doc = Document::default();
    for (tag, value, _) in record {
        match tag.as_str() {
            "id" => doc.doc_id = value,
            "title" => doc.title = value,
            "abstract" => doc.abstract_text = value,
            "body" => doc.body = value,
            "mesh" => doc.mesh_keywords = split_list(&value),
            "concepts" => doc.concept_ids = dedup_in_order(split_list(&value)),
            _ => unreachable!("tags are checked against DOC_TAGS"),
        }
    }
    if doc.doc_id.is_empty() {
        return Err(Error::format_at(first_line, "document without #id:"));
    }
    if doc.doc_id.chars().any(char::is_whitespace) {
        return Err(Error::format_at(first_line, format!("document id '{}' contains whitespace", doc.doc_id)));
    }
    Ok(doc)
}

/// Parse a single tagged document.
pub fn parse_document(raw: &[u8]) -> Result<Document> {
    let mut docs = parse_documents(raw)?;
    match docs.len() {
        0 => Err(Error::format("document without #id:")),
        1 => Ok(docs.pop().expect("one document")),
        n => Err(Error::format(format!("expected one document, found {n}"))),
    }
}

/// Parse a `---`-separated stream of tagged documents, in input order.
pub fn parse_documents(raw: &[u8]) -> Result<Vec<Document>> {
    let text = to_ascii(&String::from_utf8_lossy(raw));
    let docs = records(&text, DOC_TAGS, None)?
        .into_iter()
        .map(document_from_record)
        .collect::<Result<Vec<_>>>()?;
    let mut ids = HashSet::new();
    if let Some(dup) = docs.iter().find(|d| !ids.insert(d.doc_id.as_str())) {
        return Err(Error::format(format!("duplicate document id '{}'", dup.doc_id)));
    }
    Ok(docs)
}

/// Write one document in the tagged format (no trailing separator).
pub fn serialize_document(doc: &Document) -> String {
    let field = |tag: &str, value: &str| {
        if value.is_empty() {
            format!("#{tag}:\n")
        } else {
            format!("#{tag}: {value}\n")
        }
    };
    [
        field("id", &doc.doc_id),
        field("title", &doc.title),
        field("abstract", &doc.abstract_text),
        field("body", &doc.body),
        field("mesh", &doc.mesh_keywords.join(", ")),
        field("concepts", &doc.concept_ids.join(", ")),
    ]
    .concat()
}

/// Write documents separated by `---` lines.
pub fn serialize_documents(docs: &[Document]) -> String {
    docs.iter().map(serialize_document).collect::<Vec<_>>().join("---\n")
}

const TOPIC_TAGS: &[&str] = &["topic", "type", "note", "desc", "summary"];

/// Parse topics in file order. A `#topic:` tag starts each record.
pub fn load_topics(raw: &[u8]) -> Result<Vec<Topic>> {
    let text = to_ascii(&String::from_utf8_lossy(raw));
    let mut topics: Vec<Topic> = Vec::new();
    for record in records(&text, TOPIC_TAGS, Some("topic"))? {
        let line = record.first().map_or(1, |r| r.2);
        let mut id = None;
        let mut topic = Topic {
            topic_id: 0,
            note: String::new(),
            description: String::new(),
            summary: String::new(),
            topic_type: TopicType::Unknown,
        };
        for (tag, value, tag_line) in record {
            match tag.as_str() {
                "topic" => {
                    id = Some(value.parse::<u32>().ok().filter(|&n| n > 0).ok_or_else(|| {
                        Error::format_at(tag_line, format!("topic id '{value}' is not a positive integer"))
                    })?)
                }
                "type" => {
                    topic.topic_type = value.parse().map_err(|e: Error| Error::format_at(tag_line, e.to_string()))?
                }
                "note" => topic.note = value,
                "desc" => topic.description = value,
                "summary" => topic.summary = value,
                _ => unreachable!("tags are checked against TOPIC_TAGS"),
            }
        }
        topic.topic_id = id.ok_or_else(|| Error::format_at(line, "topic record without #topic:"))?;
        if topic.note.is_empty() && topic.description.is_empty() && topic.summary.is_empty() {
            return Err(Error::format_at(line, format!("topic {} has no text", topic.topic_id)));
        }
        if topics.iter().any(|t| t.topic_id == topic.topic_id) {
            return Err(Error::format_at(line, format!("duplicate topic id {}", topic.topic_id)));
        }
        topics.push(topic);
    }
    Ok(topics)
}

/// Write topics in the tagged topic format.
pub fn serialize_topics(topics: &[Topic]) -> String {
    let mut out = String::new();
    for t in topics {
        out.push_str(&format!("#topic: {}\n#type: {}\n", t.topic_id, t.topic_type));
        for (tag, value) in [("note", &t.note), ("desc", &t.description), ("summary", &t.summary)] {
            out.push_str(&format!("#{tag}: {value}\n"));
        }
    }
    out
}

/// Keyword map lines: `doc_id|keyword, keyword, ...`.
pub fn load_keyword_map(raw: &[u8]) -> Result<HashMap<String, Vec<String>>> {
    let text = to_ascii(&String::from_utf8_lossy(raw));
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, keywords) = line
            .split_once('|')
            .ok_or_else(|| Error::format_at(i + 1, "expected `doc_id|keywords`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::format_at(i + 1, "empty document id"));
        }
        if map.insert(id.to_string(), split_list(keywords)).is_some() {
            return Err(Error::format_at(i + 1, format!("duplicate document id '{id}'")));
        }
    }
    Ok(map)
}

/// Set keywords from the map (empty when absent) and concept ids from
/// extraction over title, abstract and body.
pub fn augment_document(
    doc: &Document,
    keywords: &HashMap<String, Vec<String>>,
    lexicon: &ConceptLexicon,
) -> Document {
    let mut out = doc.clone();
    out.mesh_keywords = keywords.get(&doc.doc_id).cloned().unwrap_or_default();
    let concepts = doc
        .text_fields()
        .into_iter()
        .flat_map(|text| extract_concepts(text, lexicon))
        .map(|c| c.concept_id)
        .collect();
    out.concept_ids = dedup_in_order(concepts);
    out
}
