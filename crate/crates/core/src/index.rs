//! Multi-facet inverted index with per-facet length statistics.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::text::{analyze, tokenize, AnalyzerConfig};

/// A separately indexed document field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facet {
    Title,
    Abstract,
    Body,
    Mesh,
    Concepts,
    /// Title, abstract and body token streams concatenated.
    All,
}

impl Facet {
    pub const ALL: [Facet; 6] =
        [Facet::Title, Facet::Abstract, Facet::Body, Facet::Mesh, Facet::Concepts, Facet::All];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Facet::Title => "title",
            Facet::Abstract => "abstract",
            Facet::Body => "body",
            Facet::Mesh => "mesh",
            Facet::Concepts => "concepts",
            Facet::All => "all",
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Facet::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown facet '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct FacetIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    lengths: Vec<u32>,
    total_length: u64,
}

/// Immutable after build; safe to share between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    analyzer: AnalyzerConfig,
    doc_ids: Vec<String>,
    ordinals: HashMap<String, u32>,
    facets: [FacetIndex; 6],
}

/// Per-facet token streams of one document.
fn facet_tokens(doc: &Document, config: &AnalyzerConfig) -> [Vec<String>; 6] {
    let title = analyze(&doc.title, config);
    let abstract_text = analyze(&doc.abstract_text, config);
    let body = analyze(&doc.body, config);
    let mesh = doc.mesh_keywords.iter().flat_map(|k| analyze(k, config)).collect();
    let concepts = doc.concept_ids.clone();
    let all = [title.as_slice(), &abstract_text, &body].concat();
    [title, abstract_text, body, mesh, concepts, all]
}

impl InvertedIndex {
    fn empty(analyzer: AnalyzerConfig) -> Self {
        Self { analyzer, doc_ids: Vec::new(), ordinals: HashMap::new(), facets: Default::default() }
    }

    /// Build over `docs`; ordinals follow input order.
    pub fn build(docs: &[Document], config: &AnalyzerConfig) -> Result<Self> {
        let streams: Vec<_> = docs.par_iter().map(|d| facet_tokens(d, config)).collect();
        let mut index = Self::empty(config.clone());
        for (doc, tokens) in docs.iter().zip(streams) {
            index.push(&doc.doc_id, tokens)?;
        }
        Ok(index)
    }

    /// Build `parts` sub-indexes concurrently and merge them in order.
    pub fn build_partitioned(docs: &[Document], config: &AnalyzerConfig, parts: usize) -> Result<Self> {
        let chunk = docs.len().div_ceil(parts.max(1)).max(1);
        let pieces = docs
            .par_chunks(chunk)
            .map(|c| Self::build(c, config))
            .collect::<Result<Vec<_>>>()?;
        pieces.into_iter().try_fold(Self::empty(config.clone()), Self::merge)
    }

    fn push(&mut self, doc_id: &str, tokens: [Vec<String>; 6]) -> Result<()> {
        let ordinal = u32::try_from(self.doc_ids.len())
            .map_err(|_| Error::Index("too many documents".into()))?;
        if self.ordinals.insert(doc_id.to_string(), ordinal).is_some() {
            return Err(Error::Index(format!("duplicate document id '{doc_id}'")));
        }
        self.doc_ids.push(doc_id.to_string());
        for (facet, terms) in self.facets.iter_mut().zip(tokens) {
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in &terms {
                *counts.entry(t.clone()).or_default() += 1;
            }
            for (term, tf) in counts {
                facet.postings.entry(term).or_default().push(Posting { doc: ordinal, tf });
            }
            facet.lengths.push(terms.len() as u32);
            facet.total_length += terms.len() as u64;
        }
        Ok(())
    }

    /// Append `other`'s documents after this index's documents.
    pub fn merge(mut self, other: InvertedIndex) -> Result<Self> {
        if self.analyzer != other.analyzer {
            return Err(Error::Index("cannot merge indexes built with different analyzers".into()));
        }
        let offset = self.doc_ids.len() as u32;
        for id in other.doc_ids {
            let ordinal = self.doc_ids.len() as u32;
            if self.ordinals.insert(id.clone(), ordinal).is_some() {
                return Err(Error::Index(format!("duplicate document id '{id}'")));
            }
            self.doc_ids.push(id);
        }
        for (mine, theirs) in self.facets.iter_mut().zip(other.facets) {
            for (term, list) in theirs.postings {
                let shifted = list.into_iter().map(|p| Posting { doc: p.doc + offset, tf: p.tf });
                mine.postings.entry(term).or_default().extend(shifted);
            }
            mine.lengths.extend(theirs.lengths);
            mine.total_length += theirs.total_length;
        }
        Ok(self)
    }

    pub fn analyzer(&self) -> &AnalyzerConfig {
        &self.analyzer
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_id(&self, ordinal: u32) -> &str {
        &self.doc_ids[ordinal as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn ordinal(&self, doc_id: &str) -> Option<u32> {
        self.ordinals.get(doc_id).copied()
    }

    /// Postings sorted by ordinal; empty for unseen terms.
    pub fn postings(&self, facet: Facet, term: &str) -> &[Posting] {
        self.facets[facet.slot()].postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn doc_freq(&self, facet: Facet, term: &str) -> usize {
        self.postings(facet, term).len()
    }

    pub fn term_freq(&self, facet: Facet, term: &str, ordinal: u32) -> u32 {
        let list = self.postings(facet, term);
        list.binary_search_by_key(&ordinal, |p| p.doc).map_or(0, |i| list[i].tf)
    }

    pub fn doc_len(&self, facet: Facet, ordinal: u32) -> u32 {
        self.facets[facet.slot()].lengths[ordinal as usize]
    }

    pub fn total_len(&self, facet: Facet) -> u64 {
        self.facets[facet.slot()].total_length
    }

    /// Mean token count per document; 0 for an empty index.
    pub fn avg_len(&self, facet: Facet) -> f64 {
        match self.num_docs() {
            0 => 0.0,
            n => self.total_len(facet) as f64 / n as f64,
        }
    }

    pub fn terms(&self, facet: Facet) -> impl Iterator<Item = &str> {
        self.facets[facet.slot()].postings.keys().map(String::as_str)
    }

    /// Analyze query text with the index's analyzer.
    pub fn analyze(&self, text: &str) -> Vec<String> {
        analyze(text, &self.analyzer)
    }

    /// Tokens of `text` that survive stopword removal, unstemmed.
    pub fn surface_words(&self, text: &str) -> Vec<String> {
        tokenize(text).filter(|t| !self.analyzer.is_stopword(t)).collect()
    }
}

const MAGIC: &[u8; 8] = b"CDSIDX\0\0";
const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::format("truncated index file"));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::format("invalid utf-8 in index file"))
    }
}

impl InvertedIndex {
    /// Serialize to the versioned binary layout. Output is a pure function of
    /// the index contents.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(MAGIC.to_vec());
        w.u32(FORMAT_VERSION);
        w.u32(u32::from(self.analyzer.stem()));
        w.u32(self.analyzer.stopwords().len() as u32);
        for s in self.analyzer.stopwords() {
            w.str(s);
        }
        w.u32(self.doc_ids.len() as u32);
        for id in &self.doc_ids {
            w.str(id);
        }
        for facet in &self.facets {
            w.u64(facet.total_length);
            for &len in &facet.lengths {
                w.u32(len);
            }
            w.u32(facet.postings.len() as u32);
            for (term, list) in &facet.postings {
                w.str(term);
                w.u32(list.len() as u32);
                for p in list {
                    w.u32(p.doc);
                    w.u32(p.tf);
                }
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader(bytes);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::format("not an index file"));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(format!("unsupported index version {version}")));
        }
        let stem = r.u32()? != 0;
        let stopwords = (0..r.u32()?).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let mut index = Self::empty(AnalyzerConfig::new(stopwords, stem));
        for ordinal in 0..r.u32()? {
            let id = r.str()?;
            index.ordinals.insert(id.clone(), ordinal);
            index.doc_ids.push(id);
        }
        let n = index.doc_ids.len();
        for facet in index.facets.iter_mut() {
            facet.total_length = r.u64()?;
            facet.lengths = (0..n).map(|_| r.u32()).collect::<Result<_>>()?;
            for _ in 0..r.u32()? {
                let term = r.str()?;
                let list = (0..r.u32()?)
                    .map(|_| Ok(Posting { doc: r.u32()?, tf: r.u32()? }))
                    .collect::<Result<Vec<_>>>()?;
                if list.iter().any(|p| p.doc as usize >= n || p.tf == 0)
                    || list.windows(2).any(|w| w[0].doc >= w[1].doc)
                {
                    return Err(Error::format(format!("corrupt postings for '{term}'")));
                }
                facet.postings.insert(term, list);
            }
        }
        if !r.0.is_empty() {
            return Err(Error::format("trailing bytes in index file"));
        }
        Ok(index)
    }

    /// Write atomically (temporary file, then rename).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Free-function form of [`InvertedIndex::build`].
pub fn build_index(docs: &[Document], config: &AnalyzerConfig) -> Result<InvertedIndex> {
    InvertedIndex::build(docs, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, body: &str) -> Document {
        Document { doc_id: id.into(), title: title.into(), body: body.into(), ..Default::default() }
    }

    #[test]
    fn document_frequency_uses_stems() {
        let docs = [doc("a", "", "sepsis and shock"), doc("b", "", "Sepsis")];
        let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
        assert_eq!(index.doc_freq(Facet::Body, "sepsi"), 2);
        assert_eq!(index.doc_freq(Facet::All, "sepsi"), 2);
        assert_eq!(index.doc_freq(Facet::Title, "sepsi"), 0);
    }

    #[test]
    fn empty_corpus() {
        let index = InvertedIndex::build(&[], &AnalyzerConfig::default()).unwrap();
        assert_eq!(index.num_docs(), 0);
        assert_eq!(index.avg_len(Facet::All), 0.0);
        assert!(Facet::ALL.iter().all(|&f| index.terms(f).next().is_none()));
    }

    #[test]
    fn all_facet_is_concatenation() {
        let docs = [doc("a", "alpha beta", "gamma")];
        let index = InvertedIndex::build(&docs, &AnalyzerConfig::raw()).unwrap();
        assert_eq!(index.doc_len(Facet::All, 0), 3);
        assert_eq!(
            index.doc_len(Facet::All, 0),
            index.doc_len(Facet::Title, 0) + index.doc_len(Facet::Abstract, 0) + index.doc_len(Facet::Body, 0)
        );
    }

    #[test]
    fn postings_lookup() {
        let docs = [doc("a", "", "x"), doc("b", "", "fever fever fever")];
        let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
        assert!(index.postings(Facet::Body, "unseen").is_empty());
        assert_eq!(index.postings(Facet::Body, "fever"), [Posting { doc: 1, tf: 3 }]);
    }

    #[test]
    fn concepts_are_not_stemmed() {
        let mut d = doc("a", "", "");
        d.concept_ids = vec!["C0036690".into()];
        d.mesh_keywords = vec!["Septic Shock".into()];
        let index = InvertedIndex::build(&[d], &AnalyzerConfig::default()).unwrap();
        assert_eq!(index.doc_freq(Facet::Concepts, "C0036690"), 1);
        assert_eq!(index.doc_freq(Facet::Mesh, "septic"), 1);
        assert_eq!(index.doc_freq(Facet::Mesh, "shock"), 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let docs = [doc("a", "", "x"), doc("a", "", "y")];
        assert!(InvertedIndex::build(&docs, &AnalyzerConfig::default()).is_err());
    }

    #[test]
    fn bytes_round_trip() {
        let docs = [doc("a", "heart attack", "chest pain"), doc("b", "", "fever")];
        let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
        let bytes = index.to_bytes();
        let back = InvertedIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back, index);
        assert_eq!(back.to_bytes(), bytes);
        assert!(InvertedIndex::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
