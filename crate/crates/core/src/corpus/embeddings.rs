use std::collections::HashMap;

use crate::error::{Error, Result};

/// Word vectors of a fixed dimension, keyed by lowercase word.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f64>,
}

/// A vocabulary word and its cosine similarity to a probe vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub word: String,
    pub similarity: f64,
}

impl EmbeddingTable {
    /// Parse `word v1 v2 ... vd` lines; `d` is fixed by the first line.
    pub fn parse(raw: &[u8]) -> Result<Self> {
        let text = String::from_utf8_lossy(raw);
        let mut table = EmbeddingTable::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let vector = fields
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::format_at(line_no, format!("non-numeric component '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if table.words.is_empty() {
                if vector.is_empty() {
                    return Err(Error::format_at(line_no, "vector has no components"));
                }
                table.dimension = vector.len();
            } else if vector.len() != table.dimension {
                return Err(Error::format_at(
                    line_no,
                    format!("expected {} components, found {}", table.dimension, vector.len()),
                ));
            }
            table.insert(word.to_ascii_lowercase(), &vector, line_no)?;
        }
        if table.words.is_empty() {
            return Err(Error::format("empty embedding table: dimension undeterminable"));
        }
        Ok(table)
    }

    /// Build from in-memory vectors; every vector must have `dimension` components.
    pub fn from_vectors<I, S>(dimension: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut table = EmbeddingTable { dimension, ..Default::default() };
        for (i, (word, v)) in vectors.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::format_at(i + 1, "vector dimension mismatch"));
            }
            table.insert(word.into().to_ascii_lowercase(), &v, i + 1)?;
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, vector: &[f64], line_no: usize) -> Result<()> {
        if word.is_empty() || self.index.contains_key(&word) {
            return Err(Error::format_at(line_no, format!("duplicate or empty word '{word}'")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.values.extend_from_slice(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        let i = *self.index.get(word)?;
        Some(&self.values[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .zip(self.values.chunks_exact(self.dimension.max(1)))
            .map(|(w, v)| (w.as_str(), v))
    }

    /// Mean of the vectors of the known words; `None` if no word is known.
    pub fn mean_vector<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for v in words.into_iter().filter_map(|w| self.get(w)) {
            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
            n += 1;
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }

    /// Exhaustive cosine scan: up to `k` words other than `word` with
    /// similarity at least `threshold`, most similar first, ties by word.
    pub fn nearest(&self, word: &str, k: usize, threshold: f64) -> Vec<Neighbor> {
        let Some(probe) = self.get(word) else { return Vec::new() };
        let mut found: Vec<Neighbor> = self
            .iter()
            .filter(|(w, _)| *w != word)
            .map(|(w, v)| Neighbor { word: w.to_string(), similarity: cosine(probe, v) })
            .filter(|n| n.similarity >= threshold)
            .collect();
        found.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.word.cmp(&b.word)));
        found.truncate(k);
        found
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
