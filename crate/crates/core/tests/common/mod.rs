#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use cdsbench::eval::{RankedRun, SampledQrels};
use cdsbench::ranking::ScoredDoc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn minicorpus() -> PathBuf {
    data_dir().join("minicorpus")
}

/// `input<TAB>expected` lines, `#` comments skipped.
pub fn read_suite(name: &str) -> Vec<(String, String)> {
    let text = std::fs::read_to_string(data_dir().join("suites").join(name)).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once('\t').expect("tab separated");
            (a.to_string(), b.to_string())
        })
        .collect()
}

/// A random run over up to `max_docs` docs and a fully judged qrels set.
pub struct Fixture {
    pub run: RankedRun,
    pub qrels: SampledQrels,
    /// topic -> doc -> grade, every judged doc.
    pub grades: BTreeMap<u32, HashMap<String, u8>>,
}

pub fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_docs = rng.gen_range(5..=200);
    let n_topics = rng.gen_range(1..=20);
    let mut run = RankedRun::new("rand").unwrap();
    let mut grades = BTreeMap::new();
    for t in 1..=n_topics {
        let mut g = HashMap::new();
        for d in 0..n_docs {
            if rng.gen_bool(0.4) {
                let grade = *[0u8, 0, 1, 2].get(rng.gen_range(0..4)).unwrap();
                g.insert(format!("D{d}"), grade);
            }
        }
        if !g.values().any(|&x| x > 0) {
            g.insert(format!("D{}", rng.gen_range(0..n_docs)), 1);
        }
        let depth = rng.gen_range(0..=n_docs);
        let mut ids: Vec<usize> = (0..n_docs).collect();
        for i in (1..ids.len()).rev() {
            ids.swap(i, rng.gen_range(0..=i));
        }
        let docs = ids[..depth]
            .iter()
            .enumerate()
            .map(|(r, d)| ScoredDoc { doc_id: format!("D{d}"), score: (depth - r) as f64 })
            .collect();
        run.insert_topic(t, docs).unwrap();
        grades.insert(t, g);
    }
    let qrels = SampledQrels::fully_judged(
        grades.iter().flat_map(|(&t, g)| g.iter().map(move |(d, &x)| (t, d.clone(), x))),
    )
    .unwrap();
    Fixture { run, qrels, grades }
}

/// Direct-formula measures for one ranked list of grades (unjudged as 0).
pub struct Oracle {
    pub p10: f64,
    pub r_prec: f64,
    pub ap: f64,
    pub ndcg: f64,
}

pub fn oracle(ranked: &[&str], grades: &HashMap<String, u8>) -> Oracle {
    let g = |d: &str| grades.get(d).copied().unwrap_or(0);
    let rel = |d: &str| g(d) >= 1;
    let r = grades.values().filter(|&&x| x >= 1).count();
    let prec_at = |k: usize| ranked.iter().take(k).filter(|d| rel(d)).count() as f64 / k as f64;

    let mut ap = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if rel(d) {
            ap += prec_at(i + 1);
        }
    }
    let dcg = |gs: &mut dyn Iterator<Item = u8>| -> f64 {
        gs.enumerate().map(|(i, x)| (2f64.powi(x as i32) - 1.0) / ((i + 2) as f64).log2()).sum()
    };
    let actual = dcg(&mut ranked.iter().map(|d| g(d)));
    let mut ideal: Vec<u8> = grades.values().copied().collect();
    ideal.sort_by(|a, b| b.cmp(a));
    let best = dcg(&mut ideal.into_iter());
    Oracle { p10: prec_at(10), r_prec: prec_at(r), ap: ap / r as f64, ndcg: actual / best }
}

use cdsbench::corpus::Document;
use cdsbench::index::Facet;
use cdsbench::ranking::{FacetWeights, QueryRep, RankingParams};
use cdsbench::text::{analyze, AnalyzerConfig};

pub const VOCAB: [&str; 40] = [
    "sepsis", "fever", "cough", "asthma", "wheezing", "infarction", "troponin", "chest", "pain", "embolism",
    "dimer", "meningitis", "headache", "neck", "stiffness", "antibiotics", "elderly", "child", "treatment",
    "diagnosis", "patients", "treated", "infections", "lactate", "shock", "cardiac", "pulmonary", "acute",
    "chronic", "therapy", "the", "with", "and", "of", "trial", "cohort", "renal", "failure", "rash", "vomiting",
];

fn words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}

pub fn random_corpus(seed: u64, n_docs: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|i| Document {
            doc_id: format!("D{i:04}"),
            title: words(&mut rng, 0, 6),
            abstract_text: words(&mut rng, 0, 30),
            body: words(&mut rng, 0, 80),
            mesh_keywords: (0..rng.gen_range(0..3)).map(|_| words(&mut rng, 1, 2)).collect(),
            concept_ids: (0..rng.gen_range(0..3)).map(|_| format!("C{:03}", rng.gen_range(0..8))).collect(),
        })
        .collect()
}

pub fn random_query(rng: &mut ChaCha8Rng) -> String {
    let mut q = words(rng, 1, 6);
    if rng.gen_bool(0.3) {
        q.push_str(&format!(" C{:03}", rng.gen_range(0..8)));
    }
    q
}

pub fn random_weights(rng: &mut ChaCha8Rng) -> FacetWeights {
    loop {
        let w = FacetWeights::new(Facet::ALL.iter().map(|&f| {
            let v = if rng.gen_bool(0.4) { 0.0 } else { (rng.gen_range(0..=20) as f64) / 10.0 };
            (f, v)
        }))
        .unwrap();
        if w.is_searchable() {
            return w;
        }
    }
}

fn facet_tokens(d: &Document, f: Facet, cfg: &AnalyzerConfig) -> Vec<String> {
    match f {
        Facet::Title => analyze(&d.title, cfg),
        Facet::Abstract => analyze(&d.abstract_text, cfg),
        Facet::Body => analyze(&d.body, cfg),
        Facet::Mesh => d.mesh_keywords.iter().flat_map(|k| analyze(k, cfg)).collect(),
        Facet::Concepts => d.concept_ids.clone(),
        Facet::All => [analyze(&d.title, cfg), analyze(&d.abstract_text, cfg), analyze(&d.body, cfg)].concat(),
    }
}

/// Score every document from raw token counts, no index involved.
pub fn exhaustive_search(
    docs: &[Document],
    cfg: &AnalyzerConfig,
    query: &QueryRep,
    weights: &FacetWeights,
    params: &RankingParams,
) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let streams: Vec<Vec<Vec<String>>> =
        docs.iter().map(|d| Facet::ALL.iter().map(|&f| facet_tokens(d, f, cfg)).collect()).collect();
    let mut out = Vec::new();
    for (di, d) in docs.iter().enumerate() {
        let mut score = 0.0;
        for t in query.terms() {
            if t.weight == 0.0 {
                continue;
            }
            let mut best = 0.0f64;
            for (fi, &f) in Facet::ALL.iter().enumerate() {
                let w = weights.get(f);
                if w == 0.0 {
                    continue;
                }
                let tf = streams[di][fi].iter().filter(|x| **x == t.term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = streams.iter().filter(|s| s[fi].contains(&t.term)).count() as f64;
                let avg = streams.iter().map(|s| s[fi].len()).sum::<usize>() as f64 / n;
                let len = streams[di][fi].len() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                let norm = params.k1 * (1.0 - params.b + params.b * len / avg);
                best = best.max(w * idf * tf * (params.k1 + 1.0) / (tf + norm));
            }
            score += t.weight * best;
        }
        if score > 0.0 {
            out.push((d.doc_id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out.truncate(params.top_k);
    out
}

/// Two-sided p-value of Student's t by Simpson integration of the density.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    let ln_gamma = |x: f64| -> f64 {
        // Lanczos, g = 7
        const C: [f64; 9] = [
            0.999_999_999_999_809_9, 676.520_368_121_885_1, -1_259.139_216_722_402_8, 771.323_428_777_653_1,
            -176.615_029_162_140_6, 12.507_343_278_686_905, -0.138_571_095_265_720_12, 9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let mut a = C[0];
        let tt = x + 7.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * tt.ln() - tt + a.ln()
    };
    let norm = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let density = |x: f64| norm * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let t = t.abs();
    let n = 200_000;
    let h = t / n as f64;
    let mut s = density(0.0) + density(t);
    for i in 1..n {
        s += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let central = s * h / 3.0;
    1.0 - 2.0 * central
}

use cdsbench::optimizer::OptimizerRun;

/// Accepted objectives strictly increase between restarts.
pub fn trace_is_monotone(run: &OptimizerRun) -> bool {
    let mut last = f64::NEG_INFINITY;
    for e in &run.trace {
        if e.restart {
            last = e.objective;
        } else if e.accepted {
            if e.objective <= last {
                return false;
            }
            last = e.objective;
        }
    }
    true
}

/// Concave and separable: each facet has its own peak on the grid.
pub fn concave_objective(w: &FacetWeights) -> f64 {
    let peaks = [(Facet::Title, 1.3), (Facet::Abstract, 0.4), (Facet::Body, 2.0), (Facet::All, 0.0)];
    -peaks.iter().map(|&(f, p)| (w.get(f) - p).powi(2) * (1.0 + f as usize as f64)).sum::<f64>()
}

use std::path::Path;
use std::process::{Command, Output};

pub fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdsbench")).args(args).current_dir(cwd).output().expect("binary runs")
}

pub fn cli_ok(args: &[&str], cwd: &Path) -> Output {
    let out = cli(args, cwd);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}
