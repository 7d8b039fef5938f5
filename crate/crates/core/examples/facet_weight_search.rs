//! Hill-climb facet weights against infNDCG on the mini-corpus.

use std::path::Path;

use cdsbench::eval::MetricConfig;
use cdsbench::index::Facet;
use cdsbench::optimizer::{optimize_weights, WeightGrid};
use cdsbench::pipeline::{Pipeline, PipelineConfig, Resources};

fn main() -> cdsbench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let config = PipelineConfig::load(dir.join("baseline.conf"))?;
    let resources = Resources::load(&config)?;
    let index = config.build_index()?;
    let pipeline = Pipeline::new(&config, &index, &resources)?;
    let qrels = resources.qrels.as_ref().expect("baseline.conf names a qrels file");

    let grid = WeightGrid::new(vec![Facet::Title, Facet::Abstract, Facet::Body, Facet::Mesh], 0.25)?;
    let result = optimize_weights(&pipeline, qrels, &MetricConfig::default(), &grid, 7, 5)?;
    for e in result.trace.iter().filter(|e| e.accepted) {
        println!("epoch {} step {:>2}  {}  infNDCG {:.4}", e.epoch, e.step, grid.weights(&e.point), e.objective);
    }
    println!("best: {} ({:.4})", result.best_weights, result.best_score);
    Ok(())
}
