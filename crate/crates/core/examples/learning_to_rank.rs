//! Train the linear pairwise re-ranker and apply it as a final pipeline stage.

use std::path::Path;

use cdsbench::eval::{evaluate, mean, Metric, MetricConfig};
use cdsbench::ltr::{TrainingParams, TrainingSetParams};
use cdsbench::pipeline::{run_pipeline, Pipeline, PipelineConfig, Resources, Stage};

fn main() -> cdsbench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let mut config = PipelineConfig::load(dir.join("baseline.conf"))?;
    let mut resources = Resources::load(&config)?;
    let index = config.build_index()?;
    let qrels = resources.qrels.clone().expect("baseline.conf names a qrels file");

    let model = Pipeline::new(&config, &index, &resources)?.train_ltr(
        &qrels,
        &TrainingSetParams::default(),
        &TrainingParams::default(),
    )?;
    print!("{model}");

    let score = |run| -> cdsbench::Result<f64> {
        let per_topic = evaluate(run, &qrels, &MetricConfig::default())?;
        Ok(mean(per_topic.values().map(|e| e.get(Metric::InfNdcg)).collect::<Vec<_>>().iter()))
    };
    let baseline = run_pipeline(&config, &index, &resources)?;
    resources.ltr_model = Some(model);
    config.stages.push(Stage::Ltr { model: "trained".into(), depth: 100 });
    let reranked = run_pipeline(&config, &index, &resources)?;
    println!("baseline infNDCG {:.4}", score(&baseline)?);
    println!("reranked infNDCG {:.4} (training topics, optimistic)", score(&reranked)?);
    Ok(())
}
