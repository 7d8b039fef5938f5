//! Score two runs against sampled judgments, compare them and print per-topic deltas.

use std::path::Path;

use cdsbench::eval::{compare_runs, deltas_to_csv, evaluate, per_query_delta, read_qrels, MetricConfig, RunEntry};
use cdsbench::pipeline::{run_pipeline, PipelineConfig, Resources};

fn main() -> cdsbench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let qrels = read_qrels(dir.join("qrels.txt"), Some(&dir.join("strata.txt")))?;
    let run = |name: &str| -> cdsbench::Result<_> {
        let config = PipelineConfig::load(dir.join(name))?;
        run_pipeline(&config, &config.build_index()?, &Resources::load(&config)?)
    };
    let baseline = run("baseline.conf")?;
    let processed = run("pipeline.conf")?;
    let cfg = MetricConfig::default();

    for (topic, e) in evaluate(&processed, &qrels, &cfg)? {
        println!(
            "topic {topic}: infNDCG {:.4} infAP {:.4} R-prec {:.4} P@10 {:.4}",
            e.inferred.inf_ndcg, e.inferred.inf_ap, e.exact.r_prec, e.exact.p_at_k
        );
    }
    let report = compare_runs(&[RunEntry { run: &processed, field: None }], &baseline, &qrels, &cfg)?;
    println!("\n{}", report.to_text());
    print!("{}", deltas_to_csv(&per_query_delta(&processed, &baseline, &qrels, "infNDCG", &cfg)?));
    Ok(())
}
