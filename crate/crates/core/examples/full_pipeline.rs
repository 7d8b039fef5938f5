//! Run a configured pipeline end to end and write a TREC run file.
//!
//! `cargo run --example full_pipeline -- data/minicorpus/pipeline.conf out.run`

use std::path::PathBuf;

use cdsbench::eval::write_run;
use cdsbench::pipeline::{run_pipeline, PipelineConfig, Resources};

fn main() -> cdsbench::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config_path = args.next().map(PathBuf::from).unwrap_or_else(|| root.join("data/minicorpus/pipeline.conf"));
    let config = PipelineConfig::load(&config_path)?;
    print!("{}", config.normalized());

    let resources = Resources::load(&config)?;
    let index = config.build_index()?;
    let run = run_pipeline(&config, &index, &resources)?;
    match args.next() {
        Some(out) => {
            write_run(&run, &out)?;
            println!("wrote {} topics to {out}", run.topic_ids().count());
        }
        None => print!("{}", run.to_trec_string().lines().take(10).collect::<Vec<_>>().join("\n") + "\n"),
    }
    Ok(())
}
