//! Full pipeline in-process: synthesize a folding trajectory, stream it
//! through the analysis engine, and report regions, latency, and reduction.

use edms::config::RunConfig;
use edms::frame::RegionSpec;
use edms::pipeline::{write_decisions_csv, AnalyzeEngine};
use edms::validate::{generate_synthetic, SegmentSchedule, StructureTarget, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        residues: 40,
        frames: 400,
        schedule: vec![SegmentSchedule {
            first_residue: 5,
            last_residue: 30,
            target: StructureTarget::IdealHelix,
            start_frame: 150,
            end_frame: 180,
            noise_std: 0.05,
        }],
        base_noise_std: 0.05,
    };
    let frames = generate_synthetic(&spec, 3)?;

    let mut cfg = RunConfig::default();
    cfg.regions = vec![
        RegionSpec::new("fold", 5, 30),
        RegionSpec::new("tail", 32, 40),
    ];
    let ids: Vec<String> = cfg.requests().iter().map(|r| r.request_id.clone()).collect();
    println!("requests: {}", ids.join(", "));

    let store_path = std::env::temp_dir().join("edms_end_to_end.edms");
    let mut engine = AnalyzeEngine::new(&cfg, &store_path)?;
    for frame in &frames {
        if let Some(region) = engine.process_frame(frame)? {
            println!(
                "driving region closed mid-stream: frames {}..={}",
                region.start_frame, region.end_frame
            );
        }
    }
    let result = engine.finish()?;

    println!(
        "{} frames, mean latency {:.3} ms, p99 {:.3} ms",
        result.frames, result.mean_latency_ms, result.p99_latency_ms
    );
    for region in &result.regions {
        println!(
            "region {}: frames {}..={}, mean {:.1}, std {:.2}",
            region.cluster_ordinal, region.start_frame, region.end_frame,
            region.mean, region.std
        );
    }
    println!("data reduction: {:.1}%", 100.0 * result.reduction);

    let mut csv = Vec::new();
    write_decisions_csv(&result.decisions, &cfg.driving, &mut csv)?;
    println!("decision table preview:");
    for line in String::from_utf8(csv)?.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
