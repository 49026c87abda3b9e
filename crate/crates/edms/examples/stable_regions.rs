//! Detect stable conformational regions in a streaming eigenvalue series,
//! pick representative frames, and decide what to keep.
//!
//! The online detector sees one value per frame and closes a region as soon
//! as stability breaks; its output matches offline detection over the full
//! series bit for bit.

use edms::stability::{
    decide_retention, detect_stable_regions, select_representatives, DetectorConfig,
    OnlineDetector, Verdict,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A series with two plateaus joined by a ramp, plus mild jitter.
    let series: Vec<f64> = (0..400)
        .map(|i| {
            let base = match i {
                0..=149 => 100.0,
                150..=199 => 100.0 + (i as f64 - 149.0) * 2.0,
                _ => 200.0,
            };
            base + ((i * 37 % 17) as f64 - 8.0) * 0.05
        })
        .collect();

    let cfg = DetectorConfig {
        window: 20,
        min_region: 50,
        ..DetectorConfig::default()
    };

    // Stream the series through the online detector.
    let mut detector = OnlineDetector::new("full", cfg.clone())?;
    let mut regions = Vec::new();
    for (frame, value) in series.iter().enumerate() {
        if let Some(region) = detector.push(frame, *value)? {
            println!(
                "region {} closed at frame {}: frames {}..={}, mean {:.2}, std {:.4}",
                region.cluster_ordinal, frame, region.start_frame, region.end_frame,
                region.mean, region.std
            );
            regions.push(region);
        }
    }
    if let Some(region) = detector.finish() {
        println!(
            "region {} closed at end of stream: frames {}..={}, mean {:.2}, std {:.4}",
            region.cluster_ordinal, region.start_frame, region.end_frame,
            region.mean, region.std
        );
        regions.push(region);
    }

    let offline = detect_stable_regions("full", &series, &cfg)?;
    assert_eq!(offline.len(), regions.len());
    println!("online and offline agree on {} regions", regions.len());

    for region in &regions {
        let reps = select_representatives(region, &series, cfg.reps_per_region)?;
        println!("region {} representatives: {:?}", region.cluster_ordinal, reps);
    }

    let decisions = decide_retention(&regions, &series, series.len(), &cfg)?;
    let kept = decisions
        .iter()
        .filter(|d| !matches!(d.verdict, Verdict::Drop))
        .count();
    println!(
        "retention: keep {kept} of {} frames ({:.1}% reduction)",
        series.len(),
        100.0 * (1.0 - kept as f64 / series.len() as f64)
    );
    Ok(())
}
