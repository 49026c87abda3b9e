//! Record per-frame eigenvalue metadata in the binary store and read it back.
//!
//! The store holds a JSON header followed by fixed-stride records, so the
//! frame index never needs to be written: a record's position is its frame.
//! Loading tolerates a truncated tail, recovering every complete record.

use edms::frame::{extract_carbons, RegionSpec};
use edms::spectra::{make_packet, Precision};
use edms::store::{export_csv, load, SeriesHeader, SeriesWriter, StoreMode};
use edms::validate::{generate_synthetic, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        residues: 20,
        frames: 50,
        schedule: Vec::new(),
        base_noise_std: 0.3,
    };
    let frames = generate_synthetic(&spec, 11)?;
    let requests = vec![
        edms::spectra::SpectrumRequest::full(),
        edms::spectra::SpectrumRequest::sub(RegionSpec::new("mid", 6, 15)),
    ];

    let path = std::env::temp_dir().join("edms_metadata_store.edms");
    let ids: Vec<String> = requests.iter().map(|r| r.request_id.clone()).collect();
    let header = SeriesHeader::new(ids, Precision::Double, StoreMode::Minimal);
    println!("record size: {} bytes per frame", header.record_size());

    let mut writer = SeriesWriter::create(&path, header)?;
    for frame in &frames {
        let carbons = extract_carbons(frame);
        let packet = make_packet(frame.frame_index, &carbons, &requests, Precision::Double, false)?;
        writer.append(&packet)?;
    }
    writer.flush()?;
    drop(writer);

    let loaded = load(&path)?;
    println!(
        "reloaded {} frames, {} requests, {} dangling bytes",
        loaded.view.frame_count(),
        loaded.view.request_ids.len(),
        loaded.truncated_bytes
    );
    let full = loaded.view.series("full").expect("full series present");
    println!(
        "full lambda_max: first={:.2} last={:.2}",
        full.first().unwrap(),
        full.last().unwrap()
    );

    let mut csv = Vec::new();
    export_csv(&loaded.view, &mut csv)?;
    let text = String::from_utf8(csv)?;
    println!("csv preview:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
