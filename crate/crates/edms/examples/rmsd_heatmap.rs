//! Compare representative frames by RMSD and render a heat map.
//!
//! Representatives from the same stable region should sit close together
//! (small intra-block RMSD) while representatives from different regions
//! should be far apart, giving the heat map a block structure.

use edms::frame::extract_carbons;
use edms::validate::{
    build_heatmap, generate_synthetic, rmsd, SegmentSchedule, StructureTarget, SyntheticSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 200 frames: extended until frame 80, folded to a helix by frame 110.
    let spec = SyntheticSpec {
        residues: 25,
        frames: 200,
        schedule: vec![SegmentSchedule {
            first_residue: 3,
            last_residue: 22,
            target: StructureTarget::IdealHelix,
            start_frame: 80,
            end_frame: 110,
            noise_std: 0.05,
        }],
        base_noise_std: 0.05,
    };
    let frames = generate_synthetic(&spec, 5)?;

    // Direct RMSD between an early and a late frame.
    let a = extract_carbons(&frames[10]);
    let b = extract_carbons(&frames[190]);
    println!(
        "rmsd(frame 10, frame 190) = {:.2} Angstroms",
        rmsd(&a.positions, &b.positions)?
    );

    // Three representatives from each conformation.
    let representatives = vec![(0, 20), (0, 40), (0, 60), (1, 150), (1, 170), (1, 190)];
    let heatmap = build_heatmap(&representatives, &frames, None)?;
    println!(
        "heat map {}x{}: intra-block mean {:.3}, adjacent inter-block mean {:.3}",
        heatmap.order,
        heatmap.order,
        heatmap.mean_intra_block(),
        heatmap.mean_adjacent_inter_block()
    );

    let csv_path = std::env::temp_dir().join("edms_heatmap.csv");
    let svg_path = std::env::temp_dir().join("edms_heatmap.svg");
    let mut csv = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    heatmap.write_csv(&mut csv)?;
    let mut svg = std::io::BufWriter::new(std::fs::File::create(&svg_path)?);
    heatmap.write_svg(&mut svg)?;
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}
