//! Build squared-distance matrices and examine their eigenvalue structure.
//!
//! Distance matrices over 3D points have at most five eigenvalues away from
//! zero, exactly one of them positive, and a zero trace. The inter-structure
//! block matrix over two regions has a spectrum symmetric about zero.

use edms::frame::{extract_carbons, RegionSpec};
use edms::spectra::{build_matrix, symmetric_eigenvalues, SpectrumRequest};
use edms::validate::{generate_synthetic, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        residues: 30,
        frames: 1,
        schedule: Vec::new(),
        base_noise_std: 0.2,
    };
    let frame = generate_synthetic(&spec, 7)?.remove(0);
    let carbons = extract_carbons(&frame);

    let requests = vec![
        SpectrumRequest::full(),
        SpectrumRequest::sub(RegionSpec::new("head", 1, 10)),
        SpectrumRequest::inter(
            RegionSpec::new("head", 1, 10),
            RegionSpec::new("tail", 20, 30),
        ),
    ];

    for request in &requests {
        let matrix = build_matrix(&carbons, request)?;
        let spectrum = symmetric_eigenvalues(&matrix)?;
        let trace: f64 = spectrum.eigenvalues.iter().sum();
        let tol = spectrum.rank_tolerance();
        let positives = spectrum.eigenvalues.iter().filter(|v| **v > tol).count();
        println!(
            "{:8} order={:3} lambda_max={:12.2} rank={} positives={} trace={:+.2e}",
            request.request_id,
            matrix.order,
            spectrum.lambda_max,
            spectrum.effective_rank,
            positives,
            trace
        );
        let mut significant: Vec<f64> = spectrum
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| v.abs() > tol)
            .collect();
        significant.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        let shown: Vec<String> = significant.iter().map(|v| format!("{v:.1}")).collect();
        println!("         above tolerance: {}", shown.join(", "));
    }
    Ok(())
}
