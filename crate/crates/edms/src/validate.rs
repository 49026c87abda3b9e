//! Ground-truth tooling: optimally superposed RMSD, representative heat
//! maps, and a deterministic synthetic trajectory generator used as the
//! desk-scale oracle for the pipeline.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{resolve_region, extract_carbons, Frame, RegionSpec, ResidueRecord};
use crate::geom::{self, Point3};
use crate::spectra::jacobi_eigenvalues;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("coordinate lists differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least 3 points for superposition, got {0}")]
    TooFewPoints(usize),
    #[error("frame {0} not available to the heat map builder")]
    MissingFrame(usize),
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),
    #[error("region error: {0}")]
    Region(#[from] crate::frame::RegionError),
}

/// Minimum RMSD between two conformations over all rigid superpositions.
///
/// Uses the quaternion form of the optimal-rotation problem: the largest
/// eigenvalue of the 4x4 key matrix built from the centered correlation
/// sums gives the maximal inner product over proper rotations. Degenerate
/// (collinear) sets still yield the valid minimum.
pub fn rmsd(a: &[Point3], b: &[Point3]) -> Result<f64, ValidateError> {
    if a.len() != b.len() {
        return Err(ValidateError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.len() < 3 {
        return Err(ValidateError::TooFewPoints(a.len()));
    }
    let n = a.len();
    let ca = geom::centroid(a);
    let cb = geom::centroid(b);
    let mut s = [[0.0f64; 3]; 3];
    let mut ga = 0.0;
    let mut gb = 0.0;
    for k in 0..n {
        let p = geom::sub(a[k], ca);
        let q = geom::sub(b[k], cb);
        ga += geom::dot(p, p);
        gb += geom::dot(q, q);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += p[i] * q[j];
            }
        }
    }
    let key = [
        s[0][0] + s[1][1] + s[2][2],
        s[1][2] - s[2][1],
        s[2][0] - s[0][2],
        s[0][1] - s[1][0],
        s[1][2] - s[2][1],
        s[0][0] - s[1][1] - s[2][2],
        s[0][1] + s[1][0],
        s[2][0] + s[0][2],
        s[2][0] - s[0][2],
        s[0][1] + s[1][0],
        -s[0][0] + s[1][1] - s[2][2],
        s[1][2] + s[2][1],
        s[0][1] - s[1][0],
        s[2][0] + s[0][2],
        s[1][2] + s[2][1],
        -s[0][0] - s[1][1] + s[2][2],
    ];
    let eig = jacobi_eigenvalues(4, &key).expect("4x4 Jacobi always converges");
    let lambda = eig[3];
    let msd = ((ga + gb - 2.0 * lambda) / n as f64).max(0.0);
    Ok(msd.sqrt())
}

/// Pairwise RMSD matrix over representative frames, restricted to one
/// region's carbons (or the whole carbon set).
#[derive(Debug, Clone)]
pub struct HeatMap {
    /// (region ordinal, slot within region), in matrix order.
    pub labels: Vec<(usize, usize)>,
    pub order: usize,
    /// Row-major symmetric matrix, Angstroms.
    pub values: Vec<f64>,
    /// Per region ordinal, the index range [start, end) of its block.
    pub cluster_blocks: Vec<(usize, std::ops::Range<usize>)>,
}

impl HeatMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.order + j]
    }

    /// Mean of off-diagonal entries inside cluster blocks.
    pub fn mean_intra_block(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (_, block) in &self.cluster_blocks {
            for i in block.clone() {
                for j in block.clone() {
                    if i != j {
                        sum += self.get(i, j);
                        count += 1;
                    }
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// Mean of entries between consecutive cluster blocks.
    pub fn mean_adjacent_inter_block(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for pair in self.cluster_blocks.windows(2) {
            for i in pair[0].1.clone() {
                for j in pair[1].1.clone() {
                    sum += self.get(i, j);
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    pub fn write_csv<W: Write>(&self, sink: &mut W) -> std::io::Result<()> {
        write!(sink, "rep")?;
        for (region, slot) in &self.labels {
            write!(sink, ",r{region}s{slot}")?;
        }
        writeln!(sink)?;
        for i in 0..self.order {
            write!(sink, "r{}s{}", self.labels[i].0, self.labels[i].1)?;
            for j in 0..self.order {
                write!(sink, ",{}", self.get(i, j))?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }

    /// White-to-red ramp over [0, max RMSD]; lighter means closer.
    pub fn write_svg<W: Write>(&self, sink: &mut W) -> std::io::Result<()> {
        let cell = 24usize;
        let margin = 40usize;
        let size = margin + self.order * cell + 4;
        let max = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(*v))
            .max(f64::MIN_POSITIVE);
        writeln!(
            sink,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">"#
        )?;
        for i in 0..self.order {
            for j in 0..self.order {
                let t = self.get(i, j) / max;
                let channel = (255.0 * (1.0 - t)).round() as u8;
                writeln!(
                    sink,
                    r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb(255,{channel},{channel})"/>"#,
                    x = margin + j * cell,
                    y = margin + i * cell,
                )?;
            }
            writeln!(
                sink,
                r#"<text x="{x}" y="{y}" font-size="10">r{r}s{s}</text>"#,
                x = 2,
                y = margin + i * cell + cell / 2 + 3,
                r = self.labels[i].0,
                s = self.labels[i].1,
            )?;
        }
        writeln!(sink, "</svg>")
    }
}

/// Pairwise superposed RMSD over the region's carbons for the given
/// representatives, blocked by region ordinal.
pub fn build_heatmap(
    representatives: &[(usize, usize)],
    frames: &[Frame],
    region: Option<&RegionSpec>,
) -> Result<HeatMap, ValidateError> {
    let mut coords: Vec<Vec<Point3>> = Vec::with_capacity(representatives.len());
    for &(_, frame_idx) in representatives {
        let frame = frames
            .iter()
            .find(|f| f.frame_index == frame_idx)
            .ok_or(ValidateError::MissingFrame(frame_idx))?;
        let carbons = extract_carbons(frame);
        let pts = match region {
            Some(r) => {
                let idx = resolve_region(r, &carbons)?;
                idx.iter().map(|&i| carbons.positions[i]).collect()
            }
            None => carbons.positions,
        };
        coords.push(pts);
    }
    let order = representatives.len();
    let mut values = vec![0.0; order * order];
    for i in 0..order {
        for j in (i + 1)..order {
            let v = rmsd(&coords[i], &coords[j])?;
            values[i * order + j] = v;
            values[j * order + i] = v;
        }
    }
    let mut labels = Vec::with_capacity(order);
    let mut cluster_blocks: Vec<(usize, std::ops::Range<usize>)> = Vec::new();
    for (pos, &(region_ordinal, _)) in representatives.iter().enumerate() {
        match cluster_blocks.last_mut() {
            Some((ord, range)) if *ord == region_ordinal => range.end = pos + 1,
            _ => cluster_blocks.push((region_ordinal, pos..pos + 1)),
        }
        let slot = cluster_blocks.last().unwrap().1.len() - 1;
        labels.push((region_ordinal, slot));
    }
    Ok(HeatMap {
        labels,
        order,
        values,
        cluster_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureTarget {
    Extended,
    IdealHelix,
    IdealStrand,
}

/// One folding event: a residue range moving toward a target geometry
/// over a frame window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSchedule {
    pub first_residue: usize,
    pub last_residue: usize,
    pub target: StructureTarget,
    pub start_frame: usize,
    pub end_frame: usize,
    /// Gaussian coordinate noise (Angstroms) for residues in this segment.
    pub noise_std: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub residues: usize,
    pub frames: usize,
    #[serde(default)]
    pub schedule: Vec<SegmentSchedule>,
    /// Noise applied to residues outside every scheduled segment.
    #[serde(default)]
    pub base_noise_std: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), ValidateError> {
        if self.residues < 5 {
            return Err(ValidateError::SpecInvalid("need at least 5 residues".into()));
        }
        if self.frames == 0 {
            return Err(ValidateError::SpecInvalid("need at least one frame".into()));
        }
        for seg in &self.schedule {
            if seg.first_residue == 0
                || seg.first_residue > seg.last_residue
                || seg.last_residue > self.residues
            {
                return Err(ValidateError::SpecInvalid(format!(
                    "segment residues {}..={} out of chain 1..={}",
                    seg.first_residue, seg.last_residue, self.residues
                )));
            }
            if seg.start_frame >= seg.end_frame || seg.end_frame >= self.frames {
                return Err(ValidateError::SpecInvalid(format!(
                    "segment frame window {}..{} out of 0..{}",
                    seg.start_frame, seg.end_frame, self.frames
                )));
            }
            if seg.noise_std < 0.0 {
                return Err(ValidateError::SpecInvalid("negative noise".into()));
            }
        }
        Ok(())
    }
}

const EXTENDED_RISE: f64 = 3.5;
const HELIX_RISE: f64 = 1.5;
const HELIX_RADIUS: f64 = 2.3;
const HELIX_TWIST_DEG: f64 = 100.0;
const CB_OFFSET: f64 = 1.5;

fn extended_geometry(residue: usize) -> (Point3, Point3) {
    let x = EXTENDED_RISE * (residue - 1) as f64;
    ([x, 0.0, 0.0], [x, CB_OFFSET, 0.0])
}

/// Segment target geometry, anchored at the extended position of the
/// segment's first residue so the chain stays roughly in place.
fn target_geometry(
    target: StructureTarget,
    residue: usize,
    first_residue: usize,
) -> (Point3, Point3) {
    let anchor = extended_geometry(first_residue).0;
    let j = (residue - first_residue) as f64;
    match target {
        StructureTarget::Extended => extended_geometry(residue),
        StructureTarget::IdealHelix => {
            let theta = HELIX_TWIST_DEG.to_radians() * j;
            let ca = [
                anchor[0] + HELIX_RISE * j,
                anchor[1] + HELIX_RADIUS * (theta.cos() - 1.0),
                anchor[2] + HELIX_RADIUS * theta.sin(),
            ];
            // CB points radially outward from the helix axis.
            let cb = [
                ca[0],
                ca[1] + CB_OFFSET * theta.cos(),
                ca[2] + CB_OFFSET * theta.sin(),
            ];
            (ca, cb)
        }
        StructureTarget::IdealStrand => {
            let zig = if (residue - first_residue) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let ca = [anchor[0] + EXTENDED_RISE * j, anchor[1] + 0.5 * zig, anchor[2]];
            let cb = [ca[0], ca[1], ca[2] + CB_OFFSET * zig];
            (ca, cb)
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms; enough for coordinate jitter.
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Deterministic synthetic trajectory. Scheduled segments interpolate
/// linearly from their geometry at `start_frame` to the target geometry
/// at `end_frame`; everything else stays extended.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Frame>, ValidateError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let mut residues = Vec::with_capacity(spec.residues);
        for res in 1..=spec.residues {
            // Chained schedules: each completed segment becomes the start
            // state of the next one touching this residue.
            let (mut ca, mut cb) = extended_geometry(res);
            let mut noise_std = spec.base_noise_std;
            let mut entries: Vec<&SegmentSchedule> = spec
                .schedule
                .iter()
                .filter(|s| res >= s.first_residue && res <= s.last_residue)
                .collect();
            entries.sort_by_key(|s| s.start_frame);
            for seg in entries {
                noise_std = seg.noise_std;
                let (tca, tcb) = target_geometry(seg.target, res, seg.first_residue);
                if t >= seg.end_frame {
                    ca = tca;
                    cb = tcb;
                } else if t >= seg.start_frame {
                    let alpha =
                        (t - seg.start_frame) as f64 / (seg.end_frame - seg.start_frame) as f64;
                    ca = geom::lerp(ca, tca, alpha);
                    cb = geom::lerp(cb, tcb, alpha);
                    break;
                } else {
                    break;
                }
            }
            // Fixed draw order keeps output deterministic per (spec, seed).
            let mut jitter = [0.0f64; 6];
            for v in &mut jitter {
                *v = gaussian(&mut rng) * noise_std;
            }
            residues.push(ResidueRecord {
                residue_index: res,
                residue_name: "ALA".to_string(),
                alpha: geom::add(ca, [jitter[0], jitter[1], jitter[2]]),
                beta: Some(geom::add(cb, [jitter[3], jitter[4], jitter[5]])),
            });
        }
        frames.push(Frame {
            frame_index: t,
            residues,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::transform;

    fn square() -> Vec<Point3> {
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]
    }

    fn rotation_z(angle: f64) -> [[f64; 3]; 3] {
        let (s, c) = angle.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn rmsd_identical_is_zero() {
        let a = square();
        assert_eq!(rmsd(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rmsd_rigid_motion_is_zero() {
        let a = square();
        let rot = rotation_z(1.1);
        let b: Vec<Point3> = a
            .iter()
            .map(|p| transform(&rot, [4.0, -2.0, 7.5], *p))
            .collect();
        assert!(rmsd(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn rmsd_symmetric() {
        let a = square();
        let mut b = square();
        b[2] = [1.3, 0.9, 0.4];
        let ab = rmsd(&a, &b).unwrap();
        let ba = rmsd(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert!(ab > 0.0);
    }

    #[test]
    fn rmsd_length_mismatch() {
        let a = square();
        let b = vec![[0.0, 0.0, 0.0]; 3];
        assert!(matches!(
            rmsd(&a, &b),
            Err(ValidateError::LengthMismatch { a: 4, b: 3 })
        ));
    }

    #[test]
    fn rmsd_collinear_points_still_valid() {
        let a: Vec<Point3> = (0..5).map(|i| [i as f64, 0.0, 0.0]).collect();
        let rot = rotation_z(0.7);
        let b: Vec<Point3> = a.iter().map(|p| transform(&rot, [1.0, 2.0, 3.0], *p)).collect();
        assert!(rmsd(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn synthetic_no_transitions_zero_noise_is_constant() {
        let spec = SyntheticSpec {
            residues: 10,
            frames: 5,
            schedule: vec![],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 1).unwrap();
        for f in &frames[1..] {
            assert_eq!(f.residues, frames[0].residues);
        }
    }

    #[test]
    fn synthetic_deterministic_per_seed() {
        let spec = SyntheticSpec {
            residues: 20,
            frames: 10,
            schedule: vec![SegmentSchedule {
                first_residue: 5,
                last_residue: 15,
                target: StructureTarget::IdealHelix,
                start_frame: 2,
                end_frame: 8,
                noise_std: 0.05,
            }],
            base_noise_std: 0.05,
        };
        let a = generate_synthetic(&spec, 42).unwrap();
        let b = generate_synthetic(&spec, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_helix_is_more_compact() {
        let spec = SyntheticSpec {
            residues: 20,
            frames: 11,
            schedule: vec![SegmentSchedule {
                first_residue: 1,
                last_residue: 20,
                target: StructureTarget::IdealHelix,
                start_frame: 0,
                end_frame: 10,
                noise_std: 0.0,
            }],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 0).unwrap();
        let span = |f: &Frame| {
            let first = f.residues.first().unwrap().alpha;
            let last = f.residues.last().unwrap().alpha;
            geom::dist2(first, last).sqrt()
        };
        assert!(span(&frames[10]) < span(&frames[0]) * 0.6);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = SyntheticSpec {
            residues: 10,
            frames: 5,
            schedule: vec![SegmentSchedule {
                first_residue: 4,
                last_residue: 12,
                target: StructureTarget::IdealHelix,
                start_frame: 0,
                end_frame: 4,
                noise_std: 0.0,
            }],
            base_noise_std: 0.0,
        };
        assert!(matches!(
            generate_synthetic(&spec, 0),
            Err(ValidateError::SpecInvalid(_))
        ));
    }

    #[test]
    fn heatmap_single_rep_is_zero() {
        let spec = SyntheticSpec {
            residues: 10,
            frames: 3,
            schedule: vec![],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 0).unwrap();
        let hm = build_heatmap(&[(0, 1)], &frames, None).unwrap();
        assert_eq!(hm.order, 1);
        assert_eq!(hm.get(0, 0), 0.0);
    }

    #[test]
    fn heatmap_duplicate_rep_off_diagonal_zero() {
        let spec = SyntheticSpec {
            residues: 10,
            frames: 3,
            schedule: vec![],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 0).unwrap();
        let hm = build_heatmap(&[(0, 1), (0, 1)], &frames, None).unwrap();
        assert_eq!(hm.get(0, 1), 0.0);
    }

    #[test]
    fn heatmap_missing_frame() {
        let spec = SyntheticSpec {
            residues: 10,
            frames: 3,
            schedule: vec![],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 0).unwrap();
        assert!(matches!(
            build_heatmap(&[(0, 9)], &frames, None),
            Err(ValidateError::MissingFrame(9))
        ));
    }

    #[test]
    fn heatmap_blocks_and_labels() {
        let spec = SyntheticSpec {
            residues: 12,
            frames: 30,
            schedule: vec![SegmentSchedule {
                first_residue: 1,
                last_residue: 12,
                target: StructureTarget::IdealHelix,
                start_frame: 10,
                end_frame: 20,
                noise_std: 0.0,
            }],
            base_noise_std: 0.0,
        };
        let frames = generate_synthetic(&spec, 0).unwrap();
        let reps = [(0, 1), (0, 3), (1, 25), (1, 27)];
        let hm = build_heatmap(&reps, &frames, None).unwrap();
        assert_eq!(hm.labels, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(hm.cluster_blocks.len(), 2);
        // Same-plateau frames are identical, cross-plateau differ.
        assert!(hm.mean_intra_block() < 1e-9);
        assert!(hm.mean_adjacent_inter_block() > 1.0);
        let mut csv = Vec::new();
        hm.write_csv(&mut csv).unwrap();
        assert!(std::str::from_utf8(&csv).unwrap().starts_with("rep,r0s0,r0s1,r1s0,r1s1"));
        let mut svg = Vec::new();
        hm.write_svg(&mut svg).unwrap();
        assert!(std::str::from_utf8(&svg).unwrap().contains("<svg"));
    }
}
