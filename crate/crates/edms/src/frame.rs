//! Trajectory frames, representative-carbon extraction and residue regions.
//!
//! A frame keeps up to two representative carbons per residue: the alpha
//! carbon (CA) and the side-chain center stored under the CB atom name.
//! Glycine carries no CB and contributes a single carbon.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point3};

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("region '{name}' residues {first}..={last} outside chain of {chain_len} residues")]
    RegionOutOfBounds {
        name: String,
        first: usize,
        last: usize,
        chain_len: usize,
    },
    #[error("region '{name}' resolves to {carbons} carbons, need at least 5")]
    RegionTooSmall { name: String, carbons: usize },
}

/// One residue's representative carbons.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueRecord {
    /// 1-based ordinal within the chain.
    pub residue_index: usize,
    /// Three-letter residue code, e.g. "ALA".
    pub residue_name: String,
    /// Alpha-carbon coordinate (Angstroms).
    pub alpha: Point3,
    /// Side-chain center coordinate; `None` for Glycine.
    pub beta: Option<Point3>,
}

impl ResidueRecord {
    pub fn carbon_count(&self) -> usize {
        if self.beta.is_some() {
            2
        } else {
            1
        }
    }
}

/// One trajectory snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// 0-based, assigned in encounter order by the parser.
    pub frame_index: usize,
    pub residues: Vec<ResidueRecord>,
}

impl Frame {
    /// Topology signature: residue count plus which residues lack a beta carbon.
    /// Two frames of the same trajectory must agree on this.
    pub fn topology(&self) -> Vec<(usize, bool)> {
        self.residues
            .iter()
            .map(|r| (r.residue_index, r.beta.is_some()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarbonKind {
    Alpha,
    Beta,
}

/// The ordered carbon positions of one frame: residue-major, alpha before beta.
#[derive(Debug, Clone, PartialEq)]
pub struct CarbonSet {
    pub positions: Vec<Point3>,
    /// For each position, the originating residue and carbon kind.
    pub source_map: Vec<(usize, CarbonKind)>,
}

impl CarbonSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// A named residue range (1-based, inclusive) marking a substructure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub first_residue: usize,
    pub last_residue: usize,
}

impl RegionSpec {
    pub fn new(name: impl Into<String>, first_residue: usize, last_residue: usize) -> Self {
        Self {
            name: name.into(),
            first_residue,
            last_residue,
        }
    }
}

/// Select the representative carbons of a validated frame.
///
/// Pure function of the frame; n = 2R - G for R residues of which G are Glycine.
pub fn extract_carbons(frame: &Frame) -> CarbonSet {
    let mut positions = Vec::with_capacity(frame.residues.len() * 2);
    let mut source_map = Vec::with_capacity(frame.residues.len() * 2);
    for res in &frame.residues {
        positions.push(res.alpha);
        source_map.push((res.residue_index, CarbonKind::Alpha));
        if let Some(beta) = res.beta {
            positions.push(beta);
            source_map.push((res.residue_index, CarbonKind::Beta));
        }
    }
    CarbonSet {
        positions,
        source_map,
    }
}

/// Resolve a residue range to the contiguous carbon indices it owns,
/// preserving CarbonSet order.
pub fn resolve_region(region: &RegionSpec, carbons: &CarbonSet) -> Result<Vec<usize>, RegionError> {
    let chain_len = carbons
        .source_map
        .last()
        .map(|(r, _)| *r)
        .unwrap_or(0);
    if region.first_residue == 0
        || region.first_residue > region.last_residue
        || region.last_residue > chain_len
    {
        return Err(RegionError::RegionOutOfBounds {
            name: region.name.clone(),
            first: region.first_residue,
            last: region.last_residue,
            chain_len,
        });
    }
    let indices: Vec<usize> = carbons
        .source_map
        .iter()
        .enumerate()
        .filter(|(_, (res, _))| {
            *res >= region.first_residue && *res <= region.last_residue
        })
        .map(|(i, _)| i)
        .collect();
    if indices.len() < 5 {
        return Err(RegionError::RegionTooSmall {
            name: region.name.clone(),
            carbons: indices.len(),
        });
    }
    Ok(indices)
}

/// Validate the frame-level invariants: finite coordinates and strictly
/// increasing residue indices.
pub fn validate_frame(frame: &Frame) -> Result<(), String> {
    let mut prev = 0usize;
    for res in &frame.residues {
        if res.residue_index <= prev {
            return Err(format!(
                "residue index {} not strictly increasing in frame {}",
                res.residue_index, frame.frame_index
            ));
        }
        prev = res.residue_index;
        if !geom::is_finite(res.alpha) || res.beta.map_or(false, |b| !geom::is_finite(b)) {
            return Err(format!(
                "non-finite coordinate in residue {} of frame {}",
                res.residue_index, frame.frame_index
            ));
        }
    }
    Ok(())
}
