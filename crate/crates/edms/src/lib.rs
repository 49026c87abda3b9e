//! In-situ reduction of protein trajectories to eigenvalue metadata.
//!
//! Each frame is mapped, in isolation, to a handful of eigenvalues of
//! squared-distance matrices over its representative carbons (CA plus the
//! side-chain center stored as CB, one carbon only for Glycine). The
//! per-frame metadata series is then scanned for stable conformational
//! regions; representative frames are kept and the rest can be dropped.
//!
//! - [`pdb`] / [`frame`] — trajectory ingestion and carbon extraction
//! - [`spectra`] — distance matrices and the Jacobi eigensolver
//! - [`store`] — append-only binary metadata store with CSV export
//! - [`stability`] — stable-region detection and retention decisions
//! - [`validate`] — superposed RMSD, heat maps, synthetic trajectories
//! - [`pipeline`] / [`config`] — the end-to-end streaming driver
//!
//! See the crate examples for runnable walk-throughs of each capability;
//! the `edms` binary wires them into `analyze`, `watch`, `report` and
//! `synth` subcommands.

pub mod config;
pub mod frame;
pub mod geom;
pub mod pdb;
pub mod pipeline;
pub mod spectra;
pub mod stability;
pub mod store;
pub mod validate;

pub use config::RunConfig;
pub use frame::{extract_carbons, resolve_region, CarbonSet, Frame, RegionSpec, ResidueRecord};
pub use pdb::{parse_pdb, read_trajectory, write_frame_pdb, ParseMode, ParseOptions};
pub use pipeline::{AnalysisResult, AnalyzeEngine};
pub use spectra::{
    build_matrix, dense_symmetric_eigenvalues, jacobi_eigenvalues, make_packet,
    symmetric_eigenvalues, DistanceMatrix, MetadataPacket, Precision, Spectrum, SpectrumRequest,
};
pub use stability::{
    decide_retention, detect_stable_regions, select_representatives, DetectorConfig,
    OnlineDetector, RetentionDecision, StableRegion, Verdict,
};
pub use store::{export_csv, load, SeriesHeader, SeriesView, SeriesWriter, StoreMode};
pub use validate::{build_heatmap, generate_synthetic, rmsd, HeatMap, SyntheticSpec};
