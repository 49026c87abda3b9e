//! PDB ingestion: CA/CB extraction from multi-model files or per-frame
//! directories, plus the matching writer used to persist frames.
//!
//! Only the columns we need are read: record name (1-6), atom name (13-16),
//! altLoc (17), residue name (18-20), chain id (22), residue number (23-26)
//! and x/y/z (31-54). Everything that is not a CA/CB ATOM record is ignored.
//! Only the first chain encountered is used.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::frame::{validate_frame, Frame, ResidueRecord};
use crate::geom::Point3;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed record at {location}: {reason}")]
    MalformedRecord { location: String, reason: String },
    #[error("residue {residue_index} at {location} has a CB atom but no CA")]
    MissingAlphaCarbon {
        residue_index: usize,
        location: String,
    },
    #[error("non-GLY residue {residue_index} ({residue_name}) at {location} has no CB atom (strict mode)")]
    MissingBetaCarbon {
        residue_index: usize,
        residue_name: String,
        location: String,
    },
    #[error("frame {frame_index} topology differs from first frame: {detail}")]
    InconsistentTopology { frame_index: usize, detail: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} contains no frames")]
    NoFrames { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// MODEL/ENDMDL delimited; a file without MODEL records is one frame.
    MultiModel,
    /// The whole source is a single frame.
    SingleFrame,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Reject non-GLY residues lacking a CB (default). When false, such
    /// residues are treated like Glycine and a warning is recorded.
    pub strict_beta: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { strict_beta: true }
    }
}

#[derive(Debug, Default)]
pub struct ParseOutput {
    pub frames: Vec<Frame>,
    pub warnings: Vec<String>,
}

struct PendingResidue {
    residue_index: usize,
    residue_name: String,
    alpha: Option<Point3>,
    beta: Option<Point3>,
    location: String,
}

struct FrameBuilder {
    residues: Vec<PendingResidue>,
    chain: Option<char>,
    saw_atoms: bool,
}

impl FrameBuilder {
    fn new() -> Self {
        Self {
            residues: Vec::new(),
            chain: None,
            saw_atoms: false,
        }
    }

    fn push_atom(
        &mut self,
        line: &str,
        location: String,
        warnings: &mut Vec<String>,
    ) -> Result<(), ParseError> {
        let field = |lo: usize, hi: usize| -> &str {
            line.get(lo..hi.min(line.len())).unwrap_or("").trim()
        };
        let atom_name = field(12, 16);
        if atom_name != "CA" && atom_name != "CB" {
            return Ok(());
        }
        let alt_loc = line.as_bytes().get(16).copied().unwrap_or(b' ');
        if alt_loc != b' ' {
            return Err(ParseError::MalformedRecord {
                location,
                reason: format!("alternate location indicator '{}'", alt_loc as char),
            });
        }
        let chain_id = line.chars().nth(21).unwrap_or(' ');
        match self.chain {
            None => self.chain = Some(chain_id),
            Some(c) if c != chain_id => {
                if !warnings.iter().any(|w| w.contains("ignoring chain")) {
                    warnings.push(format!(
                        "{location}: ignoring chain '{chain_id}' (using first chain '{c}')"
                    ));
                }
                return Ok(());
            }
            _ => {}
        }
        self.saw_atoms = true;
        let residue_name = field(17, 20).to_string();
        let residue_index: usize =
            field(22, 26)
                .parse()
                .map_err(|_| ParseError::MalformedRecord {
                    location: location.clone(),
                    reason: format!("bad residue number '{}'", field(22, 26)),
                })?;
        let coord = |lo: usize, hi: usize, axis: &str| -> Result<f64, ParseError> {
            field(lo, hi)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ParseError::MalformedRecord {
                    location: location.clone(),
                    reason: format!("bad {axis} coordinate '{}'", field(lo, hi)),
                })
        };
        let pos = [
            coord(30, 38, "x")?,
            coord(38, 46, "y")?,
            coord(46, 54, "z")?,
        ];

        let residue = match self.residues.last_mut() {
            Some(r) if r.residue_index == residue_index => r,
            Some(r) if r.residue_index > residue_index => {
                return Err(ParseError::MalformedRecord {
                    location,
                    reason: format!(
                        "residue number {residue_index} not increasing (previous {})",
                        r.residue_index
                    ),
                });
            }
            _ => {
                self.residues.push(PendingResidue {
                    residue_index,
                    residue_name: residue_name.clone(),
                    alpha: None,
                    beta: None,
                    location: location.clone(),
                });
                self.residues.last_mut().unwrap()
            }
        };
        let slot = if atom_name == "CA" {
            &mut residue.alpha
        } else {
            &mut residue.beta
        };
        if slot.is_some() {
            return Err(ParseError::MalformedRecord {
                location,
                reason: format!("duplicate {atom_name} for residue {residue_index}"),
            });
        }
        *slot = Some(pos);
        Ok(())
    }

    fn finish(
        self,
        frame_index: usize,
        opts: &ParseOptions,
        warnings: &mut Vec<String>,
    ) -> Result<Option<Frame>, ParseError> {
        if !self.saw_atoms {
            return Ok(None);
        }
        let mut residues = Vec::with_capacity(self.residues.len());
        for pending in self.residues {
            let alpha = match pending.alpha {
                Some(a) => a,
                None => {
                    return Err(ParseError::MissingAlphaCarbon {
                        residue_index: pending.residue_index,
                        location: pending.location,
                    })
                }
            };
            let beta = if pending.beta.is_none() && pending.residue_name != "GLY" {
                if opts.strict_beta {
                    return Err(ParseError::MissingBetaCarbon {
                        residue_index: pending.residue_index,
                        residue_name: pending.residue_name,
                        location: pending.location,
                    });
                }
                warnings.push(format!(
                    "{}: residue {} ({}) has no CB, treating like GLY",
                    pending.location, pending.residue_index, pending.residue_name
                ));
                None
            } else {
                pending.beta
            };
            residues.push(ResidueRecord {
                residue_index: pending.residue_index,
                residue_name: pending.residue_name,
                alpha,
                beta,
            });
        }
        let frame = Frame {
            frame_index,
            residues,
        };
        validate_frame(&frame).map_err(|reason| ParseError::MalformedRecord {
            location: format!("frame {frame_index}"),
            reason,
        })?;
        Ok(Some(frame))
    }
}

/// Parse PDB text into ordered frames. Frame indices are assigned in
/// encounter order starting at `first_index`.
pub fn parse_pdb(
    text: &str,
    mode: ParseMode,
    opts: &ParseOptions,
    first_index: usize,
) -> Result<ParseOutput, ParseError> {
    let mut out = ParseOutput::default();
    let mut builder = FrameBuilder::new();
    let mut next_index = first_index;
    let mut in_model = false;
    let mut saw_model = false;

    for (lineno, line) in text.lines().enumerate() {
        let location = format!("line {}", lineno + 1);
        let record = line.get(0..6).unwrap_or(line).trim_end();
        match record {
            "MODEL" if mode == ParseMode::MultiModel => {
                saw_model = true;
                in_model = true;
                builder = FrameBuilder::new();
            }
            "ENDMDL" if mode == ParseMode::MultiModel => {
                in_model = false;
                let done = std::mem::replace(&mut builder, FrameBuilder::new());
                if let Some(frame) = done.finish(next_index, opts, &mut out.warnings)? {
                    check_topology(&out.frames, &frame)?;
                    out.frames.push(frame);
                    next_index += 1;
                }
            }
            "ATOM" => {
                if mode == ParseMode::MultiModel && saw_model && !in_model {
                    continue;
                }
                builder.push_atom(line, location, &mut out.warnings)?;
            }
            _ => {}
        }
    }
    if !saw_model || mode == ParseMode::SingleFrame {
        if let Some(frame) = builder.finish(next_index, opts, &mut out.warnings)? {
            check_topology(&out.frames, &frame)?;
            out.frames.push(frame);
        }
    }
    Ok(out)
}

fn check_topology(frames: &[Frame], frame: &Frame) -> Result<(), ParseError> {
    let first = match frames.first() {
        Some(f) => f,
        None => return Ok(()),
    };
    if first.topology() != frame.topology() {
        return Err(ParseError::InconsistentTopology {
            frame_index: frame.frame_index,
            detail: format!(
                "{} residues vs {} in frame 0, or differing Glycine positions",
                frame.residues.len(),
                first.residues.len()
            ),
        });
    }
    Ok(())
}

/// `*.pdb` files in a directory, sorted by the numeric value of the trailing
/// digits of their stem. Files without a numeric stem are ignored.
pub fn list_frame_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>, ParseError> {
    let entries = fs::read_dir(dir).map_err(|source| ParseError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| ParseError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pdb") {
            continue;
        }
        let stem = match path.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s,
            None => continue,
        };
        let digits: String = stem
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if let Ok(num) = digits.parse::<u64>() {
            files.push((num, path));
        }
    }
    files.sort();
    Ok(files)
}

/// Read a whole trajectory: a multi-model file, or a directory of one-frame
/// `*.pdb` files. Topology is checked against the first frame either way.
pub fn read_trajectory(path: &Path, opts: &ParseOptions) -> Result<ParseOutput, ParseError> {
    if path.is_dir() {
        let mut out = ParseOutput::default();
        for (_, file) in list_frame_files(path)? {
            let text = fs::read_to_string(&file).map_err(|source| ParseError::Io {
                path: file.clone(),
                source,
            })?;
            let parsed = parse_pdb(&text, ParseMode::SingleFrame, opts, out.frames.len())?;
            out.warnings.extend(parsed.warnings);
            for frame in parsed.frames {
                check_topology(&out.frames, &frame)?;
                out.frames.push(frame);
            }
        }
        if out.frames.is_empty() {
            return Err(ParseError::NoFrames {
                path: path.to_path_buf(),
            });
        }
        Ok(out)
    } else {
        let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let out = parse_pdb(&text, ParseMode::MultiModel, opts, 0)?;
        if out.frames.is_empty() {
            return Err(ParseError::NoFrames {
                path: path.to_path_buf(),
            });
        }
        Ok(out)
    }
}

/// Write a frame's CA/CB records as PDB text (coordinates at the format's
/// 3-decimal precision).
pub fn write_frame_pdb<W: Write>(frame: &Frame, w: &mut W) -> std::io::Result<()> {
    let mut serial = 1u32;
    let mut atom = |w: &mut W, name: &str, res: &ResidueRecord, pos: Point3| {
        let line = format!(
            "ATOM  {serial:>5} {name:<4} {res_name:<3} A{res_idx:>4}    {x:8.3}{y:8.3}{z:8.3}  1.00  0.00           C",
            serial = serial,
            name = format!(" {name}"),
            res_name = res.residue_name,
            res_idx = res.residue_index,
            x = pos[0],
            y = pos[1],
            z = pos[2],
        );
        serial += 1;
        writeln!(w, "{line}")
    };
    for res in &frame.residues {
        atom(w, "CA", res, res.alpha)?;
        if let Some(beta) = res.beta {
            atom(w, "CB", res, beta)?;
        }
    }
    writeln!(w, "END")
}
