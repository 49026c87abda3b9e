//! Append-only, frame-ordered persistence of metadata packets.
//!
//! Binary layout: magic `EDMS`, format version (u32 LE), a length-prefixed
//! UTF-8 JSON header, then fixed-size little-endian records. The fixed
//! stride gives O(1) random access by frame; no frame index is stored,
//! position encodes it. Truncated trailing records are recovered by
//! dropping the partial tail.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{MetadataPacket, PacketRecord, Precision};

pub const MAGIC: &[u8; 4] = b"EDMS";
pub const FORMAT_VERSION: u32 = 1;
/// Records buffered between automatic flushes.
pub const DEFAULT_FLUSH_EVERY: usize = 256;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("frame {got} appended out of order (expected {expected})")]
    OutOfOrderFrame { got: usize, expected: usize },
    #[error("packet request ids do not match store header (record {index}: '{got}' vs '{expected}')")]
    RequestMismatch {
        index: usize,
        got: String,
        expected: String,
    },
    #[error("corrupt header in {path}: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreMode {
    /// Largest eigenvalue only: one value per request per frame.
    Minimal,
    /// All five retained eigenvalues per request per frame.
    Full5,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesHeader {
    pub format_version: u32,
    pub request_ids: Vec<String>,
    pub precision: Precision,
    pub mode: StoreMode,
}

impl SeriesHeader {
    pub fn new(request_ids: Vec<String>, precision: Precision, mode: StoreMode) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            request_ids,
            precision,
            mode,
        }
    }

    pub fn values_per_request(&self) -> usize {
        match self.mode {
            StoreMode::Minimal => 1,
            StoreMode::Full5 => 5,
        }
    }

    pub fn value_size(&self) -> usize {
        match self.precision {
            Precision::Double => 8,
            Precision::Single => 4,
        }
    }

    /// Bytes per frame in the payload section.
    pub fn record_size(&self) -> usize {
        self.value_size() * self.request_ids.len() * self.values_per_request()
    }
}

/// In-memory eigenvalue series, one sequence per request id, all covering
/// frames 0..frame_count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesView {
    pub request_ids: Vec<String>,
    /// lambda_max sequences, indexed like request_ids; inner index is frame.
    pub lambda_max: Vec<Vec<f64>>,
    /// Retained eigenvalue rows (5 per frame), present in full5 stores.
    pub retained: Option<Vec<Vec<[f64; 5]>>>,
}

impl SeriesView {
    pub fn frame_count(&self) -> usize {
        self.lambda_max.first().map_or(0, |s| s.len())
    }

    pub fn series(&self, request_id: &str) -> Option<&[f64]> {
        let idx = self.request_ids.iter().position(|id| id == request_id)?;
        Some(&self.lambda_max[idx])
    }
}

/// Single writer with ordered appends.
pub struct SeriesWriter {
    path: PathBuf,
    writer: BufWriter<File>,
    header: SeriesHeader,
    next_frame: usize,
    flush_every: usize,
    since_flush: usize,
}

impl SeriesWriter {
    pub fn create(path: &Path, header: SeriesHeader) -> Result<Self, StoreError> {
        let file = File::create(path).map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        let header_json =
            serde_json::to_vec(&header).expect("header serialization cannot fail");
        let io_err = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        writer.write_all(MAGIC).map_err(io_err)?;
        writer
            .write_all(&header.format_version.to_le_bytes())
            .map_err(io_err)?;
        writer
            .write_all(&(header_json.len() as u32).to_le_bytes())
            .map_err(io_err)?;
        writer.write_all(&header_json).map_err(io_err)?;
        writer.flush().map_err(io_err)?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
            header,
            next_frame: 0,
            flush_every: DEFAULT_FLUSH_EVERY,
            since_flush: 0,
        })
    }

    pub fn with_flush_every(mut self, every: usize) -> Self {
        self.flush_every = every.max(1);
        self
    }

    pub fn header(&self) -> &SeriesHeader {
        &self.header
    }

    pub fn frames_written(&self) -> usize {
        self.next_frame
    }

    pub fn append(&mut self, packet: &MetadataPacket) -> Result<(), StoreError> {
        if packet.frame_index != self.next_frame {
            return Err(StoreError::OutOfOrderFrame {
                got: packet.frame_index,
                expected: self.next_frame,
            });
        }
        if packet.records.len() != self.header.request_ids.len() {
            return Err(StoreError::RequestMismatch {
                index: packet.records.len().min(self.header.request_ids.len()),
                got: format!("{} records", packet.records.len()),
                expected: format!("{} request ids", self.header.request_ids.len()),
            });
        }
        for (i, (record, expected)) in packet
            .records
            .iter()
            .zip(&self.header.request_ids)
            .enumerate()
        {
            if &record.request_id != expected {
                return Err(StoreError::RequestMismatch {
                    index: i,
                    got: record.request_id.clone(),
                    expected: expected.clone(),
                });
            }
        }
        let mut buf = Vec::with_capacity(self.header.record_size());
        for record in &packet.records {
            match self.header.mode {
                StoreMode::Minimal => self.push_value(&mut buf, record.lambda_max),
                StoreMode::Full5 => {
                    let retained = retained_or_pad(record);
                    for v in retained {
                        self.push_value(&mut buf, v);
                    }
                }
            }
        }
        debug_assert_eq!(buf.len(), self.header.record_size());
        self.writer.write_all(&buf).map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })?;
        self.next_frame += 1;
        self.since_flush += 1;
        if self.since_flush >= self.flush_every {
            self.flush()?;
        }
        Ok(())
    }

    fn push_value(&self, buf: &mut Vec<u8>, v: f64) {
        match self.header.precision {
            Precision::Double => buf.extend_from_slice(&v.to_le_bytes()),
            Precision::Single => buf.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }

    pub fn flush(&mut self) -> Result<(), StoreError> {
        self.since_flush = 0;
        self.writer.flush().map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

fn retained_or_pad(record: &PacketRecord) -> [f64; 5] {
    record.retained.unwrap_or([record.lambda_max, 0.0, 0.0, 0.0, 0.0])
}

#[derive(Debug)]
pub struct LoadedSeries {
    pub header: SeriesHeader,
    pub view: SeriesView,
    /// Bytes of a partial trailing record that were dropped, if any.
    pub truncated_bytes: usize,
}

pub fn load(path: &Path) -> Result<LoadedSeries, StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let corrupt = |reason: &str| StoreError::CorruptHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut bytes = Vec::new();
    File::open(path)
        .map_err(io_err)?
        .read_to_end(&mut bytes)
        .map_err(io_err)?;
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(corrupt(&format!("unsupported format version {version}")));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() < 12 + header_len {
        return Err(corrupt("truncated header block"));
    }
    let header: SeriesHeader = serde_json::from_slice(&bytes[12..12 + header_len])
        .map_err(|e| corrupt(&format!("bad header json: {e}")))?;
    if header.request_ids.is_empty() {
        return Err(corrupt("empty request id list"));
    }
    let payload = &bytes[12 + header_len..];
    let record_size = header.record_size();
    let frames = payload.len() / record_size;
    let truncated_bytes = payload.len() - frames * record_size;

    let n_req = header.request_ids.len();
    let per_req = header.values_per_request();
    let vsize = header.value_size();
    let mut lambda_max = vec![Vec::with_capacity(frames); n_req];
    let mut retained = if header.mode == StoreMode::Full5 {
        Some(vec![Vec::with_capacity(frames); n_req])
    } else {
        None
    };
    for f in 0..frames {
        let rec = &payload[f * record_size..(f + 1) * record_size];
        for r in 0..n_req {
            let base = r * per_req * vsize;
            let read_value = |slot: usize| -> f64 {
                let at = base + slot * vsize;
                match header.precision {
                    Precision::Double => {
                        f64::from_le_bytes(rec[at..at + 8].try_into().unwrap())
                    }
                    Precision::Single => {
                        f32::from_le_bytes(rec[at..at + 4].try_into().unwrap()) as f64
                    }
                }
            };
            lambda_max[r].push(read_value(0));
            if let Some(ret) = retained.as_mut() {
                let mut row = [0.0; 5];
                for (slot, v) in row.iter_mut().enumerate() {
                    *v = read_value(slot);
                }
                ret[r].push(row);
            }
        }
    }
    Ok(LoadedSeries {
        header: header.clone(),
        view: SeriesView {
            request_ids: header.request_ids,
            lambda_max,
            retained,
        },
        truncated_bytes,
    })
}

/// Payload size in bytes of an existing store file (total minus header).
pub fn payload_len(path: &Path) -> Result<u64, StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::open(path).map_err(io_err)?;
    let mut prefix = [0u8; 12];
    file.read_exact(&mut prefix).map_err(io_err)?;
    let header_len = u32::from_le_bytes(prefix[8..12].try_into().unwrap()) as u64;
    let total = file.metadata().map_err(io_err)?.len();
    Ok(total - 12 - header_len)
}

/// Write the view as CSV: header row `frame,<id>,...`, one row per frame,
/// values formatted so they re-parse exactly.
pub fn export_csv<W: Write>(view: &SeriesView, sink: &mut W) -> std::io::Result<usize> {
    write!(sink, "frame")?;
    for id in &view.request_ids {
        write!(sink, ",{id}")?;
    }
    writeln!(sink)?;
    let frames = view.frame_count();
    for f in 0..frames {
        write!(sink, "{f}")?;
        for series in &view.lambda_max {
            write!(sink, ",{}", series[f])?;
        }
        writeln!(sink)?;
    }
    Ok(frames)
}

/// Parse CSV produced by [`export_csv`].
pub fn import_csv(text: &str) -> Result<SeriesView, StoreError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(StoreError::CsvParse {
        line: 1,
        reason: "empty input".to_string(),
    })?;
    let mut cols = header.split(',');
    if cols.next() != Some("frame") {
        return Err(StoreError::CsvParse {
            line: 1,
            reason: "first column must be 'frame'".to_string(),
        });
    }
    let request_ids: Vec<String> = cols.map(|s| s.to_string()).collect();
    let mut lambda_max = vec![Vec::new(); request_ids.len()];
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let _frame = fields.next();
        for (r, field) in fields.enumerate() {
            let v: f64 = field.parse().map_err(|_| StoreError::CsvParse {
                line: lineno + 1,
                reason: format!("bad value '{field}'"),
            })?;
            if r >= lambda_max.len() {
                return Err(StoreError::CsvParse {
                    line: lineno + 1,
                    reason: "too many columns".to_string(),
                });
            }
            lambda_max[r].push(v);
        }
    }
    Ok(SeriesView {
        request_ids,
        lambda_max,
        retained: None,
    })
}
