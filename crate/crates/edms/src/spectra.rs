//! Distance matrices and their eigenvalue metadata.
//!
//! Three matrix kinds are built from a frame's carbon set: the full
//! squared-distance matrix over all carbons, a submatrix over one region,
//! and the inter-structure block matrix holding only cross-distances
//! between two disjoint regions. Eigenvalues come from Householder
//! tridiagonalization plus implicit-shift QL; a threshold Jacobi solver
//! is kept alongside as an independent in-crate cross-check.

use thiserror::Error;

use crate::frame::{resolve_region, CarbonSet, RegionSpec, RegionError};
use crate::geom::dist2;

/// Off-diagonal Frobenius tolerance relative to the initial norm.
const JACOBI_REL_TOL: f64 = 1e-12;
/// Sweep cap before reporting non-convergence.
const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues with |lambda| above this fraction of max(1, lambda_max)
/// count toward the effective rank.
pub const RANK_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("inter-structure regions '{a}' and '{b}' overlap")]
    DisjointnessViolation { a: String, b: String },
    #[error("Jacobi iteration did not converge within {JACOBI_MAX_SWEEPS} sweeps (order {order})")]
    NoConvergence { order: usize },
}

/// Which matrix to build for each frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRequest {
    /// Stable identifier used in storage headers and CSV columns.
    pub request_id: String,
    pub kind: RequestKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RequestKind {
    /// EDM over every carbon of the protein.
    Full,
    /// EDM over one region's carbons.
    Sub(RegionSpec),
    /// Block matrix [[0, C], [C^T, 0]] of cross-distances between two regions.
    Inter(RegionSpec, RegionSpec),
}

impl SpectrumRequest {
    pub fn full() -> Self {
        Self {
            request_id: "full".to_string(),
            kind: RequestKind::Full,
        }
    }

    pub fn sub(region: RegionSpec) -> Self {
        Self {
            request_id: region.name.clone(),
            kind: RequestKind::Sub(region),
        }
    }

    pub fn inter(a: RegionSpec, b: RegionSpec) -> Self {
        Self {
            request_id: format!("{}-{}", a.name, b.name),
            kind: RequestKind::Inter(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Full,
    Sub,
    Inter,
}

/// Dense symmetric matrix of squared distances (Angstroms^2).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub order: usize,
    /// Row-major, order x order.
    pub entries: Vec<f64>,
    pub kind: MatrixKind,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }
}

/// Eigenvalues of one distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// All eigenvalues, sorted ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_max: f64,
    /// Count of eigenvalues with |lambda| above the rank tolerance.
    pub effective_rank: usize,
}

impl Spectrum {
    pub fn rank_tolerance(&self) -> f64 {
        RANK_REL_TOL * self.lambda_max.max(1.0)
    }
}

/// Per-frame eigenvalue record, one entry per configured request.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataPacket {
    pub frame_index: usize,
    pub records: Vec<PacketRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub request_id: String,
    pub lambda_max: f64,
    /// The five retained eigenvalues (descending), kept only in full mode.
    pub retained: Option<[f64; 5]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Single,
}

/// Build the requested distance matrix from a carbon set.
pub fn build_matrix(
    carbons: &CarbonSet,
    request: &SpectrumRequest,
) -> Result<DistanceMatrix, SpectraError> {
    match &request.kind {
        RequestKind::Full => {
            let idx: Vec<usize> = (0..carbons.len()).collect();
            Ok(edm_over(carbons, &idx, MatrixKind::Full))
        }
        RequestKind::Sub(region) => {
            let idx = resolve_region(region, carbons)?;
            Ok(edm_over(carbons, &idx, MatrixKind::Sub))
        }
        RequestKind::Inter(ra, rb) => {
            let ia = resolve_region(ra, carbons)?;
            let ib = resolve_region(rb, carbons)?;
            if ia.iter().any(|i| ib.contains(i)) {
                return Err(SpectraError::DisjointnessViolation {
                    a: ra.name.clone(),
                    b: rb.name.clone(),
                });
            }
            Ok(inter_matrix(carbons, &ia, &ib))
        }
    }
}

fn edm_over(carbons: &CarbonSet, idx: &[usize], kind: MatrixKind) -> DistanceMatrix {
    let n = idx.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist2(carbons.positions[idx[i]], carbons.positions[idx[j]]);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix {
        order: n,
        entries,
        kind,
    }
}

fn inter_matrix(carbons: &CarbonSet, ia: &[usize], ib: &[usize]) -> DistanceMatrix {
    let (k, l) = (ia.len(), ib.len());
    let n = k + l;
    let mut entries = vec![0.0; n * n];
    for (i, &a) in ia.iter().enumerate() {
        for (j, &b) in ib.iter().enumerate() {
            let d = dist2(carbons.positions[a], carbons.positions[b]);
            entries[i * n + (k + j)] = d;
            entries[(k + j) * n + i] = d;
        }
    }
    DistanceMatrix {
        order: n,
        entries,
        kind: MatrixKind::Inter,
    }
}

/// Eigenvalues of a dense symmetric matrix, sorted ascending.
///
/// Householder tridiagonalization followed by implicit-shift QL. The
/// matrices here are small but arrive once per frame per request, so the
/// O(n^3)-with-small-constant reduction wins over Jacobi sweeps; the
/// Jacobi route below stays available as an algebraic cross-check.
pub fn dense_symmetric_eigenvalues(
    order: usize,
    entries: &[f64],
) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(entries.len(), order * order);
    let n = order;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![entries[0]]);
    }
    let mut a = entries.to_vec();
    let mut diag = vec![0.0f64; n];
    let mut sub = vec![0.0f64; n];

    // Householder reduction to tridiagonal form (values only).
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            sub[i] = a[i * n];
            diag[i] = 0.0;
            continue;
        }
        let scale: f64 = a[i * n..i * n + l + 1].iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            sub[i] = a[i * n + l];
            diag[i] = 0.0;
            continue;
        }
        let mut h = 0.0;
        for k in 0..=l {
            a[i * n + k] /= scale;
            h += a[i * n + k] * a[i * n + k];
        }
        let f = a[i * n + l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        sub[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        let mut f_acc = 0.0;
        for j in 0..=l {
            let mut g = 0.0;
            for k in 0..=j {
                g += a[j * n + k] * a[i * n + k];
            }
            for k in (j + 1)..=l {
                g += a[k * n + j] * a[i * n + k];
            }
            sub[j] = g / h;
            f_acc += sub[j] * a[i * n + j];
        }
        let hh = f_acc / (h + h);
        for j in 0..=l {
            let f = a[i * n + j];
            let g = sub[j] - hh * f;
            sub[j] = g;
            for k in 0..=j {
                a[j * n + k] -= f * sub[k] + g * a[i * n + k];
            }
        }
        diag[i] = h;
    }
    sub[0] = 0.0;
    for i in 0..n {
        diag[i] = a[i * n + i];
    }
    for i in 1..n {
        sub[i - 1] = sub[i];
    }
    sub[n - 1] = 0.0;

    // Implicit-shift QL on the tridiagonal.
    for l in 0..n {
        let mut iterations = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > JACOBI_MAX_SWEEPS {
                return Err(SpectraError::NoConvergence { order: n });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + sub[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    sub[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(diag)
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
/// Returns them sorted ascending.
pub fn jacobi_eigenvalues(order: usize, entries: &[f64]) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(entries.len(), order * order);
    let n = order;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![entries[0]]);
    }
    // Cyclic Jacobi with the usual threshold strategy: early sweeps skip
    // elements below a sweep threshold, later sweeps zero out elements
    // negligible against the diagonal. Only the upper triangle is updated.
    let mut a = entries.to_vec();
    let off_fro = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };
    let tol = JACOBI_REL_TOL * off_fro(&a).max(f64::MIN_POSITIVE);
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0f64; n];
    let mut converged = false;
    for sweep in 1..=JACOBI_MAX_SWEEPS {
        let mut sum_off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                sum_off += a[p * n + q].abs();
            }
        }
        if sum_off == 0.0 || off_fro(&a) <= tol {
            converged = true;
            break;
        }
        let thresh = if sweep < 4 {
            0.2 * sum_off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[p * n + q] = 0.0;
                let rotate = |a: &mut [f64], i: usize, j: usize| {
                    let g = a[i];
                    let h = a[j];
                    a[i] = g - s * (h + g * tau);
                    a[j] = h + s * (g - h * tau);
                };
                for j in 0..p {
                    rotate(&mut a, j * n + p, j * n + q);
                }
                for j in (p + 1)..q {
                    rotate(&mut a, p * n + j, j * n + q);
                }
                for j in (q + 1)..n {
                    rotate(&mut a, p * n + j, q * n + j);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        return Err(SpectraError::NoConvergence { order: n });
    }
    let mut eigenvalues = d;
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigenvalues)
}

/// Compute the full spectrum of a distance matrix.
pub fn symmetric_eigenvalues(matrix: &DistanceMatrix) -> Result<Spectrum, SpectraError> {
    let eigenvalues = dense_symmetric_eigenvalues(matrix.order, &matrix.entries)?;
    let lambda_max = eigenvalues.last().copied().unwrap_or(0.0);
    let tol = RANK_REL_TOL * lambda_max.max(1.0);
    let effective_rank = eigenvalues.iter().filter(|l| l.abs() > tol).count();
    Ok(Spectrum {
        eigenvalues,
        lambda_max,
        effective_rank,
    })
}

/// The five retained eigenvalues, descending. For EDMs these are the five
/// of largest magnitude (one positive, four most negative); for inter
/// matrices the five largest.
fn retained_five(spectrum: &Spectrum, kind: MatrixKind) -> [f64; 5] {
    let ev = &spectrum.eigenvalues;
    let mut out = [0.0; 5];
    match kind {
        MatrixKind::Full | MatrixKind::Sub => {
            let mut by_mag: Vec<f64> = ev.clone();
            by_mag.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap());
            let mut top: Vec<f64> = by_mag.into_iter().take(5).collect();
            top.sort_by(|x, y| y.partial_cmp(x).unwrap());
            for (i, v) in top.into_iter().enumerate() {
                out[i] = v;
            }
        }
        MatrixKind::Inter => {
            for (i, v) in ev.iter().rev().take(5).enumerate() {
                out[i] = *v;
            }
        }
    }
    out
}

fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

/// Build the metadata packet for one frame: one record per request, in
/// request order. With `Precision::Single` values are rounded through f32
/// so the in-memory packet matches what single-precision storage holds;
/// all arithmetic stays in double precision.
pub fn make_packet(
    frame_index: usize,
    carbons: &CarbonSet,
    requests: &[SpectrumRequest],
    precision: Precision,
    full5: bool,
) -> Result<MetadataPacket, SpectraError> {
    let mut records = Vec::with_capacity(requests.len());
    for request in requests {
        let matrix = build_matrix(carbons, request)?;
        let spectrum = symmetric_eigenvalues(&matrix)?;
        let quant = |v: f64| match precision {
            Precision::Double => v,
            Precision::Single => round_f32(v),
        };
        let retained = if full5 {
            let mut vals = retained_five(&spectrum, matrix.kind);
            for v in &mut vals {
                *v = quant(*v);
            }
            Some(vals)
        } else {
            None
        };
        records.push(PacketRecord {
            request_id: request.request_id.clone(),
            lambda_max: quant(spectrum.lambda_max),
            retained,
        });
    }
    Ok(MetadataPacket {
        frame_index,
        records,
    })
}
