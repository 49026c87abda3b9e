//! Shared test oracles, kept independent of the library's solver paths:
//! a plain cyclic Jacobi eigensolver, a rotation-grid RMSD minimizer,
//! Spearman rank correlation and random-geometry helpers.

#![allow(dead_code)]

use rand::Rng;

pub type Point3 = [f64; 3];

/// Eigenvalues of a dense symmetric matrix by plain cyclic Jacobi sweeps
/// with full two-sided rotations, sorted ascending. No thresholding, no
/// tridiagonalization; deliberately the dumbest correct implementation,
/// independent of the library's QL path.
pub fn oracle_eigenvalues(n: usize, entries: &[f64]) -> Vec<f64> {
    assert_eq!(entries.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let mut a = entries.to_vec();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let tol = 1e-14 * off(&a).max(f64::MIN_POSITIVE);
    for _sweep in 0..200 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    d
}

/// Spectral norm of a symmetric matrix via the oracle solver.
pub fn oracle_spectral_norm(n: usize, entries: &[f64]) -> f64 {
    oracle_eigenvalues(n, entries)
        .into_iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
}

pub fn rotation_from_quaternion(q: [f64; 4]) -> [[f64; 3]; 3] {
    let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let [w, x, y, z] = [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm];
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    let gauss = |rng: &mut R| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    rotation_from_quaternion([gauss(rng), gauss(rng), gauss(rng), gauss(rng)])
}

fn euler_rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rz2 = [[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]];
    mat_mul(&mat_mul(&rz, &ry), &rz2)
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn apply(rot: &[[f64; 3]; 3], t: Point3, p: Point3) -> Point3 {
    [
        rot[0][0] * p[0] + rot[0][1] * p[1] + rot[0][2] * p[2] + t[0],
        rot[1][0] * p[0] + rot[1][1] * p[1] + rot[1][2] * p[2] + t[1],
        rot[2][0] * p[0] + rot[2][1] * p[1] + rot[2][2] * p[2] + t[2],
    ]
}

fn centroid(pts: &[Point3]) -> Point3 {
    let n = pts.len() as f64;
    let mut c = [0.0; 3];
    for p in pts {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    c
}

fn rmsd_for_rotation(a: &[Point3], b: &[Point3], rot: &[[f64; 3]; 3]) -> f64 {
    let ca = centroid(a);
    let cb = centroid(b);
    let mut sum = 0.0;
    for (p, q) in a.iter().zip(b) {
        let pc = [p[0] - ca[0], p[1] - ca[1], p[2] - ca[2]];
        let qc = [q[0] - cb[0], q[1] - cb[1], q[2] - cb[2]];
        let rq = apply(rot, [0.0; 3], qc);
        for k in 0..3 {
            sum += (pc[k] - rq[k]).powi(2);
        }
    }
    (sum / a.len() as f64).sqrt()
}

/// Brute-force minimum RMSD over rotation space: coarse Euler-angle grid
/// followed by shrinking local refinement.
pub fn rmsd_bruteforce(a: &[Point3], b: &[Point3]) -> f64 {
    let steps = 14usize;
    let tau = std::f64::consts::TAU;
    let mut best = (f64::INFINITY, [0.0f64; 3]);
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let angles = [
                    i as f64 / steps as f64 * tau,
                    j as f64 / steps as f64 * std::f64::consts::PI,
                    k as f64 / steps as f64 * tau,
                ];
                let v = rmsd_for_rotation(a, b, &euler_rotation(angles[0], angles[1], angles[2]));
                if v < best.0 {
                    best = (v, angles);
                }
            }
        }
    }
    let mut step = tau / steps as f64;
    let mut angles = best.1;
    for _ in 0..60 {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut trial = angles;
                trial[axis] += dir * step;
                let v = rmsd_for_rotation(a, b, &euler_rotation(trial[0], trial[1], trial[2]));
                if v < best.0 {
                    best = (v, trial);
                    angles = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        }
    }
    best.0
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Random 3D point cloud in a box of the given half-width.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
            ]
        })
        .collect()
}

/// Random symmetric matrix with entries in [-scale, scale].
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-scale..scale);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}
