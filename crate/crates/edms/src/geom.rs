//! Small 3D vector helpers shared across the crate.

/// Cartesian coordinate in Angstroms.
pub type Point3 = [f64; 3];

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Squared Euclidean distance.
pub fn dist2(a: Point3, b: Point3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

pub fn centroid(points: &[Point3]) -> Point3 {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        c = add(c, *p);
    }
    scale(c, 1.0 / n)
}

/// Linear interpolation between two points, t in [0, 1].
pub fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    add(scale(a, 1.0 - t), scale(b, t))
}

pub fn is_finite(p: Point3) -> bool {
    p.iter().all(|v| v.is_finite())
}

/// Apply a 3x3 rotation matrix (row-major) followed by a translation.
pub fn transform(rot: &[[f64; 3]; 3], trans: Point3, p: Point3) -> Point3 {
    [
        dot(rot[0], p) + trans[0],
        dot(rot[1], p) + trans[1],
        dot(rot[2], p) + trans[2],
    ]
}
