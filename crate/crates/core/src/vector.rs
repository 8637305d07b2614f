//! Small fixed-size complex vector helpers.

use crate::C64;

pub type CVec3 = [C64; 3];
pub type CVec4 = [C64; 4];

pub const ZERO3: CVec3 = [C64 { re: 0.0, im: 0.0 }; 3];

pub fn real3(v: [f64; 3]) -> CVec3 {
    [v[0].into(), v[1].into(), v[2].into()]
}

pub fn conj3(v: &CVec3) -> CVec3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

pub fn scale3(s: C64, v: &CVec3) -> CVec3 {
    [s * v[0], s * v[1], s * v[2]]
}

pub fn add3(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Bilinear dot product, no conjugation.
pub fn dot3(a: &CVec3, b: &CVec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian product `a* · b`.
pub fn hdot3(a: &CVec3, b: &CVec3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn cross3(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(v: &CVec3) -> f64 {
    hdot3(v, v).re.sqrt()
}

pub fn max_abs3(v: &CVec3) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, l: usize) -> f64 {
    match (i, j, l) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Minkowski metric `diag(1, -1, -1, -1)`.
pub fn minkowski(mu: usize) -> f64 {
    if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_μ b^μ` for two contravariant vectors.
pub fn minkowski_dot(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    (0..4).map(|mu| a[mu] * b[mu] * minkowski(mu)).sum()
}
