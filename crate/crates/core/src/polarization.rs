//! Helicity basis `ε(k, λ)` and covariant polarizations `e^μ(k, s)`.
//!
//! The transverse pair is built from the spherical dyad of `k`:
//! `e₁ = θ̂`, `e₂ = φ̂`, `ε(k, ±1) = (e₁ ± i e₂)/√2`, `ε(k, 0) = k̂`.
//! On the polar axis the azimuth is fixed to zero, so `k ∥ +ẑ` gives
//! `ε(k, ±1) = (1, ±i, 0)/√2`. The global phase for other directions is a
//! gauge choice; nothing downstream depends on it beyond the helicity
//! relation `i k × ε(k, λ) = λ|k| ε(k, λ)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::lattice::ModeIndex;
use crate::vector::{cross3, hdot3, real3, CVec3, CVec4};
use crate::{C64, I};

/// Polarization index `s` of the covariant expansion.
pub const SCALAR: usize = 0;
pub const LONGITUDINAL: usize = 3;

#[derive(Debug, Clone)]
pub struct PolarizationBasis {
    pub k: ModeIndex,
    pub eps_plus: CVec3,
    pub eps_minus: CVec3,
    pub eps_zero: CVec3,
}

impl PolarizationBasis {
    /// `ε(k, λ)` for `λ ∈ {+1, -1, 0}`.
    pub fn eps(&self, lambda: i32) -> Result<&CVec3> {
        match lambda {
            1 => Ok(&self.eps_plus),
            -1 => Ok(&self.eps_minus),
            0 => Ok(&self.eps_zero),
            other => Err(Error::InvalidHelicity(other)),
        }
    }

    /// `e^μ(k, s)`: `s = 0` timelike, `s = 1, 2` circular, `s = 3` longitudinal.
    pub fn four(&self, s: usize) -> Result<CVec4> {
        let zero = C64::new(0.0, 0.0);
        let spatial = match s {
            0 => return Ok([C64::new(1.0, 0.0), zero, zero, zero]),
            1 => &self.eps_plus,
            2 => &self.eps_minus,
            3 => &self.eps_zero,
            other => return Err(Error::InvalidPolarization(other)),
        };
        Ok([zero, spatial[0], spatial[1], spatial[2]])
    }

    /// Spatial part of `e^μ(k, s)`.
    pub fn spatial(&self, s: usize) -> Result<CVec3> {
        let e = self.four(s)?;
        Ok([e[1], e[2], e[3]])
    }
}

/// Helicity of the spatial polarization `s` (`s = 0` has none).
pub fn helicity_of(s: usize) -> Option<i32> {
    match s {
        1 => Some(1),
        2 => Some(-1),
        3 => Some(0),
        _ => None,
    }
}

pub fn circular_basis(k: &ModeIndex) -> PolarizationBasis {
    let [kx, ky, kz] = k.k();
    let w = k.omega();
    let rho = (kx * kx + ky * ky).sqrt();
    let (cos_phi, sin_phi) = if rho == 0.0 {
        (1.0, 0.0)
    } else {
        (kx / rho, ky / rho)
    };
    let cos_theta = kz / w;
    let sin_theta = rho / w;
    let e1 = real3([cos_theta * cos_phi, cos_theta * sin_phi, -sin_theta]);
    let e2 = real3([-sin_phi, cos_phi, 0.0]);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let eps_plus = [0, 1, 2].map(|i| s * (e1[i] + I * e2[i]));
    let eps_minus = [0, 1, 2].map(|i| s * (e1[i] - I * e2[i]));
    PolarizationBasis {
        k: *k,
        eps_plus,
        eps_minus,
        eps_zero: real3(k.unit()),
    }
}

pub fn four_polarization(k: &ModeIndex, s: usize) -> Result<CVec4> {
    circular_basis(k).four(s)
}

/// Largest violation of the basis invariants: orthonormality, conjugation,
/// transversality, helicity and transverse completeness.
pub fn invariant_violation(basis: &PolarizationBasis) -> f64 {
    let k = basis.k;
    let kv = real3(k.k());
    let w = k.omega();
    let lams = [1, -1, 0];
    let mut worst: f64 = 0.0;
    for &a in &lams {
        for &b in &lams {
            let expect = if a == b { 1.0 } else { 0.0 };
            let d = hdot3(basis.eps(a).unwrap(), basis.eps(b).unwrap());
            worst = worst.max((d - C64::new(expect, 0.0)).norm());
        }
        // i k × ε = λ|k| ε
        let e = basis.eps(a).unwrap();
        let lhs = cross3(&kv, e).map(|c| I * c);
        for i in 0..3 {
            worst = worst.max((lhs[i] - e[i] * (a as f64 * w)).norm());
        }
    }
    for i in 0..3 {
        worst = worst.max((basis.eps_plus[i] - basis.eps_minus[i].conj()).norm());
    }
    let unit = k.unit();
    for i in 0..3 {
        worst = worst.max((basis.eps_zero[i] - C64::new(unit[i], 0.0)).norm());
    }
    let kdot = |e: &CVec3| (0..3).map(|i| e[i] * k.k()[i]).sum::<C64>().norm();
    worst = worst.max(kdot(&basis.eps_plus)).max(kdot(&basis.eps_minus));
    for i in 0..3 {
        for j in 0..3 {
            let sum = basis.eps_plus[i] * basis.eps_plus[j].conj()
                + basis.eps_minus[i] * basis.eps_minus[j].conj();
            let delta = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((sum - C64::new(delta - unit[i] * unit[j], 0.0)).norm());
        }
    }
    worst
}

/// Largest violation of `k_μ e^μ(k,1) = k_μ e^μ(k,2) = 0` and
/// `k_μ e^μ(k,0) = -k_μ e^μ(k,3)`.
pub fn contraction_violation(basis: &PolarizationBasis) -> f64 {
    let kv = basis.k.four_vector().map(|c| C64::new(c, 0.0));
    let c = |s| crate::vector::minkowski_dot(&kv, &basis.four(s).unwrap());
    c(1).norm().max(c(2).norm()).max((c(0) + c(3)).norm())
}
