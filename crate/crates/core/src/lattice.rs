//! Periodic cubic box, its reciprocal lattice and plane waves on the grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::C64;

/// Cubic periodic box of side `L` sampled by `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    side_length: f64,
    grid_points: usize,
}

impl BoxGeometry {
    pub fn new(side_length: f64, grid_points: usize) -> Result<Self> {
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "side length must be positive, got {side_length}"
            )));
        }
        if grid_points < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 grid points per axis, got {grid_points}"
            )));
        }
        Ok(Self {
            side_length,
            grid_points,
        })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn volume(&self) -> f64 {
        self.side_length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / self.grid_points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Reciprocal lattice spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.side_length
    }

    pub fn mode(&self, n: [i32; 3]) -> Result<ModeIndex> {
        ModeIndex::new(self, n)
    }

    /// Grid sums of `exp(i m·x)` are exact Kronecker deltas for every integer
    /// `m` with `|m_i| <= max_index` iff `N > max_index`.
    pub fn require_alias_free(&self, max_index: i64) -> Result<()> {
        let required = (max_index + 1).max(2) as usize;
        if self.grid_points < required {
            return Err(Error::UnderResolvedGrid {
                points: self.grid_points,
                max_index,
                required,
            });
        }
        Ok(())
    }

    /// The quadrature condition `N >= 2 n_max + 2` for products of two modes.
    pub fn require_quadrature(&self, n_max: i32) -> Result<()> {
        let required = 2 * n_max as usize + 2;
        if self.grid_points < required {
            return Err(Error::UnderResolvedGrid {
                points: self.grid_points,
                max_index: 2 * n_max as i64,
                required,
            });
        }
        Ok(())
    }

    /// Grid points `x_j = (L/N) j` in lexicographic order of `j`.
    pub fn grid(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let n = self.grid_points;
        let h = self.spacing();
        (0..n * n * n).map(move |idx| {
            let j1 = idx / (n * n);
            let j2 = (idx / n) % n;
            let j3 = idx % n;
            [j1 as f64 * h, j2 as f64 * h, j3 as f64 * h]
        })
    }

    pub fn grid_len(&self) -> usize {
        self.grid_points.pow(3)
    }
}

/// A nonzero point `n` of the reciprocal lattice with `k = (2π/L) n`.
#[derive(Debug, Clone, Copy)]
pub struct ModeIndex {
    n: [i32; 3],
    k: [f64; 3],
    omega: f64,
}

impl ModeIndex {
    pub fn new(geometry: &BoxGeometry, n: [i32; 3]) -> Result<Self> {
        if n == [0, 0, 0] {
            return Err(Error::ZeroMode);
        }
        let dk = geometry.dk();
        let k = [n[0] as f64 * dk, n[1] as f64 * dk, n[2] as f64 * dk];
        let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        Ok(Self { n, k, omega })
    }

    pub fn n(&self) -> [i32; 3] {
        self.n
    }

    pub fn k(&self) -> [f64; 3] {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn unit(&self) -> [f64; 3] {
        [self.k[0] / self.omega, self.k[1] / self.omega, self.k[2] / self.omega]
    }

    /// Contravariant four-wavevector `(ω, k)`.
    pub fn four_vector(&self) -> [f64; 4] {
        [self.omega, self.k[0], self.k[1], self.k[2]]
    }

    pub fn negated(&self) -> Self {
        Self {
            n: [-self.n[0], -self.n[1], -self.n[2]],
            k: [-self.k[0], -self.k[1], -self.k[2]],
            omega: self.omega,
        }
    }

    /// `exp(-i(ωt - k·x))`.
    pub fn plane_wave(&self, x: [f64; 3], t: f64) -> C64 {
        plane_wave(self, x, t)
    }
}

impl PartialEq for ModeIndex {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for ModeIndex {}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n[0], self.n[1], self.n[2])
    }
}

/// `exp(-i k_μ x^μ)` with `k_μ x^μ = ωt - k·x`.
pub fn plane_wave(k: &ModeIndex, x: [f64; 3], t: f64) -> C64 {
    let kx = k.k[0] * x[0] + k.k[1] * x[1] + k.k[2] * x[2];
    C64::from_polar(1.0, kx - k.omega * t)
}

/// Ordered set of modes sharing one geometry.
#[derive(Debug, Clone)]
pub struct ModeSet {
    geometry: BoxGeometry,
    modes: Vec<ModeIndex>,
    lookup: HashMap<[i32; 3], usize>,
}

impl ModeSet {
    /// All `n` with `0 < max|n_i| <= n_max`, lexicographic.
    pub fn cube(geometry: BoxGeometry, n_max: i32) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidGeometry(format!(
                "mode cutoff must be >= 1, got {n_max}"
            )));
        }
        let mut indices = Vec::new();
        for a in -n_max..=n_max {
            for b in -n_max..=n_max {
                for c in -n_max..=n_max {
                    if [a, b, c] != [0, 0, 0] {
                        indices.push([a, b, c]);
                    }
                }
            }
        }
        Self::from_indices(geometry, &indices)
    }

    /// Arbitrary lattice subset; duplicates removed, order made lexicographic.
    pub fn from_indices(geometry: BoxGeometry, indices: &[[i32; 3]]) -> Result<Self> {
        let mut sorted: Vec<[i32; 3]> = indices.to_vec();
        sorted.sort();
        sorted.dedup();
        let modes = sorted
            .iter()
            .map(|&n| ModeIndex::new(&geometry, n))
            .collect::<Result<Vec<_>>>()?;
        let lookup = sorted.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        Ok(Self {
            geometry,
            modes,
            lookup,
        })
    }

    /// The given generators together with their negatives.
    pub fn symmetric(geometry: BoxGeometry, generators: &[[i32; 3]]) -> Result<Self> {
        let mut all = generators.to_vec();
        all.extend(generators.iter().map(|n| [-n[0], -n[1], -n[2]]));
        Self::from_indices(geometry, &all)
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn position(&self, n: [i32; 3]) -> Option<usize> {
        self.lookup.get(&n).copied()
    }

    pub fn get(&self, n: [i32; 3]) -> Result<&ModeIndex> {
        self.position(n)
            .map(|i| &self.modes[i])
            .ok_or_else(|| Error::UnknownMode(format!("{n:?}")))
    }

    pub fn is_negation_closed(&self) -> bool {
        self.modes
            .iter()
            .all(|m| self.lookup.contains_key(&m.negated().n))
    }

    /// Largest `|n_i|` over the set.
    pub fn max_index(&self) -> i32 {
        self.modes
            .iter()
            .flat_map(|m| m.n.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn mean_omega(&self) -> f64 {
        self.modes.iter().map(|m| m.omega).sum::<f64>() / self.modes.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn two_pi_box(n: usize) -> BoxGeometry {
        BoxGeometry::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn mode_counts() {
        let g = two_pi_box(8);
        assert_eq!(ModeSet::cube(g, 1).unwrap().len(), 26);
        assert_eq!(ModeSet::cube(g, 2).unwrap().len(), 124);
    }

    #[test]
    fn unit_mode_on_two_pi_box() {
        let set = ModeSet::cube(two_pi_box(8), 1).unwrap();
        let m = set.get([0, 0, 1]).unwrap();
        assert_eq!(m.k(), [0.0, 0.0, 1.0]);
        assert_eq!(m.omega(), 1.0);
    }

    #[test]
    fn cube_is_negation_closed() {
        for n_max in 1..=2 {
            let set = ModeSet::cube(two_pi_box(8), n_max).unwrap();
            let s: BTreeSet<_> = set.modes().iter().map(|m| m.n()).collect();
            let neg: BTreeSet<_> = set.modes().iter().map(|m| m.negated().n()).collect();
            assert_eq!(s, neg);
            assert!(set.is_negation_closed());
        }
    }

    #[test]
    fn one_sided_set_is_not_closed() {
        let set = ModeSet::from_indices(two_pi_box(8), &[[0, 0, 1]]).unwrap();
        assert!(!set.is_negation_closed());
    }

    #[test]
    fn zero_mode_rejected() {
        assert_eq!(two_pi_box(4).mode([0, 0, 0]).unwrap_err(), Error::ZeroMode);
        assert!(ModeSet::cube(two_pi_box(4), 0).is_err());
    }

    #[test]
    fn bad_geometry_rejected() {
        assert!(BoxGeometry::new(-1.0, 8).is_err());
        assert!(BoxGeometry::new(1.0, 1).is_err());
        assert!(two_pi_box(5).require_quadrature(2).is_err());
        assert!(two_pi_box(6).require_quadrature(2).is_ok());
    }

    #[test]
    fn plane_wave_values() {
        let g = two_pi_box(8);
        let k = g.mode([0, 0, 1]).unwrap();
        assert!((plane_wave(&k, [0.0; 3], 0.0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((plane_wave(&k, [0.0, 0.0, PI], 0.0) - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn discrete_orthogonality() {
        // direct summation over the grid
        let g = two_pi_box(6);
        let set = ModeSet::cube(g, 2).unwrap();
        let cv = g.cell_volume();
        let grid: Vec<_> = g.grid().collect();
        for a in set.modes() {
            for b in set.modes() {
                let sum: C64 = grid
                    .iter()
                    .map(|&x| plane_wave(a, x, 0.0) * plane_wave(b, x, 0.0).conj())
                    .sum::<C64>()
                    * cv;
                let expected = if a == b { g.volume() } else { 0.0 };
                assert!(
                    (sum - C64::new(expected, 0.0)).norm() <= 1e-12 * g.volume(),
                    "{a} {b} {sum}"
                );
            }
        }
    }

    #[test]
    fn grid_layout() {
        let g = two_pi_box(4);
        let pts: Vec<_> = g.grid().collect();
        assert_eq!(pts.len(), 64);
        assert_eq!(pts[0], [0.0; 3]);
        assert_eq!(pts[1], [0.0, 0.0, g.spacing()]);
    }

    proptest::proptest! {
        #[test]
        fn plane_wave_unit_modulus(
            n in proptest::array::uniform3(-3i32..=3),
            j in proptest::array::uniform3(0usize..8),
            t in -10.0f64..10.0,
        ) {
            proptest::prop_assume!(n != [0, 0, 0]);
            let g = two_pi_box(8);
            let k = g.mode(n).unwrap();
            let h = g.spacing();
            let x = [j[0] as f64 * h, j[1] as f64 * h, j[2] as f64 * h];
            proptest::prop_assert!((plane_wave(&k, x, t).norm() - 1.0).abs() < 1e-14);
        }
    }
}
