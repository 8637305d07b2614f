//! Truncated occupation-number space over `(k, s)` modes with the
//! indefinite Gupta-Bleuler metric.
//!
//! Storage is an ordinary positive-definite basis. The indefinite metric is
//! the diagonal sign operator `M` with `M|n⟩ = (-1)^{Σ_k n(k,0)} |n⟩`, and
//! every adjoint in the physics is the η-adjoint `X† = M Xᴴ M`. The creation
//! operator of a scalar photon therefore carries a minus sign relative to the
//! standard one, and `[b(k,s), b†(k',s')] = -η_{ss'} δ_{kk'}` follows.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, ModeSet};
use crate::polarization::SCALAR;
use crate::{C64, I};

/// Maximum supported occupation cap.
pub const MAX_CAP: usize = 4;

const EMPTY: u32 = u32::MAX;

/// Sorted multiset of mode ids, padded with `EMPTY`.
pub type Occupation = [u32; MAX_CAP];

/// A ladder operator on one `(k, s)` mode: `b` or its η-adjoint `b†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub mode: u32,
    pub create: bool,
}

impl Ladder {
    pub fn annihilate(mode: u32) -> Self {
        Self {
            mode,
            create: false,
        }
    }

    pub fn create(mode: u32) -> Self {
        Self { mode, create: true }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            create: !self.create,
        }
    }
}

fn occ_len(occ: &Occupation) -> usize {
    occ.iter().take_while(|&&m| m != EMPTY).count()
}

fn occ_count(occ: &Occupation, mode: u32) -> usize {
    occ.iter().filter(|&&m| m == mode).count()
}

fn occ_remove(occ: &Occupation, mode: u32) -> Occupation {
    let mut out = [EMPTY; MAX_CAP];
    let mut removed = false;
    let mut j = 0;
    for &m in occ.iter().take_while(|&&m| m != EMPTY) {
        if !removed && m == mode {
            removed = true;
            continue;
        }
        out[j] = m;
        j += 1;
    }
    out
}

fn occ_add(occ: &Occupation, mode: u32) -> Occupation {
    let n = occ_len(occ);
    let mut out = *occ;
    out[n] = mode;
    out[..=n].sort_unstable();
    out
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: ModeSet,
    cap: usize,
    basis: Vec<Occupation>,
    lookup: HashMap<Occupation, usize>,
    metric: Vec<i8>,
    sector_start: Vec<usize>,
}

impl FockSpace {
    /// Four polarizations per wavevector; basis states hold at most `cap`
    /// photons in total, ordered by photon number then lexicographically.
    pub fn new(modes: ModeSet, cap: usize) -> Result<Self> {
        if cap == 0 || cap > MAX_CAP {
            return Err(Error::UnsupportedCap(cap));
        }
        let n_modes = (modes.len() * 4) as u32;
        let mut basis = Vec::new();
        let mut sector_start = Vec::with_capacity(cap + 2);
        for total in 0..=cap {
            sector_start.push(basis.len());
            let mut current = Vec::with_capacity(total);
            enumerate_multisets(n_modes, total, 0, &mut current, &mut basis);
        }
        sector_start.push(basis.len());
        let lookup = basis.iter().enumerate().map(|(i, o)| (*o, i)).collect();
        let metric = basis
            .iter()
            .map(|occ| {
                let scalars = occ
                    .iter()
                    .take_while(|&&m| m != EMPTY)
                    .filter(|&&m| m as usize % 4 == SCALAR)
                    .count();
                if scalars % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(Self {
            modes,
            cap,
            basis,
            lookup,
            metric,
            sector_start,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len() * 4
    }

    pub fn metric(&self) -> &[i8] {
        &self.metric
    }

    pub fn occupation(&self, idx: usize) -> &Occupation {
        &self.basis[idx]
    }

    /// Mode ids occupied in basis state `idx`, with repetition.
    pub fn occupied(&self, idx: usize) -> impl Iterator<Item = u32> + '_ {
        self.basis[idx].iter().copied().take_while(|&m| m != EMPTY)
    }

    pub fn photon_number(&self, idx: usize) -> usize {
        occ_len(&self.basis[idx])
    }

    /// Basis indices holding exactly `n` photons.
    pub fn sector(&self, n: usize) -> std::ops::Range<usize> {
        if n > self.cap {
            return self.dim()..self.dim();
        }
        self.sector_start[n]..self.sector_start[n + 1]
    }

    /// Basis indices with at most `n` photons.
    pub fn up_to(&self, n: usize) -> std::ops::Range<usize> {
        0..self.sector_start[(n + 1).min(self.cap + 1)]
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.lookup.get(occ).copied()
    }

    /// Basis index of the state with the listed photons (mode ids).
    pub fn state_index(&self, photons: &[u32]) -> Option<usize> {
        if photons.len() > self.cap {
            return None;
        }
        let mut occ = [EMPTY; MAX_CAP];
        occ[..photons.len()].copy_from_slice(photons);
        occ[..photons.len()].sort_unstable();
        self.index_of(&occ)
    }

    pub fn mode_id(&self, n: [i32; 3], s: usize) -> Result<u32> {
        if s > 3 {
            return Err(Error::InvalidPolarization(s));
        }
        let k = self
            .modes
            .position(n)
            .ok_or_else(|| Error::UnknownMode(format!("{n:?}")))?;
        Ok((k * 4 + s) as u32)
    }

    /// Wavevector and polarization of a mode id.
    pub fn mode_label(&self, mode: u32) -> (&ModeIndex, usize) {
        let m = mode as usize;
        (&self.modes.modes()[m / 4], m % 4)
    }

    /// Matrix element of a ladder operator from basis state `idx`, or
    /// `None` when the result vanishes or leaves the truncated space.
    pub fn act(&self, ladder: Ladder, idx: usize) -> Option<(usize, f64)> {
        let occ = &self.basis[idx];
        if ladder.create {
            let (target, amp) = self.raise(ladder.mode, idx)?;
            // (M bᴴ M)_{target, idx}
            let sign = (self.metric[target] * self.metric[idx]) as f64;
            Some((target, amp * sign))
        } else {
            let c = occ_count(occ, ladder.mode);
            if c == 0 {
                return None;
            }
            let target = self.lookup[&occ_remove(occ, ladder.mode)];
            Some((target, (c as f64).sqrt()))
        }
    }

    /// Standard (positive-metric) creation: the conjugate transpose of `b`.
    pub fn raise(&self, mode: u32, idx: usize) -> Option<(usize, f64)> {
        let occ = &self.basis[idx];
        let n = occ_len(occ);
        if n >= self.cap {
            return None;
        }
        let c = occ_count(occ, mode);
        let target = self.lookup[&occ_add(occ, mode)];
        Some((target, ((c + 1) as f64).sqrt()))
    }

    pub fn vacuum(&self) -> StateVector {
        self.basis_state(0)
    }

    pub fn basis_state(&self, idx: usize) -> StateVector {
        let mut v = StateVector::zeros(self.dim());
        v.amps[idx] = C64::new(1.0, 0.0);
        v
    }

    pub fn apply_ladder(&self, ladder: Ladder, psi: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim());
        for (idx, amp) in psi.nonzero() {
            if let Some((t, a)) = self.act(ladder, idx) {
                out.amps[t] += amp * a;
            }
        }
        out
    }

    /// `b(k, s)` as a sparse matrix.
    pub fn ladder_b(&self, k: &ModeIndex, s: usize) -> Result<OperatorMatrix> {
        let mode = self.mode_id(k.n(), s)?;
        Ok(self.ladder_matrix(Ladder::annihilate(mode)))
    }

    pub fn ladder_matrix(&self, ladder: Ladder) -> OperatorMatrix {
        let triplets = (0..self.dim())
            .filter_map(|j| self.act(ladder, j).map(|(i, a)| (i, j, C64::new(a, 0.0))))
            .collect();
        OperatorMatrix::from_triplets(self.dim(), triplets)
    }

    /// `a(k,1) = i b(k,1)`, `a(k,-1) = i b(k,2)`,
    /// `a(k,0) = i [b(k,3) - b(k,0)]/√2`.
    pub fn combine_a(&self, k: &ModeIndex, lambda: i32) -> Result<OperatorMatrix> {
        Ok(match lambda {
            1 => self.ladder_b(k, 1)?.scale(I),
            -1 => self.ladder_b(k, 2)?.scale(I),
            0 => {
                let d = self.ladder_b(k, 3)?.sub(&self.ladder_b(k, 0)?)?;
                d.scale(I * std::f64::consts::FRAC_1_SQRT_2)
            }
            other => return Err(Error::InvalidHelicity(other)),
        })
    }

    /// η-adjoint `M Xᴴ M`.
    pub fn dagger(&self, x: &OperatorMatrix) -> OperatorMatrix {
        x.conj_transpose().metric_sandwich(&self.metric)
    }

    /// `φᴴ M ψ`.
    pub fn eta_inner(&self, phi: &StateVector, psi: &StateVector) -> Result<C64> {
        check_dims(phi.dim(), psi.dim())?;
        check_dims(phi.dim(), self.dim())?;
        Ok(phi
            .amps
            .iter()
            .zip(&psi.amps)
            .zip(&self.metric)
            .map(|((a, b), &m)| a.conj() * b * m as f64)
            .sum())
    }

    /// `⟨ψ|X|ψ⟩_η / ⟨ψ|ψ⟩_η`.
    pub fn expectation(&self, x: &OperatorMatrix, psi: &StateVector, norm_tol: f64) -> Result<C64> {
        let norm = self.checked_norm(psi, norm_tol)?;
        let xpsi = x.apply(psi)?;
        Ok(self.eta_inner(psi, &xpsi)? / norm)
    }

    /// η-norm of `ψ`, rejecting gauge-degenerate states.
    pub fn checked_norm(&self, psi: &StateVector, norm_tol: f64) -> Result<f64> {
        let norm = self.eta_inner(psi, psi)?.re;
        if norm.abs() <= norm_tol {
            return Err(Error::ZeroNormState { norm, tol: norm_tol });
        }
        Ok(norm)
    }

    /// Identity on the cutoff interior (at most `cap - 1` photons), zero above.
    pub fn interior_identity(&self) -> OperatorMatrix {
        let triplets = self
            .up_to(self.cap - 1)
            .map(|i| (i, i, C64::new(1.0, 0.0)))
            .collect();
        OperatorMatrix::from_triplets(self.dim(), triplets)
    }
}

fn enumerate_multisets(
    n_modes: u32,
    remaining: usize,
    start: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<Occupation>,
) {
    if remaining == 0 {
        let mut occ = [EMPTY; MAX_CAP];
        occ[..current.len()].copy_from_slice(current);
        out.push(occ);
        return;
    }
    for m in start..n_modes {
        current.push(m);
        enumerate_multisets(n_modes, remaining - 1, m, current, out);
        current.pop();
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Dense complex amplitudes over the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(i, a)| (i, *a))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += s * b;
        }
    }

    /// Positive-definite auxiliary norm `√(ψᴴψ)`.
    pub fn aux_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Auxiliary inner product `φᴴψ`.
    pub fn aux_inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest photon number carrying weight above `tol`.
    pub fn max_photon_number(&self, space: &FockSpace, tol: f64) -> usize {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, _)| space.photon_number(i))
            .max()
            .unwrap_or(0)
    }
}

/// Compressed sparse row complex matrix on a Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            keep_cols.push(c);
            keep_vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.cols[p], self.vals[p]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(p) => self.vals[range.start + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let triplets = self.triplets().chain(other.triplets()).collect();
        Ok(Self::from_triplets(self.dim, triplets))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = Vec::new();
        let mut mark = vec![false; self.dim];
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.cols[p], self.vals[p]);
                for q in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.cols[q];
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * other.vals[q];
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        Ok(Self::from_triplets(self.dim, triplets))
    }

    pub fn conj_transpose(&self) -> Self {
        let triplets = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// `M X M` for a diagonal sign operator `M`.
    pub fn metric_sandwich(&self, metric: &[i8]) -> Self {
        let triplets = self
            .triplets()
            .map(|(r, c, v)| (r, c, v * (metric[r] * metric[c]) as f64))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dims(self.dim, psi.dim())?;
        let mut out = StateVector::zeros(self.dim);
        for r in 0..self.dim {
            let mut s = C64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * psi.amps[self.cols[p]];
            }
            out.amps[r] = s;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|X_ij|` over columns `j` accepted by `keep`.
    pub fn max_abs_on_columns(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.triplets()
            .filter(|&(_, c, _)| keep(c))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// `XY - YX`.
pub fn commutator(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    x.mul(y)?.sub(&y.mul(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxGeometry;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn space(gens: &[[i32; 3]], cap: usize) -> FockSpace {
        let g = BoxGeometry::new(2.0 * PI, 8).unwrap();
        FockSpace::new(ModeSet::from_indices(g, gens).unwrap(), cap).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dimension_counts_multisets() {
        // 4 modes, cap 2: 1 + 4 + 10
        assert_eq!(space(&[[0, 0, 1]], 2).dim(), 15);
        // 8 modes, cap 2: 1 + 8 + 36
        assert_eq!(space(&[[0, 0, 1], [0, 0, -1]], 2).dim(), 45);
        assert_eq!(space(&[[0, 0, 1]], 1).dim(), 5);
        assert!(FockSpace::new(space(&[[1, 0, 0]], 1).modes().clone(), 5).is_err());
    }

    #[test]
    fn metric_signs() {
        let sp = space(&[[0, 0, 1]], 2);
        assert!(sp.metric().iter().all(|&m| m == 1 || m == -1));
        let scalar = sp.mode_id([0, 0, 1], 0).unwrap();
        let long = sp.mode_id([0, 0, 1], 3).unwrap();
        assert_eq!(sp.metric()[sp.state_index(&[scalar]).unwrap()], -1);
        assert_eq!(sp.metric()[sp.state_index(&[scalar, scalar]).unwrap()], 1);
        assert_eq!(sp.metric()[sp.state_index(&[scalar, long]).unwrap()], -1);
    }

    #[test]
    fn single_quantum_ladder_action() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let b1 = sp.ladder_b(&k, 1).unwrap();
        let one = sp.state_index(&[sp.mode_id([0, 0, 1], 1).unwrap()]).unwrap();
        assert_eq!(b1.get(0, one), c(1.0));
    }

    #[test]
    fn scalar_creation_carries_metric_sign() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let b0 = sp.ladder_b(&k, 0).unwrap();
        let created = sp.dagger(&b0).apply(&sp.vacuum()).unwrap();
        let one0 = sp.state_index(&[sp.mode_id([0, 0, 1], 0).unwrap()]).unwrap();
        let mut expected = StateVector::zeros(sp.dim());
        expected.amps[one0] = c(-1.0);
        assert_eq!(created, expected);
    }

    #[test]
    fn scalar_commutator_is_minus_identity_inside_cutoff() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let b0 = sp.ladder_b(&k, 0).unwrap();
        let comm = commutator(&b0, &sp.dagger(&b0)).unwrap();
        let target = sp.interior_identity().scale(c(-1.0));
        let interior = sp.up_to(1);
        let diff = comm.sub(&target).unwrap();
        assert!(diff.max_abs_on_columns(|j| interior.contains(&j)) < 1e-14);
        let b1 = sp.ladder_b(&k, 1).unwrap();
        let comm = commutator(&b1, &sp.dagger(&b1)).unwrap();
        let diff = comm.sub(&sp.interior_identity()).unwrap();
        assert!(diff.max_abs_on_columns(|j| interior.contains(&j)) < 1e-14);
    }

    #[test]
    fn distinct_modes_commute() {
        let sp = space(&[[0, 0, 1], [1, 0, 0]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let q = *sp.modes().get([1, 0, 0]).unwrap();
        let comm = commutator(&sp.ladder_b(&k, 1).unwrap(), &sp.ladder_b(&q, 2).unwrap()).unwrap();
        assert_eq!(comm.max_abs(), 0.0);
        let x = sp.ladder_b(&k, 3).unwrap();
        assert_eq!(commutator(&x, &x).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn longitudinal_scalar_combination_has_null_commutator_and_norm() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let a0 = sp.combine_a(&k, 0).unwrap();
        let a0d = sp.dagger(&a0);
        let comm = commutator(&a0, &a0d).unwrap();
        let interior = sp.up_to(1);
        assert!(comm.max_abs_on_columns(|j| interior.contains(&j)) < 1e-15);
        let state = a0d.apply(&sp.vacuum()).unwrap();
        assert!(sp.eta_inner(&state, &state).unwrap().norm() < 1e-15);
        assert!(state.aux_norm() > 0.5);
        let err = sp.expectation(&OperatorMatrix::identity(sp.dim()), &state, 1e-10);
        assert!(matches!(err, Err(Error::ZeroNormState { .. })));
        assert!(sp.combine_a(&k, 2).is_err());
    }

    #[test]
    fn eta_inner_examples() {
        let sp = space(&[[0, 0, 1], [1, 0, 0]], 2);
        let vac = sp.vacuum();
        assert_eq!(sp.eta_inner(&vac, &vac).unwrap(), c(1.0));
        let s0 = sp.basis_state(sp.state_index(&[sp.mode_id([0, 0, 1], 0).unwrap()]).unwrap());
        assert_eq!(sp.eta_inner(&s0, &s0).unwrap(), c(-1.0));
        let t1 = sp.basis_state(sp.state_index(&[sp.mode_id([0, 0, 1], 1).unwrap()]).unwrap());
        let t2 = sp.basis_state(sp.state_index(&[sp.mode_id([1, 0, 0], 1).unwrap()]).unwrap());
        assert_eq!(sp.eta_inner(&t1, &t1).unwrap(), c(1.0));
        assert_eq!(sp.eta_inner(&t1, &t2).unwrap(), c(0.0));
        assert!(sp.eta_inner(&t1, &StateVector::zeros(3)).is_err());
    }

    #[test]
    fn number_operator_expectation() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let a = sp.combine_a(&k, 1).unwrap();
        let n = sp.dagger(&a).mul(&a).unwrap();
        let one = sp.basis_state(sp.state_index(&[sp.mode_id([0, 0, 1], 1).unwrap()]).unwrap());
        let e = sp.expectation(&n, &one, 1e-10).unwrap();
        assert!((e - c(1.0)).norm() < 1e-14);
        let id = OperatorMatrix::identity(sp.dim());
        assert!((sp.expectation(&id, &one, 1e-10).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions() {
        let a = OperatorMatrix::identity(3);
        let b = OperatorMatrix::identity(4);
        assert!(commutator(&a, &b).is_err());
        assert!(a.apply(&StateVector::zeros(4)).is_err());
    }

    #[test]
    fn a_operator_commutators_single_k() {
        let sp = space(&[[0, 0, 1]], 2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let interior = sp.up_to(1);
        for l in [1, -1, 0] {
            for m in [1, -1, 0] {
                let a = sp.combine_a(&k, l).unwrap();
                let ad = sp.dagger(&sp.combine_a(&k, m).unwrap());
                let comm = commutator(&a, &ad).unwrap();
                let expect = if l == m && l != 0 { 1.0 } else { 0.0 };
                let diff = comm.sub(&sp.interior_identity().scale(c(expect))).unwrap();
                assert!(diff.max_abs_on_columns(|j| interior.contains(&j)) < 1e-14, "{l} {m}");
            }
        }
        let _ = FRAC_1_SQRT_2;
    }

    fn random_matrix(dim: usize, seed: u64) -> OperatorMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut t = Vec::new();
        for r in 0..dim {
            for col in 0..dim {
                if next() > 0.2 {
                    t.push((r, col, C64::new(next(), next())));
                }
            }
        }
        OperatorMatrix::from_triplets(dim, t)
    }

    proptest::proptest! {
        #[test]
        fn dagger_is_involutive_antihomomorphic_and_adjoint(seed in 0u64..10_000) {
            let sp = space(&[[0, 0, 1]], 2);
            let d = sp.dim();
            let x = random_matrix(d, seed);
            let y = random_matrix(d, seed ^ 0x9e37);
            proptest::prop_assert_eq!(sp.dagger(&sp.dagger(&x)), x.clone());
            let lhs = sp.dagger(&x.mul(&y).unwrap());
            let rhs = sp.dagger(&y).mul(&sp.dagger(&x)).unwrap();
            proptest::prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
            let phi = StateVector { amps: (0..d).map(|i| x.get(i, 0) + C64::new(0.1, 0.0)).collect() };
            let psi = StateVector { amps: (0..d).map(|i| y.get(i, 1) - C64::new(0.0, 0.2)).collect() };
            let left = sp.eta_inner(&phi, &x.apply(&psi).unwrap()).unwrap();
            let right = sp.eta_inner(&sp.dagger(&x).apply(&phi).unwrap(), &psi).unwrap();
            proptest::prop_assert!((left - right).norm() < 1e-12);
        }
    }
}
