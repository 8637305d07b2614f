//! Symbolic linear and quadratic forms in the ladder operators.
//!
//! Field operators are linear in `b`, `b†`; the Poynting momentum is
//! quadratic. Keeping them symbolic lets products be formed exactly, brought
//! to normal order with the commutator `[b_m, b†_n] = -η_{ss} δ_{mn}`, and
//! applied to states without materializing large matrices. `apply` uses the
//! truncated ladder matrices literally, so an ordered product acting on a
//! state is the product of the two truncated matrices.

use std::collections::{BTreeMap, HashMap};

use crate::error::Result;
use crate::fock::{FockSpace, Ladder, OperatorMatrix, StateVector};
use crate::polarization::SCALAR;
use crate::vector::CVec3;
use crate::C64;

fn is_zero(c: &C64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

/// `Σ c_α L_α`, sorted by ladder, no duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    terms: Vec<(Ladder, C64)>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn ladder(ladder: Ladder, coef: C64) -> Self {
        Self::from_terms(vec![(ladder, coef)])
    }

    pub fn from_terms(mut terms: Vec<(Ladder, C64)>) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(Ladder, C64)> = Vec::with_capacity(terms.len());
        for (l, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == l => *acc += c,
                _ => merged.push((l, c)),
            }
        }
        merged.retain(|(_, c)| !is_zero(c));
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[(Ladder, C64)] {
        &self.terms
    }

    pub fn coefficient(&self, ladder: Ladder) -> C64 {
        match self.terms.binary_search_by_key(&ladder, |t| t.0) {
            Ok(p) => self.terms[p].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(l, c)| (l, c * s)).collect())
    }

    /// η-adjoint: conjugate coefficients, swap `b ↔ b†`.
    pub fn dagger(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|&(l, c)| (l.adjoint(), c.conj()))
                .collect(),
        )
    }

    pub fn is_annihilating(&self) -> bool {
        self.terms.iter().all(|(l, _)| !l.create)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Drop coefficients with modulus at or below `floor`.
    pub fn pruned(&self, floor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > floor)
                .copied()
                .collect(),
        }
    }

    pub fn apply(&self, space: &FockSpace, psi: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(space.dim());
        let annihilators: HashMap<u32, C64> = self
            .terms
            .iter()
            .filter(|(l, _)| !l.create)
            .map(|(l, c)| (l.mode, *c))
            .collect();
        let creators: Vec<_> = self.terms.iter().filter(|(l, _)| l.create).collect();
        for (idx, amp) in psi.nonzero() {
            let mut last = None;
            for m in space.occupied(idx) {
                if last == Some(m) {
                    continue;
                }
                last = Some(m);
                if let Some(c) = annihilators.get(&m) {
                    if let Some((t, a)) = space.act(Ladder::annihilate(m), idx) {
                        out.amps[t] += c * a * amp;
                    }
                }
            }
            for (l, c) in &creators {
                if let Some((t, a)) = space.act(*l, idx) {
                    out.amps[t] += c * a * amp;
                }
            }
        }
        out
    }

    pub fn matrix(&self, space: &FockSpace) -> OperatorMatrix {
        let mut triplets = Vec::new();
        for j in 0..space.dim() {
            for &(l, c) in &self.terms {
                if let Some((i, a)) = space.act(l, j) {
                    triplets.push((i, j, c * a));
                }
            }
        }
        OperatorMatrix::from_triplets(space.dim(), triplets)
    }
}

/// `c₀ + Σ c_{αβ} L_α L_β` with `L_α` acting after `L_β`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticForm {
    pub constant: C64,
    terms: BTreeMap<(Ladder, Ladder), C64>,
}

impl QuadraticForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn product(left: &LinearForm, right: &LinearForm) -> Self {
        let mut q = Self::zero();
        for &(l, a) in left.terms() {
            for &(r, b) in right.terms() {
                q.add_term(l, r, a * b);
            }
        }
        q
    }

    pub fn add_term(&mut self, left: Ladder, right: Ladder, coef: C64) {
        *self
            .terms
            .entry((left, right))
            .or_insert(C64::new(0.0, 0.0)) += coef;
    }

    pub fn terms(&self) -> impl Iterator<Item = (Ladder, Ladder, C64)> + '_ {
        self.terms.iter().map(|(&(l, r), &c)| (l, r, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, left: Ladder, right: Ladder) -> C64 {
        self.terms
            .get(&(left, right))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.constant += other.constant;
        for (k, v) in &other.terms {
            *self.terms.entry(*k).or_insert(C64::new(0.0, 0.0)) += v;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            constant: self.constant * s,
            terms: self.terms.iter().map(|(k, v)| (*k, v * s)).collect(),
        }
    }

    /// `(c L_α L_β)† = c* L_β† L_α†`.
    pub fn dagger(&self) -> Self {
        let mut out = Self {
            constant: self.constant.conj(),
            terms: BTreeMap::new(),
        };
        for (&(l, r), &c) in &self.terms {
            out.add_term(r.adjoint(), l.adjoint(), c.conj());
        }
        out
    }

    /// Canonical normal order: creators left of annihilators, equal-kind
    /// pairs sorted by mode, commutator c-numbers moved to `constant`.
    pub fn normal_ordered(&self) -> Self {
        let mut out = Self {
            constant: self.constant,
            terms: BTreeMap::new(),
        };
        for (&(l, r), &c) in &self.terms {
            match (l.create, r.create) {
                (false, true) => {
                    // b_m b†_n = b†_n b_m - η_{ss} δ_{mn}
                    if l.mode == r.mode {
                        let eta = if l.mode as usize % 4 == SCALAR { 1.0 } else { -1.0 };
                        out.constant -= c * eta;
                    }
                    out.add_term(r, l, c);
                }
                (true, false) => out.add_term(l, r, c),
                _ => {
                    let (a, b) = if l <= r { (l, r) } else { (r, l) };
                    out.add_term(a, b, c);
                }
            }
        }
        out.terms.retain(|_, c| !is_zero(c));
        out
    }

    pub fn pruned(&self, floor: f64) -> Self {
        Self {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > floor)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// Largest coefficient difference, the constant excluded.
    pub fn max_term_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, v) in &self.terms {
            let o = other.terms.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            worst = worst.max((v - o).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm())
            .fold(self.constant.norm(), f64::max)
    }

    fn grouped(&self) -> (HashMap<u32, Vec<(Ladder, C64)>>, Vec<(Ladder, Vec<(Ladder, C64)>)>) {
        let mut by_annihilator: HashMap<u32, Vec<(Ladder, C64)>> = HashMap::new();
        let mut by_creator: BTreeMap<Ladder, Vec<(Ladder, C64)>> = BTreeMap::new();
        for (&(l, r), &c) in &self.terms {
            if r.create {
                by_creator.entry(r).or_default().push((l, c));
            } else {
                by_annihilator.entry(r.mode).or_default().push((l, c));
            }
        }
        (by_annihilator, by_creator.into_iter().collect())
    }

    /// Action on basis state `idx` as sorted `(index, amplitude)` pairs.
    pub fn apply_basis(&self, space: &FockSpace, idx: usize) -> Vec<(usize, C64)> {
        let (ann, cre) = self.grouped();
        let mut out: BTreeMap<usize, C64> = BTreeMap::new();
        self.accumulate(space, &ann, &cre, idx, C64::new(1.0, 0.0), &mut |t, v| {
            *out.entry(t).or_insert(C64::new(0.0, 0.0)) += v
        });
        out.into_iter().collect()
    }

    pub fn apply(&self, space: &FockSpace, psi: &StateVector) -> StateVector {
        let (ann, cre) = self.grouped();
        let mut out = StateVector::zeros(space.dim());
        for (idx, amp) in psi.nonzero() {
            self.accumulate(space, &ann, &cre, idx, amp, &mut |t, v| out.amps[t] += v);
        }
        out
    }

    fn accumulate(
        &self,
        space: &FockSpace,
        ann: &HashMap<u32, Vec<(Ladder, C64)>>,
        cre: &[(Ladder, Vec<(Ladder, C64)>)],
        idx: usize,
        amp: C64,
        sink: &mut impl FnMut(usize, C64),
    ) {
        if !is_zero(&self.constant) {
            sink(idx, self.constant * amp);
        }
        let emit = |right: Ladder, lefts: &[(Ladder, C64)], sink: &mut dyn FnMut(usize, C64)| {
            if let Some((mid, a)) = space.act(right, idx) {
                for &(l, c) in lefts {
                    if let Some((t, b)) = space.act(l, mid) {
                        sink(t, c * a * b * amp);
                    }
                }
            }
        };
        let mut last = None;
        for m in space.occupied(idx) {
            if last == Some(m) {
                continue;
            }
            last = Some(m);
            if let Some(lefts) = ann.get(&m) {
                emit(Ladder::annihilate(m), lefts, sink);
            }
        }
        for (r, lefts) in cre {
            emit(*r, lefts, sink);
        }
    }

    pub fn matrix(&self, space: &FockSpace) -> OperatorMatrix {
        let mut triplets = Vec::new();
        for j in 0..space.dim() {
            for (i, v) in self.apply_basis(space, j) {
                triplets.push((i, j, v));
            }
        }
        OperatorMatrix::from_triplets(space.dim(), triplets)
    }

    /// `⟨ψ|Q|ψ⟩_η / ⟨ψ|ψ⟩_η`.
    pub fn expectation(&self, space: &FockSpace, psi: &StateVector, norm_tol: f64) -> Result<C64> {
        let norm = space.checked_norm(psi, norm_tol)?;
        Ok(space.eta_inner(psi, &self.apply(space, psi))? / norm)
    }
}

/// Three Cartesian components of a vector-valued quadratic operator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorForm(pub [QuadraticForm; 3]);

impl VectorForm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `v ⊗ Q`.
    pub fn along(v: &CVec3, q: &QuadraticForm) -> Self {
        Self([q.scale(v[0]), q.scale(v[1]), q.scale(v[2])])
    }

    pub fn add_assign(&mut self, other: &Self) {
        for i in 0..3 {
            self.0[i].add_assign(&other.0[i]);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.clone().map(|q| q.scale(s)))
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.clone().map(|q| q.dagger()))
    }

    /// The term plus its η-adjoint.
    pub fn plus_dagger(&self) -> Self {
        self.add(&self.dagger())
    }

    pub fn normal_ordered(&self) -> Self {
        Self(self.0.clone().map(|q| q.normal_ordered()))
    }

    pub fn pruned(&self, floor: f64) -> Self {
        Self(self.0.clone().map(|q| q.pruned(floor)))
    }

    pub fn constant(&self) -> [C64; 3] {
        [self.0[0].constant, self.0[1].constant, self.0[2].constant]
    }

    pub fn max_term_diff(&self, other: &Self) -> f64 {
        (0..3)
            .map(|i| self.0[i].max_term_diff(&other.0[i]))
            .fold(0.0, f64::max)
    }

    pub fn expectation(&self, space: &FockSpace, psi: &StateVector, norm_tol: f64) -> Result<[C64; 3]> {
        let norm = space.checked_norm(psi, norm_tol)?;
        let mut out = [C64::new(0.0, 0.0); 3];
        for (i, q) in self.0.iter().enumerate() {
            out[i] = space.eta_inner(psi, &q.apply(space, psi))? / norm;
        }
        Ok(out)
    }
}

/// `a(k, λ)` as a linear form in the `b` ladders of mode `k_index`.
pub fn a_form(k_index: usize, lambda: i32) -> Result<LinearForm> {
    use crate::I;
    let mode = |s: usize| (k_index * 4 + s) as u32;
    Ok(match lambda {
        1 => LinearForm::ladder(Ladder::annihilate(mode(1)), I),
        -1 => LinearForm::ladder(Ladder::annihilate(mode(2)), I),
        0 => {
            let h = I * std::f64::consts::FRAC_1_SQRT_2;
            LinearForm::from_terms(vec![
                (Ladder::annihilate(mode(3)), h),
                (Ladder::annihilate(mode(0)), -h),
            ])
        }
        other => return Err(crate::Error::InvalidHelicity(other)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::commutator;
    use crate::lattice::{BoxGeometry, ModeSet};
    use std::f64::consts::PI;

    fn space(cap: usize) -> FockSpace {
        let g = BoxGeometry::new(2.0 * PI, 8).unwrap();
        FockSpace::new(ModeSet::symmetric(g, &[[0, 0, 1]]).unwrap(), cap).unwrap()
    }

    #[test]
    fn linear_form_matches_matrix_construction() {
        let sp = space(2);
        let k = *sp.modes().get([0, 0, 1]).unwrap();
        let idx = sp.modes().position([0, 0, 1]).unwrap();
        for lam in [1, -1, 0] {
            let form = a_form(idx, lam).unwrap();
            let m = sp.combine_a(&k, lam).unwrap();
            assert_eq!(form.matrix(&sp).sub(&m).unwrap().max_abs(), 0.0);
            let fd = form.dagger().matrix(&sp);
            assert!(fd.sub(&sp.dagger(&m)).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_product_is_matrix_product() {
        let sp = space(2);
        let a = a_form(0, 0).unwrap().add(&a_form(1, 1).unwrap().dagger());
        let b = a_form(1, 0).unwrap().dagger().add(&a_form(0, -1).unwrap());
        let q = QuadraticForm::product(&a, &b);
        let direct = a.matrix(&sp).mul(&b.matrix(&sp)).unwrap();
        assert!(q.matrix(&sp).sub(&direct).unwrap().max_abs() < 1e-14);
        let psi = StateVector {
            amps: (0..sp.dim()).map(|i| C64::new(i as f64 * 0.1, 1.0)).collect(),
        };
        let via_apply = q.apply(&sp, &psi);
        let via_matrix = direct.apply(&psi).unwrap();
        assert!(via_apply.sub(&via_matrix).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn normal_ordering_preserves_interior_matrix_elements() {
        let sp = space(2);
        let scalar = Ladder::annihilate(0);
        let long = Ladder::annihilate(3);
        let mut q = QuadraticForm::zero();
        q.add_term(scalar, scalar.adjoint(), C64::new(1.0, 0.5));
        q.add_term(long, long.adjoint(), C64::new(2.0, 0.0));
        q.add_term(long, scalar, C64::new(0.0, 1.0));
        q.add_term(scalar.adjoint(), long.adjoint(), C64::new(0.3, 0.0));
        let n = q.normal_ordered();
        // [b0, b0†] = -1, [b3, b3†] = +1
        assert!((n.constant - C64::new(-1.0 + 2.0, -0.5)).norm() < 1e-15);
        let diff = q.matrix(&sp).sub(&n.matrix(&sp)).unwrap();
        let interior = sp.up_to(sp.cap() - 1);
        assert!(diff.max_abs_on_columns(|j| interior.contains(&j)) < 1e-14);
        assert_eq!(n.normal_ordered(), n);
    }

    #[test]
    fn dagger_of_quadratic_matches_matrix_dagger() {
        let sp = space(2);
        let a = a_form(0, 0).unwrap();
        let b = a_form(1, 1).unwrap().dagger();
        let q = QuadraticForm::product(&a, &b).scale(C64::new(0.2, 0.7));
        let lhs = q.dagger().matrix(&sp);
        let rhs = sp.dagger(&q.matrix(&sp));
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn commutator_of_forms() {
        let sp = space(2);
        let a0 = a_form(0, 0).unwrap();
        let m = commutator(&a0.matrix(&sp), &a0.dagger().matrix(&sp)).unwrap();
        let interior = sp.up_to(1);
        assert!(m.max_abs_on_columns(|j| interior.contains(&j)) < 1e-15);
        assert!(a_form(0, 5).is_err());
    }
}
