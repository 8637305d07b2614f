//! Physical-state condition `a(k,0)|Φ⟩ = 0` and its kernels.
//!
//! Residuals, kernels and projections all use the auxiliary positive-definite
//! inner product. The η-norm vanishes on the very states this module has to
//! see (`a†(k,0)|vac⟩`), so it cannot measure anything here.
//!
//! Constraints are annihilating linear forms, so a stack of them maps the
//! `n`-photon sector into the `n-1` sector and never reaches the cap. Stacked
//! outputs are stored densely over the cutoff interior only.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, Ladder, StateVector};
use crate::forms::{a_form, LinearForm};
use crate::lattice::ModeIndex;
use crate::C64;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_NULL_TOL: f64 = 1e-9;
/// Largest sector the dense kernel routine will decompose.
pub const DENSE_SECTOR_LIMIT: usize = 2500;

#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub residuals: Vec<(ModeIndex, f64)>,
    pub max_residual: f64,
    pub tol: f64,
    pub physical: bool,
}

/// `‖a(k,0)ψ‖` for every mode `k`.
pub fn is_physical(space: &FockSpace, psi: &StateVector, tol: f64) -> Result<ConstraintReport> {
    if psi.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: space.dim(),
        });
    }
    let mut residuals = Vec::with_capacity(space.modes().len());
    for (ki, k) in space.modes().modes().iter().enumerate() {
        let r = a_form(ki, 0)?.apply(space, psi).aux_norm();
        residuals.push((*k, r));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ConstraintReport {
        residuals,
        max_residual,
        tol,
        physical: max_residual <= tol,
    })
}

/// The flat condition: one `a(k,0)` per mode.
pub fn flat_constraints(space: &FockSpace) -> Result<ConstraintStack> {
    let forms = (0..space.modes().len())
        .map(|ki| a_form(ki, 0))
        .collect::<Result<Vec<_>>>()?;
    ConstraintStack::new(space, forms)
}

/// Stacked annihilating constraints `S ψ = (C₁ψ, …, C_mψ)`.
#[derive(Debug, Clone)]
pub struct ConstraintStack {
    forms: Vec<LinearForm>,
    /// `by_mode[m]` lists `(constraint, coefficient)` of `b(m)`.
    by_mode: Vec<Vec<(usize, C64)>>,
    inner: usize,
    dim: usize,
}

impl ConstraintStack {
    pub fn new(space: &FockSpace, forms: Vec<LinearForm>) -> Result<Self> {
        let mut by_mode = vec![Vec::new(); space.n_modes()];
        for (i, f) in forms.iter().enumerate() {
            for &(l, c) in f.terms() {
                if l.create {
                    return Err(Error::InvalidGeometry(
                        "constraints must be annihilating".into(),
                    ));
                }
                by_mode[l.mode as usize].push((i, c));
            }
        }
        Ok(Self {
            forms,
            by_mode,
            inner: space.up_to(space.cap() - 1).end,
            dim: space.dim(),
        })
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Length of a stacked output vector.
    pub fn output_len(&self) -> usize {
        self.forms.len() * self.inner
    }

    pub fn apply(&self, space: &FockSpace, psi: &StateVector) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.output_len()];
        for (idx, amp) in psi.nonzero() {
            let mut last = None;
            for m in space.occupied(idx) {
                if last == Some(m) {
                    continue;
                }
                last = Some(m);
                let terms = &self.by_mode[m as usize];
                if terms.is_empty() {
                    continue;
                }
                if let Some((t, a)) = space.act(Ladder::annihilate(m), idx) {
                    for &(i, c) in terms {
                        out[i * self.inner + t] += c * a * amp;
                    }
                }
            }
        }
        out
    }

    /// `Sᴴ y` in the auxiliary inner product.
    pub fn adjoint_apply(&self, space: &FockSpace, y: &[C64]) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        for (i, f) in self.forms.iter().enumerate() {
            let block = &y[i * self.inner..(i + 1) * self.inner];
            for (idx, v) in block.iter().enumerate() {
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                for &(l, c) in f.terms() {
                    if let Some((j, a)) = space.raise(l.mode, idx) {
                        out.amps[j] += (c * a).conj() * v;
                    }
                }
            }
        }
        out
    }

    /// Largest `‖C_i ψ‖` over the stack.
    pub fn residual(&self, space: &FockSpace, psi: &StateVector) -> f64 {
        let out = self.apply(space, psi);
        out.chunks(self.inner.max(1))
            .map(|b| b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Norm of every stacked row, for row-normalized solves.
    fn row_norms(&self, space: &FockSpace) -> Vec<f64> {
        let mut norms = vec![0.0; self.output_len()];
        for (i, f) in self.forms.iter().enumerate() {
            for idx in 0..self.inner {
                let mut s = 0.0;
                for &(l, c) in f.terms() {
                    if let Some((_, a)) = space.raise(l.mode, idx) {
                        s += (c * a).norm_sqr();
                    }
                }
                norms[i * self.inner + idx] = s.sqrt();
            }
        }
        norms
    }

    /// Auxiliary-orthonormal kernel basis, sector by sector, by dense SVD.
    ///
    /// Singular values at or below `null_tol` times the largest count as
    /// kernel. Sectors wider than [`DENSE_SECTOR_LIMIT`] are refused.
    pub fn kernel_basis(&self, space: &FockSpace, null_tol: f64) -> Result<Vec<StateVector>> {
        let norms = self.row_norms(space);
        let mut basis = vec![space.vacuum()];
        for n in 1..=space.cap() {
            let cols = space.sector(n);
            if cols.len() > DENSE_SECTOR_LIMIT {
                return Err(Error::SubspaceTooLarge {
                    dim: cols.len(),
                    limit: DENSE_SECTOR_LIMIT,
                });
            }
            let rows_in = space.sector(n - 1);
            let live: Vec<usize> = (0..self.forms.len())
                .flat_map(|i| rows_in.clone().map(move |r| i * self.inner + r))
                .filter(|&r| norms[r] > 0.0)
                .collect();
            let ncols = cols.len();
            // pad to at least square so the SVD returns the full right basis
            let nrows = live.len().max(ncols);
            let mut m = DMatrix::<C64>::zeros(nrows, ncols);
            let row_of: std::collections::HashMap<usize, usize> =
                live.iter().enumerate().map(|(p, &r)| (r, p)).collect();
            for (c, idx) in cols.clone().enumerate() {
                let out = self.apply(space, &space.basis_state(idx));
                for (r, v) in out.iter().enumerate() {
                    if let Some(&p) = row_of.get(&r) {
                        m[(p, c)] = v / norms[r];
                    }
                }
            }
            let svd = m.svd(false, true);
            let v_t = svd.v_t.expect("requested");
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let floor = null_tol * smax.max(f64::MIN_POSITIVE);
            for (p, s) in svd.singular_values.iter().enumerate() {
                if *s > floor && smax > 0.0 {
                    continue;
                }
                let mut v = StateVector::zeros(space.dim());
                for (c, idx) in cols.clone().enumerate() {
                    v.amps[idx] = v_t[(p, c)].conj();
                }
                basis.push(canonical_phase(v));
            }
        }
        Ok(basis)
    }

    /// `ψ - S⁺Sψ`: the auxiliary-orthogonal projection onto the kernel.
    ///
    /// Solved by CGLS on the row-normalized stack, which has the same kernel
    /// and a far better conditioned row space. Stops once every constraint
    /// residual is below `tol`.
    pub fn project(&self, space: &FockSpace, psi: &StateVector, tol: f64, max_iter: usize) -> Result<StateVector> {
        let norms = self.row_norms(space);
        let scale: Vec<f64> = norms.iter().map(|&n| if n > 0.0 { n.recip() } else { 0.0 }).collect();
        let apply = |v: &StateVector| -> Vec<C64> {
            let mut o = self.apply(space, v);
            for (x, s) in o.iter_mut().zip(&scale) {
                *x *= s;
            }
            o
        };
        let adjoint = |y: &[C64]| -> StateVector {
            let scaled: Vec<C64> = y.iter().zip(&scale).map(|(v, s)| v * s).collect();
            self.adjoint_apply(space, &scaled)
        };
        let sq = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();

        let mut r = apply(psi);
        let mut x = StateVector::zeros(space.dim());
        let mut s = adjoint(&r);
        let mut p = s.clone();
        let mut gamma = sq(&s.amps);
        let target = tol * 1e-3;
        for _ in 0..max_iter {
            if sq(&r).sqrt() <= target || gamma == 0.0 {
                let out = psi.sub(&x)?;
                let residual = self.residual(space, &out);
                if residual <= tol {
                    return Ok(out);
                }
            }
            let q = apply(&p);
            let qq = sq(&q);
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            x.axpy(C64::new(alpha, 0.0), &p);
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= qi * alpha;
            }
            s = adjoint(&r);
            let gamma_new = sq(&s.amps);
            let beta = gamma_new / gamma;
            gamma = gamma_new;
            let mut next = s.clone();
            next.axpy(C64::new(beta, 0.0), &p);
            p = next;
        }
        let out = psi.sub(&x)?;
        let residual = self.residual(space, &out);
        if residual <= tol {
            Ok(out)
        } else {
            Err(Error::NoConvergence {
                iterations: max_iter,
                residual,
            })
        }
    }
}

/// Rotate so the largest component is real and positive; ties go to the
/// lowest index.
fn canonical_phase(v: StateVector) -> StateVector {
    let mut best = (0usize, 0.0f64);
    for (i, c) in v.amps.iter().enumerate() {
        if c.norm() > best.1 * (1.0 + 1e-12) {
            best = (i, c.norm());
        }
    }
    if best.1 == 0.0 {
        return v;
    }
    let phase = v.amps[best.0].conj() / best.1;
    v.scale(phase)
}

/// Kernel of all `a(k,0)` in the auxiliary norm.
pub fn physical_subspace(space: &FockSpace, null_tol: f64) -> Result<Vec<StateVector>> {
    flat_constraints(space)?.kernel_basis(space, null_tol)
}

/// `φ + a†(k,0) χ` for physical `φ`, `χ`.
pub fn gauge_shift(
    space: &FockSpace,
    phi: &StateVector,
    chi: &StateVector,
    k_index: usize,
    tol: f64,
    norm_tol: f64,
) -> Result<StateVector> {
    for s in [phi, chi] {
        let report = is_physical(space, s, tol)?;
        if !report.physical {
            return Err(Error::NotPhysical {
                residual: report.max_residual,
                tol,
            });
        }
    }
    // a†(k,0) would fall off the truncation on cap-level components
    if chi.max_photon_number(space, 0.0) >= space.cap() && chi.nonzero().next().is_some() {
        return Err(Error::TruncationOverflow { cap: space.cap() });
    }
    let shift = a_form(k_index, 0)?.dagger().apply(space, chi);
    let out = phi.add(&shift)?;
    space.checked_norm(&out, norm_tol)?;
    Ok(out)
}
