//! Volume-integrated Poynting momentum `J = ∫ E×B d³x`.
//!
//! Two independent constructions:
//!
//! * [`momentum_oracle`] sums `E(x,t)×B(x,t)` over the grid with `E` factors
//!   kept left of `B` factors. Each term is a ladder product times
//!   `Σ_x w(x) W_α(x,t) W_β(x,t) ΔV`, which is evaluated as written.
//! * [`momentum_closed_form`] assembles the classic, cross and two ZB groups
//!   directly from `a(k, λ)`.
//!
//! Expectations are reduced to a static vector plus one `e^{∓2iωt}` amplitude
//! pair per `{k, -k}` pair, which gives ⟨J(t)⟩ at any time without
//! re-applying operators.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::fock::{FockSpace, StateVector};
use crate::forms::{a_form, QuadraticForm, VectorForm};
use crate::lattice::ModeIndex;
use crate::vector::{levi_civita, real3, CVec3};
use crate::C64;

/// Coefficients below this are quadrature round-off, not terms.
pub const QUADRATURE_FLOOR: f64 = 1e-14;

/// Grid quadrature of `Σ_x w(x) E(x,t)×B(x,t) ΔV`.
///
/// `weight` holds one value per grid point in [`BoxGeometry::grid`] order;
/// `None` means flat space.
///
/// [`BoxGeometry::grid`]: crate::lattice::BoxGeometry::grid
pub fn momentum_oracle(model: &FieldModel, t: f64, weight: Option<&[f64]>) -> Result<VectorForm> {
    let geometry = model.geometry();
    geometry.require_quadrature(model.modes().max_index())?;
    if let Some(w) = weight {
        if w.len() != geometry.grid_len() {
            return Err(Error::DimensionMismatch {
                left: w.len(),
                right: geometry.grid_len(),
            });
        }
    }
    let e = model.electric();
    let b = model.magnetic();

    // One plane wave per (mode, create) pair; ladders of the same mode share it.
    let n_modes = model.modes().len();
    let wave_id = |l: crate::fock::Ladder| (l.mode as usize / 4) * 2 + l.create as usize;
    let grid: Vec<[f64; 3]> = geometry.grid().collect();
    let cv = geometry.cell_volume();
    let table: Vec<Vec<C64>> = (0..2 * n_modes)
        .map(|id| {
            let ladder = crate::fock::Ladder {
                mode: (id / 2 * 4) as u32,
                create: id % 2 == 1,
            };
            grid.iter().map(|x| model.wave(ladder, *x, t)).collect()
        })
        .collect();
    let mut quad = vec![None; 4 * n_modes * n_modes];
    let mut q = |a: usize, b: usize| -> C64 {
        let slot = &mut quad[a * 2 * n_modes + b];
        *slot.get_or_insert_with(|| {
            let mut sum = C64::new(0.0, 0.0);
            for (j, (wa, wb)) in table[a].iter().zip(&table[b]).enumerate() {
                let w = weight.map_or(1.0, |w| w[j]);
                sum += wa * wb * w;
            }
            sum * cv
        })
    };

    let mut out = VectorForm::zero();
    for &(la, ea) in e.terms() {
        for &(lb, fb) in b.terms() {
            let qab = q(wave_id(la), wave_id(lb));
            if qab.norm() <= QUADRATURE_FLOOR {
                continue;
            }
            for l in 0..3 {
                let mut c = C64::new(0.0, 0.0);
                for i in 0..3 {
                    for j in 0..3 {
                        let eps = levi_civita(i, j, l);
                        if eps != 0.0 {
                            c += ea[i] * fb[j] * eps;
                        }
                    }
                }
                let c = c * qab;
                if c.norm() > QUADRATURE_FLOOR {
                    out.0[l].add_term(la, lb, c);
                }
            }
        }
    }
    Ok(out)
}

/// How the two ZB groups are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZbCoefficients {
    /// `(ω/2√2) ε(k,λ) a(k,λ)a(-k,0)` and `(ω/2√2) ε(-k,λ) a(k,0)a(-k,λ)`;
    /// matches the grid quadrature.
    Derived,
    /// `-(λω/2√2) ε(k,-λ) a(k,λ)a(-k,0)` and `+(λω/2√2) ε(-k,λ) a(k,0)a(-k,λ)`.
    AsPrinted,
}

/// One `{k, -k}` pair of a ZB group: `Z e^{-2iωt} + Z† e^{+2iωt}`.
#[derive(Debug, Clone)]
pub struct ZbPair {
    pub mode: ModeIndex,
    pub omega: f64,
    pub z: VectorForm,
}

impl ZbPair {
    pub fn at(&self, t: f64) -> VectorForm {
        let phase = C64::from_polar(1.0, -2.0 * self.omega * t);
        self.z.scale(phase).plus_dagger()
    }
}

#[derive(Debug, Clone)]
pub struct MomentumDecomposition {
    pub classic: VectorForm,
    pub cross: VectorForm,
    pub zb_a: Vec<ZbPair>,
    pub zb_b: Vec<ZbPair>,
}

fn sum_pairs(pairs: &[ZbPair], t: f64) -> VectorForm {
    let mut out = VectorForm::zero();
    for p in pairs {
        out.add_assign(&p.at(t));
    }
    out
}

impl MomentumDecomposition {
    pub fn term_zb_a(&self, t: f64) -> VectorForm {
        sum_pairs(&self.zb_a, t)
    }

    pub fn term_zb_b(&self, t: f64) -> VectorForm {
        sum_pairs(&self.zb_b, t)
    }

    pub fn static_part(&self) -> VectorForm {
        self.classic.add(&self.cross)
    }

    pub fn zb(&self, t: f64) -> VectorForm {
        self.term_zb_a(t).add(&self.term_zb_b(t))
    }

    pub fn total(&self, t: f64) -> VectorForm {
        self.static_part().add(&self.zb(t))
    }

    /// Static and per-pair oscillating expectation amplitudes of `ψ`.
    pub fn profile(&self, space: &FockSpace, psi: &StateVector, norm_tol: f64) -> Result<ExpectationProfile> {
        let statics = self.static_part().expectation(space, psi, norm_tol)?;
        let mut pairs: Vec<PairAmplitude> = Vec::new();
        for p in self.zb_a.iter().chain(&self.zb_b) {
            let minus = p.z.expectation(space, psi, norm_tol)?;
            let plus = p.z.dagger().expectation(space, psi, norm_tol)?;
            match pairs.iter_mut().find(|q| q.mode == p.mode) {
                Some(q) => {
                    for i in 0..3 {
                        q.minus[i] += minus[i];
                        q.plus[i] += plus[i];
                    }
                }
                None => pairs.push(PairAmplitude {
                    mode: p.mode,
                    omega: p.omega,
                    minus,
                    plus,
                }),
            }
        }
        Ok(ExpectationProfile { statics, pairs })
    }
}

fn pair_representative(modes: &crate::lattice::ModeSet, k_index: usize) -> usize {
    let neg = modes
        .position(modes.modes()[k_index].negated().n())
        .expect("negation-closed");
    k_index.min(neg)
}

/// Four-group closed form of `J` with the derived ZB coefficients.
pub fn momentum_closed_form(model: &FieldModel) -> Result<MomentumDecomposition> {
    momentum_closed_form_with(model, ZbCoefficients::Derived)
}

pub fn momentum_closed_form_with(model: &FieldModel, zb: ZbCoefficients) -> Result<MomentumDecomposition> {
    let modes = model.modes();
    if !modes.is_negation_closed() {
        return Err(Error::NotNegationClosed);
    }
    let s2 = std::f64::consts::SQRT_2;
    let mut classic = VectorForm::zero();
    let mut cross = VectorForm::zero();
    let mut zb_a: Vec<ZbPair> = Vec::new();
    let mut zb_b: Vec<ZbPair> = Vec::new();
    let add_pair = |group: &mut Vec<ZbPair>, rep: usize, term: VectorForm| {
        let mode = modes.modes()[rep];
        match group.iter_mut().find(|p| p.mode == mode) {
            Some(p) => p.z.add_assign(&term),
            None => group.push(ZbPair {
                mode,
                omega: mode.omega(),
                z: term,
            }),
        }
    };

    for (ki, k) in modes.modes().iter().enumerate() {
        let w = k.omega();
        let kneg = modes.position(k.negated().n()).expect("negation-closed");
        let rep = pair_representative(modes, ki);
        let a0 = a_form(ki, 0)?;
        let a0_neg = a_form(kneg, 0)?;
        for lam in [1, -1] {
            let a = a_form(ki, lam)?;
            let a_neg = a_form(kneg, lam)?;
            let eps = *model.bases()[ki].eps(lam)?;
            let eps_flip = *model.bases()[ki].eps(-lam)?;
            let eps_neg = *model.bases()[kneg].eps(lam)?;

            classic.add_assign(&VectorForm::along(
                &real3(k.k()),
                &QuadraticForm::product(&a.dagger(), &a),
            ));

            let t2 = VectorForm::along(&eps, &QuadraticForm::product(&a0.dagger(), &a))
                .scale(C64::new(-w / s2, 0.0));
            cross.add_assign(&t2.plus_dagger());

            let c = w / (2.0 * s2);
            let l = lam as f64;
            let (va, ca, vb, cb): (CVec3, f64, CVec3, f64) = match zb {
                ZbCoefficients::Derived => (eps, c, eps_neg, c),
                ZbCoefficients::AsPrinted => (eps_flip, -l * c, eps_neg, l * c),
            };
            add_pair(
                &mut zb_a,
                rep,
                VectorForm::along(&va, &QuadraticForm::product(&a, &a0_neg)).scale(C64::new(ca, 0.0)),
            );
            add_pair(
                &mut zb_b,
                rep,
                VectorForm::along(&vb, &QuadraticForm::product(&a0, &a_neg)).scale(C64::new(cb, 0.0)),
            );
        }
    }
    Ok(MomentumDecomposition {
        classic,
        cross,
        zb_a,
        zb_b,
    })
}

/// Anything that yields the momentum operator at time `t`.
pub trait MomentumSource {
    fn at(&self, t: f64) -> Result<VectorForm>;
}

impl MomentumSource for MomentumDecomposition {
    fn at(&self, t: f64) -> Result<VectorForm> {
        Ok(self.total(t))
    }
}

/// The grid quadrature as a [`MomentumSource`].
pub struct Oracle<'a> {
    pub model: &'a FieldModel,
    pub weight: Option<&'a [f64]>,
}

impl MomentumSource for Oracle<'_> {
    fn at(&self, t: f64) -> Result<VectorForm> {
        momentum_oracle(self.model, t, self.weight)
    }
}

/// Expectation amplitudes of one `{k, -k}` pair.
#[derive(Debug, Clone)]
pub struct PairAmplitude {
    pub mode: ModeIndex,
    pub omega: f64,
    /// Coefficient of `e^{-2iωt}`.
    pub minus: CVec3,
    /// Coefficient of `e^{+2iωt}`.
    pub plus: CVec3,
}

impl PairAmplitude {
    pub fn at(&self, t: f64) -> CVec3 {
        let m = C64::from_polar(1.0, -2.0 * self.omega * t);
        std::array::from_fn(|i| self.minus[i] * m + self.plus[i] * m.conj())
    }

    pub fn magnitude(&self) -> f64 {
        self.minus
            .iter()
            .chain(&self.plus)
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|Re/Im part · k̂| / |part|` of the oscillation, 0 if there is
    /// none.
    pub fn direction_cosine(&self) -> f64 {
        let k = self.mode.unit();
        // J_osc(t) = 2 Re(m e^{-2iωt}) when plus = conj(minus)
        let v = &self.minus;
        let mut worst: f64 = 0.0;
        for part in [v.map(|c| c.re), v.map(|c| c.im)] {
            let n = part.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                let d: f64 = (0..3).map(|i| part[i] * k[i]).sum();
                worst = worst.max(d.abs() / n);
            }
        }
        worst
    }
}

/// ⟨J(t)⟩ = statics + Σ_pairs (minus e^{-2iωt} + plus e^{+2iωt}).
#[derive(Debug, Clone)]
pub struct ExpectationProfile {
    pub statics: CVec3,
    pub pairs: Vec<PairAmplitude>,
}

impl ExpectationProfile {
    pub fn at(&self, t: f64) -> CVec3 {
        let mut out = self.statics;
        for p in &self.pairs {
            let v = p.at(t);
            for i in 0..3 {
                out[i] += v[i];
            }
        }
        out
    }

    pub fn oscillating(&self, t: f64) -> CVec3 {
        let mut out = [C64::new(0.0, 0.0); 3];
        for p in &self.pairs {
            let v = p.at(t);
            for i in 0..3 {
                out[i] += v[i];
            }
        }
        out
    }

    pub fn series(&self, times: &[f64]) -> TimeSeries {
        TimeSeries::from_values(times, times.iter().map(|&t| self.at(t)).collect())
    }

    /// Pairs whose oscillation exceeds `floor`.
    pub fn active_pairs(&self, floor: f64) -> impl Iterator<Item = &PairAmplitude> {
        self.pairs.iter().filter(move |p| p.magnitude() > floor)
    }
}

/// Sampled ⟨J(t)⟩ with the largest imaginary part per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<[f64; 3]>,
    pub im_residual: Vec<f64>,
}

impl TimeSeries {
    pub fn from_values(times: &[f64], raw: Vec<CVec3>) -> Self {
        Self {
            times: times.to_vec(),
            values: raw.iter().map(|v| v.map(|c| c.re)).collect(),
            im_residual: raw
                .iter()
                .map(|v| v.iter().map(|c| c.im.abs()).fold(0.0, f64::max))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_im_residual(&self) -> f64 {
        self.im_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.len().max(1) as f64;
        let mut m = [0.0; 3];
        for v in &self.values {
            for i in 0..3 {
                m[i] += v[i] / n;
            }
        }
        m
    }

    /// Largest deviation of any component from its first sample.
    pub fn spread(&self) -> f64 {
        let Some(first) = self.values.first() else {
            return 0.0;
        };
        self.values
            .iter()
            .flat_map(|v| (0..3).map(move |i| (v[i] - first[i]).abs()))
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,Jx,Jy,Jz,Im_residual\n");
        for ((t, v), r) in self.times.iter().zip(&self.values).zip(&self.im_residual) {
            out.push_str(&format!(
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}\n",
                t, v[0], v[1], v[2], r
            ));
        }
        out
    }
}

/// Evaluates ⟨J(t)⟩ by applying the operator at every sample time.
pub fn expectation_series(
    source: &dyn MomentumSource,
    space: &FockSpace,
    psi: &StateVector,
    times: &[f64],
    norm_tol: f64,
) -> Result<TimeSeries> {
    space.checked_norm(psi, norm_tol)?;
    let mut raw = Vec::with_capacity(times.len());
    for &t in times {
        raw.push(source.at(t)?.expectation(space, psi, norm_tol)?);
    }
    Ok(TimeSeries::from_values(times, raw))
}

/// `samples` equally spaced times covering `periods` ZB periods `π/ω`,
/// endpoint excluded.
pub fn sample_times(omega: f64, periods: usize, samples: usize) -> Vec<f64> {
    let span = periods as f64 * PI / omega;
    (0..samples).map(|j| span * j as f64 / samples as f64).collect()
}

/// Dominant nonzero angular frequency of the mean-removed series.
///
/// Returns `(bin, angular_frequency, power_fraction)`; `None` for a constant
/// series. Assumes uniform sampling starting at `times[0]`.
pub fn dominant_frequency(series: &TimeSeries) -> Option<(usize, f64, f64)> {
    let n = series.len();
    if n < 4 {
        return None;
    }
    let dt = series.times[1] - series.times[0];
    let mean = series.mean();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut power = vec![0.0; n / 2 + 1];
    for i in 0..3 {
        let mut buf: Vec<C64> = series
            .values
            .iter()
            .map(|v| C64::new(v[i] - mean[i], 0.0))
            .collect();
        fft.process(&mut buf);
        for (b, p) in power.iter_mut().enumerate() {
            *p += buf[b].norm_sqr();
        }
    }
    let total: f64 = power[1..].iter().sum();
    let scale = series.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if total <= (1e-24 * scale * scale) * n as f64 {
        return None;
    }
    let (bin, peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, 0.0), |best, (b, &p)| if p > best.1 { (b, p) } else { best });
    Some((bin, 2.0 * PI * bin as f64 / (n as f64 * dt), peak / total))
}

/// Summary of the oscillating part of ⟨J(t)⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ZbSummary {
    /// Frequency of the mode the scenario is built around.
    pub omega: f64,
    /// Dominant angular frequency of the DFT, 0 if the series is constant.
    pub zb_frequency: f64,
    /// `max_t |⟨J(t)⟩ - J_static|` over the samples.
    pub zb_amplitude: f64,
    /// Largest direction cosine of any pair oscillation against its own k̂.
    pub direction_cosine: f64,
    pub eps_h: f64,
}

pub fn summarize(profile: &ExpectationProfile, series: &TimeSeries, omega: f64, eps_h: f64) -> ZbSummary {
    let zb_amplitude = series
        .times
        .iter()
        .map(|&t| {
            let o = profile.oscillating(t);
            o.iter().map(|c| c.re * c.re).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    let direction_cosine = profile
        .active_pairs(1e-300)
        .map(PairAmplitude::direction_cosine)
        .fold(0.0, f64::max);
    ZbSummary {
        omega,
        zb_frequency: dominant_frequency(series).map_or(0.0, |d| d.1),
        zb_amplitude,
        direction_cosine,
        eps_h,
    }
}

/// Normal-ordered comparison: largest coefficient difference and the
/// c-number offset `a - b`.
pub fn normal_form_gap(a: &VectorForm, b: &VectorForm) -> (f64, CVec3) {
    let (na, nb) = (a.normal_ordered(), b.normal_ordered());
    let (ca, cb) = (na.constant(), nb.constant());
    (na.max_term_diff(&nb), std::array::from_fn(|i| ca[i] - cb[i]))
}

/// Largest matrix-element difference of the literal truncated operators on
/// the given basis columns.
pub fn column_gap(space: &FockSpace, a: &VectorForm, b: &VectorForm, columns: impl Iterator<Item = usize>) -> f64 {
    let mut worst: f64 = 0.0;
    let cols: Vec<usize> = columns.collect();
    for l in 0..3 {
        let diff = a.0[l].add(&b.0[l].scale(C64::new(-1.0, 0.0)));
        for &j in &cols {
            for (_, v) in diff.apply_basis(space, j) {
                worst = worst.max(v.norm());
            }
        }
    }
    worst
}

/// `N(|vac⟩ + θ b†(p,1) b†(-p,3)|vac⟩)` with unit η-norm.
pub fn admixture_state(space: &FockSpace, p: [i32; 3], theta: f64) -> Result<StateVector> {
    let neg = [-p[0], -p[1], -p[2]];
    let pair = space.state_index(&[space.mode_id(p, 1)?, space.mode_id(neg, 3)?]);
    let Some(pair) = pair else {
        return Err(Error::TruncationOverflow { cap: space.cap() });
    };
    let mut psi = space.vacuum();
    // both creators are non-scalar, so b†b†|vac⟩ is the plain basis ket
    psi.amps[pair] = C64::new(theta, 0.0);
    let norm = space.checked_norm(&psi, 0.0)?;
    Ok(psi.scale(C64::new(norm.sqrt().recip(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoxGeometry, ModeSet};

    fn model(gens: &[[i32; 3]], cap: usize, n: usize) -> FieldModel {
        let g = BoxGeometry::new(2.0 * PI, n).unwrap();
        FieldModel::new(FockSpace::new(ModeSet::symmetric(g, gens).unwrap(), cap).unwrap())
    }

    #[test]
    fn factored_quadrature_matches_pointwise_matrix_sum() {
        let m = model(&[[0, 0, 1], [1, 0, 0]], 1, 4);
        let sp = m.space();
        let t = 0.37;
        let mut direct: [crate::fock::OperatorMatrix; 3] =
            std::array::from_fn(|_| crate::fock::OperatorMatrix::zeros(sp.dim()));
        let cv = C64::new(m.geometry().cell_volume(), 0.0);
        for x in m.geometry().grid() {
            let e = m.field_e(x, t);
            let b = m.field_b(x, t);
            for l in 0..3 {
                let (i, j) = ((l + 1) % 3, (l + 2) % 3);
                let term = e[i].mul(&b[j]).unwrap().sub(&e[j].mul(&b[i]).unwrap()).unwrap();
                direct[l] = direct[l].add(&term.scale(cv)).unwrap();
            }
        }
        let oracle = momentum_oracle(&m, t, None).unwrap();
        for l in 0..3 {
            let diff = oracle.0[l].matrix(sp).sub(&direct[l]).unwrap();
            assert!(diff.max_abs() < 1e-12, "component {l}: {}", diff.max_abs());
        }
    }

    #[test]
    fn closed_form_matches_oracle_in_normal_order() {
        let m = model(&[[0, 0, 1], [1, 0, 0], [1, 1, 0], [0, 1, -1]], 2, 4);
        let cf = momentum_closed_form(&m).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let oracle = momentum_oracle(&m, t, None).unwrap().normal_ordered();
            let closed = cf.total(t).normal_ordered();
            assert!(oracle.max_term_diff(&closed) < 1e-12, "t={t}");
            for c in oracle.constant() {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn printed_zb_coefficients_disagree_with_oracle() {
        let m = model(&[[0, 0, 1], [1, 1, 0]], 2, 4);
        let printed = momentum_closed_form_with(&m, ZbCoefficients::AsPrinted).unwrap();
        let oracle = momentum_oracle(&m, 0.0, None).unwrap().normal_ordered();
        assert!(oracle.max_term_diff(&printed.total(0.0).normal_ordered()) > 1e-3);
    }

    #[test]
    fn one_photon_momentum_and_vacuum() {
        let m = model(&[[0, 1, 1], [1, 0, 0]], 2, 4);
        let sp = m.space();
        let oracle = momentum_oracle(&m, 0.2, None).unwrap();
        let vac = oracle.expectation(sp, &sp.vacuum(), 1e-10).unwrap();
        assert!(vac.iter().all(|c| c.norm() < 1e-12));
        let k = *m.modes().get([0, 1, 1]).unwrap();
        let one = sp.basis_state(sp.state_index(&[sp.mode_id([0, 1, 1], 1).unwrap()]).unwrap());
        let j = oracle.expectation(sp, &one, 1e-10).unwrap();
        for i in 0..3 {
            assert!((j[i] - C64::new(k.k()[i], 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn unit_weight_is_flat() {
        let m = model(&[[0, 0, 1]], 2, 4);
        let ones = vec![1.0; m.geometry().grid_len()];
        let a = momentum_oracle(&m, 0.4, None).unwrap();
        let b = momentum_oracle(&m, 0.4, Some(&ones)).unwrap();
        assert_eq!(a, b);
        assert!(momentum_oracle(&m, 0.4, Some(&ones[1..])).is_err());
    }

    #[test]
    fn quadrature_condition_enforced() {
        let m = model(&[[0, 0, 2]], 1, 4);
        assert!(momentum_oracle(&m, 0.0, None).is_err());
    }

    #[test]
    fn closed_form_is_eta_self_adjoint() {
        let m = model(&[[0, 0, 1], [1, 1, 0]], 2, 4);
        let sp = m.space();
        let cf = momentum_closed_form(&m).unwrap();
        for q in cf.total(0.9).0 {
            let mat = q.matrix(sp);
            assert!(mat.sub(&sp.dagger(&mat)).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn requires_negation_closed_modes() {
        let g = BoxGeometry::new(2.0 * PI, 4).unwrap();
        let modes = ModeSet::from_indices(g, &[[0, 0, 1]]).unwrap();
        let m = FieldModel::new(FockSpace::new(modes, 1).unwrap());
        assert!(matches!(momentum_closed_form(&m), Err(Error::NotNegationClosed)));
    }

    #[test]
    fn admixture_oscillates_at_twice_omega_transverse_to_k() {
        let m = model(&[[0, 0, 1], [1, 0, 0]], 2, 4);
        let sp = m.space();
        let theta = 0.1;
        let psi = admixture_state(sp, [0, 0, 1], theta).unwrap();
        let cf = momentum_closed_form(&m).unwrap();
        let profile = cf.profile(sp, &psi, 1e-10).unwrap();

        // ⟨vac|a(-p,0)a(p,+1)|(p,1),(-p,3)⟩ = (i/√2)(i); both ZB groups together
        // weigh it by (ω/√2) ε(p,+1), normalization gives θ/(1+θ²).
        let w = 1.0;
        let eps = m.bases()[m.modes().position([0, 0, 1]).unwrap()].eps_plus;
        let expected = eps.map(|e| e * (-0.5 * w * theta / (1.0 + theta * theta)));
        let active: Vec<_> = profile.active_pairs(1e-14).collect();
        assert_eq!(active.len(), 1);
        for i in 0..3 {
            assert!((active[0].minus[i] - expected[i]).norm() < 1e-14);
            assert!((active[0].plus[i] - expected[i].conj()).norm() < 1e-14);
        }
        assert!(active[0].direction_cosine() < 1e-12);

        let times = sample_times(w, 4, 256);
        let series = profile.series(&times);
        let (bin, freq, _) = dominant_frequency(&series).unwrap();
        assert_eq!(bin, 4);
        assert!((freq - 2.0 * w).abs() < 1e-12);
        assert!(series.max_im_residual() < 1e-12);
        let amp = theta * w / ((1.0 + theta * theta) * std::f64::consts::SQRT_2);
        let peak = series.values.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
        assert!((peak - amp).abs() < 1e-3 * amp);
    }

    #[test]
    fn profile_agrees_with_direct_series() {
        let m = model(&[[0, 0, 1], [1, 0, 0]], 2, 4);
        let sp = m.space();
        let mut psi = admixture_state(sp, [1, 0, 0], 0.3).unwrap();
        let extra = sp.state_index(&[sp.mode_id([0, 0, 1], 2).unwrap()]).unwrap();
        psi.amps[extra] = C64::new(0.2, -0.1);
        let cf = momentum_closed_form(&m).unwrap();
        let times = [0.0, 0.4, 1.3];
        let direct = expectation_series(&cf, sp, &psi, &times, 1e-10).unwrap();
        // ψ reaches the cap, where only the normal-ordered oracle is exact
        let oracle: Vec<CVec3> = times
            .iter()
            .map(|&t| {
                let j = momentum_oracle(&m, t, None).unwrap().normal_ordered();
                j.expectation(sp, &psi, 1e-10).unwrap()
            })
            .collect();
        let oracle = TimeSeries::from_values(&times, oracle);
        let via = cf.profile(sp, &psi, 1e-10).unwrap().series(&times);
        for j in 0..3 {
            for i in 0..3 {
                assert!((direct.values[j][i] - via.values[j][i]).abs() < 1e-12);
                assert!((direct.values[j][i] - oracle.values[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zb_terms_carry_double_frequency_phase() {
        let m = model(&[[0, 0, 1]], 2, 4);
        let cf = momentum_closed_form(&m).unwrap();
        let t = 0.25;
        let z0 = cf.zb_a[0].z.clone();
        let expected = z0.scale(C64::from_polar(1.0, -2.0 * t)).plus_dagger();
        assert_eq!(cf.zb_a[0].at(t), expected);
        assert_eq!(cf.zb_a.len(), 1);
        // every ZB coefficient vector is transverse to its pair
        let k = m.modes().modes()[0].unit();
        let z = &cf.zb_a[0].z;
        for (l, r, _) in z.0[0].terms().chain(z.0[1].terms()).chain(z.0[2].terms()) {
            let dot: C64 = (0..3).map(|i| z.0[i].coefficient(l, r) * k[i]).sum();
            assert!(dot.norm() < 1e-15);
        }
    }

    #[test]
    fn csv_is_stable() {
        let s = TimeSeries::from_values(&[0.0, 0.5], vec![[C64::new(1.0, 0.0); 3], [C64::new(0.5, 1e-13); 3]]);
        let csv = s.to_csv();
        assert!(csv.starts_with("t,Jx,Jy,Jz,Im_residual\n0.000000000000000e0,"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv, s.clone().to_csv());
    }
}
