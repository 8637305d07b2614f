//! Potential and field-intensity operators.
//!
//! Every ladder operator of the box expansion multiplies exactly one plane
//! wave, so a field is stored spectrally as one complex vector per ladder.
//! Derivatives act on that vector (`∇ → i k_eff`, `∂ₜ → -i ω_eff`), which
//! makes them exact. Evaluating at `(x, t)` yields one [`LinearForm`] per
//! component; materialized matrices are only built on request.
//!
//! Creation terms carry the conjugate polarization, so each field is the sum
//! of a term and its η-adjoint and is η-self-adjoint.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::fock::{FockSpace, Ladder, OperatorMatrix};
use crate::forms::{a_form, LinearForm};
use crate::lattice::{BoxGeometry, ModeIndex, ModeSet};
use crate::polarization::{circular_basis, PolarizationBasis};
use crate::vector::{conj3, cross3, dot3, real3, scale3, CVec3, CVec4, ZERO3};
use crate::{C64, I};

/// Field components per ladder: `F(x, t) = Σ_α v_α W_α(x, t) L_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral<const D: usize> {
    terms: Vec<(Ladder, [C64; D])>,
}

pub type Spectral3 = Spectral<3>;

impl<const D: usize> Spectral<D> {
    fn from_map(map: BTreeMap<Ladder, [C64; D]>) -> Self {
        Self {
            terms: map.into_iter().collect(),
        }
    }

    pub fn terms(&self) -> &[(Ladder, [C64; D])] {
        &self.terms
    }

    pub fn amplitude(&self, ladder: Ladder) -> [C64; D] {
        match self.terms.binary_search_by_key(&ladder, |t| t.0) {
            Ok(p) => self.terms[p].1,
            Err(_) => [C64::new(0.0, 0.0); D],
        }
    }

    /// Largest componentwise amplitude difference over all ladders.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, _) in self.terms.iter().chain(&other.terms) {
            let (a, b) = (self.amplitude(*l), other.amplitude(*l));
            for i in 0..D {
                worst = worst.max((a[i] - b[i]).norm());
            }
        }
        worst
    }

    /// Component forms at `(x, t)`.
    pub fn at(&self, model: &FieldModel, x: [f64; 3], t: f64) -> [LinearForm; D] {
        let mut parts: [Vec<(Ladder, C64)>; D] = std::array::from_fn(|_| Vec::new());
        for (l, v) in &self.terms {
            let w = model.wave(*l, x, t);
            for i in 0..D {
                parts[i].push((*l, v[i] * w));
            }
        }
        parts.map(LinearForm::from_terms)
    }

    pub fn matrices(&self, model: &FieldModel, x: [f64; 3], t: f64) -> [OperatorMatrix; D] {
        self.at(model, x, t).map(|f| f.matrix(model.space()))
    }
}

/// Field operators over a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FieldModel {
    space: FockSpace,
    bases: Vec<PolarizationBasis>,
}

impl FieldModel {
    pub fn new(space: FockSpace) -> Self {
        let bases = space.modes().modes().iter().map(circular_basis).collect();
        Self { space, bases }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn modes(&self) -> &ModeSet {
        self.space.modes()
    }

    pub fn geometry(&self) -> &BoxGeometry {
        self.space.modes().geometry()
    }

    pub fn bases(&self) -> &[PolarizationBasis] {
        &self.bases
    }

    fn mode_of(&self, ladder: Ladder) -> (&ModeIndex, usize, usize) {
        let k_index = ladder.mode as usize / 4;
        (&self.modes().modes()[k_index], k_index, ladder.mode as usize % 4)
    }

    /// Effective wavevector and frequency: `W = exp(i(k_eff·x - ω_eff t))`.
    pub fn wave_vector(&self, ladder: Ladder) -> ([f64; 3], f64) {
        let (k, _, _) = self.mode_of(ladder);
        let sign = if ladder.create { -1.0 } else { 1.0 };
        (k.k().map(|c| sign * c), sign * k.omega())
    }

    pub fn wave(&self, ladder: Ladder, x: [f64; 3], t: f64) -> C64 {
        let (k, _, _) = self.mode_of(ladder);
        let w = k.plane_wave(x, t);
        if ladder.create {
            w.conj()
        } else {
            w
        }
    }

    fn normalization(&self, k: &ModeIndex) -> f64 {
        (2.0 * k.omega() * self.geometry().volume()).sqrt().recip()
    }

    /// `A^μ = Σ (2ωV)^{-1/2} [e^μ b W + e^μ* b† W*]`.
    pub fn potential(&self) -> Spectral<4> {
        let mut map = BTreeMap::new();
        for (k_index, k) in self.modes().modes().iter().enumerate() {
            let n = self.normalization(k);
            for s in 0..4 {
                let e: CVec4 = self.bases[k_index]
                    .four(s)
                    .expect("s < 4")
                    .map(|c| c * n);
                let mode = (k_index * 4 + s) as u32;
                map.insert(Ladder::annihilate(mode), e);
                map.insert(Ladder::create(mode), e.map(|c| c.conj()));
            }
        }
        Spectral::from_map(map)
    }

    fn accumulate(map: &mut BTreeMap<Ladder, CVec3>, form: &LinearForm, v: &CVec3) {
        for &(l, c) in form.terms() {
            let slot = map.entry(l).or_insert(ZERO3);
            for i in 0..3 {
                slot[i] += c * v[i];
            }
        }
    }

    fn from_helicity_terms(&self, coef: impl Fn(&ModeIndex, i32) -> C64) -> Spectral3 {
        let mut map = BTreeMap::new();
        for (k_index, k) in self.modes().modes().iter().enumerate() {
            for lambda in [1, -1, 0] {
                let c = coef(k, lambda);
                if c.norm() == 0.0 {
                    continue;
                }
                let eps = *self.bases[k_index].eps(lambda).expect("valid helicity");
                let a = a_form(k_index, lambda).expect("valid helicity");
                // X + X† with X = c ε a
                Self::accumulate(&mut map, &a, &scale3(c, &eps));
                Self::accumulate(&mut map, &a.dagger(), &conj3(&scale3(c, &eps)));
            }
        }
        map.retain(|_, v| v.iter().any(|c| c.norm() != 0.0));
        Spectral::from_map(map)
    }

    /// `E = Σ_{k,λ} √(ω/V) (1+λ²)^{-1/2} [ε a W + ε* a† W*]`.
    pub fn electric(&self) -> Spectral3 {
        let v = self.geometry().volume();
        self.from_helicity_terms(|k, lambda| {
            C64::new((k.omega() / v).sqrt() / (1.0 + (lambda * lambda) as f64).sqrt(), 0.0)
        })
    }

    /// `B = Σ_{k,λ} √(ω/V) (1+λ²)^{-1/2} (-iλ) [ε a W - ε* a† W*]`.
    ///
    /// `helicity_sign = -1` flips the `-iλ` factor; only used to show the
    /// Maxwell residual notices.
    pub fn magnetic_with_sign(&self, helicity_sign: f64) -> Spectral3 {
        let v = self.geometry().volume();
        self.from_helicity_terms(|k, lambda| {
            let mag = (k.omega() / v).sqrt() / (1.0 + (lambda * lambda) as f64).sqrt();
            -I * (helicity_sign * lambda as f64 * mag)
        })
    }

    pub fn magnetic(&self) -> Spectral3 {
        self.magnetic_with_sign(1.0)
    }

    /// `E = -∇A⁰ - ∂ₜA`, differentiated term by term.
    pub fn electric_from_potential(&self) -> Spectral3 {
        let a = self.potential();
        let terms = a
            .terms()
            .iter()
            .map(|(l, v)| {
                let (k, w) = self.wave_vector(*l);
                let mut e = ZERO3;
                for i in 0..3 {
                    e[i] = -I * k[i] * v[0] + I * w * v[i + 1];
                }
                (*l, e)
            })
            .collect();
        Spectral { terms }
    }

    /// `B = ∇×A`.
    pub fn magnetic_from_potential(&self) -> Spectral3 {
        let a = self.potential();
        let terms = a
            .terms()
            .iter()
            .map(|(l, v)| {
                let (k, _) = self.wave_vector(*l);
                let ik = scale3(I, &real3(k));
                (*l, cross3(&ik, &[v[1], v[2], v[3]]))
            })
            .collect();
        Spectral { terms }
    }

    pub fn curl(&self, f: &Spectral3) -> Spectral3 {
        Spectral {
            terms: f
                .terms()
                .iter()
                .map(|(l, v)| {
                    let (k, _) = self.wave_vector(*l);
                    (*l, cross3(&scale3(I, &real3(k)), v))
                })
                .collect(),
        }
    }

    pub fn divergence(&self, f: &Spectral3) -> Spectral<1> {
        Spectral {
            terms: f
                .terms()
                .iter()
                .map(|(l, v)| {
                    let (k, _) = self.wave_vector(*l);
                    (*l, [I * dot3(&real3(k), v)])
                })
                .collect(),
        }
    }

    pub fn time_derivative(&self, f: &Spectral3) -> Spectral3 {
        Spectral {
            terms: f
                .terms()
                .iter()
                .map(|(l, v)| {
                    let (_, w) = self.wave_vector(*l);
                    (*l, scale3(-I * w, v))
                })
                .collect(),
        }
    }

    pub fn potential_a(&self, x: [f64; 3], t: f64) -> [OperatorMatrix; 4] {
        self.potential().matrices(self, x, t)
    }

    pub fn field_e(&self, x: [f64; 3], t: f64) -> [OperatorMatrix; 3] {
        self.electric().matrices(self, x, t)
    }

    pub fn field_b(&self, x: [f64; 3], t: f64) -> [OperatorMatrix; 3] {
        self.magnetic().matrices(self, x, t)
    }

    /// Largest `max(‖∇·B‖, ‖∂ₜB + ∇×E‖)` over the grid at time `t`, each
    /// operator measured by the 2-norm of its ladder coefficients.
    pub fn maxwell_residual_of(&self, e: &Spectral3, b: &Spectral3, t: f64) -> f64 {
        let div = self.divergence(b);
        let faraday = {
            let db = self.time_derivative(b);
            let ce = self.curl(e);
            let mut map: BTreeMap<Ladder, CVec3> = BTreeMap::new();
            for (l, v) in db.terms().iter().chain(ce.terms()) {
                let slot = map.entry(*l).or_insert(ZERO3);
                for i in 0..3 {
                    slot[i] += v[i];
                }
            }
            Spectral::from_map(map)
        };
        let mut worst: f64 = 0.0;
        for x in self.geometry().grid() {
            let [d] = div.at(self, x, t);
            worst = worst.max(d.norm());
            for f in faraday.at(self, x, t) {
                worst = worst.max(f.norm());
            }
        }
        worst
    }

    pub fn maxwell_residual(&self, t: f64) -> f64 {
        self.maxwell_residual_of(&self.electric(), &self.magnetic(), t)
    }

    /// Largest matrix-element difference between the helicity construction
    /// of `E` and `-∇A⁰ - ∂ₜA` at `(x, t)`.
    pub fn electric_consistency(&self, x: [f64; 3], t: f64) -> Result<f64> {
        let a = self.electric().matrices(self, x, t);
        let b = self.electric_from_potential().matrices(self, x, t);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            worst = worst.max(a[i].sub(&b[i])?.max_abs());
        }
        Ok(worst)
    }
}
