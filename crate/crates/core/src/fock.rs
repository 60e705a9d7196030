//! Truncated Fock space: ladder operators, pure states, density matrices and
//! the observables used to judge them.
//!
//! Fock labels are 0-based. Matrix element `(n, m)` of an operator or density
//! is `⟨n|·|m⟩`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, hermitian_eigenvalues};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Number of retained Fock levels `0..dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(())
    }
}

/// A dense operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    entries: CMatrix,
}

impl FockOperator {
    pub fn from_matrix(space: FockSpace, entries: CMatrix) -> Result<Self> {
        space.check_matrix(&entries)?;
        Ok(Self { space, entries })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            entries: CMatrix::identity(space.dim, space.dim),
        }
    }

    /// Annihilation operator: `⟨n-1|a|n⟩ = √n`.
    pub fn annihilation(space: FockSpace) -> Self {
        let n = space.dim;
        let mut entries = CMatrix::zeros(n, n);
        for k in 1..n {
            entries[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        Self { space, entries }
    }

    pub fn creation(space: FockSpace) -> Self {
        Self::annihilation(space).adjoint()
    }

    /// Number operator `a†a`, built as a product so it inherits the
    /// truncation of the ladder operators.
    pub fn number(space: FockSpace) -> Self {
        Self::creation(space).mul(&Self::annihilation(space))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            space: self.space,
            entries: &self.entries * &other.entries,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.space);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            space: self.space,
            entries: &self.entries * c,
        }
    }
}

/// Free-function spelling of [`FockOperator::annihilation`].
pub fn annihilation(space: FockSpace) -> FockOperator {
    FockOperator::annihilation(space)
}

/// Free-function spelling of [`FockOperator::creation`].
pub fn creation(space: FockSpace) -> FockOperator {
    FockOperator::creation(space)
}

/// A normalized pure state in the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: CVector,
    norm_deficit: f64,
}

impl StateVector {
    /// Normalizes `amplitudes`; the squared-norm shortfall from one is kept as
    /// the truncation diagnostic.
    pub fn from_amplitudes(space: FockSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "state vector has zero or non-finite norm".into(),
            });
        }
        Ok(Self {
            space,
            amplitudes: amplitudes / C64::new(norm, 0.0),
            norm_deficit: 1.0 - norm * norm,
        })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::number(space, 0).expect("vacuum is always in range")
    }

    pub fn number(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("Fock level {n} outside space of dimension {}", space.dim),
            });
        }
        let mut amplitudes = CVector::zeros(space.dim);
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes,
            norm_deficit: 0.0,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `1 - Σ|c_n|²` of the amplitudes before renormalization. Zero for
    /// states that fit exactly in the truncated basis.
    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ/√n!` truncated to the space,
/// without renormalization.
pub fn coherent_amplitudes(space: FockSpace, alpha: C64) -> CVector {
    let mut c = CVector::zeros(space.dim);
    c[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..space.dim {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    c
}

/// Coherent state `|α⟩`, renormalized over the truncated basis.
pub fn coherent_state(space: FockSpace, alpha: C64) -> StateVector {
    StateVector::from_amplitudes(space, coherent_amplitudes(space, alpha))
        .expect("coherent amplitudes have positive norm")
}

/// Cat state `(|α⟩ + e^{iφ}|−α⟩)/norm`.
pub fn cat_state(space: FockSpace, alpha: C64, phase: f64) -> StateVector {
    if alpha == C64::new(0.0, 0.0) {
        return StateVector::vacuum(space);
    }
    let plus = coherent_amplitudes(space, alpha);
    let minus = coherent_amplitudes(space, -alpha);
    let tail = 1.0 - plus.norm_squared();
    let amplitudes = plus + minus * C64::from_polar(1.0, phase);
    let mut state = StateVector::from_amplitudes(space, amplitudes)
        .expect("cat superposition with alpha != 0 has positive norm");
    // report the component deficit; the superposition norm is not 1 even untruncated
    state.norm_deficit = tail;
    state
}

/// A density matrix, or any matrix shaped like one.
///
/// Intermediate states of the transformation pipelines are not physical, so
/// construction does not enforce Hermiticity, positivity or unit trace. Use
/// [`DensityMatrix::physicality`] to check those.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(space: FockSpace, entries: CMatrix) -> Result<Self> {
        space.check_matrix(&entries)?;
        Ok(Self { space, entries })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_ket(psi: &StateVector) -> Self {
        let a = &psi.amplitudes;
        Self {
            space: psi.space,
            entries: a * a.adjoint(),
        }
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::from_ket(&StateVector::vacuum(space))
    }

    pub fn maximally_mixed(space: FockSpace) -> Self {
        let n = space.dim;
        Self {
            space,
            entries: CMatrix::identity(n, n) / C64::new(n as f64, 0.0),
        }
    }

    /// Thermal state with mean occupation `nbar` (before truncation),
    /// renormalized over the truncated basis.
    pub fn thermal(space: FockSpace, nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: format!("mean occupation must be nonnegative, got {nbar}"),
            });
        }
        let ratio = nbar / (nbar + 1.0);
        let mut p: Vec<f64> = (0..space.dim).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let diag = CVector::from_iterator(space.dim, p.into_iter().map(|x| C64::new(x, 0.0)));
        Ok(Self {
            space,
            entries: CMatrix::from_diagonal(&diag),
        })
    }

    /// `GG†/tr(GG†)` with `G` filled by independent standard complex
    /// Gaussians. Positive semidefinite by construction.
    pub fn random<R: Rng + ?Sized>(space: FockSpace, rng: &mut R) -> Self {
        let n = space.dim;
        let g = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let gg = &g * g.adjoint();
        let tr = gg.trace();
        Self {
            space,
            entries: gg / tr,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.entries - self.entries.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries)[0]
    }

    /// Elements of the leading `size × size` block, zero-padded or cropped.
    pub fn resized(&self, space: FockSpace) -> Self {
        let n = space.dim;
        let keep = n.min(self.space.dim);
        let mut entries = CMatrix::zeros(n, n);
        entries
            .view_mut((0, 0), (keep, keep))
            .copy_from(&self.entries.view((0, 0), (keep, keep)));
        Self { space, entries }
    }

    pub fn physicality(&self) -> Physicality {
        Physicality {
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity_error: self.hermiticity_error(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }
}

/// Distance of a matrix from being a physical density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub trace: C64,
    /// Real part of `tr ρ²`.
    pub purity: f64,
    /// Real part of `tr(a†a ρ)`.
    pub mean_n: f64,
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    let m = &rho.entries;
    let n = m.nrows();
    let mut purity = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            purity += m[(i, j)] * m[(j, i)];
        }
    }
    let mean_n = (0..n).map(|k| k as f64 * m[(k, k)].re).sum();
    Observables {
        trace: m.trace(),
        purity: purity.re,
        mean_n,
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1 + 1e-10]`.
pub fn fidelity_pure(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.space != rho.space {
        return Err(Error::DimensionMismatch {
            expected: rho.space.dim,
            found: psi.space.dim,
        });
    }
    let v = &psi.amplitudes;
    let f = v.dotc(&(&rho.entries * v));
    Ok(f.re.clamp(0.0, 1.0 + 1e-10))
}

/// Husimi Q function `⟨α|ρ|α⟩/π` at each grid point.
///
/// The coherent states use the exact (unrenormalized) amplitudes truncated to
/// the space, so the quadrature over the plane stays normalized.
pub fn husimi_q(rho: &DensityMatrix, grid: &[C64]) -> Vec<f64> {
    grid.iter()
        .map(|&alpha| {
            let v = coherent_amplitudes(rho.space, alpha);
            let q = v.dotc(&(&rho.entries * &v)).re / PI;
            q.max(0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_one_level_space() {
        assert_eq!(FockSpace::new(1), Err(Error::DimensionTooSmall(1)));
    }

    #[test]
    fn annihilation_small_dimensions() {
        let a2 = annihilation(space(2));
        assert_eq!(a2.entries()[(0, 1)], c(1.0, 0.0));
        assert_eq!(a2.entries().iter().filter(|z| z.norm() > 0.0).count(), 1);

        let a3 = annihilation(space(3));
        assert_eq!(a3.entries()[(0, 1)], c(1.0, 0.0));
        assert!((a3.entries()[(1, 2)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(a3.entries().iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn number_operator_diagonal() {
        let n = FockOperator::number(space(6));
        for k in 0..6 {
            assert!((n.entries()[(k, k)] - c(k as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn creation_is_adjoint() {
        let s = space(7);
        assert_eq!(creation(s).entries(), &annihilation(s).entries().adjoint());
    }

    #[test]
    fn coherent_vacuum_and_amplitude() {
        let v = coherent_state(space(8), c(0.0, 0.0));
        assert_eq!(v.amplitudes()[0], c(1.0, 0.0));
        assert!(v.amplitudes().iter().skip(1).all(|z| z.norm() == 0.0));

        let raw = coherent_amplitudes(space(30), c(1.0, 0.0));
        assert!((raw[1].re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((raw[1].re - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let psi = coherent_state(space(30), c(2.0, 0.0));
        assert!(psi.norm_deficit() < 1e-9);
        let obs = observables(&DensityMatrix::from_ket(&psi));
        assert!((obs.mean_n - 4.0).abs() < 1e-6);
    }

    #[test]
    fn cat_parity() {
        let s = space(30);
        let odd = cat_state(s, c(2.0, 0.0), PI);
        let even = cat_state(s, c(2.0, 0.0), 0.0);
        for n in 0..30 {
            if n % 2 == 0 {
                assert!(odd.amplitudes()[n].norm() < 1e-12);
            } else {
                assert!(even.amplitudes()[n].norm() < 1e-12);
            }
        }
        assert!((odd.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_at_zero_alpha_is_vacuum() {
        for phase in [0.0, 1.0, PI] {
            let v = cat_state(space(5), c(0.0, 0.0), phase);
            assert_eq!(v, StateVector::vacuum(space(5)));
        }
    }

    #[test]
    fn observables_of_simple_states() {
        let obs = observables(&DensityMatrix::vacuum(space(5)));
        assert_eq!(obs.trace, c(1.0, 0.0));
        assert_eq!(obs.purity, 1.0);
        assert_eq!(obs.mean_n, 0.0);

        let mixed = observables(&DensityMatrix::maximally_mixed(space(4)));
        assert!((mixed.purity - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fidelity_basics() {
        let s = space(5);
        let vac = DensityMatrix::vacuum(s);
        assert_eq!(fidelity_pure(&StateVector::vacuum(s), &vac).unwrap(), 1.0);
        let one = StateVector::number(s, 1).unwrap();
        assert_eq!(fidelity_pure(&one, &vac).unwrap(), 0.0);
        let wrong = StateVector::vacuum(space(6));
        assert!(matches!(
            fidelity_pure(&wrong, &vac),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn husimi_of_vacuum() {
        let q = husimi_q(&DensityMatrix::vacuum(space(20)), &[c(0.0, 0.0), c(2.0, 0.0)]);
        assert!((q[0] - 1.0 / PI).abs() < 1e-15);
        assert!((q[1] - (-4.0f64).exp() / PI).abs() < 1e-15);
    }

    #[test]
    fn husimi_normalization_quadrature() {
        // Q of a coherent state is a unit-mass Gaussian centred at α
        let s = space(40);
        let rho = DensityMatrix::from_ket(&coherent_state(s, c(1.0, -0.5)));
        let (lo, hi, pts) = (-5.0, 5.0, 101);
        let h = (hi - lo) / (pts - 1) as f64;
        let grid: Vec<C64> = (0..pts)
            .flat_map(|i| (0..pts).map(move |j| c(lo + h * i as f64, lo + h * j as f64)))
            .collect();
        let total: f64 = husimi_q(&rho, &grid).iter().sum::<f64>() * h * h;
        assert!((total - 1.0).abs() < 1e-2, "total {total}");
    }

    #[test]
    fn random_density_is_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(space(10), &mut rng);
        let p = rho.physicality();
        assert!(p.trace_error < 1e-12);
        assert!(p.hermiticity_error < 1e-12);
        assert!(p.min_eigenvalue > -1e-12);
    }

    #[test]
    fn pure_density_invariants() {
        let psi = coherent_state(space(12), c(0.7, 0.4));
        let rho = DensityMatrix::from_ket(&psi);
        let p = rho.physicality();
        assert!(p.trace_error < 1e-10 && p.hermiticity_error < 1e-10);
        assert!(p.min_eigenvalue > -1e-10);
        assert!((observables(&rho).purity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn thermal_mean() {
        let rho = DensityMatrix::thermal(space(80), 1.0).unwrap();
        assert!((observables(&rho).mean_n - 1.0).abs() < 1e-12);
    }
}
