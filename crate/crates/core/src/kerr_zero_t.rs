//! Lossy Kerr cavity coupled to a zero-temperature bath.
//!
//! The generator is `S + J₋ + L` with
//!
//! * `Sρ = −iχ[a†²a², ρ]`,
//! * `J₋ρ = 2γ₋ aρa†`,
//! * `Lρ = −γ₋(a†aρ + ρa†a)`,
//!
//! and the propagator factorizes exactly as
//! `e^{St} e^{Lt} exp(g(R)·J₋)` with `g(k) = (1 − e^{−2t(γ₋+iχk)}) / (2(γ₋+iχk))`,
//! where `R` is the superoperator `ρ ↦ a†aρ − ρa†a` (eigenvalue `k = n − m` on
//! `|n⟩⟨m|`). `S` and `L` act elementwise, and `J₋` preserves `n − m`, so every
//! factor is evaluated directly on Fock matrix elements. Truncation is exact:
//! nothing in the generator raises the photon number.

use crate::fock::{annihilation, creation, DensityMatrix, FockSpace};
use crate::linalg::exp_m1;
use crate::superop::SuperopExpr;
use crate::{CMatrix, Error, Result, C64};

/// Below this `|γ₋ + iχk|·t` the `J₋` coefficient uses its Taylor branch.
const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrZeroTParams {
    pub chi: f64,
    pub gamma_minus: f64,
}

impl KerrZeroTParams {
    pub fn new(chi: f64, gamma_minus: f64) -> Result<Self> {
        if !(gamma_minus >= 0.0) || !chi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma_minus",
                reason: format!("decay rate must be nonnegative and finite, got {gamma_minus}"),
            });
        }
        Ok(Self { chi, gamma_minus })
    }

    /// `S`, elementwise with factor `−iχ[n(n−1) − m(m−1)]`.
    pub fn kerr_term(&self, space: FockSpace) -> SuperopExpr {
        kerr_term(space, self.chi)
    }

    /// `J₋ρ = 2γ₋ aρa†`.
    pub fn jump_down(&self, space: FockSpace) -> SuperopExpr {
        jump_down(space, self.gamma_minus)
    }

    /// `Lρ = −γ₋(a†aρ + ρa†a)`.
    pub fn loss(&self, space: FockSpace) -> SuperopExpr {
        number_loss(space, self.gamma_minus)
    }

    pub fn generator(&self, space: FockSpace) -> SuperopExpr {
        self.kerr_term(space) + self.jump_down(space) + self.loss(space)
    }
}

/// `n(n−1) − m(m−1)` written in terms of `k = n − m` and `s = n + m`.
pub fn kerr_phase(k: i64, s: i64) -> f64 {
    (k * (s - 1)) as f64
}

pub fn kerr_term(space: FockSpace, chi: f64) -> SuperopExpr {
    SuperopExpr::diagonal(space, move |k, s| C64::new(0.0, -chi * kerr_phase(k, s)))
}

pub fn jump_down(space: FockSpace, gamma_minus: f64) -> SuperopExpr {
    SuperopExpr::sandwich(
        C64::new(2.0 * gamma_minus, 0.0),
        &annihilation(space),
        &creation(space),
    )
}

/// `ρ ↦ −rate·(a†aρ + ρa†a)`.
pub fn number_loss(space: FockSpace, rate: f64) -> SuperopExpr {
    SuperopExpr::diagonal(space, move |_, s| C64::new(-rate * s as f64, 0.0))
}

/// `Rρ = a†aρ − ρa†a`.
pub fn number_difference(space: FockSpace) -> SuperopExpr {
    SuperopExpr::diagonal(space, |k, _| C64::new(k as f64, 0.0))
}

/// `result(n,m) = exp(f(n−m, n+m))·ρ(n,m)`.
pub fn exp_diag_apply(rho: &CMatrix, f: impl Fn(i64, i64) -> C64) -> CMatrix {
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        f(i as i64 - j as i64, (i + j) as i64).exp() * rho[(i, j)]
    })
}

/// `exp(g(R)·J₋)ρ` with `J₋ρ = 2γ₋ aρa†`.
///
/// `result(n,m) = Σ_j g(n−m)^j/j! · (2γ₋)^j · √((n+j)!/n!) · √((m+j)!/m!) · ρ(n+j, m+j)`,
/// summed until the shift leaves the space.
pub fn exp_fr_jminus_apply(rho: &CMatrix, gamma_minus: f64, g: impl Fn(i64) -> C64) -> CMatrix {
    let dim = rho.nrows();
    CMatrix::from_fn(dim, dim, |n, m| {
        let step = g(n as i64 - m as i64) * (2.0 * gamma_minus);
        let mut weight = C64::new(1.0, 0.0);
        let mut acc = rho[(n, m)];
        let mut j = 1;
        while n + j < dim && m + j < dim {
            weight *= step * (((n + j) * (m + j)) as f64).sqrt() / j as f64;
            acc += weight * rho[(n + j, m + j)];
            j += 1;
        }
        acc
    })
}

/// Coefficient of `J₋` in the zero-temperature propagator for `R = k`.
pub fn jminus_coefficient(params: &KerrZeroTParams, k: i64, t: f64) -> C64 {
    let z = C64::new(params.gamma_minus, params.chi * k as f64);
    if z.norm() * t < SERIES_THRESHOLD {
        t * (1.0 - t * z)
    } else {
        -exp_m1(-2.0 * t * z) / (2.0 * z)
    }
}

/// `ρ(t) = e^{St} e^{Lt} exp(g(R)J₋) ρ(0)`, factors applied right to left.
pub fn propagate_kerr_zero_t(rho0: &DensityMatrix, t: f64, params: &KerrZeroTParams) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let (chi, gm) = (params.chi, params.gamma_minus);
    let r = exp_fr_jminus_apply(rho0.entries(), gm, |k| jminus_coefficient(params, k, t));
    let r = exp_diag_apply(&r, |_, s| C64::new(-gm * t * s as f64, 0.0));
    let r = exp_diag_apply(&r, |k, s| C64::new(0.0, -chi * t * kerr_phase(k, s)));
    DensityMatrix::from_matrix(rho0.space(), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, DensityMatrix, FockOperator, StateVector};
    use crate::linalg::max_abs;
    use crate::superop::commutator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn basis(dim: usize, n: usize, m: usize) -> CMatrix {
        let mut r = CMatrix::zeros(dim, dim);
        r[(n, m)] = c(1.0, 0.0);
        r
    }

    #[test]
    fn kerr_term_matches_commutator_form() {
        let s = space(7);
        let a = FockOperator::annihilation(s);
        let ad = FockOperator::creation(s);
        let h = ad.mul(&ad).mul(&a).mul(&a);
        let literal = SuperopExpr::commutator_with(c(0.0, -0.8), &h);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(s, &mut rng).into_entries();
        let d = kerr_term(s, 0.8).apply(&rho).unwrap() - literal.apply(&rho).unwrap();
        assert!(max_abs(&d) < 1e-14);
    }

    #[test]
    fn kerr_term_on_fock_elements() {
        let p = KerrZeroTParams::new(1.3, 0.0).unwrap();
        let s = space(5);
        for n in 0..5 {
            let out = p.kerr_term(s).apply(&basis(5, n, n)).unwrap();
            assert_eq!(max_abs(&out), 0.0);
        }
        let out = p.kerr_term(s).apply(&basis(5, 2, 0)).unwrap();
        assert!((out[(2, 0)] - c(0.0, -1.3 * 2.0)).norm() < 1e-15);
    }

    #[test]
    fn jump_down_on_one_photon() {
        let p = KerrZeroTParams::new(1.0, 0.1).unwrap();
        let out = p.jump_down(space(4)).apply(&basis(4, 1, 1)).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.2, 0.0);
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn exp_diag_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::random(space(5), &mut rng).into_entries();
        assert_eq!(exp_diag_apply(&rho, |_, _| c(0.0, 0.0)), rho);

        let diag = CMatrix::from_diagonal(&rho.diagonal());
        let after = exp_diag_apply(&diag, |k, s| c(0.0, -1.7 * kerr_phase(k, s)));
        assert!(max_abs(&(after - &diag)) < 1e-15);

        let gm = 0.1;
        let out = exp_diag_apply(&basis(3, 1, 1), |_, s| c(-gm * s as f64, 0.0));
        assert!((out[(1, 1)].re - (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn exp_jminus_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(space(6), &mut rng).into_entries();
        assert_eq!(exp_fr_jminus_apply(&rho, 0.3, |_| c(0.0, 0.0)), rho);

        let gm = 0.25;
        let cst = c(0.7, -0.4);
        let out = exp_fr_jminus_apply(&basis(4, 1, 1), gm, |_| cst);
        let mut expected = basis(4, 1, 1);
        expected[(0, 0)] = cst * (2.0 * gm);
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn exp_jminus_matches_power_series_of_sandwich() {
        // brute force: Σ_j (cJ₋)^j/j! by repeated application
        let s = space(8);
        let gm = 0.3;
        let cst = c(0.4, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = DensityMatrix::random(s, &mut rng).into_entries();
        let jm = jump_down(s, gm);
        let mut term = rho.clone();
        let mut sum = rho.clone();
        for j in 1..20 {
            term = jm.apply(&term).unwrap() * (cst / j as f64);
            sum += &term;
        }
        assert!(max_abs(&(exp_fr_jminus_apply(&rho, gm, |_| cst) - sum)) < 1e-13);
    }

    #[test]
    fn coefficient_series_branch_is_continuous() {
        let p = KerrZeroTParams::new(1.0, 0.0).unwrap();
        assert_eq!(jminus_coefficient(&p, 0, 0.7), c(0.7, 0.0));
        let q = KerrZeroTParams::new(1.0, 1e-9).unwrap();
        let t = 0.5;
        let exact = {
            let z: f64 = 1e-9;
            -(-2.0 * t * z).exp_m1() / (2.0 * z)
        };
        assert!((jminus_coefficient(&q, 0, t) - exact).norm() < 1e-15);
        assert!((jminus_coefficient(&q, 0, t) - c(t, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn vacuum_is_stationary() {
        let p = KerrZeroTParams::new(1.0, 0.3).unwrap();
        let vac = DensityMatrix::vacuum(space(10));
        for t in [0.0, 0.5, 3.0, 40.0] {
            let out = propagate_kerr_zero_t(&vac, t, &p).unwrap();
            assert!(max_abs(&(out.entries() - vac.entries())) < 1e-15);
        }
    }

    #[test]
    fn lossless_limit_is_pure_kerr() {
        let p = KerrZeroTParams::new(0.9, 0.0).unwrap();
        let rho = DensityMatrix::from_ket(&coherent_state(space(15), c(1.2, 0.3)));
        let t = 0.77;
        let out = propagate_kerr_zero_t(&rho, t, &p).unwrap();
        let unitary = exp_diag_apply(rho.entries(), |k, s| c(0.0, -0.9 * t * kerr_phase(k, s)));
        assert_eq!(out.entries(), &unitary);
    }

    #[test]
    fn negative_time_rejected() {
        let p = KerrZeroTParams::new(1.0, 0.1).unwrap();
        let vac = DensityMatrix::vacuum(space(3));
        assert_eq!(propagate_kerr_zero_t(&vac, -1.0, &p), Err(Error::NegativeTime(-1.0)));
    }

    #[test]
    fn rejects_negative_decay() {
        assert!(KerrZeroTParams::new(1.0, -0.1).is_err());
    }

    #[test]
    fn commutation_relations_hold_below_edge() {
        let s = space(12);
        let p = KerrZeroTParams::new(0.7, 0.15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = DensityMatrix::random(s, &mut rng).into_entries();
        let block = crate::superop::SafeBlock::commutator_default(s);
        let jm = p.jump_down(s);

        let lhs = commutator(&p.loss(s), &jm, &rho).unwrap();
        let rhs = jm.apply(&rho).unwrap() * C64::new(2.0 * p.gamma_minus, 0.0);
        assert!(block.max_abs(&(lhs - rhs)) < 1e-12);

        let lhs = commutator(&p.kerr_term(s), &jm, &rho).unwrap();
        let rj = number_difference(s).apply(&jm.apply(&rho).unwrap()).unwrap();
        assert!(block.max_abs(&(lhs - rj * c(0.0, 2.0 * p.chi))) < 1e-12);

        let lhs = commutator(&number_difference(s), &jm, &rho).unwrap();
        assert!(block.max_abs(&lhs) < 1e-12);
    }

    #[test]
    fn one_photon_decay_closed_form() {
        // |1⟩⟨1| decays to vacuum with population e^{-2γt}; Kerr is inert here
        let p = KerrZeroTParams::new(2.0, 0.2).unwrap();
        let rho = DensityMatrix::from_ket(&StateVector::number(space(3), 1).unwrap());
        let t = 1.3;
        let out = propagate_kerr_zero_t(&rho, t, &p).unwrap();
        let p1 = (-2.0 * 0.2 * t).exp();
        assert!((out.entries()[(1, 1)].re - p1).abs() < 1e-15);
        assert!((out.entries()[(0, 0)].re - (1.0 - p1)).abs() < 1e-15);
    }
}
