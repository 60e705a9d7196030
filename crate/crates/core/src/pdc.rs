//! Degenerate parametric down conversion in the diffusive limit.
//!
//! The master equation is `ρ̇ = (Ŝ + Ĵ + K̂ + L̂)ρ` with
//!
//! * `Ŝρ = −i[εa†² + ε*a², ρ]`,
//! * `Ĵρ = 2γ aρa†`, `K̂ρ = 2γ a†ρa`,
//! * `L̂ρ = −γ(a†aρ + ρa†a)`.
//!
//! The squeeze-like transformation `ρ̃ = e^{α₋Ĵ₋} e^{α₊Ĵ₊} ρ` with
//! `Ĵ₊ρ = a†ρa†` and `Ĵ₋ρ = aρa` removes `Ŝ` and leaves
//! `λ(Ĵ + K̂) + L̂`, `λ = √(1 − |ε|²/γ²)`.
//!
//! The generator as written does not preserve the trace. The corrected mode
//! uses `Ŝ + Ĵ + K̂ + 2L̂ − 2γ`, whose transformed form is
//! `λ(Ĵ + K̂) + 2L̂ − 2γ`.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fock::{annihilation, creation, DensityMatrix, FockOperator, FockSpace};
use crate::kerr_zero_t::number_loss;
use crate::linalg::{self, max_abs};
use crate::superop::{build_liouvillian, LiouvillianMatrix, SafeBlock, SuperopExpr};
use crate::{CMatrix, Error, Result, C64};

/// A transformation pairing is accepted below this residual.
pub const PAIRING_TOL: f64 = 1e-8;
/// Smallest space on which pairings are compared.
pub const MIN_SELECTION_DIM: usize = 12;
const SELECTION_SAMPLES: usize = 4;
const SELECTION_SEED: u64 = 0x5eed;
/// `κ₁(X)` above which the similarity route is reported as unreliable.
pub const CONDITION_WARNING: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcParams {
    pub epsilon: C64,
    pub gamma: f64,
    pub corrected: bool,
}

impl PdcParams {
    pub fn new(epsilon: C64, gamma: f64, corrected: bool) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive and finite, got {gamma}"),
            });
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be finite".into(),
            });
        }
        if epsilon.norm() >= gamma {
            return Err(Error::AboveThreshold {
                epsilon: epsilon.norm(),
                gamma,
            });
        }
        Ok(Self {
            epsilon,
            gamma,
            corrected,
        })
    }

    pub fn lambda(&self) -> f64 {
        (1.0 - self.epsilon.norm_sqr() / (self.gamma * self.gamma)).sqrt()
    }

    /// `Ŝ + Ĵ + K̂ + L̂`, or `Ŝ + Ĵ + K̂ + 2L̂ − 2γ` in corrected mode.
    pub fn generator(&self, space: FockSpace) -> SuperopExpr {
        let base = s_hat(space, self.epsilon) + j_hat(space, self.gamma) + k_hat(space, self.gamma);
        if self.corrected {
            base + l_hat(space, self.gamma) * 2.0 + SuperopExpr::constant(space, C64::new(-2.0 * self.gamma, 0.0))
        } else {
            base + l_hat(space, self.gamma)
        }
    }

    /// The generator the transformation should produce.
    pub fn transformed_target(&self, space: FockSpace) -> SuperopExpr {
        let jk = (j_hat(space, self.gamma) + k_hat(space, self.gamma)) * self.lambda();
        if self.corrected {
            jk + l_hat(space, self.gamma) * 2.0 + SuperopExpr::constant(space, C64::new(-2.0 * self.gamma, 0.0))
        } else {
            jk + l_hat(space, self.gamma)
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn squares(space: FockSpace) -> (FockOperator, FockOperator) {
    let a = annihilation(space);
    let ad = creation(space);
    (a.mul(&a), ad.mul(&ad))
}

/// `Ŝρ = −i[εa†² + ε*a², ρ]`.
pub fn s_hat(space: FockSpace, epsilon: C64) -> SuperopExpr {
    let (a2, ad2) = squares(space);
    SuperopExpr::left_mul(c(0.0, -1.0) * epsilon, &ad2)
        + SuperopExpr::left_mul(c(0.0, -1.0) * epsilon.conj(), &a2)
        + SuperopExpr::right_mul(c(0.0, 1.0) * epsilon, &ad2)
        + SuperopExpr::right_mul(c(0.0, 1.0) * epsilon.conj(), &a2)
}

/// `Ĵρ = 2γ aρa†`.
pub fn j_hat(space: FockSpace, gamma: f64) -> SuperopExpr {
    SuperopExpr::sandwich(c(2.0 * gamma, 0.0), &annihilation(space), &creation(space))
}

/// `K̂ρ = 2γ a†ρa`.
pub fn k_hat(space: FockSpace, gamma: f64) -> SuperopExpr {
    SuperopExpr::sandwich(c(2.0 * gamma, 0.0), &creation(space), &annihilation(space))
}

/// `L̂ρ = −γ(a†aρ + ρa†a)`.
pub fn l_hat(space: FockSpace, gamma: f64) -> SuperopExpr {
    number_loss(space, gamma)
}

/// `Ĵ₊ρ = a†ρa†`.
pub fn j_plus_tilde(space: FockSpace) -> SuperopExpr {
    let ad = creation(space);
    SuperopExpr::sandwich(c(1.0, 0.0), &ad, &ad)
}

/// `Ĵ₋ρ = aρa`.
pub fn j_minus_tilde(space: FockSpace) -> SuperopExpr {
    let a = annihilation(space);
    SuperopExpr::sandwich(c(1.0, 0.0), &a, &a)
}

/// `X̂₋ρ = iε ρa†²`.
pub fn x_minus(space: FockSpace, epsilon: C64) -> SuperopExpr {
    SuperopExpr::right_mul(c(0.0, 1.0) * epsilon, &squares(space).1)
}

/// `X̂₊ρ = −iε* a²ρ`.
pub fn x_plus(space: FockSpace, epsilon: C64) -> SuperopExpr {
    SuperopExpr::left_mul(c(0.0, -1.0) * epsilon.conj(), &squares(space).0)
}

/// `Ŷ₋ρ = −iε a†²ρ`.
pub fn y_minus(space: FockSpace, epsilon: C64) -> SuperopExpr {
    SuperopExpr::left_mul(c(0.0, -1.0) * epsilon, &squares(space).1)
}

/// `Ŷ₊ρ = iε* ρa²`.
pub fn y_plus(space: FockSpace, epsilon: C64) -> SuperopExpr {
    SuperopExpr::right_mul(c(0.0, 1.0) * epsilon.conj(), &squares(space).0)
}

/// `N̂ = Ĵ₊ + Ĵ₋`.
pub fn n_hat(space: FockSpace) -> SuperopExpr {
    j_plus_tilde(space) + j_minus_tilde(space)
}

/// `M̂ = iX̂₋/ε − iX̂₊/ε*`, i.e. `M̂ρ = −(a²ρ + ρa†²)`.
pub fn m_hat(space: FockSpace) -> SuperopExpr {
    let (a2, ad2) = squares(space);
    SuperopExpr::left_mul(c(-1.0, 0.0), &a2) + SuperopExpr::right_mul(c(-1.0, 0.0), &ad2)
}

/// `Q̂ = iŶ₋/ε − iŶ₊/ε*`, i.e. `Q̂ρ = a†²ρ + ρa²`.
pub fn q_hat(space: FockSpace) -> SuperopExpr {
    let (a2, ad2) = squares(space);
    SuperopExpr::left_mul(c(1.0, 0.0), &ad2) + SuperopExpr::right_mul(c(1.0, 0.0), &a2)
}

/// `Ĵ′ = 2Ĵ/γ`, i.e. `Ĵ′ρ = 4aρa†`.
pub fn j_prime(space: FockSpace) -> SuperopExpr {
    j_hat(space, 2.0)
}

/// `K̂′ = 2K̂/γ`, i.e. `K̂′ρ = 4a†ρa`.
pub fn k_prime(space: FockSpace) -> SuperopExpr {
    k_hat(space, 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Ĵ₊ρ = a†ρa†`.
    Raise,
    /// `Ĵ₋ρ = aρa`.
    Lower,
}

/// `exp(c·Ĵ±)ρ`, summed term by term on the truncated space.
///
/// Raise: `result(n,m) = Σ_j c^j/j! · √(n!/(n−j)!) · √((m+j)!/m!) · ρ(n−j, m+j)`.
/// Lower: `result(n,m) = Σ_j c^j/j! · √((n+j)!/n!) · √(m!/(m−j)!) · ρ(n+j, m−j)`.
pub fn exp_jtilde_apply(coeff: C64, direction: Direction, rho: &CMatrix) -> CMatrix {
    let dim = rho.nrows();
    CMatrix::from_fn(dim, dim, |n, m| {
        let (down, up) = match direction {
            Direction::Raise => (n, m),
            Direction::Lower => (m, n),
        };
        // `down` loses j, `up` gains j
        let mut weight = C64::new(1.0, 0.0);
        let mut acc = rho[(n, m)];
        let mut j = 1;
        while j <= down && up + j < dim {
            weight *= coeff * (((down - j + 1) * (up + j)) as f64).sqrt() / j as f64;
            acc += weight
                * match direction {
                    Direction::Raise => rho[(n - j, m + j)],
                    Direction::Lower => rho[(n + j, m - j)],
                };
            j += 1;
        }
        acc
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcTransform {
    pub alpha_plus: C64,
    pub alpha_minus: C64,
    pub lambda: f64,
}

impl PdcTransform {
    /// The same `α₊` with the sign of `α₋` reversed.
    pub fn flipped(&self) -> Self {
        Self {
            alpha_minus: -self.alpha_minus,
            ..*self
        }
    }

    /// The two sign pairings for `α₋`, the physically paired one first.
    pub fn candidates(params: &PdcParams) -> [Self; 2] {
        let eps = params.epsilon;
        let g = params.gamma;
        let root = (g * g - eps.norm_sqr()).sqrt();
        // (−γ + √(γ²−|ε|²))/(iε*) rewritten to stay finite as ε → 0
        let alpha_plus = c(0.0, 1.0) * eps / (g + root);
        let alpha_minus = c(0.0, -1.0) * eps.conj() / (2.0 * root);
        let first = Self {
            alpha_plus,
            alpha_minus,
            lambda: params.lambda(),
        };
        [first, first.flipped()]
    }

    /// `X = e^{α₋Ĵ₋} e^{α₊Ĵ₊}` and its inverse as Liouvillians.
    pub fn similarity(&self, space: FockSpace) -> (LiouvillianMatrix, LiouvillianMatrix) {
        let jp = build_liouvillian(&j_plus_tilde(space));
        let jm = build_liouvillian(&j_minus_tilde(space));
        let x = jm.scaled(self.alpha_minus).exp().compose(&jp.scaled(self.alpha_plus).exp());
        let x_inv = jp.scaled(-self.alpha_plus).exp().compose(&jm.scaled(-self.alpha_minus).exp());
        (x, x_inv)
    }

    /// `G̃ = X·G·X⁻¹`.
    pub fn conjugated_generator(&self, params: &PdcParams, space: FockSpace) -> LiouvillianMatrix {
        let (x, x_inv) = self.similarity(space);
        x.compose(&build_liouvillian(&params.generator(space))).compose(&x_inv)
    }
}

/// Block on which the transformed generator is compared: `n + m ≤ N − 3`.
///
/// `Ĵ₊` and `Ĵ₋` move along anti-diagonals, so the truncation edge reaches the
/// transformed generator through elements with large `n + m`.
pub fn transform_block(space: FockSpace) -> SafeBlock {
    SafeBlock::AntiDiagonal {
        max_sum: space.dim().saturating_sub(3),
    }
}

/// `max |(G̃ − target)ρ|` over `samples` seeded random densities, on
/// [`transform_block`].
pub fn transformed_generator_residual(
    params: &PdcParams,
    xform: &PdcTransform,
    space: FockSpace,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if space.dim() < MIN_SELECTION_DIM {
        return Err(Error::DimensionTooSmall(space.dim()));
    }
    let g_tilde = xform.conjugated_generator(params, space);
    Ok(residual_against_target(params, &g_tilde, space, samples, seed))
}

fn residual_against_target(
    params: &PdcParams,
    g_tilde: &LiouvillianMatrix,
    space: FockSpace,
    samples: usize,
    seed: u64,
) -> f64 {
    let target = build_liouvillian(&params.transformed_target(space));
    let diff = g_tilde - &target;
    let block = transform_block(space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let rho = DensityMatrix::random(space, &mut rng);
            block.max_abs(&diff.apply(rho.entries()).expect("same space"))
        })
        .fold(0.0, f64::max)
}

/// Picks the `α₋` sign whose transformed generator matches the target.
pub fn transform_params(params: &PdcParams) -> Result<PdcTransform> {
    select_transform(params, FockSpace::new(16)?)
}

fn select_transform(params: &PdcParams, space: FockSpace) -> Result<PdcTransform> {
    select_with_generators(params, space).map(|(x, _)| x)
}

fn select_with_generators(params: &PdcParams, space: FockSpace) -> Result<(PdcTransform, LiouvillianMatrix)> {
    if params.epsilon == c(0.0, 0.0) {
        let id = PdcTransform {
            alpha_plus: c(0.0, 0.0),
            alpha_minus: c(0.0, 0.0),
            lambda: 1.0,
        };
        return Ok((id, build_liouvillian(&params.generator(space))));
    }
    let mut best = f64::INFINITY;
    for xform in PdcTransform::candidates(params) {
        let g_tilde = xform.conjugated_generator(params, space);
        let r = residual_against_target(params, &g_tilde, space, SELECTION_SAMPLES, SELECTION_SEED);
        if r < PAIRING_TOL {
            return Ok((xform, g_tilde));
        }
        best = best.min(r);
    }
    Err(Error::NoValidPairing { best_residual: best })
}

/// How `ρ̃` is evolved between the two halves of the similarity transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformedEvolution {
    /// `expm(G̃t)` with `G̃ = X·G·X⁻¹` built on the truncated space.
    #[default]
    Conjugated,
    /// `expm` of the closed-form target `λ(Ĵ+K̂) + …`, which differs from `G̃`
    /// near the truncation edge.
    ClosedForm,
}

/// Propagator for one space and parameter set, reusable across times.
#[derive(Debug, Clone)]
pub struct PdcPropagator {
    params: PdcParams,
    transform: PdcTransform,
    x: LiouvillianMatrix,
    x_inv: LiouvillianMatrix,
    g_tilde: LiouvillianMatrix,
}

impl PdcPropagator {
    pub fn new(space: FockSpace, params: PdcParams, evolution: TransformedEvolution) -> Result<Self> {
        let (transform, conjugated) = if space.dim() >= MIN_SELECTION_DIM {
            select_with_generators(&params, space)?
        } else {
            let t = select_transform(&params, FockSpace::new(MIN_SELECTION_DIM)?)?;
            (t, t.conjugated_generator(&params, space))
        };
        Self::with_transform(space, params, transform, evolution, Some(conjugated))
    }

    /// Uses `transform` as given, without checking it.
    pub fn with_unchecked_transform(
        space: FockSpace,
        params: PdcParams,
        transform: PdcTransform,
        evolution: TransformedEvolution,
    ) -> Result<Self> {
        Self::with_transform(space, params, transform, evolution, None)
    }

    fn with_transform(
        space: FockSpace,
        params: PdcParams,
        transform: PdcTransform,
        evolution: TransformedEvolution,
        conjugated: Option<LiouvillianMatrix>,
    ) -> Result<Self> {
        let (x, x_inv) = transform.similarity(space);
        let kappa = linalg::norm1(x.entries()) * linalg::norm1(x_inv.entries());
        if kappa > CONDITION_WARNING {
            warn!(
                "similarity transform has condition number {kappa:.1e} at N={}, |epsilon|/gamma={:.3}; \
                 expect a relative error near {:.0e}",
                space.dim(),
                params.epsilon.norm() / params.gamma,
                kappa * f64::EPSILON
            );
        }
        let g_tilde = match evolution {
            TransformedEvolution::Conjugated => {
                conjugated.unwrap_or_else(|| x.compose(&build_liouvillian(&params.generator(space))).compose(&x_inv))
            }
            TransformedEvolution::ClosedForm => build_liouvillian(&params.transformed_target(space)),
        };
        Ok(Self {
            params,
            transform,
            x,
            x_inv,
            g_tilde,
        })
    }

    pub fn transform(&self) -> &PdcTransform {
        &self.transform
    }

    pub fn params(&self) -> &PdcParams {
        &self.params
    }

    pub fn transformed_generator(&self) -> &LiouvillianMatrix {
        &self.g_tilde
    }

    /// `‖X‖₁‖X⁻¹‖₁`. It grows quickly with `|ε|/γ` and `N`, and the
    /// propagator loses roughly that factor of accuracy relative to `expm`.
    pub fn condition_number(&self) -> f64 {
        linalg::norm1(self.x.entries()) * linalg::norm1(self.x_inv.entries())
    }

    /// `X` and `X⁻¹`.
    pub fn similarity(&self) -> (&LiouvillianMatrix, &LiouvillianMatrix) {
        (&self.x, &self.x_inv)
    }

    /// `X⁻¹ · expm(G̃t) · X · ρ0`.
    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let space = self.x.space();
        space.check_matrix(rho0.entries())?;
        let evolve = linalg::expm(&(self.g_tilde.entries() * c(t, 0.0)));
        let v = self.x.entries() * self.x.vectorize(rho0.entries());
        let v = self.x_inv.entries() * (evolve * v);
        DensityMatrix::from_matrix(space, self.x.unvectorize(&v))
    }

    /// `max |expm(G̃t) − X·expm(Gt)·X⁻¹|`.
    pub fn similarity_residual(&self, t: f64) -> f64 {
        let space = self.x.space();
        let g = build_liouvillian(&self.params.generator(space));
        let lhs = linalg::expm(&(self.g_tilde.entries() * c(t, 0.0)));
        let direct = linalg::expm(&(g.entries() * c(t, 0.0)));
        let rhs = linalg::matmul(&linalg::matmul(self.x.entries(), &direct), self.x_inv.entries());
        max_abs(&(lhs - rhs))
    }
}

pub fn propagate_pdc(rho0: &DensityMatrix, t: f64, params: &PdcParams) -> Result<DensityMatrix> {
    PdcPropagator::new(rho0.space(), *params, TransformedEvolution::Conjugated)?.propagate(rho0, t)
}
