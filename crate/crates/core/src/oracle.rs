//! Brute-force evolution on the vectorized Liouvillian: fixed-step RK4 and the
//! dense matrix exponential. Ground truth for the factorized propagators.

use log::warn;

use crate::fock::DensityMatrix;
use crate::superop::LiouvillianMatrix;
use crate::{linalg, CVector, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    pub steps: usize,
    /// Also integrate with half the steps and report `|Δ|/15`.
    pub richardson: bool,
}

impl IntegratorConfig {
    pub fn new(steps: usize, richardson: bool) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "at least one step is required".into(),
            });
        }
        Ok(Self { steps, richardson })
    }

    /// Step count for a global error of roughly `tol`, using the row-sum
    /// norm of `L` as a bound on its spectral radius: the classical RK4 error
    /// on `y' = λy` over `[0, t]` is about `t·|λ|⁵h⁴/120`.
    pub fn for_accuracy(l: &LiouvillianMatrix, t: f64, tol: f64) -> Self {
        let rho = row_sum_norm(l);
        if rho == 0.0 || t == 0.0 {
            return Self { steps: 1, richardson: false };
        }
        let h = (120.0 * tol / (t * rho.powi(5))).powf(0.25);
        let steps = (t / h).ceil().max(rho * t / 0.1).ceil() as usize;
        Self {
            steps: steps.max(1),
            richardson: false,
        }
    }

    /// Step count for a per-step truncation error of roughly `tol`, the
    /// `(hρ)⁵/120` term of the same bound. Much cheaper than
    /// [`IntegratorConfig::for_accuracy`] when `ρ` is large.
    pub fn for_local_error(l: &LiouvillianMatrix, t: f64, tol: f64) -> Self {
        let rho = row_sum_norm(l);
        if rho == 0.0 || t == 0.0 {
            return Self { steps: 1, richardson: false };
        }
        let h = (120.0 * tol).powf(0.2) / rho;
        Self {
            steps: ((t / h).ceil() as usize).max(1),
            richardson: false,
        }
    }
}

fn row_sum_norm(l: &LiouvillianMatrix) -> f64 {
    l.entries()
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Nonzero pattern of a Liouvillian, row by row.
struct SparseRows {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn new(l: &LiouvillianMatrix) -> Self {
        let e = l.entries();
        let rows = (0..e.nrows())
            .map(|i| {
                (0..e.ncols())
                    .filter_map(|j| {
                        let v = e[(i, j)];
                        (v != C64::new(0.0, 0.0)).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn mul(&self, x: &CVector) -> CVector {
        CVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|r| r.iter().fold(C64::new(0.0, 0.0), |acc, &(j, v)| acc + v * x[j])),
        )
    }
}

fn rk4(l: &SparseRows, mut y: CVector, t: f64, steps: usize) -> CVector {
    let h = t / steps as f64;
    for _ in 0..steps {
        let k1 = l.mul(&y);
        let k2 = l.mul(&(&y + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = l.mul(&(&y + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = l.mul(&(&y + &k3 * C64::new(h, 0.0)));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    y
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rk4Result {
    pub state: DensityMatrix,
    /// `max|ρ_steps − ρ_{steps/2}|/15` when Richardson comparison is enabled.
    pub error_estimate: Option<f64>,
}

/// Classical fourth-order Runge–Kutta on `vec(ρ)`.
pub fn rk4_evolve(
    l: &LiouvillianMatrix,
    rho0: &DensityMatrix,
    t: f64,
    config: IntegratorConfig,
) -> Result<Rk4Result> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    check_space(l, rho0)?;
    let step_ratio = linalg::max_abs(l.entries()) * t / config.steps as f64;
    if step_ratio > 0.1 {
        warn!("rk4: max|L|·t/steps = {step_ratio:.3} exceeds 0.1; increase the step count");
    }
    let sparse = SparseRows::new(l);
    let y0 = l.vectorize(rho0.entries());
    let y = rk4(&sparse, y0.clone(), t, config.steps);
    let error_estimate = if config.richardson {
        let coarse = rk4(&sparse, y0, t, (config.steps / 2).max(1));
        Some(
            (&y - coarse)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
                / 15.0,
        )
    } else {
        None
    };
    Ok(Rk4Result {
        state: DensityMatrix::from_matrix(rho0.space(), l.unvectorize(&y))?,
        error_estimate,
    })
}

/// `expm(L·t)·vec(ρ0)`.
pub fn expm_evolve(l: &LiouvillianMatrix, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    check_space(l, rho0)?;
    let prop = linalg::expm(&(l.entries() * C64::new(t, 0.0)));
    let y = prop * l.vectorize(rho0.entries());
    DensityMatrix::from_matrix(rho0.space(), l.unvectorize(&y))
}

fn check_space(l: &LiouvillianMatrix, rho0: &DensityMatrix) -> Result<()> {
    if l.space() != rho0.space() {
        return Err(Error::DimensionMismatch {
            expected: l.space().dim(),
            found: rho0.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use crate::linalg::max_abs;
    use crate::superop::{build_liouvillian, SuperopExpr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_generator_leaves_state_alone() {
        let s = FockSpace::new(4).unwrap();
        let l = LiouvillianMatrix::zero(s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(s, &mut rng);
        let out = rk4_evolve(&l, &rho, 2.0, IntegratorConfig::new(10, true).unwrap()).unwrap();
        assert_eq!(out.state, rho);
        assert_eq!(out.error_estimate, Some(0.0));
    }

    #[test]
    fn expm_at_zero_time_is_identity() {
        let s = FockSpace::new(4).unwrap();
        let l = build_liouvillian(&SuperopExpr::diagonal(s, |k, s| C64::new(-0.3 * s as f64, k as f64)));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::random(s, &mut rng);
        let out = expm_evolve(&l, &rho, 0.0).unwrap();
        assert!(max_abs(&(out.entries() - rho.entries())) < 1e-15);
    }

    #[test]
    fn diagonal_generator_is_elementwise_exponential() {
        let s = FockSpace::new(5).unwrap();
        let f = |k: i64, s: i64| C64::new(-0.2 * s as f64, 0.7 * k as f64);
        let l = build_liouvillian(&SuperopExpr::diagonal(s, f));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(s, &mut rng);
        let t = 1.7;
        let out = expm_evolve(&l, &rho, t).unwrap();
        let expected = crate::kerr_zero_t::exp_diag_apply(rho.entries(), |k, s| f(k, s) * t);
        assert!(max_abs(&(out.entries() - expected)) < 1e-14);
    }

    #[test]
    fn rejects_zero_steps_and_negative_time() {
        assert!(IntegratorConfig::new(0, false).is_err());
        let s = FockSpace::new(3).unwrap();
        let l = LiouvillianMatrix::zero(s);
        let rho = DensityMatrix::vacuum(s);
        assert_eq!(
            expm_evolve(&l, &rho, -0.1),
            Err(Error::NegativeTime(-0.1))
        );
    }
}
