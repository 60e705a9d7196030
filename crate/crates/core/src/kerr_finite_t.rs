//! Kerr cavity coupled to a finite-temperature bath.
//!
//! The generator is `S + J₋ + J₊ + 𝓛 + C_γ` with `J₊ρ = 2γ₊ a†ρa`,
//! `𝓛ρ = −γ₀(a†aρ + ρa†a)` and a constant `C_γ`. Its propagator is the
//! ordered product
//!
//! ```text
//! e^{C_γ t} e^{St} e^{β e^{2iχRt} J₊} e^{F(R)t} e^{δ J₋ e^{−2iχRt}} e^{α(R)t𝓛} e^{−δJ₋} e^{−βJ₊}
//! ```
//!
//! where `β, α, F, δ` are functions of `R` and therefore scalars on each
//! diagonal `k = n − m` of the density matrix.
//!
//! The rightmost factor raises the photon number, so its output leaks past
//! the truncation edge and the next `J₋` factor reads that leak back. Both are
//! evaluated on a larger guard space that is grown until the `N×N` block stops
//! changing. The default [`Evaluation::Merged`] form also folds the three
//! middle factors into `e^{α(R)t𝓛} e^{D(R)J₋}` with
//! `D = (1 − e^{−2(γ₀α+iχR)t}) / (2(γ₀α+iχR))`, which avoids the cancellation
//! between `e^{δJ₋…}` and `e^{−δJ₋}` on large Fock components.

use log::warn;

use crate::fock::{annihilation, creation, DensityMatrix, FockSpace};
use crate::kerr_zero_t::{
    self, exp_diag_apply, exp_fr_jminus_apply, kerr_phase, kerr_term, number_loss, KerrZeroTParams,
};
use crate::linalg::{exp_m1, max_abs};
use crate::superop::{build_liouvillian, LiouvillianMatrix, SuperopExpr};
use crate::{CMatrix, Error, Result, C64};

const DEGENERATE_TOL: f64 = 1e-12;
const DEGENERATE_SHIFT: f64 = 1e-10;
const GUARD_TOL: f64 = 1e-14;
const MAX_GUARD_FACTOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrFiniteTParams {
    pub chi: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma0: f64,
    pub c_gamma: f64,
}

impl KerrFiniteTParams {
    /// Trace-preserving parameters: `γ₀ = γ₋ + γ₊`, `C_γ = −2γ₊`.
    pub fn new(chi: f64, gamma_minus: f64, gamma_plus: f64) -> Result<Self> {
        Self::with_overrides(chi, gamma_minus, gamma_plus, gamma_minus + gamma_plus, -2.0 * gamma_plus)
    }

    pub fn with_overrides(chi: f64, gamma_minus: f64, gamma_plus: f64, gamma0: f64, c_gamma: f64) -> Result<Self> {
        for (name, v) in [("gamma_minus", gamma_minus), ("gamma_plus", gamma_plus)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("rate must be nonnegative and finite, got {v}"),
                });
            }
        }
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma0",
                reason: format!("must be positive and finite, got {gamma0}"),
            });
        }
        if !chi.is_finite() || !c_gamma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "chi",
                reason: "chi and c_gamma must be finite".into(),
            });
        }
        let p = Self {
            chi,
            gamma_minus,
            gamma_plus,
            gamma0,
            c_gamma,
        };
        if gamma_minus < gamma_plus {
            warn!("gamma_minus < gamma_plus: there is no stationary state");
        }
        if !p.is_trace_preserving() {
            warn!(
                "gamma0 = {gamma0}, c_gamma = {c_gamma} differ from gamma_minus + gamma_plus and -2 gamma_plus; \
                 the generator does not preserve the trace"
            );
        }
        Ok(p)
    }

    pub fn is_trace_preserving(&self) -> bool {
        (self.gamma0 - (self.gamma_minus + self.gamma_plus)).abs() <= 1e-15 * self.gamma0
            && (self.c_gamma + 2.0 * self.gamma_plus).abs() <= 1e-15 * self.gamma0
    }

    /// Mean occupation of the stationary thermal state, `γ₊/(γ₋ − γ₊)`.
    pub fn stationary_nbar(&self) -> Option<f64> {
        (self.gamma_minus > self.gamma_plus).then(|| self.gamma_plus / (self.gamma_minus - self.gamma_plus))
    }

    pub fn generator(&self, space: FockSpace) -> SuperopExpr {
        kerr_term(space, self.chi)
            + kerr_zero_t::jump_down(space, self.gamma_minus)
            + jump_up(space, self.gamma_plus)
            + number_loss(space, self.gamma0)
            + SuperopExpr::constant(space, C64::new(self.c_gamma, 0.0))
    }
}

/// `J₊ρ = 2γ₊ a†ρa`.
pub fn jump_up(space: FockSpace, gamma_plus: f64) -> SuperopExpr {
    SuperopExpr::sandwich(
        C64::new(2.0 * gamma_plus, 0.0),
        &creation(space),
        &annihilation(space),
    )
}

/// Root of `4γ₋γ₊β² − 2(γ₀+iχk)β + 1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Stays finite as `γ₊ → 0`; the physical choice.
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RFunctions {
    pub beta: C64,
    pub alpha: C64,
    pub big_f: C64,
    pub delta: C64,
    /// The discriminant vanished and `γ₀ + iχk` was nudged to split the roots.
    pub degenerate: bool,
}

impl RFunctions {
    /// `|4γ₋γ₊β² − 2(γ₀+iχk)β + 1|` relative to its largest term.
    pub fn quadratic_residual(&self, params: &KerrFiniteTParams, k: i64) -> f64 {
        let z = C64::new(params.gamma0, params.chi * k as f64);
        let c = 4.0 * params.gamma_minus * params.gamma_plus;
        let terms = [c * self.beta * self.beta, -2.0 * z * self.beta, C64::new(1.0, 0.0)];
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        (terms[0] + terms[1] + terms[2]).norm() / scale
    }
}

pub fn r_functions(params: &KerrFiniteTParams, k: i64) -> RFunctions {
    r_functions_with(params, k, Branch::Minus)
}

pub fn r_functions_with(params: &KerrFiniteTParams, k: i64, branch: Branch) -> RFunctions {
    let (g0, gm, gp) = (params.gamma0, params.gamma_minus, params.gamma_plus);
    let c = 4.0 * gm * gp;
    let mut z = C64::new(g0, params.chi * k as f64);
    let mut disc = z * z - c;
    let degenerate = disc.norm() < DEGENERATE_TOL;
    if degenerate {
        warn!("degenerate discriminant at k = {k}; splitting the roots");
        z *= 1.0 + DEGENERATE_SHIFT;
        disc = z * z - c;
    }
    let root = disc.sqrt();
    // (z − √)(z + √) = c, so the minus root is 1/(z + √) without cancellation
    let beta = match branch {
        Branch::Minus => 1.0 / (z + root),
        Branch::Plus => (z + root) / c,
    };
    let alpha = 1.0 - beta * (c / g0);
    RFunctions {
        beta,
        alpha,
        big_f: beta * c,
        delta: -1.0 / (2.0 * (g0 * alpha + C64::new(0.0, params.chi * k as f64))),
        degenerate,
    }
}

/// `exp(g(R)·J₊)ρ` with `J₊ρ = 2γ₊ a†ρa`.
///
/// `result(n,m) = Σ_j g(n−m)^j/j! · (2γ₊)^j · √(n!/(n−j)!) · √(m!/(m−j)!) · ρ(n−j, m−j)`.
pub fn exp_gr_jplus_apply(rho: &CMatrix, gamma_plus: f64, g: impl Fn(i64) -> C64) -> CMatrix {
    let dim = rho.nrows();
    CMatrix::from_fn(dim, dim, |n, m| {
        let step = g(n as i64 - m as i64) * (2.0 * gamma_plus);
        let mut weight = C64::new(1.0, 0.0);
        let mut acc = rho[(n, m)];
        for j in 1..=n.min(m) {
            weight *= step * (((n - j + 1) * (m - j + 1)) as f64).sqrt() / j as f64;
            acc += weight * rho[(n - j, m - j)];
        }
        acc
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// `e^{δJ₋e^{−2iχRt}} e^{α t𝓛} e^{−δJ₋}` replaced by `e^{α t𝓛} e^{D J₋}`.
    Merged,
    /// All eight factors applied one by one.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    /// Double the extra dimensions until the `N×N` block changes by less than 1e-14.
    Adaptive,
    /// Exactly this many extra Fock levels (0 evaluates on the bare space).
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteTOptions {
    pub evaluation: Evaluation,
    pub branch: Branch,
    pub guard: Guard,
}

impl Default for FiniteTOptions {
    fn default() -> Self {
        Self {
            evaluation: Evaluation::Merged,
            branch: Branch::Minus,
            guard: Guard::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTOutcome {
    pub state: DensityMatrix,
    /// Extra Fock levels used by the raising/lowering pair.
    pub guard_levels: usize,
    /// Ratio of successive Fock tail terms of the raising/lowering pair at
    /// `k = 0`; the guard space converges only while this is below 1.
    pub convergence_ratio: f64,
    pub degenerate_roots: bool,
}

/// `ρ̃(t)` from `ρ̃(0)` with default options.
pub fn propagate_kerr_finite_t(rho0: &DensityMatrix, t: f64, params: &KerrFiniteTParams) -> Result<DensityMatrix> {
    propagate_kerr_finite_t_with(rho0, t, params, FiniteTOptions::default()).map(|o| o.state)
}

pub fn propagate_kerr_finite_t_with(
    rho0: &DensityMatrix,
    t: f64,
    params: &KerrFiniteTParams,
    options: FiniteTOptions,
) -> Result<FiniteTOutcome> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if params.gamma_plus == 0.0 && params.is_trace_preserving() {
        let zero_t = KerrZeroTParams::new(params.chi, params.gamma_minus)?;
        return Ok(FiniteTOutcome {
            state: kerr_zero_t::propagate_kerr_zero_t(rho0, t, &zero_t)?,
            guard_levels: 0,
            convergence_ratio: 0.0,
            degenerate_roots: false,
        });
    }

    let n = rho0.dim();
    let max_k = n as i64;
    let table: Vec<RFunctions> = (-max_k..=max_k).map(|k| r_functions_with(params, k, options.branch)).collect();
    let rf = |k: i64| table[(k + max_k) as usize];
    let degenerate_roots = table.iter().any(|r| r.degenerate);

    let convergence_ratio = {
        let r0 = rf(0);
        let lower = match options.evaluation {
            Evaluation::Merged => merged_coefficient(params, &r0, 0, t).norm(),
            Evaluation::Literal => r0.delta.norm(),
        };
        2.0 * params.gamma_minus * lower * 2.0 * params.gamma_plus * r0.beta.norm()
    };
    if convergence_ratio >= 1.0 {
        warn!("raising/lowering pair does not converge (ratio {convergence_ratio:.3}); expect truncation error");
    }

    let (core, guard_levels) = match options.guard {
        Guard::Fixed(p) => (inner_product(rho0.entries(), t, params, &rf, options.evaluation, p), p),
        Guard::Adaptive => {
            let mut p = n.max(8);
            let mut prev = inner_product(rho0.entries(), t, params, &rf, options.evaluation, p);
            loop {
                let next = inner_product(rho0.entries(), t, params, &rf, options.evaluation, 2 * p);
                let change = max_abs(&(&next - &prev));
                p *= 2;
                prev = next;
                if change < GUARD_TOL {
                    break;
                }
                if p >= MAX_GUARD_FACTOR * n {
                    warn!("guard space did not settle: last change {change:.3e} with {p} extra levels");
                    break;
                }
            }
            (prev, p)
        }
    };

    let (chi, c_gamma, gp) = (params.chi, params.c_gamma, params.gamma_plus);
    let r = exp_diag_apply(&core, |k, _| rf(k).big_f * t);
    let r = exp_gr_jplus_apply(&r, gp, |k| rf(k).beta * C64::new(0.0, 2.0 * chi * k as f64 * t).exp());
    let r = exp_diag_apply(&r, |k, s| C64::new(c_gamma * t, -chi * t * kerr_phase(k, s)));
    Ok(FiniteTOutcome {
        state: DensityMatrix::from_matrix(rho0.space(), r)?,
        guard_levels,
        convergence_ratio,
        degenerate_roots,
    })
}

/// `D(k)` of the merged form, with a Taylor branch for tiny `|γ₀α + iχk|·t`.
fn merged_coefficient(params: &KerrFiniteTParams, rf: &RFunctions, k: i64, t: f64) -> C64 {
    let z = params.gamma0 * rf.alpha + C64::new(0.0, params.chi * k as f64);
    if z.norm() * t < 1e-6 {
        t * (1.0 - t * z)
    } else {
        -exp_m1(-2.0 * t * z) / (2.0 * z)
    }
}

/// The factors from `e^{−βJ₊}` through `e^{δJ₋e^{−2iχRt}}` on a space with
/// `guard` extra levels, cropped back to `N×N`.
fn inner_product(
    rho0: &CMatrix,
    t: f64,
    params: &KerrFiniteTParams,
    rf: &impl Fn(i64) -> RFunctions,
    evaluation: Evaluation,
    guard: usize,
) -> CMatrix {
    let n = rho0.nrows();
    let big = n + guard;
    let mut padded = CMatrix::zeros(big, big);
    padded.view_mut((0, 0), (n, n)).copy_from(rho0);
    let (gm, gp, g0, chi) = (params.gamma_minus, params.gamma_plus, params.gamma0, params.chi);
    // the k-tables only cover |k| ≤ N; off-band guard elements never reach the N×N block
    let clamp = |k: i64| k.clamp(-(n as i64), n as i64);

    let r = exp_gr_jplus_apply(&padded, gp, |k| -rf(clamp(k)).beta);
    let r = match evaluation {
        Evaluation::Merged => {
            let r = exp_fr_jminus_apply(&r, gm, |k| merged_coefficient(params, &rf(clamp(k)), clamp(k), t));
            exp_diag_apply(&r, |k, s| -rf(clamp(k)).alpha * (g0 * s as f64 * t))
        }
        Evaluation::Literal => {
            let r = exp_fr_jminus_apply(&r, gm, |k| -rf(clamp(k)).delta);
            let r = exp_diag_apply(&r, |k, s| -rf(clamp(k)).alpha * (g0 * s as f64 * t));
            exp_fr_jminus_apply(&r, gm, |k| {
                let k = clamp(k);
                rf(k).delta * C64::new(0.0, -2.0 * chi * k as f64 * t).exp()
            })
        }
    };
    r.view((0, 0), (n, n)).into_owned()
}

/// One factor of the ordered product, checked against the matrix exponential
/// of its Liouvillian.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCheck {
    pub name: &'static str,
    pub residual: f64,
}

/// Applies each of the eight factors by its elementwise or series rule and by
/// `expm` of the corresponding Liouvillian, on the bare truncated space.
pub fn factor_audit(rho: &DensityMatrix, t: f64, params: &KerrFiniteTParams) -> Vec<FactorCheck> {
    let space = rho.space();
    let n = space.dim() as i64;
    let table: Vec<RFunctions> = (-n..=n).map(|k| r_functions(params, k)).collect();
    let rf = |k: i64| table[(k + n) as usize];
    let (chi, gm, gp, g0) = (params.chi, params.gamma_minus, params.gamma_plus, params.gamma0);

    let fn_of_r = |f: &dyn Fn(i64) -> C64| build_liouvillian(&SuperopExpr::diagonal(space, |k, _| f(k)));
    let jp = build_liouvillian(&jump_up(space, gp));
    let jm = build_liouvillian(&kerr_zero_t::jump_down(space, gm));
    let x = rho.entries();
    let via_expm = |l: LiouvillianMatrix| l.exp().apply(x).expect("same space");

    let mut checks = Vec::new();
    let mut push = |name, fast: CMatrix, slow: CMatrix| {
        checks.push(FactorCheck {
            name,
            residual: max_abs(&(fast - slow)),
        })
    };

    push(
        "exp(-beta J+)",
        exp_gr_jplus_apply(x, gp, |k| -rf(k).beta),
        via_expm(fn_of_r(&|k| -rf(k).beta).compose(&jp)),
    );
    push(
        "exp(-delta J-)",
        exp_fr_jminus_apply(x, gm, |k| -rf(k).delta),
        via_expm(fn_of_r(&|k| -rf(k).delta).compose(&jm)),
    );
    push(
        "exp(alpha t Lcal)",
        exp_diag_apply(x, |k, s| -rf(k).alpha * (g0 * s as f64 * t)),
        via_expm(build_liouvillian(&SuperopExpr::diagonal(space, |k, s| {
            -rf(k).alpha * (g0 * s as f64 * t)
        }))),
    );
    let inner_jm = |k: i64| rf(k).delta * C64::new(0.0, -2.0 * chi * k as f64 * t).exp();
    push(
        "exp(delta J- e^{-2i chi R t})",
        exp_fr_jminus_apply(x, gm, inner_jm),
        via_expm(fn_of_r(&inner_jm).compose(&jm)),
    );
    push(
        "exp(F t)",
        exp_diag_apply(x, |k, _| rf(k).big_f * t),
        via_expm(fn_of_r(&|k| rf(k).big_f * t)),
    );
    let outer_jp = |k: i64| rf(k).beta * C64::new(0.0, 2.0 * chi * k as f64 * t).exp();
    push(
        "exp(beta e^{2i chi R t} J+)",
        exp_gr_jplus_apply(x, gp, outer_jp),
        via_expm(fn_of_r(&outer_jp).compose(&jp)),
    );
    push(
        "exp(S t)",
        exp_diag_apply(x, |k, s| C64::new(0.0, -chi * t * kerr_phase(k, s))),
        via_expm(build_liouvillian(&kerr_term(space, chi)).scaled(C64::new(t, 0.0))),
    );
    push(
        "exp(C t)",
        x * C64::new(params.c_gamma * t, 0.0).exp(),
        via_expm(build_liouvillian(&SuperopExpr::constant(space, C64::new(params.c_gamma * t, 0.0)))),
    );
    checks
}
