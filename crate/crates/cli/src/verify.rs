//! `verify`: invariant and oracle suites with one record per check.
//!
//! Each suite is deterministic in `(dim, seed)`. A run fails iff some record
//! has verdict `FAIL`; `unverifiable` and `corrected` records are reported
//! but do not fail it.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use disentangle::commutators::{verify_commutator_table, verify_kerr_relations, CommutatorReport, Verdict};
use disentangle::fock::{coherent_state, observables, DensityMatrix, FockSpace};
use disentangle::kerr_finite_t::{
    propagate_kerr_finite_t, propagate_kerr_finite_t_with, Branch, FiniteTOptions, KerrFiniteTParams,
};
use disentangle::kerr_zero_t::{propagate_kerr_zero_t, KerrZeroTParams};
use disentangle::linalg::{max_abs, trace_distance};
use disentangle::oracle::{expm_evolve, rk4_evolve, IntegratorConfig};
use disentangle::pdc::{
    s_hat, transformed_generator_residual, x_minus, x_plus, y_minus, y_plus, PdcParams, PdcPropagator,
    TransformedEvolution,
};
use disentangle::superop::{build_liouvillian, build_liouvillian_with, Vectorization};
use disentangle::{LiouvillianMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{fmt_f64, CliError};

pub const DEFAULT_DIM: usize = 12;
pub const DEFAULT_SEED: u64 = 7;
pub const RELATION_SAMPLES: usize = 10;

pub const KERR_CHI: f64 = 1.0;
pub const KERR_GAMMA_MINUS: f64 = 0.1;
pub const KERR_GAMMA_PLUS: f64 = 0.05;
pub const PDC_EPSILON: f64 = 0.3;
pub const PDC_GAMMA: f64 = 1.0;

pub const ORACLE_TOL: f64 = 1e-9;
pub const DECAY_TOL: f64 = 1e-10;
pub const TELESCOPE_TOL: f64 = 1e-10;
pub const CONTINUITY_TOL: f64 = 1e-6;
pub const STATIONARY_GENERATOR_TOL: f64 = 1e-10;
pub const STATIONARY_PROPAGATION_TOL: f64 = 1e-8;
pub const FINITE_T_ORACLE_TOL: f64 = 1e-6;
pub const TRANSFORM_TOL: f64 = 1e-8;
pub const NEGATIVE_CONTROL_FLOOR: f64 = 1e-3;
pub const SIMILARITY_TOL: f64 = 1e-8;
pub const PDC_ORACLE_TOL: f64 = 1e-8;
/// Identities that hold term by term, up to summation order.
pub const ROUNDING_TOL: f64 = 1e-14;

/// Fock levels the thermal-state checks run on, far enough from the edge
/// that the truncated `n̄ = 1` tail is below 1e-12.
pub const THERMAL_DIM: usize = 40;
pub const RK4_LOCAL_ERROR: f64 = 1e-11;
/// Extra levels given to the finite-temperature oracle before cropping.
pub const FINITE_T_ORACLE_GUARD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kerr0,
    KerrT,
    Pdc,
    Tables,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Kerr0 => "kerr0",
            Suite::KerrT => "kerrT",
            Suite::Pdc => "pdc",
            Suite::Tables => "tables",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "kerr0" => Ok(Suite::Kerr0),
            "kerrT" => Ok(Suite::KerrT),
            "pdc" => Ok(Suite::Pdc),
            "tables" => Ok(Suite::Tables),
            "all" => Ok(Suite::All),
            _ => Err(CliError::Config(format!("unknown suite `{s}` (kerr0, kerrT, pdc, tables, all)"))),
        }
    }
}

/// Deliberate defects that a correct suite must catch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    /// Use the `α₋` sign the selection rejects.
    FlipAlphaMinus,
    /// Use the `+` root of the finite-temperature quadratic.
    WrongBranch,
    /// Build the oracle Liouvillian row-stacked but apply it column-stacked.
    MixedVectorization,
    /// Hold the commutator table to the printed entries, without corrections.
    TableUncorrected,
}

impl Injection {
    pub const ALL: [Injection; 4] = [
        Injection::FlipAlphaMinus,
        Injection::WrongBranch,
        Injection::MixedVectorization,
        Injection::TableUncorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Injection::FlipAlphaMinus => "flip-alpha-minus",
            Injection::WrongBranch => "wrong-branch",
            Injection::MixedVectorization => "mixed-vectorization",
            Injection::TableUncorrected => "table-uncorrected",
        }
    }
}

impl FromStr for Injection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Injection::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown injection `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    /// Negative controls: the residual must exceed this floor.
    Above(f64),
}

impl Bound {
    fn holds(self, r: f64) -> bool {
        match self {
            Bound::AtMost(tol) => r <= tol,
            Bound::Above(floor) => r > floor,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:.0e}"),
            Bound::Above(t) => write!(f, "> {t:.0e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub suite: &'static str,
    pub name: String,
    pub residual: Option<f64>,
    pub bound: Bound,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl CheckRecord {
    fn measured(suite: &'static str, name: impl Into<String>, residual: f64, bound: Bound) -> Self {
        Self {
            suite,
            name: name.into(),
            residual: Some(residual),
            bound,
            verdict: if bound.holds(residual) { Verdict::Pass } else { Verdict::Fail },
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub dim: usize,
    pub seed: u64,
    pub injection: Option<Injection>,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.verdict.is_failure()).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.records.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &self.records {
            let residual = r.residual.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3e}"));
            let _ = write!(
                out,
                "{:<7} {:<width$}  {:>10}  {:<8}  {}",
                r.suite,
                r.name,
                residual,
                r.bound.to_string(),
                r.verdict
            );
            if let Some(note) = &r.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed (suite {}, dim {}, seed {})",
            self.records.len(),
            self.failures(),
            self.suite.name(),
            self.dim,
            self.seed
        );
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "suite": self.suite.name(),
            "dim": self.dim,
            "seed": self.seed,
            "injection": self.injection.map(Injection::name),
            "passed": self.passed(),
            "records": self.records.iter().map(|r| json!({
                "suite": r.suite,
                "name": r.name,
                "residual": r.residual.map(fmt_f64),
                "bound": r.bound.to_string(),
                "verdict": r.verdict.to_string(),
                "note": r.note,
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn run_suite(suite: Suite, dim: usize, seed: u64, injection: Option<Injection>) -> Result<SuiteReport, CliError> {
    let space = FockSpace::new(dim)?;
    let mut records = Vec::new();
    let wanted = |s: Suite| suite == s || suite == Suite::All;
    if wanted(Suite::Kerr0) {
        records.extend(kerr0_suite(space, seed)?);
    }
    if wanted(Suite::KerrT) {
        records.extend(kerr_t_suite(space, injection)?);
    }
    if wanted(Suite::Pdc) {
        records.extend(pdc_suite(space, seed, injection)?);
    }
    if wanted(Suite::Tables) {
        records.extend(tables_suite(space, seed, injection)?);
    }
    Ok(SuiteReport {
        suite,
        dim,
        seed,
        injection,
        records,
    })
}

fn from_commutators(suite: &'static str, report: CommutatorReport) -> impl Iterator<Item = CheckRecord> {
    report.checks.into_iter().map(move |c| CheckRecord {
        suite,
        name: c.name,
        residual: c.residual,
        bound: Bound::AtMost(c.tolerance),
        verdict: c.verdict,
        note: c.note,
    })
}

/// Coherent amplitude whose Poisson tail at the truncation edge is negligible.
fn probe_amplitude(space: FockSpace) -> C64 {
    C64::new((space.dim() as f64 / 12.0).sqrt(), 0.0)
}

fn kerr0_suite(space: FockSpace, seed: u64) -> Result<Vec<CheckRecord>, CliError> {
    let params = KerrZeroTParams::new(KERR_CHI, KERR_GAMMA_MINUS)?;
    let mut out: Vec<CheckRecord> =
        from_commutators("kerr0", verify_kerr_relations(space, &params, RELATION_SAMPLES, seed)?).collect();

    let rho0 = DensityMatrix::from_ket(&coherent_state(space, probe_amplitude(space)));
    let l = build_liouvillian(&params.generator(space));
    let n0 = observables(&rho0).mean_n;
    for t in [0.5, 1.0] {
        let analytic = propagate_kerr_zero_t(&rho0, t, &params)?;
        let oracle = expm_evolve(&l, &rho0, t)?;
        out.push(CheckRecord::measured(
            "kerr0",
            format!("analytic vs expm oracle, t={t}"),
            max_abs(&(analytic.entries() - oracle.entries())),
            Bound::AtMost(ORACLE_TOL),
        ));
        let decay = n0 * (-2.0 * KERR_GAMMA_MINUS * t).exp();
        out.push(CheckRecord::measured(
            "kerr0",
            format!("mean_n = n0 exp(-2 gamma_minus t), t={t}"),
            (observables(&analytic).mean_n - decay).abs(),
            Bound::AtMost(DECAY_TOL),
        ));
    }
    Ok(out)
}

fn kerr_t_suite(space: FockSpace, injection: Option<Injection>) -> Result<Vec<CheckRecord>, CliError> {
    let params = KerrFiniteTParams::new(KERR_CHI, KERR_GAMMA_MINUS, KERR_GAMMA_PLUS)?;
    let options = FiniteTOptions {
        branch: match injection {
            Some(Injection::WrongBranch) => Branch::Plus,
            _ => Branch::Minus,
        },
        ..FiniteTOptions::default()
    };
    let propagate = |rho: &DensityMatrix, t: f64, p: &KerrFiniteTParams| {
        propagate_kerr_finite_t_with(rho, t, p, options).map(|o| o.state)
    };
    let mut out = Vec::new();
    let rho0 = DensityMatrix::from_ket(&coherent_state(space, probe_amplitude(space)));

    let at_zero = propagate(&rho0, 0.0, &params)?;
    out.push(CheckRecord::measured(
        "kerrT",
        "t=0 gives the identity",
        max_abs(&(at_zero.entries() - rho0.entries())),
        Bound::AtMost(TELESCOPE_TOL),
    ));

    let cold = KerrFiniteTParams::new(KERR_CHI, KERR_GAMMA_MINUS, 1e-9)?;
    let zero_t = KerrZeroTParams::new(KERR_CHI, KERR_GAMMA_MINUS)?;
    out.push(CheckRecord::measured(
        "kerrT",
        "gamma_plus -> 0 matches zero temperature, t=1",
        max_abs(&(propagate(&rho0, 1.0, &cold)?.entries() - propagate_kerr_zero_t(&rho0, 1.0, &zero_t)?.entries())),
        Bound::AtMost(CONTINUITY_TOL),
    ));

    let thermal_space = FockSpace::new(THERMAL_DIM)?;
    let nbar = params.stationary_nbar().expect("gamma_minus > gamma_plus");
    let thermal = DensityMatrix::thermal(thermal_space, nbar)?;
    let generated = params.generator(thermal_space).apply(thermal.entries())?;
    out.push(CheckRecord::measured(
        "kerrT",
        format!("generator annihilates the n={nbar} thermal state"),
        max_abs(&generated),
        Bound::AtMost(STATIONARY_GENERATOR_TOL),
    ));
    let evolved = propagate(&thermal, 1.0, &params)?;
    out.push(CheckRecord::measured(
        "kerrT",
        "thermal state is fixed under propagation, t=1",
        max_abs(&(evolved.entries() - thermal.entries())),
        Bound::AtMost(STATIONARY_PROPAGATION_TOL),
    ));

    let padded = FockSpace::new(space.dim() + FINITE_T_ORACLE_GUARD)?;
    let l = build_liouvillian(&params.generator(padded));
    let rho0_padded = rho0.resized(padded);
    for t in [0.5, 1.0] {
        let analytic = propagate(&rho0, t, &params)?;
        let oracle = finite_t_oracle(&l, &rho0_padded, t)?.resized(space);
        out.push(CheckRecord::measured(
            "kerrT",
            format!("analytic vs RK4 oracle (+{FINITE_T_ORACLE_GUARD} levels), t={t}"),
            max_abs(&(analytic.entries() - oracle.entries())),
            Bound::AtMost(FINITE_T_ORACLE_TOL),
        ));
    }
    let default = propagate_kerr_finite_t(&rho0, 1.0, &params)?;
    out.push(CheckRecord::measured(
        "kerrT",
        "configured options match the default propagator, t=1",
        max_abs(&(propagate(&rho0, 1.0, &params)?.entries() - default.entries())),
        Bound::AtMost(0.0),
    ));
    Ok(out)
}

fn finite_t_oracle(
    l: &LiouvillianMatrix,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix, CliError> {
    let config = IntegratorConfig::for_local_error(l, t, RK4_LOCAL_ERROR);
    Ok(rk4_evolve(l, rho0, t, config)?.state)
}

fn pdc_params() -> Result<PdcParams, CliError> {
    Ok(PdcParams::new(C64::new(PDC_EPSILON, 0.0), PDC_GAMMA, true)?)
}

fn pdc_suite(space: FockSpace, seed: u64, injection: Option<Injection>) -> Result<Vec<CheckRecord>, CliError> {
    let params = pdc_params()?;
    let selection_space = FockSpace::new(space.dim().max(16))?;
    let honest = PdcPropagator::new(space, params, TransformedEvolution::Conjugated)?;
    let selected = match injection {
        Some(Injection::FlipAlphaMinus) => honest.transform().flipped(),
        _ => *honest.transform(),
    };
    let mut out = Vec::new();
    out.push(CheckRecord::measured(
        "pdc",
        format!("transformed generator matches target (N={})", selection_space.dim()),
        transformed_generator_residual(&params, &selected, selection_space, RELATION_SAMPLES, seed)?,
        Bound::AtMost(TRANSFORM_TOL),
    ));
    out.push(CheckRecord::measured(
        "pdc",
        "flipped alpha- sign misses the target",
        transformed_generator_residual(&params, &selected.flipped(), selection_space, RELATION_SAMPLES, seed)?,
        Bound::Above(NEGATIVE_CONTROL_FLOOR),
    ));

    let prop = PdcPropagator::with_unchecked_transform(space, params, selected, TransformedEvolution::Conjugated)?;
    let t = 0.5;
    out.push(CheckRecord::measured(
        "pdc",
        format!("expm(G~t) = X expm(Gt) X^-1, t={t}"),
        prop.similarity_residual(t),
        Bound::AtMost(SIMILARITY_TOL),
    ));
    let probe = DensityMatrix::from_ket(&coherent_state(space, C64::new(0.3, 0.4)));
    let mut l = build_liouvillian(&params.generator(space));
    if injection == Some(Injection::MixedVectorization) {
        let row_stacked = build_liouvillian_with(&params.generator(space), Vectorization::RowStacking);
        l = LiouvillianMatrix::from_entries(space, row_stacked.into_entries(), Vectorization::ColumnStacking)?;
    }
    let oracle = expm_evolve(&l, &probe, t)?;
    out.push(CheckRecord::measured(
        "pdc",
        format!("propagator vs expm oracle (trace distance), t={t}"),
        trace_distance(prop.propagate(&probe, t)?.entries(), oracle.entries()),
        Bound::AtMost(PDC_ORACLE_TOL),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = x_minus(space, params.epsilon)
        + x_plus(space, params.epsilon)
        + y_minus(space, params.epsilon)
        + y_plus(space, params.epsilon);
    let split = s_hat(space, params.epsilon) - pieces;
    let decomposition = (0..RELATION_SAMPLES)
        .map(|_| split.apply(DensityMatrix::random(space, &mut rng).entries()).map(|m| max_abs(&m)))
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))?;
    out.push(CheckRecord::measured(
        "pdc",
        "S = X- + X+ + Y- + Y+",
        decomposition,
        Bound::AtMost(ROUNDING_TOL),
    ));

    let mut table = verify_commutator_table(space, &params, RELATION_SAMPLES, seed)?;
    table.checks.retain(|c| c.group == "pdc" && c.residual.is_some());
    out.extend(from_commutators("pdc", table));
    Ok(out)
}

fn tables_suite(space: FockSpace, seed: u64, injection: Option<Injection>) -> Result<Vec<CheckRecord>, CliError> {
    let mut report = verify_commutator_table(space, &pdc_params()?, RELATION_SAMPLES, seed)?;
    report.checks.retain(|c| c.group != "pdc" || c.residual.is_none());
    let strict = injection == Some(Injection::TableUncorrected);
    Ok(from_commutators("tables", report)
        .map(|mut r| {
            if strict && r.verdict == Verdict::Corrected {
                r.verdict = Verdict::Fail;
            }
            r
        })
        .collect())
}
