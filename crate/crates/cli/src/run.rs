//! `propagate`: evolve the configured state to every requested time and write
//! the observables table, metadata and optional density dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use disentangle::fock::{fidelity_pure, observables, DensityMatrix, FockSpace, StateVector};
use disentangle::kerr_finite_t::{propagate_kerr_finite_t, KerrFiniteTParams};
use disentangle::kerr_zero_t::{propagate_kerr_zero_t, KerrZeroTParams};
use disentangle::oracle::{expm_evolve, rk4_evolve, IntegratorConfig};
use disentangle::pdc::{PdcParams, PdcPropagator, TransformedEvolution};
use disentangle::superop::build_liouvillian;
use disentangle::{SuperopExpr, C64};
use serde_json::json;

use crate::config::{Engine, Model, RunConfig};
use crate::{fmt_f64, CliError};

/// Target global error when the step count is derived rather than configured.
pub const RK4_TOLERANCE: f64 = 1e-10;

pub enum ModelParams {
    KerrZeroT(KerrZeroTParams),
    KerrFiniteT(KerrFiniteTParams),
    Pdc(PdcParams),
}

impl ModelParams {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| CliError::Config(format!("missing `{k}`")));
        Ok(match cfg.model {
            Model::KerrZeroT => {
                ModelParams::KerrZeroT(KerrZeroTParams::new(need(cfg.chi, "chi")?, need(cfg.gamma_minus, "gamma_minus")?)?)
            }
            Model::KerrFiniteT => {
                let (chi, gm, gp) = (
                    need(cfg.chi, "chi")?,
                    need(cfg.gamma_minus, "gamma_minus")?,
                    need(cfg.gamma_plus, "gamma_plus")?,
                );
                ModelParams::KerrFiniteT(match (cfg.gamma0, cfg.c_gamma) {
                    (Some(g0), Some(cg)) => KerrFiniteTParams::with_overrides(chi, gm, gp, g0, cg)?,
                    _ => KerrFiniteTParams::new(chi, gm, gp)?,
                })
            }
            Model::Pdc => ModelParams::Pdc(PdcParams::new(
                C64::new(need(cfg.epsilon_re, "epsilon_re")?, cfg.epsilon_im.unwrap_or(0.0)),
                need(cfg.gamma, "gamma")?,
                cfg.corrected.unwrap_or(true),
            )?),
        })
    }

    pub fn generator(&self, space: FockSpace) -> SuperopExpr {
        match self {
            ModelParams::KerrZeroT(p) => p.generator(space),
            ModelParams::KerrFiniteT(p) => p.generator(space),
            ModelParams::Pdc(p) => p.generator(space),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub trace: C64,
    pub purity: f64,
    pub mean_n: f64,
    pub min_eig: f64,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub states: Vec<DensityMatrix>,
    /// `1 − ‖ψ‖²` of the initial state before renormalization.
    pub norm_deficit: f64,
    /// RK4 step count per time, when that engine ran.
    pub rk4_steps: Vec<usize>,
}

/// Evolve `cfg.state` to each of `cfg.times`, each time independently from
/// `t = 0`.
pub fn evolve(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let space = cfg.space()?;
    let psi0 = cfg.state.build(space)?;
    let rho0 = DensityMatrix::from_ket(&psi0);
    let target: Option<StateVector> = cfg.target.map(|t| t.build(space)).transpose()?;
    let params = ModelParams::from_config(cfg)?;

    let mut rk4_steps = Vec::new();
    let states: Vec<DensityMatrix> = match cfg.engine {
        Engine::Analytic => match &params {
            ModelParams::KerrZeroT(p) => cfg
                .times
                .iter()
                .map(|&t| propagate_kerr_zero_t(&rho0, t, p))
                .collect::<Result<_, _>>()?,
            ModelParams::KerrFiniteT(p) => cfg
                .times
                .iter()
                .map(|&t| propagate_kerr_finite_t(&rho0, t, p))
                .collect::<Result<_, _>>()?,
            ModelParams::Pdc(p) => {
                let prop = PdcPropagator::new(space, *p, TransformedEvolution::Conjugated)?;
                cfg.times
                    .iter()
                    .map(|&t| prop.propagate(&rho0, t))
                    .collect::<Result<_, _>>()?
            }
        },
        Engine::OracleRk4 => {
            let l = build_liouvillian(&params.generator(space));
            let mut out = Vec::with_capacity(cfg.times.len());
            for &t in &cfg.times {
                let config = match cfg.rk4_steps {
                    Some(steps) => IntegratorConfig::new(steps, false)?,
                    None => IntegratorConfig::for_accuracy(&l, t, RK4_TOLERANCE),
                };
                rk4_steps.push(config.steps);
                out.push(rk4_evolve(&l, &rho0, t, config)?.state);
            }
            out
        }
        Engine::OracleExpm => {
            let l = build_liouvillian(&params.generator(space));
            cfg.times
                .iter()
                .map(|&t| expm_evolve(&l, &rho0, t))
                .collect::<Result<_, _>>()?
        }
    };

    let rows = cfg
        .times
        .iter()
        .zip(&states)
        .map(|(&t, rho)| {
            let obs = observables(rho);
            Ok(Row {
                t,
                trace: obs.trace,
                purity: obs.purity,
                mean_n: obs.mean_n,
                min_eig: rho.min_eigenvalue(),
                fidelity: target.as_ref().map(|psi| fidelity_pure(psi, rho)).transpose()?,
            })
        })
        .collect::<Result<_, CliError>>()?;

    Ok(RunOutput {
        rows,
        states,
        norm_deficit: psi0.norm_deficit(),
        rk4_steps,
    })
}

pub fn csv(rows: &[Row], with_fidelity: bool) -> String {
    let mut out = String::from("t,trace_re,trace_im,purity,mean_n,min_eig");
    if with_fidelity {
        out.push_str(",fidelity_target");
    }
    out.push('\n');
    for r in rows {
        let cols = [r.t, r.trace.re, r.trace.im, r.purity, r.mean_n, r.min_eig];
        out.push_str(&cols.map(fmt_f64).join(","));
        if with_fidelity {
            let _ = write!(out, ",{}", fmt_f64(r.fidelity.unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

pub fn metadata(cfg: &RunConfig, run: &RunOutput) -> serde_json::Value {
    let config: serde_json::Map<String, serde_json::Value> = cfg
        .entries()
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect();
    json!({
        "tool": "disentangle",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "seed": cfg.seed,
        "model": cfg.model.name(),
        "engine": cfg.engine.name(),
        "dim": cfg.dim,
        "norm_deficit": run.norm_deficit,
        "rk4_steps": run.rk4_steps,
    })
}

/// `n m re im`, one line per element, column-major.
pub fn density_dump(rho: &DensityMatrix) -> String {
    let e = rho.entries();
    let mut out = String::new();
    for m in 0..e.ncols() {
        for n in 0..e.nrows() {
            let z = e[(n, m)];
            let _ = writeln!(out, "{n} {m} {} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Runs `cfg` and writes the CSV to `out`, metadata to `<out>.meta.json` and,
/// if enabled, densities to `<out>.rho.<i>.txt`. Returns every path written.
pub fn cmd_propagate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let run = evolve(cfg)?;
    let mut written = vec![out.to_path_buf()];
    write(out, &csv(&run.rows, cfg.target.is_some()))?;
    let meta = sibling(out, ".meta.json");
    let text = serde_json::to_string_pretty(&metadata(cfg, &run)).expect("metadata is plain JSON");
    write(&meta, &(text + "\n"))?;
    written.push(meta);
    if cfg.dump_density {
        for (i, rho) in run.states.iter().enumerate() {
            let p = sibling(out, &format!(".rho.{i}.txt"));
            write(&p, &density_dump(rho))?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn vacuum_is_stationary_under_kerr() {
        let run = evolve(&cfg("model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 0, 1\ndim = 8")).unwrap();
        for r in &run.rows {
            assert!((r.trace.re - 1.0).abs() < 1e-15);
            assert!(r.mean_n.abs() < 1e-15);
        }
    }

    #[test]
    fn csv_has_fidelity_column_only_with_target() {
        let base = "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 0\ndim = 6\n";
        let without = evolve(&cfg(base)).unwrap();
        assert!(!csv(&without.rows, false).contains("fidelity"));
        let with = cfg(&format!("{base}target = vacuum\n"));
        let run = evolve(&with).unwrap();
        let text = csv(&run.rows, true);
        assert!(text.starts_with("t,trace_re,trace_im,purity,mean_n,min_eig,fidelity_target\n"));
        assert_eq!(run.rows[0].fidelity, Some(1.0));
    }

    #[test]
    fn dump_lists_every_element() {
        let s = FockSpace::new(3).unwrap();
        let dump = density_dump(&DensityMatrix::vacuum(s));
        assert_eq!(dump.lines().count(), 9);
        assert!(dump.starts_with("0 0 1.0000000000000000e0 0.0000000000000000e0\n"));
    }

    #[test]
    fn formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 4.0 * (-0.2f64).exp(), 1e-300, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
