//! Line-oriented `key = value` run configuration.
//!
//! `#` starts a comment, lists are comma-separated, and every key may appear
//! at most once. Serialization writes keys in a fixed order with
//! shortest-round-trip floats, so parse → serialize → parse is the identity.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use disentangle::fock::{cat_state, coherent_state, FockSpace, StateVector};
use disentangle::C64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    KerrZeroT,
    KerrFiniteT,
    Pdc,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::KerrZeroT => "kerr0",
            Model::KerrFiniteT => "kerrT",
            Model::Pdc => "pdc",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Model::KerrZeroT => &["chi", "gamma_minus"],
            Model::KerrFiniteT => &["chi", "gamma_minus", "gamma_plus"],
            Model::Pdc => &["epsilon_re", "gamma"],
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Model::KerrZeroT => &["chi", "gamma_minus"],
            Model::KerrFiniteT => &["chi", "gamma_minus", "gamma_plus", "gamma0", "c_gamma"],
            Model::Pdc => &["epsilon_re", "epsilon_im", "gamma", "corrected"],
        }
    }
}

impl FromStr for Model {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "kerr0" => Ok(Model::KerrZeroT),
            "kerrT" => Ok(Model::KerrFiniteT),
            "pdc" => Ok(Model::Pdc),
            _ => Err(CliError::Config(format!("unknown model `{s}` (kerr0, kerrT, pdc)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    OracleRk4,
    OracleExpm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::OracleRk4 => "oracle-rk4",
            Engine::OracleExpm => "oracle-expm",
        }
    }
}

impl FromStr for Engine {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "oracle-rk4" => Ok(Engine::OracleRk4),
            "oracle-expm" => Ok(Engine::OracleExpm),
            _ => Err(CliError::Config(format!(
                "unknown engine `{s}` (analytic, oracle-rk4, oracle-expm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Number(usize),
    Coherent(C64),
    Cat { alpha: C64, phase: f64 },
}

impl StateSpec {
    pub fn build(&self, space: FockSpace) -> Result<StateVector, CliError> {
        Ok(match *self {
            StateSpec::Vacuum => StateVector::vacuum(space),
            StateSpec::Number(n) => StateVector::number(space, n)?,
            StateSpec::Coherent(alpha) => coherent_state(space, alpha),
            StateSpec::Cat { alpha, phase } => cat_state(space, alpha, phase),
        })
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Vacuum => write!(f, "vacuum"),
            StateSpec::Number(n) => write!(f, "number:{n}"),
            StateSpec::Coherent(a) => write!(f, "coherent:{:?},{:?}", a.re, a.im),
            StateSpec::Cat { alpha, phase } => write!(f, "cat:{:?},{:?},{:?}", alpha.re, alpha.im, phase),
        }
    }
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("bad state `{s}` (vacuum, number:n, coherent:re,im, cat:re,im,phase)"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>, CliError> {
            args.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        match kind.trim() {
            "vacuum" if args.is_empty() => Ok(StateSpec::Vacuum),
            "number" => args.trim().parse().map(StateSpec::Number).map_err(|_| bad()),
            "coherent" => match nums()?[..] {
                [re, im] => Ok(StateSpec::Coherent(C64::new(re, im))),
                _ => Err(bad()),
            },
            "cat" => match nums()?[..] {
                [re, im, phase] => Ok(StateSpec::Cat {
                    alpha: C64::new(re, im),
                    phase,
                }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub engine: Engine,
    pub dim: usize,
    pub chi: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma0: Option<f64>,
    pub c_gamma: Option<f64>,
    pub epsilon_re: Option<f64>,
    pub epsilon_im: Option<f64>,
    pub gamma: Option<f64>,
    pub corrected: Option<bool>,
    pub state: StateSpec,
    pub target: Option<StateSpec>,
    pub times: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub dump_density: bool,
    pub rk4_steps: Option<usize>,
}

const KEYS: &[&str] = &[
    "model",
    "engine",
    "dim",
    "chi",
    "gamma_minus",
    "gamma_plus",
    "gamma0",
    "c_gamma",
    "epsilon_re",
    "epsilon_im",
    "gamma",
    "corrected",
    "state",
    "target",
    "times",
    "seed",
    "output",
    "dump_density",
    "rk4_steps",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
            }
            if pairs.iter().any(|(seen, _)| *seen == k) {
                return Err(CliError::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
            pairs.push((k, v));
        }
        let get = |k: &str| pairs.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
        let opt_f64 = |k: &str| get(k).map(|v| parse_num::<f64>(k, v)).transpose();

        let model: Model = get("model")
            .ok_or_else(|| CliError::Config("missing key `model`".into()))?
            .parse()?;
        for k in model.required() {
            if get(k).is_none() {
                return Err(CliError::Config(format!("model {} requires `{k}`", model.name())));
            }
        }
        let model_keys = [Model::KerrZeroT, Model::KerrFiniteT, Model::Pdc]
            .iter()
            .flat_map(|m| m.allowed().iter().copied())
            .collect::<Vec<_>>();
        for (k, _) in &pairs {
            if model_keys.contains(k) && !model.allowed().contains(k) {
                return Err(CliError::Config(format!("`{k}` does not apply to model {}", model.name())));
            }
        }

        let times: Vec<f64> = get("times")
            .ok_or_else(|| CliError::Config("missing key `times`".into()))?
            .split(',')
            .map(|t| parse_num("times", t.trim()))
            .collect::<Result<_, _>>()?;
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(CliError::Config("`times` must be nonnegative and finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("`times` must be strictly ascending".into()));
        }

        let cfg = RunConfig {
            model,
            engine: get("engine").map(str::parse).transpose()?.unwrap_or(Engine::Analytic),
            dim: get("dim").map(|v| parse_num("dim", v)).transpose()?.unwrap_or(20),
            chi: opt_f64("chi")?,
            gamma_minus: opt_f64("gamma_minus")?,
            gamma_plus: opt_f64("gamma_plus")?,
            gamma0: opt_f64("gamma0")?,
            c_gamma: opt_f64("c_gamma")?,
            epsilon_re: opt_f64("epsilon_re")?,
            epsilon_im: opt_f64("epsilon_im")?,
            gamma: opt_f64("gamma")?,
            corrected: get("corrected").map(|v| parse_bool("corrected", v)).transpose()?,
            state: get("state").map(str::parse).transpose()?.unwrap_or(StateSpec::Vacuum),
            target: get("target").map(str::parse).transpose()?,
            times,
            seed: get("seed").map(|v| parse_num("seed", v)).transpose()?.unwrap_or(0),
            output: get("output").map(PathBuf::from),
            dump_density: get("dump_density")
                .map(|v| parse_bool("dump_density", v))
                .transpose()?
                .unwrap_or(false),
            rk4_steps: get("rk4_steps").map(|v| parse_num("rk4_steps", v)).transpose()?,
        };
        if cfg.dim < 2 {
            return Err(CliError::Config("`dim` must be at least 2".into()));
        }
        if (cfg.gamma0.is_some()) != (cfg.c_gamma.is_some()) {
            return Err(CliError::Config("`gamma0` and `c_gamma` must be given together".into()));
        }
        if cfg.rk4_steps == Some(0) {
            return Err(CliError::Config("`rk4_steps` must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("model", self.model.name().into());
        line("engine", self.engine.name().into());
        line("dim", self.dim.to_string());
        let floats = [
            ("chi", self.chi),
            ("gamma_minus", self.gamma_minus),
            ("gamma_plus", self.gamma_plus),
            ("gamma0", self.gamma0),
            ("c_gamma", self.c_gamma),
            ("epsilon_re", self.epsilon_re),
            ("epsilon_im", self.epsilon_im),
            ("gamma", self.gamma),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                line(k, format!("{v:?}"));
            }
        }
        if let Some(c) = self.corrected {
            line("corrected", c.to_string());
        }
        line("state", self.state.to_string());
        if let Some(t) = &self.target {
            line("target", t.to_string());
        }
        line(
            "times",
            self.times.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(", "),
        );
        line("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            line("output", o.display().to_string());
        }
        line("dump_density", self.dump_density.to_string());
        if let Some(s) = self.rk4_steps {
            line("rk4_steps", s.to_string());
        }
        out
    }

    /// `(key, value)` pairs in serialization order.
    pub fn entries(&self) -> Vec<(String, String)> {
        self.serialize()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    pub fn space(&self) -> Result<FockSpace, CliError> {
        Ok(FockSpace::new(self.dim)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# lossy Kerr, coherent start
model = kerr0
chi = 1.0
gamma_minus = 0.1   # decay
state = coherent:2,0
target = cat:1.5,0,1.5707963267948966
times = 0, 0.5, 1
dim = 20
";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.model, Model::KerrZeroT);
        assert_eq!(c.engine, Engine::Analytic);
        assert_eq!(c.gamma_minus, Some(0.1));
        assert_eq!(c.state, StateSpec::Coherent(C64::new(2.0, 0.0)));
        assert_eq!(c.times, vec![0.0, 0.5, 1.0]);
        assert!(c.target.is_some());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        let text = c.serialize();
        let again = RunConfig::parse(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.serialize());
    }

    #[test]
    fn rejections() {
        let cases = [
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 0\nbogus = 1",
            "model = kerr0\nchi = 1\ntimes = 0",
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 1, 0.5",
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = -1",
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ngamma = 2\ntimes = 0",
            "model = kerr0\nchi = 1\nchi = 2\ngamma_minus = 0.1\ntimes = 0",
            "model = kerrT\nchi = 1\ngamma_minus = 0.1\ngamma_plus = 0.05\ngamma0 = 0.2\ntimes = 0",
            "model = pdc\nepsilon_re = 0.3\ngamma = 1\nstate = squeezed\ntimes = 0",
            "model = pdc\nepsilon_re = 0.3\ngamma = 1\nengine = magic\ntimes = 0",
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 0\nrk4_steps = 0",
            "model = kerr0\nchi = 1\ngamma_minus = 0.1\ntimes = 0\ndim = 1",
            "chi = 1\ntimes = 0",
        ];
        for case in cases {
            assert!(matches!(RunConfig::parse(case), Err(CliError::Config(_))), "{case}");
        }
    }

    #[test]
    fn state_syntax() {
        assert_eq!("vacuum".parse::<StateSpec>().unwrap(), StateSpec::Vacuum);
        assert_eq!("number:3".parse::<StateSpec>().unwrap(), StateSpec::Number(3));
        let cat: StateSpec = "cat:2,0.5,3.14".parse().unwrap();
        assert_eq!(cat.to_string().parse::<StateSpec>().unwrap(), cat);
        assert!("coherent:1".parse::<StateSpec>().is_err());
    }
}
