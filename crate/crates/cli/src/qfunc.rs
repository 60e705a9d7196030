//! `qfunc`: Husimi Q function of the evolved state on a rectangular grid.

use disentangle::fock::husimi_q;
use disentangle::C64;

use crate::config::RunConfig;
use crate::run::evolve;
use crate::{fmt_f64, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, points: usize) -> Result<Self, CliError> {
        let g = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            points,
        };
        if points == 0 {
            return Err(CliError::Config("grid needs at least one point per axis".into()));
        }
        let finite = [re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite());
        if !finite || re_min > re_max || im_min > im_max {
            return Err(CliError::Config("grid bounds must be finite with min <= max".into()));
        }
        if points > 1 && (re_min == re_max || im_min == im_max) {
            return Err(CliError::Config("a grid with several points needs a nonzero extent on both axes".into()));
        }
        Ok(g)
    }

    fn axis(min: f64, max: f64, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![min];
        }
        let step = (max - min) / (points - 1) as f64;
        (0..points).map(|i| min + step * i as f64).collect()
    }

    /// Row-major: imaginary part outer, real part inner.
    pub fn points(&self) -> Vec<C64> {
        let re = Self::axis(self.re_min, self.re_max, self.points);
        let im = Self::axis(self.im_min, self.im_max, self.points);
        im.iter()
            .flat_map(|&y| re.iter().map(move |&x| C64::new(x, y)))
            .collect()
    }
}

/// Q values at `time`, or at the last configured time.
pub fn q_grid(cfg: &RunConfig, grid: &Grid, time: Option<f64>) -> Result<Vec<(C64, f64)>, CliError> {
    let t = time.unwrap_or(*cfg.times.last().expect("config has at least one time"));
    let mut single = cfg.clone();
    single.times = vec![t];
    let run = evolve(&single)?;
    let pts = grid.points();
    let q = husimi_q(&run.states[0], &pts);
    Ok(pts.into_iter().zip(q).collect())
}

pub fn csv(values: &[(C64, f64)]) -> String {
    let mut out = String::from("re,im,q\n");
    for (z, q) in values {
        out.push_str(&format!("{},{},{}\n", fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*q)));
    }
    out
}
