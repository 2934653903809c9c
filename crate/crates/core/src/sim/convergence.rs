use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{hermiticity_residual, largest_singular_value, max_abs, CMat, HURWITZ_MARGIN, MAX_CONDITION};
use crate::slh::{OscillatorModel, SlhTriple, Wiring};

use super::finite_k::FiniteKModel;
use super::fock::y_kernel_check;
use super::lindblad::{evolve, lindblad, validate_state, LindbladGenerator};

pub const DEFAULT_KS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
pub const DEFAULT_CUTOFF: usize = 8;
pub const DEFAULT_THRESHOLD: f64 = 5e-2;
/// Top-level Fock population above which truncation is flagged.
pub const TOP_LEVEL_WARNING: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    pub ks: Vec<f64>,
    pub cutoff: usize,
    /// Observables on `ĥ`; each is divided by its operator norm.
    pub observables: Vec<CMat>,
    pub t_grid: Vec<f64>,
    /// Initial slow state; the oscillators start in their ground state.
    pub initial: CMat,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KResult {
    pub k: f64,
    /// max over times and observables of the expectation error.
    pub error: f64,
    pub top_level_population: f64,
    /// `values[t][o]`: expectation of observable `o` at time `t`.
    #[serde(skip)]
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub cutoff: usize,
    pub threshold: f64,
    pub times: Vec<f64>,
    pub results: Vec<KResult>,
    /// `None` with fewer than two values of k.
    pub strictly_decreasing: Option<bool>,
    pub below_threshold: bool,
    pub pass: bool,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub limit_values: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.error).collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>8}  {:>14}  {:>14}", "k", "error", "top level");
        for r in &self.results {
            let _ = writeln!(s, "{:>8}  {:>14.6e}  {:>14.6e}", r.k, r.error, r.top_level_population);
        }
        let verdict = match self.strictly_decreasing {
            Some(true) => "strictly decreasing",
            Some(false) => "not strictly decreasing",
            None => "no monotonicity verdict",
        };
        let _ = writeln!(s, "{verdict}; threshold {:e}: {}", self.threshold, if self.below_threshold { "met" } else { "missed" });
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }

    /// Rows `k,t,observable,value`; the limit model has `k = inf`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,t,observable,value\n");
        let mut rows = |k: &str, values: &[Vec<f64>]| {
            for (t, row) in self.times.iter().zip(values) {
                for (o, v) in row.iter().enumerate() {
                    let _ = writeln!(s, "{k},{t:e},{o},{v:.16e}");
                }
            }
        };
        rows("inf", &self.limit_values);
        for r in &self.results {
            rows(&format!("{}", r.k), &r.values);
        }
        s
    }
}

fn expectations(rhos: &[CMat], observables: &[CMat]) -> Vec<Vec<f64>> {
    rhos.iter()
        .map(|rho| observables.iter().map(|x| (x * rho).trace().re).collect())
        .collect()
}

fn limit_generator(t: &SlhTriple) -> Result<LindbladGenerator> {
    let d = t.dim();
    let ls: Vec<CMat> = (0..t.channels()).map(|c| t.l().rows(c * d, d).into_owned()).collect();
    let h = t.hamiltonian();
    lindblad(&((&h + h.adjoint()) * crate::operator::c64(0.5, 0.0)), &ls)
}

fn validate_config(cfg: &ConvergenceConfig, d: usize) -> Result<Vec<CMat>> {
    if cfg.ks.is_empty() {
        return Err(Error::InvalidArgument("at least one k is required".into()));
    }
    for w in cfg.ks.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("k values must be increasing".into()));
        }
    }
    if cfg.ks.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::InvalidArgument("k values must be positive".into()));
    }
    if !(cfg.threshold > 0.0) {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    if cfg.t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    validate_state(&cfg.initial, d)?;
    if cfg.observables.is_empty() {
        return Err(Error::InvalidArgument("at least one observable is required".into()));
    }
    cfg.observables
        .iter()
        .map(|x| {
            if x.shape() != (d, d) {
                return Err(Error::Shape(format!("observable is {}x{}, expected {d}x{d}", x.nrows(), x.ncols())));
            }
            if hermiticity_residual(x) > 1e-10 * (1.0 + max_abs(x)) {
                return Err(Error::InvalidArgument("observables must be Hermitian".into()));
            }
            let norm = largest_singular_value(x);
            if norm == 0.0 {
                return Err(Error::InvalidArgument("observable is zero".into()));
            }
            Ok(x / crate::operator::c64(norm, 0.0))
        })
        .collect()
}

/// Runs the full model at each k and compares slow-space expectations with
/// the adiabatic limit, after closing the feedback loops in `wiring`.
pub fn convergence_study(open: &OscillatorModel, wiring: &Wiring, cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    let model = if wiring.connections().is_empty() && wiring.channels() == open.channels() {
        open.clone()
    } else {
        open.feedback_reduce(wiring)?
    };
    let d = model.dim();
    let m = model.oscillators();
    let observables = validate_config(cfg, d)?;
    let mut warnings = Vec::new();
    if m > 0 {
        let cond = model.a_condition();
        if !(cond < MAX_CONDITION) {
            return Err(Error::Precondition(format!("A is singular (condition number {cond:.3e})")));
        }
        let y = y_kernel_check(model.a(), d, m, cfg.cutoff.max(2), HURWITZ_MARGIN)?;
        if !y.passes() {
            return Err(Error::Precondition("ker Y is not the slow sector".into()));
        }
        if y.non_hurwitz_pass() {
            warnings.push("non-Hurwitz pass: A is not strictly Hurwitz but ker Y is the slow sector".to_string());
        }
    }
    let elim = model.eliminate()?;
    warnings.extend(elim.warnings.iter().cloned());
    let limit_traj = evolve(&limit_generator(&elim.triple)?, &cfg.initial, &cfg.t_grid)?;
    let limit_values = expectations(&limit_traj, &observables);

    let results: Vec<KResult> = cfg
        .ks
        .par_iter()
        .map(|&k| -> Result<KResult> {
            let fk = FiniteKModel::build(&model, k, cfg.cutoff)?;
            let traj = evolve(&fk.generator()?, &fk.ground_state_extension(&cfg.initial), &cfg.t_grid)?;
            let top = traj.iter().map(|r| fk.top_level_population(r)).fold(0.0, f64::max);
            let slow: Vec<CMat> = traj.iter().map(|r| fk.reduce_to_slow(r)).collect();
            let values = expectations(&slow, &observables);
            let error = values
                .iter()
                .zip(&limit_values)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            Ok(KResult { k, error, top_level_population: top, values })
        })
        .collect::<Result<_>>()?;

    for r in &results {
        if m > 0 && r.top_level_population > TOP_LEVEL_WARNING {
            warnings.push(format!(
                "cutoff {} may be too small at k = {}: top Fock level population {:.3e}",
                cfg.cutoff, r.k, r.top_level_population
            ));
        }
    }
    if d == 1 {
        warnings.push("one-dimensional slow space: every observable is constant".to_string());
    }
    let strictly_decreasing = if results.len() < 2 || d == 1 {
        None
    } else {
        Some(results.windows(2).all(|w| w[1].error < w[0].error))
    };
    let below_threshold = results.last().map(|r| r.error < cfg.threshold).unwrap_or(false);
    let pass = below_threshold && strictly_decreasing != Some(false);
    Ok(ConvergenceReport {
        cutoff: cfg.cutoff,
        threshold: cfg.threshold,
        times: cfg.t_grid.clone(),
        results,
        strictly_decreasing,
        below_threshold,
        pass,
        warnings,
        limit_values,
    })
}
