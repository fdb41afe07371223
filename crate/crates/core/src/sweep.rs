//! Threshold and state-bound sweeps over the expansion factor.
//!
//! Every row of a sweep is independent; rows run on a rayon pool and are
//! merged in grid order, and every random input stream is keyed by
//! `(seed, row, probe)`, so output does not depend on the worker count.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::{alpha_for_beta, max_beta_theoretical, thm1_certificate, Variant};
use crate::error::{Error, Result};
use crate::format::{g17, g17_or_na};
use crate::quantizer::{step, ModulatorState, SchemeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaMode {
    /// `gamma = (1-alpha)/(1+alpha)` at the certificate's alpha for each probe.
    #[default]
    Thm1,
    /// `gamma = 1`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputMode {
    /// `f_n = beta`.
    #[default]
    Constant,
    /// `f_n` i.i.d. uniform on `[-beta, beta]`.
    RandomUniform,
}

impl FromStr for GammaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(GammaMode::Thm1),
            "fixed" | "gamma1" => Ok(GammaMode::Fixed),
            _ => Err(Error::InvalidInput(format!("unknown gamma mode '{s}' (thm1|fixed)"))),
        }
    }
}

impl FromStr for InputMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(InputMode::Constant),
            "random" | "random-uniform" => Ok(InputMode::RandomUniform),
            _ => Err(Error::InvalidInput(format!("unknown input mode '{s}' (constant|random)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambda_grid: Vec<f64>,
    pub gamma_mode: GammaMode,
    pub input_mode: InputMode,
    pub max_iters: usize,
    pub divergence_bound: f64,
    pub bisect_tol: f64,
    pub seed: u64,
    pub variant: Variant,
    pub alpha_cap: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda_grid: lambda_grid(1.0, 1.12, 0.005),
            gamma_mode: GammaMode::Thm1,
            input_mode: InputMode::Constant,
            max_iters: 1_000_000,
            divergence_bound: 1000.0,
            bisect_tol: 1e-3,
            seed: 0,
            variant: Variant::RemarkDerived,
            alpha_cap: 0.99,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bisect_tol > 0.0) {
            return Err(Error::InvalidInput(format!("bisect_tol = {} must be positive", self.bisect_tol)));
        }
        if !(self.divergence_bound > 10.0) {
            return Err(Error::InvalidInput(format!(
                "divergence bound {} must exceed 10",
                self.divergence_bound
            )));
        }
        if !(self.alpha_cap > 0.0 && self.alpha_cap < 1.0) {
            return Err(Error::InvalidInput(format!("alpha cap {} must lie in (0, 1)", self.alpha_cap)));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
            return Err(Error::InvalidInput(format!("lambda grid value {l} must be >= 1")));
        }
        Ok(())
    }
}

/// `start, start + step, ...` up to `stop` (inclusive within `step / 1e6`),
/// each point computed as `start + k step`.
pub fn lambda_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-6).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Key of the random input stream of probe `probe` in row `row`.
pub fn stream_key(row: usize, probe: usize) -> u64 {
    ((row as u64) << 32) | probe as u64
}

enum Input {
    Constant(f64),
    Random(f64, ChaCha8Rng),
}

impl Input {
    fn new(beta: f64, cfg: &SweepConfig, stream: u64) -> Self {
        match cfg.input_mode {
            InputMode::Constant => Input::Constant(beta),
            InputMode::RandomUniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream);
                Input::Random(beta, rng)
            }
        }
    }

    fn next(&mut self) -> f64 {
        match self {
            Input::Constant(b) => *b,
            Input::Random(b, rng) => {
                if *b > 0.0 {
                    rng.gen_range(-*b..=*b)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Runs the one-parameter scheme and returns `max |v_n|`, or the first step
/// at which `|v_n|` exceeds the divergence bound.
fn run_bounded(lambda: f64, gamma: f64, beta: f64, cfg: &SweepConfig, stream: u64) -> Result<f64> {
    let params = SchemeParams::one_parameter(lambda, gamma)?;
    let mut input = Input::new(beta, cfg, stream);
    let mut state = ModulatorState::zero();
    let mut v_max: f64 = 0.0;
    for _ in 0..cfg.max_iters {
        let (next, _) = step(&params, state, input.next())?;
        if !(next.v.abs() <= cfg.divergence_bound) {
            return Err(Error::Divergence {
                step: next.n,
                last_state: state,
            });
        }
        state = next;
        v_max = v_max.max(state.v.abs());
    }
    Ok(v_max)
}

pub fn is_stable_keyed(lambda: f64, gamma: f64, beta: f64, cfg: &SweepConfig, stream: u64) -> bool {
    run_bounded(lambda, gamma, beta, cfg, stream).is_ok()
}

/// True iff `|v_n| <= divergence_bound` for all `max_iters` steps.
pub fn is_stable(lambda: f64, gamma: f64, beta: f64, cfg: &SweepConfig) -> bool {
    is_stable_keyed(lambda, gamma, beta, cfg, stream_key(0, 0))
}

/// `sup |v_n|` over `max_iters` steps.
pub fn measure_vmax(lambda: f64, gamma: f64, beta: f64, cfg: &SweepConfig) -> Result<f64> {
    run_bounded(lambda, gamma, beta, cfg, stream_key(0, 0))
}

/// Probe indices of the post-hoc checks at `b - tol` and `b + tol`.
pub const PROBE_BELOW: usize = (1 << 31) - 1;
pub const PROBE_ABOVE: usize = (1 << 31) - 2;
const MAX_REFINES: usize = 16;

/// Bisection on `[lo, hi)` keeping `stable(lo)` and `!stable(hi)` (`hi = 1`
/// is never probed); stops once `hi - lo <= tol` and returns `lo`.
fn bisect_from<F: FnMut(f64, usize) -> bool>(mut lo: f64, mut hi: f64, tol: f64, probe: &mut usize, stable: &mut F) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable(mid, *probe) {
            lo = mid;
        } else {
            hi = mid;
        }
        *probe += 1;
    }
    lo
}

/// Bisection threshold over `[0, 1)` for an oracle that receives the probe
/// index, refined until `stable(b - tol)` and `!stable(b + tol)` both hold.
///
/// The stable set need not be an interval: a failing check restarts the
/// search below `b - tol` or above `b + tol`. Returns the threshold and
/// whether both checks hold.
pub fn bisect_threshold<F: FnMut(f64, usize) -> bool>(tol: f64, mut stable: F) -> Result<(f64, bool)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("bisect_tol = {tol} must be positive")));
    }
    if !stable(0.0, 0) {
        return Err(Error::Degenerate("unstable at beta = 0".into()));
    }
    let mut probe = 1;
    let mut b = bisect_from(0.0, 1.0, tol, &mut probe, &mut stable);
    for _ in 0..MAX_REFINES {
        let below = b - tol;
        if below > 0.0 && !stable(below, PROBE_BELOW) {
            b = bisect_from(0.0, below, tol, &mut probe, &mut stable);
            continue;
        }
        let above = b + tol;
        if above < 1.0 && stable(above, PROBE_ABOVE) {
            b = bisect_from(above, 1.0, tol, &mut probe, &mut stable);
            continue;
        }
        return Ok((b, true));
    }
    Ok((b, false))
}

/// Multiplier used for input bound `beta`, with the alpha behind it in
/// single-parameter mode; `None` when no certificate exists at this lambda.
pub fn gamma_for(beta: f64, lambda: f64, mode: GammaMode, cfg: &SweepConfig) -> Option<(f64, Option<f64>)> {
    match mode {
        GammaMode::Fixed => Some((1.0, None)),
        GammaMode::Thm1 => {
            let alpha = alpha_for_beta(beta, lambda, cfg.alpha_cap, cfg.variant)?;
            Some(((1.0 - alpha) / (1.0 + alpha), Some(alpha)))
        }
    }
}

/// How the multiplier of a row was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaUsed {
    Thm1,
    Fixed,
    /// single-parameter mode requested but no certificate exists; `gamma = 1`.
    FixedFallback,
}

impl fmt::Display for GammaUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaUsed::Thm1 => "thm1",
            GammaUsed::Fixed => "fixed",
            GammaUsed::FixedFallback => "fixed-fallback",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub beta: f64,
    /// Stable at `beta - tol` and unstable at `beta + tol`.
    pub certified: bool,
    pub gamma_used: GammaUsed,
    /// Alpha of the certificate at the returned threshold (single-parameter mode).
    pub alpha: Option<f64>,
    pub gamma: f64,
}

/// Empirical stability threshold at `lambda` for `row`'s PRNG streams.
pub fn find_beta_threshold_row(lambda: f64, mode: GammaMode, cfg: &SweepConfig, row: usize) -> Result<Threshold> {
    cfg.validate()?;
    let mode_used = match mode {
        GammaMode::Fixed => GammaUsed::Fixed,
        GammaMode::Thm1 if gamma_for(0.0, lambda, mode, cfg).is_some() => GammaUsed::Thm1,
        GammaMode::Thm1 => GammaUsed::FixedFallback,
    };
    let effective = if mode_used == GammaUsed::Thm1 { GammaMode::Thm1 } else { GammaMode::Fixed };
    let pick = |beta: f64| gamma_for(beta, lambda, effective, cfg).expect("certificate checked at beta = 0");
    let (beta, certified) = bisect_threshold(cfg.bisect_tol, |beta, probe| {
        let (gamma, _) = pick(beta);
        is_stable_keyed(lambda, gamma, beta, cfg, stream_key(row, probe))
    })?;
    let (gamma, alpha) = pick(beta);
    Ok(Threshold {
        beta,
        certified,
        gamma_used: mode_used,
        alpha,
        gamma,
    })
}

pub fn find_beta_threshold(lambda: f64, mode: GammaMode, cfg: &SweepConfig) -> Result<f64> {
    find_beta_threshold_row(lambda, mode, cfg, 0).map(|t| t.beta)
}

/// Post-hoc check of a threshold `b`: `(stable at b - tol, unstable at
/// b + tol)` on the same streams the threshold search used. Points outside
/// `[0, 1)` count as passing, matching the search's bracket ends.
pub fn bisection_certificate(lambda: f64, mode: GammaMode, cfg: &SweepConfig, row: usize, b: f64) -> (bool, bool) {
    let effective = if gamma_for(0.0, lambda, mode, cfg).is_some() { mode } else { GammaMode::Fixed };
    let probe = |beta: f64, key: usize| -> bool {
        let (gamma, _) = gamma_for(beta, lambda, effective, cfg).expect("certificate exists at beta = 0");
        is_stable_keyed(lambda, gamma, beta, cfg, stream_key(row, key))
    };
    let below = b - cfg.bisect_tol;
    let above = b + cfg.bisect_tol;
    (below <= 0.0 || probe(below, PROBE_BELOW), above >= 1.0 || !probe(above, PROBE_ABOVE))
}

fn par_rows<T: Send, F: Fn(usize, f64) -> T + Sync>(grid: &[f64], f: F) -> Vec<T> {
    grid.par_iter().enumerate().map(|(i, &l)| f(i, l)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Row {
    pub lambda: f64,
    pub beta_max: f64,
    pub alpha_star: f64,
}

pub fn run_fig1(lambda_grid: &[f64], alpha_cap: f64, variant: Variant) -> Vec<Fig1Row> {
    par_rows(lambda_grid, |_, lambda| {
        let (beta_max, alpha_star) = max_beta_theoretical(lambda, alpha_cap, variant);
        Fig1Row {
            lambda,
            beta_max,
            alpha_star,
        }
    })
}

/// Largest grid lambda with a positive `beta_max`.
pub fn fig1_cutoff(rows: &[Fig1Row]) -> Option<f64> {
    rows.iter().filter(|r| r.beta_max > 0.0).map(|r| r.lambda).reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub lambda: f64,
    /// `None` where no certificate exists.
    pub beta_theoretical: Option<f64>,
    /// `None` where the scheme is unstable even at zero input.
    pub beta_observed: Option<f64>,
    pub gamma_used: GammaUsed,
    pub alpha_used: Option<f64>,
}

fn beta_theoretical(lambda: f64, cfg: &SweepConfig) -> Option<f64> {
    let (b, _) = max_beta_theoretical(lambda, cfg.alpha_cap, cfg.variant);
    (b > 0.0).then_some(b)
}

fn threshold_rows(cfg: &SweepConfig, mode: GammaMode) -> Result<Vec<ThresholdRow>> {
    cfg.validate()?;
    Ok(par_rows(&cfg.lambda_grid, |row, lambda| {
        let theory = beta_theoretical(lambda, cfg);
        match find_beta_threshold_row(lambda, mode, cfg, row) {
            Ok(t) => ThresholdRow {
                lambda,
                beta_theoretical: theory,
                beta_observed: Some(t.beta),
                gamma_used: t.gamma_used,
                alpha_used: t.alpha,
            },
            Err(_) => ThresholdRow {
                lambda,
                beta_theoretical: theory,
                beta_observed: None,
                gamma_used: if mode == GammaMode::Fixed { GammaUsed::Fixed } else { GammaUsed::FixedFallback },
                alpha_used: None,
            },
        }
    }))
}

/// Thresholds with the single-parameter multiplier (`cfg.gamma_mode` is ignored).
pub fn run_fig2(cfg: &SweepConfig) -> Result<Vec<ThresholdRow>> {
    threshold_rows(cfg, GammaMode::Thm1)
}

/// Thresholds with `gamma = 1`.
pub fn run_fig3(cfg: &SweepConfig) -> Result<Vec<ThresholdRow>> {
    threshold_rows(cfg, GammaMode::Fixed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Row {
    pub lambda: f64,
    /// `v_max` bound of the single-parameter certificate at `alpha_star`.
    pub vmax_theoretical: Option<f64>,
    /// Measured at the single-parameter-mode threshold.
    pub vmax_empirical_thm1gamma: Option<f64>,
    /// Measured at the `gamma = 1` threshold.
    pub vmax_empirical_gamma1: Option<f64>,
}

fn vmax_at_threshold(lambda: f64, mode: GammaMode, cfg: &SweepConfig, row: usize) -> Option<f64> {
    let t = find_beta_threshold_row(lambda, mode, cfg, row).ok()?;
    // the probe stream that accepted this beta is not tracked; use a fresh one
    run_bounded(lambda, t.gamma, t.beta, cfg, stream_key(row, PROBE_BELOW - 1)).ok()
}

pub fn run_fig4(cfg: &SweepConfig) -> Result<Vec<Fig4Row>> {
    cfg.validate()?;
    Ok(par_rows(&cfg.lambda_grid, |row, lambda| {
        let (_, alpha_star) = max_beta_theoretical(lambda, cfg.alpha_cap, cfg.variant);
        let theory = thm1_certificate(alpha_star, lambda, cfg.variant).ok().map(|c| c.v_max_bound);
        Fig4Row {
            lambda,
            vmax_theoretical: theory,
            vmax_empirical_thm1gamma: vmax_at_threshold(lambda, GammaMode::Thm1, cfg, row),
            vmax_empirical_gamma1: vmax_at_threshold(lambda, GammaMode::Fixed, cfg, row),
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmaxAtTheory {
    pub lambda: f64,
    pub beta: f64,
    pub alpha: f64,
    pub vmax_theoretical: f64,
    pub vmax_measured: f64,
}

impl VmaxAtTheory {
    pub fn ratio(&self) -> f64 {
        self.vmax_measured / self.vmax_theoretical
    }
}

/// Measured `v_max` under the single-parameter certificate at `alpha_star`, driven
/// at its own `beta`; `None` where no certificate exists.
pub fn vmax_at_theoretical(cfg: &SweepConfig) -> Result<Vec<Option<VmaxAtTheory>>> {
    cfg.validate()?;
    Ok(par_rows(&cfg.lambda_grid, |row, lambda| {
        let (_, alpha) = max_beta_theoretical(lambda, cfg.alpha_cap, cfg.variant);
        let cert = thm1_certificate(alpha, lambda, cfg.variant).ok()?;
        let measured = run_bounded(lambda, cert.gamma, cert.beta, cfg, stream_key(row, 0)).ok()?;
        Some(VmaxAtTheory {
            lambda,
            beta: cert.beta,
            alpha,
            vmax_theoretical: cert.v_max_bound,
            vmax_measured: measured,
        })
    }))
}

pub fn write_fig1<W: Write>(rows: &[Fig1Row], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "lambda,beta_max,alpha_star")?;
    for r in rows {
        writeln!(out, "{},{},{}", g17(r.lambda), g17(r.beta_max), g17(r.alpha_star))?;
    }
    out.flush()
}

pub fn write_thresholds<W: Write>(rows: &[ThresholdRow], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "lambda,beta_theoretical,beta_observed,gamma_mode,alpha_used")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            g17(r.lambda),
            g17_or_na(r.beta_theoretical),
            g17_or_na(r.beta_observed),
            r.gamma_used,
            g17_or_na(r.alpha_used)
        )?;
    }
    out.flush()
}

pub fn write_fig4<W: Write>(rows: &[Fig4Row], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "lambda,vmax_theoretical,vmax_empirical_thm1gamma,vmax_empirical_gamma1")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            g17(r.lambda),
            g17_or_na(r.vmax_theoretical),
            g17_or_na(r.vmax_empirical_thm1gamma),
            g17_or_na(r.vmax_empirical_gamma1)
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(iters: usize) -> SweepConfig {
        SweepConfig {
            max_iters: iters,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn grid_construction() {
        let g = lambda_grid(1.0, 1.06, 0.01);
        assert_eq!(g.len(), 7);
        assert_eq!(g[6], 1.0 + 6.0 * 0.01);
        assert_eq!(lambda_grid(1.0, 1.0, 0.01), vec![1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let bad = SweepConfig {
            bisect_tol: 0.0,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SweepConfig {
            divergence_bound: 10.0,
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SweepConfig {
            lambda_grid: vec![0.9],
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_input_standard_scheme() {
        let cfg = SweepConfig::default();
        assert!(is_stable(1.0, 1.0, 0.0, &cfg));
        let v = measure_vmax(1.0, 1.0, 0.0, &cfg).unwrap();
        assert!(v <= 3.0, "{v}");
    }

    #[test]
    fn single_parameter_bound_holds_in_simulation() {
        let cfg = SweepConfig::default();
        let cert = thm1_certificate(0.5, 1.01, Variant::RemarkDerived).unwrap();
        let v = measure_vmax(1.01, cert.gamma, cert.beta, &cfg).unwrap();
        assert!(v <= 6.0625, "{v}");
        let random = SweepConfig {
            input_mode: InputMode::RandomUniform,
            ..cfg
        };
        assert!(measure_vmax(1.01, cert.gamma, cert.beta * 0.999, &random).unwrap() <= 6.0625);
    }

    #[test]
    fn large_input_with_expansion_diverges() {
        let cfg = SweepConfig::default();
        let stable = is_stable(1.08, 1.0, 0.999, &cfg);
        assert!(!stable);
        match measure_vmax(1.08, 1.0, 0.999, &cfg) {
            Err(Error::Divergence { step, .. }) => assert!(step >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vmax_monotone_in_iterations() {
        let a = measure_vmax(1.02, 0.5, 0.3, &quick(1000)).unwrap();
        let b = measure_vmax(1.02, 0.5, 0.3, &quick(10_000)).unwrap();
        assert!(a <= b);
    }

    #[test]
    fn bisection_on_step_oracle() {
        let (b, certified) = bisect_threshold(1e-3, |beta, _| beta < 0.37).unwrap();
        assert!((b - 0.37).abs() <= 1e-3);
        assert!(b < 0.37 && certified);
        assert!(matches!(bisect_threshold(1e-3, |_, _| false), Err(Error::Degenerate(_))));
        assert!(bisect_threshold(1e-3, |_, _| true).unwrap().0 > 1.0 - 1e-3);
    }

    #[test]
    fn bisection_escapes_stable_islands() {
        // stable on [0, 0.5) and on the island [0.6, 0.6007)
        let oracle = |beta: f64, _| beta < 0.5 || (0.6..0.6007).contains(&beta);
        let (b, certified) = bisect_threshold(1e-3, oracle).unwrap();
        assert!(certified);
        assert!(oracle(b - 1e-3, 0) && !oracle(b + 1e-3, 0), "{b}");
        // the first bisection probes land on 0.5 and 0.75, then home in on 0.6
        let (b, _) = bisect_threshold(1e-3, |beta: f64, _| beta < 0.5 || (0.59..0.6008).contains(&beta)).unwrap();
        assert!((b - 0.5).abs() <= 1e-3 || (b - 0.6008).abs() <= 1e-3, "{b}");
    }

    #[test]
    fn threshold_dominates_theory_at_unit_lambda() {
        let cfg = quick(100_000);
        let t = find_beta_threshold_row(1.0, GammaMode::Thm1, &cfg, 0).unwrap();
        assert_eq!(t.gamma_used, GammaUsed::Thm1);
        let theory = max_beta_theoretical(1.0, cfg.alpha_cap, cfg.variant).0;
        assert!(t.beta >= theory - cfg.bisect_tol, "{} < {theory}", t.beta);
    }

    #[test]
    fn infeasible_lambda_falls_back_to_unit_gamma() {
        let cfg = quick(20_000);
        let t = find_beta_threshold_row(1.2, GammaMode::Thm1, &cfg, 0);
        match t {
            Ok(t) => {
                assert_eq!(t.gamma_used, GammaUsed::FixedFallback);
                assert_eq!(t.gamma, 1.0);
            }
            Err(e) => assert!(matches!(e, Error::Degenerate(_))),
        }
        let rows = run_fig2(&SweepConfig {
            lambda_grid: vec![1.2],
            ..cfg
        })
        .unwrap();
        assert_eq!(rows[0].beta_theoretical, None);
        assert_eq!(rows[0].gamma_used, GammaUsed::FixedFallback);
        let mut buf = Vec::new();
        write_thresholds(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(1).unwrap().contains(",NA,"));
    }

    #[test]
    fn fig1_unit_lambda_and_cutoff() {
        let rows = run_fig1(&[1.0, 1.05, 1.1], 0.99, Variant::RemarkDerived);
        assert!((rows[0].beta_max - 0.99).abs() < 1e-12);
        assert!(rows[1].beta_max > 0.0);
        assert_eq!(rows[2].beta_max, 0.0);
        assert_eq!(fig1_cutoff(&rows), Some(1.05));
    }

    #[test]
    fn sweeps_are_worker_count_invariant() {
        let cfg = SweepConfig {
            lambda_grid: lambda_grid(1.0, 1.03, 0.01),
            input_mode: InputMode::RandomUniform,
            seed: 5,
            ..quick(5000)
        };
        let render = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let mut buf = Vec::new();
                write_thresholds(&run_fig2(&cfg).unwrap(), &mut buf).unwrap();
                buf
            })
        };
        assert_eq!(render(1), render(3));
    }
}
