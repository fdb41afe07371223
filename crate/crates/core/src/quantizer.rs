//! Quantizers and the double-loop recursions as deterministic state machines.
//!
//! The two-parameter recursion is
//!
//! ```text
//! q_n = Q(u_{n-1} + gamma v_{n-1})
//! u_n = lambda1 u_{n-1} + f_n - q_n
//! v_n = lambda1 u_{n-1} + lambda2 v_{n-1} + f_n - q_n
//! ```
//!
//! with `lambda1 = lambda2 = 1` giving the standard second-order scheme and
//! `lambda2 = 1` the one-parameter chaotic family.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::G17;

/// States with `|u|` or `|v|` above this are treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Default half-width of the tri-level dead band.
pub const DEFAULT_DEADBAND: f64 = 0.5;

/// Quantizer output level, one of `-1`, `0`, `+1`.
pub type Level = i8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum QuantizerKind {
    /// One-bit signum with `Q(0) = +1`.
    Sign,
    /// `0` inside the open dead band `|x| < deadband`, signum outside.
    Trilevel { deadband: f64 },
}

impl Default for QuantizerKind {
    fn default() -> Self {
        QuantizerKind::Sign
    }
}

impl QuantizerKind {
    pub fn trilevel() -> Self {
        QuantizerKind::Trilevel {
            deadband: DEFAULT_DEADBAND,
        }
    }

    #[inline]
    fn level(self, x: f64) -> Level {
        match self {
            QuantizerKind::Sign => {
                if x >= 0.0 {
                    1
                } else {
                    -1
                }
            }
            QuantizerKind::Trilevel { deadband } => {
                if x.abs() < deadband {
                    0
                } else if x >= 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

pub fn quantize(kind: QuantizerKind, x: f64) -> Result<Level> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("quantizer input {x} is not finite")));
    }
    if let QuantizerKind::Trilevel { deadband } = kind {
        if !(deadband >= 0.0 && deadband.is_finite()) {
            return Err(Error::InvalidInput(format!("dead band {deadband} must be finite and >= 0")));
        }
    }
    Ok(kind.level(x))
}

/// Parameters of the double-loop recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gamma: f64,
    pub quantizer: QuantizerKind,
}

impl SchemeParams {
    pub fn new(lambda1: f64, lambda2: f64, gamma: f64, quantizer: QuantizerKind) -> Result<Self> {
        let params = SchemeParams {
            lambda1,
            lambda2,
            gamma,
            quantizer,
        };
        params.validate()?;
        Ok(params)
    }

    /// Standard double-loop scheme (`lambda1 = lambda2 = 1`) with signum quantizer.
    pub fn standard(gamma: f64) -> Result<Self> {
        Self::new(1.0, 1.0, gamma, QuantizerKind::Sign)
    }

    /// One-parameter chaotic family: `lambda1 = lambda`, `lambda2 = 1`.
    pub fn one_parameter(lambda: f64, gamma: f64) -> Result<Self> {
        Self::new(lambda, 1.0, gamma, QuantizerKind::Sign)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 1.0 && self.lambda1.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda1 = {} must be >= 1", self.lambda1)));
        }
        if !(self.lambda2 >= 1.0 && self.lambda2.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda2 = {} must be >= 1", self.lambda2)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma = {} must be > 0", self.gamma)));
        }
        if let QuantizerKind::Trilevel { deadband } = self.quantizer {
            if !(deadband >= 0.0 && deadband.is_finite()) {
                return Err(Error::InvalidInput(format!("dead band {deadband} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn is_chaotic(&self) -> bool {
        self.lambda1 > 1.0 || self.lambda2 > 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModulatorState {
    pub u: f64,
    pub v: f64,
    pub n: usize,
}

impl ModulatorState {
    pub fn zero() -> Self {
        Self::default()
    }

    fn is_bounded(&self) -> bool {
        self.u.is_finite()
            && self.v.is_finite()
            && self.u.abs() <= DIVERGENCE_LIMIT
            && self.v.abs() <= DIVERGENCE_LIMIT
    }
}

/// One step of the recursion from `state` with input `f`.
pub fn step(params: &SchemeParams, state: ModulatorState, f: f64) -> Result<(ModulatorState, Level)> {
    if !f.is_finite() {
        return Err(Error::InvalidInput(format!("input f = {f} at step {} is not finite", state.n + 1)));
    }
    let q = params.quantizer.level(state.u + params.gamma * state.v);
    let qf = f64::from(q);
    let lu = params.lambda1 * state.u;
    let next = ModulatorState {
        u: lu + f - qf,
        v: lu + params.lambda2 * state.v + f - qf,
        n: state.n + 1,
    };
    if !next.is_bounded() {
        return Err(Error::Divergence {
            step: next.n,
            last_state: state,
        });
    }
    Ok((next, q))
}

/// Single-loop (first-order) step: `q_n = Q(u_{n-1})`, `u_n = u_{n-1} + f_n - q_n`.
pub fn step_first_order(kind: QuantizerKind, state: ModulatorState, f: f64) -> Result<(ModulatorState, Level)> {
    if !f.is_finite() {
        return Err(Error::InvalidInput(format!("input f = {f} is not finite")));
    }
    let q = kind.level(state.u);
    let u = state.u + f - f64::from(q);
    let next = ModulatorState { u, v: u, n: state.n + 1 };
    if !next.is_bounded() {
        return Err(Error::Divergence {
            step: next.n,
            last_state: state,
        });
    }
    Ok((next, q))
}

/// A running double-loop modulator.
#[derive(Debug, Clone)]
pub struct Modulator {
    params: SchemeParams,
    state: ModulatorState,
}

impl Modulator {
    pub fn new(params: SchemeParams) -> Self {
        Modulator {
            params,
            state: ModulatorState::zero(),
        }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn state(&self) -> ModulatorState {
        self.state
    }

    pub fn step(&mut self, f: f64) -> Result<Level> {
        let (next, q) = step(&self.params, self.state, f)?;
        self.state = next;
        Ok(q)
    }
}

/// One recorded step: input, output level and the state after the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub f: f64,
    pub q: Level,
    pub state: ModulatorState,
}

/// Folds `step` over `input` from the zero state without storing the
/// trajectory, calling `observe` after every step.
pub fn simulate<I, F>(params: &SchemeParams, input: I, n_steps: usize, mut observe: F) -> Result<ModulatorState>
where
    I: IntoIterator<Item = f64>,
    F: FnMut(&StepRecord),
{
    params.validate()?;
    let mut state = ModulatorState::zero();
    let mut input = input.into_iter();
    for _ in 0..n_steps {
        let f = input.next().ok_or_else(|| {
            Error::InvalidInput(format!("input exhausted after {} of {n_steps} steps", state.n))
        })?;
        let (next, q) = step(params, state, f)?;
        state = next;
        observe(&StepRecord { f, q, state });
    }
    Ok(state)
}

pub const TRAJECTORY_HEADER: &str = "n,f,q,u,v";

/// One trajectory CSV row for a step record.
pub fn write_csv_row<W: Write>(out: &mut W, r: &StepRecord) -> io::Result<()> {
    writeln!(out, "{},{},{},{},{}", r.state.n, G17(r.f), r.q, G17(r.state.u), G17(r.state.v))
}

/// Full history of a run from the zero state.
///
/// `u` and `v` hold `len() + 1` entries with index 0 the initial state;
/// `f[k]` and `q[k]` belong to step `n = k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SchemeParams,
    pub f: Vec<f64>,
    pub q: Vec<Level>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Trajectory {
    fn empty(params: SchemeParams, capacity: usize) -> Self {
        let mut u = Vec::with_capacity(capacity + 1);
        let mut v = Vec::with_capacity(capacity + 1);
        u.push(0.0);
        v.push(0.0);
        Trajectory {
            params,
            f: Vec::with_capacity(capacity),
            q: Vec::with_capacity(capacity),
            u,
            v,
        }
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn final_state(&self) -> ModulatorState {
        let n = self.len();
        ModulatorState {
            u: self.u[n],
            v: self.v[n],
            n,
        }
    }

    /// Continues this trajectory for `n_steps` more inputs.
    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, input: I, n_steps: usize) -> Result<()> {
        let mut state = self.final_state();
        let mut input = input.into_iter();
        for _ in 0..n_steps {
            let f = input.next().ok_or_else(|| {
                Error::InvalidInput(format!("input exhausted at step {}", state.n + 1))
            })?;
            let (next, q) = step(&self.params, state, f)?;
            state = next;
            self.f.push(f);
            self.q.push(q);
            self.u.push(next.u);
            self.v.push(next.v);
        }
        Ok(())
    }

    pub fn max_abs_v(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest `|u_n - (v_n - lambda2 v_{n-1})|` over `n >= 1`.
    pub fn state_identity_residual(&self) -> f64 {
        (1..=self.len())
            .map(|n| (self.u[n] - (self.v[n] - self.params.lambda2 * self.v[n - 1])).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `n,f,q,u,v` rows for `n = 1..=len()`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for k in 0..self.len() {
            let record = StepRecord {
                f: self.f[k],
                q: self.q[k],
                state: ModulatorState {
                    u: self.u[k + 1],
                    v: self.v[k + 1],
                    n: k + 1,
                },
            };
            write_csv_row(&mut out, &record)?;
        }
        out.flush()
    }
}

pub fn run<I: IntoIterator<Item = f64>>(params: &SchemeParams, input: I, n_steps: usize) -> Result<Trajectory> {
    params.validate()?;
    let mut traj = Trajectory::empty(*params, n_steps);
    traj.extend(input, n_steps)?;
    Ok(traj)
}

/// Residual of the exact second-difference identity obtained by
/// eliminating `u` from the recursion:
/// `f_n - q_n = v_n - (lambda1 + lambda2) v_{n-1} + lambda1 lambda2 v_{n-2}`.
pub fn residual_identity(traj: &Trajectory) -> Result<f64> {
    // states v_0..v_N; the identity needs three consecutive entries
    if traj.v.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: traj.v.len(),
        });
    }
    let sum = traj.params.lambda1 + traj.params.lambda2;
    let prod = traj.params.lambda1 * traj.params.lambda2;
    let v = &traj.v;
    Ok((2..=traj.len())
        .map(|n| {
            let lhs = traj.f[n - 1] - f64::from(traj.q[n - 1]);
            (lhs - (v[n] - sum * v[n - 1] + prod * v[n - 2])).abs()
        })
        .fold(0.0, f64::max))
}

/// `sum_{l=0}^{order} (-1)^l C(order, l) seq[index - l]`.
pub fn kth_difference(seq: &[f64], order: usize, index: usize) -> Result<f64> {
    if index < order {
        return Err(Error::Index { index, order });
    }
    if index >= seq.len() {
        return Err(Error::InvalidInput(format!(
            "index {index} out of range for sequence of length {}",
            seq.len()
        )));
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for l in 0..=order {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * seq[index - l];
        binom = binom * (order - l) as f64 / (l + 1) as f64;
    }
    Ok(acc)
}

/// Endless i.i.d. uniform input on `[-beta, beta]` from a seeded stream.
pub fn uniform_input(seed: u64, beta: f64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = beta.abs();
    std::iter::from_fn(move || Some(if beta > 0.0 { rng.gen_range(-beta..=beta) } else { 0.0 }))
}
