//! Bandlimited test signals, low-pass reconstruction kernels and the
//! reconstruction-error experiments.
//!
//! Signals have bandwidth `1/2` and are sampled at `f_n = f(n / T)`. A
//! quantized sequence is reconstructed as `(1/T) sum_n q_n g(t - n/T)` where
//! the spectrum of `g` is one on `[-1, 1]` and zero outside `[-T0, T0]`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{g17, serialize_g17};
use crate::quantizer::{self, ModulatorState, QuantizerKind, SchemeParams};

/// Highest frequency used by [`gen_signal`], a 10% guard below the band edge.
pub const MAX_SIGNAL_FREQUENCY: f64 = 0.45;
/// Signal band edge.
pub const BANDWIDTH: f64 = 0.5;
pub const DEFAULT_T0: f64 = 2.0;
pub const DEFAULT_TRUNC_TOL: f64 = 1e-8;
/// Kernel tabulation step.
pub const DEFAULT_DT: f64 = 1.0 / 64.0;
/// Evaluation points per sampling interval.
pub const POINTS_PER_INTERVAL: usize = 16;
const DEFAULT_HORIZON: f64 = 512.0;
const MAX_HALF_WIDTH: f64 = 256.0;

/// Shape of the spectral transition from one to zero on `[1, T0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Taper {
    /// `1 - s(x)` with the C-infinity step `s(x) = e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`.
    #[default]
    SmoothStep,
    /// `cos^4(pi x / 2)`; only continuously differentiable at the passband
    /// edge, so the kernel decays like `|t|^-3`.
    RaisedCosineSquared,
}

impl Taper {
    fn eval(self, x: f64) -> f64 {
        match self {
            Taper::SmoothStep => {
                if x <= 0.0 {
                    return 1.0;
                }
                if x >= 1.0 {
                    return 0.0;
                }
                let a = (-1.0 / x).exp();
                let b = (-1.0 / (1.0 - x)).exp();
                1.0 - a / (a + b)
            }
            Taper::RaisedCosineSquared => {
                let c = (0.5 * PI * x.clamp(0.0, 1.0)).cos();
                let c2 = c * c;
                c2 * c2
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelNorms {
    #[serde(serialize_with = "serialize_g17")]
    pub g_l1: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub dg_l1: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub d2g_l1: f64,
}

impl KernelNorms {
    /// Constant of the chaotic-scheme accuracy bound:
    /// `||g''|| + 2 ||g'|| + ||g||`.
    pub fn c_g(&self) -> f64 {
        self.d2g_l1 + 2.0 * self.dg_l1 + self.g_l1
    }
}

/// Options for [`design_filter_with`].
#[derive(Debug, Clone, Copy)]
pub struct FilterDesign {
    pub t0: f64,
    pub trunc_tol: f64,
    pub taper: Taper,
    pub dt: f64,
    pub max_half_width: f64,
}

impl Default for FilterDesign {
    fn default() -> Self {
        FilterDesign {
            t0: DEFAULT_T0,
            trunc_tol: DEFAULT_TRUNC_TOL,
            taper: Taper::SmoothStep,
            dt: DEFAULT_DT,
            max_half_width: MAX_HALF_WIDTH,
        }
    }
}

/// Tabulated low-pass kernel, even in `t`, stored for `t >= 0`.
#[derive(Debug, Clone)]
pub struct FilterSpec {
    t0: f64,
    taper: Taper,
    dt: f64,
    half_width: f64,
    g: Vec<f64>,
    dg: Vec<f64>,
    d2g: Vec<f64>,
    norms: KernelNorms,
    integral: f64,
    tail_mass: f64,
}

pub fn design_filter(t0: f64, trunc_tol: f64) -> Result<FilterSpec> {
    design_filter_with(FilterDesign {
        t0,
        trunc_tol,
        ..FilterDesign::default()
    })
}

fn spectrum_of(taper: Taper, t0: f64, omega: f64) -> f64 {
    let w = omega.abs();
    if w <= 1.0 {
        1.0
    } else if w >= t0 {
        0.0
    } else {
        taper.eval((w - 1.0) / (t0 - 1.0))
    }
}

struct Tables {
    g: Vec<f64>,
    dg: Vec<f64>,
    d2g: Vec<f64>,
}

/// Inverse Fourier transform `g(t) = 2 int_0^T0 ghat(w) cos(2 pi w t) dw`
/// and its first two derivatives by the trapezoid rule on `n_nodes` nodes,
/// tabulated at `t = k dt`.
fn tabulate(taper: Taper, t0: f64, dt: f64, n_points: usize, n_nodes: usize) -> Tables {
    let dw = t0 / (n_nodes - 1) as f64;
    let nodes: Vec<(f64, f64)> = (0..n_nodes)
        .map(|j| {
            let w = j as f64 * dw;
            let weight = if j == 0 || j == n_nodes - 1 { 0.5 * dw } else { dw };
            (w, weight * spectrum_of(taper, t0, w))
        })
        .filter(|&(_, wt)| wt != 0.0)
        .collect();
    let rows: Vec<(f64, f64, f64)> = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * dt;
            let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
            for &(w, wt) in &nodes {
                let (s, c) = (2.0 * PI * w * t).sin_cos();
                g += wt * c;
                dg += wt * w * s;
                d2g += wt * w * w * c;
            }
            (2.0 * g, -4.0 * PI * dg, -8.0 * PI * PI * d2g)
        })
        .collect();
    let mut tables = Tables {
        g: Vec::with_capacity(n_points),
        dg: Vec::with_capacity(n_points),
        d2g: Vec::with_capacity(n_points),
    };
    for (g, dg, d2g) in rows {
        tables.g.push(g);
        tables.dg.push(dg);
        tables.d2g.push(d2g);
    }
    tables
}

/// `2 int_0^{k_end dt} |x| dt` by the trapezoid rule (the factor covers `t < 0`).
fn symmetric_l1(values: &[f64], k_end: usize, dt: f64) -> f64 {
    let inner: f64 = values[1..k_end].iter().map(|x| x.abs()).sum();
    2.0 * dt * (0.5 * values[0].abs() + inner + 0.5 * values[k_end].abs())
}

pub fn design_filter_with(design: FilterDesign) -> Result<FilterSpec> {
    let FilterDesign {
        t0,
        trunc_tol,
        taper,
        dt,
        max_half_width,
    } = design;
    if !(t0 > 1.0 && t0.is_finite()) {
        return Err(Error::InvalidInput(format!("T0 = {t0} must exceed 1")));
    }
    if !(trunc_tol > 0.0) {
        return Err(Error::InvalidInput(format!("truncation tolerance {trunc_tol} must be positive")));
    }
    if !(dt > 0.0 && dt <= 0.25) {
        return Err(Error::InvalidInput(format!("tabulation step {dt} must lie in (0, 1/4]")));
    }
    let mut probe = 16.0_f64.min(max_half_width);
    loop {
        let n_points = (probe / dt).ceil() as usize + 2;
        // node spacing keeps trapezoid aliasing (period 1/dw in t) beyond 8x the probe width
        let n_nodes = ((8.0 * probe * t0).ceil() as usize).max(2048) + 1;
        let tables = tabulate(taper, t0, dt, n_points, n_nodes);
        let k_probe = n_points - 2;
        // tail[k] = 2 int_{k dt}^{probe} |g|
        let mut tail = vec![0.0; k_probe + 1];
        for k in (0..k_probe).rev() {
            tail[k] = tail[k + 1] + dt * (tables.g[k].abs() + tables.g[k + 1].abs());
        }
        let steps_per_unit = (1.0 / dt).round() as usize;
        let chosen = (1..=k_probe / 2)
            .filter(|k| k % steps_per_unit == 0)
            .find(|&k| tail[k] < trunc_tol);
        if let Some(k_end) = chosen {
            let half_width = k_end as f64 * dt;
            let keep = k_end + 2;
            let mut g = tables.g;
            let mut dg = tables.dg;
            let mut d2g = tables.d2g;
            g.truncate(keep);
            dg.truncate(keep);
            d2g.truncate(keep);
            let norms = KernelNorms {
                g_l1: symmetric_l1(&g, k_end, dt),
                dg_l1: symmetric_l1(&dg, k_end, dt),
                d2g_l1: symmetric_l1(&d2g, k_end, dt),
            };
            let inner: f64 = g[1..k_end].iter().sum();
            let integral = 2.0 * dt * (0.5 * g[0] + inner + 0.5 * g[k_end]);
            return Ok(FilterSpec {
                t0,
                taper,
                dt,
                half_width,
                g,
                dg,
                d2g,
                norms,
                integral,
                tail_mass: tail[k_end],
            });
        }
        if probe >= max_half_width {
            return Err(Error::Resource(format!(
                "kernel tail mass {} still above {trunc_tol} at half-width {}",
                tail[k_probe / 2],
                k_probe as f64 * dt / 2.0
            )));
        }
        probe = (probe * 2.0).min(max_half_width);
    }
}

impl FilterSpec {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn taper(&self) -> Taper {
        self.taper
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Support half-width `W` of the truncated kernel.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn norms(&self) -> KernelNorms {
        self.norms
    }

    /// Trapezoid value of `int g`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// `2 int_W^inf |g|` as measured on the design grid.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn spectrum(&self, omega: f64) -> f64 {
        spectrum_of(self.taper, self.t0, omega)
    }

    /// Tabulated `(t, g(t))` for `t = k dt` on `[0, W]`.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let k_end = (self.half_width / self.dt).round() as usize;
        (0..=k_end).map(move |k| (k as f64 * self.dt, self.g[k]))
    }

    /// Tabulated second derivative on the same grid as [`table`](Self::table).
    pub fn second_derivative_table(&self) -> &[f64] {
        let k_end = (self.half_width / self.dt).round() as usize;
        &self.d2g[..=k_end]
    }

    /// Kernel value by cubic Hermite interpolation of the tabulated values
    /// and first derivatives; zero outside `[-W, W]`.
    pub fn kernel(&self, t: f64) -> f64 {
        let a = t.abs();
        if a >= self.half_width {
            return 0.0;
        }
        let x = a / self.dt;
        let k = x as usize;
        let s = x - k as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = 3.0 * s2 - 2.0 * s3;
        let h11 = s3 - s2;
        h00 * self.g[k] + h10 * self.dt * self.dg[k] + h01 * self.g[k + 1] + h11 * self.dt * self.dg[k + 1]
    }

    /// Writes `t,g` on `[-W, W]`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        writeln!(out, "t,g")?;
        let rows: Vec<(f64, f64)> = self.table().collect();
        for &(t, g) in rows.iter().skip(1).rev() {
            writeln!(out, "{},{}", g17(-t), g17(g))?;
        }
        for &(t, g) in &rows {
            writeln!(out, "{},{}", g17(t), g17(g))?;
        }
        out.flush()
    }

    pub fn norms_json(&self) -> String {
        #[derive(Serialize)]
        struct Block<'a> {
            #[serde(rename = "T0", serialize_with = "serialize_g17")]
            t0: f64,
            taper: Taper,
            #[serde(serialize_with = "serialize_g17")]
            dt: f64,
            #[serde(serialize_with = "serialize_g17")]
            half_width: f64,
            #[serde(flatten)]
            norms: &'a KernelNorms,
            #[serde(serialize_with = "serialize_g17")]
            c_g: f64,
            #[serde(serialize_with = "serialize_g17")]
            integral: f64,
            #[serde(serialize_with = "serialize_g17")]
            tail_mass: f64,
        }
        serde_json::to_string_pretty(&Block {
            t0: self.t0,
            taper: self.taper,
            dt: self.dt,
            half_width: self.half_width,
            norms: &self.norms,
            c_g: self.norms.c_g(),
            integral: self.integral,
            tail_mass: self.tail_mass.max(f64::MIN_POSITIVE),
        })
        .expect("finite filter summary")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// Finite sum of cosines `sum a_k cos(2 pi nu_k t + phi_k)`, normalized so
/// its sup over `[0, horizon]` (on a grid of step 1/64) is just below
/// `sup_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedSignal {
    pub components: Vec<Component>,
    pub sup_bound: f64,
    pub horizon: f64,
}

impl BandlimitedSignal {
    pub fn eval(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * (2.0 * PI * c.frequency * t + c.phase).cos())
            .sum()
    }

    pub fn dense_sup(&self) -> f64 {
        dense_sup(&self.components, self.horizon)
    }
}

fn dense_sup(components: &[Component], horizon: f64) -> f64 {
    let n = (horizon * 64.0).ceil() as usize;
    (0..=n)
        .map(|k| {
            let t = k as f64 / 64.0;
            components
                .iter()
                .map(|c| c.amplitude * (2.0 * PI * c.frequency * t + c.phase).cos())
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn gen_signal(seed: u64, n_components: usize, beta: f64) -> Result<BandlimitedSignal> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!("signal bound {beta} must lie in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components: Vec<Component> = (0..n_components)
        .map(|_| Component {
            frequency: rng.gen_range(0.0..=MAX_SIGNAL_FREQUENCY),
            amplitude: rng.gen_range(0.2..=1.0),
            phase: rng.gen_range(0.0..2.0 * PI),
        })
        .collect();
    let sup = dense_sup(&components, DEFAULT_HORIZON);
    if sup > 0.0 {
        let scale = beta * (1.0 - 1e-3) / sup;
        for c in &mut components {
            c.amplitude *= scale;
        }
    }
    Ok(BandlimitedSignal {
        components,
        sup_bound: beta,
        horizon: DEFAULT_HORIZON,
    })
}

/// Sampling at rate `T` for `n = 1..=n_samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub rate: f64,
    pub n_samples: usize,
}

impl SamplingConfig {
    pub fn new(rate: f64, n_samples: usize) -> Result<Self> {
        if !(rate > 1.0 && rate.is_finite()) {
            return Err(Error::InvalidInput(format!("sampling rate T = {rate} must exceed 1")));
        }
        Ok(SamplingConfig { rate, n_samples })
    }

    /// Window of length `4 (W + 1)` time units, so its central half keeps a
    /// margin of `W + 1` from both ends.
    pub fn for_filter(rate: f64, filter: &FilterSpec) -> Result<Self> {
        let length = 4.0 * (filter.half_width() + 1.0);
        Self::new(rate, (length * rate).ceil() as usize)
    }

    pub fn window(&self) -> (f64, f64) {
        (1.0 / self.rate, self.n_samples as f64 / self.rate)
    }

    pub fn samples(&self, signal: &BandlimitedSignal) -> Vec<f64> {
        (1..=self.n_samples).map(|n| signal.eval(n as f64 / self.rate)).collect()
    }

    /// Central half of the window at [`POINTS_PER_INTERVAL`] points per
    /// sampling interval.
    pub fn default_grid(&self) -> EvalGrid {
        let (a, b) = self.window();
        let len = b - a;
        let p = POINTS_PER_INTERVAL as f64 * self.rate;
        EvalGrid {
            rate: self.rate,
            points_per_interval: POINTS_PER_INTERVAL,
            first: ((a + 0.25 * len) * p).ceil() as i64,
            last: ((a + 0.75 * len) * p).floor() as i64,
        }
    }
}

/// Lattice `t_j = j / (points_per_interval T)` for `j = first..=last`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalGrid {
    pub rate: f64,
    pub points_per_interval: usize,
    pub first: i64,
    pub last: i64,
}

impl EvalGrid {
    pub fn len(&self) -> usize {
        (self.last - self.first + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, j: i64) -> f64 {
        j as f64 / (self.points_per_interval as f64 * self.rate)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (self.first..=self.last).map(|j| self.time(j))
    }
}

fn check_rate(rate: f64, filter: &FilterSpec) -> Result<()> {
    if !(rate >= filter.t0() + BANDWIDTH) {
        return Err(Error::InvalidInput(format!(
            "sampling rate {rate} too low for a kernel with T0 = {} (need T >= T0 + 1/2)",
            filter.t0()
        )));
    }
    Ok(())
}

/// Sample-index range whose kernel support reaches `t`, checked against the
/// stored range `first_index..first_index + len`.
fn support(first_index: i64, len: usize, rate: f64, filter: &FilterSpec, t: f64) -> Result<(i64, i64)> {
    let w = filter.half_width();
    let lo = ((t - w) * rate).ceil() as i64;
    let hi = ((t + w) * rate).floor() as i64;
    let last_index = first_index + len as i64 - 1;
    if lo < first_index || hi > last_index {
        return Err(Error::Coverage { t });
    }
    Ok((lo, hi))
}

/// `(1/T) sum_n q_n g(t - n/T)` where `q[k]` is the value at index
/// `n = first_index + k`.
pub fn reconstruct(q: &[f64], first_index: i64, rate: f64, filter: &FilterSpec, t: f64) -> Result<f64> {
    check_rate(rate, filter)?;
    let (lo, hi) = support(first_index, q.len(), rate, filter, t)?;
    let acc: f64 = (lo..=hi)
        .map(|n| q[(n - first_index) as usize] * filter.kernel(t - n as f64 / rate))
        .sum();
    Ok(acc / rate)
}

/// [`reconstruct`] on every point of a lattice grid. Kernel values are
/// shared across points since every offset `t_j - n/T` lies on the lattice.
pub fn reconstruct_grid(q: &[f64], first_index: i64, filter: &FilterSpec, grid: &EvalGrid) -> Result<Vec<f64>> {
    let rate = grid.rate;
    check_rate(rate, filter)?;
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let p = grid.points_per_interval as i64;
    let scale = grid.points_per_interval as f64 * rate;
    let m_max = (filter.half_width() * scale).ceil() as i64;
    let lattice: Vec<f64> = (0..=m_max).map(|m| filter.kernel(m as f64 / scale)).collect();
    support(first_index, q.len(), rate, filter, grid.time(grid.first))?;
    support(first_index, q.len(), rate, filter, grid.time(grid.last))?;
    Ok((grid.first..=grid.last)
        .into_par_iter()
        .map(|j| {
            let t = grid.time(j);
            let (lo, hi) = support(first_index, q.len(), rate, filter, t).expect("grid ends are covered");
            let mut acc = 0.0;
            for n in lo..=hi {
                let m = (j - p * n).unsigned_abs() as usize;
                if m < lattice.len() {
                    acc += q[(n - first_index) as usize] * lattice[m];
                }
            }
            acc / rate
        })
        .collect())
}

/// Quantization scheme driven in a reconstruction experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    DoubleLoop(SchemeParams),
    /// Single loop `u_n = u_{n-1} + f_n - q_n`, `q_n = Q(u_{n-1})`.
    SingleLoop(QuantizerKind),
}

impl Scheme {
    /// Quantizes `samples`, returning the levels and `max |v_n|` (the single
    /// loop reports `max |u_n|`).
    pub fn quantize(&self, samples: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut q = Vec::with_capacity(samples.len());
        let mut v_max: f64 = 0.0;
        match self {
            Scheme::DoubleLoop(params) => {
                quantizer::simulate(params, samples.iter().copied(), samples.len(), |r| {
                    q.push(f64::from(r.q));
                    v_max = v_max.max(r.state.v.abs());
                })?;
            }
            Scheme::SingleLoop(kind) => {
                let mut state = ModulatorState::zero();
                for &f in samples {
                    let (next, level) = quantizer::step_first_order(*kind, state, f)?;
                    state = next;
                    q.push(f64::from(level));
                    v_max = v_max.max(state.u.abs());
                }
            }
        }
        Ok((q, v_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub rate: f64,
    /// `max |f(t) - f~(t)|` over the grid.
    pub sup_error: f64,
    /// Same with unquantized samples in place of `q_n`.
    pub floor: f64,
    pub v_max: f64,
}

pub fn sup_error_report(
    signal: &BandlimitedSignal,
    scheme: &Scheme,
    sampling: &SamplingConfig,
    filter: &FilterSpec,
    grid: &EvalGrid,
) -> Result<ErrorReport> {
    let (_, window_end) = sampling.window();
    if window_end > signal.horizon {
        return Err(Error::InvalidInput(format!(
            "sampling window ends at {window_end}, beyond the signal horizon {}",
            signal.horizon
        )));
    }
    let samples = sampling.samples(signal);
    let (q, v_max) = scheme.quantize(&samples)?;
    let exact: Vec<f64> = grid.times().map(|t| signal.eval(t)).collect();
    let max_dev = |rec: Vec<f64>| {
        rec.iter()
            .zip(&exact)
            .map(|(r, f)| (r - f).abs())
            .fold(0.0, f64::max)
    };
    let sup_error = max_dev(reconstruct_grid(&q, 1, filter, grid)?);
    let floor = max_dev(reconstruct_grid(&samples, 1, filter, grid)?);
    Ok(ErrorReport {
        rate: sampling.rate,
        sup_error,
        floor,
        v_max,
    })
}

pub fn sup_error(
    signal: &BandlimitedSignal,
    params: &SchemeParams,
    rate: f64,
    filter: &FilterSpec,
    grid: &EvalGrid,
) -> Result<f64> {
    let sampling = SamplingConfig::for_filter(rate, filter)?;
    Ok(sup_error_report(signal, &Scheme::DoubleLoop(*params), &sampling, filter, grid)?.sup_error)
}

/// Least-squares slope of `ln e` against `ln T`; non-positive or
/// non-finite points are skipped.
pub fn order_fit(errors: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|(t, e)| *t > 0.0 && *e > 0.0 && t.is_finite() && e.is_finite())
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all sampling rates are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Writes `T,sup_error,bound` rows.
pub fn write_error_curve<W: Write>(rows: &[(f64, f64, f64)], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "T,sup_error,bound")?;
    for &(t, e, b) in rows {
        writeln!(out, "{},{},{}", g17(t), g17(e), g17(b))?;
    }
    out.flush()
}
