//! Admissible-parameter calculators for the one-parameter chaotic scheme.
//!
//! A certificate is a tuple `(alpha, lambda, epsilon, C, gamma, beta)` for
//! which the region `R(alpha, C)` is mapped into itself whenever the input
//! satisfies `|f_n| <= beta`; consequently `|v_n| <= C + (1-alpha)/8`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Bound, Error, Result};
use crate::format::serialize_g17;
use crate::region::{GammaRange, RegionSpec};

/// Which coefficient multiplies `(1+alpha)(lambda-1)` in the fixed-gamma
/// dynamic range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Variant {
    /// Coefficient `2 sqrt 2`, the closed form as printed.
    #[serde(rename = "eq5-literal")]
    Eq5Literal,
    /// Coefficient `2`, from substituting the smallest admissible epsilon
    /// into `beta = (alpha - epsilon) / (1 + epsilon)`.
    #[default]
    #[serde(rename = "remark-derived")]
    RemarkDerived,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Eq5Literal => "eq5-literal",
            Variant::RemarkDerived => "remark-derived",
        }
    }

    fn coefficient(self) -> f64 {
        match self {
            Variant::Eq5Literal => 2.0 * std::f64::consts::SQRT_2,
            Variant::RemarkDerived => 2.0,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq5" | "eq5-literal" => Ok(Variant::Eq5Literal),
            "remark" | "remark-derived" => Ok(Variant::RemarkDerived),
            other => Err(Error::InvalidInput(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    #[serde(serialize_with = "serialize_g17")]
    pub alpha: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub lambda: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub epsilon: f64,
    #[serde(rename = "C", serialize_with = "serialize_g17")]
    pub c: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub gamma: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub gamma_lo: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub gamma_hi: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub beta: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub v_max_bound: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub u0: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub u1: f64,
    pub variant: Variant,
}

impl StabilityCertificate {
    pub fn region(&self) -> Result<RegionSpec> {
        RegionSpec::new(self.alpha, self.c)
    }

    pub fn gamma_range(&self) -> GammaRange {
        GammaRange {
            lo: self.gamma_lo,
            hi: self.gamma_hi,
        }
    }

    /// Zero dynamic range: only the all-zero input is covered.
    pub fn is_degenerate(&self) -> bool {
        self.beta <= 0.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate fields are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// Checks the inequality chain the certificate claims.
    pub fn check(&self) -> Result<()> {
        let tol = 1e-12;
        let region = self.region()?;
        let (dl, dh) = (region.delta_l(), region.delta_h());
        let (eps_lo, eps_hi) = epsilon_range(self.alpha, self.lambda)?;
        if self.epsilon < eps_lo * (1.0 - tol) || self.epsilon > eps_hi * (1.0 + tol) {
            return Err(Error::infeasible(Bound::Eps2, format!("epsilon = {}", self.epsilon)));
        }
        let (c_lo, c_hi) = c_range(self.alpha, self.lambda, self.epsilon)?;
        if self.c < c_lo * (1.0 - tol) || self.c > c_hi * (1.0 + tol) {
            return Err(Error::infeasible(Bound::C2, format!("C = {} outside [{c_lo}, {c_hi}]", self.c)));
        }
        if !(self.gamma >= self.gamma_lo * (1.0 - tol) && self.gamma <= self.gamma_hi * (1.0 + tol)) {
            return Err(Error::infeasible(Bound::GammaRange, format!("gamma = {}", self.gamma)));
        }
        if !(self.u1 >= dh * (1.0 - tol) && self.u1 <= (region.u0() - dh) * (1.0 + tol) + tol) {
            return Err(Error::infeasible(Bound::GammaRange, format!("u1 = {}", self.u1)));
        }
        let beta = (self.alpha - self.epsilon) / (1.0 + self.epsilon);
        if (beta - self.beta).abs() > 1e-12 || !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::infeasible(Bound::BetaPositive, format!("beta = {}", self.beta)));
        }
        if (self.v_max_bound - (self.c + dl / 8.0)).abs() > 1e-12 * self.v_max_bound.max(1.0) {
            return Err(Error::InvalidInput(format!("v_max_bound = {}", self.v_max_bound)));
        }
        Ok(())
    }
}

fn check_alpha_lambda(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::infeasible(Bound::Alpha, format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::infeasible(Bound::Lambda, format!("lambda = {lambda} must be >= 1")));
    }
    Ok(())
}

/// Largest expansion for which the epsilon interval is non-empty:
/// `1 + alpha(1-alpha) / (2(1+alpha))`.
pub fn lambda_cutoff(alpha: f64) -> f64 {
    1.0 + alpha * (1.0 - alpha) / (2.0 * (1.0 + alpha))
}

/// `[2 dH (lambda-1) / dL, alpha]`.
pub fn epsilon_range(alpha: f64, lambda: f64) -> Result<(f64, f64)> {
    check_alpha_lambda(alpha, lambda)?;
    if lambda > lambda_cutoff(alpha) {
        return Err(Error::infeasible(
            Bound::Lambda2,
            format!("lambda = {lambda} exceeds 1 + alpha(1-alpha)/(2(1+alpha)) = {}", lambda_cutoff(alpha)),
        ));
    }
    let lo = 2.0 * (1.0 + alpha) * (lambda - 1.0) / (1.0 - alpha);
    Ok((lo.min(alpha), alpha))
}

/// `[2 dH / dL, epsilon^2 dL / (2 dH (lambda-1)^2)]`; the upper end is
/// infinite at `lambda = 1`.
pub fn c_range(alpha: f64, lambda: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_alpha_lambda(alpha, lambda)?;
    let dl = 1.0 - alpha;
    let dh = 1.0 + alpha;
    let lo = 2.0 * dh / dl;
    let hi = if lambda == 1.0 {
        f64::INFINITY
    } else {
        let d = lambda - 1.0;
        epsilon * epsilon * dl / (2.0 * dh * d * d)
    };
    Ok((lo, hi))
}

/// Fixed-gamma dynamic range of the given variant; may be negative.
pub fn thm1_beta(alpha: f64, lambda: f64, variant: Variant) -> f64 {
    let k = variant.coefficient() * (1.0 + alpha) * (lambda - 1.0);
    (alpha * (1.0 - alpha) - k) / (1.0 - alpha + k)
}

/// Certificate with `gamma = (1-alpha)/(1+alpha)` and `C = 2(1+alpha)/(1-alpha)`.
pub fn thm1_certificate(alpha: f64, lambda: f64, variant: Variant) -> Result<StabilityCertificate> {
    check_alpha_lambda(alpha, lambda)?;
    if lambda > lambda_cutoff(alpha) {
        return Err(Error::infeasible(
            Bound::Lambda2,
            format!("lambda = {lambda} exceeds {} for alpha = {alpha}", lambda_cutoff(alpha)),
        ));
    }
    let beta = thm1_beta(alpha, lambda, variant);
    if !(beta > 0.0) {
        return Err(Error::infeasible(
            Bound::BetaPositive,
            format!("beta = {beta} for alpha = {alpha}, lambda = {lambda} ({variant})"),
        ));
    }
    let region = RegionSpec::minimal(alpha)?;
    let (dl, dh) = (region.delta_l(), region.delta_h());
    // The chosen beta equals (alpha - eps)/(1 + eps) for this eps; the
    // eq5 variant corresponds to sqrt(2) times the smallest admissible eps.
    let epsilon = variant.coefficient() * dh * (lambda - 1.0) / dl;
    let gamma = dl / dh;
    let range = region.yilmaz_gamma_range()?;
    Ok(StabilityCertificate {
        alpha,
        lambda,
        epsilon,
        c: region.c(),
        gamma,
        gamma_lo: range.lo,
        gamma_hi: range.hi,
        beta,
        v_max_bound: 2.0 * dh / dl + dl / 8.0,
        u0: region.u0(),
        u1: dh,
        variant,
    })
}

/// General certificate for a chosen `epsilon`.
///
/// `C` is the geometric mean of its admissible interval (the lower end when
/// the interval is unbounded); without `gamma_choice` the multiplier is the
/// one whose switching line meets `B1` at the midpoint of `[dH, u0 - dH]`.
pub fn thm2_certificate(
    alpha: f64,
    lambda: f64,
    epsilon: f64,
    gamma_choice: Option<f64>,
) -> Result<StabilityCertificate> {
    let (eps_lo, eps_hi) = epsilon_range(alpha, lambda)?;
    // relative slack absorbs the rounding of a hand-computed smallest epsilon
    if !(epsilon >= eps_lo * (1.0 - 1e-12) && epsilon <= eps_hi * (1.0 + 1e-12)) {
        return Err(Error::infeasible(
            Bound::Eps2,
            format!("epsilon = {epsilon} outside [{eps_lo}, {eps_hi}]"),
        ));
    }
    let (c_lo, c_hi) = c_range(alpha, lambda, epsilon)?;
    if c_lo > c_hi * (1.0 + 1e-12) {
        return Err(Error::infeasible(Bound::C2, format!("empty C interval [{c_lo}, {c_hi}]")));
    }
    let c = if c_hi.is_finite() {
        (c_lo * c_hi).sqrt().clamp(c_lo, c_hi.max(c_lo))
    } else {
        c_lo
    };
    let region = RegionSpec::new(alpha, c)?;
    let dh = region.delta_h();
    let range = region.yilmaz_gamma_range()?;
    let (gamma, u1) = match gamma_choice {
        Some(g) => {
            if !range.contains(g) {
                return Err(Error::infeasible(
                    Bound::GammaRange,
                    format!("gamma = {g} outside [{}, {}]", range.lo, range.hi),
                ));
            }
            (g, region.u1_from_gamma(g)?.clamp(dh, (region.u0() - dh).max(dh)))
        }
        None => {
            let u1 = 0.5 * (dh + (region.u0() - dh));
            let g = region.gamma_from_u1(u1)?.clamp(range.lo, range.hi);
            (g, u1)
        }
    };
    Ok(StabilityCertificate {
        alpha,
        lambda,
        epsilon,
        c,
        gamma,
        gamma_lo: range.lo,
        gamma_hi: range.hi,
        beta: (alpha - epsilon) / (1.0 + epsilon),
        v_max_bound: region.v_max(),
        u0: region.u0(),
        u1,
        variant: Variant::RemarkDerived,
    })
}

/// Maximum of the fixed-gamma dynamic range over `alpha in (0, alpha_cap]`.
///
/// Returns `(beta_max, alpha_star)`, or `(0, alpha_star)` when no positive
/// value exists, `alpha_star` then being the grid maximiser.
pub fn max_beta_theoretical(lambda: f64, alpha_cap: f64, variant: Variant) -> (f64, f64) {
    const GRID: f64 = 1e-4;
    let cap = alpha_cap.clamp(GRID, 1.0 - 1e-12);
    let beta = |a: f64| thm1_beta(a, lambda, variant);
    let n = (cap / GRID).floor() as usize;
    let mut grid: Vec<f64> = (1..=n).map(|k| k as f64 * GRID).collect();
    if grid.last().map_or(true, |&a| a < cap) {
        grid.push(cap);
    }
    let (best_idx, _) = grid
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &a)| {
            let b = beta(a);
            if b > bv {
                (i, b)
            } else {
                (bi, bv)
            }
        });
    let (mut lo, mut hi) = (
        if best_idx == 0 { grid[0] * 0.5 } else { grid[best_idx - 1] },
        if best_idx + 1 < grid.len() { grid[best_idx + 1] } else { grid[best_idx] },
    );
    let mut alpha_star = grid[best_idx];
    if hi > lo {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (beta(x1), beta(x2));
        while hi - lo > 1e-13 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = beta(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = beta(x1);
            }
        }
        let refined = 0.5 * (lo + hi);
        if beta(refined) > beta(alpha_star) {
            alpha_star = refined;
        }
    }
    let best = beta(alpha_star);
    if best > 0.0 {
        (best, alpha_star)
    } else {
        (0.0, alpha_star)
    }
}

/// Smallest `alpha` on the rising branch `(0, alpha_star]` whose fixed-gamma
/// dynamic range reaches `beta`; clamps to `alpha_star` beyond the maximum.
pub fn alpha_for_beta(beta: f64, lambda: f64, alpha_cap: f64, variant: Variant) -> Option<f64> {
    let (beta_max, alpha_star) = max_beta_theoretical(lambda, alpha_cap, variant);
    if beta_max <= 0.0 {
        return None;
    }
    if beta >= beta_max {
        return Some(alpha_star);
    }
    let (mut lo, mut hi) = (0.0, alpha_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if thm1_beta(mid, lambda, variant) >= beta {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(hi.max(f64::MIN_POSITIVE))
}

/// Comparison of the closed-form multiplier interval stated for the general
/// certificate against the interval derived at each end of the `C` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRangeComparison {
    pub closed_form: GammaRange,
    pub at_c_min: GammaRange,
    pub at_c_max: GammaRange,
    /// Union of the derived intervals over all admissible `C`.
    pub union: GammaRange,
    pub lower_matches_c_max: bool,
    pub contained: bool,
}

/// Evaluates the closed-form interval
/// `[2 dH^2 d^2 / (eps^2 dL - 2 dH^2 d^2), (eps dL^2 - dH dL d) / (dH^2 d)]`
/// with `d = lambda - 1` and checks containment in the union of the
/// derived intervals.
pub fn compare_gamma_ranges(alpha: f64, lambda: f64, epsilon: f64) -> Result<GammaRangeComparison> {
    if lambda <= 1.0 {
        return Err(Error::InvalidInput("closed form requires lambda > 1".into()));
    }
    let (c_lo, c_hi) = c_range(alpha, lambda, epsilon)?;
    let dl = 1.0 - alpha;
    let dh = 1.0 + alpha;
    let d = lambda - 1.0;
    let closed_form = GammaRange {
        lo: 2.0 * dh * dh * d * d / (epsilon * epsilon * dl - 2.0 * dh * dh * d * d),
        hi: (epsilon * dl * dl - dh * dl * d) / (dh * dh * d),
    };
    let at_c_min = RegionSpec::new(alpha, c_lo)?.yilmaz_gamma_range()?;
    let at_c_max = RegionSpec::new(alpha, c_hi)?.yilmaz_gamma_range()?;
    // lower end decreases in C; the upper end is unimodal, so scan it
    let samples = 4096;
    let mut union = GammaRange {
        lo: at_c_max.lo,
        hi: at_c_min.hi.max(at_c_max.hi),
    };
    for k in 0..=samples {
        let c = c_lo * (c_hi / c_lo).powf(k as f64 / samples as f64);
        if let Ok(r) = RegionSpec::new(alpha, c).and_then(|s| s.yilmaz_gamma_range()) {
            union.lo = union.lo.min(r.lo);
            union.hi = union.hi.max(r.hi);
        }
    }
    let tol = 1e-9;
    Ok(GammaRangeComparison {
        closed_form,
        at_c_min,
        at_c_max,
        union,
        lower_matches_c_max: (closed_form.lo - at_c_max.lo).abs() <= tol * closed_form.lo.abs().max(1.0),
        contained: closed_form.lo >= union.lo - tol && closed_form.hi <= union.hi + tol,
    })
}
