//! Invariant-region geometry and the piecewise-affine one-step maps.
//!
//! The region `R = {(u, v) : B2(u) <= v <= B1(u)}` is bounded above and
//! below by piecewise quadratics that meet at `(+-u0, .)`. The switching
//! line `u + gamma v = 0` splits it into the half `R1` mapped by `S_l` and
//! the half `R2` mapped by `S_r`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Bound, Error, Result};
use crate::format::g17;

/// Absolute tolerance for region membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub u: f64,
    pub v: f64,
}

impl PlanePoint {
    pub fn new(u: f64, v: f64) -> Self {
        PlanePoint { u, v }
    }
}

impl std::ops::Neg for PlanePoint {
    type Output = PlanePoint;
    fn neg(self) -> PlanePoint {
        PlanePoint { u: -self.u, v: -self.v }
    }
}

/// Region `R` determined by the quantization-error bound `alpha` and the
/// size constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    alpha: f64,
    c: f64,
    delta_l: f64,
    delta_h: f64,
    u0: f64,
}

impl RegionSpec {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::infeasible(Bound::Alpha, format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("C = {c} must be finite and >= 0")));
        }
        let delta_l = 1.0 - alpha;
        let delta_h = 1.0 + alpha;
        Ok(RegionSpec {
            alpha,
            c,
            delta_l,
            delta_h,
            u0: (2.0 * c * delta_h * delta_l).sqrt(),
        })
    }

    /// Region with the smallest admissible constant `C = 2 dH / dL`.
    pub fn minimal(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0).and_then(|r| Self::new(alpha, r.c_min()))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta_l(&self) -> f64 {
        self.delta_l
    }

    pub fn delta_h(&self) -> f64 {
        self.delta_h
    }

    /// Lower bound on `C` for which the multiplier interval is non-empty.
    pub fn c_min(&self) -> f64 {
        2.0 * self.delta_h / self.delta_l
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// `max |v|` over the region, attained on `B1` at `u = dL / 2`.
    pub fn v_max(&self) -> f64 {
        self.c + self.delta_l / 8.0
    }

    pub fn b1(&self, u: f64) -> f64 {
        let curvature = if u <= 0.0 { self.delta_h } else { self.delta_l };
        -u * u / (2.0 * curvature) + 0.5 * u + self.c
    }

    pub fn b2(&self, u: f64) -> f64 {
        let curvature = if u <= 0.0 { self.delta_l } else { self.delta_h };
        u * u / (2.0 * curvature) + 0.5 * u - self.c
    }

    /// Left corner `P0 = (-u0, B1(-u0))`.
    pub fn p0(&self) -> PlanePoint {
        PlanePoint::new(-self.u0, self.b1(-self.u0))
    }

    pub fn contains(&self, p: PlanePoint, tol: f64) -> bool {
        p.u.abs() <= self.u0 + tol && p.v <= self.b1(p.u) + tol && p.v >= self.b2(p.u) - tol
    }

    /// Signed distance outside the region, in the sense of the largest
    /// violated constraint; `<= 0` inside.
    pub fn excess(&self, p: PlanePoint) -> f64 {
        (p.v - self.b1(p.u))
            .max(self.b2(p.u) - p.v)
            .max(p.u.abs() - self.u0)
    }

    /// Multiplier whose switching line meets `B1` at `(-u1, B1(-u1))`.
    pub fn gamma_from_u1(&self, u1: f64) -> Result<f64> {
        if !(u1 > 0.0 && u1 < self.u0) {
            return Err(Error::NoSolution(format!("u1 = {u1} outside (0, u0 = {})", self.u0)));
        }
        let height = self.b1(-u1);
        if height <= 0.0 {
            return Err(Error::NoSolution(format!("B1(-u1) = {height} is not positive")));
        }
        Ok(u1 / height)
    }

    /// Inverse of [`gamma_from_u1`](Self::gamma_from_u1): the positive root of
    /// `gamma u^2 / (2 dH) + (1 + gamma/2) u - gamma C = 0`.
    pub fn u1_from_gamma(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::NoSolution(format!("gamma = {gamma} must be positive")));
        }
        let b = 1.0 + 0.5 * gamma;
        let disc = b * b + 2.0 * gamma * gamma * self.c / self.delta_h;
        // rationalized positive root, stable as gamma -> 0
        let u1 = 2.0 * gamma * self.c / (b + disc.sqrt());
        if !(u1 > 0.0 && u1 < self.u0) {
            return Err(Error::NoSolution(format!(
                "gamma = {gamma} is not attainable: switching line meets B1 at u1 = {u1}, u0 = {}",
                self.u0
            )));
        }
        Ok(u1)
    }

    /// Multiplier interval for which the switching line meets `B1` with
    /// `dH <= u1 <= u0 - dH`.
    pub fn yilmaz_gamma_range(&self) -> Result<GammaRange> {
        if self.c < self.c_min() {
            return Err(Error::infeasible(
                Bound::LowerC,
                format!("C = {} below 2(1+alpha)/(1-alpha) = {}", self.c, self.c_min()),
            ));
        }
        let lo = self.delta_h / (self.c - self.delta_h);
        let hi = (self.u0 - self.delta_h) / (self.c * self.alpha + 0.5 * self.u0);
        if lo > hi * (1.0 + 1e-12) {
            return Err(Error::infeasible(Bound::GammaRange, format!("empty interval [{lo}, {hi}]")));
        }
        Ok(GammaRange { lo, hi: hi.max(lo) })
    }

    /// Writes `u,B1,B2` on `n_points` evenly spaced abscissae spanning `[-u0, u0]`.
    pub fn write_boundary_csv<W: Write>(&self, n_points: usize, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        writeln!(out, "u,B1,B2")?;
        let n = n_points.max(2);
        for k in 0..n {
            let u = -self.u0 + 2.0 * self.u0 * k as f64 / (n - 1) as f64;
            writeln!(out, "{},{},{}", g17(u), g17(self.b1(u)), g17(self.b2(u)))?;
        }
        out.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRange {
    pub lo: f64,
    pub hi: f64,
}

impl GammaRange {
    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.lo && gamma <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Left move `(lambda u - delta, lambda u + v - delta)`.
#[inline]
pub fn map_sl(p: PlanePoint, delta: f64, lambda: f64) -> PlanePoint {
    let lu = lambda * p.u;
    PlanePoint::new(lu - delta, lu + p.v - delta)
}

/// Right move `(lambda u + delta, lambda u + v + delta)`.
#[inline]
pub fn map_sr(p: PlanePoint, delta: f64, lambda: f64) -> PlanePoint {
    let lu = lambda * p.u;
    PlanePoint::new(lu + delta, lu + p.v + delta)
}

/// One step of the region dynamics: left move on `u + gamma v >= 0`,
/// right move otherwise, matching `Q(0) = +1`.
#[inline]
pub fn step_region(p: PlanePoint, delta: f64, gamma: f64, lambda: f64) -> PlanePoint {
    if p.u + gamma * p.v >= 0.0 {
        map_sl(p, delta, lambda)
    } else {
        map_sr(p, delta, lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec6() -> RegionSpec {
        RegionSpec::new(0.5, 6.0).unwrap()
    }

    #[test]
    fn hand_values() {
        let r = spec6();
        assert_eq!(r.b1(0.0), 6.0);
        assert_eq!(r.u0(), 3.0);
        assert!((r.b1(-3.0) - 1.5).abs() < 1e-15);
        assert!((r.b2(-3.0) - 1.5).abs() < 1e-15);
        assert_eq!(r.c_min(), 6.0);
        assert_eq!(RegionSpec::new(0.5, 0.0).unwrap().u0(), 0.0);
        assert_eq!(RegionSpec::minimal(0.5).unwrap(), r);
    }

    #[test]
    fn alpha_bounds() {
        assert!(RegionSpec::new(0.0, 1.0).is_err());
        assert!(RegionSpec::new(1.0, 1.0).is_err());
        assert!(RegionSpec::new(0.5, -1.0).is_err());
    }

    #[test]
    fn membership() {
        let r = spec6();
        assert!(r.contains(PlanePoint::new(0.0, 0.0), 0.0));
        assert!(!r.contains(PlanePoint::new(0.0, 7.0), 0.0));
        assert!(r.contains(r.p0(), 1e-12));
        assert!(!r.contains(PlanePoint::new(3.1, 0.0), 1e-9));
        assert!(r.excess(PlanePoint::new(0.0, 0.0)) < 0.0);
    }

    #[test]
    fn gamma_u1_hand_value_and_limits() {
        let r = spec6();
        let g = r.gamma_from_u1(1.5).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.u1_from_gamma(1.0 / 3.0).unwrap() - 1.5).abs() < 1e-12);
        assert!(r.gamma_from_u1(1e-9).unwrap() < 1e-9);
        assert!(r.u1_from_gamma(1e-12).unwrap() < 1e-11);
        assert!(matches!(r.u1_from_gamma(5.0), Err(Error::NoSolution(_))));
        assert!(r.u1_from_gamma(-1.0).is_err());
        assert!(r.gamma_from_u1(3.5).is_err());
    }

    #[test]
    fn yilmaz_range_at_c_min_is_a_point() {
        let range = spec6().yilmaz_gamma_range().unwrap();
        assert!((range.lo - 1.0 / 3.0).abs() < 1e-15);
        assert!((range.hi - 1.0 / 3.0).abs() < 1e-15);
        let below = RegionSpec::new(0.5, 6.0 - 0.01).unwrap();
        assert!(matches!(
            below.yilmaz_gamma_range(),
            Err(Error::Infeasible { bound: Bound::LowerC, .. })
        ));
    }

    #[test]
    fn maps() {
        let p = PlanePoint::new(2.0, 3.0);
        assert_eq!(map_sl(p, 1.0, 1.0), PlanePoint::new(1.0, 4.0));
        assert_eq!(map_sr(p, 1.0, 1.0), PlanePoint::new(3.0, 6.0));
        let q = map_sl(PlanePoint::new(1.0, 0.0), 1.0, 1.05);
        assert!((q.u - 0.05).abs() < 1e-15 && (q.v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn step_region_tie_goes_left() {
        let out = step_region(PlanePoint::new(0.0, 0.0), 0.7, 0.5, 1.0);
        assert_eq!(out, PlanePoint::new(-0.7, -0.7));
        let p = PlanePoint::new(1.0, -0.5);
        assert_eq!(step_region(p, 0.9, 1.0, 1.02), map_sl(p, 0.9, 1.02));
        let p = PlanePoint::new(-1.0, 0.5);
        assert_eq!(step_region(p, 0.9, 1.0, 1.02), map_sr(p, 0.9, 1.02));
    }

    #[test]
    fn boundary_csv() {
        let mut buf = Vec::new();
        spec6().write_boundary_csv(5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "u,B1,B2");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "-3,1.5,1.5");
        assert_eq!(lines[3], "0,6,-6");
    }
}
