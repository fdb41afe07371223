//! Monte-Carlo falsification of `S(R) ⊆ R` for a certificate.
//!
//! Samples are drawn in fixed-size chunks, each chunk with its own PRNG
//! stream keyed by `(seed, chunk index)`, so the report does not depend on
//! how many worker threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::StabilityCertificate;
use crate::error::Result;
use crate::region::{step_region, PlanePoint, RegionSpec, MEMBERSHIP_TOL};

const CHUNK: usize = 256;
const DELTA_STREAM: u64 = u64::MAX;

/// Where a sample point was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    UpperArc,
    LowerArc,
    Segment,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub sample_index: usize,
    pub kind: SampleKind,
    pub point: PlanePoint,
    pub delta: f64,
    pub image: PlanePoint,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub n_points: usize,
    pub deltas: Vec<f64>,
    /// Largest constraint excess seen over all images (negative when every
    /// image is strictly inside).
    pub worst_excess: f64,
    /// Ordered by sample index, then by delta.
    pub violations: Vec<Violation>,
}

impl InvarianceReport {
    pub fn is_verified(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The pieces of a certificate the verifier needs.
#[derive(Debug, Clone, Copy)]
pub struct InvarianceProbe {
    pub region: RegionSpec,
    pub gamma: f64,
    pub lambda: f64,
    pub beta: f64,
    pub u1: f64,
}

impl InvarianceProbe {
    pub fn from_certificate(cert: &StabilityCertificate) -> Result<Self> {
        Ok(InvarianceProbe {
            region: cert.region()?,
            gamma: cert.gamma,
            lambda: cert.lambda,
            beta: cert.beta,
            u1: cert.u1,
        })
    }
}

pub fn verify_invariance(
    cert: &StabilityCertificate,
    n_points: usize,
    n_deltas: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    Ok(verify_probe(&InvarianceProbe::from_certificate(cert)?, n_points, n_deltas, seed))
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The two extreme errors `1 - beta`, `1 + beta` followed by uniform draws
/// in between.
fn delta_samples(beta: f64, n_deltas: usize, seed: u64) -> Vec<f64> {
    let (lo, hi) = (1.0 - beta, 1.0 + beta);
    let mut deltas = vec![lo, hi];
    let mut rng = chunk_rng(seed, DELTA_STREAM);
    for _ in 2..n_deltas.max(2) {
        deltas.push(if hi > lo { rng.gen_range(lo..=hi) } else { lo });
    }
    deltas
}

fn sample_point(probe: &InvarianceProbe, index: usize, n_points: usize, rng: &mut ChaCha8Rng) -> (SampleKind, PlanePoint) {
    let r = &probe.region;
    let u0 = r.u0();
    // 40% upper arc, 40% lower arc, 10% P1-P2 segment, 10% interior
    let frac = index as f64 / n_points as f64;
    if frac < 0.4 {
        let u = rng.gen_range(-u0..=u0);
        (SampleKind::UpperArc, PlanePoint::new(u, r.b1(u)))
    } else if frac < 0.8 {
        let u = rng.gen_range(-u0..=u0);
        (SampleKind::LowerArc, PlanePoint::new(u, r.b2(u)))
    } else if frac < 0.9 {
        let p1 = PlanePoint::new(-probe.u1, r.b1(-probe.u1));
        let p2 = -p1;
        let s: f64 = rng.gen();
        (
            SampleKind::Segment,
            PlanePoint::new(p1.u + s * (p2.u - p1.u), p1.v + s * (p2.v - p1.v)),
        )
    } else {
        let vmax = r.v_max();
        loop {
            let p = PlanePoint::new(rng.gen_range(-u0..=u0), rng.gen_range(-vmax..=vmax));
            if r.contains(p, 0.0) {
                break (SampleKind::Interior, p);
            }
        }
    }
}

/// Runs the falsification on an explicit probe; the probe need not be an
/// admissible certificate.
pub fn verify_probe(probe: &InvarianceProbe, n_points: usize, n_deltas: usize, seed: u64) -> InvarianceReport {
    let deltas = delta_samples(probe.beta, n_deltas, seed);
    let n_chunks = n_points.div_ceil(CHUNK);
    let per_chunk: Vec<(f64, Vec<Violation>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let mut worst = f64::NEG_INFINITY;
            let mut found = Vec::new();
            for index in chunk * CHUNK..((chunk + 1) * CHUNK).min(n_points) {
                let (kind, point) = sample_point(probe, index, n_points, &mut rng);
                for &delta in &deltas {
                    let image = step_region(point, delta, probe.gamma, probe.lambda);
                    let excess = probe.region.excess(image);
                    worst = worst.max(excess);
                    if !probe.region.contains(image, MEMBERSHIP_TOL) {
                        found.push(Violation {
                            sample_index: index,
                            kind,
                            point,
                            delta,
                            image,
                            excess,
                        });
                    }
                }
            }
            (worst, found)
        })
        .collect();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (worst, found) in per_chunk {
        worst_excess = worst_excess.max(worst);
        violations.extend(found);
    }
    InvarianceReport {
        n_points,
        deltas,
        worst_excess,
        violations,
    }
}
