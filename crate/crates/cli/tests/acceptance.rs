//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdlab_core::certificate::{epsilon_range, lambda_cutoff, thm1_beta, thm1_certificate, thm2_certificate, Variant};
use sdlab_core::invariance::verify_invariance;
use sdlab_core::quantizer::{residual_identity, run, simulate, uniform_input, QuantizerKind, SchemeParams};
use sdlab_core::region::{map_sl, PlanePoint, RegionSpec};
use sdlab_core::signal::{
    design_filter, gen_signal, order_fit, sup_error_report, SamplingConfig, Scheme, DEFAULT_T0, DEFAULT_TRUNC_TOL,
};
use sdlab_core::sweep::{fig1_cutoff as fig1_cutoff_lambda, lambda_grid, run_fig1, run_fig2, vmax_at_theoretical, SweepConfig};
use sdlab_core::StabilityCertificate;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("runtime {:.1} s exceeds {limit_s} s", elapsed.as_secs_f64())
    })
}

fn sdlab(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sdlab"))
        .args(args)
        .env_remove("SD_LAB_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "sdlab {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn last_positive_lambda(csv: &[u8]) -> Result<f64, String> {
    let text = String::from_utf8(csv.to_vec()).map_err(|e| e.to_string())?;
    let mut best = None;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().map_err(|_| line.to_string())).collect::<Result<_, _>>()?;
        if cols[1] > 0.0 {
            best = Some(best.map_or(cols[0], |b: f64| b.max(cols[0])));
        }
    }
    best.ok_or_else(|| "no row with positive beta_max".to_string())
}

fn fig1_cutoff() -> Outcome {
    let start = Instant::now();
    let remark = last_positive_lambda(&sdlab(&["sweep", "fig1", "--variant", "remark"])?)?;
    let eq5 = last_positive_lambda(&sdlab(&["sweep", "fig1", "--variant", "eq5"])?)?;
    let elapsed = start.elapsed();
    ensure((remark - 1.0858).abs() <= 0.002, || format!("remark cutoff {remark}"))?;
    ensure((eq5 - 1.0607).abs() <= 0.002, || format!("eq5 cutoff {eq5}"))?;
    within(elapsed, 10.0)?;
    let fine = lambda_grid(1.05, 1.1, 1e-4);
    let fine_remark = fig1_cutoff_lambda(&run_fig1(&fine, 0.99, Variant::RemarkDerived)).unwrap_or(f64::NAN);
    let fine_eq5 = fig1_cutoff_lambda(&run_fig1(&fine, 0.99, Variant::Eq5Literal)).unwrap_or(f64::NAN);
    Ok(format!(
        "remark cutoff {remark:.4}, eq5 cutoff {eq5:.4} on the default grid; {fine_remark:.4} and {fine_eq5:.4} at step 1e-4 ({:.2} s)",
        elapsed.as_secs_f64()
    ))
}

fn unit_lambda_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        for variant in [Variant::RemarkDerived, Variant::Eq5Literal] {
            let cert = thm1_certificate(alpha, 1.0, variant).map_err(|e| e.to_string())?;
            worst = worst.max((cert.beta - alpha).abs());
        }
        let range = RegionSpec::minimal(alpha)
            .and_then(|r| r.yilmaz_gamma_range())
            .map_err(|e| e.to_string())?;
        let target = (1.0 - alpha) / (1.0 + alpha);
        worst = worst.max((range.lo - target).abs()).max((range.hi - target).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

/// single-parameter certificate at a random admissible `(alpha, lambda)`.
fn random_thm1(rng: &mut ChaCha8Rng, variant: Variant, lambda_max: f64) -> StabilityCertificate {
    loop {
        let alpha = rng.gen_range(0.05..0.95);
        let lambda = rng.gen_range(1.0..=lambda_max);
        if lambda <= lambda_cutoff(alpha) && thm1_beta(alpha, lambda, variant) > 0.0 {
            if let Ok(c) = thm1_certificate(alpha, lambda, variant) {
                return c;
            }
        }
    }
}

fn random_thm2(rng: &mut ChaCha8Rng, lambda_max: f64) -> StabilityCertificate {
    loop {
        let alpha = rng.gen_range(0.05..0.95);
        let lambda = rng.gen_range(1.0..=lambda_max);
        let Ok((lo, hi)) = epsilon_range(alpha, lambda) else { continue };
        let eps = rng.gen_range(lo..=hi);
        if let Ok(c) = thm2_certificate(alpha, lambda, eps, None) {
            return c;
        }
    }
}

fn invariance_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let variant = if i % 2 == 0 { Variant::RemarkDerived } else { Variant::Eq5Literal };
        let cert = random_thm1(&mut rng, variant, 1.05);
        let report = verify_invariance(&cert, 2000, 50, 1000 + i).map_err(|e| e.to_string())?;
        worst = worst.max(report.worst_excess);
        ensure(report.is_verified(), || {
            format!(
                "certificate alpha={} lambda={} ({variant}): {} exits, worst excess {:e}",
                cert.alpha,
                cert.lambda,
                report.violations.len(),
                report.worst_excess
            )
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 60.0)?;
    Ok(format!("50 certificates, 0 exits, worst excess {worst:e} ({:.1} s)", elapsed.as_secs_f64()))
}

fn boundedness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut worst_ratio: f64 = 0.0;
    for i in 0..20u64 {
        let cert = if i < 14 {
            let variant = if i % 2 == 0 { Variant::RemarkDerived } else { Variant::Eq5Literal };
            let c = random_thm1(&mut rng, variant, 1.08);
            let formula = 2.0 * (1.0 + c.alpha) / (1.0 - c.alpha) + (1.0 - c.alpha) / 8.0;
            ensure((c.v_max_bound - formula).abs() <= 1e-12 * formula, || {
                format!("v_max bound {} differs from {formula}", c.v_max_bound)
            })?;
            c
        } else {
            random_thm2(&mut rng, 1.08)
        };
        let params = SchemeParams::one_parameter(cert.lambda, cert.gamma).map_err(|e| e.to_string())?;
        let mut v_max: f64 = 0.0;
        simulate(&params, uniform_input(500 + i, cert.beta), 1_000_000, |r| {
            v_max = v_max.max(r.state.v.abs())
        })
        .map_err(|e| format!("alpha={} lambda={}: {e}", cert.alpha, cert.lambda))?;
        ensure(v_max <= cert.v_max_bound + 1e-9, || {
            format!("alpha={} lambda={}: |v| reached {v_max} > {}", cert.alpha, cert.lambda, cert.v_max_bound)
        })?;
        worst_ratio = worst_ratio.max(v_max / cert.v_max_bound);
    }
    let elapsed = start.elapsed();
    within(elapsed, 60.0)?;
    Ok(format!(
        "20 pairs x 1e6 steps, max |v|/bound {worst_ratio:.3} ({:.1} s)",
        elapsed.as_secs_f64()
    ))
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let mut worst_residual: f64 = 0.0;
    for i in 0..20u64 {
        let l1 = rng.gen_range(1.0..=1.1);
        let l2 = rng.gen_range(1.0..=1.1);
        let params = SchemeParams::new(l1, l2, 0.5, QuantizerKind::Sign).map_err(|e| e.to_string())?;
        let traj = run(&params, uniform_input(i, 0.1), 100_000).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(residual_identity(&traj).map_err(|e| e.to_string())?);
    }
    ensure(worst_residual < 1e-10, || format!("residual {worst_residual:e}"))?;
    let mut worst_conj: f64 = 0.0;
    for _ in 0..10_000 {
        let p = PlanePoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-20.0..20.0));
        let delta = rng.gen_range(0.0..2.0);
        let lambda = rng.gen_range(1.0..1.1);
        let a = map_sl(p, delta, lambda);
        let b = map_sl(p, delta - (lambda - 1.0) * p.u, 1.0);
        let scale = lambda * p.u.abs() + p.v.abs() + delta;
        worst_conj = worst_conj.max((a.u - b.u).abs().max((a.v - b.v).abs()) / scale);
    }
    ensure(worst_conj <= 1e-15, || format!("conjugacy deviation {worst_conj:e}"))?;
    Ok(format!("residual {worst_residual:e}, conjugacy {worst_conj:e} relative"))
}

fn second_order_accuracy() -> Outcome {
    let start = Instant::now();
    let filter = design_filter(DEFAULT_T0, DEFAULT_TRUNC_TOL).map_err(|e| e.to_string())?;
    let norms = filter.norms();
    let beta = 0.4;
    let signal = gen_signal(7, 6, beta).map_err(|e| e.to_string())?;
    let gamma = (1.0 - beta) / (1.0 + beta);
    let mut standard = Vec::new();
    let mut notes = Vec::new();
    for rate in [32.0, 64.0, 128.0, 256.0] {
        let sampling = SamplingConfig::for_filter(rate, &filter).map_err(|e| e.to_string())?;
        let grid = sampling.default_grid();
        let std_params = SchemeParams::standard(gamma).map_err(|e| e.to_string())?;
        let rep = sup_error_report(&signal, &Scheme::DoubleLoop(std_params), &sampling, &filter, &grid)
            .map_err(|e| e.to_string())?;
        ensure(rep.floor * 10.0 <= rep.sup_error, || {
            format!("T={rate}: unquantized floor {:e} not 10x below {:e}", rep.floor, rep.sup_error)
        })?;
        standard.push((rate, rep.sup_error));

        let l = 1.0 + 1.0 / rate;
        let chaotic = SchemeParams::new(l, l, gamma, QuantizerKind::Sign).map_err(|e| e.to_string())?;
        let rep = sup_error_report(&signal, &Scheme::DoubleLoop(chaotic), &sampling, &filter, &grid)
            .map_err(|e| e.to_string())?;
        let bound = rep.v_max * norms.c_g() / (rate * rate);
        ensure(rep.sup_error <= bound, || {
            format!("T={rate}: chaotic error {:e} > bound {bound:e}", rep.sup_error)
        })?;
        notes.push(format!("T={rate}: {:.2e}<={bound:.2e}", rep.sup_error));
    }
    let slope = order_fit(&standard).map_err(|e| e.to_string())?;
    ensure(slope <= -1.9, || format!("slope {slope}"))?;
    let elapsed = start.elapsed();
    within(elapsed, 300.0)?;
    Ok(format!(
        "slope {slope:.3}, C_g {:.2}, chaotic {} ({:.1} s)",
        norms.c_g(),
        notes.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn dominance_config() -> SweepConfig {
    SweepConfig {
        lambda_grid: lambda_grid(1.0, 1.06, 0.01),
        max_iters: 1_000_000,
        bisect_tol: 1e-3,
        ..SweepConfig::default()
    }
}

fn threshold_dominance() -> Outcome {
    let start = Instant::now();
    let rows = run_fig2(&dominance_config()).map_err(|e| e.to_string())?;
    let mut min_gap = f64::INFINITY;
    for r in &rows {
        let theory = r.beta_theoretical.ok_or_else(|| format!("no certificate at lambda {}", r.lambda))?;
        let observed = r.beta_observed.ok_or_else(|| format!("no threshold at lambda {}", r.lambda))?;
        ensure(observed >= theory - 1e-3, || {
            format!("lambda {}: observed {observed} < theoretical {theory}", r.lambda)
        })?;
        min_gap = min_gap.min(observed - theory);
    }
    let elapsed = start.elapsed();
    within(elapsed, 600.0)?;
    Ok(format!("{} rows, min gap {min_gap:.4} ({:.1} s)", rows.len(), elapsed.as_secs_f64()))
}

fn vmax_near_optimality() -> Outcome {
    let cfg = SweepConfig {
        max_iters: 1_000_000,
        ..SweepConfig::default()
    };
    let rows = vmax_at_theoretical(&cfg).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for r in rows.iter().flatten() {
        ensure(r.vmax_measured <= r.vmax_theoretical, || {
            format!("lambda {}: measured {} > bound {}", r.lambda, r.vmax_measured, r.vmax_theoretical)
        })?;
        ratios.push(format!("{:.3}:{:.3}", r.lambda, r.ratio()));
    }
    ensure(!ratios.is_empty(), || "no certified grid point".into())?;
    Ok(format!("{} certified rows, lambda:ratio {}", ratios.len(), ratios.join(" ")))
}

fn reproducibility() -> Outcome {
    let base = [
        "--lambda-max", "1.06", "--lambda-step", "0.01", "--input", "random", "--max-iters", "20000",
    ];
    let mut checked = 0;
    for fig in ["fig1", "fig2", "fig3", "fig4"] {
        let mut args = vec!["sweep", fig];
        args.extend_from_slice(&base);
        let a = sdlab(&[&["--workers", "1"][..], &args].concat())?;
        let b = sdlab(&[&["--workers", "3"][..], &args].concat())?;
        let c = sdlab(&[&["--workers", "1"][..], &args].concat())?;
        ensure(a == b && a == c, || format!("{fig}: outputs differ"))?;
        ensure(!a.is_empty(), || format!("{fig}: empty output"))?;
        checked += 1;
    }
    Ok(format!("{checked} sweeps byte-identical across runs and worker counts 1/3"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("fig1 cutoff", fig1_cutoff),
        ("unit-lambda reduction", unit_lambda_reduction),
        ("invariance suite", invariance_suite),
        ("boundedness", boundedness),
        ("algebraic identities", identities),
        ("second-order accuracy", second_order_accuracy),
        ("threshold dominance", threshold_dominance),
        ("v_max near-optimality", vmax_near_optimality),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
