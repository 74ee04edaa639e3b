use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fractalconv::algebra::{is_complex_pisot, pisot_scan_with_progress, IntPolynomial};
use fractalconv::ek::{
    calibrate, ek_sequence, ek_sequence_translation, ek_sequence_wide, enumerate_covers,
    predict_k, reconstruct_theta, reconstruct_u, soundness_scan, theta_ball, CalibrationParams,
    EnumerationParams,
};
use fractalconv::fourier::{ac_report, decay_exponent, ft_eval, ft_eval_many, AcParams, DecayParams};
use fractalconv::measure::{
    gasket_spec, rasterize, rotate_ifs, rotation_invariant, sample_measure,
    translation_symmetries, Bounds, DensityGrid,
};
use fractalconv::separation::{
    concentration_diagnostic, delta_n, delta_n_pruned_with, difference_set, overlap_roots,
    ConcentrationParams, DeltaMethod, PrunedOptions, SeparationResult,
};
use fractalconv::{Annulus, Budget, Complex64, Error, IfsSpec, RegionH, Result};
use serde_json::json;

use crate::args::*;
use crate::output::Outputs;

pub struct Context {
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub budget: Budget,
}

fn complex(pair: &[f64], name: &str) -> Result<Complex64> {
    match pair {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Error::InvalidParameter { name: name.into(), reason: "expects RE IM".into() }),
    }
}

pub fn load_spec(path: &Path) -> Result<IfsSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let validated = IfsSpec::from_json(&text)?;
    if validated.real_lambda_warning {
        eprintln!("warning: lambda is real; decay and absolute-continuity results assume non-real lambda");
    }
    Ok(validated.spec)
}

pub fn run(command: &Command, ctx: &Context, out: &mut Outputs) -> Result<()> {
    match command {
        Command::Validate(a) => validate(a, out),
        Command::Render(a) => render(a, ctx, out),
        Command::FourierEval(a) => fourier_eval(a, ctx, out),
        Command::Decay(a) => decay(a, ctx, out),
        Command::Delta(a) => delta(a, ctx, out),
        Command::Concentration(a) => concentration(a, ctx, out),
        Command::Overlap(a) => overlap(a, ctx, out),
        Command::EkSeq(a) => ek_seq(a, ctx, out),
        Command::EkReconstruct(a) => ek_reconstruct(a, out),
        Command::EkCover(a) => ek_cover(a, ctx, out),
        Command::EkU(a) => ek_u(a, ctx, out),
        Command::PisotCheck(a) => pisot_check(a, out),
        Command::PisotScan(a) => pisot_scan(a, ctx, out),
        Command::AcReport(a) => ac(a, ctx, out),
        Command::Gasket(a) => gasket(a, ctx, out),
    }
}

fn validate(a: &SpecArg, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let summary = json!({
        "valid": true,
        "real_lambda_warning": spec.lambda().im == 0.0,
        "similarity_dimension": spec.similarity_dimension(),
        "spec": spec.to_document(),
    });
    println!("valid: m = {}, s = {:.6}", spec.len(), spec.similarity_dimension());
    out.write_json("validate.json", &summary)
}

fn render(a: &RenderArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let bounds = match &a.bounds {
        Some(b) => Bounds::new(b[0], b[1], b[2], b[3])?,
        None => Bounds::for_spec(&spec),
    };
    let cloud = sample_measure(&spec, a.points, ctx.seed, ctx.tol)?;
    let grid = rasterize(&cloud, &DensityGrid::template(bounds, a.resolution)?);
    grid.write_pgm(&out.path("density.pgm"))?;
    out.adopt("density.pgm")?;
    out.write_json("density.json", &grid.sidecar_json())?;
    if a.write_points {
        cloud.write_csv(&out.path("points.csv"))?;
        out.adopt("points.csv")?;
    }
    println!("rendered {} points, clipped mass {:.3e}", cloud.points.len(), grid.clipped_mass);
    Ok(())
}

fn fourier_eval(a: &FourierEvalArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let xis: Vec<Complex64> = a.xi.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    let samples = ft_eval_many(&spec, &xis, ctx.tol)?;
    for s in &samples {
        println!("xi = {} {}: {:.10} {:+.10}i (|.| = {:.10})", s.xi.re, s.xi.im, s.value.re, s.value.im, s.value.norm());
    }
    match ctx.format {
        Format::Json => out.write_json("fourier.json", &samples),
        Format::Csv => {
            let mut csv = String::from("xi_re,xi_im,re,im,abs,truncation_n,tail_error\n");
            for s in &samples {
                let _ = writeln!(
                    csv,
                    "{:e},{:e},{:e},{:e},{:e},{},{:e}",
                    s.xi.re, s.xi.im, s.value.re, s.value.im, s.value.norm(), s.truncation_n, s.tail_error
                );
            }
            out.write("fourier.csv", csv)
        }
    }
}

fn decay(a: &DecayArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let params = DecayParams { r_min: a.r_min, r_max: a.r_max, n_annuli: a.annuli, samples: a.samples, tol: ctx.tol };
    let est = decay_exponent(&spec, &params)?;
    println!("gamma_hat = {:.4}, C_hat = {:.4}, residual = {:.3e}", est.gamma_hat, est.c_hat, est.fit_residual);
    match ctx.format {
        Format::Json => out.write_json("decay.json", &est),
        Format::Csv => {
            out.write("decay.csv", est.to_csv())?;
            out.write_json("decay.json", &est)
        }
    }
}

fn delta(a: &DeltaArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let pruned = |spec: &IfsSpec| {
        delta_n_pruned_with(spec, a.n, &PrunedOptions { parallel: a.parallel, budget: ctx.budget })
    };
    let mut rows: Vec<(&str, SeparationResult)> = Vec::new();
    match a.mode {
        DeltaMode::Both => {
            rows.push(("brute", delta_n(&spec, a.n, DeltaMethod::Brute, ctx.budget)?));
            rows.push(("pruned", pruned(&spec)?));
        }
        DeltaMode::Pruned => rows.push(("pruned", pruned(&spec)?)),
        DeltaMode::Brute => rows.push(("brute", delta_n(&spec, a.n, DeltaMethod::Brute, ctx.budget)?)),
        DeltaMode::ClosestPair => {
            rows.push(("closest-pair", delta_n(&spec, a.n, DeltaMethod::ClosestPair, ctx.budget)?))
        }
        DeltaMode::Auto => rows.push(("auto", delta_n(&spec, a.n, DeltaMethod::Auto, ctx.budget)?)),
    }
    for (name, r) in &rows {
        println!("Delta_{} ({name}) = {:e}, nodes expanded {}", r.n, r.value, r.nodes_expanded);
    }
    if let [(_, b), (_, p)] = rows.as_slice() {
        if b.value.to_bits() != p.value.to_bits() {
            eprintln!("warning: brute and pruned values differ");
        }
    }
    match ctx.format {
        Format::Json => {
            let value: Vec<_> = rows.iter().map(|(m, r)| json!({ "method": m, "result": r })).collect();
            out.write_json("delta.json", &value)
        }
        Format::Csv => {
            let mut csv = String::from("n,method,value,nodes_expanded,nodes_pruned,argmin_diff\n");
            for (m, r) in &rows {
                let diff: Vec<String> = r.argmin_diff.iter().map(|d| format!("{:e}{:+e}i", d.re, d.im)).collect();
                let _ = writeln!(
                    csv,
                    "{},{m},{:e},{},{},{}",
                    r.n, r.value, r.nodes_expanded, r.nodes_pruned, diff.join(" ")
                );
            }
            out.write("delta.csv", csv)
        }
    }
}

fn concentration(a: &ConcentrationArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let params = ConcentrationParams {
        n_max: a.n_max,
        overlap_tol: a.overlap_tol,
        slope_threshold: a.slope_threshold,
        method: DeltaMethod::Auto,
    };
    let report = concentration_diagnostic(&spec, &params, ctx.budget)?;
    println!("classification: {:?}", report.classification);
    if ctx.format == Format::Csv {
        out.write("concentration.csv", report.to_csv())?;
    }
    out.write_json("concentration.json", &report)
}

fn overlap(a: &OverlapArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let annulus = Annulus::lambda_side(a.rho, a.r)?;
    let found = overlap_roots(&difference_set(&spec), a.max_degree, &annulus, ctx.budget)?;
    println!(
        "{} roots from {} polynomials ({} rejected by the residual check)",
        found.roots.len(),
        found.polynomials,
        found.rejected
    );
    out.write("overlap.csv", found.to_csv())?;
    out.write_json("overlap.json", &found)
}

fn ek_seq(a: &EkSeqArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let theta = complex(&a.theta, "theta")?;
    let t = complex(&a.t, "t")?;
    let seq = if a.wide { ek_sequence_wide(theta, t, a.n)? } else { ek_sequence(theta, t, a.n)? };
    match ctx.format {
        Format::Json => out.write_json("ek_seq.json", &seq),
        Format::Csv => {
            let mut csv = String::from("n,K,eps,Y\n");
            for i in 0..seq.len() {
                let _ = writeln!(csv, "{},{},{:e},{:e}", i + 1, seq.k[i], seq.eps[i], seq.y[i]);
            }
            out.write("ek_seq.csv", csv)
        }
    }
}

fn ek_reconstruct(a: &EkReconstructArgs, out: &mut Outputs) -> Result<()> {
    if let Some(x) = &a.x {
        let (theta, y3) = reconstruct_theta([x[0], x[1], x[2], x[3]])?;
        println!("theta = {} {:+}i, y3 = {}", theta.re, theta.im, y3);
        return out.write_json("reconstruct.json", &json!({ "x": x, "theta": theta, "y3": y3 }));
    }
    let Some(w) = &a.window else {
        return Err(Error::InvalidParameter { name: "window".into(), reason: "give --x or --window".into() });
    };
    let k5 = [w[0], w[1], w[2], w[3], w[4]];
    let ball = theta_ball(&k5, a.b1, a.n, a.c4)?;
    let prediction = predict_k(&k5)?;
    println!(
        "Psi = {} {:+}i, radius {:e}; next integer predicted {}",
        ball.center.re,
        ball.center.im,
        ball.radius,
        prediction.round_ties_even()
    );
    out.write_json("reconstruct.json", &json!({ "ball": ball, "prediction": prediction }))
}

fn ek_cover(a: &EkCoverArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let region = RegionH::new(a.b1, a.b2, a.eta)?;
    let cal = calibrate(
        &region,
        &CalibrationParams { samples: a.calibration_samples, seed: ctx.seed, ..Default::default() },
    )?;
    out.write_json("calibration.json", &cal)?;
    let params = EnumerationParams {
        region,
        n: a.n,
        delta: a.delta,
        rho: a.rho.unwrap_or(cal.rho),
        m: a.m.unwrap_or(cal.m),
        seed_grid: a.seed_grid,
        c4_hat: a.c4.unwrap_or(cal.c4_hat),
    };
    let cover = enumerate_covers(&params, ctx.budget)?;
    println!(
        "{} balls from {} seeds, {} nodes{}",
        cover.balls.len(),
        cover.seeds,
        cover.nodes,
        if cover.truncated { " (truncated at budget)" } else { "" }
    );
    cover.write_csv(&out.path("balls.csv"))?;
    out.adopt("balls.csv")?;
    out.write_json("cover.json", &cover.metadata_json())?;
    if let Some(grid) = a.scan_grid {
        let scan = soundness_scan(&params, &cover.balls, grid, 4, 16, 2.0)?;
        println!("soundness: {} violations among {} qualifying points", scan.violations, scan.qualifying);
        out.write_json("soundness.json", &scan)?;
    }
    Ok(())
}

fn ek_u(a: &EkUArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let lambda = complex(&a.lambda, "lambda")?;
    let u = complex(&a.u, "u")?;
    let t = complex(&a.t, "t")?;
    let seq = ek_sequence_translation(lambda, u, t, a.n + 1)?;
    let mut balls = Vec::new();
    for n in 1..=a.n {
        if let Ok(b) = reconstruct_u(seq.k_at(n), seq.k_at(n + 1), seq.l_at(n), seq.l_at(n + 1), lambda, n, a.c2) {
            balls.push(b);
        }
    }
    if let Some(last) = balls.last() {
        println!("u estimate at n = {}: {} {:+}i, radius {:e}", last.n, last.center.re, last.center.im, last.radius);
    }
    match ctx.format {
        Format::Json => out.write_json("ek_u.json", &json!({ "sequence": seq, "balls": balls })),
        Format::Csv => {
            let mut csv = String::from("n,K,L,eps,delt\n");
            for i in 0..seq.len() {
                let _ = writeln!(csv, "{},{},{},{:e},{:e}", i + 1, seq.k[i], seq.l[i], seq.eps[i], seq.delt[i]);
            }
            out.write("ek_u.csv", csv)?;
            let mut csv = String::from("n,re,im,radius\n");
            for b in &balls {
                let _ = writeln!(csv, "{},{:e},{:e},{:e}", b.n, b.center.re, b.center.im, b.radius);
            }
            out.write("u_balls.csv", csv)
        }
    }
}

fn pisot_check(a: &PisotCheckArgs, out: &mut Outputs) -> Result<()> {
    let p = IntPolynomial::from_descending(a.coeffs.clone())?;
    let report = is_complex_pisot(&p)?;
    println!("{p}: {:?}", report.classification);
    if let Some(theta) = report.theta {
        println!("theta = {} {:+}i, |theta| = {:.7}", theta.re, theta.im, theta.norm());
    }
    out.write_json("pisot.json", &report)
}

fn pisot_scan(a: &PisotScanArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let annulus = Annulus::theta_side(a.rho, a.r)?;
    let mut progress = String::new();
    let scan = pisot_scan_with_progress(a.max_degree, a.coeff_bound, &annulus, ctx.budget, |p| {
        let line = serde_json::to_string(p).expect("serializable");
        println!("{line}");
        progress.push_str(&line);
        progress.push('\n');
    })?;
    out.write("progress.jsonl", progress)?;
    out.write_json("pisot_scan.json", &scan)
}

fn ac(a: &AcReportArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let mut params = AcParams::default();
    params.decay.tol = ctx.tol;
    let report = ac_report(&spec, a.k, &params, ctx.budget)?;
    println!("verdict: {}", serde_json::to_value(report.verdict)?.as_str().unwrap_or("?"));
    out.write_json("ac_report.json", &report)
}

/// Low-discrepancy frequencies with `|xi|` in `[0.5, 50]`, offset by the seed.
fn probe_frequencies(count: usize, seed: u64) -> Vec<Complex64> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let shift = (seed as f64 * golden).fract();
    (0..count)
        .map(|k| {
            let u = (shift + k as f64 * golden).fract();
            let v = (shift + k as f64 * 2f64.sqrt()).fract();
            Complex64::from_polar(0.5 * 100f64.powf(u), TAU * v)
        })
        .collect()
}

fn gasket(a: &GasketArgs, ctx: &Context, out: &mut Outputs) -> Result<()> {
    let spec = gasket_spec(a.lambda)?;
    let omega = Complex64::from_polar(1.0, a.angle * PI / 180.0);
    let rotated = rotate_ifs(&spec, omega)?;
    out.write("gasket_spec.json", spec.to_json() + "\n")?;
    out.write("rotated_spec.json", rotated.to_json() + "\n")?;
    let mut csv = String::from("xi_re,xi_im,abs_diff,allowance,abs_modulus_diff\n");
    let mut within = 0;
    let xis = probe_frequencies(a.samples, ctx.seed);
    for &xi in &xis {
        let f = ft_eval(&spec, xi, ctx.tol)?;
        let g = ft_eval(&rotated, xi, ctx.tol)?;
        let diff = (f.value - g.value).norm();
        let allowance = 2.0 * (f.tail_error + g.tail_error);
        within += usize::from(diff <= allowance);
        let _ = writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e}",
            xi.re,
            xi.im,
            diff,
            allowance,
            (f.value.norm() - g.value.norm()).abs()
        );
    }
    out.write("gasket_check.csv", csv)?;
    let summary = json!({
        "lambda": a.lambda,
        "omega": omega,
        "rotation_permutes_translations": rotation_invariant(&spec, omega),
        "symmetry_orders": translation_symmetries(&spec, 12),
        "within_allowance": within,
        "samples": xis.len(),
    });
    println!("{within}/{} frequencies agree within twice the tail error", xis.len());
    out.write_json("gasket.json", &summary)
}
