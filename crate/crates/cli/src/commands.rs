use std::io::Write;

use rayon::prelude::*;

use chainbounds::bounds::{self, SolverConfig};
use chainbounds::harness::{self, Algorithm, ExperimentSpec, VerifySpec};

use crate::output::{emit_table, Format, Record};
use crate::Failure;

pub fn bounds<W: Write>(
    t: u32,
    cfg: SolverConfig,
    format: Format,
    out: &mut W,
) -> Result<(), Failure> {
    let report = bounds::bar_x(t, &cfg)?;
    let c = &report.certificate;
    Record::new("bounds")
        .field("t", report.t)
        .field("bw_lower", report.bw_lower)
        .field("bar_x", report.bar_x)
        .field("a_star", c.a)
        .field("b_star", c.b)
        .field("u_star", c.u)
        .field("q", c.q)
        .field("growth", c.growth)
        .field("residual", report.residuals)
        .field("crossings", report.crossings)
        .field("edge_attained", report.edge_attained)
        .emit(format, out)?;
    Ok(())
}

pub struct ScanRequest {
    pub t: u32,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub steps: usize,
    pub cfg: SolverConfig,
}

pub fn scan<W: Write>(req: ScanRequest, format: Format, out: &mut W) -> Result<(), Failure> {
    let (lo, hi) = bounds::x_domain();
    let x_min = req.x_min.unwrap_or(lo);
    let x_max = req.x_max.unwrap_or(hi);
    if !(x_min >= lo && x_min < x_max && x_max <= hi) {
        return Err(Failure::Usage(format!(
            "need e^-gamma <= x_min < x_max <= e ({lo} <= {x_min} < {x_max} <= {hi})"
        )));
    }
    if req.steps < 2 {
        return Err(Failure::Usage(format!(
            "steps must be at least 2, got {}",
            req.steps
        )));
    }
    req.cfg.validate()?;
    let step = (x_max - x_min) / (req.steps - 1) as f64;
    let xs: Vec<f64> = (0..req.steps)
        .map(|i| {
            if i + 1 == req.steps {
                x_max
            } else {
                x_min + step * i as f64
            }
        })
        .collect();
    let evals = xs
        .par_iter()
        .map(|&x| bounds::q_of_x(x, req.t, &req.cfg))
        .collect::<chainbounds::Result<Vec<_>>>()?;
    let crossings: Vec<f64> = evals
        .windows(2)
        .filter(|w| (w[0].growth < 1.0) != (w[1].growth < 1.0))
        .map(|w| w[1].x)
        .collect();

    let rows: Vec<Record> = evals
        .iter()
        .map(|e| {
            Record::new("scan")
                .field("x", e.x)
                .field("a", e.a)
                .field("b", e.b)
                .field("u", e.u)
                .field("q", e.q)
                .field("growth", e.growth)
        })
        .collect();
    emit_table(&rows, format, out)?;

    let mut summary = Record::new("scan.summary")
        .field("t", req.t)
        .field("steps", req.steps)
        .field("crossings", crossings.len());
    if let Some(&first) = crossings.first() {
        summary = summary.field("first_crossing_x", first);
    }
    match format {
        Format::Json => writeln!(out, "{}", summary.to_json_line())?,
        Format::Human => {
            writeln!(out)?;
            summary.write_human(out)?;
            if crossings.len() > 1 {
                writeln!(out, "warning: growth factor crosses 1 more than once")?;
            }
        }
        // the CSV stream is the plotting interface and carries only rows
        Format::Csv => {}
    }
    Ok(())
}

pub struct SimulateRequest {
    pub t: usize,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub check_bounds: bool,
    pub per_rep: bool,
    pub lower_fraction: f64,
    pub progress: bool,
}

pub fn simulate<W: Write>(
    req: SimulateRequest,
    format: Format,
    out: &mut W,
) -> Result<(), Failure> {
    let spec = ExperimentSpec {
        t: req.t,
        n: req.n,
        reps: req.reps,
        master_seed: req.seed,
        algorithm: req.algorithm,
    };
    spec.validate()?;
    let report = if req.check_bounds {
        let t = u32::try_from(req.t)
            .ok()
            .filter(|&t| t >= 2)
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "--check-bounds needs dimension >= 2, got {}",
                    req.t
                ))
            })?;
        Some(bounds::bar_x(t, &SolverConfig::default())?)
    } else {
        None
    };

    let mut io_error = None;
    let result = harness::run_experiment_with(&spec, |i, r| {
        if io_error.is_some() {
            return;
        }
        if req.per_rep {
            let line = Record::new("simulate.rep")
                .field("rep", i)
                .field("length", r.length)
                .field("ratio", r.ratio)
                .to_json_line();
            if let Err(e) = writeln!(out, "{line}").and_then(|()| out.flush()) {
                io_error = Some(e);
            }
        }
        if req.progress {
            eprint!("\rreplication {}/{}", i + 1, req.reps);
        }
    })?;
    if req.progress {
        eprintln!();
    }
    if let Some(e) = io_error {
        return Err(e.into());
    }

    let mut rec = Record::new("simulate")
        .field("t", spec.t)
        .field("n", spec.n)
        .field("reps", spec.reps)
        .field("seed", spec.master_seed)
        .field("algorithm", spec.algorithm.as_str())
        .field("mean_ratio", result.mean_ratio)
        .field("std_dev", result.std_dev)
        .field("ci95", result.ci95)
        .field("min_ratio", result.min_ratio)
        .field("max_ratio", result.max_ratio);
    if let Some(report) = report {
        let v = harness::bound_band_check_with(&result, &report, req.lower_fraction)?;
        rec = rec
            .field("bar_x", report.bar_x)
            .field("bw_lower", report.bw_lower)
            .field("lower_fraction", v.lower_fraction)
            .field("upper_ok", v.upper_ok)
            .field("upper_margin", v.upper_margin)
            .field("lower_ok", v.lower_ok)
            .field("lower_margin", v.lower_margin)
            .field("passed", v.passed());
    }
    rec.emit(format, out)?;
    Ok(())
}

pub fn verify<W: Write>(
    t: usize,
    n: usize,
    ell: usize,
    reps: usize,
    seed: u64,
    format: Format,
    out: &mut W,
) -> Result<(), Failure> {
    let spec = VerifySpec {
        t,
        n,
        ell,
        reps,
        seed,
    };
    let r = harness::verify_expected_count(&spec)?;
    Record::new("verify")
        .field("t", t)
        .field("n", n)
        .field("ell", ell)
        .field("reps", reps)
        .field("seed", seed)
        .field("count_estimate", r.count_estimate)
        .field("count_se", r.count_se)
        .field("integral_estimate", r.integral_estimate)
        .field("integral_se", r.integral_se)
        .field("z_score", r.z_score)
        .emit(format, out)?;
    Ok(())
}
