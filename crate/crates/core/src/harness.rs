//! Experiment driver: config parsing, the beam/reference pipelines, log-log
//! rate fits, and machine-readable reports with pass/fail verdicts against
//! the asymptotic exponents.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianModel, ModelSpec, PotentialTerm};
use crate::index::MultiIndex;
use crate::linalg::RVec;
use crate::poly::RealPoly;
use crate::reference::{
    caustic_l2_identity_rhs, exact_caustic_family, exact_quadratic_propagate, split_step,
    GaussianPacket, SpectralRun,
};
use crate::scalar::Real;
use crate::superposition::{
    assemble, build_beams, initial_wavefield, residual_field, validate_cutoff, AmplitudeProfile,
    AmplitudeSpec, SuperpositionConfig,
};
use crate::wavefield::{l2_distance, l2_norm, Axis, WaveField};

/// Decay exponent k/2 − n/4 of the total error.
pub fn total_error_exponent(k: usize, n: usize) -> f64 {
    k as f64 / 2.0 - n as f64 / 4.0
}

/// Decay exponent k/2 + 1 − n/4 of the residual norm.
pub fn residual_exponent(k: usize, n: usize) -> f64 {
    k as f64 / 2.0 + 1.0 - n as f64 / 4.0
}

/// Decay exponent k/2 of the initial-data error.
pub fn initial_error_exponent(k: usize) -> f64 {
    k as f64 / 2.0
}

/// Slope-fit tolerance: measured ≥ exponent − 0.15 passes (rates are upper
/// bounds, so faster decay is fine).
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum H0Policy {
    Auto,
    Fixed { value: f64 },
}

impl Default for H0Policy {
    fn default() -> Self {
        H0Policy::Auto
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceChoice {
    Spectral,
    ExactQuadratic,
    ExactCaustic,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputGridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Grid spacing = spacing_ratio · ε (≤ 1/4 resolves the oscillations).
    #[serde(default = "default_spacing_ratio")]
    pub spacing_ratio: f64,
}

fn default_spacing_ratio() -> f64 {
    0.25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerianGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub counts: Vec<usize>,
    #[serde(default = "default_eulerian_dt")]
    pub dt: f64,
    pub time: f64,
}

fn default_eulerian_dt() -> f64 {
    2e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub s_in: Vec<PotentialTerm>,
    pub a_in: AmplitudeSpec,
    pub k: usize,
    pub beta: f64,
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    pub dt: f64,
    #[serde(default)]
    pub h0: H0Policy,
    pub output: OutputGridSpec,
    pub reference: ReferenceChoice,
    #[serde(default)]
    pub eulerian: Option<EulerianGridSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() {
            return Err(Error::Config("eps list must not be empty".into()));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps list must be strictly decreasing".into()));
        }
        if self.eps.iter().any(|&e| e <= 0.0) {
            return Err(Error::Config("eps values must be positive".into()));
        }
        if self.times.is_empty() || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("times must be non-empty and increasing".into()));
        }
        if self.times[0] <= 0.0 {
            return Err(Error::Config("times must be positive (t = 0 is implicit)".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        for &t in &self.times {
            let steps = t / self.dt;
            if (steps - steps.round()).abs() > 1e-6 {
                return Err(Error::Config(format!("time {t} is not a multiple of dt {}", self.dt)));
            }
        }
        if self.k == 0 || self.k > 3 {
            return Err(Error::UnsupportedOrder(self.k));
        }
        if self.beta <= 0.0 {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.output.min.len() != self.model.n || self.output.max.len() != self.model.n {
            return Err(Error::Config("output grid dimension must match the model".into()));
        }
        Ok(())
    }

    pub fn s_in_poly<T: Real>(&self) -> Result<RealPoly<T>> {
        let mut p = RealPoly::zero(self.model.n);
        for term in &self.s_in {
            if term.exponents.len() != self.model.n {
                return Err(Error::Config("s_in term dimension mismatch".into()));
            }
            p.add_term(MultiIndex::from_slice(&term.exponents), T::of(term.coeff));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub eps: f64,
    pub err_total: f64,
    pub err_init: f64,
    pub resid_l2: f64,
    pub resid_time_integral: f64,
    pub wellposed_ok: bool,
    pub time_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub threshold: f64,
    pub measured: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub quantity: String,
    pub k: usize,
    pub n: usize,
    pub rows: Vec<RateRow>,
    pub slopes: BTreeMap<String, SlopeFit>,
    pub verdicts: Vec<Verdict>,
    pub errors_monotone: bool,
}

/// Least-squares slope of ln(err) against ln(x).
pub fn fit_slope(xs: &[f64], errs: &[f64]) -> SlopeFit {
    assert_eq!(xs.len(), errs.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(errs)
        .filter(|(_, &e)| e.is_finite() && e > 0.0)
        .map(|(&x, &e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return SlopeFit { slope: f64::NAN, stderr: f64::NAN };
    }
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let stderr = if pts.len() > 2 {
        let ss_res: f64 = pts
            .iter()
            .map(|p| {
                let pred = mean_y + slope * (p.0 - mean_x);
                (p.1 - pred).powi(2)
            })
            .sum();
        (ss_res / (m - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    SlopeFit { slope, stderr }
}

struct RunContext {
    model: HamiltonianModel<f64>,
    s_in: RealPoly<f64>,
    a_in: AmplitudeProfile<f64>,
}

fn build_context(cfg: &ExperimentConfig) -> Result<RunContext> {
    let max_order = (cfg.k + 2).max(6);
    let model = cfg.model.build::<f64>(max_order)?;
    let s_in = cfg.s_in_poly::<f64>()?;
    let a_in = cfg.a_in.build::<f64>(cfg.model.n)?;
    Ok(RunContext { model, s_in, a_in })
}

fn output_axes(cfg: &ExperimentConfig, eps: f64) -> Vec<Axis<f64>> {
    cfg.output
        .min
        .iter()
        .zip(&cfg.output.max)
        .map(|(&lo, &hi)| {
            let spacing = cfg.output.spacing_ratio * eps;
            let count = ((hi - lo) / spacing).ceil() as usize + 1;
            Axis::covering(lo, hi, count.max(8))
        })
        .collect()
}

/// One ε-row of the pipeline: build beams, assemble, measure.
fn run_row(cfg: &ExperimentConfig, ctx: &RunContext, eps: f64) -> Result<RateRow> {
    let start = Instant::now();
    let t_final = *cfg.times.last().unwrap();
    let width = 2.0 * ctx.a_in.support_halfwidth();
    let h0 = match cfg.h0 {
        H0Policy::Auto => SuperpositionConfig::default_h0(eps, width),
        H0Policy::Fixed { value } => value,
    };
    let mut scfg = SuperpositionConfig::new(eps, cfg.k, cfg.beta, h0)?;
    let beams = build_beams(&ctx.model, &ctx.s_in, &ctx.a_in, &scfg, t_final, cfg.dt)?;
    let times_f: Vec<f64> = cfg.times.clone();
    validate_cutoff(&ctx.model, &beams, &mut scfg, &times_f)?;

    // reference grid and solution at the final time
    let (axes, reference) = reference_solution(cfg, ctx, eps, &beams, t_final)?;

    // initial error on the output grid
    let psi0 = assemble(&ctx.model, &beams, 0.0, &scfg, axes.clone())?;
    let psi_in = initial_wavefield(&ctx.s_in, &ctx.a_in, eps, axes.clone());
    let err_init = l2_distance(&psi0, &psi_in)?;

    // residual norms at t = 0 and each requested time
    let mut resid_norms = vec![l2_norm(&residual_field(&ctx.model, &beams, 0.0, &scfg, axes.clone())?)];
    for &t in &cfg.times {
        resid_norms.push(l2_norm(&residual_field(&ctx.model, &beams, t, &scfg, axes.clone())?));
    }
    let mut grid_times = vec![0.0];
    grid_times.extend_from_slice(&cfg.times);
    let resid_time_integral: f64 = grid_times
        .windows(2)
        .zip(resid_norms.windows(2))
        .map(|(ts, rs)| 0.5 * (rs[0] + rs[1]) * (ts[1] - ts[0]))
        .sum();
    let resid_l2 = *resid_norms.last().unwrap();

    // total error against the reference
    let err_total = match reference {
        Some(reference) => {
            let psi_eps = assemble(&ctx.model, &beams, t_final, &scfg, axes.clone())?;
            l2_distance(&psi_eps, &reference)?
        }
        None => f64::NAN,
    };

    let wellposed_ok = if err_total.is_finite() {
        err_total <= 1.05 * (err_init + resid_time_integral / eps)
    } else {
        true
    };

    Ok(RateRow {
        eps,
        err_total,
        err_init,
        resid_l2,
        resid_time_integral,
        wellposed_ok,
        time_s: start.elapsed().as_secs_f64(),
    })
}

fn reference_solution(
    cfg: &ExperimentConfig,
    ctx: &RunContext,
    eps: f64,
    beams: &[crate::beam::BeamRecord<f64>],
    t_final: f64,
) -> Result<(Vec<Axis<f64>>, Option<WaveField<f64>>)> {
    match cfg.reference {
        ReferenceChoice::None => Ok((output_axes(cfg, eps), None)),
        ReferenceChoice::Spectral => {
            let excursion = beams
                .iter()
                .flat_map(|b| b.samples.iter())
                .map(|s| s.point.x[0].abs().max(if cfg.model.n == 2 { s.point.x[1].abs() } else { 0.0 }))
                .fold(0.0f64, f64::max);
            let supp = ctx.a_in.support_halfwidth()
                + ctx.a_in.center().as_slice().iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
            let half_width = crate::reference::spectral_half_width(excursion.max(supp) + 0.5, eps);
            let spacing = cfg.output.spacing_ratio * eps;
            let count = ((2.0 * half_width / spacing).ceil() as usize).next_power_of_two();
            let steps = (t_final / (eps / 20.0)).ceil();
            let dt_ref = t_final / steps;
            let run = SpectralRun::new(
                ctx.model.clone(),
                half_width,
                vec![count; cfg.model.n],
                eps,
                dt_ref,
            )?;
            let axes = run.axes();
            let psi_in = initial_wavefield(&ctx.s_in, &ctx.a_in, eps, axes.clone());
            let reference = split_step(&run, &psi_in, t_final)?;
            Ok((axes, Some(reference)))
        }
        ReferenceChoice::ExactQuadratic => {
            let axes = output_axes(cfg, eps);
            let AmplitudeProfile::Gaussian { a, center } = &ctx.a_in else {
                return Err(Error::Config("exact-quadratic reference needs a Gaussian profile".into()));
            };
            let packet = GaussianPacket::from_oscillatory_data(&ctx.s_in, *a, center[0], eps)?;
            let reference = exact_quadratic_propagate(&ctx.model, &packet, t_final, eps, axes.clone())?;
            Ok((axes, Some(reference)))
        }
        ReferenceChoice::ExactCaustic => {
            let axes = output_axes(cfg, eps);
            let AmplitudeProfile::Gaussian { a, .. } = &ctx.a_in else {
                return Err(Error::Config("exact-caustic reference needs a Gaussian profile".into()));
            };
            if !ctx.model.potential().is_zero() {
                return Err(Error::Config("exact-caustic reference needs a free particle".into()));
            }
            let family = exact_caustic_family(*a, eps, cfg.beta, t_final, axes.clone())?;
            Ok((axes, Some(family.exact)))
        }
    }
}

/// Full sweep: every ε-row plus slope fits and rate verdicts.
pub fn run(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let ctx = build_context(cfg)?;
    let mut rows = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        rows.push(run_row(cfg, &ctx, eps)?);
    }
    let n = cfg.model.n;
    let k = cfg.k;

    let epss: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let mut slopes = BTreeMap::new();
    slopes.insert("total".into(), fit_slope(&epss, &rows.iter().map(|r| r.err_total).collect::<Vec<_>>()));
    slopes.insert("initial".into(), fit_slope(&epss, &rows.iter().map(|r| r.err_init).collect::<Vec<_>>()));
    slopes.insert("residual".into(), fit_slope(&epss, &rows.iter().map(|r| r.resid_l2).collect::<Vec<_>>()));

    let mut verdicts = Vec::new();
    if rows.iter().all(|r| r.err_total.is_finite()) && rows.len() >= 3 {
        let threshold = total_error_exponent(k, n) - SLOPE_TOLERANCE;
        let measured = slopes["total"].slope;
        verdicts.push(Verdict { name: "total_rate".into(), threshold, measured, pass: measured >= threshold });
    }
    // an identically vanishing residual has no rate to fit; leave the
    // verdict out rather than failing on a NaN slope
    if rows.len() >= 3 && slopes["residual"].slope.is_finite() {
        let threshold = residual_exponent(k, n) - SLOPE_TOLERANCE;
        let measured = slopes["residual"].slope;
        verdicts.push(Verdict { name: "residual_rate".into(), threshold, measured, pass: measured >= threshold });
    }
    if rows.len() >= 3 {
        let measured = slopes["initial"].slope;
        let (threshold, pass) = if k == 1 {
            (0.5, (measured - 0.5).abs() <= 0.1)
        } else {
            let th = initial_error_exponent(k) - 0.1;
            (th, measured >= th)
        };
        verdicts.push(Verdict { name: "initial_rate".into(), threshold, measured, pass });
    }
    verdicts.push(Verdict {
        name: "wellposedness_inequality".into(),
        threshold: 1.05,
        measured: if rows.iter().all(|r| r.wellposed_ok) { 1.0 } else { 0.0 },
        pass: rows.iter().all(|r| r.wellposed_ok),
    });

    let errors_monotone = rows.windows(2).all(|w| {
        !w[0].err_total.is_finite() || w[1].err_total <= w[0].err_total * 1.02
    });

    Ok(RateReport { quantity: "full".into(), k, n, rows, slopes, verdicts, errors_monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergeQuantity {
    Total,
    Residual,
    Initial,
    EulerianVsLagrangian,
}

/// Single-quantity sweep with slope fit.
pub fn converge(cfg: &ExperimentConfig, quantity: ConvergeQuantity) -> Result<RateReport> {
    match quantity {
        ConvergeQuantity::EulerianVsLagrangian => eulerian_sweep(cfg),
        _ => {
            let mut report = run(cfg)?;
            report.quantity = format!("{quantity:?}").to_lowercase();
            report.verdicts.retain(|v| match quantity {
                ConvergeQuantity::Total => v.name == "total_rate",
                ConvergeQuantity::Residual => v.name == "residual_rate",
                ConvergeQuantity::Initial => v.name == "initial_rate",
                ConvergeQuantity::EulerianVsLagrangian => false,
            });
            Ok(report)
        }
    }
}

/// Grid-halving sweep of the Eulerian/Lagrangian discrepancy; rows carry the
/// grid spacing h in the `eps` column.
fn eulerian_sweep(cfg: &ExperimentConfig) -> Result<RateReport> {
    let ctx = build_context(cfg)?;
    let spec = cfg
        .eulerian
        .as_ref()
        .ok_or_else(|| Error::Config("eulerian grid spec required for this sweep".into()))?;
    if cfg.model.n != 1 {
        return Err(Error::UnsupportedDimension(cfg.model.n));
    }
    let t = spec.time;
    let dt = spec.dt;
    let probes: Vec<f64> = (0..7).map(|i| -0.9 + 0.3 * i as f64).collect();

    let mut rows = Vec::new();
    for &count in &spec.counts {
        let start = Instant::now();
        let x_axis = Axis::covering(spec.x_min, spec.x_max, count);
        let p_axis = Axis::covering(spec.p_min, spec.p_max, count);
        let table = crate::liouville::eulerian_beam_table(
            &ctx.model, &ctx.s_in, &ctx.a_in, cfg.beta, x_axis, p_axis, t, dt,
        )?;
        let mut worst = 0.0f64;
        for &x0 in &probes {
            let seed = crate::superposition::initial_beam_data(
                &ctx.s_in, &ctx.a_in, &RVec::from_slice(&[x0]), 1, cfg.beta,
            )?;
            let rec = crate::jets::integrate_beam(&ctx.model, &seed, t, dt)?;
            let end = rec.samples.last().unwrap();
            let probe = end.point;
            let diffs = [
                (crate::liouville::sample(&table.s, &probe)?.re - end.s).abs(),
                (crate::liouville::sample(&table.m, &probe)? - end.m[(0, 0)]).norm(),
                (crate::liouville::sample(&table.a, &probe)? - end.amplitude()).norm(),
                crate::liouville::sample(&table.w, &probe)?.norm(),
            ];
            worst = diffs.iter().fold(worst, |a, d| a.max(*d));
        }
        rows.push(RateRow {
            eps: x_axis.step,
            err_total: worst,
            err_init: 0.0,
            resid_l2: 0.0,
            resid_time_integral: 0.0,
            wellposed_ok: true,
            time_s: start.elapsed().as_secs_f64(),
        });
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.err_total).collect();
    let fit = fit_slope(&hs, &errs);
    let mut slopes = BTreeMap::new();
    slopes.insert("eulerian_vs_lagrangian".to_string(), fit);
    let verdicts = vec![Verdict {
        name: "eulerian_consistency_order".into(),
        threshold: 3.7,
        measured: fit.slope,
        pass: fit.slope >= 3.7,
    }];
    Ok(RateReport {
        quantity: "eulerian-vs-lagrangian".into(),
        k: cfg.k,
        n: cfg.model.n,
        rows,
        slopes,
        verdicts,
        errors_monotone: true,
    })
}

/// Writes `report.json` and `rates.csv` into the directory.
pub fn emit(report: &RateReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    let mut csv = std::fs::File::create(dir.join("rates.csv"))?;
    writeln!(csv, "eps,err_total,err_init,resid_l2,time_s")?;
    for r in &report.rows {
        writeln!(
            csv,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.3}",
            r.eps, r.err_total, r.err_init, r.resid_l2, r.time_s
        )?;
    }
    Ok(())
}

/// The caustic benchmark in one call: relative L² distance at t = 1 between
/// the assembled field and the closed form, plus both sides of the L²-error
/// identity.
#[derive(Debug, Clone, Serialize)]
pub struct CausticDemoReport {
    pub eps: f64,
    pub rel_l2_vs_closed_form: f64,
    pub identity_lhs: f64,
    pub identity_rhs: f64,
    pub identity_rel_err: f64,
}

pub fn caustic_demo(eps: f64, beta: f64) -> Result<CausticDemoReport> {
    let gaussian_a = 0.5;
    let model = HamiltonianModel::<f64>::free_particle(1, 4);
    let mut s_in = RealPoly::zero(1);
    s_in.add_term(MultiIndex([2, 0]), -0.5);
    let a_in = AmplitudeProfile::Gaussian { a: gaussian_a, center: RVec::from_slice(&[0.0]) };

    let h0 = SuperpositionConfig::default_h0(eps, 2.0 * a_in.support_halfwidth());
    let scfg = SuperpositionConfig::new(eps, 1, beta, h0)?;
    let dt = 1e-3;
    let beams = build_beams(&model, &s_in, &a_in, &scfg, 1.0, dt)?;

    let span = 40.0 * eps.sqrt() * eps.sqrt().max(0.1);
    let half = span.max(0.8);
    let count = ((2.0 * half) / (eps / 8.0)).ceil() as usize + 1;
    let axes = vec![Axis::covering(-half, half, count)];

    let family = exact_caustic_family(gaussian_a, eps, beta, 1.0, axes.clone())?;
    let beam_form = family.beam_predicted.expect("t = 1 provides the closed form");
    let psi_eps = assemble(&model, &beams, 1.0, &scfg, axes.clone())?;

    let rel = l2_distance(&psi_eps, &beam_form)? / l2_norm(&beam_form);
    let lhs = l2_distance(&psi_eps, &family.exact)?;
    let rhs = caustic_l2_identity_rhs(gaussian_a, eps, beta).sqrt();
    Ok(CausticDemoReport {
        eps,
        rel_l2_vs_closed_form: rel,
        identity_lhs: lhs * lhs,
        identity_rhs: rhs * rhs,
        identity_rel_err: (lhs * lhs - rhs * rhs).abs() / (rhs * rhs),
    })
}

/// Dumps the Eulerian beam fields as CSV (node coordinates + re/im columns).
pub fn dump_fields(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let ctx = build_context(cfg)?;
    let spec = cfg
        .eulerian
        .as_ref()
        .ok_or_else(|| Error::Config("eulerian grid spec required for fields-dump".into()))?;
    let count = *spec.counts.first().ok_or_else(|| Error::Config("counts must not be empty".into()))?;
    let x_axis = Axis::covering(spec.x_min, spec.x_max, count);
    let p_axis = Axis::covering(spec.p_min, spec.p_max, count);
    let table = crate::liouville::eulerian_beam_table(
        &ctx.model, &ctx.s_in, &ctx.a_in, cfg.beta, x_axis, p_axis, spec.time, spec.dt,
    )?;
    std::fs::create_dir_all(out)?;
    let mut csv = std::fs::File::create(out.join("fields.csv"))?;
    writeln!(csv, "x,p,s_re,s_im,w_re,w_im,gx_re,gx_im,gp_re,gp_im,m_re,m_im,a_re,a_im")?;
    for i in 0..x_axis.count {
        for j in 0..p_axis.count {
            let row = [
                table.s.value(i, j),
                table.w.value(i, j),
                table.gx.value(i, j),
                table.gp.value(i, j),
                table.m.value(i, j),
                table.a.value(i, j),
            ];
            let mut line = format!("{:.12e},{:.12e}", x_axis.coord(i), p_axis.coord(j));
            for v in row {
                line.push_str(&format!(",{:.12e},{:.12e}", v.re, v.im));
            }
            writeln!(csv, "{line}")?;
        }
    }
    Ok(())
}
