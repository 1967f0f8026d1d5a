//! The six commands: parameter resolution, computation, and export.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use log::warn;
use rayon::prelude::*;
use serde_json::{json, Value};

use bloch_core::dynamics::{
    dissipative_qubit_sample, integrate, sample_quenched_noise, IntegratorConfig, MeanMode,
    NoiseSpec, Termination, TrajectorySample,
};
use bloch_core::numerics::{loglog_slope_fit, plateau_crossover, QuadratureOptions};
use bloch_core::phase::{
    dissipative_gp_closed_form, geometric_phase_quadrature, interference_intensity,
    monte_carlo_thermal_gp, thermal_factor, weak_coupling_gp, CycleConvention, DissipativeCycle,
    PhaseResult,
};
use bloch_core::state::{hopf_map, ActionAngleState, RadiusSample, SystemParams};

use crate::args::{GpCommand, InterfArgs, McArgs, SimArgs, SweepArgs, ThermalArgs};
use crate::config::{
    ConventionKind, Format, GridKind, MeanKind, NoiseKind, RunConfig, SweepParam, SystemKind,
};
use crate::output::{csv_num, emit, render_json, write_file, CsvTable};
use crate::CliError;

/// Globals resolved from flag > config file > default.
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
}

impl Ctx {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn require_json(&self, what: &str) -> Result<(), CliError> {
        if self.format_or(Format::Json) == Format::Csv {
            return Err(CliError::validation(format!(
                "{what} is a scalar report and only comes as JSON"
            )));
        }
        Ok(())
    }

    fn quadrature_options(&self, args_abs: Option<f64>, args_rel: Option<f64>) -> QuadratureOptions<f64> {
        let defaults = QuadratureOptions::default();
        QuadratureOptions {
            abs_tol: args_abs.or(self.cfg.abs_tol).unwrap_or(defaults.abs_tol),
            rel_tol: args_rel.or(self.cfg.rel_tol).unwrap_or(defaults.rel_tol),
            max_subdivisions: self
                .cfg
                .max_subdivisions
                .unwrap_or(defaults.max_subdivisions),
            ..defaults
        }
    }
}

fn coupling(gamma: f64, epsilon: f64) -> f64 {
    (gamma * PI) / (epsilon + epsilon)
}

// Uniform endpoints-inclusive grids with the endpoints taken literally.
fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| {
            if k == points - 1 {
                stop
            } else {
                start + (stop - start) * k as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let (la, lb) = (start.log10(), stop.log10());
    (0..points)
        .map(|k| {
            if k == 0 {
                start
            } else if k == points - 1 {
                stop
            } else {
                10f64.powf(la + (lb - la) * k as f64 / (points - 1) as f64)
            }
        })
        .collect()
}

fn convention_value(kind: ConventionKind) -> CycleConvention<f64> {
    match kind {
        ConventionKind::HalfTurnFrozen => CycleConvention::half_turn_frozen(),
        ConventionKind::FullTurn => CycleConvention::full_turn(),
    }
}

fn kind_str<T: serde::Serialize>(kind: T) -> String {
    match serde_json::to_value(kind).expect("enum serializes") {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

// ---------------------------------------------------------------- sim

struct SimRow {
    t: f64,
    action: f64,
    angle: f64,
    r_squared: f64,
    energy: f64,
    bloch: Option<(f64, f64, f64)>,
}

impl SimRow {
    fn from_sample(s: &TrajectorySample<f64>) -> Self {
        let bloch = if s.r_squared >= 0.0 {
            let state = ActionAngleState::new(s.action, s.angle).expect("sampled state in range");
            let v = hopf_map(state, RadiusSample::new(s.r_squared)).expect("physical radius");
            Some((v.x, v.y, v.z))
        } else {
            None
        };
        Self {
            t: s.t,
            action: s.action,
            angle: s.angle,
            r_squared: s.r_squared,
            energy: s.energy,
            bloch,
        }
    }
}

fn render_sim(rows: &[SimRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut table = CsvTable::new(&["t", "I", "phi", "r_squared", "H", "x", "y", "z"]);
            for r in rows {
                let (x, y, z) = r.bloch.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                table.row(&[
                    csv_num(r.t),
                    csv_num(r.action),
                    csv_num(r.angle),
                    csv_num(r.r_squared),
                    csv_num(r.energy),
                    csv_num(x),
                    csv_num(y),
                    csv_num(z),
                ]);
            }
            table.render()
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let (x, y, z) = r.bloch.map_or((f64::NAN, f64::NAN, f64::NAN), |b| b);
                    // NaN serializes as null, which marks the hole in JSON.
                    json!({
                        "t": r.t,
                        "I": r.action,
                        "phi": r.angle,
                        "r_squared": r.r_squared,
                        "H": r.energy,
                        "x": x,
                        "y": y,
                        "z": z,
                    })
                })
                .collect();
            render_json(&Value::Array(items))
        }
    }
}

pub fn cmd_sim(ctx: &Ctx, args: &SimArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let i0 = args.i0.or(cfg.i0).unwrap_or(0.5);
    let phi0 = args.phi0.or(cfg.phi0).unwrap_or(0.0);
    let gamma = args.gamma.or(cfg.gamma).unwrap_or(0.0);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(1.0);
    let t_end = args.t_end.or(cfg.t_end).unwrap_or(TAU);
    let dt = args.dt.or(cfg.dt).unwrap_or(1e-3);
    let stride = args.stride.or(cfg.output_stride).unwrap_or(10);
    let system = args.system.or(cfg.system).unwrap_or(SystemKind::Langevin);
    let noise_kind = args.noise.or(cfg.noise).unwrap_or(NoiseKind::None);
    let beta = args.beta.or(cfg.beta).unwrap_or(1.0);
    let mean_kind = args.noise_mean.or(cfg.noise_mean).unwrap_or(MeanKind::Zero);
    let tau = args.tau.or(cfg.step_correlation_time).unwrap_or(0.1);
    let format = ctx.format_or(Format::Csv);

    let mean_mode = match mean_kind {
        MeanKind::Zero => MeanMode::Zero,
        MeanKind::InverseBeta => MeanMode::InverseBeta,
    };
    let noise = match noise_kind {
        NoiseKind::None => NoiseSpec::none(),
        NoiseKind::Quenched => NoiseSpec::quenched(beta, mean_mode, ctx.seed)?,
        NoiseKind::Stepwise => NoiseSpec::stepwise(beta, mean_mode, ctx.seed, tau)?,
    };

    let mut diagnostic: Option<String> = None;
    let rows: Vec<SimRow> = match system {
        SystemKind::Langevin => {
            let state = ActionAngleState::new(i0, phi0)?;
            let params = SystemParams::symmetric(epsilon, gamma)?;
            let config = IntegratorConfig {
                dt,
                output_stride: stride,
                ..IntegratorConfig::default()
            };
            let traj = integrate(state, &params, &noise, &config, t_end)?;
            if let Termination::PoleGuard { t, action } = traj.termination {
                diagnostic = Some(format!(
                    "integration stopped by the pole guard at t = {t:?}: the action reached {action:?}, where the angle rate diverges"
                ));
            }
            traj.samples.iter().map(SimRow::from_sample).collect()
        }
        SystemKind::Qubit => {
            if noise_kind == NoiseKind::Stepwise {
                return Err(CliError::validation(
                    "stepwise noise needs the langevin system; the qubit path is closed-form",
                ));
            }
            let xi = match noise_kind {
                NoiseKind::None => 0.0,
                _ => sample_quenched_noise(&noise, 1)?[0],
            };
            if !(dt > 0.0) {
                return Err(CliError::validation(format!("dt must be positive, got {dt}")));
            }
            if stride == 0 {
                return Err(CliError::validation("stride must be at least 1"));
            }
            let n_steps = ((t_end / dt).round() as usize).max(1);
            let mut rows = Vec::new();
            for step in (0..=n_steps).step_by(stride) {
                let t = step as f64 * dt;
                match dissipative_qubit_sample(i0, phi0, gamma, epsilon, xi, t) {
                    Ok(sample) => rows.push(SimRow::from_sample(&sample)),
                    Err(e) => {
                        diagnostic = Some(format!(
                            "qubit path truncated at t = {t:?}: {e} (the action pole was reached)"
                        ));
                        break;
                    }
                }
            }
            rows
        }
    };

    for r in &rows {
        if r.bloch.is_none() {
            warn!(
                "negative squared radius {:?} at t = {:?}; Bloch columns left empty",
                r.r_squared, r.t
            );
        }
    }

    emit(ctx.out.as_ref(), &render_sim(&rows, format))?;
    match diagnostic {
        Some(message) => Err(CliError::runtime(message)),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------- gp

fn phase_json(
    result: &PhaseResult<f64>,
    inputs: Value,
    cross: Option<(f64, f64)>,
) -> Value {
    let mut doc = json!({
        "value": result.value,
        "method": result.method.as_str(),
        "error_estimate": result.error_estimate,
        "validity": {
            "renormalization_bound_ok": result.validity.renormalization_bound_ok,
            "radicand_nonnegative": result.validity.radicand_nonnegative,
            "truncated_mass": result.validity.truncated_mass,
        },
        "inputs": inputs,
    });
    if let Some((closed, quadrature)) = cross {
        doc["cross_check"] = json!({
            "closed": closed,
            "quadrature": quadrature,
            "abs_difference": (closed - quadrature).abs(),
        });
    }
    doc
}

pub fn cmd_gp(ctx: &Ctx, method: &GpCommand) -> Result<(), CliError> {
    ctx.require_json("gp")?;
    let args = match method {
        GpCommand::Closed(a) | GpCommand::Quad(a) | GpCommand::Series(a) => a,
    };
    let cfg = &ctx.cfg;
    let gamma = args.gamma.or(cfg.gamma).unwrap_or(0.0);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(1.0);
    let theta0 = args.theta0.or(cfg.theta0).unwrap_or(PI / 2.0);
    let convention_kind = args
        .convention
        .or(cfg.convention)
        .unwrap_or(ConventionKind::HalfTurnFrozen);
    let cross_check = args.cross_check || cfg.cross_check.unwrap_or(false);
    let opts = ctx.quadrature_options(args.abs_tol, args.rel_tol);

    if !(epsilon > 0.0) {
        return Err(CliError::validation(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let b = coupling(gamma, epsilon);
    if b > 1.0 + 16.0 * f64::EPSILON {
        return Err(CliError::physical(format!(
            "gamma pi / 2 epsilon = {b:?} violates the renormalization bound; the damped cycle is only defined up to 1"
        )));
    }

    let convention = convention_value(convention_kind);
    let quad = |opts: &QuadratureOptions<f64>| -> Result<PhaseResult<f64>, CliError> {
        let cycle = DissipativeCycle::new(gamma, epsilon, theta0, &convention)?;
        Ok(geometric_phase_quadrature(
            |phi| cycle.action(phi),
            |phi| cycle.squared_radius(phi),
            &convention,
            opts,
        )?)
    };

    let result = match method {
        GpCommand::Closed(_) => dissipative_gp_closed_form(gamma, epsilon, theta0)?,
        GpCommand::Quad(_) => quad(&opts)?,
        GpCommand::Series(_) => weak_coupling_gp(gamma, epsilon, theta0)?,
    };
    let cross = if cross_check {
        let closed = dissipative_gp_closed_form(gamma, epsilon, theta0)?;
        let quadrature = quad(&opts)?;
        Some((closed.value, quadrature.value))
    } else {
        None
    };

    let inputs = json!({
        "gamma": gamma,
        "epsilon": epsilon,
        "theta0": theta0,
        "convention": kind_str(convention_kind),
        "abs_tol": opts.abs_tol,
        "rel_tol": opts.rel_tol,
    });
    emit(ctx.out.as_ref(), &render_json(&phase_json(&result, inputs, cross)))
}

// ---------------------------------------------------------------- gp-thermal

struct ThermalRow {
    t: f64,
    beta: f64,
    f: f64,
    phi_g: f64,
    err: f64,
    truncated_mass: f64,
}

pub fn cmd_gp_thermal(ctx: &Ctx, args: &ThermalArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let theta0 = args.theta0.or(cfg.theta0).unwrap_or(0.0);
    let t_start = args.t_start.or(cfg.t_start).unwrap_or(1e-2);
    let t_stop = args.t_stop.or(cfg.t_stop).unwrap_or(1e3);
    let points = args.points.or(cfg.points).unwrap_or(50);
    let fit = args.fit || cfg.fit.unwrap_or(false);
    let opts = ctx.quadrature_options(args.abs_tol, args.rel_tol);
    let format = ctx.format_or(Format::Csv);

    if points < 2 {
        return Err(CliError::validation("need at least 2 grid points"));
    }
    if !(t_start > 0.0 && t_stop > t_start) {
        return Err(CliError::validation(format!(
            "the log grid needs 0 < t_start < t_stop, got [{t_start}, {t_stop}]"
        )));
    }

    let cos_theta0 = theta0.cos();
    let grid = log_grid(t_start, t_stop, points);
    let rows: Vec<ThermalRow> = grid
        .par_iter()
        .map(|&t| {
            let beta = t.recip();
            let f = thermal_factor(beta, &opts)?;
            Ok(ThermalRow {
                t,
                beta,
                f: f.value,
                phi_g: cos_theta0 * f.value - PI,
                err: cos_theta0.abs() * f.error_estimate,
                truncated_mass: f.truncated_mass,
            })
        })
        .collect::<Result<_, CliError>>()?;

    for r in &rows {
        if r.truncated_mass > 1e-3 {
            warn!(
                "T = {:?}: {:?} of the noise distribution lies below the physical cutoff",
                r.t, r.truncated_mass
            );
        }
    }

    let fit_doc = if fit {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.f)).collect();
        let fitted = loglog_slope_fit(&pts)?;
        let crossover = plateau_crossover(PI, &fitted)?;
        Some(json!({
            "slope": fitted.slope,
            "intercept": fitted.intercept,
            "r_squared": fitted.r_squared,
            "crossover": crossover,
        }))
    } else {
        None
    };

    let row_values: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "T": r.t,
                "beta": r.beta,
                "f": r.f,
                "phi_g": r.phi_g,
                "err": r.err,
                "truncated_mass": r.truncated_mass,
            })
        })
        .collect();

    match format {
        Format::Csv => {
            let mut table = CsvTable::new(&["T", "beta", "f", "phi_g", "err", "truncated_mass"]);
            for r in &rows {
                table.row(&[
                    csv_num(r.t),
                    csv_num(r.beta),
                    csv_num(r.f),
                    csv_num(r.phi_g),
                    csv_num(r.err),
                    csv_num(r.truncated_mass),
                ]);
            }
            emit(ctx.out.as_ref(), &table.render())?;
            if let Some(doc) = fit_doc {
                match &ctx.out {
                    // Next to the table: "<out>.fit.json".
                    Some(path) => {
                        let mut name = path.as_os_str().to_owned();
                        name.push(".fit.json");
                        write_file(&PathBuf::from(name), &render_json(&doc))?;
                    }
                    None => emit(None, &render_json(&doc))?,
                }
            }
            Ok(())
        }
        Format::Json => {
            let doc = match fit_doc {
                Some(f) => json!({"rows": row_values, "fit": f}),
                None => json!({"rows": row_values}),
            };
            emit(ctx.out.as_ref(), &render_json(&doc))
        }
    }
}

// ---------------------------------------------------------------- gp-mc

pub fn cmd_gp_mc(ctx: &Ctx, args: &McArgs) -> Result<(), CliError> {
    ctx.require_json("gp-mc")?;
    let cfg = &ctx.cfg;
    let beta = args.beta.or(cfg.beta).unwrap_or(1.0);
    let theta0 = args.theta0.or(cfg.theta0).unwrap_or(0.0);
    let n = args.n.or(cfg.n_samples).unwrap_or(100_000);

    let result = monte_carlo_thermal_gp(beta, theta0, n, ctx.seed)?;
    let rejected = result.validity.truncated_mass;
    if rejected > 1e-3 {
        warn!("rejected_fraction = {rejected:?} exceeds 1e-3; the conditional average discards that part of the distribution");
    }
    let doc = json!({
        "estimate": result.value,
        "stderr": result.error_estimate,
        "n": n,
        "rejected_fraction": rejected,
        "seed": ctx.seed,
    });
    emit(ctx.out.as_ref(), &render_json(&doc))
}

// ---------------------------------------------------------------- interf

pub fn cmd_interf(ctx: &Ctx, args: &InterfArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let i0 = args.i0.or(cfg.i0).unwrap_or(0.0);
    let phi0 = args.phi0.or(cfg.phi0).unwrap_or(0.0);
    let gamma = args.gamma.or(cfg.gamma).unwrap_or(0.0);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(1.0);
    let t_end = args.t_end.or(cfg.t_end).unwrap_or(2.0 * TAU);
    let points = args.points.or(cfg.points).unwrap_or(1001);
    let format = ctx.format_or(Format::Csv);

    if points < 2 {
        return Err(CliError::validation("need at least 2 grid points"));
    }
    if !(t_end > 0.0) {
        return Err(CliError::validation(format!(
            "t_end must be positive, got {t_end}"
        )));
    }

    let mut rows: Vec<(f64, f64)> = Vec::with_capacity(points);
    for t in linear_grid(0.0, t_end, points) {
        match interference_intensity(i0, phi0, gamma, epsilon, t) {
            Ok(j) => rows.push((t, j)),
            Err(_) => {
                warn!("intensity truncated at t = {t:?}: the action left [-1, 1] and the envelope is no longer defined");
                break;
            }
        }
    }

    match format {
        Format::Csv => {
            let mut table = CsvTable::new(&["t", "J"]);
            for (t, j) in &rows {
                table.row(&[csv_num(*t), csv_num(*j)]);
            }
            emit(ctx.out.as_ref(), &table.render())
        }
        Format::Json => {
            let items: Vec<Value> = rows.iter().map(|(t, j)| json!({"t": t, "J": j})).collect();
            emit(ctx.out.as_ref(), &render_json(&Value::Array(items)))
        }
    }
}

// ---------------------------------------------------------------- sweep

pub fn cmd_sweep(ctx: &Ctx, args: &SweepArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let param = args
        .param
        .or(cfg.sweep_param)
        .ok_or_else(|| CliError::validation("sweep needs --param (theta0 | gamma | epsilon)"))?;
    let grid_kind = args.grid.or(cfg.sweep_grid).unwrap_or(GridKind::Linear);
    let start = args
        .start
        .or(cfg.sweep_start)
        .ok_or_else(|| CliError::validation("sweep needs --start"))?;
    let stop = args
        .stop
        .or(cfg.sweep_stop)
        .ok_or_else(|| CliError::validation("sweep needs --stop"))?;
    let points = args.points.or(cfg.sweep_points).unwrap_or(50);
    let gamma = args.gamma.or(cfg.gamma).unwrap_or(0.0);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(1.0);
    let theta0 = args.theta0.or(cfg.theta0).unwrap_or(0.0);
    let format = ctx.format_or(Format::Csv);

    if points < 2 {
        return Err(CliError::validation("need at least 2 sweep points"));
    }
    if grid_kind == GridKind::Log && !(start > 0.0 && stop > 0.0) {
        return Err(CliError::validation(
            "a log grid needs positive endpoints",
        ));
    }

    let values = match grid_kind {
        GridKind::Linear => linear_grid(start, stop, points),
        GridKind::Log => log_grid(start, stop, points),
    };

    // Whole grid evaluated before anything is written, so a bound violation
    // anywhere in the range rejects the run as a unit.
    let rows: Vec<(f64, f64)> = values
        .par_iter()
        .map(|&v| {
            let (g, e, th) = match param {
                SweepParam::Theta0 => (gamma, epsilon, v),
                SweepParam::Gamma => (v, epsilon, theta0),
                SweepParam::Epsilon => (gamma, v, theta0),
            };
            let r = dissipative_gp_closed_form(g, e, th)?;
            Ok((v, r.value))
        })
        .collect::<Result<_, CliError>>()?;

    match format {
        Format::Csv => {
            let mut table = CsvTable::new(&[param.as_str(), "phi_g"]);
            for (v, p) in &rows {
                table.row(&[csv_num(*v), csv_num(*p)]);
            }
            emit(ctx.out.as_ref(), &table.render())
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(v, p)| json!({param.as_str(): v, "phi_g": p}))
                .collect();
            emit(ctx.out.as_ref(), &render_json(&Value::Array(items)))
        }
    }
}
