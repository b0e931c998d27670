use serde::Serialize;

use super::config::{Compiled, ConfigError, ExperimentConfig, Mode};
use crate::convergence::{
    lemma22_check, select_sample_points, ConvergenceOptions, ConvergenceReport, FamilyMember,
};
use crate::expr::{HoloMap, Polydisc};
use crate::fibers::{
    check_proper, fiber_solve, find_r0, persistent_roots, FiberSlice, ProperReport, R0Report,
};
use crate::numfmt::{ser_f64, ser_opt_f64, ser_vec_cx};
use crate::poly::Cx;
use crate::variety::{make_approximant, normalized_relation, vanishing_ideal, VarietyBasis};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImplicitizationSummary {
    pub basis: VarietyBasis,
    /// Relations of degree 1 found in the span, printed.
    pub linear_relations: Vec<String>,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximantSummary {
    pub nu: u32,
    #[serde(serialize_with = "ser_opt_f64")]
    pub membership_max: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub sup_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub implicitization: Option<ImplicitizationSummary>,
    pub r0: Option<R0Report>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub r: Option<f64>,
    pub proper: Option<ProperReport>,
    pub scheme_kind: Option<String>,
    pub approximants: Vec<ApproximantSummary>,
    /// Truncation kinds only: `sup |H_nu - H|` never increases along `nu_list`.
    pub sup_monotone: Option<bool>,
    pub convergence: Option<ConvergenceReport>,
    pub error: Option<StageError>,
    pub pass: bool,
    pub failed_stage: Option<String>,
}

impl ExperimentReport {
    fn new(config: ExperimentConfig) -> Self {
        ExperimentReport {
            config,
            implicitization: None,
            r0: None,
            r: None,
            proper: None,
            scheme_kind: None,
            approximants: Vec::new(),
            sup_monotone: None,
            convergence: None,
            error: None,
            pass: false,
            failed_stage: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_NUMERICAL
        } else if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    fn stage_error(mut self, stage: &str, message: impl ToString) -> Self {
        self.error = Some(StageError {
            stage: stage.to_string(),
            message: message.to_string(),
        });
        self.failed_stage = Some(stage.to_string());
        self.pass = false;
        self
    }
}

/// Deterministic sample points on a polydisc: a sunflower on each axis,
/// combined as a product when `n > 1`.
pub fn implicitization_points(domain: &Polydisc, count: usize) -> Vec<Vec<Cx>> {
    let n = domain.dim();
    let per_axis = (1..)
        .find(|k: &usize| k.pow(n as u32) >= count)
        .unwrap_or(count);
    let axes: Vec<Vec<Cx>> = (0..n)
        .map(|j| {
            Polydisc::disc(domain.center[j], domain.radii[j]).sunflower(if n == 1 {
                count
            } else {
                per_axis
            })
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<Cx>| {
                axis.iter().map(move |c| {
                    let mut q = p.clone();
                    q.push(*c);
                    q
                })
            })
            .collect();
    }
    points.truncate(count);
    points
}

fn implicitize(cfg: &ExperimentConfig, h: &HoloMap) -> Result<ImplicitizationSummary, String> {
    let samples = implicitization_points(&h.domain, cfg.implicitization_samples)
        .iter()
        .map(|x| h.eval(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let basis = vanishing_ideal(&samples, cfg.degree_bound, cfg.tolerances.svd_tol)
        .map_err(|e| e.to_string())?;
    Ok(ImplicitizationSummary {
        linear_relations: basis
            .relations_up_to_degree(1)
            .iter()
            .map(normalized_relation)
            .collect(),
        relations: basis.relations.iter().map(normalized_relation).collect(),
        basis,
    })
}

/// Properness grid on the test domain: interior points plus boundary samples.
pub fn properness_grid(cfg: &ExperimentConfig) -> Vec<Vec<Cx>> {
    let d = cfg.domain.polydisc();
    let mut g = d.interior_grid(cfg.grid.per_axis);
    g.extend(d.boundary_grid(cfg.grid.boundary));
    g
}

fn convergence_options(cfg: &ExperimentConfig, c: &Compiled) -> ConvergenceOptions {
    ConvergenceOptions {
        conv_tol: cfg.tolerances.conv_tol,
        delta: cfg.tolerances.delta,
        fiber: c.fiber,
        persistence: c.persistence,
        ..ConvergenceOptions::default()
    }
}

/// Runs the full pipeline. Stage failures are recorded in the report, which
/// keeps every result computed before the failing stage.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let compiled = cfg.compile()?;
    let mut report = ExperimentReport::new(cfg.clone());
    let h = &compiled.h;

    let summary = match implicitize(cfg, h) {
        Ok(s) => s,
        Err(e) => return Ok(report.stage_error("implicitize", e)),
    };
    let basis = summary.basis.clone();
    report.implicitization = Some(summary);
    if cfg.mode == Mode::Implicitize {
        report.pass = true;
        return Ok(report);
    }

    let sys = &compiled.sys;
    let grid = properness_grid(cfg);
    let r = match cfg.r {
        Some(r) => r,
        None => match find_r0(sys, h, &grid, &compiled.fiber) {
            Ok(r0) => {
                let r = r0.r0;
                report.r0 = Some(r0);
                r
            }
            Err(e) => return Ok(report.stage_error("find_r0", e)),
        },
    };
    report.r = Some(r);
    match check_proper(sys, h, &grid, r, &compiled.fiber) {
        Ok(p) => {
            let pass = p.pass;
            report.proper = Some(p);
            if !pass {
                report.failed_stage = Some("check_proper".into());
                return Ok(report);
            }
        }
        Err(e) => return Ok(report.stage_error("check_proper", e)),
    }

    let scheme = cfg.scheme.as_ref().expect("validated by compile");
    report.scheme_kind = Some(scheme.kind().to_string());
    let mut family = Vec::new();
    for &nu in &cfg.nu_list {
        match make_approximant(scheme, h, &basis, nu, &grid) {
            Ok(a) => {
                report.approximants.push(ApproximantSummary {
                    nu,
                    membership_max: a.membership_max,
                    sup_distance: a.sup_distance,
                });
                family.push(FamilyMember {
                    nu,
                    map: a.map,
                    extra_points: cfg.extra_points(nu),
                });
            }
            Err(e) => return Ok(report.stage_error("approximate", e)),
        }
    }
    if scheme.is_truncation() {
        report.sup_monotone = Some(
            report
                .approximants
                .windows(2)
                .all(|w| w[1].sup_distance <= w[0].sup_distance),
        );
    }

    let interior = cfg.domain.polydisc().interior_grid(cfg.grid.per_axis);
    let x_slices = match interior
        .iter()
        .map(|x| fiber_solve(sys, h, x, r, &compiled.fiber))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(s) => s,
        Err(e) => return Ok(report.stage_error("fiber_solve", e)),
    };
    let samples = select_sample_points(&x_slices, cfg.sample_points, cfg.seed);
    let opts = convergence_options(cfg, &compiled);
    match lemma22_check(sys, h, &family, &interior, &samples, r, &opts) {
        Ok(c) => {
            report.pass = c.verdict.pass;
            report.failed_stage = c.verdict.failed_stage.clone();
            report.convergence = Some(c);
        }
        Err(e) => return Ok(report.stage_error("lemma22_check", e)),
    }
    Ok(report)
}

/// Implicitization only, whatever the configured mode.
pub fn run_implicitize(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Implicitize;
    run_experiment(&cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberPoint {
    #[serde(serialize_with = "ser_vec_cx")]
    pub x: Vec<Cx>,
    pub slice: FiberSlice,
    /// One flag per root of `slice`.
    pub persistent: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibersReport {
    pub config: ExperimentConfig,
    pub nu: u32,
    #[serde(serialize_with = "ser_opt_f64")]
    pub r: Option<f64>,
    pub points: Vec<FiberPoint>,
    pub error: Option<StageError>,
}

impl FibersReport {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_NUMERICAL
        } else {
            EXIT_PASS
        }
    }
}

/// Fibers of `X_nu` over the interior grid and the extra points, with persistence flags.
pub fn run_fibers(cfg: &ExperimentConfig, nu: u32) -> Result<FibersReport, ConfigError> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Converge;
    let compiled = cfg.compile()?;
    let mut report = FibersReport {
        config: cfg.clone(),
        nu,
        r: None,
        points: Vec::new(),
        error: None,
    };
    let fail = |mut report: FibersReport, stage: &str, e: String| {
        report.error = Some(StageError {
            stage: stage.into(),
            message: e,
        });
        Ok(report)
    };
    let h = &compiled.h;
    let sys = &compiled.sys;
    let samples = match implicitization_points(&h.domain, cfg.implicitization_samples)
        .iter()
        .map(|x| h.eval(x))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(s) => s,
        Err(e) => return fail(report, "implicitize", e.to_string()),
    };
    let basis = match vanishing_ideal(&samples, cfg.degree_bound, cfg.tolerances.svd_tol) {
        Ok(b) => b,
        Err(e) => return fail(report, "implicitize", e.to_string()),
    };
    let grid = properness_grid(&cfg);
    let r = match cfg.r {
        Some(r) => r,
        None => match find_r0(sys, h, &grid, &compiled.fiber) {
            Ok(r0) => r0.r0,
            Err(e) => return fail(report, "find_r0", e.to_string()),
        },
    };
    report.r = Some(r);
    let scheme = cfg.scheme.as_ref().expect("validated by compile");
    let approx = match make_approximant(scheme, h, &basis, nu, &grid) {
        Ok(a) => a,
        Err(e) => return fail(report, "approximate", e.to_string()),
    };
    let mut points = cfg.domain.polydisc().interior_grid(cfg.grid.per_axis);
    points.extend(
        cfg.extra_points(nu)
            .into_iter()
            .filter(|p| sys.domain.contains(p)),
    );
    for x in points {
        let outcome = fiber_solve(sys, &approx.map, &x, r, &compiled.fiber).and_then(|slice| {
            let o = persistent_roots(
                sys,
                &approx.map,
                &slice,
                &compiled.persistence,
                &compiled.fiber,
            )?;
            Ok((slice, o.persistent))
        });
        match outcome {
            Ok((slice, persistent)) => report.points.push(FiberPoint {
                x,
                slice,
                persistent,
            }),
            Err(e) => return fail(report, "fiber_solve", e.to_string()),
        }
    }
    Ok(report)
}
