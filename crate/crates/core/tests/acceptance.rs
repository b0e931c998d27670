//! The eight acceptance criteria, one line each. Exits nonzero if any fails.

// NaN must fail `ensure!`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::{matching_distance, naive_fiber, random_system, rng, unit_disc};
use nashlab::convergence::{chain_degree_at, ConvergenceError, VerticalSlice};
use nashlab::experiment::{
    demo, emit_report, run_experiment, run_fibers, Format, EXIT_FAIL, EXIT_PASS,
};
use nashlab::expr::{parse_expr, HoloMap, Polydisc};
use nashlab::fibers::{
    fiber_solve, persistent_roots, FiberOptions, PersistenceOptions, SystemFamily,
};
use nashlab::poly::{aberth_roots, cluster_roots, default_cluster_radius, Cx, MultiPoly, UniPoly};
use nashlab::variety::{nash_witness, vanishing_ideal};
use rand::Rng;

type Outcome = Result<String, String>;

/// Name, check, runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, f64);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn zero() -> Cx {
    Cx::new(0.0, 0.0)
}

fn disc(r: f64) -> Polydisc {
    Polydisc::disc(zero(), r)
}

fn map(exprs: &[&str], domain: Polydisc) -> HoloMap {
    HoloMap::new(
        exprs.iter().map(|s| parse_expr(s).unwrap()).collect(),
        domain,
    )
    .unwrap()
}

/// Coefficients of `p` divided by the coefficient at `e`, with negligible terms dropped.
fn normalized(p: &MultiPoly, e: &[u32]) -> BTreeMap<Vec<u32>, Cx> {
    let lead = p.coefficient(e);
    p.terms()
        .map(|(k, c)| (k.to_vec(), c / lead))
        .filter(|(_, c)| c.norm() > 1e-12)
        .collect()
}

fn close_to(got: &BTreeMap<Vec<u32>, Cx>, want: &[(&[u32], f64)], tol: f64) -> bool {
    got.len() == want.len()
        && want.iter().all(|(e, c)| {
            got.get(*e)
                .is_some_and(|g| (g - Cx::new(*c, 0.0)).norm() <= tol)
        })
}

fn example12() -> Outcome {
    let cfg = demo("example12").unwrap();
    let h = map(&["-x1", "x1*exp(x1)", "1"], disc(1.0));
    let samples: Vec<Vec<Cx>> = h
        .domain
        .sunflower(200)
        .iter()
        .map(|x| h.eval(&[*x]).unwrap())
        .collect();
    let basis = vanishing_ideal(&samples, 2, cfg.tolerances.svd_tol).map_err(|e| e.to_string())?;
    ensure!(basis.dim() == 4, "nullspace dimension {}", basis.dim());
    ensure!(
        basis.holdout_residual <= 1e-8,
        "holdout residual {:e}",
        basis.holdout_residual
    );
    let linear = basis.relations_up_to_degree(1);
    ensure!(linear.len() == 1, "{} degree-1 relations", linear.len());
    ensure!(
        close_to(
            &normalized(&linear[0], &[0, 0, 1]),
            &[(&[0, 0, 1], 1.0), (&[0, 0, 0], -1.0)],
            1e-8
        ),
        "degree-1 relation {} is not a multiple of v3 - 1",
        linear[0]
    );

    let (fopts, popts) = (FiberOptions::default(), PersistenceOptions::default());
    for nu in [4u32, 8, 16] {
        let x = vec![Cx::new(1.0 / nu as f64, 0.0)];
        let h_nu = map(&["-x1", &format!("(x1 - 1/{nu})*exp(x1)"), "1"], disc(1.0));
        let sys = SystemFamily::parse(&["z1*v2", "z1^2 + v1*z1"], 3, 1, disc(0.9)).unwrap();
        let slice = fiber_solve(&sys, &h_nu, &x, 1.0, &fopts).map_err(|e| e.to_string())?;
        let mut z: Vec<f64> = slice.roots.iter().map(|r| r.z[0].re).collect();
        z.sort_by(f64::total_cmp);
        ensure!(
            z.len() == 2 && z[0].abs() < 1e-9 && (z[1] - 1.0 / nu as f64).abs() < 1e-9,
            "nu={nu}: fiber {z:?}"
        );
        ensure!(
            slice.degenerate_equations == vec![1],
            "nu={nu}: degenerate {:?}",
            slice.degenerate_equations
        );
        let kept =
            persistent_roots(&sys, &h_nu, &slice, &popts, &fopts).map_err(|e| e.to_string())?;
        ensure!(
            kept.slice.roots.len() == 1 && kept.slice.roots[0].z[0].norm() < 1e-9,
            "nu={nu}: persistence kept {:?}",
            kept.slice.roots
        );
    }

    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    ensure!(
        report.exit_code() == EXIT_PASS,
        "verdict {:?}",
        report.failed_stage
    );
    let c = report.convergence.as_ref().unwrap();
    ensure!(
        c.sample_points.len() == 25,
        "{} sample points",
        c.sample_points.len()
    );
    let star = c.nu_star_chain.ok_or("no nu*")?;
    ensure!(star <= 128, "nu* = {star}");
    ensure!(
        c.sheet_x.generic_cardinality == 1,
        "sheets of X: {}",
        c.sheet_x.generic_cardinality
    );
    for rec in c.records.iter().filter(|r| r.nu >= star) {
        ensure!(
            rec.sheet_pure.generic_cardinality == 1,
            "nu={}: {} sheets",
            rec.nu,
            rec.sheet_pure.generic_cardinality
        );
    }
    Ok(format!(
        "4 relations, holdout {:.1e}; isolated point removed at nu=4,8,16; nu*_chain={star}",
        basis.holdout_residual
    ))
}

fn twisted_cubic() -> Outcome {
    let h = map(&["x1", "x1^2", "x1^3"], disc(1.0));
    let samples: Vec<Vec<Cx>> = h
        .domain
        .sunflower(200)
        .iter()
        .map(|x| h.eval(&[*x]).unwrap())
        .collect();
    let basis = vanishing_ideal(&samples, 2, 1e-8).map_err(|e| e.to_string())?;
    ensure!(basis.dim() == 3, "nullspace dimension {}", basis.dim());
    ensure!(
        basis.holdout_residual <= 1e-8,
        "holdout residual {:e}",
        basis.holdout_residual
    );
    // Every fifth sample is held out of the fit.
    for s in samples.iter().skip(4).step_by(5) {
        let scale = 1.0 + s.iter().map(|c| c.norm_sqr()).sum::<f64>();
        for r in &basis.relations {
            ensure!(
                r.eval_slice(s).norm() <= 1e-8 * scale,
                "relation {r} at {s:?}"
            );
        }
    }
    let monos = basis.monomials();
    let vector = |p: &MultiPoly| -> Vec<Cx> { monos.iter().map(|e| p.coefficient(e)).collect() };
    let span: Vec<Vec<Cx>> = basis.relations.iter().map(vector).collect();
    let vars = ["v1", "v2", "v3"];
    let mut worst = 0.0f64;
    for q in ["v2 - v1^2", "v3 - v1*v2", "v1*v3 - v2^2"] {
        let mut w = vector(&parse_expr(q).unwrap().to_multipoly(&vars).unwrap());
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for u in &span {
            let dot: Cx = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= dot * ui;
            }
        }
        worst = worst.max(w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / norm);
    }
    ensure!(worst <= 1e-6, "subspace residual {worst:e}");
    Ok(format!(
        "3 relations, holdout {:.1e}, quadric residual {worst:.1e}",
        basis.holdout_residual
    ))
}

fn root_finder() -> Outcome {
    let mut g = rng(2024);
    let (mut worst_residual, mut worst_scaled, mut worst_recon) = (0.0f64, 0.0f64, 0.0f64);
    let mut over = 0;
    for _ in 0..500 {
        let degree = g.random_range(1..=12usize);
        let coeffs: Vec<Cx> = (0..=degree).map(|_| unit_disc(&mut g)).collect();
        let p = UniPoly::new(coeffs.clone());
        let roots = aberth_roots(&p, 1e-9).map_err(|e| e.to_string())?;
        let clusters = cluster_roots(&roots, default_cluster_radius(&roots));
        let total: usize = clusters.iter().map(|c| c.multiplicity).sum();
        ensure!(
            total == degree,
            "multiplicities sum to {total}, degree {degree}"
        );
        for r in &roots {
            let res = p.eval(*r).norm() / p.scale();
            worst_residual = worst_residual.max(res);
            worst_scaled = worst_scaled.max(res / r.norm().max(1.0).powi(degree as i32));
            over += usize::from(res > 1e-9);
        }
        let q = UniPoly::from_roots(coeffs[degree], &roots);
        let recon = p
            .coeffs()
            .iter()
            .zip(q.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / p.scale();
        worst_recon = worst_recon.max(recon);
    }
    ensure!(worst_recon <= 1e-7, "reconstruction error {worst_recon:e}");
    ensure!(
        over == 0,
        "{over} roots have |p(r)| > 1e-9 max|c| (worst {worst_residual:.1e}); \
         relative to max|c| max(1,|r|)^deg the worst is {worst_scaled:.1e}"
    );
    Ok(format!(
        "worst residual {worst_residual:.1e}, reconstruction {worst_recon:.1e}"
    ))
}

fn negative_control() -> Outcome {
    let neg = demo("linear-sections-negative").unwrap();
    let report = run_experiment(&neg).map_err(|e| e.to_string())?;
    ensure!(
        report.exit_code() == EXIT_FAIL,
        "exit code {}",
        report.exit_code()
    );
    ensure!(
        report.failed_stage.as_deref() == Some("check_1l"),
        "failed at {:?}",
        report.failed_stage
    );
    let c = report.convergence.as_ref().unwrap();
    for rec in &c.records {
        ensure!(
            rec.full_1l.sup_1l == f64::INFINITY && !rec.full_1l.pass,
            "nu={}: sup_1l {}",
            rec.nu,
            rec.full_1l.sup_1l
        );
    }
    for &nu in &neg.nu_list {
        let fibers = run_fibers(&neg, nu).map_err(|e| e.to_string())?;
        ensure!(
            fibers.points.iter().all(|p| p.slice.roots.is_empty()),
            "nu={nu}: nonempty fiber"
        );
    }

    let report =
        run_experiment(&demo("linear-sections-constrained").unwrap()).map_err(|e| e.to_string())?;
    ensure!(
        report.exit_code() == EXIT_PASS,
        "constrained verdict {:?}",
        report.failed_stage
    );
    let c = report.convergence.as_ref().unwrap();
    let stars = [
        c.nu_star_1l,
        c.nu_star_2l,
        c.nu_star_1l_pure,
        c.nu_star_2l_pure,
        c.nu_star_chain,
    ];
    ensure!(
        stars.iter().all(|s| s.is_some_and(|s| s <= 16)),
        "nu* {stars:?}"
    );
    Ok(format!(
        "unconstrained: empty fibers, fail at check_1l, exit 2; constrained: nu*_1l={} nu*_chain={}",
        c.nu_star_1l.unwrap(),
        c.nu_star_chain.unwrap()
    ))
}

fn transversality() -> Outcome {
    let h = map(&["x1"], disc(1.0));
    let sys = SystemFamily::parse(&["z1^2 - v1"], 1, 1, disc(0.9)).unwrap();
    let opts = FiberOptions::default();
    let at0 = fiber_solve(&sys, &h, &[zero()], 1.0, &opts).map_err(|e| e.to_string())?;
    match VerticalSlice::new(&at0, &[zero()], 0.1).and_then(|t| chain_degree_at(&at0, &t)) {
        Err(ConvergenceError::NonTransversal { .. }) => {}
        other => return Err(format!("expected a non-transversal error, got {other:?}")),
    }
    let x = [Cx::new(0.25, 0.0)];
    let fiber = fiber_solve(&sys, &h, &x, 1.0, &opts).map_err(|e| e.to_string())?;
    let t = VerticalSlice::new(&fiber, &[Cx::new(0.5, 0.0)], 0.05).map_err(|e| e.to_string())?;
    let deg = chain_degree_at(&fiber, &t).map_err(|e| e.to_string())?;
    ensure!(deg == 1, "degree {deg}");
    Ok("tangent slice rejected; degree 1 at (0.25, 0.5)".into())
}

fn nash() -> Outcome {
    let check = |f: &str, radius: f64, want: &[(&[u32], f64)]| -> Result<(), String> {
        let domain = disc(radius);
        let p = nash_witness(&parse_expr(f).unwrap(), &domain, 2)
            .map_err(|e| e.to_string())?
            .ok_or(format!("no relation for {f}"))?;
        ensure!(
            close_to(&normalized(&p, &[0, 1]), want, 1e-8),
            "{f}: got {p}"
        );
        let e = parse_expr(f).unwrap();
        let mut g = rng(5);
        for _ in 0..100 {
            let x = unit_disc(&mut g) * radius;
            let y = e.eval(&BTreeMap::from([("x1".to_string(), x)])).unwrap();
            ensure!(p.eval_slice(&[x, y]).norm() <= 1e-8, "{f}: residual at {x}");
        }
        Ok(())
    };
    check("x1^2", 1.0, &[(&[0, 1], 1.0), (&[2, 0], -1.0)])?;
    check(
        "1/(1 + x1)",
        0.5,
        &[(&[0, 1], 1.0), (&[1, 1], 1.0), (&[0, 0], -1.0)],
    )?;
    let exp =
        nash_witness(&parse_expr("exp(x1)").unwrap(), &disc(10.0), 6).map_err(|e| e.to_string())?;
    ensure!(exp.is_none(), "relation for exp: {}", exp.unwrap());
    Ok("y - x^2, y + xy - 1 recovered; none for exp up to degree 6".into())
}

fn fiber_oracle() -> Outcome {
    let mut g = rng(77);
    let mut worst = 0.0f64;
    let mut nonempty = 0;
    for i in 0..100 {
        let s = random_system(&mut g);
        let slice = fiber_solve(&s.sys, &s.h, &s.x, f64::INFINITY, &FiberOptions::default())
            .map_err(|e| e.to_string())?;
        let ours: Vec<Vec<Cx>> = slice
            .roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.z.clone(), r.multiplicity))
            .collect();
        let oracle = naive_fiber(&s.sys, &s.h.eval(&s.x).unwrap());
        let d = matching_distance(&ours, &oracle);
        ensure!(d <= 1e-7, "system {i}: distance {d:e}");
        worst = worst.max(d);
        nonempty += usize::from(!ours.is_empty());
    }
    Ok(format!(
        "worst matching distance {worst:.1e}; {nonempty}/100 nonempty fibers"
    ))
}

fn determinism() -> Outcome {
    for name in ["example12", "linear-sections-negative"] {
        let cfg = demo(name).unwrap();
        let a = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let b = run_experiment(&cfg).map_err(|e| e.to_string())?;
        for f in Format::ALL {
            ensure!(
                emit_report(&a, f) == emit_report(&b, f),
                "{name}: {f:?} reports differ"
            );
        }
    }
    Ok("json, csv and text identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("example12 end-to-end", example12, 10.0),
        ("twisted-cubic implicitization", twisted_cubic, 5.0),
        ("root-finder suite", root_finder, 5.0),
        ("negative control", negative_control, 10.0),
        ("transversality rejection", transversality, 1.0),
        ("Nash witness", nash, 5.0),
        ("fiber oracle equivalence", fiber_oracle, 10.0),
        ("determinism", determinism, f64::INFINITY),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed.as_secs_f64() > *limit => Err(format!(
                "{detail}; took {:.2} s, limit {limit} s",
                elapsed.as_secs_f64()
            )),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {} {:<32} {status} {:>7.2} s  {detail}",
            i + 1,
            name,
            elapsed.as_secs_f64()
        );
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 8 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
