mod common;

use std::collections::BTreeMap;

use common::{rng, unit_disc};
use nalgebra::DMatrix;
use nashlab::expr::{parse_expr, HoloMap, Polydisc};
use nashlab::poly::{monomials_up_to, Cx};
use nashlab::variety::{
    make_approximant, nash_witness, vanishing_ideal, ApproxScheme, VarietyBasis,
};

const FIXTURES: [(&[&str], f64); 5] = [
    (&["-x1", "x1*exp(x1)", "1"], 1.0),
    (&["x1", "x1^2", "x1^3"], 1.0),
    (&["x1", "exp(x1) - 1", "x1 + exp(x1) - 1"], 1.0),
    (&["exp(x1)", "exp(-x1)"], 1.0),
    (&["x1", "1/(1 + x1)"], 0.5),
];

fn map(exprs: &[&str], radius: f64) -> HoloMap {
    let comps = exprs.iter().map(|s| parse_expr(s).unwrap()).collect();
    HoloMap::new(comps, Polydisc::disc(Cx::new(0.0, 0.0), radius)).unwrap()
}

fn basis(h: &HoloMap, count: usize) -> VarietyBasis {
    let samples: Vec<Vec<Cx>> = h
        .domain
        .sunflower(count)
        .iter()
        .map(|x| h.eval(&[*x]).unwrap())
        .collect();
    vanishing_ideal(&samples, 2, 1e-8).unwrap()
}

fn random_points(h: &HoloMap, count: usize, seed: u64) -> Vec<Vec<Cx>> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| vec![unit_disc(&mut g) * h.domain.radii[0]])
        .collect()
}

#[test]
fn relations_vanish_on_fresh_samples() {
    for (i, (exprs, radius)) in FIXTURES.iter().enumerate() {
        let h = map(exprs, *radius);
        let b = basis(&h, 200);
        assert!(b.dim() > 0, "fixture {i}");
        for x in random_points(&h, 100, i as u64) {
            let v = h.eval(&x).unwrap();
            // 1 + |v|^d with d = 2.
            let scale = 1.0 + v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            for r in &b.relations {
                assert!(
                    r.eval_slice(&v).norm() <= 1e-8 * scale,
                    "fixture {i} at {x:?}"
                );
            }
        }
    }
}

#[test]
fn nullspace_stable_under_doubling() {
    for (i, (exprs, radius)) in FIXTURES.iter().enumerate() {
        let h = map(exprs, *radius);
        let (a, b) = (basis(&h, 150), basis(&h, 300));
        assert_eq!(a.dim(), b.dim(), "fixture {i}");
        assert!(
            a.subspace_distance(&b) <= 1e-6,
            "fixture {i}: {:e}",
            a.subspace_distance(&b)
        );
    }
}

fn validation(h: &HoloMap) -> Vec<Vec<Cx>> {
    let mut g = h.domain.interior_grid(21);
    g.extend(h.domain.boundary_grid(64));
    g
}

#[test]
fn constrained_schemes_stay_in_the_variety() {
    let nus = [1, 2, 4, 8, 16, 32, 64, 128];
    let cases = [
        (
            0,
            ApproxScheme::Parametric {
                templates: vec!["-x1".into(), "(x1 - 1/NU)*exp(x1)".into(), "1".into()],
            },
        ),
        (
            2,
            ApproxScheme::ConstrainedTruncation {
                free: vec!["v1".into(), "v2".into()],
                solved: BTreeMap::from([("v3".to_string(), "v1 + v2".to_string())]),
            },
        ),
        (
            3,
            ApproxScheme::ConstrainedTruncation {
                free: vec!["v1".into()],
                solved: BTreeMap::from([("v2".to_string(), "1/v1".to_string())]),
            },
        ),
    ];
    for (i, scheme) in cases {
        let (exprs, radius) = FIXTURES[i];
        let h = map(exprs, radius);
        let b = basis(&h, 200);
        let pts = validation(&h);
        for nu in nus {
            let a = make_approximant(&scheme, &h, &b, nu, &pts).unwrap();
            let worst = pts
                .iter()
                .map(|x| b.membership_residual(&a.map.eval(x).unwrap()))
                .fold(0.0, f64::max);
            assert!(worst <= 1e-6, "fixture {i} nu={nu}: {worst:e}");
        }
    }
}

#[test]
fn truncation_distance_strictly_decreases() {
    // Until the truncation error reaches rounding level.
    for (i, scheme) in [
        ApproxScheme::UnconstrainedTruncation {
            shift: BTreeMap::new(),
        },
        ApproxScheme::ConstrainedTruncation {
            free: vec!["v1".into(), "v2".into()],
            solved: BTreeMap::from([("v3".to_string(), "v1 + v2".to_string())]),
        },
    ]
    .iter()
    .enumerate()
    {
        let h = map(FIXTURES[2].0, 1.0);
        let b = basis(&h, 200);
        let pts = validation(&h);
        let d: Vec<f64> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&nu| {
                make_approximant(scheme, &h, &b, nu, &pts)
                    .unwrap()
                    .sup_distance
            })
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "scheme {i}: {d:?}");
    }
}

/// `sigma_min / sigma_max` of the column-normalized monomial matrix of
/// `(x, f(x))` at random points, for total degree `k`.
fn rank_ratio(f: &str, radius: f64, k: u32, seed: u64) -> f64 {
    let e = parse_expr(f).unwrap();
    let mut g = rng(seed);
    let monos = monomials_up_to(2, k);
    let rows: Vec<Vec<Cx>> = (0..300)
        .map(|_| {
            let x = unit_disc(&mut g) * radius;
            let y = e.eval(&BTreeMap::from([("x1".to_string(), x)])).unwrap();
            monos.iter().map(|m| x.powu(m[0]) * y.powu(m[1])).collect()
        })
        .collect();
    let mut a = DMatrix::from_fn(rows.len(), monos.len(), |i, j| rows[i][j]);
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        col /= Cx::new(n, 0.0);
    }
    let s = a.singular_values();
    s.min() / s.max()
}

#[test]
fn nash_witness_iff_rank_deficient() {
    let cases = [
        ("x1^2", 1.0, 2),
        ("1/(1 + x1)", 0.5, 2),
        ("x1 + x1^3", 1.0, 3),
        ("(1 + x1)^2/(2 - x1)", 1.0, 3),
        ("exp(x1)", 10.0, 6),
        ("exp(x1) + x1", 10.0, 4),
    ];
    for (f, radius, d) in cases {
        let domain = Polydisc::disc(Cx::new(0.0, 0.0), radius);
        let found = nash_witness(&parse_expr(f).unwrap(), &domain, d).unwrap();
        let deficient = (1..=d).any(|k| rank_ratio(f, radius, k, 7) < 1e-10);
        assert_eq!(found.is_some(), deficient, "{f}");
        if let Some(p) = found {
            let e = parse_expr(f).unwrap();
            for x in random_points(&map(&["x1"], radius), 50, 11) {
                let y = e.eval(&BTreeMap::from([("x1".to_string(), x[0])])).unwrap();
                assert!(p.eval_slice(&[x[0], y]).norm() <= 1e-8, "{f} at {x:?}");
            }
        }
    }
}
