use std::collections::BTreeMap;

use super::config::{
    Dims, DomainSpec, ExperimentConfig, GridSpec, Mode, PersistenceSpec, ReportPaths, Tolerances,
};
use crate::variety::ApproxScheme;

pub const DEMO_NAMES: [&str; 5] = [
    "example12",
    "linear-sections-negative",
    "linear-sections-constrained",
    "twisted-cubic-implicitize",
    "square-root-cover",
];

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn base(name: &str, dims: Dims, h: &[&str], q: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        mode: Mode::Converge,
        dims,
        h: strings(h),
        q: strings(q),
        h_domain: DomainSpec::disc(0.0, 1.0),
        domain: DomainSpec::disc(0.0, 0.9),
        grid: GridSpec::default(),
        scheme: None,
        nu_list: (0..8).map(|k| 1 << k).collect(),
        tolerances: Tolerances::default(),
        degree_bound: 2,
        implicitization_samples: 200,
        sample_points: 25,
        seed: 0,
        r: None,
        persistence: PersistenceSpec::default(),
        report: ReportPaths::default(),
    }
}

fn linear_sections(name: &str, scheme: ApproxScheme) -> ExperimentConfig {
    let mut cfg = base(
        name,
        Dims {
            n: 1,
            m: 2,
            p: 3,
            s: 3,
        },
        &["x1", "exp(x1) - 1", "x1 + exp(x1) - 1"],
        &["z1 - v1", "z2 - v2", "z1 + z2 - v3"],
    );
    cfg.scheme = Some(scheme);
    cfg.r = Some(2.0);
    cfg
}

/// Built-in configurations, runnable with no external files.
pub fn demo(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "example12" => {
            let mut cfg = base(
                name,
                Dims {
                    n: 1,
                    m: 1,
                    p: 3,
                    s: 2,
                },
                &["-x1", "x1*exp(x1)", "1"],
                &["z1*v2", "z1^2 + v1*z1"],
            );
            cfg.scheme = Some(ApproxScheme::Parametric {
                templates: strings(&["-x1", "(x1 - 1/NU)*exp(x1)", "1"]),
            });
            // The isolated point of X_nu sits over x = 1/NU, which the grid misses.
            cfg.grid.extra_points = vec![strings(&["1/NU"])];
            cfg
        }
        "linear-sections-negative" => linear_sections(
            name,
            ApproxScheme::UnconstrainedTruncation {
                shift: BTreeMap::from([("v3".to_string(), "1/NU".to_string())]),
            },
        ),
        "linear-sections-constrained" => linear_sections(
            name,
            ApproxScheme::ConstrainedTruncation {
                free: strings(&["v1", "v2"]),
                solved: BTreeMap::from([("v3".to_string(), "v1 + v2".to_string())]),
            },
        ),
        "twisted-cubic-implicitize" => {
            let mut cfg = base(
                name,
                Dims {
                    n: 1,
                    m: 1,
                    p: 3,
                    s: 1,
                },
                &["x1", "x1^2", "x1^3"],
                &["z1 - v1"],
            );
            cfg.mode = Mode::Implicitize;
            cfg
        }
        "square-root-cover" => {
            // Two sheets; the branch point v1 = 0 lies outside the domain.
            let mut cfg = base(
                name,
                Dims {
                    n: 1,
                    m: 1,
                    p: 1,
                    s: 1,
                },
                &["x1 + 2"],
                &["z1^2 - v1"],
            );
            cfg.scheme = Some(ApproxScheme::Parametric {
                templates: strings(&["x1 + 2 + 1/NU"]),
            });
            cfg.degree_bound = 1;
            cfg
        }
        _ => return None,
    };
    Some(cfg)
}
