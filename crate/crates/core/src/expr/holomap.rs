use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ExprError, ExprTree};
use crate::poly::Cx;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Axis-aligned polydisc: the product of discs `|x_j - center_j| <= radii_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polydisc {
    pub center: Vec<Cx>,
    pub radii: Vec<f64>,
}

impl Polydisc {
    pub fn disc(center: Cx, radius: f64) -> Self {
        Polydisc {
            center: vec![center],
            radii: vec![radius],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[Cx]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.center)
                .zip(&self.radii)
                .all(|((x, c), r)| (x - c).norm() <= *r)
    }

    /// Points of a `per_axis x per_axis` Cartesian grid over each bounding
    /// square that lie strictly inside the disc, combined across axes by product.
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vec<Cx>> {
        let axes: Vec<Vec<Cx>> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| square_grid(*c, *r, per_axis))
            .collect();
        product(&axes)
    }

    /// Equispaced points on the distinguished boundary (the torus of circles).
    pub fn boundary_grid(&self, per_axis: usize) -> Vec<Vec<Cx>> {
        let axes: Vec<Vec<Cx>> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| {
                (0..per_axis)
                    .map(|k| c + Cx::from_polar(*r, 2.0 * PI * k as f64 / per_axis as f64))
                    .collect()
            })
            .collect();
        product(&axes)
    }

    /// Deterministic near-uniform samples of a one-dimensional disc
    /// (sunflower spiral). Panics unless `dim() == 1`.
    pub fn sunflower(&self, count: usize) -> Vec<Cx> {
        assert_eq!(
            self.dim(),
            1,
            "sunflower sampling needs a one-dimensional domain"
        );
        let (c, r) = (self.center[0], self.radii[0]);
        (0..count)
            .map(|k| {
                let rho = r * ((k as f64 + 0.5) / count as f64).sqrt();
                c + Cx::from_polar(rho, k as f64 * GOLDEN_ANGLE)
            })
            .collect()
    }
}

fn square_grid(c: Cx, r: f64, per_axis: usize) -> Vec<Cx> {
    let step = |k: usize| {
        if per_axis == 1 {
            0.0
        } else {
            -r + 2.0 * r * k as f64 / (per_axis - 1) as f64
        }
    };
    let mut out = Vec::new();
    for i in 0..per_axis {
        for j in 0..per_axis {
            let d = Cx::new(step(i), step(j));
            // Points on the circle belong to the boundary grid.
            if d.norm() < r * (1.0 - 1e-12) {
                out.push(c + d);
            }
        }
    }
    out
}

fn product(axes: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    let mut out: Vec<Vec<Cx>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out
}

/// A map `U -> C^p` given componentwise by expressions in `x1..xn`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloMap {
    pub components: Vec<ExprTree>,
    pub base_dim: usize,
    pub domain: Polydisc,
}

impl HoloMap {
    pub fn new(components: Vec<ExprTree>, domain: Polydisc) -> Result<Self, ExprError> {
        let base_dim = domain.dim();
        let names = base_names(base_dim);
        for c in &components {
            if let Some(bad) = c.variables().into_iter().find(|v| !names.contains(v)) {
                return Err(ExprError::MissingVariable(bad));
            }
        }
        Ok(HoloMap {
            components,
            base_dim,
            domain,
        })
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, x: &[Cx]) -> Result<Vec<Cx>, ExprError> {
        if x.len() != self.base_dim {
            return Err(ExprError::DimensionMismatch {
                expected: self.base_dim,
                got: x.len(),
            });
        }
        let lookup = |name: &str| base_index(name).filter(|&i| i < x.len()).map(|i| x[i]);
        self.components
            .iter()
            .map(|c| c.eval_with(&lookup))
            .collect()
    }

    /// Largest componentwise distance `max |self_j(x) - other_j(x)|` over `points`.
    pub fn sup_distance(&self, other: &HoloMap, points: &[Vec<Cx>]) -> Result<f64, ExprError> {
        let mut sup = 0.0f64;
        for x in points {
            let (a, b) = (self.eval(x)?, other.eval(x)?);
            for (u, v) in a.iter().zip(&b) {
                sup = sup.max((u - v).norm());
            }
        }
        Ok(sup)
    }
}

/// `["x1", ..., "xn"]`.
pub fn base_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn base_index(name: &str) -> Option<usize> {
    name.strip_prefix('x')?
        .parse::<usize>()
        .ok()?
        .checked_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn grid_stays_inside_disc() {
        let d = Polydisc::disc(Cx::new(0.5, -0.5), 2.0);
        let g = d.interior_grid(21);
        assert!(!g.is_empty());
        assert!(g.iter().all(|p| d.contains(p)));
        assert!(g.iter().any(|p| p[0] == Cx::new(0.5, -0.5)));
        assert!(g
            .iter()
            .all(|p| (p[0] - Cx::new(0.5, -0.5)).norm() < 2.0 - 1e-9));
        // 317 lattice points with a^2 + b^2 <= 100, minus the 12 on the circle.
        assert_eq!(g.len(), 305);
    }

    #[test]
    fn boundary_is_on_circle() {
        let d = Polydisc::disc(Cx::new(0.0, 0.0), 0.9);
        let b = d.boundary_grid(64);
        assert_eq!(b.len(), 64);
        assert!(b.iter().all(|p| (p[0].norm() - 0.9).abs() < 1e-15));
    }

    #[test]
    fn two_dimensional_product() {
        let d = Polydisc {
            center: vec![Cx::new(0.0, 0.0); 2],
            radii: vec![1.0, 1.0],
        };
        assert_eq!(d.boundary_grid(4).len(), 16);
    }

    #[test]
    fn sunflower_is_inside_and_distinct() {
        let d = Polydisc::disc(Cx::new(1.0, 0.0), 0.5);
        let s = d.sunflower(200);
        assert!(s.iter().all(|p| (p - Cx::new(1.0, 0.0)).norm() < 0.5));
        for i in 0..s.len() {
            for j in 0..i {
                assert!((s[i] - s[j]).norm() > 1e-4);
            }
        }
    }

    #[test]
    fn map_evaluation() {
        let comps = ["-x1", "x1*exp(x1)", "1"]
            .map(|s| parse_expr(s).unwrap())
            .to_vec();
        let h = HoloMap::new(comps, Polydisc::disc(Cx::new(0.0, 0.0), 1.0)).unwrap();
        let v = h.eval(&[Cx::new(1.0, 0.0)]).unwrap();
        assert_eq!(v[0], Cx::new(-1.0, 0.0));
        assert!((v[1].re - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(v[2], Cx::new(1.0, 0.0));
        assert!(matches!(
            h.eval(&[]),
            Err(ExprError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let comps = vec![parse_expr("x2").unwrap()];
        assert!(HoloMap::new(comps, Polydisc::disc(Cx::new(0.0, 0.0), 1.0)).is_err());
    }
}
