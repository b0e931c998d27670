//! Simultaneous root finding (Aberth–Ehrlich) and single-linkage clustering
//! of the resulting roots into multiplicities.

use std::f64::consts::PI;

use super::{Cx, PolyError, UniPoly};

/// Tuning for [`aberth_roots_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AberthOptions {
    pub max_iterations: usize,
    /// A root stops moving once its step is below `step_tol * cauchy_bound`.
    pub step_tol: f64,
    /// Angular offset of the initial roots-of-unity circle, in radians.
    pub start_angle: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        AberthOptions {
            max_iterations: 200,
            step_tol: 1e-14,
            start_angle: 0.4,
        }
    }
}

/// All `deg(p)` roots of `p`, repeated for multiple roots.
///
/// Each returned root satisfies `|p(r)| <= tol * scale(p) * max(1, |r|)^deg`;
/// otherwise the call fails with [`PolyError::NoConvergence`].
pub fn aberth_roots(p: &UniPoly, tol: f64) -> Result<Vec<Cx>, PolyError> {
    aberth_roots_with(p, tol, AberthOptions::default())
}

pub fn aberth_roots_with(p: &UniPoly, tol: f64, opts: AberthOptions) -> Result<Vec<Cx>, PolyError> {
    let p = p.normalized();
    let coeffs = p.coeffs();
    if coeffs.is_empty() {
        return Err(PolyError::ZeroPolynomial);
    }
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Err(PolyError::DegreeZero);
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(PolyError::NonFinite);
    }

    // Exact zero roots are split off before iterating.
    let zeros = coeffs
        .iter()
        .take_while(|c| **c == Cx::new(0.0, 0.0))
        .count();
    let lead = coeffs[degree];
    let monic = UniPoly::new(coeffs[zeros..].iter().map(|c| c / lead).collect());
    let mut roots = vec![Cx::new(0.0, 0.0); zeros];

    let reduced_degree = degree - zeros;
    if reduced_degree == 1 {
        roots.push(-monic.coeffs()[0]);
    } else if reduced_degree > 1 {
        roots.extend(iterate(&monic, opts)?);
    }

    let scale = p.scale();
    let max_residual = roots
        .iter()
        .map(|&r| p.eval(r).norm() / (scale * r.norm().max(1.0).powi(degree as i32)))
        .fold(0.0, f64::max);
    if !(max_residual <= tol) {
        return Err(PolyError::NoConvergence {
            iterations: opts.max_iterations,
            max_residual,
        });
    }
    Ok(roots)
}

fn iterate(monic: &UniPoly, opts: AberthOptions) -> Result<Vec<Cx>, PolyError> {
    let c = monic.coeffs();
    let n = c.len() - 1;
    let bound = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);

    let mut z: Vec<Cx> = (0..n)
        .map(|k| Cx::from_polar(bound, 2.0 * PI * k as f64 / n as f64 + opts.start_angle))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..opts.max_iterations {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dpv) = monic.eval_with_derivative(z[k]);
            // Residual already at the rounding level of the evaluation.
            if pv.norm() <= 4.0 * f64::EPSILON * monic.magnitude_at(z[k]) {
                done[k] = true;
                continue;
            }
            let repulsion: Cx = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d == Cx::new(0.0, 0.0) {
                        Cx::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = dpv - pv * repulsion;
            let step = if denom == Cx::new(0.0, 0.0) || !denom.is_finite() {
                // Nudge off a critical point.
                Cx::from_polar(1e-8 * bound, k as f64)
            } else {
                pv / denom
            };
            if !step.is_finite() {
                return Err(PolyError::NonFinite);
            }
            z[k] -= step;
            if step.norm() < opts.step_tol * bound {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    Ok(z)
}

/// A group of numerically coincident roots.
#[derive(Clone, Debug, PartialEq)]
pub struct RootCluster {
    pub center: Cx,
    pub multiplicity: usize,
    /// Largest distance from `center` to a member.
    pub radius: f64,
}

/// `1e-6 * (1 + max |root|)`.
pub fn default_cluster_radius(roots: &[Cx]) -> f64 {
    1e-6 * (1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max))
}

/// Single-linkage clustering: roots closer than `radius` (transitively) share a cluster.
///
/// Clusters are returned in order of their first member in `roots`.
pub fn cluster_roots(roots: &[Cx], radius: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Cx>)> = Vec::new();
    for (i, &z) in roots.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(z),
            None => groups.push((root, vec![z])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let center = members.iter().sum::<Cx>() / members.len() as f64;
            let radius = members
                .iter()
                .map(|m| (m - center).norm())
                .fold(0.0, f64::max);
            RootCluster {
                center,
                multiplicity: members.len(),
                radius,
            }
        })
        .collect()
}
