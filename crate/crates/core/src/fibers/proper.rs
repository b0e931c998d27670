use std::collections::BTreeMap;

use serde::Serialize;

use super::{fiber_solve, znorm, FiberError, FiberOptions, FiberSlice, SystemFamily};
use crate::expr::HoloMap;
use crate::numfmt::{ser_f64, ser_vec_cx};
use crate::poly::Cx;

/// Roots closer than `MARGIN_FRACTION * r` to the sphere `|z| = r` fail properness.
pub const MARGIN_FRACTION: f64 = 0.1;
/// The r_0 search tries `2^0 .. 2^R0_MAX_DOUBLINGS`.
pub const R0_MAX_DOUBLINGS: i32 = 20;

fn unbounded_slices(
    sys: &SystemFamily,
    map: &HoloMap,
    grid: &[Vec<Cx>],
    opts: &FiberOptions,
) -> Result<Vec<FiberSlice>, FiberError> {
    if grid.is_empty() {
        return Err(FiberError::EmptyGrid);
    }
    grid.iter()
        .map(|x| fiber_solve(sys, map, x, f64::INFINITY, opts))
        .collect()
}

fn count_within(s: &FiberSlice, r: f64) -> usize {
    s.roots
        .iter()
        .filter(|root| znorm(&root.z) <= r)
        .map(|root| root.multiplicity)
        .sum()
}

/// Distance from the nearest root to the sphere `|z| = r` (infinite for an empty fiber).
fn sphere_gap(s: &FiberSlice, r: f64) -> f64 {
    s.roots
        .iter()
        .map(|root| (znorm(&root.z) - r).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Most frequent value; ties go to the smaller value.
fn mode(values: impl Iterator<Item = usize>) -> Option<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(v, _)| *v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R0Report {
    #[serde(serialize_with = "ser_f64")]
    pub r0: f64,
    /// Smallest distance of a grid-fiber root to the sphere `|z| = r0`.
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
    /// Total multiplicity at non-degenerate grid points.
    pub total_multiplicity: usize,
}

/// Smallest `r = 2^k` at which the in-ball fiber counts are the same at `r`
/// and `2r` at every grid point, constant over non-degenerate points, and no
/// root is within `0.1 r` of the sphere.
pub fn find_r0(
    sys: &SystemFamily,
    map: &HoloMap,
    grid: &[Vec<Cx>],
    opts: &FiberOptions,
) -> Result<R0Report, FiberError> {
    let slices = unbounded_slices(sys, map, grid, opts)?;
    for k in 0..=R0_MAX_DOUBLINGS {
        let r = 2f64.powi(k);
        let stable = slices
            .iter()
            .all(|s| count_within(s, r) == count_within(s, 2.0 * r));
        let margin = slices
            .iter()
            .map(|s| sphere_gap(s, r))
            .fold(f64::INFINITY, f64::min);
        let mut generic = slices
            .iter()
            .filter(|s| !s.is_degenerate())
            .map(|s| count_within(s, r));
        let first = generic.next();
        let constant = generic.all(|c| Some(c) == first);
        if stable && constant && margin >= MARGIN_FRACTION * r {
            return Ok(R0Report {
                r0: r,
                margin,
                total_multiplicity: first.unwrap_or(0),
            });
        }
    }
    Err(FiberError::NoStabilization {
        cap: 2f64.powi(R0_MAX_DOUBLINGS),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProperReport {
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    #[serde(serialize_with = "ser_f64")]
    pub margin_required: f64,
    #[serde(serialize_with = "ser_f64")]
    pub min_margin: f64,
    /// Most frequent in-ball total multiplicity over non-degenerate points.
    pub total_multiplicity: Option<usize>,
    /// Non-degenerate points whose total multiplicity differs from the mode.
    #[serde(serialize_with = "ser_points")]
    pub count_witnesses: Vec<Vec<Cx>>,
    /// Points with a root outside the ball or within the margin of its sphere.
    #[serde(serialize_with = "ser_points")]
    pub sphere_witnesses: Vec<Vec<Cx>>,
    /// Points where some equation vanishes identically; excluded from the count check.
    #[serde(serialize_with = "ser_points")]
    pub degenerate_points: Vec<Vec<Cx>>,
    /// The failing point whose fiber escapes furthest (an emptied fiber counts as infinitely far).
    #[serde(serialize_with = "ser_opt_point")]
    pub witness: Option<Vec<Cx>>,
}

fn ser_points<S: serde::Serializer>(pts: &[Vec<Cx>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct P<'a>(&'a [Cx]);
    impl Serialize for P<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            ser_vec_cx(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(pts.len()))?;
    for p in pts {
        seq.serialize_element(&P(p))?;
    }
    seq.end()
}

fn ser_opt_point<S: serde::Serializer>(p: &Option<Vec<Cx>>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => ser_vec_cx(p, s),
        None => s.serialize_none(),
    }
}

/// Checks that no fiber root over `grid` approaches the sphere `|z| = r` and
/// that the total in-ball multiplicity is constant over non-degenerate points.
pub fn check_proper(
    sys: &SystemFamily,
    map: &HoloMap,
    grid: &[Vec<Cx>],
    r: f64,
    opts: &FiberOptions,
) -> Result<ProperReport, FiberError> {
    let slices = unbounded_slices(sys, map, grid, opts)?;
    let margin_required = MARGIN_FRACTION * r;
    let total = mode(
        slices
            .iter()
            .filter(|s| !s.is_degenerate())
            .map(|s| count_within(s, r)),
    );

    let mut count_witnesses = Vec::new();
    let mut sphere_witnesses = Vec::new();
    let mut degenerate_points = Vec::new();
    let mut witness: Option<(f64, Vec<Cx>)> = None;
    let mut min_margin = f64::INFINITY;
    for s in &slices {
        let gap = sphere_gap(s, r);
        min_margin = min_margin.min(gap);
        let count = count_within(s, r);
        let mut escape = None;
        if s.is_degenerate() {
            degenerate_points.push(s.base_point.clone());
        } else if Some(count) != total {
            count_witnesses.push(s.base_point.clone());
            escape = Some(if count < total.unwrap_or(0) && s.max_norm() <= r {
                f64::INFINITY
            } else {
                s.max_norm()
            });
        }
        if gap < margin_required || s.max_norm() > r {
            sphere_witnesses.push(s.base_point.clone());
            escape = Some(escape.unwrap_or(0.0).max(s.max_norm()));
        }
        if let Some(e) = escape {
            if witness.as_ref().is_none_or(|(w, _)| e > *w) {
                witness = Some((e, s.base_point.clone()));
            }
        }
    }
    Ok(ProperReport {
        pass: count_witnesses.is_empty() && sphere_witnesses.is_empty(),
        r,
        margin_required,
        min_margin,
        total_multiplicity: total,
        count_witnesses,
        sphere_witnesses,
        degenerate_points,
        witness: witness.map(|(_, x)| x),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SheetCount {
    pub max_cardinality: usize,
    /// Most frequent distinct-root count (ties to the smaller count).
    pub generic_cardinality: usize,
}

pub fn sheet_count_of(slices: &[FiberSlice]) -> SheetCount {
    SheetCount {
        max_cardinality: slices.iter().map(FiberSlice::distinct).max().unwrap_or(0),
        generic_cardinality: mode(slices.iter().map(FiberSlice::distinct)).unwrap_or(0),
    }
}

pub fn sheet_count(
    sys: &SystemFamily,
    map: &HoloMap,
    grid: &[Vec<Cx>],
    r: f64,
    opts: &FiberOptions,
) -> Result<SheetCount, FiberError> {
    if grid.is_empty() {
        return Err(FiberError::EmptyGrid);
    }
    let slices = grid
        .iter()
        .map(|x| fiber_solve(sys, map, x, r, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sheet_count_of(&slices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Polydisc};

    fn disc(c: f64, r: f64) -> Polydisc {
        Polydisc::disc(Cx::new(c, 0.0), r)
    }

    fn setup(
        q: &[&str],
        p: usize,
        h: &[&str],
        domain: Polydisc,
    ) -> (SystemFamily, HoloMap, Vec<Vec<Cx>>) {
        let sys = SystemFamily::parse(q, p, 1, domain.clone()).unwrap();
        let map = HoloMap::new(
            h.iter().map(|s| parse_expr(s).unwrap()).collect(),
            disc(0.0, 1.0),
        )
        .unwrap();
        let mut grid = domain.interior_grid(21);
        grid.extend(domain.boundary_grid(64));
        (sys, map, grid)
    }

    #[test]
    fn example12() {
        let (sys, map, grid) = setup(
            &["z1*v2", "z1^2+v1*z1"],
            3,
            &["-x1", "x1*exp(x1)", "1"],
            disc(0.0, 0.9),
        );
        let opts = FiberOptions::default();
        let r0 = find_r0(&sys, &map, &grid, &opts).unwrap();
        assert!(r0.r0 <= 2.0);
        assert_eq!(r0.total_multiplicity, 1);
        let rep = check_proper(&sys, &map, &grid, 2.0, &opts).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.total_multiplicity, Some(1));
        // x = 0: the first equation vanishes and the second has a double root.
        assert_eq!(rep.degenerate_points, vec![vec![Cx::new(0.0, 0.0)]]);
        let sc = sheet_count(&sys, &map, &grid, 2.0, &opts).unwrap();
        assert_eq!(
            sc,
            SheetCount {
                max_cardinality: 1,
                generic_cardinality: 1
            }
        );
    }

    #[test]
    fn square_root_cover() {
        let (sys, map, grid) = setup(&["z1^2-v1"], 1, &["x1"], disc(0.0, 1.0));
        let opts = FiberOptions::default();
        assert!(find_r0(&sys, &map, &grid, &opts).unwrap().r0 <= 2.0);
        let rep = check_proper(&sys, &map, &grid, 2.0, &opts).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.total_multiplicity, Some(2));
        let sc = sheet_count(&sys, &map, &grid, 2.0, &opts).unwrap();
        assert_eq!(
            sc,
            SheetCount {
                max_cardinality: 2,
                generic_cardinality: 2
            }
        );
    }

    #[test]
    fn hyperbola_is_not_proper_over_the_origin() {
        let (sys, map, grid) = setup(&["z1*v1-1"], 1, &["x1"], disc(0.0, 1.0));
        let opts = FiberOptions::default();
        assert!(matches!(
            find_r0(&sys, &map, &grid, &opts),
            Err(FiberError::NoStabilization { .. })
        ));
        let rep = check_proper(&sys, &map, &grid, 2.0, &opts).unwrap();
        assert!(!rep.pass);
        assert!(rep.witness.unwrap()[0].norm() < 0.1);
    }

    #[test]
    fn hyperbola_away_from_the_origin() {
        let (sys, map, grid) = setup(&["z1*v1-1"], 1, &["x1"], disc(0.6, 0.3));
        let r0 = find_r0(&sys, &map, &grid, &FiberOptions::default()).unwrap();
        // Roots 1/x have norms in [1/0.9, 1/0.3], clear of the sphere |z| = 4 by 0.67.
        assert_eq!(r0.r0, 4.0);
    }

    #[test]
    fn mode_prefers_smaller_on_ties() {
        assert_eq!(mode([2, 1, 2, 1].into_iter()), Some(1));
        assert_eq!(mode([3, 3, 1].into_iter()), Some(3));
        assert_eq!(mode(std::iter::empty()), None);
    }
}
