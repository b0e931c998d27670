use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    chain_degree_at, check_1l, check_2l, Check1l, Check2l, ConvergenceError, SpuriousRoot,
    VerticalSlice,
};
use crate::expr::HoloMap;
use crate::fibers::{
    fiber_solve, persistent_roots, sheet_count_of, FiberOptions, FiberSlice, PersistenceOptions,
    SheetCount, SystemFamily,
};
use crate::numfmt::{ser_f64, ser_vec_cx};
use crate::poly::Cx;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOptions {
    /// Pass bound for `sup_1l`.
    pub conv_tol: f64,
    /// Distance of the (2l) test compact from `X`; default `0.05 r`.
    pub delta: Option<f64>,
    /// Slice radii are capped at this fraction of `r`.
    pub epsilon_cap_fraction: f64,
    pub fiber: FiberOptions,
    pub persistence: PersistenceOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            conv_tol: 0.05,
            delta: None,
            epsilon_cap_fraction: 0.2,
            fiber: FiberOptions::default(),
            persistence: PersistenceOptions::default(),
        }
    }
}

/// One map of the approximating family, with base points tested only at this `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub nu: u32,
    pub map: HoloMap,
    pub extra_points: Vec<Vec<Cx>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeTest {
    pub slice: VerticalSlice,
    pub deg_x: usize,
    /// Degree against the persistent part of `X_nu`.
    pub deg_x_nu: usize,
    /// Degree against the unfiltered `X_nu`.
    pub deg_x_nu_full: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovedRoot {
    #[serde(serialize_with = "ser_vec_cx")]
    pub x: Vec<Cx>,
    #[serde(serialize_with = "ser_vec_cx")]
    pub z: Vec<Cx>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuRecord {
    pub nu: u32,
    pub full_1l: Check1l,
    pub full_2l: Check2l,
    pub pure_1l: Check1l,
    pub pure_2l: Check2l,
    /// Empty when support convergence was not established.
    pub degree_tests: Vec<DegreeTest>,
    pub degree_pass: Option<bool>,
    pub sheet_full: SheetCount,
    pub sheet_pure: SheetCount,
    /// Roots of `X_nu` removed by the persistence filter.
    pub removed_roots: Vec<RemovedRoot>,
    /// Base points whose persistence tracking came close to `c_track`.
    pub marginal_tracking: usize,
    /// Base points where the probe radius had to shrink.
    pub probe_shrinks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub failed_stage: Option<String>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub nu_list: Vec<u32>,
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta: f64,
    #[serde(serialize_with = "ser_f64")]
    pub conv_tol: f64,
    pub grid_size: usize,
    #[serde(serialize_with = "ser_points")]
    pub sample_points: Vec<Vec<Cx>>,
    pub sheet_x: SheetCount,
    pub records: Vec<NuRecord>,
    pub nu_star_1l: Option<u32>,
    pub nu_star_2l: Option<u32>,
    pub nu_star_1l_pure: Option<u32>,
    pub nu_star_2l_pure: Option<u32>,
    pub nu_star_chain: Option<u32>,
    /// Generic sheet count of the persistent part equals that of `X` for every `nu >= nu_star_chain`.
    pub sheet_equal: bool,
    pub verdict: Verdict,
}

pub(crate) fn ser_points<S: serde::Serializer>(pts: &[Vec<Cx>], s: S) -> Result<S::Ok, S::Error> {
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

/// Smallest `nu` from which every later entry passes.
pub fn nu_star(results: &[(u32, bool)]) -> Option<u32> {
    let mut star = None;
    for &(nu, pass) in results.iter().rev() {
        if !pass {
            break;
        }
        star = Some(nu);
    }
    star
}

fn is_regular(s: &FiberSlice) -> bool {
    !s.is_degenerate() && !s.roots.is_empty() && s.roots.iter().all(|r| r.multiplicity == 1)
}

/// Up to `count` base points, drawn with a seeded generator from the slices
/// of `X` whose roots are all simple; returned in grid order.
pub fn select_sample_points(x_slices: &[FiberSlice], count: usize, seed: u64) -> Vec<Vec<Cx>> {
    let regular: Vec<&FiberSlice> = x_slices.iter().filter(|s| is_regular(s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked =
        rand::seq::index::sample(&mut rng, regular.len(), count.min(regular.len())).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|i| regular[i].base_point.clone())
        .collect()
}

fn solve_all(
    sys: &SystemFamily,
    map: &HoloMap,
    points: &[Vec<Cx>],
    r: f64,
    opts: &FiberOptions,
) -> Result<Vec<FiberSlice>, ConvergenceError> {
    Ok(points
        .iter()
        .map(|x| fiber_solve(sys, map, x, r, opts))
        .collect::<Result<Vec<_>, _>>()?)
}

struct Filtered {
    slices: Vec<FiberSlice>,
    removed: Vec<RemovedRoot>,
    marginal: usize,
    shrinks: usize,
}

fn filter_all(
    sys: &SystemFamily,
    map: &HoloMap,
    full: &[FiberSlice],
    opts: &ConvergenceOptions,
) -> Result<Filtered, ConvergenceError> {
    let mut out = Filtered {
        slices: Vec::with_capacity(full.len()),
        removed: Vec::new(),
        marginal: 0,
        shrinks: 0,
    };
    for s in full {
        let p = persistent_roots(sys, map, s, &opts.persistence, &opts.fiber)?;
        for (root, keep) in s.roots.iter().zip(&p.persistent) {
            if !keep {
                out.removed.push(RemovedRoot {
                    x: s.base_point.clone(),
                    z: root.z.clone(),
                });
            }
        }
        out.marginal += usize::from(p.marginal);
        out.shrinks += usize::from(p.shrink_steps > 0);
        out.slices.push(p.slice);
    }
    Ok(out)
}

/// Runs the support tests on the full and persistent families over `grid`
/// (plus each member's extra points), then, if support convergence holds,
/// compares intersection degrees with vertical slices at the regular
/// `sample_points` of `X`.
pub fn lemma22_check(
    sys: &SystemFamily,
    h: &HoloMap,
    family: &[FamilyMember],
    grid: &[Vec<Cx>],
    sample_points: &[Vec<Cx>],
    r: f64,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport, ConvergenceError> {
    let delta = opts.delta.unwrap_or(0.05 * r);
    let x_grid = solve_all(sys, h, grid, r, &opts.fiber)?;
    let sheet_x = sheet_count_of(&x_grid);

    let x_samples = solve_all(sys, h, sample_points, r, &opts.fiber)?;
    let mut slices = Vec::new();
    for s in &x_samples {
        if !is_regular(s) {
            return Err(ConvergenceError::IrregularSample(s.base_point.clone()));
        }
        for i in 0..s.roots.len() {
            let t = VerticalSlice::auto(s, i, opts.epsilon_cap_fraction * r)?;
            let deg = chain_degree_at(s, &t)?;
            slices.push((t, deg));
        }
    }

    let mut records = Vec::new();
    let mut pure_samples = Vec::new();
    let mut full_samples = Vec::new();
    for member in family {
        let extras: Vec<Vec<Cx>> = member
            .extra_points
            .iter()
            .filter(|p| sys.domain.contains(p))
            .cloned()
            .collect();
        let mut x_slices = x_grid.clone();
        x_slices.extend(solve_all(sys, h, &extras, r, &opts.fiber)?);
        let mut points = grid.to_vec();
        points.extend(extras);

        let full = solve_all(sys, &member.map, &points, r, &opts.fiber)?;
        let pure = filter_all(sys, &member.map, &full, opts)?;
        let sample_full = solve_all(sys, &member.map, sample_points, r, &opts.fiber)?;
        let sample_pure = filter_all(sys, &member.map, &sample_full, opts)?.slices;
        full_samples.push(sample_full);
        pure_samples.push(sample_pure);

        records.push(NuRecord {
            nu: member.nu,
            full_1l: check_1l(&x_slices, &full, opts.conv_tol)?,
            full_2l: check_2l(&x_slices, &full, r, delta)?,
            pure_1l: check_1l(&x_slices, &pure.slices, opts.conv_tol)?,
            pure_2l: check_2l(&x_slices, &pure.slices, r, delta)?,
            degree_tests: Vec::new(),
            degree_pass: None,
            sheet_full: sheet_count_of(&full),
            sheet_pure: sheet_count_of(&pure.slices),
            removed_roots: pure.removed,
            marginal_tracking: pure.marginal,
            probe_shrinks: pure.shrinks,
        });
    }

    let star = |records: &[NuRecord], f: &dyn Fn(&NuRecord) -> bool| {
        nu_star(&records.iter().map(|r| (r.nu, f(r))).collect::<Vec<_>>())
    };
    let nu_star_1l = star(&records, &|r| r.full_1l.pass);
    let nu_star_2l = star(&records, &|r| r.full_2l.pass);
    let nu_star_1l_pure = star(&records, &|r| r.pure_1l.pass);
    let nu_star_2l_pure = star(&records, &|r| r.pure_2l.pass);

    let support = nu_star_1l.is_some()
        && nu_star_2l.is_some()
        && nu_star_1l_pure.is_some()
        && nu_star_2l_pure.is_some();
    let mut nu_star_chain = None;
    let mut sheet_equal = false;
    if support {
        for (k, record) in records.iter_mut().enumerate() {
            let tests: Vec<DegreeTest> = slices
                .iter()
                .map(|(t, deg_x)| {
                    let at = sample_points
                        .iter()
                        .position(|p| *p == t.base_point)
                        .expect("slice built from a sample point");
                    let deg_x_nu = chain_degree_at(&pure_samples[k][at], t)?;
                    let deg_x_nu_full = chain_degree_at(&full_samples[k][at], t)?;
                    Ok(DegreeTest {
                        slice: t.clone(),
                        deg_x: *deg_x,
                        deg_x_nu,
                        deg_x_nu_full,
                        pass: deg_x_nu == *deg_x,
                    })
                })
                .collect::<Result<_, ConvergenceError>>()?;
            record.degree_pass = Some(tests.iter().all(|t| t.pass));
            record.degree_tests = tests;
        }
        nu_star_chain = star(&records, &|r| r.degree_pass == Some(true));
        if let Some(c) = nu_star_chain {
            sheet_equal = records
                .iter()
                .filter(|r| r.nu >= c)
                .all(|r| r.sheet_pure.generic_cardinality == sheet_x.generic_cardinality);
        }
    }

    let verdict = if nu_star_1l.is_none() || nu_star_1l_pure.is_none() {
        fail(
            "check_1l",
            "some root of X is not approximated for the largest tested nu",
        )
    } else if nu_star_2l.is_none() || nu_star_2l_pure.is_none() {
        fail(
            "check_2l",
            "roots of X_nu remain away from X for the largest tested nu",
        )
    } else if nu_star_chain.is_none() {
        fail(
            "lemma22_check",
            "slice degrees differ for the largest tested nu",
        )
    } else if !sheet_equal {
        fail(
            "sheet_count",
            "generic sheet count of the persistent part differs from X",
        )
    } else {
        Verdict {
            pass: true,
            failed_stage: None,
            reason: None,
        }
    };

    Ok(ConvergenceReport {
        nu_list: family.iter().map(|m| m.nu).collect(),
        r,
        delta,
        conv_tol: opts.conv_tol,
        grid_size: grid.len(),
        sample_points: sample_points.to_vec(),
        sheet_x,
        records,
        nu_star_1l,
        nu_star_2l,
        nu_star_1l_pure,
        nu_star_2l_pure,
        nu_star_chain,
        sheet_equal,
        verdict,
    })
}

fn fail(stage: &str, reason: &str) -> Verdict {
    Verdict {
        pass: false,
        failed_stage: Some(stage.to_string()),
        reason: Some(reason.to_string()),
    }
}

impl NuRecord {
    pub fn spurious_full(&self) -> &[SpuriousRoot] {
        &self.full_2l.spurious
    }
}
