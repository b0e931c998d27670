use std::f64::consts::PI;

use serde::Serialize;

use super::{fiber_solve, znorm, FiberError, FiberOptions, FiberSlice, SystemFamily};
use crate::expr::HoloMap;
use crate::numfmt::ser_f64;
use crate::poly::Cx;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistenceOptions {
    /// Probes per base coordinate, at angles `2 pi j / k`.
    pub k_probes: usize,
    /// Default `1e-3 * domain radius`.
    pub probe_radius: Option<f64>,
    /// Largest credited displacement; default `0.1 * domain radius`.
    pub c_track: Option<f64>,
    pub max_shrink: u32,
}

impl Default for PersistenceOptions {
    fn default() -> Self {
        PersistenceOptions {
            k_probes: 4,
            probe_radius: None,
            c_track: None,
            max_shrink: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistenceOutcome {
    /// The input slice restricted to persistent roots.
    pub slice: FiberSlice,
    /// One flag per root of the input slice.
    pub persistent: Vec<bool>,
    #[serde(serialize_with = "ser_f64")]
    pub probe_radius: f64,
    pub shrink_steps: u32,
    #[serde(serialize_with = "ser_f64")]
    pub c_track: f64,
    /// Largest probe-root displacement credited to a persistent root.
    #[serde(serialize_with = "ser_f64")]
    pub max_displacement: f64,
    /// Some persistent root was tracked beyond half of `c_track`.
    pub marginal: bool,
}

fn probes(x0: &[Cx], h: f64, k: usize) -> Vec<Vec<Cx>> {
    let mut out = Vec::new();
    for axis in 0..x0.len() {
        for j in 0..k {
            let mut x = x0.to_vec();
            x[axis] += Cx::from_polar(h, 2.0 * PI * j as f64 / k as f64);
            out.push(x);
        }
    }
    out
}

/// Keeps the roots of `slice` that survive moving the base point: each probe
/// fiber root is credited to its nearest slice root (if within `c_track`), and
/// a root persists when every probe credits it.
pub fn persistent_roots(
    sys: &SystemFamily,
    map: &HoloMap,
    slice: &FiberSlice,
    opts: &PersistenceOptions,
    fiber_opts: &FiberOptions,
) -> Result<PersistenceOutcome, FiberError> {
    let domain_radius = sys.domain.radii.iter().copied().fold(0.0, f64::max);
    let c_track = opts.c_track.unwrap_or(0.1 * domain_radius);
    let mut h = opts.probe_radius.unwrap_or(1e-3 * domain_radius);
    let mut shrink_steps = 0;
    while !probes(&slice.base_point, h, opts.k_probes)
        .iter()
        .all(|p| sys.domain.contains(p))
    {
        if shrink_steps == opts.max_shrink {
            return Err(FiberError::ProbeEscapes(slice.base_point.clone()));
        }
        h /= 2.0;
        shrink_steps += 1;
    }

    let n = slice.roots.len();
    let mut credited_everywhere = vec![true; n];
    let mut displacement = vec![0.0f64; n];
    if n > 0 {
        for probe in probes(&slice.base_point, h, opts.k_probes) {
            let fiber = fiber_solve(sys, map, &probe, slice.radius, fiber_opts)?;
            let mut credited = vec![false; n];
            for pr in &fiber.roots {
                let (j, d) = slice
                    .roots
                    .iter()
                    .enumerate()
                    .map(|(j, r)| {
                        let diff: Vec<Cx> = r.z.iter().zip(&pr.z).map(|(a, b)| a - b).collect();
                        (j, znorm(&diff))
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("slice has roots");
                if d <= c_track {
                    credited[j] = true;
                    displacement[j] = displacement[j].max(d);
                }
            }
            for (all, now) in credited_everywhere.iter_mut().zip(&credited) {
                *all &= *now;
            }
        }
    }

    let mut kept = slice.clone();
    kept.roots = slice
        .roots
        .iter()
        .zip(&credited_everywhere)
        .filter(|(_, &keep)| keep)
        .map(|(r, _)| r.clone())
        .collect();
    kept.residual_max = kept.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    let max_displacement = displacement
        .iter()
        .zip(&credited_everywhere)
        .filter(|(_, &keep)| keep)
        .map(|(d, _)| *d)
        .fold(0.0, f64::max);
    Ok(PersistenceOutcome {
        slice: kept,
        persistent: credited_everywhere,
        probe_radius: h,
        shrink_steps,
        c_track,
        max_displacement,
        marginal: max_displacement > 0.5 * c_track,
    })
}
