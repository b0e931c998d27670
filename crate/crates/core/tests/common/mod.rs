//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use nashlab::poly::{Cx, MultiPoly, UniPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the closed unit disc.
pub fn unit_disc(rng: &mut impl Rng) -> Cx {
    let r = rng.random::<f64>().sqrt();
    Cx::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
}

pub fn random_unipoly(rng: &mut impl Rng, degree: usize) -> UniPoly {
    let mut c: Vec<Cx> = (0..=degree).map(|_| unit_disc(rng)).collect();
    // Keep the nominal degree: a leading coefficient below LEAD_EPS would drop it.
    while c[degree].norm() < 1e-3 {
        c[degree] = unit_disc(rng);
    }
    UniPoly::new(c)
}

/// Eigenvalues of the companion matrix (complex Schur form).
pub fn companion_roots(p: &UniPoly) -> Vec<Cx> {
    let c = p.normalized().coeffs().to_vec();
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<Cx>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Cx::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

/// Determinant by LU.
pub fn dense_det(rows: &[Vec<Cx>]) -> Cx {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}

/// Sylvester matrix of two univariate coefficient lists (ascending powers),
/// built from the formal degrees.
pub fn numeric_sylvester(a: &[Cx], b: &[Cx]) -> Vec<Vec<Cx>> {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    let mut rows = vec![vec![Cx::new(0.0, 0.0); size]; size];
    for i in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            rows[i][i + k] = *c;
        }
    }
    for j in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            rows[n + j][j + k] = *c;
        }
    }
    rows
}

/// Bottleneck distance of two equal-size point multisets under the best
/// matching; infinite when sizes differ. Exact DP over subsets.
pub fn matching_distance(a: &[Vec<Cx>], b: &[Vec<Cx>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    assert!(n <= 16, "matching oracle is exponential in n");
    let dist = |i: usize, j: usize| -> f64 {
        a[i].iter()
            .zip(&b[j])
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 0..(1usize << n) {
        let i = mask.count_ones() as usize;
        if i == n || !best[mask].is_finite() {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                best[next] = best[next].min(best[mask].max(dist(i, j)));
            }
        }
    }
    best[(1 << n) - 1]
}

/// Groups points closer than `radius` and returns (center, count) pairs.
pub fn naive_clusters(points: &[Cx], radius: f64) -> Vec<(Cx, usize)> {
    let mut out: Vec<(Cx, usize, Cx)> = Vec::new();
    for &p in points {
        match out.iter_mut().find(|(c, _, _)| (c - p).norm() <= radius) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += p;
            }
            None => out.push((p, 1, p)),
        }
    }
    out.into_iter().map(|(_, k, s)| (s / k as f64, k)).collect()
}

/// Random dense polynomial: every monomial with `exps[k] <= degrees[k]`.
pub fn random_multipoly(rng: &mut impl Rng, vars: &[&str], degrees: &[u32]) -> MultiPoly {
    let mut p = MultiPoly::zero(vars);
    let mut exps = vec![0u32; vars.len()];
    loop {
        p.add_term(exps.clone(), unit_disc(rng));
        let mut k = 0;
        loop {
            if k == exps.len() {
                return p;
            }
            if exps[k] < degrees[k] {
                exps[k] += 1;
                break;
            }
            exps[k] = 0;
            k += 1;
        }
    }
}

use nashlab::expr::{ExprTree, HoloMap, Polydisc};
use nashlab::fibers::SystemFamily;

/// Two equations in one fiber variable over three coefficients, sharing
/// 0-2 linear factors `z - l(v)` (one possibly squared), with polynomial `H`.
pub struct RandomSystem {
    pub sys: SystemFamily,
    pub h: HoloMap,
    pub x: Vec<Cx>,
}

fn linear_factor(rng: &mut impl Rng, vars: &[String]) -> MultiPoly {
    // z1 - (c0 + c1 v1 + c2 v2 + c3 v3)
    let mut f = MultiPoly::variable(vars, "z1").unwrap();
    f.add_term(vec![0; vars.len()], -unit_disc(rng));
    for k in 0..3 {
        let mut e = vec![0; vars.len()];
        e[k] = 1;
        f.add_term(e, -unit_disc(rng));
    }
    f
}

pub fn random_system(rng: &mut impl Rng) -> RandomSystem {
    let vars = SystemFamily::variables(3, 1);
    let shared_count = rng.random_range(0..=2usize);
    let mut shared = MultiPoly::constant(&vars, Cx::new(1.0, 0.0));
    for k in 0..shared_count {
        let f = linear_factor(rng, &vars);
        shared = &shared * &f;
        if k == 0 && rng.random_bool(0.25) {
            shared = &shared * &f;
        }
    }
    let mut q = Vec::new();
    for _ in 0..2 {
        let mut own = MultiPoly::constant(&vars, unit_disc(rng) + Cx::new(1.5, 0.0));
        for _ in 0..rng.random_range(1..=2usize) {
            own = &own * &linear_factor(rng, &vars);
        }
        q.push(&shared * &own);
    }
    let x1 = || Box::new(ExprTree::var("x1"));
    let comps = (0..3)
        .map(|_| {
            let mut e = ExprTree::Const(unit_disc(rng));
            for k in 1..=2 {
                let term = ExprTree::Mul(
                    Box::new(ExprTree::Const(unit_disc(rng))),
                    Box::new(ExprTree::Pow(x1(), k)),
                );
                e = ExprTree::Add(Box::new(e), Box::new(term));
            }
            e
        })
        .collect();
    let domain = Polydisc::disc(Cx::new(0.0, 0.0), 1.0);
    let h = HoloMap::new(comps, domain.clone()).unwrap();
    let sys = SystemFamily::new(q, 3, 1, domain).unwrap();
    let x = vec![unit_disc(rng) * 0.9];
    RandomSystem { sys, h, x }
}

/// Coefficients in `z1` (ascending) of `q(v, z1)`, computed term by term.
pub fn restriction_coeffs(q: &MultiPoly, v: &[Cx]) -> Vec<Cx> {
    let zi = q.var_index("z1").unwrap();
    let deg = q.terms().map(|(e, _)| e[zi]).max().unwrap_or(0) as usize;
    let mut c = vec![Cx::new(0.0, 0.0); deg + 1];
    for (e, coeff) in q.terms() {
        let mut t = coeff;
        for (k, name) in q.vars().iter().enumerate() {
            if let Some(j) = name.strip_prefix('v') {
                t *= v[j.parse::<usize>().unwrap() - 1].powu(e[k]);
            }
        }
        c[e[zi] as usize] += t;
    }
    c
}

/// Enumerate the roots of the lowest-degree restriction, keep those where
/// every other restriction is small, and expand multiplicities.
pub fn naive_fiber(sys: &SystemFamily, v: &[Cx]) -> Vec<Vec<Cx>> {
    let restrictions: Vec<Vec<Cx>> = sys.q.iter().map(|q| restriction_coeffs(q, v)).collect();
    let pivot = (0..restrictions.len())
        .min_by_key(|&i| {
            UniPoly::new(restrictions[i].clone())
                .degree()
                .unwrap_or(usize::MAX)
        })
        .unwrap();
    let roots = companion_roots(&UniPoly::new(restrictions[pivot].clone()));
    let mut out = Vec::new();
    for (z, k) in naive_clusters(
        &roots,
        1e-6 * (1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max)),
    ) {
        let ok = restrictions.iter().all(|c| {
            let p = UniPoly::new(c.clone());
            p.eval(z).norm() <= 1e-6 * p.magnitude_at(z)
        });
        if ok {
            out.extend(std::iter::repeat_n(vec![z], k));
        }
    }
    out
}
