//! Seeded random models, subdivision centers and monoid instances.
//!
//! Everything is driven by a caller-supplied RNG, so a seed reproduces a run.

use std::collections::BTreeMap;

use logtrace_core::cone::{dual_monoid, Cone};
use logtrace_core::fan::{validate, Chart, DecoratedModel, FaceRef, Gluing};
use logtrace_core::lattice::primitive;
use logtrace_core::monoid::AffineMonoid;
use logtrace_core::{Bounds, IntVec};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Largest saturation index a generated ray may have.
pub const MAX_S: i64 = 12;
/// Larger Hilbert bases push the pushout enumeration past the default bounds.
pub const MAX_PUSHOUT_GENERATORS: usize = 6;
const PRIMES: [u64; 5] = [0, 2, 3, 5, 7];

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn mat_vec(m: &[IntVec], v: &[i64]) -> IntVec {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = egcd(b, a % b);
    (g, y, x - (a / b) * y)
}

/// A functional `f` with `<f, v> = 1`, for primitive `v`.
pub fn dual_witness(v: &[i64]) -> IntVec {
    let mut f = vec![0; v.len()];
    let mut g = 0;
    for (i, &a) in v.iter().enumerate() {
        let (ng, x, y) = egcd(g, a);
        for fj in f.iter_mut().take(i) {
            *fj *= x;
        }
        f[i] = y;
        g = ng;
    }
    debug_assert_eq!(dot(&f, v), 1);
    f
}

fn random_primitive(rng: &mut impl Rng, n: usize, bound: i64) -> IntVec {
    loop {
        let v: IntVec = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        if v.iter().fold(0, |g, &x| gcd(g, x)) == 1 {
            return v;
        }
    }
}

/// A primitive ray with `1 <= <ray, e> <= MAX_S`.
fn vertical_ray(rng: &mut impl Rng, e: &[i64], bound: i64) -> IntVec {
    loop {
        let v = random_primitive(rng, e.len(), bound);
        if (1..=MAX_S).contains(&dot(&v, e)) {
            return v;
        }
    }
}

fn independent(rows: &[IntVec]) -> bool {
    Cone::new(rows[0].len(), rows).map(|c| c.dim() == rows.len()).unwrap_or(false)
}

/// A unimodular matrix and its inverse, as a short product of elementary moves.
fn random_unimodular(rng: &mut impl Rng, n: usize) -> (Vec<IntVec>, Vec<IntVec>) {
    let id = |n| (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect::<Vec<IntVec>>();
    let (mut u, mut inv) = (id(n), id(n));
    if n < 2 {
        if rng.random_bool(0.5) {
            u[0][0] = -1;
            inv[0][0] = -1;
        }
        return (u, inv);
    }
    for _ in 0..rng.random_range(1..=2) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let c = if rng.random_bool(0.5) { 1 } else { -1 };
        // u <- E u with E = I + c e_ij; inv <- inv E^{-1}
        let row_j = u[j].clone();
        for (a, b) in u[i].iter_mut().zip(&row_j) {
            *a += c * b;
        }
        for row in inv.iter_mut() {
            row[j] -= c * row[i];
        }
    }
    (u, inv)
}

/// Maximal cones of one chart of rank `n` and its uniformizer.
fn random_chart_data(rng: &mut impl Rng, n: usize) -> (Vec<Vec<IntVec>>, IntVec) {
    match n {
        1 => {
            let s = rng.random_range(1..=MAX_S);
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            (vec![vec![vec![sign]]], vec![sign * s])
        }
        2 => loop {
            let e = random_primitive(rng, 2, 3);
            let k = rng.random_range(2..=4);
            let mut rays: Vec<IntVec> = Vec::new();
            for _ in 0..4 * k {
                let r = vertical_ray(rng, &e, 3);
                if !rays.contains(&r) {
                    rays.push(r);
                }
                if rays.len() == k {
                    break;
                }
            }
            if rays.len() < 2 {
                continue;
            }
            // all rays lie in the open half-plane <., e> > 0
            rays.sort_by(|a, b| (a[1] * b[0]).cmp(&(a[0] * b[1])));
            let cones = rays.windows(2).map(|w| w.to_vec()).collect();
            return (cones, e);
        },
        _ => loop {
            let e: IntVec = (0..3).map(|_| rng.random_range(1..=3)).collect();
            let a = vertical_ray(rng, &e, 2);
            let b = vertical_ray(rng, &e, 2);
            let c = vertical_ray(rng, &e, 2);
            if !independent(&[a.clone(), b.clone(), c.clone()]) {
                continue;
            }
            match rng.random_range(0..3) {
                0 => return (vec![vec![a, b, c]], e),
                1 => {
                    let d = vertical_ray(rng, &e, 2);
                    let gens = vec![a, b, c, d];
                    match Cone::new(3, &gens) {
                        Ok(cone) if cone.rays().len() == 4 && cone.is_pointed() => return (vec![gens], e),
                        _ => continue,
                    }
                }
                _ => {
                    // a second cone across the facet (a, b)
                    let d = vertical_ray(rng, &e, 2);
                    let normal = cross(&a, &b);
                    let side_c = dot(&normal, &c);
                    let side_d = dot(&normal, &d);
                    if side_c * side_d >= 0 {
                        continue;
                    }
                    return (vec![vec![a.clone(), b.clone(), c], vec![a, b, d]], e);
                }
            }
        },
    }
}

fn cross(a: &[i64], b: &[i64]) -> IntVec {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sorted(mut rays: Vec<IntVec>) -> Vec<IntVec> {
    rays.sort();
    rays
}

fn nonempty_subsets(rays: &[IntVec]) -> Vec<Vec<IntVec>> {
    (1u32..(1 << rays.len()))
        .map(|mask| {
            sorted(
                rays.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, r)| r.clone())
                    .collect(),
            )
        })
        .collect()
}

struct Draft {
    e: IntVec,
    chart: Chart,
    chi: BTreeMap<Vec<IntVec>, i64>,
}

fn draft(rng: &mut impl Rng, id: String, n: usize, cones: Vec<Vec<IntVec>>, e: IntVec) -> Option<Draft> {
    let chart = Chart::new(id, n, &cones, e.clone()).ok()?;
    let chi = chart
        .complex()
        .faces()
        .ok()?
        .into_iter()
        .map(|f| (sorted(f.rays().to_vec()), rng.random_range(-5..=5)))
        .collect();
    Some(Draft { e, chart, chi })
}

/// A glued, decorated model with rank `<= 3`, at most three charts,
/// `|χ| <= 5` and `s <= 12`, which passes validation.
pub fn random_model(rng: &mut impl Rng) -> DecoratedModel {
    loop {
        if let Some(m) = try_random_model(rng) {
            if validate(&m).map(|r| r.is_ok()).unwrap_or(false) {
                return m;
            }
        }
    }
}

fn try_random_model(rng: &mut impl Rng) -> Option<DecoratedModel> {
    let n = rng.random_range(1..=3);
    let k = rng.random_range(1..=3);
    let p = *PRIMES.choose(rng).expect("nonempty");
    let (cones, e) = random_chart_data(rng, n);
    let mut drafts = vec![draft(rng, "c0".into(), n, cones, e)?];
    let mut gluings = Vec::new();
    for j in 1..k {
        let i = rng.random_range(0..j);
        let id = format!("c{j}");
        if n >= 2 && rng.random_bool(0.6) {
            // neighbour along a facet F of a maximal cone of chart i
            let parent = &drafts[i];
            let sigma = parent.chart.complex().maximal_cones().choose(rng)?.clone();
            let facets: Vec<Cone> = sigma.faces().ok()?.into_iter().filter(|f| f.dim() + 1 == sigma.dim()).collect();
            let facet = facets.choose(rng)?.clone();
            if facet.dim() == 0 || !facet.is_simplicial() {
                return None;
            }
            let w = vertical_ray(rng, &parent.e, 2);
            let mut gens = facet.rays().to_vec();
            gens.push(w);
            if !independent(&gens) {
                return None;
            }
            let (u, inv) = random_unimodular(rng, n);
            let moved: Vec<IntVec> = gens.iter().map(|r| mat_vec(&u, r)).collect();
            // e_j = e_i U^{-1}, so that <e_j, U x> = <e_i, x>
            let e_j: IntVec = (0..n).map(|c| (0..n).map(|r| parent.e[r] * inv[r][c]).sum()).collect();
            let parent_chi = parent.chi.clone();
            let mut d = draft(rng, id, n, vec![moved], e_j)?;
            for sub in nonempty_subsets(facet.rays()) {
                let image = sorted(sub.iter().map(|r| mat_vec(&u, r)).collect());
                d.chi.insert(image, parent_chi[&sub]);
            }
            gluings.push(Gluing {
                chart_a: i,
                face_a: facet.rays().to_vec(),
                chart_b: j,
                face_b: sorted(facet.rays().iter().map(|r| mat_vec(&u, r)).collect()),
                map: u,
            });
            drafts.push(d);
        } else {
            let (cones, e) = random_chart_data(rng, n);
            let mut d = draft(rng, id, n, cones, e)?;
            let parent = &drafts[i];
            let pairs: Vec<(IntVec, IntVec)> = parent
                .chart
                .complex()
                .rays()
                .into_iter()
                .flat_map(|a| d.chart.complex().rays().into_iter().map(move |b| (a.clone(), b)))
                .filter(|(a, b)| dot(a, &parent.e) == dot(b, &d.e))
                .collect();
            if let Some((a, b)) = pairs.choose(rng) {
                let f = dual_witness(a);
                let map = b.iter().map(|bi| f.iter().map(|fj| bi * fj).collect()).collect();
                d.chi.insert(vec![b.clone()], parent.chi[&vec![a.clone()]]);
                gluings.push(Gluing {
                    chart_a: i,
                    face_a: vec![a.clone()],
                    chart_b: j,
                    face_b: vec![b.clone()],
                    map,
                });
            }
            drafts.push(d);
        }
    }
    let chi = drafts
        .iter()
        .enumerate()
        .flat_map(|(c, d)| d.chi.iter().map(move |(rays, &v)| (FaceRef::new(c, rays.clone()), v)))
        .collect();
    DecoratedModel {
        residue_char: p,
        log_smooth_claimed: false,
        charts: drafts.into_iter().map(|d| d.chart).collect(),
        gluings,
        chi,
        chart_cokernel_torsion: BTreeMap::new(),
    }
    .normalized()
    .ok()
}

/// A legal stellar center: a positive combination of the rays of a random
/// face of dimension `>= 2`, within the coordinate bound.
pub fn random_center(rng: &mut impl Rng, model: &DecoratedModel) -> Option<(FaceRef, IntVec)> {
    let bound = Bounds::current().coordinate as i64;
    let mut candidates = Vec::new();
    for (c, chart) in model.charts.iter().enumerate() {
        for f in chart.complex().faces().ok()? {
            if f.dim() >= 2 {
                candidates.push((c, f));
            }
        }
    }
    let (c, face) = candidates.choose(rng)?;
    let mut v = vec![0; face.ambient_rank()];
    for r in face.rays() {
        let k = rng.random_range(1..=2);
        for (vi, ri) in v.iter_mut().zip(r) {
            *vi += k * ri;
        }
    }
    let v = primitive(&v);
    if v.iter().any(|x| x.abs() > bound) {
        return None;
    }
    Some((FaceRef::new(*c, face.rays().to_vec()), v))
}

/// A pointed full-dimensional cone in rank 2 with rays in `[-bound, bound]^2`.
pub fn random_rank2_cone(rng: &mut impl Rng, bound: i64) -> Cone {
    loop {
        let a = random_primitive(rng, 2, bound);
        let b = random_primitive(rng, 2, bound);
        if a[0] * b[1] - a[1] * b[0] != 0 {
            return Cone::new(2, &[a, b]).expect("two independent rays");
        }
    }
}

/// An input to the pushout oracle.
#[derive(Clone, Debug)]
pub struct PushoutInstance {
    pub monoid: AffineMonoid,
    pub e: IntVec,
    pub d: u64,
}

/// `P` the dual monoid of a small cone, `e` a combination of all its
/// minimal generators with positive coefficients (so vertical), `d <= 4`.
pub fn random_pushout_instance(rng: &mut impl Rng) -> PushoutInstance {
    loop {
        let cone = if rng.random_bool(0.7) {
            random_rank2_cone(rng, 2)
        } else {
            let gens: Vec<IntVec> = (0..3)
                .map(|_| {
                    let mut v = random_primitive(rng, 3, 1);
                    v[2] = 1;
                    primitive(&v)
                })
                .collect();
            match Cone::new(3, &gens) {
                Ok(c) if c.dim() == 3 && c.is_pointed() => c,
                _ => continue,
            }
        };
        let Ok(monoid) = dual_monoid(&cone) else { continue };
        // keeps the truncated enumeration inside the default coordinate bound
        if monoid.minimal_generators().len() > MAX_PUSHOUT_GENERATORS {
            continue;
        }
        // the sum of all generators is interior; a random generator is added on top
        let mut e = vec![0; monoid.ambient_rank()];
        let gens = monoid.minimal_generators();
        for g in gens.iter().chain(gens.choose(rng)) {
            for (ei, gi) in e.iter_mut().zip(g) {
                *ei += gi;
            }
        }
        return PushoutInstance {
            monoid,
            e,
            d: rng.random_range(1..=4),
        };
    }
}
