//! Polyhedral primitives shared by the monoid and cone layers.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::lattice::{primitive, Lattice};
use crate::linalg::{self, dot};
use crate::{Bounds, Error, IntVec, Result};

/// Inequality description of `cone(generators)` inside its linear span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct HRep {
    pub dim: usize,
    /// primitive facet normals, chosen inside the span
    pub normals: Vec<IntVec>,
    /// basis of the orthogonal complement of the span
    pub equations: Vec<IntVec>,
}

impl HRep {
    pub fn contains(&self, x: &[i64]) -> bool {
        self.equations.iter().all(|e| dot(e, x) == 0) && self.normals.iter().all(|u| dot(u, x) >= 0)
    }

    /// Dimension of the lineality space.
    pub fn lineality_dim(&self, n: usize) -> usize {
        self.dim - linalg::rank(&self.normals, n)
    }

    /// `sum of facet normals`; strictly positive on the nonzero points of a pointed cone.
    pub fn grading(&self, n: usize) -> IntVec {
        let mut w = vec![0i64; n];
        for u in &self.normals {
            for (a, b) in w.iter_mut().zip(u) {
                *a += b;
            }
        }
        w
    }
}

/// Extreme rays of the pointed cone `{x : <a, x> >= 0 for a in ineqs, <e, x> = 0 for e in eqs}`.
///
/// Rays are found as one-dimensional solution spaces of tight subsystems,
/// which is exact and adequate at the small ranks this crate targets.
pub(crate) fn extreme_rays(ineqs: &[IntVec], eqs: &[IntVec], n: usize) -> Result<Vec<IntVec>> {
    let base = linalg::rank(eqs, n);
    if base >= n {
        return Ok(Vec::new());
    }
    let m = n - base - 1;
    let ineqs: Vec<IntVec> = ineqs
        .iter()
        .filter(|a| a.iter().any(|&x| x != 0))
        .map(|a| primitive(a))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = BTreeSet::new();
    if m > ineqs.len() {
        return Ok(Vec::new());
    }
    for subset in ineqs.iter().combinations(m) {
        let mut rows = eqs.to_vec();
        rows.extend(subset.into_iter().cloned());
        let k = linalg::kernel(&rows, n)?;
        if k.len() != 1 {
            continue;
        }
        let r = &k[0];
        let neg: IntVec = r.iter().map(|x| -x).collect();
        for cand in [r.clone(), neg] {
            if ineqs.iter().all(|a| dot(a, &cand) >= 0) {
                out.insert(primitive(&cand));
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Facets of `cone(generators)` within its span.
pub(crate) fn facets(generators: &[IntVec], n: usize, bounds: &Bounds) -> Result<HRep> {
    let equations = linalg::kernel(generators, n)?;
    let dim = n - equations.len();
    bounds.check_rank(dim)?;
    let normals = if dim == 0 {
        Vec::new()
    } else {
        extreme_rays(generators, &equations, n)?
    };
    Ok(HRep {
        dim,
        normals,
        equations,
    })
}

/// Integer points `x` of a full-dimensional pointed cone in `Z^k` with
/// `0 <= <w, x> <= max_degree`, the origin included.
///
/// The cone is given by its extreme rays and facet normals; `w` must be
/// positive on every ray.
pub(crate) fn cone_points(
    rays: &[IntVec],
    normals: &[IntVec],
    w: &[i64],
    max_degree: i64,
    bounds: &Bounds,
) -> Result<Vec<IntVec>> {
    let k = w.len();
    let mut lo = vec![0i64; k];
    let mut hi = vec![0i64; k];
    for r in rays {
        let wr = dot(w, r);
        if wr <= 0 {
            return Err(Error::Inconsistent("grading is not positive on a ray".into()));
        }
        for j in 0..k {
            let num = max_degree as i128 * r[j] as i128;
            let den = wr as i128;
            let fl = num.div_euclid(den);
            let ce = -(-num).div_euclid(den);
            lo[j] = lo[j].min(fl as i64);
            hi[j] = hi[j].max(ce as i64);
        }
    }
    for j in 0..k {
        bounds.check_coordinate(lo[j].unsigned_abs().max(hi[j].unsigned_abs()))?;
    }
    let mut out = Vec::new();
    let mut x = lo.clone();
    if k == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    loop {
        let deg = dot(w, &x);
        if (0..=max_degree).contains(&deg) && normals.iter().all(|u| dot(u, &x) >= 0) {
            out.push(x.clone());
        }
        let mut j = 0;
        loop {
            if j == k {
                return Ok(out);
            }
            if x[j] < hi[j] {
                x[j] += 1;
                break;
            }
            x[j] = lo[j];
            j += 1;
        }
    }
}

/// Graded-lexicographic order: coordinate sum first, then lexicographic.
pub(crate) fn graded_lex(a: &IntVec, b: &IntVec) -> core::cmp::Ordering {
    let sa: i64 = a.iter().sum();
    let sb: i64 = b.iter().sum();
    sa.cmp(&sb).then_with(|| a.cmp(b))
}

/// Splits a pointed cone, given by its extreme rays, into simplicial cones
/// on those rays by pulling the first ray. Returns index sets into `rays`.
pub(crate) fn triangulate(rays: &[IntVec], n: usize, bounds: &Bounds) -> Result<Vec<Vec<usize>>> {
    fn go(idx: &[usize], rays: &[IntVec], n: usize, bounds: &Bounds, out: &mut Vec<Vec<usize>>) -> Result<()> {
        let gens: Vec<IntVec> = idx.iter().map(|&i| rays[i].clone()).collect();
        let h = facets(&gens, n, bounds)?;
        if idx.len() == h.dim {
            out.push(idx.to_vec());
            return Ok(());
        }
        let apex = &rays[idx[0]];
        for u in h.normals.iter().filter(|u| dot(u, apex) != 0) {
            let facet: Vec<usize> = idx.iter().copied().filter(|&i| dot(u, &rays[i]) == 0).collect();
            let mut pieces = Vec::new();
            go(&facet, rays, n, bounds, &mut pieces)?;
            for mut piece in pieces {
                piece.insert(0, idx[0]);
                out.push(piece);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if !rays.is_empty() {
        go(&(0..rays.len()).collect::<Vec<_>>(), rays, n, bounds, &mut out)?;
    }
    Ok(out)
}

/// Nonzero points `sum λ_i c_i`, `0 <= λ_i < 1`, of `Z^k` for `k` linearly
/// independent columns; there are `|det| - 1` of them.
///
/// The count is capped at the square of the coordinate bound.
pub(crate) fn parallelepiped(cols: &[IntVec], k: usize, bounds: &Bounds) -> Result<Vec<IntVec>> {
    let det = crate::lattice::abs_det(cols)?;
    let cap = bounds.coordinate.saturating_mul(bounds.coordinate);
    if det > cap {
        return Err(Error::BoundExceeded {
            what: "parallelepiped points",
            value: det,
            bound: cap,
        });
    }
    let group = crate::lattice::quotient(k, &Lattice::new(k, cols)?)?;
    let mut out = Vec::new();
    for t in group.torsion_elements()? {
        let coeffs = linalg::solve_rational(cols, &t).ok_or_else(|| Error::Inconsistent("columns are dependent".into()))?;
        let mut point = vec![BigRational::zero(); k];
        for (ci, col) in coeffs.iter().zip(cols) {
            let frac = ci - ci.floor();
            for (p, c) in point.iter_mut().zip(col) {
                *p += &frac * BigRational::from_integer((*c).into());
            }
        }
        let y: IntVec = point
            .iter()
            .map(|p| {
                debug_assert!(p.is_integer());
                p.to_integer().to_i64().ok_or(Error::Overflow)
            })
            .collect::<Result<_>>()?;
        if y.iter().any(|&v| v != 0) {
            out.push(y);
        }
    }
    Ok(out)
}

/// Hilbert basis of `cone(generators) ∩ lattice` for a pointed cone whose
/// span equals the span of `lattice`.
///
/// Every irreducible element is an extreme ray or lies in the half-open
/// parallelepiped of some simplex of a triangulation on the rays; those
/// candidates are reduced by subtraction.
pub(crate) fn hilbert_basis(generators: &[IntVec], lattice: &Lattice, bounds: &Bounds) -> Result<Vec<IntVec>> {
    let k = lattice.rank();
    if k == 0 {
        return Ok(Vec::new());
    }
    bounds.check_rank(k)?;
    let mut coords = Vec::with_capacity(generators.len());
    for g in generators {
        if g.iter().all(|&x| x == 0) {
            continue;
        }
        match lattice.coordinates(g)? {
            Some(c) => coords.push(c),
            None => {
                return Err(Error::Precondition("generator outside the lattice".into()));
            }
        }
    }
    let h = facets(&coords, k, bounds)?;
    if h.dim != k {
        return Err(Error::Precondition("cone does not span the lattice".into()));
    }
    if h.lineality_dim(k) != 0 {
        return Err(Error::Precondition("cone is not pointed".into()));
    }
    let w = h.grading(k);
    let rays: Vec<IntVec> = coords
        .iter()
        .map(|c| primitive(c))
        .filter(|c| {
            let tight: Vec<IntVec> = h.normals.iter().filter(|u| dot(u, c) == 0).cloned().collect();
            linalg::rank(&tight, k) == k - 1
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut candidates: BTreeSet<IntVec> = rays.iter().cloned().collect();
    for simplex in triangulate(&rays, k, bounds)? {
        let cols: Vec<IntVec> = simplex.iter().map(|&i| rays[i].clone()).collect();
        candidates.extend(parallelepiped(&cols, k, bounds)?);
    }
    let mut points: Vec<IntVec> = candidates.into_iter().collect();
    points.sort_by_key(|p| dot(&w, p));
    let mut basis = Vec::new();
    for x in &points {
        let dx = dot(&w, x);
        // x - y in the cone for a smaller candidate y; such a y can always be
        // taken irreducible, hence among the candidates
        let reducible = points.iter().take_while(|y| dot(&w, y) < dx).any(|y| {
            let diff: IntVec = x.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
            h.normals.iter().all(|u| dot(u, &diff) >= 0)
        });
        if !reducible {
            basis.push(lattice.combine(x));
        }
    }
    basis.sort_by(graded_lex);
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facets_of_a1_cone() {
        let h = facets(&[vec![1, 0], vec![1, 2]], 2, &Bounds::default()).unwrap();
        assert_eq!(h.dim, 2);
        assert_eq!(h.normals, vec![vec![0, 1], vec![2, -1]]);
    }

    #[test]
    fn facets_of_a_ray_in_the_plane() {
        let h = facets(&[vec![3, 0]], 2, &Bounds::default()).unwrap();
        assert_eq!(h.dim, 1);
        assert_eq!(h.normals, vec![vec![1, 0]]);
        assert_eq!(h.equations, vec![vec![0, 1]]);
    }

    #[test]
    fn triangulating_a_square_cone() {
        let rays = vec![vec![1, 0, 1], vec![0, 1, 1], vec![-1, 0, 1], vec![0, -1, 1]];
        let t = triangulate(&rays, 3, &Bounds::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|s| s.len() == 3 && s[0] == 0));
        let simplicial = triangulate(&rays[..3], 3, &Bounds::default()).unwrap();
        assert_eq!(simplicial, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn parallelepiped_of_a2() {
        let mut pts = parallelepiped(&[vec![1, 0], vec![1, 3]], 2, &Bounds::default()).unwrap();
        pts.sort();
        assert_eq!(pts, vec![vec![1, 1], vec![1, 2]]);
        assert!(parallelepiped(&[vec![1, 0], vec![0, 1]], 2, &Bounds::default()).unwrap().is_empty());
    }

    #[test]
    fn thin_unimodular_duals_need_no_box() {
        // normals of a unimodular cone with long rays have entries far beyond the coordinate bound
        let gens = vec![vec![1, 0, 0], vec![-40, 1, 0], vec![0, -90, 1]];
        let hb = hilbert_basis(&gens, &Lattice::full(3), &Bounds::default()).unwrap();
        assert_eq!(hb.len(), 3);
    }

    #[test]
    fn hilbert_basis_of_a1_dual() {
        let hb = hilbert_basis(&[vec![0, 1], vec![2, -1]], &Lattice::full(2), &Bounds::default()).unwrap();
        let mut got = hb.clone();
        got.sort();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0], vec![2, -1]]);
    }

    #[test]
    fn enumeration_respects_coordinate_bound() {
        let small = Bounds { rank: 4, coordinate: 3 };
        let r = cone_points(&[vec![1, 0], vec![0, 1]], &[vec![1, 0], vec![0, 1]], &[1, 1], 10, &small);
        assert!(matches!(r, Err(Error::BoundExceeded { what: "coordinate", .. })));
    }
}
