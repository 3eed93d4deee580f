//! Rational polyhedral cones on the lattice side, cone complexes, stellar
//! subdivision and toric resolution.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use itertools::Itertools;

use crate::error::{check_len, precondition};
use crate::geometry::{self, graded_lex};
use crate::lattice::{self, content, primitive, quotient, Lattice};
use crate::linalg::{self, dot};
use crate::monoid::AffineMonoid;
use crate::{Bounds, Error, IntVec, Result};

/// `cone(rays)` with both of its descriptions.
///
/// For a non-pointed cone the ray list holds a basis of the lineality lattice
/// with both signs, followed by one canonical generator per minimal proper
/// face modulo lineality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cone {
    ambient_rank: usize,
    rays: Vec<IntVec>,
    facet_normals: Vec<IntVec>,
    equations: Vec<IntVec>,
    pointed: bool,
}

impl Cone {
    pub fn new(ambient_rank: usize, generators: &[IntVec]) -> Result<Self> {
        Self::with_bounds(ambient_rank, generators, &Bounds::current())
    }

    pub fn with_bounds(n: usize, generators: &[IntVec], bounds: &Bounds) -> Result<Self> {
        for g in generators {
            check_len(n, g)?;
        }
        let h = geometry::facets(generators, n, bounds)?;
        let pointed = h.lineality_dim(n) == 0;
        let mut rays = if pointed {
            geometry::extreme_rays(&h.normals, &h.equations, n)?
        } else {
            non_pointed_rays(&h.normals, &h.equations, n, h.dim)?
        };
        rays.sort();
        // the ray description must give back the same cone
        let check = geometry::facets(&rays, n, bounds)?;
        if check.normals != h.normals || check.equations != h.equations {
            return Err(Error::Inconsistent("ray and facet descriptions disagree".into()));
        }
        for g in generators {
            if !h.contains(g) {
                return Err(Error::Inconsistent("generator outside its own cone".into()));
            }
        }
        Ok(Cone {
            ambient_rank: n,
            rays,
            facet_normals: h.normals,
            equations: h.equations,
            pointed,
        })
    }

    /// The cone `{0}`.
    pub fn zero(ambient_rank: usize) -> Self {
        Cone {
            ambient_rank,
            rays: Vec::new(),
            facet_normals: Vec::new(),
            equations: Lattice::full(ambient_rank).basis().to_vec(),
            pointed: true,
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn facet_normals(&self) -> &[IntVec] {
        &self.facet_normals
    }

    /// Basis of the orthogonal complement of the span.
    pub fn equations(&self) -> &[IntVec] {
        &self.equations
    }

    pub fn is_pointed(&self) -> bool {
        self.pointed
    }

    pub fn dim(&self) -> usize {
        self.ambient_rank - self.equations.len()
    }

    pub fn is_simplicial(&self) -> bool {
        self.pointed && self.rays.len() == self.dim()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.ambient_rank
            && self.equations.iter().all(|e| dot(e, x) == 0)
            && self.facet_normals.iter().all(|u| dot(u, x) >= 0)
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays.iter().all(|r| self.contains(r))
    }

    pub fn in_relative_interior(&self, x: &[i64]) -> bool {
        self.contains(x) && self.facet_normals.iter().all(|u| dot(u, x) > 0)
    }

    /// Sum of the rays, a lattice point in the relative interior.
    pub fn interior_point(&self) -> IntVec {
        let mut p = vec![0i64; self.ambient_rank];
        for r in &self.rays {
            for (a, b) in p.iter_mut().zip(r) {
                *a += b;
            }
        }
        p
    }

    /// `span ∩ Z^n`.
    pub fn span_lattice(&self) -> Result<Lattice> {
        Lattice::new(self.ambient_rank, &linalg::kernel(&self.equations, self.ambient_rank)?)
    }

    fn require_pointed(&self, what: &str) -> Result<()> {
        if !self.pointed {
            return Err(precondition!("{what} requires a pointed cone"));
        }
        Ok(())
    }

    fn subcone(&self, rays: impl IntoIterator<Item = usize>) -> Result<Cone> {
        let gens: Vec<IntVec> = rays.into_iter().map(|i| self.rays[i].clone()).collect();
        if gens.is_empty() {
            return Ok(Cone::zero(self.ambient_rank));
        }
        Cone::new(self.ambient_rank, &gens)
    }

    /// Ray index sets of all faces, the zero face and the cone itself included.
    pub fn face_ray_sets(&self) -> Result<Vec<BTreeSet<usize>>> {
        self.require_pointed("face enumeration")?;
        let mut seen = BTreeSet::new();
        let mut stack = vec![(0..self.rays.len()).collect::<BTreeSet<usize>>()];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for u in &self.facet_normals {
                let t: BTreeSet<usize> = s.iter().copied().filter(|&i| dot(u, &self.rays[i]) == 0).collect();
                if t != s {
                    stack.push(t);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// All faces, ordered by dimension and rays.
    pub fn faces(&self) -> Result<Vec<Cone>> {
        let mut faces: Vec<Cone> = self
            .face_ray_sets()?
            .into_iter()
            .map(|s| self.subcone(s))
            .collect::<Result<_>>()?;
        faces.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.rays.cmp(&b.rays)));
        Ok(faces)
    }

    /// The smallest face containing `x`, or `None` if `x` is outside.
    pub fn face_containing(&self, x: &[i64]) -> Result<Option<Cone>> {
        self.require_pointed("face search")?;
        if !self.contains(x) {
            return Ok(None);
        }
        let tight: Vec<&IntVec> = self.facet_normals.iter().filter(|u| dot(u, x) == 0).collect();
        let idx = (0..self.rays.len()).filter(|&i| tight.iter().all(|u| dot(u, &self.rays[i]) == 0));
        Ok(Some(self.subcone(idx)?))
    }

    /// Whether `other` is a face of this cone.
    pub fn has_face(&self, other: &Cone) -> Result<bool> {
        Ok(self.face_containing(&other.interior_point())?.as_ref() == Some(other))
    }
}

fn non_pointed_rays(normals: &[IntVec], equations: &[IntVec], n: usize, dim: usize) -> Result<Vec<IntVec>> {
    let mut all = normals.to_vec();
    all.extend_from_slice(equations);
    let lineality = Lattice::new(n, &linalg::kernel(&all, n)?)?;
    let l = lineality.rank();
    let mut out = BTreeSet::new();
    for b in lineality.basis() {
        out.insert(b.clone());
        out.insert(b.iter().map(|x| -x).collect());
    }
    if dim == l {
        return Ok(out.into_iter().collect());
    }
    let m = dim - l - 1;
    let mut faces = BTreeSet::new();
    for subset in normals.iter().combinations(m) {
        let mut rows = equations.to_vec();
        rows.extend(subset.into_iter().cloned());
        let face = Lattice::new(n, &linalg::kernel(&rows, n)?)?;
        if face.rank() != l + 1 || !faces.insert(face.clone()) {
            continue;
        }
        let lin_coords: Vec<IntVec> = lineality
            .basis()
            .iter()
            .map(|b| Ok(face.coordinates(b)?.expect("lineality lies in every face")))
            .collect::<Result<_>>()?;
        let q = quotient(l + 1, &Lattice::new(l + 1, &lin_coords)?)?;
        let w = face.combine(&q.lift(&[], &[1])?);
        let neg: IntVec = w.iter().map(|x| -x).collect();
        for cand in [w, neg] {
            if normals.iter().all(|u| dot(u, &cand) >= 0) {
                out.insert(cand);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// The dual cone `{m : <m, x> >= 0 on C}` in the dual lattice.
pub fn dualize(c: &Cone) -> Result<Cone> {
    let mut gens = c.facet_normals.clone();
    for e in &c.equations {
        gens.push(e.clone());
        gens.push(e.iter().map(|x| -x).collect());
    }
    Cone::new(c.ambient_rank, &gens)
}

/// Coordinates of the rays of `c` in a basis of `span(c) ∩ Z^n`.
fn rays_in_span(c: &Cone) -> Result<(Lattice, Vec<IntVec>)> {
    let span = c.span_lattice()?;
    let coords = c
        .rays
        .iter()
        .map(|r| Ok(span.coordinates(r)?.expect("rays lie in their span")))
        .collect::<Result<_>>()?;
    Ok((span, coords))
}

/// `C^∨ ∩ M`, taken within the span of `C` when `C` is not full-dimensional
/// (coordinates are then dual to the basis of [`Cone::span_lattice`]).
pub fn dual_monoid(c: &Cone) -> Result<AffineMonoid> {
    c.require_pointed("the dual monoid")?;
    let k = c.dim();
    if k == 0 {
        return Ok(AffineMonoid::trivial(0));
    }
    let bounds = Bounds::current();
    let (_, coords) = rays_in_span(c)?;
    let h = geometry::facets(&coords, k, &bounds)?;
    let hb = geometry::hilbert_basis(&h.normals, &Lattice::full(k), &bounds)?;
    AffineMonoid::with_bounds(k, &hb, &bounds)
}

/// Index of the ray lattice in `span(C) ∩ Z^n`, for simplicial `C`.
pub fn multiplicity(c: &Cone) -> Result<u64> {
    if !c.is_simplicial() {
        return Err(precondition!("multiplicity requires a simplicial cone"));
    }
    if c.rays.is_empty() {
        return Ok(1);
    }
    let (_, coords) = rays_in_span(c)?;
    lattice::abs_det(&coords)
}

/// Nonzero lattice points `sum c_i ρ_i` with `0 <= c_i < 1` of a simplicial cone.
pub fn parallelepiped_points(c: &Cone) -> Result<Vec<IntVec>> {
    if !c.is_simplicial() {
        return Err(precondition!("parallelepiped of a non-simplicial cone"));
    }
    let k = c.dim();
    let (span, coords) = rays_in_span(c)?;
    let mut out: Vec<IntVec> = geometry::parallelepiped(&coords, k, &Bounds::current())?
        .iter()
        .map(|y| span.combine(y))
        .collect();
    out.sort_by(graded_lex);
    Ok(out)
}

/// A complex of pointed cones given by its maximal members.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConeComplex {
    ambient_rank: usize,
    maximal_cones: Vec<Cone>,
}

impl ConeComplex {
    /// Keeps the cones not contained in another one, sorted; the zero cone is dropped.
    pub fn new(ambient_rank: usize, cones: Vec<Cone>) -> Result<Self> {
        for c in &cones {
            if c.ambient_rank != ambient_rank {
                return Err(Error::DimensionMismatch {
                    expected: ambient_rank,
                    found: c.ambient_rank,
                });
            }
        }
        let cones: Vec<Cone> = cones.into_iter().filter(|c| !c.rays.is_empty()).collect::<BTreeSet<_>>().into_iter().collect();
        let maximal_cones = cones
            .iter()
            .filter(|a| !cones.iter().any(|b| b != *a && b.contains_cone(a)))
            .cloned()
            .collect();
        Ok(ConeComplex {
            ambient_rank,
            maximal_cones,
        })
    }

    pub fn from_rays(ambient_rank: usize, cones: &[Vec<IntVec>]) -> Result<Self> {
        let cones = cones.iter().map(|c| Cone::new(ambient_rank, c)).collect::<Result<_>>()?;
        Self::new(ambient_rank, cones)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn maximal_cones(&self) -> &[Cone] {
        &self.maximal_cones
    }

    /// All rays, sorted.
    pub fn rays(&self) -> Vec<IntVec> {
        let set: BTreeSet<&IntVec> = self.maximal_cones.iter().flat_map(|c| c.rays.iter()).collect();
        set.into_iter().cloned().collect()
    }

    /// Every nonzero face of every member, each once, by dimension then rays.
    pub fn faces(&self) -> Result<Vec<Cone>> {
        let mut set = BTreeSet::new();
        for c in &self.maximal_cones {
            for f in c.faces()? {
                if !f.rays.is_empty() {
                    set.insert(f);
                }
            }
        }
        let mut faces: Vec<Cone> = set.into_iter().collect();
        faces.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.rays.cmp(&b.rays)));
        Ok(faces)
    }

    /// Non-pointed members and pairs meeting outside a common face.
    pub fn fan_violations(&self) -> Vec<alloc::string::String> {
        use alloc::format;
        let n = self.ambient_rank;
        let mut out = Vec::new();
        for c in &self.maximal_cones {
            if !c.pointed {
                out.push(format!("cone {:?} is not pointed", c.rays));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (i, a) in self.maximal_cones.iter().enumerate() {
            for b in &self.maximal_cones[i + 1..] {
                let mut ineqs = a.facet_normals.clone();
                ineqs.extend(b.facet_normals.iter().cloned());
                let mut eqs = a.equations.clone();
                eqs.extend(b.equations.iter().cloned());
                let meet = match geometry::extreme_rays(&ineqs, &eqs, n) {
                    Ok(r) => r,
                    Err(e) => {
                        out.push(format!("{e}"));
                        continue;
                    }
                };
                let mut p = vec![0i64; n];
                for r in &meet {
                    for (x, y) in p.iter_mut().zip(r) {
                        *x += y;
                    }
                }
                for c in [a, b] {
                    let face = c.face_containing(&p).ok().flatten();
                    if face.map(|f| f.rays != meet).unwrap_or(true) {
                        out.push(format!("cones {:?} and {:?} do not meet in a common face", a.rays, b.rays));
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn is_fan(&self) -> bool {
        self.fan_violations().is_empty()
    }

    /// Whether `x` lies in the support.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.maximal_cones.iter().any(|c| c.contains(x))
    }

    /// The member whose relative interior contains `x`.
    pub fn carrier(&self, x: &[i64]) -> Result<Option<Cone>> {
        for c in &self.maximal_cones {
            if let Some(f) = c.face_containing(x)? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// Every maximal cone simplicial of multiplicity one.
    pub fn is_unimodular(&self) -> bool {
        self.maximal_cones.iter().all(|c| c.is_simplicial() && multiplicity(c).ok() == Some(1))
    }
}

/// Stellar subdivision of `complex` at the primitive vector `v`.
///
/// Each member containing `v` is replaced by the joins of `v` with those of
/// its facets that miss `v`; at an existing ray this is the identity on
/// simplicial members and pulls the others.
pub fn stellar_subdivide(complex: &ConeComplex, v: &[i64]) -> Result<ConeComplex> {
    let n = complex.ambient_rank;
    check_len(n, v)?;
    if v.iter().all(|&x| x == 0) {
        return Err(precondition!("subdivision center must be nonzero"));
    }
    if content(v) != 1 {
        return Err(precondition!("subdivision center {:?} is not primitive", v));
    }
    if !complex.contains(v) {
        return Err(precondition!("subdivision center {:?} is outside the support", v));
    }
    let mut out = Vec::new();
    for sigma in &complex.maximal_cones {
        if !sigma.contains(v) {
            out.push(sigma.clone());
            continue;
        }
        for u in &sigma.facet_normals {
            if dot(u, v) == 0 {
                continue;
            }
            let mut gens: Vec<IntVec> = sigma.rays.iter().filter(|r| dot(u, r) == 0).cloned().collect();
            gens.push(v.to_vec());
            out.push(Cone::new(n, &gens)?);
        }
        if sigma.facet_normals.is_empty() {
            out.push(Cone::new(n, &[v.to_vec()])?);
        }
    }
    ConeComplex::new(n, out)
}

/// A ray of the non-simplicial `cone` whose pulling splits it.
fn pulling_ray(cone: &Cone) -> IntVec {
    cone.rays
        .iter()
        .find(|r| cone.facet_normals.iter().filter(|u| dot(u, r) > 0).count() >= 2)
        .expect("a non-simplicial pointed cone has a ray off two facets")
        .clone()
}

/// The next center the resolution algorithm would use on `cone`, if any.
///
/// Non-simplicial cones are pulled at a ray; simplicial cones of higher
/// multiplicity get the parallelepiped point of least coordinate sum.
pub fn resolution_center(cone: &Cone) -> Result<Option<IntVec>> {
    cone.require_pointed("resolution")?;
    if !cone.is_simplicial() {
        return Ok(Some(pulling_ray(cone)));
    }
    if multiplicity(cone)? == 1 {
        return Ok(None);
    }
    let pts = parallelepiped_points(cone)?;
    Ok(pts.first().map(|p| primitive(p)))
}

/// Toric resolution: a unimodular refinement and the list of centers used.
pub fn resolve_complex(complex: &ConeComplex) -> Result<(ConeComplex, Vec<IntVec>)> {
    let bounds = Bounds::current();
    bounds.check_rank(complex.ambient_rank)?;
    let mut k = complex.clone();
    let mut trail = Vec::new();
    loop {
        // simplicial first, then multiplicity
        let next = k
            .maximal_cones
            .iter()
            .find(|c| !c.is_simplicial())
            .or_else(|| k.maximal_cones.iter().find(|c| multiplicity(c).map(|m| m > 1).unwrap_or(false)));
        let Some(cone) = next else {
            return Ok((k, trail));
        };
        let center = resolution_center(cone)?.expect("cone needs work");
        k = stellar_subdivide(&k, &center)?;
        trail.push(center);
    }
}

/// `sum w_i ρ_i` with the weights cycled and clamped to at least one; a
/// relative-interior point.
pub fn relint_sample(c: &Cone, weights: &[i64]) -> IntVec {
    let mut p = vec![0i64; c.ambient_rank];
    for (r, w) in c.rays.iter().zip(weights.iter().cycle()) {
        let w = w.abs().max(1);
        for (a, b) in p.iter_mut().zip(r) {
            *a += w * b;
        }
    }
    p
}
