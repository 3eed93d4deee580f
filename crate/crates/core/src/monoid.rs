//! Affine monoids: finitely generated submonoids of `Z^n`.
//!
//! Besides the basic operations (saturation, units and sharpening, faces,
//! localization at a face) this module houses the root pushout
//! `Q = P ⊕_N (1/d)N` along a vertical element `e`, with an exact
//! membership test for `Q^sat` and a brute-force oracle for the structure
//! of `Q^sat`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::error::{check_len, precondition};
use crate::geometry::{self, graded_lex, HRep};
use crate::lattice::{content, quotient, Lattice, QuotientGroup};
use crate::linalg::{self, dot};
use crate::{Bounds, IntVec, Result};

/// A finitely generated submonoid of `Z^ambient_rank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMonoid {
    ambient_rank: usize,
    generators: Vec<IntVec>,
    gp: Lattice,
    minimal_generators: Vec<IntVec>,
    cone: HRep,
    sharp: bool,
}

/// A face `F = P ∩ u⊥` of an affine monoid; its complement is a prime ideal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FaceHandle {
    /// `u` with `<u, g> >= 0` on every generator
    pub supporting_functional: IntVec,
    /// indices into [`AffineMonoid::minimal_generators`] of the generators lying on `F`
    pub member_generator_indices: BTreeSet<usize>,
    /// rank of `F^gp`
    pub dim: usize,
}

impl AffineMonoid {
    pub fn new(ambient_rank: usize, generators: &[IntVec]) -> Result<Self> {
        Self::with_bounds(ambient_rank, generators, &Bounds::current())
    }

    pub fn with_bounds(ambient_rank: usize, generators: &[IntVec], bounds: &Bounds) -> Result<Self> {
        for g in generators {
            check_len(ambient_rank, g)?;
        }
        let mut gens: Vec<IntVec> = generators
            .iter()
            .filter(|g| g.iter().any(|&x| x != 0))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        gens.sort_by(graded_lex);
        let gp = Lattice::new(ambient_rank, &gens)?;
        let cone = geometry::facets(&gens, ambient_rank, bounds)?;
        let sharp = cone.lineality_dim(ambient_rank) == 0;
        let mut monoid = AffineMonoid {
            ambient_rank,
            minimal_generators: gens.clone(),
            generators: gens,
            gp,
            cone,
            sharp,
        };
        if sharp {
            let mut minimal = Vec::new();
            for (i, g) in monoid.generators.iter().enumerate() {
                let reducible = monoid.generators.iter().enumerate().any(|(j, h)| {
                    if i == j {
                        return false;
                    }
                    let rest: IntVec = g.iter().zip(h).map(|(a, b)| a - b).collect();
                    monoid.contains_unchecked(&rest)
                });
                if !reducible {
                    minimal.push(g.clone());
                }
            }
            monoid.minimal_generators = minimal;
        }
        Ok(monoid)
    }

    /// The trivial monoid `{0}` in `Z^ambient_rank`.
    pub fn trivial(ambient_rank: usize) -> Self {
        AffineMonoid {
            ambient_rank,
            generators: Vec::new(),
            gp: Lattice::zero(ambient_rank),
            minimal_generators: Vec::new(),
            cone: HRep {
                dim: 0,
                normals: Vec::new(),
                equations: Lattice::full(ambient_rank).basis().to_vec(),
            },
            sharp: true,
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    /// The unique minimal generating set when sharp (the Hilbert basis for
    /// saturated monoids); the deduplicated generators otherwise.
    pub fn minimal_generators(&self) -> &[IntVec] {
        &self.minimal_generators
    }

    pub fn gp(&self) -> &Lattice {
        &self.gp
    }

    /// Rank of the group envelope.
    pub fn dim(&self) -> usize {
        self.cone.dim
    }

    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    /// Primitive facet normals of the real cone, chosen inside its span.
    pub fn facet_normals(&self) -> &[IntVec] {
        &self.cone.normals
    }

    /// A functional that is positive on every nonzero element (sharp monoids only).
    pub fn grading(&self) -> IntVec {
        self.cone.grading(self.ambient_rank)
    }

    /// `x ∈ cone(P) ∩ gp(P)`, i.e. membership in the saturation.
    pub fn in_saturation(&self, x: &[i64]) -> Result<bool> {
        check_len(self.ambient_rank, x)?;
        Ok(self.cone.contains(x) && self.gp.contains(x)?)
    }

    /// Exact membership `x ∈ P`.
    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        check_len(self.ambient_rank, x)?;
        if !self.gp.contains(x)? || !self.cone.contains(x) {
            return Ok(false);
        }
        Ok(self.contains_unchecked(x))
    }

    fn lineality_generators(&self) -> Vec<IntVec> {
        self.generators
            .iter()
            .filter(|g| self.cone.normals.iter().all(|u| dot(u, g) == 0))
            .cloned()
            .collect()
    }

    /// Membership by descending search on the grading, modulo the unit group.
    fn contains_unchecked(&self, x: &[i64]) -> bool {
        let w = self.grading();
        let units = Lattice::new(self.ambient_rank, &self.lineality_generators())
            .expect("generators have the ambient length");
        let q = quotient(self.ambient_rank, &units).expect("matching ambient rank");
        let steps: Vec<IntVec> = self
            .generators
            .iter()
            .filter(|g| dot(&w, g) > 0)
            .cloned()
            .collect();
        let mut memo = BTreeMap::new();
        reach(x, &w, &steps, &self.cone, &q, &mut memo)
    }

    /// `P^×` and the sharp quotient `P / P^×` in torsion-free coordinates.
    pub fn units_and_sharpen(&self) -> Result<(Lattice, AffineMonoid)> {
        let units = Lattice::new(self.ambient_rank, &self.lineality_generators())?;
        let q = quotient(self.ambient_rank, &units)?;
        let image: Vec<IntVec> = self
            .generators
            .iter()
            .map(|g| q.free_part(g))
            .collect::<Result<_>>()?;
        let sharp = AffineMonoid::new(q.free_rank(), &image)?;
        Ok((units, sharp))
    }

    /// `P^sat = cone(P) ∩ gp(P)`, presented by units plus a lifted Hilbert basis.
    pub fn saturate(&self) -> Result<AffineMonoid> {
        self.saturate_with(&Bounds::current())
    }

    pub fn saturate_with(&self, bounds: &Bounds) -> Result<AffineMonoid> {
        let n = self.ambient_rank;
        let k = self.gp.rank();
        if k == 0 {
            return Ok(AffineMonoid::trivial(n));
        }
        bounds.check_rank(k)?;
        // the cone in gp-coordinates
        let coords: Vec<IntVec> = self
            .generators
            .iter()
            .map(|g| Ok(self.gp.coordinates(g)?.expect("generators lie in gp")))
            .collect::<Result<_>>()?;
        let normals_in_coords: Vec<IntVec> = self
            .cone
            .normals
            .iter()
            .map(|u| self.gp.basis().iter().map(|b| dot(u, b)).collect())
            .collect();
        // units of the saturation: lineality ∩ gp, saturated in gp
        let lineality = linalg::kernel(&normals_in_coords, k)?;
        let q = quotient(k, &Lattice::new(k, &lineality)?)?;
        debug_assert_eq!(q.torsion_order(), 1);
        let projected: Vec<IntVec> = coords
            .iter()
            .map(|c| q.free_part(c))
            .collect::<Result<_>>()?;
        let free = q.free_rank();
        let hb = geometry::hilbert_basis(&projected, &Lattice::full(free), bounds)?;
        let mut gens = Vec::new();
        for h in &hb {
            gens.push(self.gp.combine(&q.lift(&[], h)?));
        }
        for u in &lineality {
            let v = self.gp.combine(u);
            gens.push(v.iter().map(|x| -x).collect());
            gens.push(v);
        }
        AffineMonoid::with_bounds(n, &gens, bounds)
    }

    pub fn is_saturated(&self) -> Result<bool> {
        let sat = self.saturate()?;
        for g in sat.generators() {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn require_sharp(&self, what: &str) -> Result<()> {
        if !self.sharp {
            return Err(precondition!("{what} requires a sharp monoid"));
        }
        Ok(())
    }

    /// The complete face lattice, from `{0}` up to `P`, ordered by dimension.
    pub fn faces(&self) -> Result<Vec<FaceHandle>> {
        self.require_sharp("face enumeration")?;
        let n = self.ambient_rank;
        let gens = &self.minimal_generators;
        let all: BTreeSet<usize> = (0..gens.len()).collect();
        // a face is identified by the set of facets containing it
        let mut seen: BTreeMap<BTreeSet<usize>, BTreeSet<usize>> = BTreeMap::new();
        let mut stack = vec![all];
        while let Some(members) = stack.pop() {
            let containing: BTreeSet<usize> = self
                .cone
                .normals
                .iter()
                .enumerate()
                .filter(|(_, u)| members.iter().all(|&i| dot(u, &gens[i]) == 0))
                .map(|(j, _)| j)
                .collect();
            if seen.contains_key(&containing) {
                continue;
            }
            for u in &self.cone.normals {
                let smaller: BTreeSet<usize> = members
                    .iter()
                    .copied()
                    .filter(|&i| dot(u, &gens[i]) == 0)
                    .collect();
                if smaller != members {
                    stack.push(smaller);
                }
            }
            seen.insert(containing, members);
        }
        let mut faces: Vec<FaceHandle> = seen
            .into_iter()
            .map(|(containing, members)| {
                let mut u = vec![0i64; n];
                for j in &containing {
                    for (a, b) in u.iter_mut().zip(&self.cone.normals[*j]) {
                        *a += b;
                    }
                }
                let vecs: Vec<IntVec> = members.iter().map(|&i| gens[i].clone()).collect();
                FaceHandle {
                    supporting_functional: u,
                    dim: linalg::rank(&vecs, n),
                    member_generator_indices: members,
                }
            })
            .collect();
        faces.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then_with(|| a.member_generator_indices.cmp(&b.member_generator_indices))
        });
        Ok(faces)
    }

    /// `dim P - dim F`, the height of the prime `P \ F`.
    pub fn height(&self, face: &FaceHandle) -> usize {
        self.dim() - face.dim
    }

    fn face_lattice(&self, face: &FaceHandle) -> Result<Lattice> {
        let vecs: Vec<IntVec> = face
            .member_generator_indices
            .iter()
            .map(|&i| self.minimal_generators[i].clone())
            .collect();
        Lattice::new(self.ambient_rank, &vecs)
    }

    /// `gp(P) / F^gp` in coordinates of `gp(P)`.
    fn quotient_by_face(&self, face: &FaceHandle) -> Result<QuotientGroup> {
        let k = self.gp.rank();
        let face_coords: Vec<IntVec> = self
            .face_lattice(face)?
            .basis()
            .iter()
            .map(|b| Ok(self.gp.coordinates(b)?.expect("face lies in gp")))
            .collect::<Result<_>>()?;
        quotient(k, &Lattice::new(k, &face_coords)?)
    }

    fn gp_coordinates(&self, x: &[i64]) -> Result<IntVec> {
        self.gp
            .coordinates(x)?
            .ok_or_else(|| precondition!("element {:?} is outside gp(P)", x))
    }

    /// The sharp monoid `(P + F^gp) / F^gp` modulo torsion, and the torsion order of `gp(P)/F^gp`.
    pub fn localize_sharpen(&self, face: &FaceHandle) -> Result<(AffineMonoid, u64)> {
        let q = self.quotient_by_face(face)?;
        let image: Vec<IntVec> = self
            .generators
            .iter()
            .map(|g| q.free_part(&self.gp_coordinates(g)?))
            .collect::<Result<_>>()?;
        let local = AffineMonoid::new(q.free_rank(), &image)?;
        Ok((local, q.torsion_order()))
    }

    /// The saturation index of `e` along the height-one prime `P \ face`.
    pub fn saturation_index(&self, e: &[i64], face: &FaceHandle) -> Result<u64> {
        self.require_sharp("saturation index")?;
        check_len(self.ambient_rank, e)?;
        if self.height(face) != 1 {
            return Err(precondition!(
                "saturation index needs a height-one prime, got height {}",
                self.height(face)
            ));
        }
        let q = self.quotient_by_face(face)?;
        let image: Vec<i64> = self
            .generators
            .iter()
            .map(|g| Ok(q.free_part(&self.gp_coordinates(g)?)?[0]))
            .collect::<Result<_>>()?;
        let scale = content(&image) as i64;
        let sign = if image.iter().any(|&x| x < 0) { -1 } else { 1 };
        let value = q.free_part(&self.gp_coordinates(e)?)?[0] * sign;
        if value <= 0 {
            return Err(precondition!("{:?} is not vertical along this prime", e));
        }
        Ok((value / scale) as u64)
    }

    /// Whether `e` lies in no proper face.
    pub fn is_vertical(&self, e: &[i64]) -> Result<bool> {
        self.require_sharp("verticality")?;
        if !self.contains(e)? {
            return Err(precondition!("{:?} is not an element of the monoid", e));
        }
        Ok(self.cone.normals.iter().all(|u| dot(u, e) > 0))
    }

    /// Whether `P ≅ N^dim`.
    pub fn is_free(&self) -> bool {
        self.sharp && self.minimal_generators.len() == self.dim()
    }

    /// `P` re-expressed in coordinates of its group envelope (`gp = Z^dim`).
    pub fn in_group_coordinates(&self) -> Result<AffineMonoid> {
        let coords: Vec<IntVec> = self
            .generators
            .iter()
            .map(|g| self.gp_coordinates(g))
            .collect::<Result<_>>()?;
        AffineMonoid::new(self.gp.rank(), &coords)
    }

    /// Content of `e` as an element of `gp(P)`.
    pub fn content_in_group(&self, e: &[i64]) -> Result<u64> {
        Ok(content(&self.gp_coordinates(e)?))
    }
}

fn reach(
    x: &[i64],
    w: &[i64],
    steps: &[IntVec],
    cone: &HRep,
    q: &QuotientGroup,
    memo: &mut BTreeMap<IntVec, bool>,
) -> bool {
    let key = q.class_of(x).expect("matching ambient rank");
    if dot(w, x) == 0 {
        return q.is_zero(x).expect("matching ambient rank");
    }
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let mut found = false;
    for g in steps {
        let y: IntVec = x.iter().zip(g).map(|(a, b)| a - b).collect();
        if dot(w, &y) >= 0 && cone.contains(&y) && reach(&y, w, steps, cone, q, memo) {
            found = true;
            break;
        }
    }
    memo.insert(key, found);
    found
}

/// Largest divisor of `n` prime to `p` (`p = 0` means no wild part).
pub fn prime_to_p(n: u64, p: u64) -> u64 {
    if p < 2 || n == 0 {
        return n;
    }
    let mut n = n;
    while n % p == 0 {
        n /= p;
    }
    n
}

/// Bound `gcd(d, λ')` for the degree of the tame étale cover of a stratum,
/// where `λ` is the content of `e` in `gp(P)` and `λ'` its prime-to-`p` part.
pub fn cover_degree_bound(monoid: &AffineMonoid, e: &[i64], d: u64, p: u64) -> Result<u64> {
    if d == 0 {
        return Err(precondition!("cover degree needs d >= 1"));
    }
    if p > 0 && d.gcd(&p) != 1 {
        return Err(precondition!("d = {d} is not prime to the residue characteristic {p}"));
    }
    if !monoid.is_vertical(e)? {
        return Err(precondition!("{:?} is not vertical", e));
    }
    let lambda = monoid.content_in_group(e)?;
    Ok(d.gcd(&prime_to_p(lambda, p)))
}

/// The pushout `Q = P ⊕_N (1/d)N` along `1 ↦ e`.
///
/// Elements of `Q^gp = (gp(P) ⊕ Z) / ⟨(e, -d)⟩` are written `(p, m)` with
/// `p` in coordinates of `gp(P)`, standing for `p + m/d`. The homomorphism
/// `ψ(p, m) = d·p + m·e` identifies `Q^sat` with `ψ^{-1}(P^sat)`, and its
/// kernel is the torsion of `Q^gp`.
#[derive(Clone, Debug)]
pub struct PushoutPresentation {
    base: AffineMonoid,
    uniformizer_image: IntVec,
    root_order: u64,
    generators: Vec<IntVec>,
    relations: Lattice,
    quotient: QuotientGroup,
}

pub fn pushout_root(monoid: &AffineMonoid, e: &[i64], d: u64) -> Result<PushoutPresentation> {
    if d == 0 {
        return Err(precondition!("root order must be positive"));
    }
    if !monoid.is_vertical(e)? {
        return Err(precondition!("{:?} is not vertical", e));
    }
    let base = monoid.in_group_coordinates()?;
    let ec = monoid.gp_coordinates(e)?;
    let r = base.ambient_rank();
    let mut generators: Vec<IntVec> = base
        .generators()
        .iter()
        .map(|g| {
            let mut v = g.clone();
            v.push(0);
            v
        })
        .collect();
    let mut root = vec![0i64; r];
    root.push(1);
    generators.push(root);
    let mut rel = ec.clone();
    rel.push(-(d as i64));
    let relations = Lattice::new(r + 1, &[rel])?;
    let quotient = quotient(r + 1, &relations)?;
    Ok(PushoutPresentation {
        base,
        uniformizer_image: ec,
        root_order: d,
        generators,
        relations,
        quotient,
    })
}

impl PushoutPresentation {
    /// `P` in coordinates of its group envelope.
    pub fn base(&self) -> &AffineMonoid {
        &self.base
    }

    /// `e` in coordinates of `gp(P)`.
    pub fn uniformizer_image(&self) -> &[i64] {
        &self.uniformizer_image
    }

    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    /// Generators of `Q`: the images of the generators of `P`, then `(0, 1)`.
    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    pub fn relations(&self) -> &Lattice {
        &self.relations
    }

    /// `Q^gp` as a quotient group.
    pub fn group(&self) -> &QuotientGroup {
        &self.quotient
    }

    pub fn torsion_order(&self) -> u64 {
        self.quotient.torsion_order()
    }

    fn rank(&self) -> usize {
        self.base.ambient_rank()
    }

    /// `ψ(p, m) = d·p + m·e`.
    pub fn psi(&self, x: &[i64]) -> Result<IntVec> {
        check_len(self.rank() + 1, x)?;
        let d = self.root_order as i64;
        let m = x[self.rank()];
        Ok(x[..self.rank()]
            .iter()
            .zip(&self.uniformizer_image)
            .map(|(p, e)| d * p + m * e)
            .collect())
    }

    /// The representative `(p, m)` of the class of `x` with `0 <= m < d`.
    pub fn canonical(&self, x: &[i64]) -> Result<IntVec> {
        check_len(self.rank() + 1, x)?;
        let d = self.root_order as i64;
        let r = self.rank();
        let k = x[r].div_euclid(d);
        let mut out: IntVec = x[..r]
            .iter()
            .zip(&self.uniformizer_image)
            .map(|(p, e)| p + k * e)
            .collect();
        out.push(x[r] - k * d);
        Ok(out)
    }

    /// `x ∈ Q`.
    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        let c = self.canonical(x)?;
        let r = self.rank();
        let k = x[r].div_euclid(self.root_order as i64);
        let _ = k;
        // c = (p + k e, m - k d) with k = floor(m / d): x ∈ Q iff c's P-part lies in P
        self.base.contains(&c[..r])
    }

    /// `x ∈ Q^sat`, decided through `ψ(x) ∈ P^sat`.
    pub fn in_saturation(&self, x: &[i64]) -> Result<bool> {
        let y = self.psi(x)?;
        self.base.in_saturation(&y)
    }

    /// Degree of `x` for the grading `w ∘ ψ`, where `w` grades `P`.
    pub fn degree(&self, x: &[i64]) -> Result<i64> {
        Ok(dot(&self.base.grading(), &self.psi(x)?))
    }
}

/// Brute-force check, up to degree `degree_bound` (in the grading `w ∘ ψ`),
/// that `Q^sat` is generated by `Q^×`, the `d`-torsion of `Q^gp` and the
/// radical `I` of the ideal generated by the image of `P \ P^×`.
///
/// `x ∈ I` is decided by searching for `N >= 1` and a generator `g` of `P`
/// with `N·x - g ∈ Q^sat`. Taking `N <= d · max <u, g>` over facet normals
/// `u` is enough: a generator on the face carrying `ψ(x)` then always works.
pub fn lemma33_oracle(monoid: &AffineMonoid, e: &[i64], d: u64, degree_bound: i64) -> Result<bool> {
    lemma33_oracle_with(monoid, e, d, degree_bound, &Bounds::current())
}

pub fn lemma33_oracle_with(
    monoid: &AffineMonoid,
    e: &[i64],
    d: u64,
    degree_bound: i64,
    bounds: &Bounds,
) -> Result<bool> {
    oracle(monoid, e, d, degree_bound, bounds, true)
}

fn oracle(monoid: &AffineMonoid, e: &[i64], d: u64, degree_bound: i64, bounds: &Bounds, with_torsion: bool) -> Result<bool> {
    monoid.require_sharp("the pushout oracle")?;
    if !monoid.is_saturated()? {
        return Err(precondition!("the pushout oracle needs a saturated monoid"));
    }
    let q = pushout_root(monoid, e, d)?;
    let base = q.base();
    let r = base.ambient_rank();
    let di = d as i64;
    let w = base.grading();
    let gens = base.minimal_generators();

    // Q^sat up to degree B through ψ: y ∈ P with w(y) <= B and y ≡ m·e mod d
    let p_points = geometry::cone_points(gens, base.facet_normals(), &w, degree_bound, bounds)?;
    let mut q_sat = BTreeSet::new();
    for y in &p_points {
        for m in 0..di {
            let shifted: IntVec = y.iter().zip(&q.uniformizer_image).map(|(a, b)| a - m * b).collect();
            if shifted.iter().all(|x| x % di == 0) {
                let mut x: IntVec = shifted.iter().map(|x| x / di).collect();
                x.push(m);
                q_sat.insert(q.canonical(&x)?);
            }
        }
    }

    let mut seeds: BTreeSet<IntVec> = BTreeSet::new();
    // torsion, and the units of Q among it
    if with_torsion {
        for t in crate::lattice::d_torsion_representatives(q.group(), d)? {
            seeds.insert(q.canonical(&t)?);
        }
    }
    for t in q.group().torsion_elements()? {
        if q.contains(&t)? {
            seeds.insert(q.canonical(&t)?);
        }
    }
    let n_max = di
        * gens
            .iter()
            .flat_map(|g| base.facet_normals().iter().map(move |u| dot(u, g)))
            .max()
            .unwrap_or(1)
            .max(1);
    for x in &q_sat {
        let y = q.psi(x)?;
        let in_radical = (1..=n_max).any(|n| {
            gens.iter().any(|g| {
                let rest: IntVec = y.iter().zip(g).map(|(yi, gi)| n * yi - di * gi).collect();
                base.in_saturation(&rest).unwrap_or(false)
            })
        });
        if in_radical {
            seeds.insert(x.clone());
        }
    }
    for s in &seeds {
        if !q.in_saturation(s)? {
            return Ok(false);
        }
    }

    // every element of the truncation must be a sum of seeds
    let mut ordered: Vec<(i64, IntVec)> = q_sat.iter().map(|x| Ok((q.degree(x)?, x.clone()))).collect::<Result<_>>()?;
    ordered.sort();
    let zero = q.canonical(&vec![0i64; r + 1])?;
    let positive_seeds: Vec<&IntVec> = seeds.iter().filter(|s| **s != zero).collect();
    let mut generated: BTreeSet<IntVec> = BTreeSet::new();
    generated.insert(zero);
    for (_, x) in &ordered {
        if generated.contains(x) || seeds.contains(x) {
            generated.insert(x.clone());
            continue;
        }
        let mut found = false;
        for s in &positive_seeds {
            let diff: IntVec = x.iter().zip(s.iter()).map(|(a, b)| a - b).collect();
            if generated.contains(&q.canonical(&diff)?) {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
        generated.insert(x.clone());
    }
    Ok(true)
}
