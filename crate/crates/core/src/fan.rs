//! Decorated models: glued cone charts with Euler characteristics on strata.
//!
//! A chart is a cone complex in `N = Z^r` together with the image `e ∈ M` of
//! the uniformizer. Faces of different charts are identified by gluing
//! records; a point of the model is a class of glued nonzero faces, and its
//! stalk is the dual of the face taken inside the face's span. Faces are
//! addressed by their sorted primitive rays, so addresses survive
//! subdivisions.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::cone::{self, dual_monoid, multiplicity, stellar_subdivide, Cone, ConeComplex};
use crate::error::{check_len, precondition};
use crate::lattice::{self, content, Lattice};
use crate::linalg::{self, dot};
use crate::monoid::{prime_to_p, AffineMonoid};
use crate::{Error, IntVec, Result};

/// One chart `(complex, e)` of a model.
#[derive(Clone, Debug)]
pub struct Chart {
    id: String,
    rank: usize,
    complex: ConeComplex,
    e: IntVec,
    declared: Vec<Vec<IntVec>>,
}

// the declared ray lists only feed validation
impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.rank == other.rank && self.complex == other.complex && self.e == other.e
    }
}

impl Eq for Chart {}

impl Chart {
    /// `maximal_cones` lists each cone by its rays; validation checks that
    /// the listed vectors are exactly the primitive extreme rays.
    pub fn new(id: impl Into<String>, rank: usize, maximal_cones: &[Vec<IntVec>], e: IntVec) -> Result<Self> {
        check_len(rank, &e)?;
        let cones = maximal_cones
            .iter()
            .map(|c| {
                for r in c {
                    check_len(rank, r)?;
                }
                Cone::new(rank, c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chart {
            id: id.into(),
            rank,
            complex: ConeComplex::new(rank, cones)?,
            e,
            declared: maximal_cones.to_vec(),
        })
    }

    fn from_complex(id: String, complex: ConeComplex, e: IntVec) -> Self {
        let declared = complex.maximal_cones().iter().map(|c| c.rays().to_vec()).collect();
        Chart {
            id,
            rank: complex.ambient_rank(),
            complex,
            e,
            declared,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn complex(&self) -> &ConeComplex {
        &self.complex
    }

    pub fn e(&self) -> &[i64] {
        &self.e
    }

    /// The cones as they were supplied.
    pub fn declared_cones(&self) -> &[Vec<IntVec>] {
        &self.declared
    }
}

/// A face of a chart, by its sorted rays.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceRef {
    pub chart: usize,
    pub rays: Vec<IntVec>,
}

impl FaceRef {
    pub fn new(chart: usize, mut rays: Vec<IntVec>) -> Self {
        rays.sort();
        rays.dedup();
        FaceRef { chart, rays }
    }
}

/// Identification of `face_a` with `face_b` through `map: Z^{r_a} -> Z^{r_b}`
/// (`r_b` rows, `r_a` columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub chart_a: usize,
    pub face_a: Vec<IntVec>,
    pub chart_b: usize,
    pub face_b: Vec<IntVec>,
    pub map: Vec<IntVec>,
}

fn apply(map: &[IntVec], x: &[i64]) -> IntVec {
    map.iter().map(|row| dot(row, x)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedModel {
    /// 0 or a prime
    pub residue_char: u64,
    pub log_smooth_claimed: bool,
    pub charts: Vec<Chart>,
    pub gluings: Vec<Gluing>,
    pub chi: BTreeMap<FaceRef, i64>,
    pub chart_cokernel_torsion: BTreeMap<FaceRef, u64>,
}

/// A point of the fan: a class of glued faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanPoint {
    pub id: String,
    /// representative face
    pub face: FaceRef,
    pub members: Vec<FaceRef>,
    pub cone: Cone,
    pub height: usize,
    pub stalk: AffineMonoid,
    /// image of `e` in the stalk's group
    pub e_x: IntVec,
    /// saturation index, height one only
    pub s: Option<u64>,
    pub s_prime: Option<u64>,
    pub lambda: u64,
    pub chi: i64,
    /// `s` of the rays of the face, i.e. of the height-one generizations
    pub ray_multiplicities: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

fn fmt_vec(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    parts.join(",")
}

fn face_label(model: &DecoratedModel, f: &FaceRef) -> String {
    let rays: Vec<String> = f.rays.iter().map(|r| fmt_vec(r)).collect();
    format!("{}:{}", model.charts[f.chart].id, rays.join(";"))
}

/// Ray correspondence of an induced identification between two faces.
#[derive(Clone, Debug)]
struct Edge {
    a: usize,
    b: usize,
    pairs: Vec<(IntVec, IntVec)>,
}

/// Faces, glued classes and the identifications between them.
struct Structure {
    faces: Vec<(FaceRef, Cone)>,
    index: BTreeMap<FaceRef, usize>,
    classes: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// `x` expressed through the rays `from` and rebuilt on `to`.
fn transport(x: &[i64], pairs: &[(IntVec, IntVec)], reverse: bool) -> Option<IntVec> {
    let (src, dst): (Vec<IntVec>, Vec<IntVec>) = if reverse {
        pairs.iter().map(|(a, b)| (b.clone(), a.clone())).unzip()
    } else {
        pairs.iter().cloned().unzip()
    };
    let coeffs = linalg::solve_rational(&src, x)?;
    let n = dst.first().map(|d| d.len())?;
    let mut out = alloc::vec![BigRational::zero(); n];
    for (c, d) in coeffs.iter().zip(&dst) {
        for (o, di) in out.iter_mut().zip(d) {
            *o += c * BigRational::from_integer(BigInt::from(*di));
        }
    }
    out.iter()
        .map(|q| if q.is_integer() { q.to_integer().to_i64() } else { None })
        .collect()
}

impl Structure {
    fn build(model: &DecoratedModel, report: &mut ValidationReport) -> Result<Structure> {
        let mut faces = Vec::new();
        for (ci, chart) in model.charts.iter().enumerate() {
            if chart.complex.maximal_cones().iter().any(|c| !c.is_pointed()) {
                continue;
            }
            for f in chart.complex.faces()? {
                faces.push((FaceRef::new(ci, f.rays().to_vec()), f));
            }
        }
        let index: BTreeMap<FaceRef, usize> = faces.iter().enumerate().map(|(i, (f, _))| (f.clone(), i)).collect();
        let mut parent: Vec<usize> = (0..faces.len()).collect();
        let mut edges = Vec::new();
        for (gi, g) in model.gluings.iter().enumerate() {
            let loc = format!("gluing {gi}");
            let fa = FaceRef::new(g.chart_a, g.face_a.clone());
            let fb = FaceRef::new(g.chart_b, g.face_b.clone());
            let (Some(&ia), Some(&ib)) = (index.get(&fa), index.get(&fb)) else {
                report.push(loc, "glued face is not a face of its chart");
                continue;
            };
            let (ra, rb) = (model.charts[g.chart_a].rank, model.charts[g.chart_b].rank);
            if g.map.len() != rb || g.map.iter().any(|row| row.len() != ra) {
                report.push(loc, format!("map must have {rb} rows of length {ra}"));
                continue;
            }
            let image: BTreeSet<IntVec> = fa.rays.iter().map(|r| apply(&g.map, r)).collect();
            if image != fb.rays.iter().cloned().collect::<BTreeSet<_>>() {
                report.push(loc, "map does not carry rays onto rays");
                continue;
            }
            let ca = &faces[ia].1;
            let cb = &faces[ib].1;
            // unimodular between the spans, compatible with e
            let sa = ca.span_lattice()?;
            let sb = cb.span_lattice()?;
            let mut coords = Vec::new();
            let mut ok = true;
            for b in sa.basis() {
                let mb = apply(&g.map, b);
                if dot(model.charts[g.chart_b].e(), &mb) != dot(model.charts[g.chart_a].e(), b) {
                    report.push(loc.clone(), "map does not preserve the pairing with e");
                    ok = false;
                    break;
                }
                match sb.coordinates(&mb)? {
                    Some(c) => coords.push(c),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            if coords.len() != sb.rank() || lattice::abs_det(&coords).ok() != Some(1) {
                report.push(loc, "map is not unimodular between the face spans");
                continue;
            }
            for sub in ca.face_ray_sets()? {
                if sub.is_empty() {
                    continue;
                }
                let pairs: Vec<(IntVec, IntVec)> = sub
                    .iter()
                    .map(|&i| (ca.rays()[i].clone(), apply(&g.map, &ca.rays()[i])))
                    .collect();
                let sa_ref = FaceRef::new(g.chart_a, pairs.iter().map(|p| p.0.clone()).collect());
                let sb_ref = FaceRef::new(g.chart_b, pairs.iter().map(|p| p.1.clone()).collect());
                let (Some(&x), Some(&y)) = (index.get(&sa_ref), index.get(&sb_ref)) else {
                    report.push(loc.clone(), "induced identification of subfaces is not face to face");
                    continue;
                };
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                parent[rx.max(ry)] = rx.min(ry);
                edges.push(Edge { a: x, b: y, pairs });
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..faces.len() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
        for c in classes.iter_mut() {
            c.sort_by(|x, y| faces[*x].0.cmp(&faces[*y].0));
        }
        classes.sort_by(|x, y| faces[x[0]].0.cmp(&faces[y[0]].0));
        Ok(Structure {
            faces,
            index,
            classes,
            edges,
        })
    }

    /// Carries `x` from the face `start` to every face glued to it.
    fn transport_from(&self, start: usize, x: &[i64]) -> core::result::Result<BTreeMap<usize, IntVec>, String> {
        let mut at: BTreeMap<usize, IntVec> = BTreeMap::new();
        at.insert(start, x.to_vec());
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let xi = at[&i].clone();
            for e in &self.edges {
                let (j, rev) = if e.a == i {
                    (e.b, false)
                } else if e.b == i {
                    (e.a, true)
                } else {
                    continue;
                };
                let Some(y) = transport(&xi, &e.pairs, rev) else {
                    return Err(String::from("identification does not preserve the lattice"));
                };
                match at.get(&j) {
                    Some(prev) if *prev != y => {
                        return Err(String::from("gluings identify the face with itself nontrivially"));
                    }
                    Some(_) => {}
                    None => {
                        at.insert(j, y);
                        queue.push_back(j);
                    }
                }
            }
        }
        Ok(at)
    }

    fn class_chi(&self, model: &DecoratedModel, class: usize) -> core::result::Result<i64, String> {
        let mut values = BTreeSet::new();
        for &i in &self.classes[class] {
            if let Some(&v) = model.chi.get(&self.faces[i].0) {
                values.insert(v);
            }
        }
        match values.len() {
            1 => Ok(*values.iter().next().expect("one value")),
            0 => Err(String::from("no chi decoration")),
            _ => Err(format!("conflicting chi decorations {:?}", values)),
        }
    }
}

/// Structural checks; an empty report means the model is accepted.
pub fn validate(model: &DecoratedModel) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let p = model.residue_char;
    if p != 0 && !is_prime(p) {
        report.push("model", format!("residue characteristic {p} is neither 0 nor a prime"));
    }
    let mut ids = BTreeSet::new();
    for chart in &model.charts {
        let loc = format!("chart {}", chart.id);
        if !ids.insert(chart.id.clone()) {
            report.push(loc.clone(), "duplicate chart id");
        }
        for (k, declared) in chart.declared.iter().enumerate() {
            for r in declared {
                if content(r) != 1 {
                    report.push(loc.clone(), format!("ray ({}) is not primitive", fmt_vec(r)));
                }
            }
            let c = Cone::new(chart.rank, declared)?;
            if !c.is_pointed() {
                report.push(loc.clone(), format!("cone {k} is not pointed"));
                continue;
            }
            let mut given = declared.clone();
            given.sort();
            given.dedup();
            if given != c.rays() {
                report.push(loc.clone(), format!("cone {k} is not listed by its extreme rays"));
            }
        }
        for v in chart.complex.fan_violations() {
            report.push(loc.clone(), v);
        }
        for r in chart.complex.rays() {
            if chart.complex.maximal_cones().iter().all(|c| c.is_pointed()) && dot(&r, &chart.e) < 1 {
                report.push(
                    loc.clone(),
                    format!("not vertical: <({}), e> = {} < 1", fmt_vec(&r), dot(&r, &chart.e)),
                );
            }
        }
    }
    if !report.is_ok() {
        return Ok(report);
    }
    let st = Structure::build(model, &mut report)?;
    for (k, members) in st.classes.iter().enumerate() {
        let charts: BTreeSet<usize> = members.iter().map(|&i| st.faces[i].0.chart).collect();
        let loc = format!("point {}", face_label(model, &st.faces[members[0]].0));
        if charts.len() != members.len() {
            report.push(loc.clone(), "glued class meets a chart in two different faces");
        }
        let x = st.faces[members[0]].1.interior_point();
        if let Err(m) = st.transport_from(members[0], &x) {
            report.push(loc.clone(), m);
        }
        if let Err(m) = st.class_chi(model, k) {
            report.push(loc, m);
        }
    }
    for (what, keys) in [
        ("chi", model.chi.keys().collect::<Vec<_>>()),
        ("cokernel torsion", model.chart_cokernel_torsion.keys().collect()),
    ] {
        for f in keys {
            if f.chart >= model.charts.len() || !st.index.contains_key(f) {
                report.push(format!("{what} entry"), format!("unknown face {:?}", f.rays));
            }
        }
    }
    for (f, &t) in &model.chart_cokernel_torsion {
        if t == 0 {
            report.push(format!("cokernel torsion at {}", face_label(model, f)), "torsion order must be positive");
        }
    }
    Ok(report)
}

fn require_valid(model: &DecoratedModel) -> Result<Structure> {
    let report = validate(model)?;
    if let Some(v) = report.violations.first() {
        return Err(precondition!("model is not valid: {}: {}", v.location, v.message));
    }
    let mut scratch = ValidationReport::default();
    Structure::build(model, &mut scratch)
}

/// Stalk of a face: the dual cone inside the face's span, with `e` restricted.
fn stalk_data(cone: &Cone, e: &[i64]) -> Result<(AffineMonoid, IntVec)> {
    let stalk = dual_monoid(cone)?;
    let span = cone.span_lattice()?;
    let e_x = span.basis().iter().map(|b| dot(e, b)).collect();
    Ok((stalk, e_x))
}

/// All points, by height, then chart, then rays.
pub fn enumerate_points(model: &DecoratedModel) -> Result<Vec<FanPoint>> {
    let st = require_valid(model)?;
    let p = model.residue_char;
    let mut out = Vec::with_capacity(st.classes.len());
    for (k, members) in st.classes.iter().enumerate() {
        let (face, cone) = st.faces[members[0]].clone();
        let e = model.charts[face.chart].e();
        let (stalk, e_x) = stalk_data(&cone, e)?;
        let height = cone.dim();
        let ray_multiplicities: Vec<u64> = cone.rays().iter().map(|r| dot(r, e) as u64).collect();
        let s = (height == 1).then(|| ray_multiplicities[0]);
        let chi = st.class_chi(model, k).map_err(Error::Inconsistent)?;
        out.push(FanPoint {
            id: face_label(model, &face),
            members: members.iter().map(|&i| st.faces[i].0.clone()).collect(),
            face,
            height,
            lambda: content(&e_x),
            stalk,
            e_x,
            s,
            s_prime: s.map(|s| prime_to_p(s, p)),
            chi,
            ray_multiplicities,
            cone,
        });
    }
    out.sort_by(|a, b| a.height.cmp(&b.height).then_with(|| a.face.cmp(&b.face)));
    Ok(out)
}

/// chi of every face, read off its class.
fn face_chi(model: &DecoratedModel, st: &Structure) -> Result<BTreeMap<FaceRef, i64>> {
    let mut out = BTreeMap::new();
    for (k, members) in st.classes.iter().enumerate() {
        let chi = st.class_chi(model, k).map_err(Error::Inconsistent)?;
        for &i in members {
            out.insert(st.faces[i].0.clone(), chi);
        }
    }
    Ok(out)
}

impl DecoratedModel {
    /// Keeps one chi entry per point, on its representative face.
    pub fn normalized(mut self) -> Result<Self> {
        let mut scratch = ValidationReport::default();
        let st = Structure::build(&self, &mut scratch)?;
        let mut chi = BTreeMap::new();
        for (k, members) in st.classes.iter().enumerate() {
            let v = st.class_chi(&self, k).map_err(Error::Inconsistent)?;
            chi.insert(st.faces[members[0]].0.clone(), v);
        }
        self.chi = chi;
        Ok(self)
    }

    pub fn chart_index(&self, id: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.id == id)
    }
}

/// Log blow-up at the primitive vector `v` in the relative interior of the
/// face `at`, carried to every chart of its point through the gluings.
///
/// Surviving faces keep their chi; a new face gets the chi of its carrier
/// when both have the same dimension and 0 otherwise (its stratum is then
/// fibred in positive-dimensional split tori).
pub fn model_stellar_subdivide(model: &DecoratedModel, at: &FaceRef, v: &[i64]) -> Result<DecoratedModel> {
    let st = require_valid(model)?;
    subdivide_with(model, &st, at, v)
}

/// The subdivision proper, for a model already known to be valid.
fn subdivide_with(model: &DecoratedModel, st: &Structure, at: &FaceRef, v: &[i64]) -> Result<DecoratedModel> {
    let Some(&idx) = st.index.get(at) else {
        return Err(precondition!("{:?} is not a face of chart {}", at.rays, at.chart));
    };
    let tau = &st.faces[idx].1;
    check_len(tau.ambient_rank(), v)?;
    if content(v) != 1 {
        return Err(precondition!("center ({}) is not primitive", fmt_vec(v)));
    }
    if !tau.in_relative_interior(v) {
        return Err(precondition!(
            "center ({}) is not in the relative interior of the face {}",
            fmt_vec(v),
            face_label(model, at)
        ));
    }
    let centers = st.transport_from(idx, v).map_err(Error::Inconsistent)?;
    let old_chi = face_chi(model, st)?;

    let mut charts = model.charts.clone();
    let mut chart_center: BTreeMap<usize, IntVec> = BTreeMap::new();
    for (&i, c) in &centers {
        let chart = st.faces[i].0.chart;
        let old = &model.charts[chart];
        let complex = stellar_subdivide(&old.complex, c)?;
        charts[chart] = Chart::from_complex(old.id.clone(), complex, old.e.clone());
        chart_center.insert(chart, c.clone());
    }

    let mut gluings = Vec::new();
    for g in &model.gluings {
        let Some(va) = chart_center.get(&g.chart_a) else {
            gluings.push(g.clone());
            continue;
        };
        let face_a = Cone::new(model.charts[g.chart_a].rank, &g.face_a)?;
        if !face_a.contains(va) {
            gluings.push(g.clone());
            continue;
        }
        for piece in charts[g.chart_a].complex.faces()? {
            if piece.dim() == face_a.dim() && face_a.contains_cone(&piece) {
                let image: Vec<IntVec> = piece.rays().iter().map(|r| apply(&g.map, r)).collect();
                gluings.push(Gluing {
                    chart_a: g.chart_a,
                    face_a: piece.rays().to_vec(),
                    chart_b: g.chart_b,
                    face_b: FaceRef::new(g.chart_b, image).rays,
                    map: g.map.clone(),
                });
            }
        }
    }

    let mut chi = BTreeMap::new();
    for (ci, chart) in charts.iter().enumerate() {
        for f in chart.complex.faces()? {
            let fr = FaceRef::new(ci, f.rays().to_vec());
            let value = if let Some(&c) = old_chi.get(&fr) {
                c
            } else {
                let carrier = model.charts[ci]
                    .complex
                    .carrier(&f.interior_point())?
                    .ok_or_else(|| Error::Inconsistent("new face outside the old support".into()))?;
                let old = old_chi[&FaceRef::new(ci, carrier.rays().to_vec())];
                if carrier.dim() == f.dim() {
                    old
                } else {
                    0
                }
            };
            chi.insert(fr, value);
        }
    }
    let new_faces: BTreeSet<FaceRef> = chi.keys().cloned().collect();
    let chart_cokernel_torsion = model
        .chart_cokernel_torsion
        .iter()
        .filter(|(f, _)| new_faces.contains(*f))
        .map(|(f, t)| (f.clone(), *t))
        .collect();
    DecoratedModel {
        residue_char: model.residue_char,
        log_smooth_claimed: model.log_smooth_claimed,
        charts,
        gluings,
        chi,
        chart_cokernel_torsion,
    }
    .normalized()
}

/// A resolution step: the face carrying the center, and the center.
pub type Center = (FaceRef, IntVec);

/// Subdivides until every stalk is free; returns the model and the centers used.
pub fn model_resolve(model: &DecoratedModel) -> Result<(DecoratedModel, Vec<Center>)> {
    const MAX_STEPS: u64 = 10_000;
    // subdivisions keep a model valid, so only the input is checked in full
    let mut st = require_valid(model)?;
    let mut m = model.clone();
    let mut trail = Vec::new();
    loop {
        let mut next = None;
        for simplicial_pass in [false, true] {
            for (ci, chart) in m.charts.iter().enumerate() {
                for c in chart.complex.maximal_cones() {
                    let needs = if simplicial_pass {
                        multiplicity(c)? > 1
                    } else {
                        !c.is_simplicial()
                    };
                    if needs {
                        let v = cone::resolution_center(c)?.expect("cone needs work");
                        let carrier = chart.complex.carrier(&v)?.expect("center lies in its cone");
                        next = Some((FaceRef::new(ci, carrier.rays().to_vec()), v));
                        break;
                    }
                }
                if next.is_some() {
                    break;
                }
            }
            if next.is_some() {
                break;
            }
        }
        let Some((face, v)) = next else {
            return Ok((m, trail));
        };
        if trail.len() as u64 >= MAX_STEPS {
            return Err(Error::BoundExceeded {
                what: "resolution steps",
                value: trail.len() as u64,
                bound: MAX_STEPS,
            });
        }
        m = subdivide_with(&m, &st, &face, &v)?;
        st = Structure::build(&m, &mut ValidationReport::default())?;
        trail.push((face, v));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SncReport {
    pub snc: bool,
    /// `(point id, s)` over height-one points, present when `snc`
    pub special_fibre_cycle: Option<Vec<(String, u64)>>,
}

/// Whether every stalk is free, with the special fibre `sum s(x)·[x]` when so.
pub fn is_snc(points: &[FanPoint]) -> SncReport {
    let snc = points.iter().all(|x| x.stalk.is_free());
    let special_fibre_cycle = snc.then(|| {
        points
            .iter()
            .filter(|x| x.height == 1)
            .map(|x| (x.id.clone(), x.s.expect("height one")))
            .collect()
    });
    SncReport {
        snc,
        special_fibre_cycle,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Necessary conditions for a model claimed log smooth in characteristic `p > 0`:
/// chart cokernel torsion prime to `p`, and `chi = 0` on every height-one
/// stratum whose multiplicity is divisible by `p`.
pub fn log_smooth_consistency(model: &DecoratedModel, points: &[FanPoint]) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let p = model.residue_char;
    if !model.log_smooth_claimed || p == 0 {
        return report;
    }
    for (f, &t) in &model.chart_cokernel_torsion {
        if t % p == 0 {
            report.violations.push(Violation {
                location: format!("point {}", face_label(model, f)),
                message: format!("chart cokernel torsion {t} is not prime to p = {p}"),
            });
        }
    }
    for x in points.iter().filter(|x| x.height == 1) {
        let s = x.s.expect("height one");
        if s % p == 0 && x.chi != 0 {
            report.violations.push(Violation {
                location: format!("point {}", x.id),
                message: format!(
                    "p = {p} divides s = {s} but chi = {}; a log smooth model has vanishing Euler \
                     characteristic on every component of multiplicity divisible by p",
                    x.chi
                ),
            });
        }
    }
    report
}

/// The saturation index of `e_x` in the stalk of a height-one point.
pub fn stalk_saturation_index(x: &FanPoint) -> Result<u64> {
    if x.height != 1 {
        return Err(precondition!("saturation index at a point of height {}", x.height));
    }
    let zero_face = x
        .stalk
        .faces()?
        .into_iter()
        .find(|f| f.dim == 0)
        .expect("sharp monoids have a zero face");
    x.stalk.saturation_index(&x.e_x, &zero_face)
}

/// Lattice of the face in chart coordinates, exposed for tests.
pub fn face_span(x: &FanPoint) -> Result<Lattice> {
    x.cone.span_lattice()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chart(id: &str, cones: &[&[&[i64]]], e: &[i64]) -> Chart {
        let rank = e.len();
        let cs: Vec<Vec<IntVec>> = cones.iter().map(|c| c.iter().map(|r| r.to_vec()).collect()).collect();
        Chart::new(id, rank, &cs, e.to_vec()).unwrap()
    }

    fn face(chart: usize, rays: &[&[i64]]) -> FaceRef {
        FaceRef::new(chart, rays.iter().map(|r| r.to_vec()).collect())
    }

    fn model(charts: Vec<Chart>, gluings: Vec<Gluing>, chi: &[(FaceRef, i64)], p: u64) -> DecoratedModel {
        DecoratedModel {
            residue_char: p,
            log_smooth_claimed: false,
            charts,
            gluings,
            chi: chi.iter().cloned().collect(),
            chart_cokernel_torsion: BTreeMap::new(),
        }
    }

    fn quadrant(e: &[i64], chis: (i64, i64, i64)) -> DecoratedModel {
        model(
            alloc::vec![chart("q", &[&[&[1, 0], &[0, 1]]], e)],
            alloc::vec![],
            &[
                (face(0, &[&[1, 0]]), chis.0),
                (face(0, &[&[0, 1]]), chis.1),
                (face(0, &[&[1, 0], &[0, 1]]), chis.2),
            ],
            0,
        )
    }

    fn a1(e: &[i64], top: &[i64]) -> DecoratedModel {
        model(
            alloc::vec![chart("a", &[&[&[1, 0], top]], e)],
            alloc::vec![],
            &[
                (face(0, &[&[1, 0]]), 1),
                (face(0, &[top]), 1),
                (face(0, &[&[1, 0], top]), 7),
            ],
            0,
        )
    }

    fn swap() -> Vec<IntVec> {
        alloc::vec![alloc::vec![0, 1], alloc::vec![1, 0]]
    }

    fn i3() -> DecoratedModel {
        let charts = (0..3).map(|i| chart(&format!("c{i}"), &[&[&[1, 0], &[0, 1]]], &[1, 1])).collect();
        let gluings = (0..3)
            .map(|i| Gluing {
                chart_a: i,
                face_a: alloc::vec![alloc::vec![0, 1]],
                chart_b: (i + 1) % 3,
                face_b: alloc::vec![alloc::vec![1, 0]],
                map: swap(),
            })
            .collect();
        let mut chi = Vec::new();
        for i in 0..3 {
            chi.push((face(i, &[&[1, 0]]), 0));
            chi.push((face(i, &[&[1, 0], &[0, 1]]), 1));
        }
        model(charts, gluings, &chi, 0)
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&quadrant(&[1, 1], (1, 1, 1))).unwrap().is_ok());
        let bad = validate(&quadrant(&[1, 0], (1, 1, 1))).unwrap();
        assert_eq!(bad.violations.len(), 1);
        assert!(bad.violations[0].message.contains("not vertical"));
        assert!(bad.violations[0].message.contains("0,1"));

        // rays of multiplicity 1 and 2 glued
        let charts = alloc::vec![chart("a", &[&[&[1]]], &[1]), chart("b", &[&[&[1]]], &[2])];
        let g = Gluing {
            chart_a: 0,
            face_a: alloc::vec![alloc::vec![1]],
            chart_b: 1,
            face_b: alloc::vec![alloc::vec![1]],
            map: alloc::vec![alloc::vec![1]],
        };
        let m = model(charts, alloc::vec![g], &[(face(0, &[&[1]]), 1)], 0);
        let r = validate(&m).unwrap();
        assert!(r.violations.iter().any(|v| v.location.starts_with("gluing") && v.message.contains("pairing")));
    }

    #[test]
    fn validate_decorations() {
        let mut m = quadrant(&[1, 1], (1, 1, 1));
        m.chi.remove(&face(0, &[&[1, 0]]));
        assert!(validate(&m).unwrap().violations[0].message.contains("no chi"));
        let mut m = quadrant(&[1, 1], (1, 1, 1));
        m.chi.insert(face(0, &[&[1, 1]]), 3);
        assert!(validate(&m).unwrap().violations[0].message.contains("unknown face"));
        let mut m = quadrant(&[1, 1], (1, 1, 1));
        m.residue_char = 4;
        assert!(!validate(&m).unwrap().is_ok());
    }

    #[test]
    fn validate_geometry() {
        let overlapping = model(
            alloc::vec![chart("x", &[&[&[1, 0], &[1, 2]], &[&[1, 1], &[0, 1]]], &[1, 1])],
            alloc::vec![],
            &[],
            0,
        );
        assert!(validate(&overlapping).unwrap().violations.iter().any(|v| v.message.contains("common face")));
        let redundant = model(
            alloc::vec![chart("x", &[&[&[1, 0], &[1, 1], &[0, 1]]], &[1, 1])],
            alloc::vec![],
            &[],
            0,
        );
        assert!(validate(&redundant).unwrap().violations.iter().any(|v| v.message.contains("extreme rays")));
        let nonprim = model(alloc::vec![chart("x", &[&[&[2, 0], &[0, 1]]], &[1, 1])], alloc::vec![], &[], 0);
        assert!(validate(&nonprim).unwrap().violations.iter().any(|v| v.message.contains("primitive")));
    }

    #[test]
    fn points_of_i3() {
        let pts = enumerate_points(&i3()).unwrap();
        assert_eq!(pts.iter().filter(|x| x.height == 1).count(), 3);
        assert_eq!(pts.iter().filter(|x| x.height == 2).count(), 3);
        assert!(pts.iter().filter(|x| x.height == 1).all(|x| x.s == Some(1) && x.chi == 0));
        assert!(pts.iter().filter(|x| x.height == 1).all(|x| x.members.len() == 2));
    }

    #[test]
    fn points_of_a_ray_and_of_a1() {
        let m = model(alloc::vec![chart("r", &[&[&[1, 2]]], &[3, 0])], alloc::vec![], &[(face(0, &[&[1, 2]]), 4)], 0);
        let pts = enumerate_points(&m).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].s, Some(3));
        assert_eq!(pts[0].lambda, 3);

        let pts = enumerate_points(&a1(&[1, 1], &[1, 2])).unwrap();
        let s: Vec<Option<u64>> = pts.iter().filter(|x| x.height == 1).map(|x| x.s).collect();
        assert_eq!(s, alloc::vec![Some(1), Some(3)]);
        let top: Vec<&FanPoint> = pts.iter().filter(|x| x.height == 2).collect();
        assert_eq!(top.len(), 1);
        assert!(!top[0].stalk.is_free());
    }

    #[test]
    fn saturation_index_agrees_with_pairing() {
        for m in [a1(&[1, 1], &[1, 2]), a1(&[2, 1], &[1, 3]), i3()] {
            for x in enumerate_points(&m).unwrap().iter().filter(|x| x.height == 1) {
                assert_eq!(stalk_saturation_index(x).unwrap(), x.s.unwrap());
                assert_eq!(x.lambda, x.s.unwrap());
            }
        }
    }

    fn chis(m: &DecoratedModel) -> BTreeMap<String, i64> {
        enumerate_points(m).unwrap().into_iter().map(|x| (x.id, x.chi)).collect()
    }

    #[test]
    fn subdivide_a1() {
        let m = a1(&[1, 1], &[1, 2]);
        let s = model_stellar_subdivide(&m, &face(0, &[&[1, 0], &[1, 2]]), &[1, 1]).unwrap();
        let c = chis(&s);
        assert_eq!(c["a:1,1"], 0);
        assert_eq!(c["a:1,0;1,1"], 7);
        assert_eq!(c["a:1,1;1,2"], 7);
        assert_eq!(c["a:1,0"], 1);
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn subdivide_quadrant() {
        let m = quadrant(&[1, 1], (2, 3, 5));
        let s = model_stellar_subdivide(&m, &face(0, &[&[1, 0], &[0, 1]]), &[1, 1]).unwrap();
        let c = chis(&s);
        assert_eq!((c["q:1,1"], c["q:0,1;1,1"], c["q:1,0;1,1"], c["q:1,0"], c["q:0,1"]), (0, 5, 5, 2, 3));
        // at an existing ray
        let same = model_stellar_subdivide(&m, &face(0, &[&[1, 0]]), &[1, 0]).unwrap();
        assert_eq!(same, m.clone().normalized().unwrap());
        // on the boundary of the intended face
        assert!(model_stellar_subdivide(&m, &face(0, &[&[1, 0], &[0, 1]]), &[1, 0]).is_err());
    }

    #[test]
    fn subdivision_follows_gluings() {
        // two quadrants glued along a ray; blow up a point on the shared ray's neighbour corner
        let m = i3();
        let s = model_stellar_subdivide(&m, &face(1, &[&[1, 0], &[0, 1]]), &[1, 1]).unwrap();
        assert!(validate(&s).unwrap().is_ok());
        assert_eq!(enumerate_points(&s).unwrap().len(), 8);
        // subdividing a glued ray is the identity and keeps the gluing
        let t = model_stellar_subdivide(&m, &face(0, &[&[0, 1]]), &[0, 1]).unwrap();
        assert_eq!(enumerate_points(&t).unwrap().len(), 6);
    }

    #[test]
    fn subdivision_of_a_glued_two_face() {
        // two rank-3 charts sharing a 2-face through the identity map
        let c0 = chart("u", &[&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]], &[1, 1, 1]);
        let c1 = chart("w", &[&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]], &[1, 1, 1]);
        let id3 = alloc::vec![alloc::vec![1, 0, 0], alloc::vec![0, 1, 0], alloc::vec![0, 0, 1]];
        let g = Gluing {
            chart_a: 0,
            face_a: alloc::vec![alloc::vec![1, 0, 0], alloc::vec![0, 1, 0]],
            chart_b: 1,
            face_b: alloc::vec![alloc::vec![1, 0, 0], alloc::vec![0, 1, 0]],
            map: id3,
        };
        let mut chi = Vec::new();
        for (ci, ch) in [&c0, &c1].iter().enumerate() {
            for f in ch.complex().faces().unwrap() {
                chi.push((FaceRef::new(ci, f.rays().to_vec()), 1));
            }
        }
        let m = model(alloc::vec![c0, c1], alloc::vec![g], &chi, 0);
        assert!(validate(&m).unwrap().is_ok());
        let before = enumerate_points(&m).unwrap().len();
        let s = model_stellar_subdivide(&m, &face(1, &[&[1, 0, 0], &[0, 1, 0]]), &[1, 1, 0]).unwrap();
        assert!(validate(&s).unwrap().is_ok());
        // one new ray, two new 2-faces on the shared face, one new 2-face per chart, 2+2 new 3-cones, minus the old
        let pts = enumerate_points(&s).unwrap();
        assert_eq!(pts.len(), before + 1 + 2 + 2 + 4 - 1 - 2);
        let new_ray = pts.iter().find(|x| x.height == 1 && x.cone.rays() == [alloc::vec![1, 1, 0]]).unwrap();
        assert_eq!(new_ray.chi, 0);
        assert_eq!(new_ray.members.len(), 2);
    }

    #[test]
    fn resolve_examples() {
        let (r, trail) = model_resolve(&a1(&[1, 1], &[1, 2])).unwrap();
        assert_eq!(trail.len(), 1);
        assert_eq!(trail[0].1, alloc::vec![1, 1]);
        let pts = enumerate_points(&r).unwrap();
        let mut s: Vec<u64> = pts.iter().filter_map(|x| x.s).collect();
        s.sort();
        assert_eq!(s, alloc::vec![1, 2, 3]);
        assert_eq!(chis(&r)["a:1,1"], 0);
        let snc = is_snc(&pts);
        assert!(snc.snc);

        let q = quadrant(&[2, 3], (1, 1, 1));
        let (r, trail) = model_resolve(&q).unwrap();
        assert!(trail.is_empty());
        assert_eq!(r, q.clone().normalized().unwrap());
        let cycle = is_snc(&enumerate_points(&q).unwrap()).special_fibre_cycle.unwrap();
        assert_eq!(cycle, alloc::vec![(String::from("q:0,1"), 3), (String::from("q:1,0"), 2)]);

        let (r, _) = model_resolve(&a1(&[1, 1], &[1, 3])).unwrap();
        let mult: Vec<(IntVec, u64)> = enumerate_points(&r)
            .unwrap()
            .into_iter()
            .filter(|x| x.height == 1)
            .map(|x| (x.cone.rays()[0].clone(), x.s.unwrap()))
            .collect();
        let mut mult = mult;
        mult.sort();
        assert_eq!(
            mult,
            alloc::vec![
                (alloc::vec![1, 0], 1),
                (alloc::vec![1, 1], 2),
                (alloc::vec![1, 2], 3),
                (alloc::vec![1, 3], 4)
            ]
        );
    }

    #[test]
    fn a1_is_not_snc() {
        assert!(!is_snc(&enumerate_points(&a1(&[1, 1], &[1, 2])).unwrap()).snc);
    }

    #[test]
    fn consistency_rule() {
        let single = |chi: i64| {
            let mut m = model(alloc::vec![chart("x", &[&[&[1]]], &[3])], alloc::vec![], &[(face(0, &[&[1]]), chi)], 3);
            m.log_smooth_claimed = true;
            m
        };
        let ok = single(0);
        assert!(log_smooth_consistency(&ok, &enumerate_points(&ok).unwrap()).is_ok());
        let bad = single(1);
        let r = log_smooth_consistency(&bad, &enumerate_points(&bad).unwrap());
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].message.contains("vanishing"));

        let mut t = single(0);
        t.chart_cokernel_torsion.insert(face(0, &[&[1]]), 6);
        assert!(!log_smooth_consistency(&t, &enumerate_points(&t).unwrap()).is_ok());
    }

    #[test]
    fn saito_chain_is_consistent() {
        // a multiplicity-2 component meeting two others, p = 2
        let charts = alloc::vec![
            chart("a", &[&[&[1, 0], &[0, 1]]], &[1, 2]),
            chart("b", &[&[&[1, 0], &[0, 1]]], &[2, 1]),
            chart("c", &[&[&[1, 0], &[0, 1]]], &[1, 1]),
        ];
        let gluings = (0..3)
            .map(|i| Gluing {
                chart_a: i,
                face_a: alloc::vec![alloc::vec![0, 1]],
                chart_b: (i + 1) % 3,
                face_b: alloc::vec![alloc::vec![1, 0]],
                map: swap(),
            })
            .collect();
        let mut chi = Vec::new();
        for i in 0..3 {
            chi.push((face(i, &[&[1, 0]]), 0));
            chi.push((face(i, &[&[1, 0], &[0, 1]]), 1));
        }
        let mut m = model(charts, gluings, &chi, 2);
        m.log_smooth_claimed = true;
        assert!(validate(&m).unwrap().is_ok());
        let pts = enumerate_points(&m).unwrap();
        assert!(pts.iter().any(|x| x.s == Some(2)));
        assert!(log_smooth_consistency(&m, &pts).is_ok());
    }
}
