//! JSON model files.
//!
//! Faces are written as sorted lists of indices into the chart's ray table,
//! which is the order in which rays first appear in `maximal_cones`.

use std::collections::BTreeMap;
use std::path::Path;

use logtrace_core::fan::{Chart, DecoratedModel, FaceRef, Gluing};
use logtrace_core::IntVec;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed model: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] logtrace_core::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub residue_char: u64,
    pub log_smooth_claimed: bool,
    pub charts: Vec<ChartFile>,
    #[serde(default)]
    pub gluings: Vec<GluingFile>,
    #[serde(default)]
    pub chi: Vec<Decoration>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chart_cokernel_torsion: Vec<Decoration>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    pub id: String,
    pub rank: usize,
    pub maximal_cones: Vec<Vec<IntVec>>,
    pub e: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingFile {
    pub chart_a: String,
    pub face_a: Vec<usize>,
    pub chart_b: String,
    pub face_b: Vec<usize>,
    pub map: Vec<IntVec>,
}

/// `point` is `[chart id, face indices]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decoration {
    pub point: (String, Vec<usize>),
    pub value: i64,
}

/// Rays in order of first appearance.
pub fn ray_table(cones: &[Vec<IntVec>]) -> Vec<IntVec> {
    let mut table: Vec<IntVec> = Vec::new();
    for r in cones.iter().flatten() {
        if !table.contains(r) {
            table.push(r.clone());
        }
    }
    table
}

struct Tables {
    ids: BTreeMap<String, usize>,
    rays: Vec<Vec<IntVec>>,
}

impl Tables {
    fn chart(&self, id: &str) -> Result<usize, ModelError> {
        self.ids
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::Format(format!("unknown chart id {id:?}")))
    }

    fn face(&self, chart: usize, indices: &[usize]) -> Result<FaceRef, ModelError> {
        let table = &self.rays[chart];
        let rays = indices
            .iter()
            .map(|&i| {
                table
                    .get(i)
                    .cloned()
                    .ok_or_else(|| ModelError::Format(format!("ray index {i} out of range for chart {chart}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rays.is_empty() {
            return Err(ModelError::Format("faces must have at least one ray".into()));
        }
        Ok(FaceRef::new(chart, rays))
    }

    fn indices(&self, face: &FaceRef) -> Vec<usize> {
        let table = &self.rays[face.chart];
        let mut idx: Vec<usize> = face
            .rays
            .iter()
            .map(|r| table.iter().position(|t| t == r).expect("face rays are chart rays"))
            .collect();
        idx.sort_unstable();
        idx
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files serialize")
    }

    pub fn into_model(&self) -> Result<DecoratedModel, ModelError> {
        let mut ids = BTreeMap::new();
        let mut charts = Vec::new();
        let mut rays = Vec::new();
        for (i, c) in self.charts.iter().enumerate() {
            if ids.insert(c.id.clone(), i).is_some() {
                return Err(ModelError::Format(format!("duplicate chart id {:?}", c.id)));
            }
            charts.push(Chart::new(c.id.clone(), c.rank, &c.maximal_cones, c.e.clone())?);
            rays.push(ray_table(&c.maximal_cones));
        }
        let t = Tables { ids, rays };
        let gluings = self
            .gluings
            .iter()
            .map(|g| {
                let a = t.chart(&g.chart_a)?;
                let b = t.chart(&g.chart_b)?;
                Ok(Gluing {
                    chart_a: a,
                    face_a: t.face(a, &g.face_a)?.rays,
                    chart_b: b,
                    face_b: t.face(b, &g.face_b)?.rays,
                    map: g.map.clone(),
                })
            })
            .collect::<Result<_, ModelError>>()?;
        let mut chi = BTreeMap::new();
        for d in &self.chi {
            let c = t.chart(&d.point.0)?;
            let f = t.face(c, &d.point.1)?;
            if let Some(old) = chi.insert(f, d.value) {
                if old != d.value {
                    return Err(ModelError::Format(format!("chi given twice for {:?}", d.point)));
                }
            }
        }
        let mut torsion = BTreeMap::new();
        for d in &self.chart_cokernel_torsion {
            let c = t.chart(&d.point.0)?;
            if d.value <= 0 {
                return Err(ModelError::Format(format!("cokernel torsion at {:?} must be positive", d.point)));
            }
            torsion.insert(t.face(c, &d.point.1)?, d.value as u64);
        }
        Ok(DecoratedModel {
            residue_char: self.residue_char,
            log_smooth_claimed: self.log_smooth_claimed,
            charts,
            gluings,
            chi,
            chart_cokernel_torsion: torsion,
        })
    }

    pub fn from_model(model: &DecoratedModel) -> Self {
        let charts: Vec<ChartFile> = model
            .charts
            .iter()
            .map(|c| ChartFile {
                id: c.id().to_string(),
                rank: c.rank(),
                maximal_cones: c.declared_cones().to_vec(),
                e: c.e().to_vec(),
            })
            .collect();
        let t = Tables {
            ids: BTreeMap::new(),
            rays: charts.iter().map(|c| ray_table(&c.maximal_cones)).collect(),
        };
        let id = |i: usize| model.charts[i].id().to_string();
        let gluings = model
            .gluings
            .iter()
            .map(|g| GluingFile {
                chart_a: id(g.chart_a),
                face_a: t.indices(&FaceRef::new(g.chart_a, g.face_a.clone())),
                chart_b: id(g.chart_b),
                face_b: t.indices(&FaceRef::new(g.chart_b, g.face_b.clone())),
                map: g.map.clone(),
            })
            .collect();
        let decorate = |f: &FaceRef, value: i64| Decoration {
            point: (id(f.chart), t.indices(f)),
            value,
        };
        ModelFile {
            residue_char: model.residue_char,
            log_smooth_claimed: model.log_smooth_claimed,
            charts,
            gluings,
            chi: model.chi.iter().map(|(f, &v)| decorate(f, v)).collect(),
            chart_cokernel_torsion: model
                .chart_cokernel_torsion
                .iter()
                .map(|(f, &v)| decorate(f, v as i64))
                .collect(),
        }
    }
}

/// Parses `"0,2"` into face indices.
pub fn parse_indices(text: &str) -> Result<Vec<usize>, ModelError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| ModelError::Format(format!("bad face index {s:?}")))
        })
        .collect()
}

/// Parses `"1,-2,3"` into a vector.
pub fn parse_vector(text: &str) -> Result<IntVec, ModelError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| ModelError::Format(format!("bad vector entry {s:?}")))
        })
        .collect()
}

/// The face of `chart` with the given file indices.
pub fn face_by_indices(model: &DecoratedModel, chart: &str, indices: &[usize]) -> Result<FaceRef, ModelError> {
    let c = model
        .chart_index(chart)
        .ok_or_else(|| ModelError::Format(format!("unknown chart id {chart:?}")))?;
    let t = Tables {
        ids: BTreeMap::new(),
        rays: model.charts.iter().map(|c| ray_table(c.declared_cones())).collect(),
    };
    t.face(c, indices)
}
