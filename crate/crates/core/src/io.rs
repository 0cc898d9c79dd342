//! Graph file schema and loading.
//!
//! All file I/O is UTF-8 JSON with the shape
//! `{"vertices":[{"id","x","y"}],"edges":[{"u","v","len"}],
//!   "anchors":{name:[ids...]},"frontier":[ids...],"base":id}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::space::{build_space, GraphSpec, MetricSpace, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub len: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub anchors: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frontier: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

/// A metric space plus the marked structure a graph file carries: named
/// boundary anchors, the frontier escape set, and the base point.
#[derive(Debug, Clone)]
pub struct SpaceBundle {
    pub space: MetricSpace,
    pub anchors: BTreeMap<String, Vec<VertexId>>,
    pub frontier: Vec<VertexId>,
    pub base: Option<VertexId>,
}

impl SpaceBundle {
    pub fn from_file(file: &GraphFile) -> Result<SpaceBundle> {
        let mut spec = GraphSpec::default();
        for v in &file.vertices {
            let coords = match (v.x, v.y) {
                (Some(x), Some(y)) => Some([x, y]),
                _ => None,
            };
            spec.vertex(v.id.clone(), coords);
        }
        for e in &file.edges {
            spec.edge(e.u.clone(), e.v.clone(), e.len);
        }
        let space = build_space(&spec)?;
        let mut anchors = BTreeMap::new();
        for (name, ids) in &file.anchors {
            let seq: Result<Vec<VertexId>> = ids.iter().map(|id| space.vertex(id)).collect();
            anchors.insert(name.clone(), seq?);
        }
        let frontier: Result<Vec<VertexId>> =
            file.frontier.iter().map(|id| space.vertex(id)).collect();
        let base = match &file.base {
            Some(id) => Some(space.vertex(id)?),
            None => None,
        };
        Ok(SpaceBundle {
            space,
            anchors,
            frontier: frontier?,
            base,
        })
    }

    pub fn to_file(&self) -> GraphFile {
        let space = &self.space;
        GraphFile {
            vertices: space
                .vertices()
                .map(|v| {
                    let c = space.coords(v);
                    VertexRecord {
                        id: space.name(v).to_string(),
                        x: c.map(|c| c[0]),
                        y: c.map(|c| c[1]),
                    }
                })
                .collect(),
            edges: space
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: space.name(VertexId(e.u)).to_string(),
                    v: space.name(VertexId(e.v)).to_string(),
                    len: e.len,
                })
                .collect(),
            anchors: self
                .anchors
                .iter()
                .map(|(name, seq)| {
                    (
                        name.clone(),
                        seq.iter().map(|&v| space.name(v).to_string()).collect(),
                    )
                })
                .collect(),
            frontier: self
                .frontier
                .iter()
                .map(|&v| space.name(v).to_string())
                .collect(),
            base: self.base.map(|v| space.name(v).to_string()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SpaceBundle> {
        let text = std::fs::read_to_string(path)?;
        let file: GraphFile = serde_json::from_str(&text)?;
        SpaceBundle::from_file(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = self.to_file();
        let mut text = serde_json::to_string(&file)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn anchor(&self, name: &str) -> Result<&[VertexId]> {
        self.anchors
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownAnchor { name: name.into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_json() {
        let file = GraphFile {
            vertices: vec![
                VertexRecord { id: "a".into(), x: Some(0.0), y: Some(1.0) },
                VertexRecord { id: "b".into(), x: None, y: None },
            ],
            edges: vec![EdgeRecord { u: "a".into(), v: "b".into(), len: 2.5 }],
            anchors: BTreeMap::from([("up".to_string(), vec!["a".to_string(), "b".to_string()])]),
            frontier: vec!["b".into()],
            base: Some("a".into()),
        };
        let bundle = SpaceBundle::from_file(&file).unwrap();
        assert_eq!(bundle.space.vertex_count(), 2);
        assert_eq!(bundle.frontier.len(), 1);
        let back = bundle.to_file();
        let a = serde_json::to_string(&file).unwrap();
        let b = serde_json::to_string(&back).unwrap();
        assert_eq!(a, b);
    }
}
