//! Shared plumbing between the CLI verbs and the experiment drivers.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use gromuni_core::busemann::{busemann_field, BoundaryAnchor, BusemannField};
use gromuni_core::hyperbolicity::{delta_four_point, DeltaMode, DEFAULT_EXACT_CAP};
use gromuni_core::io::SpaceBundle;
use gromuni_core::models::halfplane_analytic_tail;
use gromuni_core::roughiso::{rough_isometry, RoughIsometry};
use gromuni_core::uniformize::{deform, make_density, DeformedSpace, TailRule};
use gromuni_core::MetricSpace;

/// Hyperbolicity constant used for half-plane grids: the continuum
/// constant ln(3) widened by twice the mesh (the largest edge length).
pub fn grid_delta(space: &MetricSpace) -> f64 {
    3.0_f64.ln() + 2.0 * space.max_edge_len()
}

/// Resolves the delta parameter for a generic graph: explicit value if
/// given, exact four-point scan when feasible, otherwise a seeded
/// sampled lower bound (labeled by the caller).
pub fn resolve_delta(space: &MetricSpace, explicit: Option<f64>, seed: u64) -> (f64, String) {
    if let Some(d) = explicit {
        return (d, "explicit".into());
    }
    if space.vertex_count() <= DEFAULT_EXACT_CAP {
        let report = delta_four_point(space, DeltaMode::exact()).expect("within cap");
        (report.delta, "exact".into())
    } else {
        let report = delta_four_point(
            space,
            DeltaMode::Sampled { count: 20_000, seed },
        )
        .expect("count >= 1");
        (report.delta, format!("sampled(20000,seed={seed})"))
    }
}

pub fn anchor_from_bundle(
    bundle: &SpaceBundle,
    name: &str,
    base_override: Option<&str>,
) -> anyhow::Result<BoundaryAnchor> {
    let seq = bundle.anchor(name)?.to_vec();
    let base = match base_override {
        Some(id) => bundle.space.vertex(id)?,
        None => match bundle.base {
            Some(b) => b,
            None => bail!("graph file has no base point and no --base was given"),
        },
    };
    Ok(BoundaryAnchor::new(name, base, seq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    Geometric,
    Analytic,
}

impl std::str::FromStr for TailKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<TailKind> {
        match s {
            "geometric" => Ok(TailKind::Geometric),
            "analytic" => Ok(TailKind::Analytic),
            other => bail!("unknown tail rule '{other}' (use analytic|geometric)"),
        }
    }
}

pub fn build_field(
    bundle: &SpaceBundle,
    anchor_name: &str,
    base_override: Option<&str>,
    delta: f64,
) -> anyhow::Result<BusemannField> {
    let anchor = anchor_from_bundle(bundle, anchor_name, base_override)?;
    Ok(busemann_field(&bundle.space, &anchor, delta, None)?)
}

pub fn build_deformed(
    bundle: &SpaceBundle,
    field: &BusemannField,
    epsilon: f64,
    tail: TailKind,
) -> anyhow::Result<DeformedSpace> {
    let density = make_density(&bundle.space, field, epsilon)?;
    let rule = match tail {
        TailKind::Geometric => TailRule::Geometric,
        TailKind::Analytic => TailRule::Analytic(halfplane_analytic_tail(
            &bundle.space,
            &bundle.frontier,
            epsilon,
        )?),
    };
    Ok(deform(&bundle.space, &density, &bundle.frontier, &rule)?)
}

/// Map file schema: `{"source": path, "target": path, "map": {src: dst}}`.
/// Graph paths resolve relative to the map file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, String>,
}

pub struct LoadedMap {
    pub source: SpaceBundle,
    pub target: SpaceBundle,
    pub iso: RoughIsometry,
}

pub fn load_map(path: &Path) -> anyhow::Result<LoadedMap> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading map file {}", path.display()))?;
    let file: MapFile = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            dir.join(pb)
        }
    };
    let source = SpaceBundle::load(resolve(&file.source))?;
    let target = SpaceBundle::load(resolve(&file.target))?;
    let mut map = Vec::with_capacity(source.space.vertex_count());
    for v in source.space.vertices() {
        let name = source.space.name(v);
        let dst = file
            .map
            .get(name)
            .with_context(|| format!("map file lacks an image for source vertex '{name}'"))?;
        map.push(target.space.vertex(dst)?);
    }
    let iso = rough_isometry(map, &source.space, &target.space);
    Ok(LoadedMap { source, target, iso })
}

pub fn save_map(
    path: &Path,
    source_path: &str,
    target_path: &str,
    source: &SpaceBundle,
    target: &SpaceBundle,
    iso: &RoughIsometry,
) -> anyhow::Result<()> {
    let map: BTreeMap<String, String> = source
        .space
        .vertices()
        .map(|v| {
            (
                source.space.name(v).to_string(),
                target.space.name(iso.image(v)).to_string(),
            )
        })
        .collect();
    let file = MapFile {
        source: source_path.to_string(),
        target: target_path.to_string(),
        map,
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes a JSON value (pretty, trailing newline) to a file, or stdout
/// when no path is given.
pub fn emit_json(value: &impl Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
