//! Generators for the concrete spaces the experiments run on: hyperbolic
//! half-plane grids, rooted binary trees, decimation nets, and scaled
//! copies, plus the special near-boundary point pairs.

use std::collections::BTreeMap;

use crate::busemann::BoundaryAnchor;
use crate::io::SpaceBundle;
use crate::roughiso::{certify_similarity, rough_isometry, RoughIsometry, RoughSimilarity};
use crate::space::{build_space, GraphSpec, MetricSpace, VertexId};
use crate::{Error, Result};

/// Upper half-plane truncation: columns at multiples of `dx`, rows at
/// heights `2^(k/m)`, hyperbolic edge lengths.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlaneParams {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Row subdivisions per octave: vertical mesh is ln(2)/m in the
    /// hyperbolic metric, independent of height.
    pub m: u32,
}

impl Default for HalfPlaneParams {
    fn default() -> Self {
        HalfPlaneParams {
            x_min: -1.5,
            x_max: 1.5,
            dx: 0.125,
            y_min: 0.125,
            y_max: 8.0,
            m: 16,
        }
    }
}

fn col_name(j: i64, k: i64) -> String {
    format!("c{j}r{k}")
}

/// Hyperbolic distance between two coordinate points of the half-plane,
/// `arcosh(1 + |p-q|^2 / (2 p_y q_y))`.
pub fn hyperbolic_point_dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    (1.0 + (dx * dx + dy * dy) / (2.0 * p[1] * q[1])).acosh()
}

/// Nearest vertex of a coordinates-carrying space to a point, by the
/// hyperbolic point distance; ties break to the smaller index.
pub fn nearest_vertex(space: &MetricSpace, p: [f64; 2]) -> Result<VertexId> {
    let mut best: Option<(f64, VertexId)> = None;
    for v in space.vertices() {
        let c = space.coords(v).ok_or_else(|| Error::BadParameter {
            name: "coords".into(),
            reason: format!("vertex '{}' has no coordinates", space.name(v)),
        })?;
        let d = hyperbolic_point_dist(p, c);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, v));
        }
    }
    Ok(best.expect("space is nonempty").1)
}

/// Builds the half-plane grid with its standard markers: anchor "omega"
/// (the vertical ray at x = 0), descending corner anchors "zeta_L" /
/// "zeta_R", one descending anchor per column for starlikeness scans,
/// the frontier (all vertices on the lowest row), and the base at (0, 1).
pub fn halfplane_grid(params: &HalfPlaneParams) -> Result<SpaceBundle> {
    let p = params;
    if !(p.y_min > 0.0) {
        return Err(Error::BadParameter {
            name: "y_min".into(),
            reason: format!("must be positive, got {}", p.y_min),
        });
    }
    if p.m < 4 {
        return Err(Error::BadParameter {
            name: "m".into(),
            reason: format!("need at least 4 subdivisions per octave, got {}", p.m),
        });
    }
    if p.x_min > -1.5 || p.x_max < 1.5 {
        return Err(Error::BadParameter {
            name: "x_range".into(),
            reason: format!("must cover [-1.5, 1.5], got [{}, {}]", p.x_min, p.x_max),
        });
    }
    if !(p.dx > 0.0) {
        return Err(Error::BadParameter {
            name: "dx".into(),
            reason: "column spacing must be positive".into(),
        });
    }
    if !(p.y_max > p.y_min) || p.y_min > 1.0 || p.y_max < 2.0 {
        return Err(Error::BadParameter {
            name: "y_range".into(),
            reason: format!(
                "need y_min <= 1 < 2 <= y_max for the base and omega anchor, got [{}, {}]",
                p.y_min, p.y_max
            ),
        });
    }

    let m = p.m as f64;
    let j_lo = (p.x_min / p.dx - 1e-9).ceil() as i64;
    let j_hi = (p.x_max / p.dx + 1e-9).floor() as i64;
    let k_lo = (m * p.y_min.log2() - 1e-9).ceil() as i64;
    let k_hi = (m * p.y_max.log2() + 1e-9).floor() as i64;
    let height = |k: i64| ((k as f64) / m).exp2();

    let mut spec = GraphSpec::default();
    for j in j_lo..=j_hi {
        for k in k_lo..=k_hi {
            spec.vertex(col_name(j, k), Some([j as f64 * p.dx, height(k)]));
        }
    }
    for j in j_lo..=j_hi {
        for k in k_lo..=k_hi {
            let y = height(k);
            if j < j_hi {
                // Horizontal edge: Euclidean dx over the midpoint height.
                spec.edge(col_name(j, k), col_name(j + 1, k), p.dx / y);
            }
            if k < k_hi {
                let y2 = height(k + 1);
                spec.edge(col_name(j, k), col_name(j, k + 1), (y2 - y) / (0.5 * (y + y2)));
            }
        }
    }
    let space = build_space(&spec)?;

    let vid = |j: i64, k: i64| space.vertex(&col_name(j, k));
    let base = vid(0, 0)?;
    let mut anchors = BTreeMap::new();
    let omega: Vec<VertexId> = (1..=k_hi).map(|k| vid(0, k)).collect::<Result<_>>()?;
    anchors.insert("omega".to_string(), omega);
    for j in j_lo..=j_hi {
        let down: Vec<VertexId> = (k_lo..=-1)
            .rev()
            .map(|k| vid(j, k))
            .collect::<Result<_>>()?;
        if down.len() >= 2 {
            if j == j_lo {
                anchors.insert("zeta_L".to_string(), down.clone());
            }
            if j == j_hi {
                anchors.insert("zeta_R".to_string(), down.clone());
            }
            anchors.insert(format!("zeta_c{j}"), down);
        }
    }
    let frontier: Vec<VertexId> = (j_lo..=j_hi).map(|j| vid(j, k_lo)).collect::<Result<_>>()?;
    Ok(SpaceBundle {
        space,
        anchors,
        frontier,
        base: Some(base),
    })
}

/// Closed-form frontier tails for half-plane grids: the deformed length
/// of the straight drop from a frontier vertex to the boundary,
/// `int_0^y t^(eps-1) dt = y^eps / eps`.
pub fn halfplane_analytic_tail(
    space: &MetricSpace,
    frontier: &[VertexId],
    epsilon: f64,
) -> Result<Vec<f64>> {
    frontier
        .iter()
        .map(|&f| {
            let c = space.coords(f).ok_or_else(|| Error::BadParameter {
                name: "frontier".into(),
                reason: format!("vertex '{}' has no coordinates", space.name(f)),
            })?;
            Ok(c[1].powf(epsilon) / epsilon)
        })
        .collect()
}

/// The symmetric near-boundary pair at parameter R: both points sit on
/// the unit semicircle at hyperbolic distance R from (0, 1), heading for
/// the boundary points (1, 0) and (-1, 0) respectively.
#[derive(Debug, Clone)]
pub struct SpecialPair {
    pub r: f64,
    pub z: [f64; 2],
    pub w: [f64; 2],
    pub z_vertex: VertexId,
    pub w_vertex: VertexId,
    /// Hyperbolic snap displacements to the chosen grid vertices.
    pub z_snap: f64,
    pub w_snap: f64,
}

/// Computes `z_R = (tanh R, sech R)`, `w_R = (-tanh R, sech R)` and snaps
/// them to the grid.
pub fn special_pair(space: &MetricSpace, r: f64) -> Result<SpecialPair> {
    let z = [r.tanh(), 1.0 / r.cosh()];
    let w = [-z[0], z[1]];
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for v in space.vertices() {
        if let Some(c) = space.coords(v) {
            x_lo = x_lo.min(c[0]);
            x_hi = x_hi.max(c[0]);
            y_lo = y_lo.min(c[1]);
            y_hi = y_hi.max(c[1]);
        }
    }
    for p in [z, w] {
        if p[0] < x_lo || p[0] > x_hi || p[1] < y_lo || p[1] > y_hi {
            return Err(Error::OutsideGrid {
                x: p[0],
                y: p[1],
                x_lo: -1.0,
                x_hi: 1.0,
                y_lo: p[1].min(y_lo),
                y_hi: p[1].max(1.0),
            });
        }
    }
    let z_vertex = nearest_vertex(space, z)?;
    let w_vertex = nearest_vertex(space, w)?;
    Ok(SpecialPair {
        r,
        z,
        w,
        z_vertex,
        w_vertex,
        z_snap: hyperbolic_point_dist(z, space.coords(z_vertex).unwrap()),
        w_snap: hyperbolic_point_dist(w, space.coords(w_vertex).unwrap()),
    })
}

/// Discrete length of the hyperbolic circle of the given radius around a
/// grid vertex: `samples` equally spaced points of the exact circle are
/// snapped to the grid and consecutive snapped vertices are joined by
/// grid shortest paths.
pub fn circle_perimeter(
    space: &MetricSpace,
    center: VertexId,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    let c = space.coords(center).ok_or_else(|| Error::BadParameter {
        name: "center".into(),
        reason: "circle center carries no coordinates".into(),
    })?;
    // Hyperbolic circle = Euclidean circle with lifted center.
    let e_center = [c[0], c[1] * radius.cosh()];
    let e_radius = c[1] * radius.sinh();
    let mut ring: Vec<VertexId> = Vec::with_capacity(samples);
    for i in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * (i as f64) / (samples as f64);
        let p = [
            e_center[0] + e_radius * theta.sin(),
            e_center[1] + e_radius * theta.cos(),
        ];
        let v = nearest_vertex(space, p)?;
        if ring.last() != Some(&v) {
            ring.push(v);
        }
    }
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mut perimeter = 0.0;
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        perimeter += space.dist(a, b);
    }
    Ok(perimeter)
}

/// Rooted binary tree with the anchor along the leftmost branch and the
/// frontier at every other leaf.
pub fn binary_tree(depth: usize, edge_len: f64) -> Result<SpaceBundle> {
    if depth < 2 {
        return Err(Error::BadParameter {
            name: "depth".into(),
            reason: format!("need depth >= 2, got {depth}"),
        });
    }
    if !(edge_len > 0.0) {
        return Err(Error::BadParameter {
            name: "edge_len".into(),
            reason: "edge length must be positive".into(),
        });
    }
    let mut spec = GraphSpec::default();
    spec.vertex("r", None);
    // Breadth-first so vertex order is by depth, then left-to-right.
    let mut level = vec!["r".to_string()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for parent in &level {
            for c in ["0", "1"] {
                let child = format!("{parent}{c}");
                spec.vertex(child.clone(), None);
                spec.edge(parent.clone(), child.clone(), edge_len);
                next.push(child);
            }
        }
        level = next;
    }
    let space = build_space(&spec)?;
    let mut anchors = BTreeMap::new();
    let mut branch = Vec::with_capacity(depth);
    let mut name = "r".to_string();
    for _ in 0..depth {
        name.push('0');
        branch.push(space.vertex(&name)?);
    }
    let anchor_leaf = name;
    anchors.insert("omega".to_string(), branch);
    let mut frontier = Vec::new();
    for leaf in &level {
        if *leaf != anchor_leaf {
            frontier.push(space.vertex(leaf)?);
            // Escaping sequence down the branch to this leaf.
            let seq: Vec<VertexId> = (2..=leaf.len())
                .map(|end| space.vertex(&leaf[..end]))
                .collect::<Result<_>>()?;
            anchors.insert(format!("zeta_{leaf}"), seq);
        }
    }
    Ok(SpaceBundle {
        base: Some(space.vertex("r")?),
        space,
        anchors,
        frontier,
    })
}

/// Maps each fine vertex to its nearest coarse vertex in the coordinate
/// metric (ties to the smaller index) and certifies the result.
pub fn net_map(fine: &MetricSpace, coarse: &MetricSpace) -> Result<RoughIsometry> {
    let coarse_pts: Vec<[f64; 2]> = coarse
        .vertices()
        .map(|v| {
            coarse.coords(v).ok_or_else(|| Error::BadParameter {
                name: "coarse".into(),
                reason: format!("vertex '{}' has no coordinates", coarse.name(v)),
            })
        })
        .collect::<Result<_>>()?;
    let map: Vec<VertexId> = fine
        .vertices()
        .map(|v| {
            let c = fine.coords(v).ok_or_else(|| Error::BadParameter {
                name: "fine".into(),
                reason: format!("vertex '{}' has no coordinates", fine.name(v)),
            })?;
            let mut best = (f64::INFINITY, 0usize);
            for (i, q) in coarse_pts.iter().enumerate() {
                let d2 = (c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2);
                if d2 < best.0 {
                    best = (d2, i);
                }
            }
            Ok(VertexId(best.1))
        })
        .collect::<Result<_>>()?;
    Ok(rough_isometry(map, fine, coarse))
}

/// Scales every edge (and the distance matrix) by `kappa`; the identity
/// vertex map from the original is certified as a `(kappa, 0)`-rough
/// similarity. Shortest paths are structure-identical, so the matrix is
/// scaled directly rather than recomputed.
pub fn scaled_space(space: &MetricSpace, kappa: f64) -> Result<(MetricSpace, RoughSimilarity)> {
    if !(kappa > 0.0) {
        return Err(Error::BadParameter {
            name: "kappa".into(),
            reason: format!("scale must be positive, got {kappa}"),
        });
    }
    let scaled = space.scaled(kappa);
    let map: Vec<VertexId> = space.vertices().collect();
    let sim = certify_similarity(&map, space, &scaled, kappa);
    Ok((scaled, sim))
}

/// The omega anchor of a bundle as a [`BoundaryAnchor`] value.
pub fn bundle_anchor(bundle: &SpaceBundle, name: &str) -> Result<BoundaryAnchor> {
    let seq = bundle.anchor(name)?.to_vec();
    let base = bundle.base.ok_or_else(|| Error::BadParameter {
        name: "base".into(),
        reason: "bundle has no base point".into(),
    })?;
    Ok(BoundaryAnchor::new(name, base, seq))
}
