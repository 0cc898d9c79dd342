//! Empirical uniformity constants for deformed spaces (quasiconvexity
//! and the double-cone condition over explicit curve families) and rough
//! starlikeness estimates.
//!
//! The reported `A` is a certified lower bound on the true uniformity
//! constant restricted to the sampled pairs, and an upper-bound proxy via
//! the enabled curve families; the exact constant quantifies over all
//! rectifiable curves, which is not searchable.

use rayon::prelude::*;
use serde::Serialize;

use crate::busemann::BoundaryAnchor;
use crate::space::{sample_pairs, Curve, MetricSpace, PairSampler, VertexId};
use crate::uniformize::DeformedSpace;
use crate::{Error, Result};

pub const LEVEL_STEP: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveFamily {
    /// Geodesics of the deformed metric: quasiconvex ratio 1 by
    /// construction, so their badness is the worst cone ratio.
    DeformedGeodesic,
    /// Geodesics of the base metric.
    BaseGeodesic,
    /// Ascend toward the anchor to a Busemann level, traverse, descend;
    /// levels sweep a logarithmic grid (step ln 2).
    Tent,
}

pub const ALL_FAMILIES: [CurveFamily; 3] = [
    CurveFamily::DeformedGeodesic,
    CurveFamily::BaseGeodesic,
    CurveFamily::Tent,
];

#[derive(Debug, Clone, Serialize)]
pub struct PairBadness {
    pub pair: (usize, usize),
    pub quasiconvex_ratio: f64,
    pub cone_ratio: f64,
    pub badness: f64,
    pub curve_family_used: CurveFamily,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub epsilon: f64,
    pub pairs_tested: usize,
    /// Max over pairs of the best curve badness.
    pub a_estimate: f64,
    pub worst_pair: (usize, usize),
    pub per_pair: Vec<PairBadness>,
    /// Pairs whose deformed distance collapsed below resolution
    /// (merged boundary directions); skipped and counted.
    pub skipped_collapsed: usize,
    pub families: Vec<CurveFamily>,
}

/// Quasiconvexity and double-cone ratios of one curve in the deformed
/// space: `l_eps(curve) / dist_eps(endpoints)` and the worst
/// `min(arm, arm) / delta_eps(z)` over the curve's vertices (endpoint
/// arms are zero, so interior vertices decide).
pub fn curve_badness(deformed: &DeformedSpace, curve: &Curve) -> Result<(f64, f64)> {
    let (x, y) = (curve.start(), curve.end());
    let scale = deformed.dist_scale;
    let d = deformed.dist(x, y);
    if d <= 1e-12 * (1.0 + scale) {
        return Err(Error::CollapsedPair {
            u: format!("{x}"),
            v: format!("{y}"),
        });
    }
    let cum = curve.cum_in(&deformed.edge_eps);
    let total = *cum.last().unwrap();
    let quasiconvex = total / d;
    let mut cone: f64 = 0.0;
    for (k, &v) in curve.vertices().iter().enumerate() {
        let arm = cum[k].min(total - cum[k]);
        cone = cone.max(arm / deformed.delta_eps(v));
    }
    Ok((quasiconvex, cone))
}

fn badness_of(deformed: &DeformedSpace, curve: &Curve) -> Result<(f64, f64, f64)> {
    let (qc, cone) = curve_badness(deformed, curve)?;
    Ok((qc, cone, qc.max(cone)))
}

/// Tent curve for a pair at one Busemann level: base-geodesic ascent from
/// each endpoint toward the anchor's deepest vertex, truncated at the
/// level, joined by a base geodesic.
fn tent_curve(
    space: &MetricSpace,
    deformed: &DeformedSpace,
    anchor: &BoundaryAnchor,
    x: VertexId,
    y: VertexId,
    level: f64,
) -> Result<Curve> {
    let b = |v: VertexId| deformed.density.busemann[v.0];
    let base_w: Vec<f64> = space.edges().iter().map(|e| e.len).collect();
    let deep = anchor.deepest();
    let up_x = space.geodesic(x, deep).take_until(&base_w, |v| b(v) <= level);
    let up_y = space.geodesic(y, deep).take_until(&base_w, |v| b(v) <= level);
    let across = space.geodesic(up_x.end(), up_y.end());
    up_x.concat(&across, &base_w)?.concat(&up_y.reversed(&base_w), &base_w)
}

/// Estimates the uniformity constant over sampled pairs and the enabled
/// curve families: per pair the badness is the min over families of
/// `max(quasiconvex, cone)`, and `A` is the max over pairs.
pub fn estimate_uniformity(
    space: &MetricSpace,
    deformed: &DeformedSpace,
    sampler: &PairSampler,
    families: &[CurveFamily],
) -> Result<UniformityReport> {
    if families.is_empty() {
        return Err(Error::BadParameter {
            name: "families".into(),
            reason: "at least one curve family must be enabled".into(),
        });
    }
    let anchor = &deformed.density.anchor;
    let pairs = sample_pairs(space, sampler);
    let scale = deformed.dist_scale;

    let results: Vec<Option<PairBadness>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            if x == y || deformed.dist(x, y) <= 1e-12 * (1.0 + scale) {
                return None;
            }
            let mut best: Option<PairBadness> = None;
            let mut consider = |qc: f64, cone: f64, family: CurveFamily| {
                let badness = qc.max(cone);
                if best.as_ref().map_or(true, |b| badness < b.badness) {
                    best = Some(PairBadness {
                        pair: (x.0, y.0),
                        quasiconvex_ratio: qc,
                        cone_ratio: cone,
                        badness,
                        curve_family_used: family,
                    });
                }
            };
            for family in families {
                match family {
                    CurveFamily::DeformedGeodesic => {
                        let curve =
                            space.geodesic_deformed(x, y, &deformed.edge_eps, &deformed.dist_eps);
                        if let Ok((qc, cone, _)) = badness_of(deformed, &curve) {
                            consider(qc, cone, CurveFamily::DeformedGeodesic);
                        }
                    }
                    CurveFamily::BaseGeodesic => {
                        let curve = space.geodesic(x, y);
                        if let Ok((qc, cone, _)) = badness_of(deformed, &curve) {
                            consider(qc, cone, CurveFamily::BaseGeodesic);
                        }
                    }
                    CurveFamily::Tent => {
                        let b = &deformed.density.busemann;
                        let start = b[x.0].min(b[y.0]);
                        let floor = b.iter().cloned().fold(f64::INFINITY, f64::min);
                        let mut level = start;
                        loop {
                            if let Ok(curve) = tent_curve(space, deformed, anchor, x, y, level) {
                                if let Ok((qc, cone, _)) = badness_of(deformed, &curve) {
                                    consider(qc, cone, CurveFamily::Tent);
                                }
                            }
                            if level <= floor {
                                break;
                            }
                            level -= LEVEL_STEP;
                        }
                    }
                }
            }
            best
        })
        .collect();

    let mut per_pair = Vec::new();
    let mut skipped = 0usize;
    for r in results {
        match r {
            Some(p) => per_pair.push(p),
            None => skipped += 1,
        }
    }
    let mut a_estimate: f64 = 1.0;
    let mut worst_pair = (0usize, 0usize);
    for p in &per_pair {
        if p.badness > a_estimate {
            a_estimate = p.badness;
            worst_pair = p.pair;
        }
    }
    Ok(UniformityReport {
        epsilon: deformed.density.epsilon,
        pairs_tested: per_pair.len(),
        a_estimate,
        worst_pair,
        per_pair,
        skipped_collapsed: skipped,
        families: families.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StarlikeReport {
    /// Max over vertices of the base distance to the nearest constructed
    /// ray.
    pub k_estimate: f64,
    pub worst_vertex: usize,
    /// (base anchor, other anchor) names of the rays used.
    pub ray_family: Vec<(String, String)>,
}

/// Rough starlikeness: rays are base geodesics between the deep
/// representative of the base anchor and each other anchor's deep
/// representative; `K` is the worst distance from a vertex to its
/// nearest ray.
pub fn estimate_starlike(
    space: &MetricSpace,
    base_anchor: &BoundaryAnchor,
    others: &[BoundaryAnchor],
) -> Result<StarlikeReport> {
    if others.is_empty() {
        return Err(Error::TooFewAnchors { needed: 2, got: 1 });
    }
    let rays: Vec<Curve> = others
        .iter()
        .map(|z| space.geodesic(base_anchor.deepest(), z.deepest()))
        .collect();
    let mut k_estimate: f64 = 0.0;
    let mut worst_vertex = 0usize;
    for v in space.vertices() {
        let mut nearest = f64::INFINITY;
        for ray in &rays {
            for &rv in ray.vertices() {
                nearest = nearest.min(space.dist(v, rv));
            }
        }
        if nearest > k_estimate {
            k_estimate = nearest;
            worst_vertex = v.0;
        }
    }
    Ok(StarlikeReport {
        k_estimate,
        worst_vertex,
        ray_family: others
            .iter()
            .map(|z| (base_anchor.name.clone(), z.name.clone()))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::busemann::busemann_field;
    use crate::space::{build_space, GraphSpec};
    use crate::uniformize::{deform, make_density, TailRule};

    /// Rooted binary tree of the given depth with unit edges; anchor along
    /// the leftmost branch, frontier at the other leaves.
    fn tree_setup(depth: usize) -> (MetricSpace, BoundaryAnchor, Vec<VertexId>) {
        let mut spec = GraphSpec::default();
        spec.vertex("r", None);
        let mut frontier = Vec::new();
        fn grow(spec: &mut GraphSpec, name: String, depth: usize, leaves: &mut Vec<String>) {
            if depth == 0 {
                leaves.push(name);
                return;
            }
            for c in ["0", "1"] {
                let child = format!("{name}{c}");
                spec.vertex(child.clone(), None);
                spec.edge(name.clone(), child.clone(), 1.0);
                grow(spec, child, depth - 1, leaves);
            }
        }
        let mut leaves = Vec::new();
        grow(&mut spec, "r".into(), depth, &mut leaves);
        let s = build_space(&spec).unwrap();
        let mut seq = Vec::new();
        let mut name = "r".to_string();
        for _ in 0..depth {
            name.push('0');
            seq.push(s.vertex(&name).unwrap());
        }
        let anchor = BoundaryAnchor::new("omega", s.vertex("r").unwrap(), seq);
        for leaf in leaves {
            if leaf != name {
                frontier.push(s.vertex(&leaf).unwrap());
            }
        }
        (s, anchor, frontier)
    }

    fn tree_deformed(depth: usize, eps: f64) -> (MetricSpace, DeformedSpace) {
        let (s, anchor, frontier) = tree_setup(depth);
        let field = busemann_field(&s, &anchor, 0.0, None).unwrap();
        let density = make_density(&s, &field, eps).unwrap();
        let def = deform(&s, &density, &frontier, &TailRule::Geometric).unwrap();
        (s, def)
    }

    #[test]
    fn deformed_geodesic_has_unit_quasiconvexity() {
        let (s, def) = tree_deformed(4, 0.5);
        let pairs = sample_pairs(&s, &PairSampler::Seeded { count: 40, seed: 7 });
        for (x, y) in pairs {
            if x == y {
                continue;
            }
            let curve = s.geodesic_deformed(x, y, &def.edge_eps, &def.dist_eps);
            let (qc, _) = curve_badness(&def, &curve).unwrap();
            assert!((qc - 1.0).abs() < 1e-9, "qc = {qc}");
        }
    }

    #[test]
    fn deformed_geodesic_family_reduces_to_cone() {
        let (s, def) = tree_deformed(4, 0.5);
        let report = estimate_uniformity(
            &s,
            &def,
            &PairSampler::All,
            &[CurveFamily::DeformedGeodesic],
        )
        .unwrap();
        let worst_cone = report
            .per_pair
            .iter()
            .map(|p| p.cone_ratio)
            .fold(1.0_f64, f64::max);
        assert!((report.a_estimate - worst_cone).abs() < 1e-9);
    }

    #[test]
    fn adding_families_never_increases_a() {
        let (s, def) = tree_deformed(4, 0.5);
        let sampler = PairSampler::Seeded { count: 30, seed: 3 };
        let a_one = estimate_uniformity(&s, &def, &sampler, &[CurveFamily::DeformedGeodesic])
            .unwrap()
            .a_estimate;
        let a_all = estimate_uniformity(&s, &def, &sampler, &ALL_FAMILIES)
            .unwrap()
            .a_estimate;
        assert!(a_all <= a_one + 1e-12);
    }

    #[test]
    fn all_pairs_dominate_subsets() {
        let (s, def) = tree_deformed(4, 0.5);
        let a_all = estimate_uniformity(&s, &def, &PairSampler::All, &[CurveFamily::DeformedGeodesic])
            .unwrap()
            .a_estimate;
        let a_sub = estimate_uniformity(
            &s,
            &def,
            &PairSampler::Seeded { count: 25, seed: 11 },
            &[CurveFamily::DeformedGeodesic],
        )
        .unwrap()
        .a_estimate;
        assert!(a_sub <= a_all + 1e-12);
    }

    #[test]
    fn single_edge_curve_cone_is_trivial() {
        let (s, def) = tree_deformed(3, 1.0);
        let r = s.vertex("r").unwrap();
        let c = s.vertex("r0").unwrap();
        let curve = Curve::from_vertex_path(&s, vec![r, c]).unwrap();
        let (_, cone) = curve_badness(&def, &curve).unwrap();
        assert_eq!(cone, 0.0);
    }

    #[test]
    fn starlike_zero_on_trees_with_all_leaf_rays() {
        let (s, anchor, _) = tree_setup(4);
        let mut others = Vec::new();
        for v in s.vertices() {
            let name = s.name(v);
            // Leaves are names of full depth; skip the anchor branch leaf.
            if name.len() == 5 && name != "r0000" {
                others.push(BoundaryAnchor::new(
                    format!("zeta_{name}"),
                    anchor.base,
                    vec![s.vertex(&name[..4]).unwrap(), v],
                ));
            }
        }
        let report = estimate_starlike(&s, &anchor, &others).unwrap();
        assert_eq!(report.k_estimate, 0.0);
    }

    #[test]
    fn starlike_needs_two_anchors() {
        let (s, anchor, _) = tree_setup(3);
        assert!(matches!(
            estimate_starlike(&s, &anchor, &[]),
            Err(Error::TooFewAnchors { .. })
        ));
    }

    #[test]
    fn estimate_requires_a_family() {
        let (s, def) = tree_deformed(3, 1.0);
        assert!(estimate_uniformity(&s, &def, &PairSampler::All, &[]).is_err());
    }
}
