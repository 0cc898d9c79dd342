//! Rough isometries between finite spaces: certification of the additive
//! distortion and density constants, quasi-inverses, anchor transport,
//! and the comparability suites for Busemann fields and deformed metrics.

use rayon::prelude::*;
use serde::Serialize;

use crate::busemann::{verify_anchor, BoundaryAnchor, BusemannField};
use crate::space::{sample_pairs, MetricSpace, PairSampler, VertexId};
use crate::uniformize::DeformedSpace;
use crate::{Error, Result};

/// A vertex map `source -> target` with certified constants: additive
/// distortion `lambda` (both sides of the distance comparison) and
/// density radius `tau` (every target vertex is within `tau` of the
/// image).
#[derive(Debug, Clone)]
pub struct RoughIsometry {
    pub map: Vec<VertexId>,
    pub lambda: f64,
    pub tau: f64,
}

impl RoughIsometry {
    #[inline]
    pub fn image(&self, y: VertexId) -> VertexId {
        self.map[y.0]
    }
}

/// A rough similarity: multiplicative scale `kappa` on top of the
/// additive distortion.
#[derive(Debug, Clone)]
pub struct RoughSimilarity {
    pub map: Vec<VertexId>,
    pub kappa: f64,
    pub tau: f64,
}

/// Computes the smallest certified constants for a total vertex map:
/// `lambda_min = max |d_X(phi a, phi b) - d_Y(a, b)|` over source pairs
/// and `tau_min = max_x min_y d_X(x, phi y)`. Both are exact maxima, not
/// asserted bounds.
pub fn certify(map: &[VertexId], source: &MetricSpace, target: &MetricSpace) -> (f64, f64) {
    let n = source.vertex_count();
    assert_eq!(map.len(), n, "map must be total on the source");
    let lambda = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            for b in (a + 1)..n {
                let d_src = source.dist(VertexId(a), VertexId(b));
                let d_dst = target.dist(map[a], map[b]);
                worst = worst.max((d_dst - d_src).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let tau = target
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            map.iter()
                .map(|&fy| target.dist(x, fy))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    (lambda, tau)
}

/// Certifies a map as a rough similarity with the given scale:
/// `tau_min = max |d_X(phi a, phi b) - kappa * d_Y(a, b)|`, combined with
/// the density radius.
pub fn certify_similarity(
    map: &[VertexId],
    source: &MetricSpace,
    target: &MetricSpace,
    kappa: f64,
) -> RoughSimilarity {
    let n = source.vertex_count();
    let distortion = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut worst: f64 = 0.0;
            for b in (a + 1)..n {
                let d_src = source.dist(VertexId(a), VertexId(b));
                let d_dst = target.dist(map[a], map[b]);
                worst = worst.max((d_dst - kappa * d_src).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let density = target
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            map.iter()
                .map(|&fy| target.dist(x, fy))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    RoughSimilarity {
        map: map.to_vec(),
        kappa,
        tau: distortion.max(density),
    }
}

pub fn rough_isometry(map: Vec<VertexId>, source: &MetricSpace, target: &MetricSpace) -> RoughIsometry {
    let (lambda, tau) = certify(&map, source, target);
    RoughIsometry { map, lambda, tau }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiInverseReport {
    /// max over y of d_Y(y, inv(phi(y))) and its `2*lambda` reference.
    pub roundtrip_source: f64,
    pub roundtrip_source_bound: f64,
    /// max over x of d_X(x, phi(inv(x))) and its `lambda` reference.
    pub roundtrip_target: f64,
    pub roundtrip_target_bound: f64,
}

/// Builds the quasi-inverse `inv(x) = argmin_y d_X(x, phi(y))` (smallest
/// source index on ties), certifies it, and reports both round-trip
/// displacements against their stated references.
pub fn quasi_inverse(
    iso: &RoughIsometry,
    source: &MetricSpace,
    target: &MetricSpace,
) -> (RoughIsometry, QuasiInverseReport) {
    let inv_map: Vec<VertexId> = target
        .vertices()
        .map(|x| {
            let mut best = (f64::INFINITY, VertexId(usize::MAX));
            for (y, &fy) in iso.map.iter().enumerate() {
                let d = target.dist(x, fy);
                if d < best.0 {
                    best = (d, VertexId(y));
                }
            }
            best.1
        })
        .collect();
    let (lambda, tau) = certify(&inv_map, target, source);
    let inverse = RoughIsometry { map: inv_map, lambda, tau };

    let roundtrip_source = source
        .vertices()
        .map(|y| source.dist(y, inverse.image(iso.image(y))))
        .fold(0.0, f64::max);
    let roundtrip_target = target
        .vertices()
        .map(|x| target.dist(x, iso.image(inverse.image(x))))
        .fold(0.0, f64::max);
    let report = QuasiInverseReport {
        roundtrip_source,
        roundtrip_source_bound: 2.0 * iso.lambda,
        roundtrip_target,
        roundtrip_target_bound: iso.lambda,
    };
    (inverse, report)
}

/// Pushes an anchor through the map and verifies the image sequence in
/// the target (consecutive duplicate images are collapsed; a subsequence
/// of an escaping sequence still escapes).
pub fn push_anchor(
    iso: &RoughIsometry,
    anchor: &BoundaryAnchor,
    target: &MetricSpace,
    delta_target: f64,
    escape_threshold: Option<f64>,
) -> Result<BoundaryAnchor> {
    let mut sequence: Vec<VertexId> = Vec::with_capacity(anchor.sequence.len());
    for &z in &anchor.sequence {
        let fz = iso.image(z);
        if sequence.last() != Some(&fz) {
            sequence.push(fz);
        }
    }
    let pushed = BoundaryAnchor::new(
        format!("{}_pushed", anchor.name),
        iso.image(anchor.base),
        sequence,
    );
    let check = verify_anchor(target, &pushed, delta_target, escape_threshold)?;
    if !check.passed {
        return Err(Error::AnchorRejected {
            name: pushed.name.clone(),
            reason: format!(
                "image anchor fails verification (min product {:.6}, head {:.6}, \
                 tail {:.6} vs threshold {:.6}); the distortion is too large \
                 for this truncation",
                check.min_product, check.head_product, check.tail_product, check.escape_threshold
            ),
        });
    }
    Ok(pushed)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportDeviation {
    /// sup over source vertices of |b_Y(y) - b_X(phi(y))|.
    pub max_deviation: f64,
    pub worst_vertex: usize,
    /// `5*lambda` widened by both field error bounds.
    pub bound_five_lambda: f64,
    /// `3*lambda + 4*delta` widened by both field error bounds.
    pub bound_three_lambda_four_delta: f64,
    pub passed_five_lambda: bool,
    pub passed_three_lambda: bool,
}

/// Compares a Busemann field against its transported counterpart:
/// `b_Y` and `b_X(phi(.))` must agree within `5*lambda` and within
/// `3*lambda + 4*delta`, each widened by the two fields' error budgets.
pub fn busemann_transport_check(
    iso: &RoughIsometry,
    field_src: &BusemannField,
    field_dst: &BusemannField,
) -> Result<TransportDeviation> {
    if field_dst.base != iso.image(field_src.base) {
        return Err(Error::FieldMismatch {
            what: "transported field base (expected phi of the source base)".into(),
        });
    }
    let mut max_deviation: f64 = 0.0;
    let mut worst = 0usize;
    for (y, &b_src) in field_src.values.iter().enumerate() {
        let dev = (b_src - field_dst.value(iso.image(VertexId(y)))).abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst = y;
        }
    }
    let widen = field_src.error_bound + field_dst.error_bound;
    let delta = field_src.delta.max(field_dst.delta);
    let bound5 = 5.0 * iso.lambda + widen;
    let bound34 = 3.0 * iso.lambda + 4.0 * delta + widen;
    Ok(TransportDeviation {
        max_deviation,
        worst_vertex: worst,
        bound_five_lambda: bound5,
        bound_three_lambda_four_delta: bound34,
        passed_five_lambda: max_deviation <= bound5 + 1e-12,
        passed_three_lambda: max_deviation <= bound34 + 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformedTransportReport {
    pub pairs_checked: usize,
    pub skipped_close: usize,
    pub skipped_collapsed: usize,
    /// Window of dist_eps_Y(x,y) / dist_eps_X(phi x, phi y) over pairs
    /// with d_Y(x,y) >= 2 + lambda.
    pub dist_ratio_min: f64,
    pub dist_ratio_max: f64,
    /// Window of delta_eps_Y(y) / delta_eps_X(phi y) over all vertices.
    pub delta_ratio_min: f64,
    pub delta_ratio_max: f64,
    /// Assembled comparability budget; ratios outside [1/budget, budget]
    /// are flagged.
    pub budget: f64,
    pub flagged_pairs: usize,
}

/// Assembled two-sided comparability constant for transported deformed
/// distances: the discretization constant `2C^2`, the density transport
/// factor `exp(eps(4 delta + 3 lambda))`, the short-distance law
/// `exp(eps(2 lambda + 8))` over steps of length at most `4 + lambda`,
/// and the quasi-inverse displacement `exp(eps lambda)`.
pub fn transport_budget(eps: f64, delta: f64, lambda: f64) -> f64 {
    let c = (eps * (10.0 * delta + 1.0)).exp();
    2.0 * c
        * c
        * (eps * (4.0 * delta + 3.0 * lambda)).exp()
        * (4.0 + lambda)
        * (eps * (2.0 * lambda + 8.0)).exp()
        * (eps * lambda).exp()
}

/// Ratio windows for deformed distances and boundary distances across the
/// map, over seeded pairs at transport range `d_Y >= 2 + lambda`.
pub fn deformed_transport_check(
    iso: &RoughIsometry,
    source: &MetricSpace,
    def_src: &DeformedSpace,
    def_dst: &DeformedSpace,
    sampler: &PairSampler,
) -> Result<DeformedTransportReport> {
    if def_src.density.epsilon != def_dst.density.epsilon {
        return Err(Error::FieldMismatch {
            what: format!(
                "epsilon ({} vs {})",
                def_src.density.epsilon, def_dst.density.epsilon
            ),
        });
    }
    let eps = def_src.density.epsilon;
    let delta = def_src.density.delta.max(def_dst.density.delta);
    let budget = transport_budget(eps, delta, iso.lambda);
    let scale = def_src.dist_eps.max();

    let mut dist_ratio_min = f64::INFINITY;
    let mut dist_ratio_max: f64 = 0.0;
    let mut checked = 0usize;
    let mut skipped_close = 0usize;
    let mut skipped_collapsed = 0usize;
    let mut flagged = 0usize;
    for (x, y) in sample_pairs(source, sampler) {
        if source.dist(x, y) < 2.0 + iso.lambda {
            skipped_close += 1;
            continue;
        }
        let num = def_src.dist(x, y);
        let den = def_dst.dist(iso.image(x), iso.image(y));
        if num <= 1e-12 * (1.0 + scale) || den <= 1e-12 * (1.0 + scale) {
            skipped_collapsed += 1;
            continue;
        }
        let ratio = num / den;
        dist_ratio_min = dist_ratio_min.min(ratio);
        dist_ratio_max = dist_ratio_max.max(ratio);
        if ratio > budget || ratio < 1.0 / budget {
            flagged += 1;
        }
        checked += 1;
    }

    let mut delta_ratio_min = f64::INFINITY;
    let mut delta_ratio_max: f64 = 0.0;
    for y in source.vertices() {
        let ratio = def_src.delta_eps(y) / def_dst.delta_eps(iso.image(y));
        delta_ratio_min = delta_ratio_min.min(ratio);
        delta_ratio_max = delta_ratio_max.max(ratio);
    }

    Ok(DeformedTransportReport {
        pairs_checked: checked,
        skipped_close,
        skipped_collapsed,
        dist_ratio_min,
        dist_ratio_max,
        delta_ratio_min,
        delta_ratio_max,
        budget,
        flagged_pairs: flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, GraphSpec};

    fn grid_like(n: usize, scale: f64, prefix: &str) -> MetricSpace {
        let mut spec = GraphSpec::default();
        for i in 0..n {
            spec.vertex(format!("{prefix}{i}"), Some([i as f64, 0.0]));
        }
        for i in 0..n - 1 {
            spec.edge(format!("{prefix}{i}"), format!("{prefix}{}", i + 1), scale);
        }
        build_space(&spec).unwrap()
    }

    #[test]
    fn identity_certifies_to_zero() {
        let s = grid_like(7, 1.0, "v");
        let map: Vec<VertexId> = s.vertices().collect();
        let (lambda, tau) = certify(&map, &s, &s);
        assert_eq!((lambda, tau), (0.0, 0.0));
    }

    #[test]
    fn quasi_inverse_of_identity_is_identity() {
        let s = grid_like(5, 1.0, "v");
        let iso = rough_isometry(s.vertices().collect(), &s, &s);
        let (inv, report) = quasi_inverse(&iso, &s, &s);
        assert_eq!(inv.lambda, 0.0);
        assert_eq!(report.roundtrip_source, 0.0);
        assert_eq!(report.roundtrip_target, 0.0);
        for y in s.vertices() {
            assert_eq!(inv.image(y), y);
        }
    }

    #[test]
    fn relabeled_copy_inverts_exactly() {
        let a = grid_like(6, 1.0, "a");
        let b = grid_like(6, 1.0, "b");
        let map: Vec<VertexId> = a
            .vertices()
            .map(|v| b.vertex(&format!("b{}", a.name(v).trim_start_matches('a'))).unwrap())
            .collect();
        let iso = rough_isometry(map, &a, &b);
        assert_eq!(iso.lambda, 0.0);
        assert_eq!(iso.tau, 0.0);
        let (inv, _) = quasi_inverse(&iso, &a, &b);
        for (i, v) in a.vertices().enumerate() {
            assert_eq!(inv.image(iso.image(v)), v, "index {i}");
        }
    }

    #[test]
    fn inverse_constants_bounded_by_three_lambda_two_tau() {
        // Coarsening a 2-scaled line onto its even vertices.
        let fine = grid_like(9, 1.0, "f");
        let coarse = {
            let mut spec = GraphSpec::default();
            for i in (0..9).step_by(2) {
                spec.vertex(format!("c{i}"), Some([i as f64, 0.0]));
            }
            for i in (0..7).step_by(2) {
                spec.edge(format!("c{i}"), format!("c{}", i + 2), 2.0);
            }
            build_space(&spec).unwrap()
        };
        let map: Vec<VertexId> = (0..9)
            .map(|i| coarse.vertex(&format!("c{}", (i / 2) * 2)).unwrap())
            .collect();
        let iso = rough_isometry(map, &fine, &coarse);
        assert!(iso.lambda > 0.0);
        let (inv, report) = quasi_inverse(&iso, &fine, &coarse);
        assert!(inv.lambda <= 3.0 * iso.lambda + 2.0 * iso.tau + 1e-12);
        assert!(report.roundtrip_source <= report.roundtrip_source_bound + 1e-12);
    }

    #[test]
    fn scale_map_lambda_grows_with_diameter() {
        // kappa = 2 treated as a rough isometry: the additive distortion
        // is the full diameter of the source.
        let fine = grid_like(11, 1.0, "s");
        let coarse = grid_like(11, 2.0, "s");
        let map: Vec<VertexId> = fine.vertices().collect();
        let (lambda, _) = certify(&map, &fine, &coarse);
        assert_eq!(lambda, fine.diameter());
        // As a kappa = 2 similarity the same map certifies tightly.
        let sim = certify_similarity(&map, &fine, &coarse, 2.0);
        assert_eq!(sim.tau, 0.0);
    }

    #[test]
    fn push_anchor_through_identity() {
        let s = grid_like(8, 1.0, "v");
        let iso = rough_isometry(s.vertices().collect(), &s, &s);
        let base = s.vertex("v0").unwrap();
        let seq: Vec<VertexId> = (1..8).map(|i| s.vertex(&format!("v{i}")).unwrap()).collect();
        let anchor = BoundaryAnchor::new("ray", base, seq);
        let pushed = push_anchor(&iso, &anchor, &s, 0.0, None).unwrap();
        assert_eq!(pushed.sequence, anchor.sequence);
        assert_eq!(pushed.base, anchor.base);
        assert_eq!(pushed.name, "ray_pushed");
    }
}
