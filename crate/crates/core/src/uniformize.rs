//! Conformal densities `rho_eps = exp(-eps*b)`, the deformed path metric,
//! boundary distances on truncations, and the discretized path integral.

use serde::Serialize;

use crate::busemann::{BoundaryAnchor, BusemannField};
use crate::space::{Curve, DistMatrix, MetricSpace, VertexId};
use crate::{Error, Result};

/// Default short-curve threshold Q for the discretized integral.
pub const DEFAULT_SHORT_Q: f64 = 1.0;

/// Logarithmic mean of two positive density values, computed from the
/// log difference `r = ln(a) - ln(b)` supplied by the caller (the field
/// gives it exactly as `eps * (b_v - b_u)`). Equals `a` when `r = 0`.
fn log_mean(a: f64, b: f64, r: f64) -> f64 {
    if r == 0.0 {
        a
    } else {
        (a - b) / r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnackViolation {
    pub u: usize,
    pub v: usize,
    pub ratio: f64,
    pub bound: f64,
}

/// Per-vertex conformal density with its Harnack constant.
#[derive(Debug, Clone)]
pub struct ConformalDensity {
    pub epsilon: f64,
    /// `exp(-eps * b(x))` per vertex.
    pub rho: Vec<f64>,
    /// `exp(eps * (10*delta + 1))`: the two-sided bound on density ratios
    /// of unit-distance pairs.
    pub harnack_c: f64,
    pub delta: f64,
    pub field_error_bound: f64,
    pub base: VertexId,
    /// The boundary anchor the underlying field was built from; tent
    /// curves ascend toward its deepest vertex.
    pub anchor: BoundaryAnchor,
    /// Busemann values the density was built from.
    pub busemann: Vec<f64>,
    /// Adjacent unit-distance pairs whose ratio escapes the Harnack
    /// window even after widening by the field's error bound; a signal of
    /// a bad anchor or truncation, not a fatal error.
    pub warnings: Vec<HarnackViolation>,
}

impl ConformalDensity {
    #[inline]
    pub fn rho(&self, v: VertexId) -> f64 {
        self.rho[v.0]
    }
}

/// Builds `rho_eps` pointwise and screens adjacent unit-distance pairs
/// against the Harnack window (widened by `exp(2*eps*error_bound)`).
/// Violations are attached as warnings, not errors: they flag a bad
/// anchor or truncation artifact.
pub fn make_density(
    space: &MetricSpace,
    field: &BusemannField,
    epsilon: f64,
) -> Result<ConformalDensity> {
    if !(epsilon > 0.0) {
        return Err(Error::BadParameter {
            name: "epsilon".into(),
            reason: format!("must be positive, got {epsilon}"),
        });
    }
    let rho: Vec<f64> = field.values.iter().map(|&b| (-epsilon * b).exp()).collect();
    let harnack_c = (epsilon * (10.0 * field.delta + 1.0)).exp();
    let bound = harnack_c * (2.0 * epsilon * field.error_bound).exp();
    let mut warnings = Vec::new();
    for edge in space.edges() {
        if edge.len > 1.0 {
            continue;
        }
        // Unit edges can sit exactly on the window edge; tolerate ulp noise.
        let ratio = rho[edge.u] / rho[edge.v];
        if ratio > bound * (1.0 + 1e-12) || ratio < (1.0 - 1e-12) / bound {
            warnings.push(HarnackViolation { u: edge.u, v: edge.v, ratio, bound });
        }
    }
    Ok(ConformalDensity {
        epsilon,
        rho,
        harnack_c,
        delta: field.delta,
        field_error_bound: field.error_bound,
        base: field.base,
        anchor: field.anchor.clone(),
        busemann: field.values.clone(),
        warnings,
    })
}

/// How the escape tail past a frontier vertex is estimated.
#[derive(Debug, Clone)]
pub enum TailRule {
    /// `rho[f] / eps`: the closed form of the escape integral
    /// `int_0^inf exp(-eps t) dt` scaled by the local density.
    Geometric,
    /// Model-supplied closed-form tails, aligned with the frontier slice.
    Analytic(Vec<f64>),
}

/// The deformed metric on a truncation: per-edge deformed lengths, the
/// full deformed distance matrix, and the boundary distance assembled
/// from the frontier plus its tail corrections.
#[derive(Debug, Clone)]
pub struct DeformedSpace {
    pub density: ConformalDensity,
    pub edge_eps: Vec<f64>,
    pub dist_eps: DistMatrix,
    pub frontier: Vec<VertexId>,
    pub tail: Vec<f64>,
    pub delta_eps: Vec<f64>,
    /// Max base edge length of the owning space, kept for snap-slack
    /// factors `exp(eps * max_edge)`.
    pub base_max_edge: f64,
    /// Largest deformed distance; the resolution floor for collapsed
    /// pairs is `1e-12 * (1 + dist_scale)`.
    pub dist_scale: f64,
}

/// Deforms the space: every edge gets length
/// `d(u,v) * logmean(rho[u], rho[v])`, distances come from shortest paths
/// over the deformed edges, and `delta_eps[x] = min_f dist_eps(x, f) + tail[f]`.
pub fn deform(
    space: &MetricSpace,
    density: &ConformalDensity,
    frontier: &[VertexId],
    tail_rule: &TailRule,
) -> Result<DeformedSpace> {
    if frontier.is_empty() {
        return Err(Error::EmptyFrontier);
    }
    let eps = density.epsilon;
    let edge_eps: Vec<f64> = space
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (density.rho[e.u], density.rho[e.v]);
            // ln(rho_u) - ln(rho_v) = eps * (b_v - b_u), exactly.
            let r = eps * (density.busemann[e.v] - density.busemann[e.u]);
            e.len * log_mean(a, b, r)
        })
        .collect();
    let dist_eps = space.apsp_with_weights(&edge_eps);
    let tail: Vec<f64> = match tail_rule {
        TailRule::Geometric => frontier.iter().map(|&f| density.rho(f) / eps).collect(),
        TailRule::Analytic(values) => {
            if values.len() != frontier.len() {
                return Err(Error::BadParameter {
                    name: "tail".into(),
                    reason: format!(
                        "analytic tail has {} entries for {} frontier vertices",
                        values.len(),
                        frontier.len()
                    ),
                });
            }
            values.clone()
        }
    };
    let sources: Vec<(VertexId, f64)> = frontier.iter().cloned().zip(tail.iter().cloned()).collect();
    let delta_eps = space.multi_source_with_offsets(&sources, &edge_eps);
    let dist_scale = dist_eps.max();
    Ok(DeformedSpace {
        density: density.clone(),
        edge_eps,
        dist_eps,
        frontier: frontier.to_vec(),
        tail,
        delta_eps,
        base_max_edge: space.max_edge_len(),
        dist_scale,
    })
}

impl DeformedSpace {
    #[inline]
    pub fn dist(&self, u: VertexId, v: VertexId) -> f64 {
        self.dist_eps.get(u, v)
    }

    #[inline]
    pub fn delta_eps(&self, v: VertexId) -> f64 {
        self.delta_eps[v.0]
    }

    pub fn epsilon(&self) -> f64 {
        self.density.epsilon
    }
}

/// Deformed length of a curve: the sum of deformed edge lengths along it.
/// Always at least the deformed distance of its endpoints.
pub fn deformed_curve_length(deformed: &DeformedSpace, curve: &Curve) -> f64 {
    curve.length_in(&deformed.edge_eps)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscretizationReport {
    /// Base arclength of the curve.
    pub base_length: f64,
    /// Deformed length (the path integral of rho).
    pub integral: f64,
    /// The Riemann-style sum the integral is compared against.
    pub sum: f64,
    pub ratio: f64,
    pub n_samples: usize,
    pub short_case: bool,
}

/// Compares the deformed length of a curve against the density sampled at
/// `N = floor(L)` points spaced `q = L/N` apart in base arclength
/// (at the curve start scaled by `L` when `L <= q_short`).
pub fn discretized_integral(
    space: &MetricSpace,
    deformed: &DeformedSpace,
    curve: &Curve,
    q_short: f64,
) -> Result<DiscretizationReport> {
    let base_weights: Vec<f64> = space.edges().iter().map(|e| e.len).collect();
    let base_cum = curve.cum_in(&base_weights);
    let total = *base_cum.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::ZeroLengthCurve);
    }
    let integral = deformed_curve_length(deformed, curve);
    let rho = |v: VertexId| deformed.density.rho(v);

    if total <= q_short {
        let sum = total * rho(curve.start());
        return Ok(DiscretizationReport {
            base_length: total,
            integral,
            sum,
            ratio: integral / sum,
            n_samples: 1,
            short_case: true,
        });
    }

    let n = total.floor() as usize;
    let q = total / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let target = i as f64 * q;
        // Snap to the nearest curve vertex by base arclength.
        let k = match base_cum.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(k) => k,
            Err(k) if k == 0 => 0,
            Err(k) if k >= base_cum.len() => base_cum.len() - 1,
            Err(k) => {
                if target - base_cum[k - 1] <= base_cum[k] - target {
                    k - 1
                } else {
                    k
                }
            }
        };
        sum += rho(curve.vertices()[k]);
    }
    Ok(DiscretizationReport {
        base_length: total,
        integral,
        sum,
        ratio: integral / sum,
        n_samples: n,
        short_case: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnackSweep {
    pub pairs_checked: usize,
    pub violations: usize,
    /// Largest log-excess of a ratio past its bound (negative when all
    /// pairs sit inside the window).
    pub worst_log_excess: f64,
}

/// Two-sided Harnack screen over explicit vertex pairs:
/// `exp(-(10*eps*delta + eps*d))/s <= rho(u)/rho(v) <= exp(10*eps*delta + eps*d)*s`
/// with `s = exp(2*eps*error_bound)`.
pub fn harnack_sweep(
    space: &MetricSpace,
    density: &ConformalDensity,
    pairs: &[(VertexId, VertexId)],
) -> HarnackSweep {
    let eps = density.epsilon;
    let widen = 2.0 * eps * density.field_error_bound;
    let mut violations = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    for &(u, v) in pairs {
        let log_ratio = (density.rho(u) / density.rho(v)).ln().abs();
        let log_bound = 10.0 * eps * density.delta + eps * space.dist(u, v) + widen;
        let excess = log_ratio - log_bound;
        worst = worst.max(excess);
        if excess > 1e-12 {
            violations += 1;
        }
    }
    HarnackSweep {
        pairs_checked: pairs.len(),
        violations,
        worst_log_excess: worst,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// `exp(-10*eps*delta)/(2*eps) / snap_slack`, the per-vertex lower
    /// coefficient on rho.
    pub lower_coeff: f64,
    /// `K*exp(2*K*eps) + exp(eps*(K + 16*delta))/eps`, the upper
    /// coefficient on rho.
    pub upper_coeff: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub passed: bool,
}

/// Boundary-distance sandwich: for every vertex,
/// `lower_coeff * rho(x) <= delta_eps(x) <= upper_coeff * rho(x)`,
/// with the lower coefficient divided by the snap slack
/// `exp(eps * max_edge)` and the upper assembled from the rough
/// starlikeness constant `K`.
pub fn boundary_sandwich(deformed: &DeformedSpace, starlike_k: f64) -> SandwichReport {
    let eps = deformed.density.epsilon;
    let delta = deformed.density.delta;
    let k = starlike_k;
    let snap_slack = (eps * deformed.base_max_edge).exp();
    let lower_coeff = (-10.0 * eps * delta).exp() / (2.0 * eps) / snap_slack;
    let upper_coeff = k * (2.0 * k * eps).exp() + (eps * (k + 16.0 * delta)).exp() / eps;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut lower_violations = 0usize;
    let mut upper_violations = 0usize;
    for (i, &de) in deformed.delta_eps.iter().enumerate() {
        let ratio = de / deformed.density.rho[i];
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        if ratio < lower_coeff * (1.0 - 1e-12) {
            lower_violations += 1;
        }
        if ratio > upper_coeff * (1.0 + 1e-12) {
            upper_violations += 1;
        }
    }
    SandwichReport {
        lower_coeff,
        upper_coeff,
        min_ratio,
        max_ratio,
        lower_violations,
        upper_violations,
        passed: lower_violations == 0 && upper_violations == 0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShortDistanceReport {
    pub pairs_checked: usize,
    /// Two-sided comparison bound `exp(2*lambda*eps + 8*eps) * s`.
    pub bound: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub passed: bool,
}

/// Short-distance law: for pairs with `d(x,y) <= 4 + lambda`,
/// `dist_eps(x,y)` is within the stated factor of `rho(x) * d(x,y)`.
pub fn short_distance_check(
    space: &MetricSpace,
    deformed: &DeformedSpace,
    pairs: &[(VertexId, VertexId)],
    lambda: f64,
) -> ShortDistanceReport {
    let eps = deformed.density.epsilon;
    let snap_slack = (eps * space.max_edge_len()).exp();
    let bound = (2.0 * lambda * eps + 8.0 * eps).exp() * snap_slack;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut checked = 0usize;
    for &(x, y) in pairs {
        if x == y || space.dist(x, y) > 4.0 + lambda {
            continue;
        }
        let ratio = deformed.dist(x, y) / (deformed.density.rho(x) * space.dist(x, y));
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        checked += 1;
    }
    ShortDistanceReport {
        pairs_checked: checked,
        bound,
        min_ratio,
        max_ratio,
        passed: checked == 0 || (max_ratio <= bound && min_ratio >= 1.0 / bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::busemann::{busemann_field, BoundaryAnchor};
    use crate::space::{build_space, GraphSpec};

    fn ray(len: usize) -> (MetricSpace, BusemannField) {
        let mut spec = GraphSpec::default();
        for i in 0..=len {
            spec.vertex(format!("n{i}"), None);
        }
        for i in 0..len {
            spec.edge(format!("n{i}"), format!("n{}", i + 1), 1.0);
        }
        let s = build_space(&spec).unwrap();
        let base = s.vertex("n0").unwrap();
        let seq: Vec<VertexId> = (1..=len).map(|i| s.vertex(&format!("n{i}")).unwrap()).collect();
        let anchor = BoundaryAnchor::new("end", base, seq);
        let field = busemann_field(&s, &anchor, 0.0, None).unwrap();
        (s, field)
    }

    /// Field with b identically zero: the deformation must be the
    /// identity.
    fn flat_field(space: &MetricSpace) -> BusemannField {
        let n = space.vertex_count();
        let anchor = BoundaryAnchor::new(
            "flat",
            VertexId(0),
            vec![VertexId(n - 2), VertexId(n - 1)],
        );
        BusemannField {
            anchor,
            base: VertexId(0),
            delta: 0.0,
            values: vec![0.0; n],
            spread: 0.0,
            error_bound: 0.0,
        }
    }

    #[test]
    fn rho_at_base_is_one() {
        let (s, field) = ray(6);
        let density = make_density(&s, &field, 1.5).unwrap();
        assert_eq!(density.rho(field.base), 1.0);
        assert!(density.warnings.is_empty(), "{:?}", density.warnings);
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let (s, field) = ray(4);
        assert!(make_density(&s, &field, 0.0).is_err());
        assert!(make_density(&s, &field, -1.0).is_err());
    }

    #[test]
    fn constant_density_is_identity_deformation() {
        let mut spec = GraphSpec::default();
        for i in 0..6 {
            spec.vertex(format!("{i}"), None);
        }
        for i in 0..6 {
            spec.edge(format!("{i}"), format!("{}", (i + 1) % 6), 0.7 + 0.1 * i as f64);
        }
        let s = build_space(&spec).unwrap();
        let field = flat_field(&s);
        let density = make_density(&s, &field, 2.0).unwrap();
        let frontier = vec![s.vertex("0").unwrap()];
        let def = deform(&s, &density, &frontier, &TailRule::Geometric).unwrap();
        for u in s.vertices() {
            for v in s.vertices() {
                assert_eq!(def.dist(u, v), s.dist(u, v));
            }
        }
    }

    #[test]
    fn empty_frontier_rejected() {
        let (s, field) = ray(4);
        let density = make_density(&s, &field, 1.0).unwrap();
        assert!(matches!(
            deform(&s, &density, &[], &TailRule::Geometric),
            Err(Error::EmptyFrontier)
        ));
    }

    #[test]
    fn delta_eps_matches_min_formula() {
        let (s, field) = ray(8);
        let density = make_density(&s, &field, 1.0).unwrap();
        let frontier = vec![s.vertex("n0").unwrap(), s.vertex("n8").unwrap()];
        let def = deform(&s, &density, &frontier, &TailRule::Geometric).unwrap();
        for x in s.vertices() {
            let by_formula = frontier
                .iter()
                .zip(&def.tail)
                .map(|(&f, &t)| def.dist(x, f) + t)
                .fold(f64::INFINITY, f64::min);
            assert!((def.delta_eps(x) - by_formula).abs() <= 1e-12 * (1.0 + by_formula));
        }
    }

    #[test]
    fn geodesic_length_attains_dist_eps_and_detours_exceed_it() {
        // 4-cycle with one long detour edge.
        let mut spec = GraphSpec::default();
        for i in 0..4 {
            spec.vertex(format!("{i}"), None);
        }
        spec.edge("0", "1", 1.0);
        spec.edge("1", "2", 1.0);
        spec.edge("2", "3", 1.0);
        spec.edge("3", "0", 4.0);
        let s = build_space(&spec).unwrap();
        let field = flat_field(&s);
        let density = make_density(&s, &field, 1.0).unwrap();
        let def = deform(&s, &density, &[VertexId(0)], &TailRule::Geometric).unwrap();
        let (a, b) = (s.vertex("0").unwrap(), s.vertex("3").unwrap());
        let geo = s.geodesic_deformed(a, b, &def.edge_eps, &def.dist_eps);
        assert_eq!(deformed_curve_length(&def, &geo), def.dist(a, b));
        let detour = Curve::from_vertex_path(&s, vec![a, b]).unwrap();
        assert!(deformed_curve_length(&def, &detour) > def.dist(a, b));
        // Single-vertex curve has zero deformed length.
        let point = Curve::from_vertex_path(&s, vec![a]).unwrap();
        assert_eq!(deformed_curve_length(&def, &point), 0.0);
    }

    #[test]
    fn discretization_exact_for_constant_density_integer_length() {
        let mut spec = GraphSpec::default();
        for i in 0..6 {
            spec.vertex(format!("v{i}"), None);
        }
        for i in 0..5 {
            spec.edge(format!("v{i}"), format!("v{}", i + 1), 1.0);
        }
        let s = build_space(&spec).unwrap();
        let field = flat_field(&s);
        let density = make_density(&s, &field, 1.0).unwrap();
        let def = deform(&s, &density, &[VertexId(0)], &TailRule::Geometric).unwrap();
        let curve = s.geodesic(s.vertex("v0").unwrap(), s.vertex("v5").unwrap());
        let report = discretized_integral(&s, &def, &curve, DEFAULT_SHORT_Q).unwrap();
        assert_eq!(report.n_samples, 5);
        assert_eq!(report.sum, 5.0);
        assert_eq!(report.integral, 5.0);
        assert_eq!(report.ratio, 1.0);
        assert!(!report.short_case);
    }

    #[test]
    fn discretization_short_case() {
        let mut spec = GraphSpec::default();
        spec.vertex("a", None);
        spec.vertex("b", None);
        spec.edge("a", "b", 0.5);
        let s = build_space(&spec).unwrap();
        let field = flat_field(&s);
        let density = make_density(&s, &field, 1.0).unwrap();
        let def = deform(&s, &density, &[VertexId(0)], &TailRule::Geometric).unwrap();
        let curve = s.geodesic(s.vertex("a").unwrap(), s.vertex("b").unwrap());
        let report = discretized_integral(&s, &def, &curve, DEFAULT_SHORT_Q).unwrap();
        assert!(report.short_case);
        assert_eq!(report.sum, 0.5);
        assert_eq!(report.ratio, 1.0);
    }

    #[test]
    fn analytic_tail_length_must_match_frontier() {
        let (s, field) = ray(4);
        let density = make_density(&s, &field, 1.0).unwrap();
        let frontier = vec![s.vertex("n0").unwrap()];
        let err = deform(&s, &density, &frontier, &TailRule::Analytic(vec![1.0, 2.0]));
        assert!(err.is_err());
    }

    #[test]
    fn geometric_tail_is_rho_over_eps() {
        let (s, field) = ray(5);
        let eps = 2.0;
        let density = make_density(&s, &field, eps).unwrap();
        let f = s.vertex("n5").unwrap();
        let def = deform(&s, &density, &[f], &TailRule::Geometric).unwrap();
        assert_eq!(def.tail[0], density.rho(f) / eps);
        // At the frontier vertex itself delta_eps is exactly the tail.
        assert_eq!(def.delta_eps(f), def.tail[0]);
    }

    #[test]
    fn harnack_sweep_holds_on_ray() {
        let (s, field) = ray(9);
        for eps in [0.5, 1.0, 2.0] {
            let density = make_density(&s, &field, eps).unwrap();
            let pairs: Vec<(VertexId, VertexId)> = s
                .vertices()
                .flat_map(|u| s.vertices().map(move |v| (u, v)))
                .collect();
            let sweep = harnack_sweep(&s, &density, &pairs);
            assert_eq!(sweep.violations, 0, "eps={eps}: {sweep:?}");
        }
    }
}
