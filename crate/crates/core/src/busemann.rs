//! Boundary anchors (finite proxies for Gromov-boundary points) and
//! Busemann fields with certified additive error.
//!
//! An anchor is an ordered escaping vertex sequence `z_1..z_M`; the field
//! value at `x` is the renormalized distance from the deepest anchor
//! point, `d(x, z_M) - d(o, z_M)` (on trees this is the exact
//! horofunction at every vertex, including past the anchor tail). The
//! other tail estimates feed the certified error bound: their spread,
//! measured over vertices the tail has verifiably passed, is folded in
//! alongside the hyperbolicity term `2*delta`.

use serde::Serialize;

use crate::hyperbolicity::gromov_product;
use crate::space::{MetricSpace, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BoundaryAnchor {
    pub name: String,
    pub base: VertexId,
    /// Ordered escaping sequence z_1..z_M, M >= 2.
    pub sequence: Vec<VertexId>,
}

impl BoundaryAnchor {
    pub fn new(name: impl Into<String>, base: VertexId, sequence: Vec<VertexId>) -> Self {
        BoundaryAnchor { name: name.into(), base, sequence }
    }

    /// The last `min(3, M)` anchor points, used for all tail estimates.
    pub fn tail(&self) -> &[VertexId] {
        let m = self.sequence.len();
        &self.sequence[m.saturating_sub(3)..]
    }

    pub fn deepest(&self) -> VertexId {
        *self.sequence.last().expect("anchor sequence is nonempty")
    }
}

/// Outcome of the finite Gromov-sequence proxy checks.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorCheck {
    pub passed: bool,
    /// min over i<j of (z_i|z_j)_o.
    pub min_product: f64,
    /// (z_1|z_2)_o, the baseline for the monotonicity slack.
    pub head_product: f64,
    /// (z_{M-1}|z_M)_o, which must clear the escape threshold.
    pub tail_product: f64,
    pub escape_threshold: f64,
    pub monotone_ok: bool,
    pub escape_ok: bool,
    /// True when the tail revisits a vertex; a stationary tail cannot
    /// escape no matter how large its products are.
    pub degenerate_tail: bool,
}

/// Checks that the anchor behaves like a Gromov sequence on this
/// truncation: pairwise products may not dip below `(z_1|z_2)_o - 2*delta`
/// and the tail product must exceed the escape threshold (default
/// `d(o, z_M) / 2`).
pub fn verify_anchor(
    space: &MetricSpace,
    anchor: &BoundaryAnchor,
    delta: f64,
    escape_threshold: Option<f64>,
) -> Result<AnchorCheck> {
    let m = anchor.sequence.len();
    if m < 2 {
        return Err(Error::AnchorTooShort { name: anchor.name.clone(), len: m });
    }
    let o = anchor.base;
    let seq = &anchor.sequence;
    let threshold = escape_threshold.unwrap_or_else(|| 0.5 * space.dist(o, seq[m - 1]));

    let mut min_product = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            min_product = min_product.min(gromov_product(space, seq[i], seq[j], o));
        }
    }
    let head_product = gromov_product(space, seq[0], seq[1], o);
    let tail_product = gromov_product(space, seq[m - 2], seq[m - 1], o);
    let degenerate_tail = seq[m - 2] == seq[m - 1];

    let monotone_ok = min_product >= head_product - 2.0 * delta - 1e-12;
    let escape_ok = !degenerate_tail && tail_product > threshold;
    Ok(AnchorCheck {
        passed: monotone_ok && escape_ok,
        min_product,
        head_product,
        tail_product,
        escape_threshold: threshold,
        monotone_ok,
        escape_ok,
        degenerate_tail,
    })
}

/// Per-vertex Busemann values with a certified additive error bound.
#[derive(Debug, Clone)]
pub struct BusemannField {
    pub anchor: BoundaryAnchor,
    pub base: VertexId,
    /// Hyperbolicity constant the bound was certified against.
    pub delta: f64,
    pub values: Vec<f64>,
    /// Max over vertices of (max - min) of the tail estimates.
    pub spread: f64,
    /// `2*delta + spread`.
    pub error_bound: f64,
}

impl BusemannField {
    #[inline]
    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }
}

/// Builds the canonical Busemann field for a verified anchor.
///
/// Rejects anchors that fail [`verify_anchor`]. The value at `x` is
/// `d(x, z_M) - d(o, z_M)`; at the base it is identically zero. The
/// spread of the tail estimates `d(x, z_i) - d(o, z_i)` enters the error
/// bound, but only at vertices where no estimate is stale: an estimate
/// from `z_i` lags by `est_i(x) - est_M(x) > 2*delta` exactly when `x`
/// sits further along the escape direction than `z_i`, where the
/// truncation cannot say more than the deepest representative does.
pub fn busemann_field(
    space: &MetricSpace,
    anchor: &BoundaryAnchor,
    delta: f64,
    escape_threshold: Option<f64>,
) -> Result<BusemannField> {
    let check = verify_anchor(space, anchor, delta, escape_threshold)?;
    if !check.passed {
        let reason = if !check.monotone_ok {
            format!(
                "pairwise product {:.6} dips below head product {:.6} - 2*delta",
                check.min_product, check.head_product
            )
        } else if check.degenerate_tail {
            "tail repeats a vertex, sequence does not escape".to_string()
        } else {
            format!(
                "tail product {:.6} does not exceed escape threshold {:.6}",
                check.tail_product, check.escape_threshold
            )
        };
        return Err(Error::AnchorRejected { name: anchor.name.clone(), reason });
    }

    let o = anchor.base;
    let tail = anchor.tail();
    let offsets: Vec<f64> = tail.iter().map(|&z| space.dist(o, z)).collect();
    let mut values = Vec::with_capacity(space.vertex_count());
    let mut spread: f64 = 0.0;
    for x in space.vertices() {
        let est: Vec<f64> = tail
            .iter()
            .zip(&offsets)
            .map(|(&z, &off)| space.dist(x, z) - off)
            .collect();
        let deepest = *est.last().unwrap();
        values.push(deepest);
        let staleness = est.iter().fold(0.0_f64, |m, &e| m.max(e - deepest));
        if staleness <= 2.0 * delta + 1e-9 {
            let hi = est.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = est.iter().cloned().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
    }
    Ok(BusemannField {
        anchor: anchor.clone(),
        base: o,
        delta,
        values,
        spread,
        error_bound: 2.0 * delta + spread,
    })
}

/// Certified window for the boundary Gromov product of two anchors:
/// `[m, m + 2*delta]` with `m` the min of the tail-pair products.
pub fn boundary_product(
    space: &MetricSpace,
    a: &BoundaryAnchor,
    b: &BoundaryAnchor,
    o: VertexId,
    delta: f64,
) -> (f64, f64) {
    let mut m = f64::INFINITY;
    for &za in a.tail() {
        for &zb in b.tail() {
            m = m.min(gromov_product(space, za, zb, o));
        }
    }
    (m, m + 2.0 * delta)
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    /// sup over x of |(b_o(x) - b_o'(x)) - b_o(o')|.
    pub max_deviation: f64,
    pub worst_vertex: usize,
    /// `6*delta` plus both fields' error bounds.
    pub bound: f64,
    pub passed: bool,
}

/// Base-point shift consistency: the difference field of two Busemann
/// fields for the same anchor sequence must be constant up to `6*delta`
/// (plus the fields' own error budgets), the constant being the first
/// field's value at the second base.
pub fn basepoint_shift_check(
    field_o: &BusemannField,
    field_o2: &BusemannField,
) -> Result<ShiftReport> {
    if field_o.anchor.sequence != field_o2.anchor.sequence {
        return Err(Error::FieldMismatch { what: "anchor sequence".into() });
    }
    if field_o.values.len() != field_o2.values.len() {
        return Err(Error::FieldMismatch { what: "vertex count".into() });
    }
    let shift = field_o.value(field_o2.base);
    let mut max_deviation: f64 = 0.0;
    let mut worst = 0usize;
    for i in 0..field_o.values.len() {
        let dev = ((field_o.values[i] - field_o2.values[i]) - shift).abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst = i;
        }
    }
    let delta = field_o.delta.max(field_o2.delta);
    let bound = 6.0 * delta + field_o.error_bound + field_o2.error_bound;
    Ok(ShiftReport {
        max_deviation,
        worst_vertex: worst,
        bound,
        passed: max_deviation <= bound + 1e-12,
    })
}
