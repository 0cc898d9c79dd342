//! Gromov products and the four-point hyperbolicity constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::space::{MetricSpace, VertexId};
use crate::{Error, Result};

/// Default vertex cap for the exact quartic scan.
pub const DEFAULT_EXACT_CAP: usize = 300;

/// `(x|y)_o = ((d(x,o) + d(y,o) - d(x,y)) / 2`, clamped at zero against
/// roundoff (it is nonnegative by the triangle inequality).
pub fn gromov_product(space: &MetricSpace, x: VertexId, y: VertexId, o: VertexId) -> f64 {
    (0.5 * (space.dist(x, o) + space.dist(y, o) - space.dist(x, y))).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMode {
    /// Scan every quadruple. Quartic in the vertex count; refuses to run
    /// past the cap.
    Exact { cap: usize },
    /// Max over `count` seeded uniform quadruples: a certified lower
    /// bound on the exact constant.
    Sampled { count: usize, seed: u64 },
}

impl DeltaMode {
    pub fn exact() -> Self {
        DeltaMode::Exact { cap: DEFAULT_EXACT_CAP }
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicityReport {
    /// The four-point constant (exact mode) or a lower bound (sampled).
    pub delta: f64,
    /// Ordered quadruple (x, y, z, o) with
    /// `min((x|z)_o, (z|y)_o) - (x|y)_o = delta`.
    pub witness: [VertexId; 4],
    pub mode: DeltaMode,
}

impl HyperbolicityReport {
    /// Recomputes the witness value through `gromov_product`; callers
    /// assert it reproduces `delta` up to roundoff.
    pub fn witness_value(&self, space: &MetricSpace) -> f64 {
        let [x, y, z, o] = self.witness;
        let a = gromov_product(space, x, z, o);
        let b = gromov_product(space, z, y, o);
        let c = gromov_product(space, x, y, o);
        (a.min(b) - c).max(0.0)
    }
}

/// Four-point hyperbolicity constant
/// `sup min{(x|z)_o, (z|y)_o} - (x|y)_o` over ordered quadruples, clamped
/// at zero.
///
/// The scan runs over unordered quadruples: for points {a,b,c,d} with
/// pair sums s1 = d(a,b)+d(c,d), s2 = d(a,c)+d(b,d), s3 = d(a,d)+d(b,c),
/// the best ordered violation equals (M1 - M2)/2 where M1 >= M2 are the
/// two largest sums. Quadruples with repeated points never exceed zero,
/// so skipping them is lossless under the clamp.
pub fn delta_four_point(space: &MetricSpace, mode: DeltaMode) -> Result<HyperbolicityReport> {
    let n = space.vertex_count();
    match mode {
        DeltaMode::Exact { cap } => {
            if n > cap {
                return Err(Error::ExactCapExceeded { n, cap });
            }
            let (sup, witness) = exact_scan(space);
            Ok(finish_report(sup, witness, mode))
        }
        DeltaMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::EmptySample);
            }
            let (sup, witness) = sampled_scan(space, count, seed);
            Ok(finish_report(sup, witness, mode))
        }
    }
}

fn finish_report(sup: f64, witness: Option<[usize; 4]>, mode: DeltaMode) -> HyperbolicityReport {
    if sup > 0.0 {
        let w = witness.expect("positive sup carries a witness");
        HyperbolicityReport {
            delta: sup,
            witness: [VertexId(w[0]), VertexId(w[1]), VertexId(w[2]), VertexId(w[3])],
            mode,
        }
    } else {
        // Clamped case: the degenerate quadruple (v,v,v,v) attains 0.
        HyperbolicityReport {
            delta: 0.0,
            witness: [VertexId(0); 4],
            mode,
        }
    }
}

/// Unordered violation for one quadruple given its three pair sums, and
/// the ordered witness realizing it.
#[inline]
fn order_witness(i: usize, j: usize, k: usize, l: usize, s1: f64, s2: f64, s3: f64) -> [usize; 4] {
    // (x,y) is the pair in the largest sum, (z,o) the complementary pair.
    if s1 >= s2 && s1 >= s3 {
        [i, j, k, l]
    } else if s2 >= s3 {
        [i, k, j, l]
    } else {
        [i, l, j, k]
    }
}

// Select-based min/max: distances are finite and non-NaN, and these
// lower to plain vector max/min instructions (f64::max does not, because
// of its NaN-propagation contract).
#[inline(always)]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn quad_violation(s1: f64, s2: f64, s3: f64) -> f64 {
    let hi = fmax(s1, s2);
    let lo = fmin(s1, s2);
    let m1 = fmax(hi, s3);
    let m2 = fmax(lo, fmin(hi, s3));
    m1 - m2
}

fn exact_scan(space: &MetricSpace) -> (f64, Option<[usize; 4]>) {
    let n = space.vertex_count();
    if n < 4 {
        return (0.0, None);
    }
    let dist = space.dist_matrix();

    let best = (0..n - 3)
        .into_par_iter()
        .map(|i| {
            let di = dist.row(VertexId(i));
            let mut local: (f64, Option<[usize; 4]>) = (f64::NEG_INFINITY, None);
            for j in (i + 1)..(n - 2) {
                let dj = dist.row(VertexId(j));
                let dij = di[j];
                for k in (j + 1)..(n - 1) {
                    let dk = dist.row(VertexId(k));
                    let dik = di[k];
                    let djk = dj[k];
                    // Tight inner loop: equal-length subslices so bounds
                    // checks vanish, four accumulators so the max
                    // reduction vectorizes; the witness is recovered on
                    // improvement only.
                    let ri = &di[k + 1..n];
                    let rj = &dj[k + 1..n];
                    let rk = &dk[k + 1..n];
                    let len = ri.len();
                    let rj = &rj[..len];
                    let rk = &rk[..len];
                    let mut acc = [f64::NEG_INFINITY; 8];
                    let mut chunks_i = ri.chunks_exact(8);
                    let mut chunks_j = rj.chunks_exact(8);
                    let mut chunks_k = rk.chunks_exact(8);
                    for ((ci, cj), ck) in (&mut chunks_i).zip(&mut chunks_j).zip(&mut chunks_k) {
                        for lane in 0..8 {
                            let v = quad_violation(dij + ck[lane], dik + cj[lane], ci[lane] + djk);
                            acc[lane] = fmax(acc[lane], v);
                        }
                    }
                    let mut row_max = f64::NEG_INFINITY;
                    for lane in 0..8 {
                        row_max = fmax(row_max, acc[lane]);
                    }
                    for ((a, b), c) in chunks_i
                        .remainder()
                        .iter()
                        .zip(chunks_j.remainder())
                        .zip(chunks_k.remainder())
                    {
                        row_max = fmax(row_max, quad_violation(dij + c, dik + b, a + djk));
                    }
                    if row_max > local.0 {
                        // Rescan this row for the first l attaining it; scan
                        // order is lexicographic so the first hit is the
                        // lexicographically smallest witness.
                        for l in (k + 1)..n {
                            let s1 = dij + dk[l];
                            let s2 = dik + dj[l];
                            let s3 = di[l] + djk;
                            if quad_violation(s1, s2, s3) == row_max {
                                local = (row_max, Some(order_witness(i, j, k, l, s1, s2, s3)));
                                break;
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(
            || (f64::NEG_INFINITY, None),
            // Larger value wins; on exact ties the lexicographically
            // smaller witness wins, keeping the reduction order-free.
            |a, b| {
                if b.0 > a.0 {
                    b
                } else if b.0 == a.0 {
                    match (a.1, b.1) {
                        (Some(wa), Some(wb)) if wb < wa => b,
                        (None, Some(_)) => b,
                        _ => a,
                    }
                } else {
                    a
                }
            },
        );

    (0.5 * best.0, best.1)
}

fn sampled_scan(space: &MetricSpace, count: usize, seed: u64) -> (f64, Option<[usize; 4]>) {
    let n = space.vertex_count();
    let dist = space.dist_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: (f64, Option<[usize; 4]>) = (f64::NEG_INFINITY, None);
    for _ in 0..count {
        let q: [usize; 4] = [
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        ];
        let [i, j, k, l] = q;
        let d = |a: usize, b: usize| dist.get(VertexId(a), VertexId(b));
        let s1 = d(i, j) + d(k, l);
        let s2 = d(i, k) + d(j, l);
        let s3 = d(i, l) + d(j, k);
        let mut sums = [s1, s2, s3];
        sums.sort_by(f64::total_cmp);
        let v = sums[2] - sums[1];
        if v > best.0 {
            best = (v, Some(order_witness(i, j, k, l, s1, s2, s3)));
        }
    }
    (0.5 * best.0, best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, GraphSpec};

    fn unit_cycle(n: usize) -> MetricSpace {
        let mut spec = GraphSpec::default();
        for i in 0..n {
            spec.vertex(format!("{i}"), None);
        }
        for i in 0..n {
            spec.edge(format!("{i}"), format!("{}", (i + 1) % n), 1.0);
        }
        build_space(&spec).unwrap()
    }

    fn path(lens: &[f64]) -> MetricSpace {
        let mut spec = GraphSpec::default();
        for i in 0..=lens.len() {
            spec.vertex(format!("p{i}"), None);
        }
        for (i, &l) in lens.iter().enumerate() {
            spec.edge(format!("p{i}"), format!("p{}", i + 1), l);
        }
        build_space(&spec).unwrap()
    }

    #[test]
    fn product_on_geodesic_is_zero() {
        let s = path(&[2.0, 2.0]);
        let (a, o, b) = (
            s.vertex("p0").unwrap(),
            s.vertex("p1").unwrap(),
            s.vertex("p2").unwrap(),
        );
        assert_eq!(gromov_product(&s, a, b, o), 0.0);
    }

    #[test]
    fn product_with_self_is_distance() {
        let s = path(&[2.0, 2.0]);
        let (a, o) = (s.vertex("p0").unwrap(), s.vertex("p1").unwrap());
        assert_eq!(gromov_product(&s, a, a, o), s.dist(a, o));
    }

    #[test]
    fn product_symmetry() {
        let s = unit_cycle(5);
        for x in s.vertices() {
            for y in s.vertices() {
                for o in s.vertices() {
                    assert_eq!(
                        gromov_product(&s, x, y, o),
                        gromov_product(&s, y, x, o)
                    );
                }
            }
        }
    }

    #[test]
    fn four_cycle_product_hand_value() {
        // Unit 4-cycle: d(1,0)=1, d(2,0)=2, d(1,2)=1, so (1|2)_0 = 1.
        let s = unit_cycle(4);
        let v = |i: usize| s.vertex(&i.to_string()).unwrap();
        assert_eq!(gromov_product(&s, v(1), v(2), v(0)), 1.0);
    }

    /// Independent oracle: the sup straight from the definition over all
    /// ordered quadruples.
    fn delta_bruteforce(s: &MetricSpace) -> f64 {
        let mut sup: f64 = 0.0;
        for x in s.vertices() {
            for y in s.vertices() {
                for z in s.vertices() {
                    for o in s.vertices() {
                        let v = gromov_product(s, x, z, o)
                            .min(gromov_product(s, z, y, o))
                            - gromov_product(s, x, y, o);
                        sup = sup.max(v);
                    }
                }
            }
        }
        sup
    }

    #[test]
    fn exact_matches_bruteforce_on_four_cycle() {
        let s = unit_cycle(4);
        let report = delta_four_point(&s, DeltaMode::exact()).unwrap();
        assert_eq!(report.delta, delta_bruteforce(&s));
        assert_eq!(report.delta, 1.0);
        assert!((report.witness_value(&s) - report.delta).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_bruteforce_on_weighted_cycles() {
        for n in [5, 6, 7] {
            let s = unit_cycle(n);
            let report = delta_four_point(&s, DeltaMode::exact()).unwrap();
            let oracle = delta_bruteforce(&s);
            assert!(
                (report.delta - oracle).abs() < 1e-12,
                "n={n}: {} vs {}",
                report.delta,
                oracle
            );
            assert!((report.witness_value(&s) - report.delta).abs() < 1e-12);
        }
    }

    #[test]
    fn trees_are_zero_hyperbolic() {
        let s = path(&[1.0, 0.5, 2.0, 1.25]);
        let report = delta_four_point(&s, DeltaMode::exact()).unwrap();
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn two_vertex_space_is_zero() {
        let s = path(&[3.0]);
        let report = delta_four_point(&s, DeltaMode::exact()).unwrap();
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn sampled_is_lower_bound() {
        let s = unit_cycle(9);
        let exact = delta_four_point(&s, DeltaMode::exact()).unwrap().delta;
        for seed in 0..5 {
            let sampled = delta_four_point(&s, DeltaMode::Sampled { count: 200, seed })
                .unwrap()
                .delta;
            assert!(sampled <= exact + 1e-15);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let s = unit_cycle(12);
        let err = delta_four_point(&s, DeltaMode::Exact { cap: 10 }).unwrap_err();
        assert!(matches!(err, Error::ExactCapExceeded { n: 12, cap: 10 }));
    }
}
