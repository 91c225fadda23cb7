//! Slow reference implementations used to cross-check the fast paths.
//!
//! These are deliberately naive and share no code with the routines they
//! verify beyond the input types.

use crate::curvature::{unit_ball_volume, RadiusSchedule, RatioPoint};
use crate::graph::WeightedGraph;
use crate::intrinsic::DensityField;
use crate::metric::Metric;

/// All-pairs shortest paths by Floyd–Warshall, `O(V³)`.
pub fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.n_nodes();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        for (j, w) in g.neighbors(i) {
            row[j] = row[j].min(w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            for j in 0..n {
                if dik + d[k][j] < d[i][j] {
                    d[i][j] = dik + d[k][j];
                }
            }
        }
    }
    d
}

/// Ball volume as `Σ 1/ρ̂(z) / (N − 1)` over the ball, excluding the center.
pub fn ball_volume_inverse_sum<M: Metric + ?Sized>(
    d: &M,
    field: &DensityField,
    x: usize,
    r: f64,
) -> f64 {
    let mut sum = 0.0;
    for z in 0..d.len() {
        if z != x && d.distance(x, z) <= r {
            sum += 1.0 / field.get(z);
        }
    }
    sum / (d.len() - 1) as f64
}

/// Ratio sequence recomputed from scratch at every radius, summing over the
/// neighbors in `(distance, index)` order.
pub fn ratio_sequence_direct<M: Metric + ?Sized>(
    d: &M,
    field: &DensityField,
    x: usize,
    schedule: &RadiusSchedule,
    n_hat: usize,
) -> Vec<RatioPoint> {
    let mut order: Vec<usize> = (0..d.len()).filter(|&z| z != x).collect();
    order.sort_by(|&a, &b| {
        d.distance(x, a)
            .total_cmp(&d.distance(x, b))
            .then(a.cmp(&b))
    });
    let unit = unit_ball_volume(n_hat);
    schedule
        .radii()
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| {
            let mut sum = 0.0;
            for &z in &order {
                if d.distance(x, z) <= r {
                    sum += 1.0 / field.get(z);
                }
            }
            let volume = sum * (1.0 / (d.len() - 1) as f64);
            RatioPoint {
                radius: r,
                ratio: volume / (unit * r.powi(n_hat as i32)),
            }
        })
        .collect()
}

/// Largest triangle-inequality violation `d(i,k) − d(i,j) − d(j,k)` over all
/// triples (nonpositive for a metric).
pub fn worst_triangle_violation<M: Metric + ?Sized>(d: &M) -> f64 {
    let n = d.len();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max(d.distance(i, k) - d.distance(i, j) - d.distance(j, k));
            }
        }
    }
    worst
}
