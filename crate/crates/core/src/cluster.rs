//! Agglomerative clustering with the energy linkage.
//!
//! The distance between clusters A and B is
//!
//! ```text
//! e(A, B) = |A||B| / (|A| + |B|) · (2·mean d(A, B) - mean d(A, A) - mean d(B, B))
//! ```
//!
//! with means over all ordered pairs. Pairwise distance sums between clusters
//! are kept up to date, so each merge costs O(k) for k live clusters.
//! The linkage is not monotone: merge heights may decrease.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::negtype::raw_distance_matrix;
use crate::sphere::{MetricPower, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Dendrogram ids: 0..n are the points, n + k is the cluster created by
    /// merge k.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Cluster label per point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub merges: Vec<Merge>,
}

struct Live {
    id: usize,
    size: usize,
    /// Σ d(i, j) over ordered pairs inside the cluster.
    within: f64,
}

/// Merges the closest pair of clusters under the energy linkage until `k`
/// remain. Ties go to the lexicographically smallest (slot, slot) pair, where a
/// cluster's slot is the smallest point index it contains.
pub fn energy_cluster(points: &[UnitVector], k: usize, r: MetricPower) -> Result<Clustering> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} outside 1..={n}"
        )));
    }
    let dim = points[0].dim();
    for p in points {
        crate::error::check_dims(dim, p.dim())?;
    }
    // between[i][j]: Σ d over ordered pairs (a ∈ slot i, b ∈ slot j), one direction
    let mut between = raw_distance_matrix(points, r);
    let mut live: Vec<Option<Live>> = (0..n)
        .map(|i| {
            Some(Live {
                id: i,
                size: 1,
                within: 0.0,
            })
        })
        .collect();
    let mut slot_of: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - k);

    let linkage = |a: &Live, b: &Live, cross: f64| {
        let (na, nb) = (a.size as f64, b.size as f64);
        let mean_ab = cross / (na * nb);
        let mean_aa = a.within / (na * na);
        let mean_bb = b.within / (nb * nb);
        na * nb / (na + nb) * (2.0 * mean_ab - mean_aa - mean_bb)
    };

    for step in 0..(n - k) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            let Some(a) = &live[i] else { continue };
            for j in (i + 1)..n {
                let Some(b) = &live[j] else { continue };
                let e = linkage(a, b, between[(i, j)]);
                if best.is_none_or(|(_, _, h)| e < h) {
                    best = Some((i, j, e));
                }
            }
        }
        let (i, j, height) = best.expect("at least two live clusters");
        let b = live[j].take().expect("live");
        let a = live[i].as_mut().expect("live");
        merges.push(Merge {
            left: a.id.min(b.id),
            right: a.id.max(b.id),
            height,
            size: a.size + b.size,
        });
        a.within += b.within + 2.0 * between[(i, j)];
        a.size += b.size;
        a.id = n + step;
        for s in 0..n {
            if s != i && live[s].is_some() {
                let v = between[(i, s)] + between[(j, s)];
                between[(i, s)] = v;
                between[(s, i)] = v;
            }
        }
        slot_of.iter_mut().filter(|s| **s == j).for_each(|s| *s = i);
    }

    let mut label_of_slot = vec![usize::MAX; n];
    let mut next = 0;
    let labels = slot_of
        .iter()
        .map(|&s| {
            if label_of_slot[s] == usize::MAX {
                label_of_slot[s] = next;
                next += 1;
            }
            label_of_slot[s]
        })
        .collect();
    Ok(Clustering { labels, merges })
}
