use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lexical::TfidfVector;

const MAX_ITERATIONS: usize = 100;

/// Cluster label per chunk, in the order the chunks were clustered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub num_clusters: usize,
}

impl ClusterAssignment {
    pub fn cluster_of(&self, chunk_id: &str) -> Option<usize> {
        self.ids
            .iter()
            .position(|id| id == chunk_id)
            .map(|i| self.labels[i])
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Position of each cluster's first member; with rank-ordered input this
    /// is the rank of the cluster's best document.
    pub fn first_positions(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.num_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            first[l] = first[l].min(i);
        }
        first
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = &str> {
        self.ids
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == cluster)
            .map(|(id, _)| id.as_str())
    }
}

fn densify(vectors: &[(String, TfidfVector)]) -> Vec<Vec<f64>> {
    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, v) in vectors {
        for t in v.weights.keys() {
            let next = vocab.len();
            vocab.entry(t.as_str()).or_insert(next);
        }
    }
    vectors
        .iter()
        .map(|(_, v)| {
            let mut row = vec![0.0; vocab.len()];
            for (t, w) in &v.weights {
                row[vocab[t.as_str()]] = *w;
            }
            row
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with Euclidean distance.
///
/// Input is expected in rank order. Initialisation is farthest-point: the
/// point at index `seed % len` (the top-ranked document for `seed = 0`), then
/// repeatedly the point farthest from all chosen centres, lowest index on
/// ties. Empty clusters take the point farthest from its own centroid.
/// Labels are finally renumbered by first appearance, so cluster 0 holds
/// the first document.
pub fn kmeans(
    vectors: &[(String, TfidfVector)],
    num_clusters: usize,
    seed: u64,
) -> ClusterAssignment {
    let ids: Vec<String> = vectors.iter().map(|(id, _)| id.clone()).collect();
    let n = vectors.len();
    if n == 0 {
        return ClusterAssignment::default();
    }
    let k = num_clusters.max(1);
    if n <= k {
        return ClusterAssignment {
            ids,
            labels: (0..n).collect(),
            num_clusters: n,
        };
    }

    let points = densify(vectors);
    let mut centroids = farthest_point_init(&points, k, (seed % n as u64) as usize);
    let mut labels = assign(&points, &centroids, None);
    for _ in 0..MAX_ITERATIONS {
        repair_empty(&points, &mut centroids, &mut labels);
        centroids = update_centroids(&points, &labels, k);
        let next = assign(&points, &centroids, Some(&labels));
        if next == labels {
            break;
        }
        labels = next;
    }
    repair_empty(&points, &mut centroids, &mut labels);

    ClusterAssignment {
        ids,
        labels: relabel_by_first_appearance(&labels, k),
        num_clusters: k,
    }
}

fn farthest_point_init(points: &[Vec<f64>], k: usize, anchor: usize) -> Vec<Vec<f64>> {
    let mut chosen = vec![anchor];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[anchor])).collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| min_d[i] > min_d[b]) {
                best = Some(i);
            }
        }
        let next = best.expect("more points than clusters");
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], current: Option<&[usize]>) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dists: Vec<f64> = centroids.iter().map(|c| sq_dist(p, c)).collect();
            let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
            // Stay put on a tie; otherwise the lowest cluster index wins.
            match current {
                Some(cur) if dists[cur[i]] == best => cur[i],
                _ => dists.iter().position(|&d| d == best).unwrap_or(0),
            }
        })
        .collect()
}

fn update_centroids(points: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], labels: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[labels[i]]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        let Some((i, _)) = donor else { return };
        labels[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

fn relabel_by_first_appearance(labels: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(rows: &[&[(&str, f64)]]) -> Vec<(String, TfidfVector)> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = TfidfVector::default();
                for (t, w) in r.iter() {
                    v.weights.insert(t.to_string(), *w);
                }
                let norm = v.norm();
                if norm > 0.0 {
                    v.weights.values_mut().for_each(|w| *w /= norm);
                }
                (format!("d{i}"), v)
            })
            .collect()
    }

    #[test]
    fn identical_points_spread_deterministically() {
        let v = vecs(&[&[("a", 1.0)], &[("a", 1.0)], &[("a", 1.0)]]);
        let a = kmeans(&v, 3, 0);
        assert_eq!(a.labels, [0, 1, 2]);
        assert_eq!(a, kmeans(&v, 3, 0));
    }

    #[test]
    fn identical_points_more_than_clusters() {
        let point: &[(&str, f64)] = &[("a", 1.0)];
        let v = vecs(&[point; 5]);
        let a = kmeans(&v, 3, 0);
        assert_eq!(a.sizes().iter().filter(|&&s| s > 0).count(), 3);
        assert_eq!(a.labels[0], 0);
    }

    #[test]
    fn single_cluster() {
        let v = vecs(&[
            &[("a", 1.0)],
            &[("b", 1.0)],
            &[("c", 1.0)],
            &[("a", 1.0), ("b", 1.0)],
        ]);
        let a = kmeans(&v, 1, 0);
        assert_eq!(a.labels, [0, 0, 0, 0]);
        assert_eq!(a.num_clusters, 1);
    }

    #[test]
    fn fewer_points_than_clusters() {
        let v = vecs(&[&[("a", 1.0)], &[("b", 1.0)]]);
        let a = kmeans(&v, 3, 0);
        assert_eq!(a.labels, [0, 1]);
        assert_eq!(a.num_clusters, 2);
        assert_eq!(kmeans(&[], 3, 0), ClusterAssignment::default());
    }

    #[test]
    fn separated_groups() {
        let v = vecs(&[
            &[("mask", 1.0), ("policy", 0.2)],
            &[("vaccine", 1.0), ("trial", 0.3)],
            &[("mask", 1.0), ("policy", 0.3)],
            &[("vaccine", 1.0), ("trial", 0.1)],
            &[("mask", 0.9), ("policy", 0.1)],
        ]);
        let a = kmeans(&v, 2, 0);
        assert_eq!(a.labels, [0, 1, 0, 1, 0]);
        assert_eq!(a.first_positions(), [0, 1]);
    }

    #[test]
    fn zero_vectors_are_clusterable() {
        let v = vecs(&[&[], &[("a", 1.0)], &[("a", 1.0)], &[]]);
        let a = kmeans(&v, 2, 0);
        assert_eq!(a.labels, [0, 1, 1, 0]);
    }
}
