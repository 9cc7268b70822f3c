use super::kmeans::ClusterAssignment;
use crate::ranking::{RankedEntry, RankedList, ScoreSource};

/// Take each cluster's `allocation[c]` best members, keeping pool order.
pub fn diversity_select(
    pool: &RankedList,
    assignment: &ClusterAssignment,
    allocation: &[usize],
) -> RankedList {
    let mut taken = vec![0usize; allocation.len()];
    pool.iter()
        .filter(|e| match assignment.cluster_of(&e.chunk_id) {
            Some(c) if c < allocation.len() && taken[c] < allocation[c] => {
                taken[c] += 1;
                true
            }
            _ => false,
        })
        .map(|e| RankedEntry {
            chunk_id: e.chunk_id.clone(),
            score: e.score,
            source: ScoreSource::Diversity,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(ids: &[&str]) -> RankedList {
        ids.iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                chunk_id: id.to_string(),
                score: 10.0 - i as f64,
                source: ScoreSource::Bm25,
            })
            .collect()
    }

    fn assignment(ids: &[&str], labels: &[usize], k: usize) -> ClusterAssignment {
        ClusterAssignment {
            ids: ids.iter().map(|s| s.to_string()).collect(),
            labels: labels.to_vec(),
            num_clusters: k,
        }
    }

    #[test]
    fn one_per_cluster_keeps_rank_order() {
        let ids = ["A", "B", "C", "D"];
        let a = assignment(&ids, &[0, 1, 0, 1], 2);
        let out = diversity_select(&pool(&ids), &a, &[1, 1]);
        assert_eq!(out.ids().collect::<Vec<_>>(), ["A", "B"]);
        let out = diversity_select(&pool(&ids), &a, &[2, 0]);
        assert_eq!(out.ids().collect::<Vec<_>>(), ["A", "C"]);
    }

    #[test]
    fn single_cluster_is_top_l() {
        let ids = ["A", "B", "C", "D"];
        let a = assignment(&ids, &[0, 0, 0, 0], 1);
        let out = diversity_select(&pool(&ids), &a, &[3]);
        assert_eq!(out.ids().collect::<Vec<_>>(), ["A", "B", "C"]);
    }

    #[test]
    fn promoted_members_stay_below_higher_ranks() {
        let ids = ["A", "B", "C", "D", "E"];
        let a = assignment(&ids, &[0, 0, 0, 0, 1], 2);
        let out = diversity_select(&pool(&ids), &a, &[2, 1]);
        assert_eq!(out.ids().collect::<Vec<_>>(), ["A", "B", "E"]);
        assert!(out.iter().all(|e| e.source == ScoreSource::Diversity));
    }
}
