//! Consistency checks over a built network.

use super::classify::classify_junction;
use super::{EdgeId, JunctionType, NodeId, RoadNetwork};

/// Findings from [`validate_graph`]; empty on a healthy graph.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ValidationReport {
    /// `(u, v, e)` present in u's adjacency without the mirrored entry.
    pub asymmetric_adjacency: Vec<(NodeId, NodeId, EdgeId)>,
    /// Edges whose endpoints are missing from the node table or the
    /// corresponding adjacency lists.
    pub dangling_edges: Vec<EdgeId>,
    /// `(node, rederived)` where the stored junction type disagrees with
    /// re-deriving it from the approach bearings.
    pub type_mismatches: Vec<(NodeId, JunctionType)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.asymmetric_adjacency.is_empty()
            && self.dangling_edges.is_empty()
            && self.type_mismatches.is_empty()
    }

    pub fn finding_count(&self) -> usize {
        self.asymmetric_adjacency.len() + self.dangling_edges.len() + self.type_mismatches.len()
    }
}

/// Verify node adjacencies and junction classifications.
///
/// Roundabout nodes are exempt from the type re-derivation: their type comes
/// from cycle or tag evidence, which bearings alone cannot reproduce.
pub fn validate_graph(net: &RoadNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (&u, list) in &net.adjacency {
        for &(v, e) in list {
            let mirrored = net
                .adjacency
                .get(&v)
                .is_some_and(|back| back.contains(&(u, e)));
            if !mirrored {
                report.asymmetric_adjacency.push((u, v, e));
            }
        }
    }

    for edge in net.edges.values() {
        let (a, b) = edge.endpoints;
        let nodes_exist = net.nodes.contains_key(&a) && net.nodes.contains_key(&b);
        let in_adjacency = net
            .adjacency
            .get(&a)
            .is_some_and(|list| list.contains(&(b, edge.id)))
            && net
                .adjacency
                .get(&b)
                .is_some_and(|list| list.contains(&(a, edge.id)) || a == b);
        if !nodes_exist || !in_adjacency {
            report.dangling_edges.push(edge.id);
        }
    }

    for node in net.nodes.values() {
        if node.junction_type == JunctionType::Roundabout || node.approach_bearings.is_empty() {
            continue;
        }
        let rederived = classify_junction(&node.approach_bearings);
        if rederived != node.junction_type {
            report.type_mismatches.push((node.id, rederived));
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::testutil::grid_features;
    use crate::roadnet::{build_graph, detect_roundabouts};

    #[test]
    fn freshly_built_graph_is_clean() {
        let net = build_graph(&grid_features(3, 2), 0.5);
        assert!(validate_graph(&net).is_clean());
        let net = detect_roundabouts(net, 120.0);
        assert!(validate_graph(&net).is_clean());
    }

    #[test]
    fn corrupted_type_is_reported_once() {
        let mut net = build_graph(&grid_features(2, 2), 0.5);
        let victim = *net.nodes.keys().next().unwrap();
        net.nodes.get_mut(&victim).unwrap().junction_type = JunctionType::Y;
        let report = validate_graph(&net);
        assert_eq!(report.type_mismatches.len(), 1);
        assert_eq!(report.finding_count(), 1);
        assert_eq!(report.type_mismatches[0].0, victim);
    }

    #[test]
    fn fault_injection_count_matches_report() {
        // mutate k junction types; the report must contain exactly k entries
        for k in 1..=4usize {
            let mut net = build_graph(&grid_features(3, 3), 0.5);
            let victims: Vec<_> = net.nodes.keys().copied().take(k).collect();
            for id in &victims {
                let node = net.nodes.get_mut(id).unwrap();
                // rotate to a guaranteed-different non-roundabout type
                node.junction_type = match node.junction_type {
                    JunctionType::X => JunctionType::Y,
                    _ => JunctionType::X,
                };
            }
            let report = validate_graph(&net);
            assert_eq!(report.type_mismatches.len(), k);
        }
    }

    #[test]
    fn dropped_adjacency_entry_is_reported() {
        let mut net = build_graph(&grid_features(2, 2), 0.5);
        let (&u, list) = net.adjacency.iter().find(|(_, l)| !l.is_empty()).unwrap();
        let (v, e) = list[0];
        net.adjacency.get_mut(&u).unwrap().retain(|&entry| entry != (v, e));
        let report = validate_graph(&net);
        assert!(!report.is_clean());
        // the mirrored entry is now one-sided and the edge dangles
        assert!(report.asymmetric_adjacency.contains(&(v, u, e)));
        assert!(report.dangling_edges.contains(&e));
    }
}
