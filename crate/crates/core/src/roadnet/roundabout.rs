//! Roundabout detection from cycle geometry and way tags.

use std::collections::BTreeSet;

use super::{EdgeId, JunctionType, NodeId, RoadNetwork};

/// Perimeter bound below which a simple cycle is treated as a roundabout
/// even without tags.
pub const DEFAULT_MAX_ROUNDABOUT_PERIMETER_M: f64 = 120.0;

/// Node-count guard for the tagged-cycle search; real roundabout circles
/// stay far below this.
const MAX_TAGGED_CYCLE_NODES: usize = 256;

/// Retype every node lying on a roundabout cycle.
///
/// Two kinds of evidence are combined: simple cycles whose total edge length
/// is at most `max_perimeter`, and simple cycles made of edges tagged
/// `roundabout` (no length bound). All other node types are left unchanged.
pub fn detect_roundabouts(mut net: RoadNetwork, max_perimeter: f64) -> RoadNetwork {
    let mut members: BTreeSet<NodeId> = BTreeSet::new();

    for &start in net.nodes.keys().collect::<Vec<_>>().iter() {
        let mut walker = CycleWalker {
            net: &net,
            start: *start,
            members: &mut members,
            max_length: Some(max_perimeter),
            tagged_only: false,
            max_nodes: usize::MAX,
        };
        walker.run();
        let mut tagged = CycleWalker {
            net: &net,
            start: *start,
            members: &mut members,
            max_length: None,
            tagged_only: true,
            max_nodes: MAX_TAGGED_CYCLE_NODES,
        };
        tagged.run();
    }

    for id in members {
        if let Some(node) = net.nodes.get_mut(&id) {
            node.junction_type = JunctionType::Roundabout;
        }
    }
    net
}

/// Depth-first enumeration of simple cycles through `start`, recording the
/// member nodes of every qualifying cycle. Only cycles whose minimum node id
/// equals `start` are expanded, so each cycle is visited once.
struct CycleWalker<'a> {
    net: &'a RoadNetwork,
    start: NodeId,
    members: &'a mut BTreeSet<NodeId>,
    max_length: Option<f64>,
    tagged_only: bool,
    max_nodes: usize,
}

impl CycleWalker<'_> {
    fn run(&mut self) {
        let mut path = vec![self.start];
        let mut used_edges = BTreeSet::new();
        self.dfs(self.start, 0.0, &mut path, &mut used_edges);
    }

    fn usable(&self, edge: EdgeId) -> bool {
        !self.tagged_only
            || self
                .net
                .edge(edge)
                .is_some_and(|e| e.road_class == "roundabout")
    }

    fn dfs(
        &mut self,
        at: NodeId,
        length: f64,
        path: &mut Vec<NodeId>,
        used_edges: &mut BTreeSet<EdgeId>,
    ) {
        if path.len() > self.max_nodes {
            return;
        }
        for &(next, edge) in self.net.neighbors(at) {
            if used_edges.contains(&edge) || !self.usable(edge) {
                continue;
            }
            let edge_len = self.net.edge(edge).map(|e| e.length).unwrap_or(0.0);
            let total = length + edge_len;
            if self.max_length.is_some_and(|max| total > max) {
                continue;
            }
            if next == self.start {
                // closed a simple cycle; self-loops count with a single edge
                self.members.extend(path.iter().copied());
                continue;
            }
            if next < self.start || path.contains(&next) {
                continue;
            }
            used_edges.insert(edge);
            path.push(next);
            self.dfs(next, total, path, used_edges);
            path.pop();
            used_edges.remove(&edge);
        }
    }
}
