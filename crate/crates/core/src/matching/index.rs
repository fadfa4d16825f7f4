//! Nearest-neighbor search over 128-d descriptors.
//!
//! Two modes: an exact linear scan, which is the correctness reference, and
//! a randomized k-d tree forest searched best-bin-first, mirroring the role
//! FLANN plays for large databases.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{MatchingError, RATIO_TEST_THRESHOLD};
use crate::features::{Descriptor, DESCRIPTOR_LEN};

/// Default forest shape: 4 randomized trees, 128 leaf checks.
pub const DEFAULT_TREES: usize = 4;
pub const DEFAULT_CHECKS: usize = 128;
const LEAF_SIZE: usize = 16;
/// Split dimensions are drawn from the top variance dimensions.
const TOP_VARIANCE_POOL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    /// Brute-force scan; exact and deterministic.
    Exact,
    /// Randomized k-d forest with bounded leaf checks; seeded, so still
    /// deterministic for a fixed seed.
    Approximate { trees: usize, checks: usize, seed: u64 },
}

impl Default for IndexMode {
    fn default() -> Self {
        IndexMode::Exact
    }
}

impl IndexMode {
    pub fn approximate() -> Self {
        IndexMode::Approximate {
            trees: DEFAULT_TREES,
            checks: DEFAULT_CHECKS,
            seed: 0x5EED,
        }
    }
}

/// Searchable descriptor set; entry ids are positions in the input list.
#[derive(Debug)]
pub struct DescriptorIndex {
    points: Vec<Descriptor>,
    forest: Option<Forest>,
}

#[derive(Debug)]
struct Forest {
    trees: Vec<Tree>,
    checks: usize,
}

#[derive(Debug)]
struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug)]
enum Node {
    Split {
        dim: usize,
        value: f32,
        left: usize,
        right: usize,
    },
    Leaf {
        indices: Vec<u32>,
    },
}

/// Two nearest distances and the nearest entry id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knn2 {
    pub d1: f32,
    pub d2: f32,
    pub id1: usize,
}

/// One accepted ratio-test match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodMatch {
    pub query_index: usize,
    pub target_id: usize,
    pub distance: f32,
}

/// Build an index over the descriptor list.
pub fn build_index(descriptors: &[Descriptor], mode: IndexMode) -> Result<DescriptorIndex, MatchingError> {
    if descriptors.is_empty() {
        return Err(MatchingError::EmptyInput);
    }
    let points = descriptors.to_vec();
    let forest = match mode {
        IndexMode::Exact => None,
        IndexMode::Approximate { trees, checks, seed } => {
            let trees = trees.max(1);
            let built = (0..trees)
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                    build_tree(&points, &mut rng)
                })
                .collect();
            Some(Forest {
                trees: built,
                checks: checks.max(1),
            })
        }
    };
    Ok(DescriptorIndex { points, forest })
}

impl DescriptorIndex {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Two smallest Euclidean distances (`d1 <= d2`) and the nearest entry id.
pub fn knn2(index: &DescriptorIndex, query: &Descriptor) -> Result<Knn2, MatchingError> {
    if index.points.len() < 2 {
        return Err(MatchingError::InsufficientEntries);
    }
    match &index.forest {
        None => Ok(knn2_linear(&index.points, query, None)),
        Some(forest) => Ok(knn2_forest(&index.points, forest, query)),
    }
}

/// Nearest entry and its distance; works on single-entry indexes.
pub fn nearest(index: &DescriptorIndex, query: &Descriptor) -> (usize, f32) {
    let knn = match &index.forest {
        None => knn2_linear(&index.points, query, None),
        Some(forest) => knn2_forest(&index.points, forest, query),
    };
    (knn.id1, knn.d1)
}

/// The ratio-test decision: accept iff `d1 < ratio * d2` (strict).
#[inline]
pub fn ratio_test(d1: f32, d2: f32, ratio: f32) -> bool {
    d1 < ratio * d2
}

fn knn2_linear(points: &[Descriptor], query: &Descriptor, subset: Option<&[u32]>) -> Knn2 {
    let mut d1 = f32::INFINITY;
    let mut d2 = f32::INFINITY;
    let mut id1 = 0usize;
    let mut consider = |i: usize| {
        let d = points[i].euclidean_distance(query);
        if d < d1 {
            d2 = d1;
            d1 = d;
            id1 = i;
        } else if d < d2 {
            d2 = d;
        }
    };
    match subset {
        None => (0..points.len()).for_each(&mut consider),
        Some(ids) => ids.iter().for_each(|&i| consider(i as usize)),
    }
    Knn2 { d1, d2, id1 }
}

fn knn2_forest(points: &[Descriptor], forest: &Forest, query: &Descriptor) -> Knn2 {
    let mut visited = vec![false; points.len()];
    let mut best = Knn2 {
        d1: f32::INFINITY,
        d2: f32::INFINITY,
        id1: 0,
    };
    let mut checked = 0usize;
    // branch queue ordered by distance to the splitting plane
    let mut queue: BinaryHeap<Reverse<(OrderedF32, usize, usize)>> = BinaryHeap::new();

    let descend = |tree_index: usize,
                       start: usize,
                       queue: &mut BinaryHeap<Reverse<(OrderedF32, usize, usize)>>,
                       visited: &mut Vec<bool>,
                       best: &mut Knn2,
                       checked: &mut usize| {
        let tree = &forest.trees[tree_index];
        let mut node = start;
        loop {
            match &tree.nodes[node] {
                Node::Split { dim, value, left, right } => {
                    let diff = query.values()[*dim] - value;
                    let (near, far) = if diff < 0.0 { (*left, *right) } else { (*right, *left) };
                    queue.push(Reverse((OrderedF32(diff.abs()), tree_index, far)));
                    node = near;
                }
                Node::Leaf { indices } => {
                    for &i in indices {
                        let i = i as usize;
                        if visited[i] {
                            continue;
                        }
                        visited[i] = true;
                        *checked += 1;
                        let d = points[i].euclidean_distance(query);
                        if d < best.d1 {
                            best.d2 = best.d1;
                            best.d1 = d;
                            best.id1 = i;
                        } else if d < best.d2 {
                            best.d2 = d;
                        }
                    }
                    return;
                }
            }
        }
    };

    for t in 0..forest.trees.len() {
        descend(t, 0, &mut queue, &mut visited, &mut best, &mut checked);
    }
    while checked < forest.checks {
        let Some(Reverse((bound, tree_index, node))) = queue.pop() else {
            break;
        };
        // the plane distance lower-bounds every point behind it
        if bound.0 > best.d2 {
            break;
        }
        descend(tree_index, node, &mut queue, &mut visited, &mut best, &mut checked);
    }
    best
}

fn build_tree(points: &[Descriptor], rng: &mut ChaCha8Rng) -> Tree {
    let mut nodes = Vec::new();
    let indices: Vec<u32> = (0..points.len() as u32).collect();
    build_node(points, indices, rng, &mut nodes);
    Tree { nodes }
}

fn build_node(
    points: &[Descriptor],
    indices: Vec<u32>,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let this = nodes.len();
    if indices.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf { indices });
        return this;
    }
    // variance per dimension over this subset
    let mut mean = [0.0f64; DESCRIPTOR_LEN];
    for &i in &indices {
        for (m, &v) in mean.iter_mut().zip(points[i as usize].values()) {
            *m += v as f64;
        }
    }
    let n = indices.len() as f64;
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut variance = [0.0f64; DESCRIPTOR_LEN];
    for &i in &indices {
        for d in 0..DESCRIPTOR_LEN {
            let diff = points[i as usize].values()[d] as f64 - mean[d];
            variance[d] += diff * diff;
        }
    }
    let mut order: Vec<usize> = (0..DESCRIPTOR_LEN).collect();
    order.sort_by(|&a, &b| variance[b].total_cmp(&variance[a]));
    // FLANN-style randomized choice among the highest-variance dimensions
    let dim = order[rng.random_range(0..TOP_VARIANCE_POOL.min(DESCRIPTOR_LEN))];

    if variance[dim] == 0.0 {
        // all remaining points identical across the pool; no useful split
        nodes.push(Node::Leaf { indices });
        return this;
    }

    let split_value = mean[dim] as f32;
    let (left, right): (Vec<u32>, Vec<u32>) = indices
        .iter()
        .partition(|&&i| points[i as usize].values()[dim] < split_value);
    if left.is_empty() || right.is_empty() {
        nodes.push(Node::Leaf { indices });
        return this;
    }

    nodes.push(Node::Split {
        dim,
        value: split_value,
        left: 0,
        right: 0,
    });
    let left_id = build_node(points, left, rng, nodes);
    let right_id = build_node(points, right, rng, nodes);
    if let Node::Split { left, right, .. } = &mut nodes[this] {
        *left = left_id;
        *right = right_id;
    }
    this
}

/// Ratio-test matches of `query_descs` against the index at the fixed
/// threshold [`RATIO_TEST_THRESHOLD`].
///
/// A query descriptor is a good match iff `d1 < 0.75 * d2` (strict). An
/// index with fewer than two entries supports no ratio test and yields no
/// matches.
pub fn good_matches(query_descs: &[Descriptor], index: &DescriptorIndex) -> Vec<GoodMatch> {
    good_matches_with_ratio(query_descs, index, RATIO_TEST_THRESHOLD)
}

pub fn good_matches_with_ratio(
    query_descs: &[Descriptor],
    index: &DescriptorIndex,
    ratio: f32,
) -> Vec<GoodMatch> {
    if index.points.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (query_index, query) in query_descs.iter().enumerate() {
        let knn = match knn2(index, query) {
            Ok(k) => k,
            Err(_) => continue,
        };
        if ratio_test(knn.d1, knn.d2, ratio) {
            out.push(GoodMatch {
                query_index,
                target_id: knn.id1,
                distance: knn.d1,
            });
        }
    }
    out
}

/// Total order wrapper for finite f32 priorities.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedF32(f32);

impl Eq for OrderedF32 {}

impl PartialOrd for OrderedF32 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF32 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
