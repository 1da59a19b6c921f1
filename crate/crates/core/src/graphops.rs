//! Subgraph machinery: random-walk-with-restart sampling and weighted
//! densest-subgraph peeling.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, Triple};
use crate::seeds;

/// A node set with its induced facts. The induced closure (every fact of
/// the graph with both endpoints in the node set) makes the triple set a
/// function of the nodes alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphSample {
    /// Sorted ascending.
    pub nodes: Vec<EntityId>,
    /// In fact-insertion order of the owning graph.
    pub triples: Vec<Triple>,
    /// Walk provenance, absent for subgraphs not produced by a walk.
    pub origin: Option<WalkOrigin>,
}

/// Where a walked sample started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOrigin {
    pub start: EntityId,
    pub seed: u64,
}

/// An edge with a nonnegative weight (a ReliK value or a reciprocal-rank
/// value in the bundled pipelines).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedTriple {
    pub triple: Triple,
    pub weight: f64,
}

/// One peeling iteration: the densest subgraph of the residual weighted
/// graph, with the weighted edges it removes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelLayer {
    pub sample: SubgraphSample,
    pub edges: Vec<WeightedTriple>,
    pub density: f64,
}

fn induced_triples(kg: &KnowledgeGraph, nodes: &HashSet<EntityId>) -> Vec<Triple> {
    kg.facts()
        .iter()
        .copied()
        .filter(|t| nodes.contains(&t.head) && nodes.contains(&t.tail))
        .collect()
}

fn sorted_nodes(nodes: &HashSet<EntityId>) -> Vec<EntityId> {
    let mut v: Vec<EntityId> = nodes.iter().copied().collect();
    v.sort_unstable();
    v
}

/// Undirected component of `start` over the fact graph.
fn component_size(kg: &KnowledgeGraph, start: EntityId) -> usize {
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(e) = queue.pop_front() {
        for f in kg.incident_facts(e) {
            for other in [f.head, f.tail] {
                if seen.insert(other) {
                    queue.push_back(other);
                }
            }
        }
    }
    seen.len()
}

/// Sample a connected neighborhood by a random walk with restart.
///
/// The start node is uniform over entities incident to at least one fact.
/// Each step first restarts to the start node with `restart_prob`,
/// otherwise moves along a uniformly chosen incident fact, ignoring
/// direction. Nodes accumulate until the sample holds
/// `min(target_nodes, component size)` of them; the returned triples are
/// the induced closure over the sampled nodes.
pub fn rwr_subgraph<R: Rng>(
    kg: &KnowledgeGraph,
    target_nodes: usize,
    restart_prob: f64,
    rng: &mut R,
    seed_label: u64,
) -> Result<SubgraphSample> {
    if target_nodes == 0 {
        return Err(Error::Config("target node count must be positive".into()));
    }
    if !(0.0..1.0).contains(&restart_prob) {
        return Err(Error::Config(format!(
            "restart probability {restart_prob} must lie in [0, 1); 1 would pin the walk to its start"
        )));
    }
    if kg.fact_count() == 0 {
        return Err(Error::Config("graph has no facts to walk".into()));
    }
    let connected: Vec<EntityId> = (0..kg.entity_count() as u32)
        .map(EntityId)
        .filter(|&e| kg.degree(e).unwrap_or(0) > 0)
        .collect();
    let start = connected[rng.random_range(0..connected.len())];
    let target = target_nodes.min(component_size(kg, start));

    let mut nodes = HashSet::from([start]);
    let mut cur = start;
    let budget = 1_000_000u64.saturating_mul(target_nodes as u64);
    let mut steps = 0u64;
    while nodes.len() < target {
        if steps >= budget {
            return Err(Error::WalkTruncated {
                steps,
                target,
                partial: SubgraphSample {
                    triples: induced_triples(kg, &nodes),
                    nodes: sorted_nodes(&nodes),
                    origin: Some(WalkOrigin { start, seed: seed_label }),
                },
            });
        }
        steps += 1;
        if rng.random_range(0.0..1.0) < restart_prob {
            cur = start;
            continue;
        }
        let deg = kg.degree(cur).unwrap() as usize;
        let pick = rng.random_range(0..deg);
        let fact = kg.incident_facts(cur).nth(pick).unwrap();
        cur = if pick < kg.head_count(cur).unwrap() as usize {
            fact.tail
        } else {
            fact.head
        };
        nodes.insert(cur);
    }
    Ok(SubgraphSample {
        triples: induced_triples(kg, &nodes),
        nodes: sorted_nodes(&nodes),
        origin: Some(WalkOrigin { start, seed: seed_label }),
    })
}

/// Convenience wrapper deriving the walk generator from a seed.
pub fn rwr_subgraph_seeded(
    kg: &KnowledgeGraph,
    target_nodes: usize,
    restart_prob: f64,
    seed: u64,
) -> Result<SubgraphSample> {
    rwr_subgraph(kg, target_nodes, restart_prob, &mut seeds::rng(seed), seed)
}

struct WeightedGraph {
    /// Node order: first appearance in the weight list.
    nodes: Vec<EntityId>,
    /// Edges as (endpoint index, endpoint index, weight, input position).
    edges: Vec<(usize, usize, f64, usize)>,
}

impl WeightedGraph {
    fn build(kg: &KnowledgeGraph, weights: &[WeightedTriple]) -> Result<Self> {
        let mut index: HashMap<EntityId, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::with_capacity(weights.len());
        for (pos, wt) in weights.iter().enumerate() {
            kg.contains(wt.triple)?; // id validity against the owning graph
            if !(wt.weight.is_finite() && wt.weight >= 0.0) {
                return Err(Error::Input(format!(
                    "edge weight {} must be finite and nonnegative",
                    wt.weight
                )));
            }
            let mut id = |e: EntityId| {
                *index.entry(e).or_insert_with(|| {
                    nodes.push(e);
                    nodes.len() - 1
                })
            };
            let u = id(wt.triple.head);
            let v = id(wt.triple.tail);
            edges.push((u, v, wt.weight, pos));
        }
        Ok(WeightedGraph { nodes, edges })
    }
}

/// Charikar's greedy peeling on a weighted multigraph.
///
/// Repeatedly removes the node of minimum weighted degree (ties broken by
/// smallest entity id) and returns the intermediate node set of maximum
/// density, where density is total remaining edge weight over remaining
/// node count. The result is within a factor two of the optimum. Parallel
/// edges add to weighted degree, and a self-loop counts once.
///
/// With all-zero weights every density is zero; the single node with the
/// most incident edges (smallest id on ties) is returned.
pub fn densest_subgraph(
    kg: &KnowledgeGraph,
    weights: &[WeightedTriple],
) -> Result<(Vec<EntityId>, f64)> {
    if weights.is_empty() {
        return Err(Error::Input("densest subgraph of an empty edge list".into()));
    }
    let g = WeightedGraph::build(kg, weights)?;
    let n = g.nodes.len();
    if g.edges.iter().all(|&(_, _, w, _)| w == 0.0) {
        let mut counts = vec![0usize; n];
        for &(u, v, _, _) in &g.edges {
            counts[u] += 1;
            if u != v {
                counts[v] += 1;
            }
        }
        let best = (0..n)
            .max_by(|&a, &b| {
                counts[a]
                    .cmp(&counts[b])
                    .then_with(|| g.nodes[b].cmp(&g.nodes[a]))
            })
            .unwrap();
        return Ok((vec![g.nodes[best]], 0.0));
    }

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, v, _, _)) in g.edges.iter().enumerate() {
        adj[u].push(i);
        if u != v {
            adj[v].push(i);
        }
    }
    let mut degree: Vec<f64> = vec![0.0; n];
    let mut total = 0.0;
    for &(u, v, w, _) in &g.edges {
        degree[u] += w;
        if u != v {
            degree[v] += w;
        }
        total += w;
    }
    let mut alive = vec![true; n];
    let mut edge_alive = vec![true; g.edges.len()];
    let mut alive_count = n;
    let mut removal_order = Vec::with_capacity(n);

    let mut best_density = total / n as f64;
    let mut best_removed = 0usize;
    while alive_count > 1 {
        // linear min scan keeps the tie rule exact; graphs here are small
        let victim = (0..n)
            .filter(|&i| alive[i])
            .min_by(|&a, &b| {
                degree[a]
                    .partial_cmp(&degree[b])
                    .unwrap()
                    .then_with(|| g.nodes[a].cmp(&g.nodes[b]))
            })
            .unwrap();
        for &ei in &adj[victim] {
            if !edge_alive[ei] {
                continue;
            }
            edge_alive[ei] = false;
            let (u, v, w, _) = g.edges[ei];
            total -= w;
            degree[u] -= w;
            if u != v {
                degree[v] -= w;
            }
        }
        alive[victim] = false;
        alive_count -= 1;
        removal_order.push(victim);
        let density = total / alive_count as f64;
        // ties prefer the later, smaller state, so disjoint equally dense
        // components peel one at a time
        if density >= best_density {
            best_density = density;
            best_removed = removal_order.len();
        }
    }

    let removed: HashSet<usize> = removal_order[..best_removed].iter().copied().collect();
    let mut keep: Vec<EntityId> = (0..n)
        .filter(|i| !removed.contains(i))
        .map(|i| g.nodes[i])
        .collect();
    keep.sort_unstable();
    Ok((keep, best_density))
}

/// Iterated densest-subgraph extraction.
///
/// Each layer takes the densest subgraph of the remaining weighted edges
/// and removes the edges induced by its node set, until no edge remains.
/// Concatenating the layers' edge lists reproduces the input multiset.
/// When only zero-weight edges remain they are emitted as one final layer.
pub fn peel_decomposition(
    kg: &KnowledgeGraph,
    weights: &[WeightedTriple],
) -> Result<Vec<PeelLayer>> {
    let mut remaining: Vec<WeightedTriple> = weights.to_vec();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        if remaining.iter().all(|wt| wt.weight == 0.0) {
            let nodes: HashSet<EntityId> = remaining
                .iter()
                .flat_map(|wt| [wt.triple.head, wt.triple.tail])
                .collect();
            layers.push(PeelLayer {
                sample: SubgraphSample {
                    nodes: sorted_nodes(&nodes),
                    triples: remaining.iter().map(|wt| wt.triple).collect(),
                    origin: None,
                },
                edges: std::mem::take(&mut remaining),
                density: 0.0,
            });
            break;
        }
        let (nodes, density) = densest_subgraph(kg, &remaining)?;
        let node_set: HashSet<EntityId> = nodes.iter().copied().collect();
        let (peeled, rest): (Vec<WeightedTriple>, Vec<WeightedTriple>) =
            remaining.into_iter().partition(|wt| {
                node_set.contains(&wt.triple.head) && node_set.contains(&wt.triple.tail)
            });
        debug_assert!(!peeled.is_empty(), "densest subgraph induced no edges");
        layers.push(PeelLayer {
            sample: SubgraphSample {
                nodes,
                triples: peeled.iter().map(|wt| wt.triple).collect(),
                origin: None,
            },
            edges: peeled,
            density,
        });
        remaining = rest;
    }
    Ok(layers)
}

/// Cumulative node/edge counts over the layer prefix, the x-axis of
/// coverage-versus-size reports.
pub fn cumulative_sizes(layers: &[PeelLayer]) -> Vec<(usize, usize)> {
    let mut nodes: HashSet<EntityId> = HashSet::new();
    let mut edges = 0usize;
    let mut out = Vec::with_capacity(layers.len());
    for layer in layers {
        nodes.extend(layer.sample.nodes.iter().copied());
        edges += layer.edges.len();
        out.push((nodes.len(), edges));
    }
    out
}

/// Mean ReliK weight report helper: a subgraph's set score is the mean of
/// its facts' values; exposed here for decomposition summaries.
pub fn induced_closure(kg: &KnowledgeGraph, nodes: &[EntityId]) -> SubgraphSample {
    let set: HashSet<EntityId> = nodes.iter().copied().collect();
    SubgraphSample {
        triples: induced_triples(kg, &set),
        nodes: sorted_nodes(&set),
        origin: None,
    }
}

/// Entities incident to at least one fact.
pub fn connected_entities(kg: &KnowledgeGraph) -> Vec<EntityId> {
    (0..kg.entity_count() as u32)
        .map(EntityId)
        .filter(|&e| kg.degree(e).unwrap_or(0) > 0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::RelationId;
    use crate::seeds;

    fn wt(h: u32, t: u32, w: f64) -> WeightedTriple {
        WeightedTriple {
            triple: Triple::new(EntityId(h), RelationId(0), EntityId(t)),
            weight: w,
        }
    }

    fn line_kg(n: usize) -> KnowledgeGraph {
        let mut text = String::new();
        for i in 0..n - 1 {
            text.push_str(&format!("e{i}\tr\te{}\n", i + 1));
        }
        KnowledgeGraph::parse(&text).unwrap()
    }

    /// Brute-force densest subgraph over all node subsets.
    fn oracle_densest(weights: &[WeightedTriple]) -> f64 {
        let nodes: Vec<EntityId> = {
            let mut s: Vec<EntityId> = weights
                .iter()
                .flat_map(|w| [w.triple.head, w.triple.tail])
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let n = nodes.len();
        assert!(n <= 20, "oracle is exponential");
        let mut best = 0.0f64;
        for mask in 1u32..(1 << n) {
            let chosen: HashSet<EntityId> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| nodes[i])
                .collect();
            let w: f64 = weights
                .iter()
                .filter(|e| chosen.contains(&e.triple.head) && chosen.contains(&e.triple.tail))
                .map(|e| e.weight)
                .sum();
            best = best.max(w / chosen.len() as f64);
        }
        best
    }

    #[test]
    fn rwr_single_node_target() {
        let kg = line_kg(4);
        let s = rwr_subgraph_seeded(&kg, 1, 0.2, 3).unwrap();
        assert_eq!(s.nodes.len(), 1);
        assert!(s.triples.is_empty());
    }

    #[test]
    fn rwr_saturates_at_component() {
        let kg = KnowledgeGraph::parse("A\tr\tB\nB\tr\tC\nX\tr\tY\n").unwrap();
        for seed in 0..20 {
            let s = rwr_subgraph_seeded(&kg, 100, 0.2, seed).unwrap();
            assert!(s.nodes.len() == 3 || s.nodes.len() == 2, "{:?}", s.nodes);
            // induced closure covers every fact among the nodes
            for t in kg.facts() {
                let inside = s.nodes.contains(&t.head) && s.nodes.contains(&t.tail);
                assert_eq!(inside, s.triples.contains(t));
            }
        }
    }

    #[test]
    fn rwr_seed_determinism() {
        let kg = line_kg(10);
        let a = rwr_subgraph_seeded(&kg, 5, 0.2, 11).unwrap();
        let b = rwr_subgraph_seeded(&kg, 5, 0.2, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rwr_rejects_bad_restart() {
        let kg = line_kg(3);
        assert!(matches!(
            rwr_subgraph_seeded(&kg, 2, 1.0, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rwr_star_center_always_sampled_leaves_uniformish() {
        // star: center X with 5 leaves; target 3 nodes
        let mut text = String::new();
        for i in 0..5 {
            text.push_str(&format!("X\tr\tL{i}\n"));
        }
        let kg = KnowledgeGraph::parse(&text).unwrap();
        let x = kg.entity_id("X").unwrap();
        let mut leaf_hits = vec![0u32; 5];
        let runs = 1000;
        for seed in 0..runs {
            let s = rwr_subgraph_seeded(&kg, 3, 0.2, seeds::derive(0x57A, &[seed])).unwrap();
            assert_eq!(s.nodes.len(), 3);
            assert!(s.nodes.contains(&x), "center must appear: {:?}", s.nodes);
            for n in &s.nodes {
                if *n != x {
                    leaf_hits[(n.0 - 1) as usize] += 1;
                }
            }
        }
        let total: u32 = leaf_hits.iter().sum();
        for &h in &leaf_hits {
            let freq = h as f64 / total as f64;
            assert!((freq - 0.2).abs() <= 0.05, "leaf freq {freq}");
        }
    }

    #[test]
    fn densest_unit_triangle() {
        let kg = line_kg(4);
        let tri = vec![wt(0, 1, 1.0), wt(1, 2, 1.0), wt(2, 0, 1.0)];
        let (nodes, density) = densest_subgraph(&kg, &tri).unwrap();
        assert_eq!(nodes.len(), 3);
        assert!((density - 1.0).abs() < 1e-15);
        assert!((oracle_densest(&tri) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn densest_unit_path_keeps_all_three() {
        let kg = line_kg(4);
        let path = vec![wt(0, 1, 1.0), wt(1, 2, 1.0)];
        let (nodes, density) = densest_subgraph(&kg, &path).unwrap();
        assert_eq!(nodes.len(), 3);
        assert!((density - 2.0 / 3.0).abs() < 1e-15);
        assert!((oracle_densest(&path) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn densest_single_edge() {
        let kg = line_kg(3);
        let (nodes, density) = densest_subgraph(&kg, &[wt(0, 1, 3.0)]).unwrap();
        assert_eq!(nodes.len(), 2);
        assert!((density - 1.5).abs() < 1e-15);
    }

    #[test]
    fn densest_all_zero_weights_degenerates_to_one_node() {
        let kg = line_kg(4);
        let (nodes, density) =
            densest_subgraph(&kg, &[wt(0, 1, 0.0), wt(1, 2, 0.0)]).unwrap();
        assert_eq!(density, 0.0);
        assert_eq!(nodes, vec![EntityId(1)]); // max incident edges
    }

    #[test]
    fn densest_parallel_edges_accumulate() {
        let kg = KnowledgeGraph::parse("A\tr\tB\nA\tq\tB\nA\tr\tC\n").unwrap();
        let weights = vec![
            WeightedTriple { triple: kg.facts()[0], weight: 1.0 },
            WeightedTriple { triple: kg.facts()[1], weight: 1.0 },
            WeightedTriple { triple: kg.facts()[2], weight: 0.1 },
        ];
        let (nodes, density) = densest_subgraph(&kg, &weights).unwrap();
        // {A, B} carries weight 2 at density 1, beating any superset
        assert_eq!(nodes.len(), 2);
        assert!((density - 1.0).abs() < 1e-15);
    }

    #[test]
    fn densest_is_half_approximation_on_random_graphs() {
        use rand::Rng;
        let kg = line_kg(11);
        for case in 0..200u64 {
            let mut rng = seeds::rng(seeds::derive(0xD5, &[case]));
            let n = rng.random_range(2..=8u32);
            let m = rng.random_range(1..=14usize);
            let weights: Vec<WeightedTriple> = (0..m)
                .map(|_| {
                    wt(
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                        rng.random_range(0.0..2.0f64),
                    )
                })
                .collect();
            let (_, density) = densest_subgraph(&kg, &weights).unwrap();
            let best = oracle_densest(&weights);
            assert!(
                density >= 0.5 * best - 1e-12,
                "case {case}: {density} < half of {best}"
            );
            assert!(density <= best + 1e-12);
        }
    }

    #[test]
    fn peel_conserves_edge_multiset_and_density_nonincreasing() {
        use rand::Rng;
        let kg = line_kg(11);
        for case in 0..50u64 {
            let mut rng = seeds::rng(seeds::derive(0x9EE1, &[case]));
            let n = rng.random_range(2..=9u32);
            let m = rng.random_range(1..=16usize);
            let weights: Vec<WeightedTriple> = (0..m)
                .map(|_| {
                    wt(
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                        rng.random_range(0.0..1.0f64),
                    )
                })
                .collect();
            let layers = peel_decomposition(&kg, &weights).unwrap();
            let emitted: usize = layers.iter().map(|l| l.edges.len()).sum();
            assert_eq!(emitted, m);
            let mut seen: Vec<(Triple, u64)> = layers
                .iter()
                .flat_map(|l| l.edges.iter().map(|e| (e.triple, e.weight.to_bits())))
                .collect();
            let mut want: Vec<(Triple, u64)> =
                weights.iter().map(|e| (e.triple, e.weight.to_bits())).collect();
            seen.sort();
            want.sort();
            assert_eq!(seen, want);
            for pair in layers.windows(2) {
                assert!(
                    pair[0].density >= pair[1].density - 1e-12,
                    "densities increased: {} then {}",
                    pair[0].density,
                    pair[1].density
                );
            }
        }
    }

    #[test]
    fn peel_two_disjoint_triangles() {
        let kg = line_kg(7);
        let mut weights = vec![wt(0, 1, 1.0), wt(1, 2, 1.0), wt(2, 0, 1.0)];
        weights.extend([wt(3, 4, 1.0), wt(4, 5, 1.0), wt(5, 3, 1.0)]);
        let layers = peel_decomposition(&kg, &weights).unwrap();
        assert_eq!(layers.len(), 2);
        for l in &layers {
            assert_eq!(l.sample.nodes.len(), 3);
            assert_eq!(l.edges.len(), 3);
        }
        let cum = cumulative_sizes(&layers);
        assert_eq!(cum, vec![(3, 3), (6, 6)]);
    }

    #[test]
    fn peel_empty_input_is_empty() {
        let kg = line_kg(3);
        assert!(peel_decomposition(&kg, &[]).unwrap().is_empty());
    }
}
