//! Deterministic synthetic fixtures: random graphs and stores for
//! property tests, and a geography-flavored graph whose scale matches
//! the small end of public link-prediction benchmarks.

use rand::Rng;

use crate::embed::{EmbeddingStore, Field, ScorerKind};
use crate::kg::{EntityId, KnowledgeGraph, RelationId, Triple};
use crate::seeds;

/// Random graph over `e{i}` entities and `r{j}` relations with up to
/// `facts` distinct facts (duplicates collapse, so the count can land
/// lower).
pub fn random_kg(seed: u64, entities: usize, relations: usize, facts: usize) -> KnowledgeGraph {
    let mut rng = seeds::rng(seeds::derive(seed, &[0x5F9]));
    let triples: Vec<Triple> = (0..facts)
        .map(|_| {
            Triple::new(
                EntityId(rng.random_range(0..entities as u32)),
                RelationId(rng.random_range(0..relations as u32)),
                EntityId(rng.random_range(0..entities as u32)),
            )
        })
        .collect();
    KnowledgeGraph::from_parts(
        (0..entities).map(|i| format!("e{i}")).collect(),
        (0..relations).map(|i| format!("r{i}")).collect(),
        triples,
    )
    .expect("generated ids are in range")
}

/// Uniform random store in `[-scale, scale]` aligned to a graph.
/// Entries stay small so scores remain well inside the strictly
/// monotone range of common squashing transforms.
pub fn random_store(
    seed: u64,
    kg: &KnowledgeGraph,
    dim: usize,
    field: Field,
    with_relation_tail: bool,
) -> EmbeddingStore {
    let mut rng = seeds::rng(seeds::derive(seed, &[0xE5_107]));
    let width = match field {
        Field::Real => dim,
        Field::Complex => 2 * dim,
    };
    let scale = 0.5;
    let mut rows = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..width).map(|_| rng.random_range(-scale..scale)).collect())
            .collect()
    };
    let entities = rows(kg.entity_count());
    let relations = rows(kg.relation_count());
    let tails = with_relation_tail.then(|| rows(kg.relation_count()));
    EmbeddingStore::from_vectors(dim, field, 1.0, entities, relations, tails)
        .expect("generated rows have the right width")
}

/// A store compatible with the given scorer.
pub fn random_store_for(seed: u64, kg: &KnowledgeGraph, dim: usize, scorer: ScorerKind) -> EmbeddingStore {
    random_store(seed, kg, dim, scorer.field(), scorer.needs_relation_tail())
}

/// Geography-flavored graph: a containment tree (countries inside
/// regions inside continents) plus neighbor edges concentrated within
/// regions. Defaults land near 270 entities, 2 relations and 1200 facts,
/// with the regional clustering that makes locality experiments
/// meaningful.
pub fn countries_like(seed: u64, continents: usize, regions: usize, countries: usize, facts: usize) -> KnowledgeGraph {
    let mut rng = seeds::rng(seeds::derive(seed, &[0xC0_47]));
    let n_ent = continents + regions + countries;
    let mut labels: Vec<String> = Vec::with_capacity(n_ent);
    labels.extend((0..continents).map(|i| format!("continent{i}")));
    labels.extend((0..regions).map(|i| format!("region{i}")));
    labels.extend((0..countries).map(|i| format!("country{i}")));
    let locatedin = RelationId(0);
    let neighbor = RelationId(1);

    let mut triples = Vec::new();
    let region_of: Vec<usize> = (0..countries).map(|_| rng.random_range(0..regions)).collect();
    for (r, _) in (0..regions).enumerate() {
        let continent = rng.random_range(0..continents as u32);
        triples.push(Triple::new(
            EntityId((continents + r) as u32),
            locatedin,
            EntityId(continent),
        ));
    }
    let country_id = |i: usize| EntityId((continents + regions + i) as u32);
    for (c, &reg) in region_of.iter().enumerate() {
        triples.push(Triple::new(
            country_id(c),
            locatedin,
            EntityId((continents + reg) as u32),
        ));
    }
    let mut by_region: Vec<Vec<usize>> = vec![Vec::new(); regions];
    for (c, &reg) in region_of.iter().enumerate() {
        by_region[reg].push(c);
    }
    let mut guard = 0;
    while triples.len() < facts && guard < 100 * facts {
        guard += 1;
        let a = rng.random_range(0..countries);
        let b = if rng.random_range(0.0..1.0) < 0.8 {
            // neighbors mostly share a region
            let peers = &by_region[region_of[a]];
            if peers.len() < 2 {
                continue;
            }
            peers[rng.random_range(0..peers.len())]
        } else {
            rng.random_range(0..countries)
        };
        if a == b {
            continue;
        }
        let t = Triple::new(country_id(a), neighbor, country_id(b));
        if !triples.contains(&t) {
            triples.push(t);
        }
    }
    KnowledgeGraph::from_parts(labels, vec!["locatedin".into(), "neighbor".into()], triples)
        .expect("generated ids are in range")
}
