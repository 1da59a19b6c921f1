//! Regenerates the bundled fixture files. Run from the workspace root:
//!
//! ```text
//! cargo run -p relik-cli --example gen_fixtures
//! ```

use std::fs;
use std::path::Path;

use relik::embed::ScorerKind;
use relik::synth;
use relik::trainer::{self, TrainConfig};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let micro = dir.join("micro");
    let demo = dir.join("demo");
    fs::create_dir_all(&micro).unwrap();
    fs::create_dir_all(&demo).unwrap();

    // micro: one fact, hand-sized embeddings giving ReliK 1.0 exactly
    fs::write(micro.join("kg.tsv"), "A\tr\tB\n").unwrap();
    fs::write(
        micro.join("embeddings.tsv"),
        "#relik-embeddings v=1 dim=1 field=real orientation=+1\n\
         E\tA\t0\nE\tB\t1\nR\tr\t1\n",
    )
    .unwrap();

    // demo: a small clustered graph with trained TransE embeddings
    let kg = synth::countries_like(7, 2, 6, 52, 260);
    let mut text = String::new();
    for &t in kg.facts() {
        text.push_str(&format!(
            "{}\t{}\t{}\n",
            kg.entity_label(t.head).unwrap(),
            kg.relation_label(t.relation).unwrap(),
            kg.entity_label(t.tail).unwrap(),
        ));
    }
    fs::write(demo.join("kg.tsv"), &text).unwrap();
    let cfg = TrainConfig {
        dim: 16,
        epochs: 12,
        learning_rate: 0.04,
        margin: 1.0,
        negatives_per_positive: 1,
        seed: 7,
    };
    let store = trainer::train(&kg, ScorerKind::TransEL2, &cfg).unwrap();
    fs::write(demo.join("embeddings.tsv"), store.save(&kg)).unwrap();
    println!("fixtures written under {}", dir.display());
}
