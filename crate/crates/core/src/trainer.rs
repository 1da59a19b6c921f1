//! Margin-ranking SGD trainer for TransE and DistMult, sized for
//! end-to-end runs on desk-scale graphs. Scorers without simple
//! subgradients (RotatE, PairRE, ComplEx) are import-only.

use rand::Rng;

use crate::embed::{EmbeddingStore, Field, ScorerKind};
use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, Triple};
use crate::seeds::{self, stream};

/// Training hyperparameters. Defaults: dimension 50, 100 epochs,
/// learning rate 0.01, margin 1, one negative per positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub negatives_per_positive: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            epochs: 100,
            learning_rate: 0.01,
            margin: 1.0,
            negatives_per_positive: 1,
            seed: seeds::DEFAULT_SEED,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("margin must be positive".into()));
        }
        if self.negatives_per_positive == 0 {
            return Err(Error::Config("need at least one negative per positive".into()));
        }
        Ok(())
    }
}

/// Train embeddings by SGD on the hinge loss
/// `max(0, margin - s(positive) + s(corrupted))`.
///
/// Vectors initialize uniformly in `[-6/sqrt(d), 6/sqrt(d)]`. Each epoch
/// walks the facts in insertion order, corrupting head or tail by a fair
/// coin and resampling any corruption that collides with a fact. TransE
/// variants renormalize entity vectors to unit length after every epoch.
/// The whole procedure is a single seeded stream, so equal seeds give
/// bit-identical stores.
pub fn train(kg: &KnowledgeGraph, scorer: ScorerKind, cfg: &TrainConfig) -> Result<EmbeddingStore> {
    cfg.validate()?;
    if kg.fact_count() == 0 {
        return Err(Error::Domain("cannot train on an empty graph".into()));
    }
    let renormalize = match scorer {
        ScorerKind::TransEL1 | ScorerKind::TransEL2 => true,
        ScorerKind::DistMult => false,
        other => {
            return Err(Error::Config(format!(
                "{other} has no bundled trainer; import its embeddings instead"
            )))
        }
    };

    let d = cfg.dim;
    let bound = 6.0 / (d as f64).sqrt();
    let mut rng = seeds::rng(seeds::derive(cfg.seed, &[stream::TRAIN]));
    let draw_row = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-bound..bound)).collect()
    };
    let entity_vecs: Vec<Vec<f64>> = (0..kg.entity_count()).map(|_| draw_row(&mut rng)).collect();
    let relation_vecs: Vec<Vec<f64>> =
        (0..kg.relation_count()).map(|_| draw_row(&mut rng)).collect();
    let mut store =
        EmbeddingStore::from_vectors(d, Field::Real, 1.0, entity_vecs, relation_vecs, None)?;

    let n_ent = kg.entity_count() as u32;
    const CORRUPT_ATTEMPTS: usize = 10_000;
    for epoch in 0..cfg.epochs {
        for &fact in kg.facts() {
            for _ in 0..cfg.negatives_per_positive {
                let mut negative = None;
                for _ in 0..CORRUPT_ATTEMPTS {
                    let corrupt_head = rng.random_range(0..2u32) == 0;
                    let e = EntityId(rng.random_range(0..n_ent));
                    let cand = if corrupt_head {
                        Triple::new(e, fact.relation, fact.tail)
                    } else {
                        Triple::new(fact.head, fact.relation, e)
                    };
                    if !kg.has(cand) {
                        negative = Some(cand);
                        break;
                    }
                }
                let negative = negative.ok_or_else(|| {
                    Error::Sampling(format!(
                        "no filtered corruption of {} found while training",
                        kg.display(fact)
                    ))
                })?;
                let s_pos = store.score_unchecked(scorer, fact);
                let s_neg = store.score_unchecked(scorer, negative);
                let loss = cfg.margin - s_pos + s_neg;
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        msg: format!("loss {loss} on fact {}", kg.display(fact)),
                    });
                }
                if loss <= 0.0 {
                    continue;
                }
                // ascend s(positive), descend s(corrupted)
                apply_score_gradient(&mut store, scorer, fact, cfg.learning_rate);
                apply_score_gradient(&mut store, scorer, negative, -cfg.learning_rate);
            }
        }
        if renormalize {
            for e in 0..kg.entity_count() as u32 {
                let row = store.entity_mut(EntityId(e));
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for v in row {
                        *v /= norm;
                    }
                }
            }
        }
    }
    Ok(store)
}

/// One SGD step of `step * d s(t) / d theta` on the vectors of `t`.
fn apply_score_gradient(store: &mut EmbeddingStore, scorer: ScorerKind, t: Triple, step: f64) {
    let d = store.dim();
    match scorer {
        ScorerKind::TransEL1 | ScorerKind::TransEL2 => {
            // residual of the translation
            let mut delta = vec![0.0; d];
            {
                let h = store.entity(t.head);
                let r = store.relation(t.relation);
                let tl = store.entity(t.tail);
                for i in 0..d {
                    delta[i] = h[i] + r[i] - tl[i];
                }
            }
            let grad: Vec<f64> = match scorer {
                ScorerKind::TransEL1 => delta.iter().map(|v| v.signum()).collect(),
                _ => {
                    let norm = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm < 1e-12 {
                        return;
                    }
                    delta.iter().map(|v| v / norm).collect()
                }
            };
            // d s / d h = -grad, d s / d r = -grad, d s / d t = +grad
            let h = store.entity_mut(t.head);
            for i in 0..d {
                h[i] -= step * grad[i];
            }
            let r = store.relation_mut(t.relation);
            for i in 0..d {
                r[i] -= step * grad[i];
            }
            let tl = store.entity_mut(t.tail);
            for i in 0..d {
                tl[i] += step * grad[i];
            }
        }
        ScorerKind::DistMult => {
            let mut gh = vec![0.0; d];
            let mut gr = vec![0.0; d];
            let mut gt = vec![0.0; d];
            {
                let h = store.entity(t.head);
                let r = store.relation(t.relation);
                let tl = store.entity(t.tail);
                for i in 0..d {
                    gh[i] = r[i] * tl[i];
                    gr[i] = h[i] * tl[i];
                    gt[i] = h[i] * r[i];
                }
            }
            let h = store.entity_mut(t.head);
            for i in 0..d {
                h[i] += step * gh[i];
            }
            let r = store.relation_mut(t.relation);
            for i in 0..d {
                r[i] += step * gr[i];
            }
            let tl = store.entity_mut(t.tail);
            for i in 0..d {
                tl[i] += step * gt[i];
            }
        }
        _ => unreachable!("trainable scorers are checked up front"),
    }
}
