//! In-memory knowledge graph with interned vocabularies and negative
//! neighborhood arithmetic.
//!
//! A fact `(h, r, t)` is positive when it is in the loaded fact set and
//! negative otherwise. For an entity `e`, the head-side negative
//! neighborhood is every triple `(e, r', t')` absent from the fact set;
//! the tail side is symmetric. Neighborhoods are never materialized:
//! their size is arithmetic over per-entity fact counts, enumeration
//! streams candidates in relation-major order, and sampling rejects
//! against the fact set.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};

/// Dense index into the entity vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

/// Dense index into the relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(pub u32);

/// A directed labeled edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple { head, relation, tail }
    }
}

/// Which neighborhood of a triple is being ranked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Head,
    Tail,
}

/// Immutable knowledge graph: interned labels, deduplicated facts with
/// O(1) membership, and per-entity head/tail fact counts.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    entity_labels: Vec<String>,
    entity_index: HashMap<String, EntityId>,
    relation_labels: Vec<String>,
    relation_index: HashMap<String, RelationId>,
    facts: Vec<Triple>,
    fact_set: HashSet<Triple>,
    /// (relation, tail) pairs per head entity.
    by_head: Vec<Vec<(RelationId, EntityId)>>,
    /// (relation, head) pairs per tail entity.
    by_tail: Vec<Vec<(RelationId, EntityId)>>,
}

impl KnowledgeGraph {
    /// Parse a tab-separated triple document: one `head\trelation\ttail`
    /// per line, `#` comments and blank lines ignored, CRLF tolerated.
    /// Vocabularies are assigned in first-occurrence order and duplicate
    /// fact lines collapse to one fact.
    pub fn parse(text: &str) -> Result<Self> {
        let (kg, _) = Self::parse_documents(&[text])?;
        Ok(kg)
    }

    /// Parse several documents into one graph (the union of their facts)
    /// and report each document's triples separately, so callers can keep
    /// train/valid/test apart while sharing one vocabulary.
    pub fn parse_documents(docs: &[&str]) -> Result<(Self, Vec<Vec<Triple>>)> {
        let mut kg = KnowledgeGraph {
            entity_labels: Vec::new(),
            entity_index: HashMap::new(),
            relation_labels: Vec::new(),
            relation_index: HashMap::new(),
            facts: Vec::new(),
            fact_set: HashSet::new(),
            by_head: Vec::new(),
            by_tail: Vec::new(),
        };
        let mut per_doc = Vec::with_capacity(docs.len());
        for doc in docs {
            let mut triples = Vec::new();
            for (lineno, raw) in doc.lines().enumerate() {
                let line = raw.strip_suffix('\r').unwrap_or(raw);
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
                    });
                }
                if let Some(col) = fields.iter().position(|f| f.is_empty()) {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("empty field in column {}", col + 1),
                    });
                }
                let h = kg.intern_entity(fields[0]);
                let r = kg.intern_relation(fields[1]);
                let t = kg.intern_entity(fields[2]);
                let triple = Triple::new(h, r, t);
                kg.insert_fact(triple);
                triples.push(triple);
            }
            per_doc.push(triples);
        }
        Ok((kg, per_doc))
    }

    /// Build a graph over fixed vocabularies from already-interned triples.
    pub fn from_parts(
        entity_labels: Vec<String>,
        relation_labels: Vec<String>,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        let entity_index = entity_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), EntityId(i as u32)))
            .collect::<HashMap<_, _>>();
        if entity_index.len() != entity_labels.len() {
            return Err(Error::Input("duplicate entity label".into()));
        }
        let relation_index = relation_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), RelationId(i as u32)))
            .collect::<HashMap<_, _>>();
        if relation_index.len() != relation_labels.len() {
            return Err(Error::Input("duplicate relation label".into()));
        }
        let mut kg = KnowledgeGraph {
            by_head: vec![Vec::new(); entity_labels.len()],
            by_tail: vec![Vec::new(); entity_labels.len()],
            entity_labels,
            entity_index,
            relation_labels,
            relation_index,
            facts: Vec::new(),
            fact_set: HashSet::new(),
        };
        for t in triples {
            kg.check_ids(t)?;
            kg.insert_fact(t);
        }
        Ok(kg)
    }

    fn intern_entity(&mut self, label: &str) -> EntityId {
        if let Some(&id) = self.entity_index.get(label) {
            return id;
        }
        let id = EntityId(self.entity_labels.len() as u32);
        self.entity_labels.push(label.to_owned());
        self.entity_index.insert(label.to_owned(), id);
        self.by_head.push(Vec::new());
        self.by_tail.push(Vec::new());
        id
    }

    fn intern_relation(&mut self, label: &str) -> RelationId {
        if let Some(&id) = self.relation_index.get(label) {
            return id;
        }
        let id = RelationId(self.relation_labels.len() as u32);
        self.relation_labels.push(label.to_owned());
        self.relation_index.insert(label.to_owned(), id);
        id
    }

    fn insert_fact(&mut self, t: Triple) {
        if self.fact_set.insert(t) {
            self.facts.push(t);
            self.by_head[t.head.0 as usize].push((t.relation, t.tail));
            self.by_tail[t.tail.0 as usize].push((t.relation, t.head));
        }
    }

    pub fn entity_count(&self) -> usize {
        self.entity_labels.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_labels.len()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    /// Facts in first-insertion order.
    pub fn facts(&self) -> &[Triple] {
        &self.facts
    }

    /// Fact set for membership-style filters.
    pub fn fact_set(&self) -> &HashSet<Triple> {
        &self.fact_set
    }

    /// Entity labels in id order.
    pub fn entity_labels(&self) -> &[String] {
        &self.entity_labels
    }

    /// Relation labels in id order.
    pub fn relation_labels(&self) -> &[String] {
        &self.relation_labels
    }

    pub fn entity_label(&self, id: EntityId) -> Option<&str> {
        self.entity_labels.get(id.0 as usize).map(|s| s.as_str())
    }

    pub fn relation_label(&self, id: RelationId) -> Option<&str> {
        self.relation_labels.get(id.0 as usize).map(|s| s.as_str())
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.entity_index.get(label).copied()
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relation_index.get(label).copied()
    }

    /// Render a triple as `head label, relation label, tail label`.
    pub fn display(&self, t: Triple) -> String {
        format!(
            "({}, {}, {})",
            self.entity_label(t.head).unwrap_or("?"),
            self.relation_label(t.relation).unwrap_or("?"),
            self.entity_label(t.tail).unwrap_or("?"),
        )
    }

    fn check_entity(&self, id: EntityId) -> Result<()> {
        if (id.0 as usize) < self.entity_labels.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "entity id {} out of range (|E| = {})",
                id.0,
                self.entity_labels.len()
            )))
        }
    }

    fn check_ids(&self, t: Triple) -> Result<()> {
        self.check_entity(t.head)?;
        self.check_entity(t.tail)?;
        if (t.relation.0 as usize) < self.relation_labels.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "relation id {} out of range (|R| = {})",
                t.relation.0,
                self.relation_labels.len()
            )))
        }
    }

    /// Whether the triple is a positive fact. Direction matters.
    pub fn contains(&self, t: Triple) -> Result<bool> {
        self.check_ids(t)?;
        Ok(self.fact_set.contains(&t))
    }

    /// Membership for ids already known valid.
    #[inline]
    pub(crate) fn has(&self, t: Triple) -> bool {
        self.fact_set.contains(&t)
    }

    /// Number of facts with the given head.
    pub fn head_count(&self, e: EntityId) -> Result<u64> {
        self.check_entity(e)?;
        Ok(self.by_head[e.0 as usize].len() as u64)
    }

    /// Number of facts with the given tail.
    pub fn tail_count(&self, e: EntityId) -> Result<u64> {
        self.check_entity(e)?;
        Ok(self.by_tail[e.0 as usize].len() as u64)
    }

    /// Undirected fact degree (head occurrences plus tail occurrences;
    /// a self-loop counts twice).
    pub fn degree(&self, e: EntityId) -> Result<u64> {
        Ok(self.head_count(e)? + self.tail_count(e)?)
    }

    /// Incident facts of an entity, heads first then tails, in insertion
    /// order. A self-loop appears once per role.
    pub(crate) fn incident_facts(&self, e: EntityId) -> impl Iterator<Item = Triple> + '_ {
        let heads = self.by_head[e.0 as usize]
            .iter()
            .map(move |&(r, t)| Triple::new(e, r, t));
        let tails = self.by_tail[e.0 as usize]
            .iter()
            .map(move |&(r, h)| Triple::new(h, r, e));
        heads.chain(tails)
    }

    /// `|R| * |E|` minus the positive count on the given side. Self-loop
    /// candidates `(e, r', e)` count as negatives when absent.
    pub fn negative_neighborhood_size(&self, anchor: EntityId, side: Side) -> Result<u64> {
        self.check_entity(anchor)?;
        let total = self.relation_count() as u64 * self.entity_count() as u64;
        let positives = match side {
            Side::Head => self.by_head[anchor.0 as usize].len() as u64,
            Side::Tail => self.by_tail[anchor.0 as usize].len() as u64,
        };
        Ok(total - positives)
    }

    /// Neighborhood size with the query itself excluded: a candidate
    /// triple absent from the fact set lies in its own neighborhoods but
    /// never competes against itself.
    pub(crate) fn negative_size_excluding(
        &self,
        anchor: EntityId,
        side: Side,
        query: Triple,
    ) -> Result<u64> {
        let base = self.negative_neighborhood_size(anchor, side)?;
        let in_slice = match side {
            Side::Head => query.head == anchor,
            Side::Tail => query.tail == anchor,
        };
        Ok(if in_slice && !self.has(query) { base - 1 } else { base })
    }

    /// Stream the negative neighborhood in relation-major, then entity
    /// order, skipping positives.
    pub fn enumerate_negatives(
        &self,
        anchor: EntityId,
        side: Side,
    ) -> Result<impl Iterator<Item = Triple> + '_> {
        self.enumerate_negatives_excluding(anchor, side, None)
    }

    pub(crate) fn enumerate_negatives_excluding(
        &self,
        anchor: EntityId,
        side: Side,
        exclude: Option<Triple>,
    ) -> Result<impl Iterator<Item = Triple> + '_> {
        self.check_entity(anchor)?;
        let n_ent = self.entity_count() as u64;
        let n_rel = self.relation_count() as u64;
        let positives: HashSet<(RelationId, EntityId)> = match side {
            Side::Head => self.by_head[anchor.0 as usize].iter().copied().collect(),
            Side::Tail => self.by_tail[anchor.0 as usize].iter().copied().collect(),
        };
        let iter = (0..n_rel * n_ent).filter_map(move |idx| {
            let r = RelationId((idx / n_ent) as u32);
            let e = EntityId((idx % n_ent) as u32);
            if positives.contains(&(r, e)) {
                return None;
            }
            let t = match side {
                Side::Head => Triple::new(anchor, r, e),
                Side::Tail => Triple::new(e, r, anchor),
            };
            if exclude == Some(t) {
                return None;
            }
            Some(t)
        });
        Ok(iter)
    }

    /// Sample `k` distinct negatives uniformly without replacement.
    ///
    /// Rejection sampling over the implicit `R x E` index space keeps the
    /// expected cost proportional to `k` when the neighborhood dominates
    /// the space; enumeration plus a partial shuffle takes over when
    /// `k` exceeds half the neighborhood or positives fill half the space.
    pub fn sample_negatives<R: Rng>(
        &self,
        anchor: EntityId,
        side: Side,
        k: u64,
        rng: &mut R,
    ) -> Result<Vec<Triple>> {
        let size = self.negative_neighborhood_size(anchor, side)?;
        if k > size {
            return Err(Error::Domain(format!(
                "sample size {k} exceeds negative neighborhood size {size}"
            )));
        }
        self.sample_negatives_excluding(anchor, side, k, None, rng)
    }

    pub(crate) fn sample_negatives_excluding<R: Rng>(
        &self,
        anchor: EntityId,
        side: Side,
        k: u64,
        exclude: Option<Triple>,
        rng: &mut R,
    ) -> Result<Vec<Triple>> {
        let size = match exclude {
            Some(q) => self.negative_size_excluding(anchor, side, q)?,
            None => self.negative_neighborhood_size(anchor, side)?,
        };
        if k == 0 {
            return Ok(Vec::new());
        }
        let space = self.relation_count() as u64 * self.entity_count() as u64;
        if k > size / 2 || size * 2 <= space {
            // dense regime: materialize and partially shuffle
            let mut all: Vec<Triple> = self
                .enumerate_negatives_excluding(anchor, side, exclude)?
                .collect();
            debug_assert_eq!(all.len() as u64, size);
            let n = all.len();
            let k = k as usize;
            for i in 0..k {
                let j = rng.random_range(i..n);
                all.swap(i, j);
            }
            all.truncate(k);
            return Ok(all);
        }
        let n_ent = self.entity_count() as u64;
        let mut seen: HashSet<u64> = HashSet::with_capacity(k as usize * 2);
        let mut out = Vec::with_capacity(k as usize);
        while (out.len() as u64) < k {
            let idx = rng.random_range(0..space);
            let r = RelationId((idx / n_ent) as u32);
            let e = EntityId((idx % n_ent) as u32);
            let cand = match side {
                Side::Head => Triple::new(anchor, r, e),
                Side::Tail => Triple::new(e, r, anchor),
            };
            if self.has(cand) || exclude == Some(cand) || !seen.insert(idx) {
                continue;
            }
            out.push(cand);
        }
        Ok(out)
    }
}
