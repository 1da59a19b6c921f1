//! Embedding storage and closed-form triple scorers.
//!
//! Every scorer is oriented higher-is-better: the larger the score, the
//! more plausible the triple. Stores loaded from files carry an
//! orientation sign in their header so externally produced scores that
//! rank the other way can be flipped on load.
//!
//! Complex vectors are stored as split blocks (`d` real parts followed by
//! `d` imaginary parts) so the real-field kernels index the same layout.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId, Triple};

/// Number field of the embedding space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// The bundled scoring functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScorerKind {
    /// `-|e_h + e_r - e_t|_1`
    TransEL1,
    /// `-|e_h + e_r - e_t|_2`
    TransEL2,
    /// `sum_i e_h[i] * e_r[i] * e_t[i]` (diagonal bilinear form)
    DistMult,
    /// `-|e_h o e_r - e_t|_2` with complex Hadamard product
    RotatE,
    /// `-|e_h o e_rh - e_t o e_rt|_2` with paired relation vectors
    PairRE,
    /// `Re(sum_i e_r[i] * e_h[i] * conj(e_t[i]))`
    ComplEx,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 6] = [
        ScorerKind::TransEL1,
        ScorerKind::TransEL2,
        ScorerKind::DistMult,
        ScorerKind::RotatE,
        ScorerKind::PairRE,
        ScorerKind::ComplEx,
    ];

    /// Field the scorer operates in.
    pub fn field(self) -> Field {
        match self {
            ScorerKind::RotatE | ScorerKind::ComplEx => Field::Complex,
            _ => Field::Real,
        }
    }

    /// Whether the scorer needs a second (tail-side) relation vector.
    pub fn needs_relation_tail(self) -> bool {
        matches!(self, ScorerKind::PairRE)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::TransEL1 => "transe-l1",
            ScorerKind::TransEL2 => "transe-l2",
            ScorerKind::DistMult => "distmult",
            ScorerKind::RotatE => "rotate",
            ScorerKind::PairRE => "pairre",
            ScorerKind::ComplEx => "complex",
        }
    }

    pub fn from_name(name: &str) -> Option<ScorerKind> {
        ScorerKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-entity and per-relation vectors aligned to one graph's
/// vocabularies. Immutable after construction; concurrent scoring is safe.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    field: Field,
    orientation: f64,
    width: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
    relation_tails: Option<Vec<f64>>,
}

impl EmbeddingStore {
    /// Assemble a store from per-row vectors. Each vector must have the
    /// width implied by the field (`dim` reals, or `2 * dim` for complex).
    pub fn from_vectors(
        dim: usize,
        field: Field,
        orientation: f64,
        entity_vecs: Vec<Vec<f64>>,
        relation_vecs: Vec<Vec<f64>>,
        relation_tail_vecs: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if orientation != 1.0 && orientation != -1.0 {
            return Err(Error::Config("orientation must be +1 or -1".into()));
        }
        let width = match field {
            Field::Real => dim,
            Field::Complex => 2 * dim,
        };
        let flatten = |rows: Vec<Vec<f64>>, what: &str| -> Result<Vec<f64>> {
            let mut flat = Vec::with_capacity(rows.len() * width);
            for (i, row) in rows.into_iter().enumerate() {
                if row.len() != width {
                    return Err(Error::Config(format!(
                        "{what} vector {i} has {} values, expected {width}",
                        row.len()
                    )));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("{what} vector {i} has a non-finite value")));
                }
                flat.extend_from_slice(&row);
            }
            Ok(flat)
        };
        let n_rel = relation_vecs.len();
        let entities = flatten(entity_vecs, "entity")?;
        let relations = flatten(relation_vecs, "relation")?;
        let relation_tails = match relation_tail_vecs {
            Some(rows) => {
                if rows.len() != n_rel {
                    return Err(Error::Config(format!(
                        "{} tail-relation vectors for {} relations",
                        rows.len(),
                        n_rel
                    )));
                }
                Some(flatten(rows, "tail-relation")?)
            }
            None => None,
        };
        Ok(EmbeddingStore {
            dim,
            field,
            orientation,
            width,
            entities,
            relations,
            relation_tails,
        })
    }

    /// Parse the `relik-embeddings v=1` text format and align the rows to
    /// the graph's vocabularies. A vocabulary entry without a vector is an
    /// error; labeled rows the graph does not know are ignored.
    pub fn load(text: &str, kg: &KnowledgeGraph) -> Result<Self> {
        let parsed = ParsedRows::parse(text)?;
        let ParsedRows { dim, field, orientation, mut ent_rows, mut rel_rows, mut rt_rows, .. } =
            parsed;
        let mut entity_vecs = Vec::with_capacity(kg.entity_count());
        for i in 0..kg.entity_count() {
            let label = kg.entity_label(EntityId(i as u32)).unwrap();
            let row = ent_rows.remove(label).ok_or_else(|| {
                Error::Parse { line: 0, msg: format!("missing embedding for entity {label:?}") }
            })?;
            entity_vecs.push(row);
        }
        let mut relation_vecs = Vec::with_capacity(kg.relation_count());
        for i in 0..kg.relation_count() {
            let label = kg.relation_label(RelationId(i as u32)).unwrap();
            let row = rel_rows.remove(label).ok_or_else(|| {
                Error::Parse { line: 0, msg: format!("missing embedding for relation {label:?}") }
            })?;
            relation_vecs.push(row);
        }
        let relation_tail_vecs = if rt_rows.is_empty() {
            None
        } else {
            let mut rows = Vec::with_capacity(kg.relation_count());
            for i in 0..kg.relation_count() {
                let label = kg.relation_label(RelationId(i as u32)).unwrap();
                let row = rt_rows.remove(label).ok_or_else(|| {
                    Error::Parse {
                        line: 0,
                        msg: format!("missing tail-relation embedding for {label:?}"),
                    }
                })?;
                rows.push(row);
            }
            Some(rows)
        };
        EmbeddingStore::from_vectors(
            dim,
            field,
            orientation,
            entity_vecs,
            relation_vecs,
            relation_tail_vecs,
        )
    }
}

/// Shape summary of a parsed embedding file, for linting without a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingFileSummary {
    pub dim: usize,
    pub field: Field,
    pub orientation: f64,
    pub entity_rows: usize,
    pub relation_rows: usize,
    pub relation_tail_rows: usize,
}

/// Check an embedding file against the format alone (header consistency,
/// row widths, finite numerals), without aligning to a vocabulary.
pub fn validate_text(text: &str) -> Result<EmbeddingFileSummary> {
    let parsed = ParsedRows::parse(text)?;
    Ok(EmbeddingFileSummary {
        dim: parsed.dim,
        field: parsed.field,
        orientation: parsed.orientation,
        entity_rows: parsed.ent_rows.len(),
        relation_rows: parsed.rel_rows.len(),
        relation_tail_rows: parsed.rt_rows.len(),
    })
}

struct ParsedRows {
    dim: usize,
    field: Field,
    orientation: f64,
    ent_rows: HashMap<String, Vec<f64>>,
    rel_rows: HashMap<String, Vec<f64>>,
    rt_rows: HashMap<String, Vec<f64>>,
}

impl ParsedRows {
    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "empty embedding file".into() })?;
        let header = header.trim_end_matches('\r');
        let mut dim: Option<usize> = None;
        let mut field: Option<Field> = None;
        let mut orientation: Option<f64> = None;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("#relik-embeddings") {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header starting with '#relik-embeddings'".into(),
            });
        }
        for tok in tokens {
            match tok.split_once('=') {
                Some(("v", "1")) => {}
                Some(("v", other)) => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("unsupported version {other}"),
                    })
                }
                Some(("dim", d)) => {
                    dim = Some(d.parse().map_err(|_| Error::Parse {
                        line: 1,
                        msg: format!("bad dim {d:?}"),
                    })?)
                }
                Some(("field", "real")) => field = Some(Field::Real),
                Some(("field", "complex")) => field = Some(Field::Complex),
                Some(("orientation", "+1")) => orientation = Some(1.0),
                Some(("orientation", "-1")) => orientation = Some(-1.0),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("unrecognized header token {tok:?}"),
                    })
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse { line: 1, msg: "header missing dim".into() })?;
        let field =
            field.ok_or_else(|| Error::Parse { line: 1, msg: "header missing field".into() })?;
        let orientation = orientation
            .ok_or_else(|| Error::Parse { line: 1, msg: "header missing orientation".into() })?;
        if dim == 0 {
            return Err(Error::Parse { line: 1, msg: "dim must be positive".into() });
        }
        let width = match field {
            Field::Real => dim,
            Field::Complex => 2 * dim,
        };

        let mut ent_rows: HashMap<String, Vec<f64>> = HashMap::new();
        let mut rel_rows: HashMap<String, Vec<f64>> = HashMap::new();
        let mut rt_rows: HashMap<String, Vec<f64>> = HashMap::new();
        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let tag = fields.next().unwrap_or("");
            let label = fields
                .next()
                .ok_or_else(|| Error::Parse { line: lineno, msg: "missing label".into() })?;
            if label.is_empty() {
                return Err(Error::Parse { line: lineno, msg: "empty label".into() });
            }
            let mut vec = Vec::with_capacity(width);
            for num in fields {
                let v: f64 = num.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad numeral {num:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("non-finite value in row for {label:?}"),
                    });
                }
                vec.push(v);
            }
            if vec.len() != width {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!(
                        "row for {label:?} has {} values, expected {width} (dim={dim}, field={field})",
                        vec.len()
                    ),
                });
            }
            let dest = match tag {
                "E" => &mut ent_rows,
                "R" => &mut rel_rows,
                "RT" => {
                    if field == Field::Complex {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "RT rows require a real-field store".into(),
                        });
                    }
                    &mut rt_rows
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown row tag {other:?}"),
                    })
                }
            };
            dest.insert(label.to_owned(), vec);
        }
        Ok(ParsedRows { dim, field, orientation, ent_rows, rel_rows, rt_rows })
    }
}

impl EmbeddingStore {
    /// Render the store in the v1 text format, rows in vocabulary order.
    pub fn save(&self, kg: &KnowledgeGraph) -> String {
        let mut out = format!(
            "#relik-embeddings v=1 dim={} field={} orientation={}\n",
            self.dim,
            self.field,
            if self.orientation >= 0.0 { "+1" } else { "-1" },
        );
        let mut row = |tag: &str, label: &str, vec: &[f64]| {
            out.push_str(tag);
            out.push('\t');
            out.push_str(label);
            for v in vec {
                out.push('\t');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        };
        for i in 0..kg.entity_count() {
            row("E", kg.entity_label(EntityId(i as u32)).unwrap(), self.entity(EntityId(i as u32)));
        }
        for i in 0..kg.relation_count() {
            let id = RelationId(i as u32);
            row("R", kg.relation_label(id).unwrap(), self.relation(id));
        }
        if self.relation_tails.is_some() {
            for i in 0..kg.relation_count() {
                let id = RelationId(i as u32);
                row("RT", kg.relation_label(id).unwrap(), self.relation_tail(id).unwrap());
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn entity_rows(&self) -> usize {
        self.entities.len() / self.width
    }

    pub fn relation_rows(&self) -> usize {
        self.relations.len() / self.width
    }

    #[inline]
    pub fn entity(&self, id: EntityId) -> &[f64] {
        let i = id.0 as usize * self.width;
        &self.entities[i..i + self.width]
    }

    #[inline]
    pub fn relation(&self, id: RelationId) -> &[f64] {
        let i = id.0 as usize * self.width;
        &self.relations[i..i + self.width]
    }

    #[inline]
    pub fn relation_tail(&self, id: RelationId) -> Option<&[f64]> {
        self.relation_tails.as_ref().map(|flat| {
            let i = id.0 as usize * self.width;
            &flat[i..i + self.width]
        })
    }

    /// Mutable access for the trainer.
    pub(crate) fn entity_mut(&mut self, id: EntityId) -> &mut [f64] {
        let i = id.0 as usize * self.width;
        &mut self.entities[i..i + self.width]
    }

    pub(crate) fn relation_mut(&mut self, id: RelationId) -> &mut [f64] {
        let i = id.0 as usize * self.width;
        &mut self.relations[i..i + self.width]
    }

    /// Check the store can evaluate the given scorer against the graph.
    pub fn compatibility(&self, scorer: ScorerKind, kg: &KnowledgeGraph) -> Result<()> {
        if scorer.field() != self.field {
            return Err(Error::Config(format!(
                "{scorer} needs a {} store, this store is {}",
                scorer.field(),
                self.field
            )));
        }
        if scorer.needs_relation_tail() && self.relation_tails.is_none() {
            return Err(Error::Config(format!(
                "{scorer} needs tail-relation vectors (RT rows)"
            )));
        }
        if self.entity_rows() != kg.entity_count() || self.relation_rows() != kg.relation_count() {
            return Err(Error::Config(format!(
                "store shape ({} entities, {} relations) does not match graph ({}, {})",
                self.entity_rows(),
                self.relation_rows(),
                kg.entity_count(),
                kg.relation_count()
            )));
        }
        Ok(())
    }

    /// Score one triple. Higher is more plausible.
    pub fn score(&self, scorer: ScorerKind, kg: &KnowledgeGraph, t: Triple) -> Result<f64> {
        self.compatibility(scorer, kg)?;
        Ok(self.score_unchecked(scorer, t))
    }

    /// Score many triples; elementwise bit-identical to the scalar path.
    pub fn score_batch(
        &self,
        scorer: ScorerKind,
        kg: &KnowledgeGraph,
        triples: &[Triple],
    ) -> Result<Vec<f64>> {
        self.compatibility(scorer, kg)?;
        Ok(triples.iter().map(|&t| self.score_unchecked(scorer, t)).collect())
    }

    /// Scoring kernel; compatibility must have been checked.
    #[inline]
    pub(crate) fn score_unchecked(&self, scorer: ScorerKind, t: Triple) -> f64 {
        let h = self.entity(t.head);
        let r = self.relation(t.relation);
        let tl = self.entity(t.tail);
        let d = self.dim;
        let raw = match scorer {
            ScorerKind::TransEL1 => {
                let mut acc = 0.0;
                for i in 0..d {
                    acc += (h[i] + r[i] - tl[i]).abs();
                }
                -acc
            }
            ScorerKind::TransEL2 => {
                let mut acc = 0.0;
                for i in 0..d {
                    let v = h[i] + r[i] - tl[i];
                    acc += v * v;
                }
                -acc.sqrt()
            }
            ScorerKind::DistMult => {
                let mut acc = 0.0;
                for i in 0..d {
                    // grouping h and t first makes the head/tail symmetry
                    // of the bilinear form hold bit-for-bit
                    acc += (h[i] * tl[i]) * r[i];
                }
                acc
            }
            ScorerKind::RotatE => {
                let mut acc = 0.0;
                for i in 0..d {
                    let (hre, him) = (h[i], h[d + i]);
                    let (rre, rim) = (r[i], r[d + i]);
                    let dre = hre * rre - him * rim - tl[i];
                    let dim = hre * rim + him * rre - tl[d + i];
                    acc += dre * dre + dim * dim;
                }
                -acc.sqrt()
            }
            ScorerKind::PairRE => {
                let rt = self.relation_tail(t.relation).expect("checked by compatibility");
                let mut acc = 0.0;
                for i in 0..d {
                    let v = h[i] * r[i] - tl[i] * rt[i];
                    acc += v * v;
                }
                -acc.sqrt()
            }
            ScorerKind::ComplEx => {
                let mut acc = 0.0;
                for i in 0..d {
                    let (rre, rim) = (r[i], r[d + i]);
                    let (hre, him) = (h[i], h[d + i]);
                    let pre = rre * hre - rim * him;
                    let pim = rre * him + rim * hre;
                    acc += pre * tl[i] + pim * tl[d + i];
                }
                acc
            }
        };
        self.orientation * raw
    }
}
