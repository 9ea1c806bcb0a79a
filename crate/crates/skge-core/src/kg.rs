//! Interned triple store: vocabularies, indexes, statistics, and the
//! tab-separated text format every other module consumes.
//!
//! Labels are interned into dense zero-based ids in first-appearance order,
//! which keeps runs reproducible. A [`KnowledgeGraph`] is immutable after
//! construction and safe to share read-only across threads; build one with
//! [`KgBuilder`] or [`parse_triples`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use serde::{Deserialize, Serialize};

/// Relation label treated as the rdf:type-like relation unless overridden.
pub const DEFAULT_TYPE_RELATION: &str = "type";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KgError {
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
    #[error("invalid label {label:?}: labels must be non-empty and free of tabs/newlines")]
    InvalidLabel { label: String },
}

/// Dense entity id, contiguous from 0 in first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub u32);

/// Dense relation id, contiguous from 0 in first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One directed edge of the graph, by interned ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }
}

/// Ordered label set with dense ids. Interning the same label twice returns
/// the same id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    /// Returns the id for `label`, interning it if unseen.
    pub fn intern(&mut self, label: &str) -> Result<u32, KgError> {
        if label.is_empty() || label.contains('\t') || label.contains('\n') {
            return Err(KgError::InvalidLabel {
                label: label.to_string(),
            });
        }
        if let Some(&id) = self.index.get(label) {
            return Ok(id);
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels in id order (line number = id in the sidecar text format).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Counts reported by [`stats`]; serializes to JSON with these field names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGStats {
    pub triple_count: u64,
    pub entity_count: u64,
    pub relation_count: u64,
    pub per_relation_counts: BTreeMap<String, u64>,
}

/// Vocabulary-interned triple set with type and per-relation indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    entities: Vocab,
    relations: Vocab,
    triples: Vec<Triple>,
    type_relation_id: Option<RelationId>,
    by_relation: Vec<Vec<u32>>,
    types_of: BTreeMap<EntityId, BTreeSet<EntityId>>,
    instances_of: BTreeMap<EntityId, Vec<EntityId>>,
}

impl KnowledgeGraph {
    pub fn entities(&self) -> &Vocab {
        &self.entities
    }

    pub fn relations(&self) -> &Vocab {
        &self.relations
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn type_relation_id(&self) -> Option<RelationId> {
        self.type_relation_id
    }

    /// Indexes into [`Self::triples`] for one relation.
    pub fn triples_of_relation(&self, relation: RelationId) -> &[u32] {
        self.by_relation
            .get(relation.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Class entities of `entity` under the type relation.
    pub fn types_of(&self, entity: EntityId) -> Option<&BTreeSet<EntityId>> {
        self.types_of.get(&entity)
    }

    /// All entities that appear as the tail of a type triple, ascending.
    pub fn classes(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.instances_of.keys().copied()
    }

    pub fn is_class(&self, entity: EntityId) -> bool {
        self.instances_of.contains_key(&entity)
    }

    /// Instances of a class, ascending by entity id.
    pub fn instances_of(&self, class: EntityId) -> &[EntityId] {
        self.instances_of
            .get(&class)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Labels of one triple; ids of a stored triple are always in range.
    pub fn labeled(&self, triple: Triple) -> (&str, &str, &str) {
        (
            self.entities.label(triple.head.0).expect("head in range"),
            self.relations
                .label(triple.relation.0)
                .expect("relation in range"),
            self.entities.label(triple.tail.0).expect("tail in range"),
        )
    }
}

/// Accumulates labeled triples, then freezes them into a [`KnowledgeGraph`].
///
/// Duplicate triples collapse silently (set semantics); entity and relation
/// ids are assigned in first-appearance order.
#[derive(Debug, Clone)]
pub struct KgBuilder {
    entities: Vocab,
    relations: Vocab,
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    type_relation: String,
}

impl Default for KgBuilder {
    fn default() -> Self {
        KgBuilder::new()
    }
}

impl KgBuilder {
    pub fn new() -> Self {
        KgBuilder::with_type_relation(DEFAULT_TYPE_RELATION)
    }

    /// Overrides which relation label builds the type index.
    pub fn with_type_relation(label: &str) -> Self {
        KgBuilder {
            entities: Vocab::new(),
            relations: Vocab::new(),
            triples: Vec::new(),
            seen: HashSet::new(),
            type_relation: label.to_string(),
        }
    }

    /// Interns a relation label without requiring a triple to use it, so a
    /// fixed relation vocabulary gets stable ids.
    pub fn declare_relation(&mut self, label: &str) -> Result<RelationId, KgError> {
        Ok(RelationId(self.relations.intern(label)?))
    }

    /// Adds one labeled triple. Returns false when it was already present.
    pub fn add(&mut self, head: &str, relation: &str, tail: &str) -> Result<bool, KgError> {
        let triple = Triple::new(
            EntityId(self.entities.intern(head)?),
            RelationId(self.relations.intern(relation)?),
            EntityId(self.entities.intern(tail)?),
        );
        if self.seen.insert(triple) {
            self.triples.push(triple);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn build(self) -> KnowledgeGraph {
        let type_relation_id = self.relations.id(&self.type_relation).map(RelationId);

        let mut by_relation: Vec<Vec<u32>> = Vec::new();
        by_relation.resize(self.relations.len(), Vec::new());
        for (i, t) in self.triples.iter().enumerate() {
            by_relation[t.relation.index()].push(i as u32);
        }

        let mut types_of: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
        let mut instances_of: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
        if let Some(type_rel) = type_relation_id {
            for t in self.triples.iter().filter(|t| t.relation == type_rel) {
                types_of.entry(t.head).or_default().insert(t.tail);
                instances_of.entry(t.tail).or_default().insert(t.head);
            }
        }
        let instances_of = instances_of
            .into_iter()
            .map(|(class, set)| (class, set.into_iter().collect()))
            .collect();

        KnowledgeGraph {
            entities: self.entities,
            relations: self.relations,
            triples: self.triples,
            type_relation_id,
            by_relation,
            types_of,
            instances_of,
        }
    }
}

/// Parses tab-separated `head<TAB>relation<TAB>tail` lines. Empty lines and
/// `#`-prefixed comment lines are skipped; duplicates collapse.
pub fn parse_triples(text: &str) -> Result<KnowledgeGraph, KgError> {
    parse_triples_with_type_relation(text, DEFAULT_TYPE_RELATION)
}

/// [`parse_triples`] with a custom type-relation label.
pub fn parse_triples_with_type_relation(
    text: &str,
    type_relation: &str,
) -> Result<KnowledgeGraph, KgError> {
    let mut builder = KgBuilder::with_type_relation(type_relation);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let head = fields.next().unwrap_or("");
        let relation = fields.next();
        let tail = fields.next();
        let extra = fields.count();
        let (relation, tail) = match (relation, tail, extra) {
            (Some(r), Some(t), 0) => (r, t),
            (r, t, extra) => {
                let found = 1 + r.is_some() as usize + t.is_some() as usize + extra;
                return Err(KgError::MalformedLine {
                    line: lineno + 1,
                    found,
                });
            }
        };
        if head.is_empty() || relation.is_empty() || tail.is_empty() {
            return Err(KgError::EmptyField { line: lineno + 1 });
        }
        builder.add(head, relation, tail).map_err(|e| match e {
            KgError::InvalidLabel { .. } => KgError::EmptyField { line: lineno + 1 },
            other => other,
        })?;
    }
    Ok(builder.build())
}

/// Renders the graph as TSV, one triple per line, lines sorted
/// lexicographically so equal graphs serialize identically.
pub fn write_triples(kg: &KnowledgeGraph) -> String {
    let mut lines: Vec<String> = kg
        .triples()
        .iter()
        .map(|&t| {
            let (h, r, tail) = kg.labeled(t);
            let mut line = String::with_capacity(h.len() + r.len() + tail.len() + 2);
            line.push_str(h);
            line.push('\t');
            line.push_str(r);
            line.push('\t');
            line.push_str(tail);
            line
        })
        .collect();
    lines.sort_unstable();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn stats(kg: &KnowledgeGraph) -> KGStats {
    let mut per_relation_counts = BTreeMap::new();
    for (rid, indexes) in kg.by_relation.iter().enumerate() {
        let label = kg
            .relations
            .label(rid as u32)
            .expect("relation in range")
            .to_string();
        per_relation_counts.insert(label, indexes.len() as u64);
    }
    KGStats {
        triple_count: kg.triple_count() as u64,
        entity_count: kg.entity_count() as u64,
        relation_count: kg.relation_count() as u64,
        per_relation_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    const FIXTURE: &str = "a\ttype\tCar\nb\ttype\tCar\na\tnear\tb\nb\tnear\ta\nc\ttype\tCar\n";

    #[test]
    fn parses_single_line() {
        let kg = parse_triples("a\ttype\tCar\n").unwrap();
        assert_eq!(kg.entity_count(), 2);
        assert_eq!(kg.relation_count(), 1);
        assert_eq!(kg.triple_count(), 1);
        assert!(kg.type_relation_id().is_some());
    }

    #[test]
    fn duplicate_lines_collapse() {
        let kg = parse_triples("a\tr\tb\na\tr\tb\n").unwrap();
        assert_eq!(kg.triple_count(), 1);
    }

    #[test]
    fn fixture_stats_match_hand_count() {
        let kg = parse_triples(FIXTURE).unwrap();
        let s = stats(&kg);
        assert_eq!(s.triple_count, 5);
        assert_eq!(s.relation_count, 2);
        assert_eq!(s.entity_count, 4); // a, b, c, Car
        assert_eq!(s.per_relation_counts["type"], 3);
        assert_eq!(s.per_relation_counts["near"], 2);
        assert_eq!(s.triple_count, s.per_relation_counts.values().sum::<u64>());
    }

    #[test]
    fn stats_serialize_with_spec_field_names() {
        let kg = parse_triples("a\ttype\tCar\n").unwrap();
        let json = serde_json::to_string(&stats(&kg)).unwrap();
        for key in [
            "triple_count",
            "entity_count",
            "relation_count",
            "per_relation_counts",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_triples("a\ttype\tCar\na\tb\n").unwrap_err();
        assert_eq!(err, KgError::MalformedLine { line: 2, found: 2 });
        let err = parse_triples("a\tb\tc\td\n").unwrap_err();
        assert_eq!(err, KgError::MalformedLine { line: 1, found: 4 });
    }

    #[test]
    fn empty_field_reports_line_number() {
        let err = parse_triples("a\t\tc\n").unwrap_err();
        assert_eq!(err, KgError::EmptyField { line: 1 });
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let kg = parse_triples("# header\n\na\tr\tb\n").unwrap();
        assert_eq!(kg.triple_count(), 1);
    }

    #[test]
    fn write_empty_graph_is_empty_string() {
        let kg = parse_triples("").unwrap();
        assert_eq!(write_triples(&kg), "");
        let s = stats(&kg);
        assert_eq!(
            (s.triple_count, s.entity_count, s.relation_count),
            (0, 0, 0)
        );
    }

    #[test]
    fn write_single_triple() {
        let kg = parse_triples("a\tr\tb\n").unwrap();
        assert_eq!(write_triples(&kg), "a\tr\tb\n");
    }

    #[test]
    fn interning_is_idempotent() {
        let mut vocab = Vocab::new();
        let first = vocab.intern("x").unwrap();
        let second = vocab.intern("x").unwrap();
        assert_eq!(first, second);
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.label(first), Some("x"));
    }

    #[test]
    fn vocab_rejects_bad_labels() {
        let mut vocab = Vocab::new();
        assert!(vocab.intern("").is_err());
        assert!(vocab.intern("a\tb").is_err());
        assert!(vocab.intern("a\nb").is_err());
    }

    #[test]
    fn type_index_is_projection_of_type_triples() {
        let kg = parse_triples(FIXTURE).unwrap();
        let type_rel = kg.type_relation_id().unwrap();
        for id in 0..kg.entity_count() as u32 {
            let e = EntityId(id);
            let expected: BTreeSet<EntityId> = kg
                .triples()
                .iter()
                .filter(|t| t.head == e && t.relation == type_rel)
                .map(|t| t.tail)
                .collect();
            let actual = kg.types_of(e).cloned().unwrap_or_default();
            assert_eq!(actual, expected);
        }
        let car = EntityId(kg.entities().id("Car").unwrap());
        assert!(kg.is_class(car));
        assert_eq!(kg.instances_of(car).len(), 3);
    }

    #[test]
    fn type_relation_is_overridable() {
        let kg = parse_triples_with_type_relation("a\tisA\tCar\n", "isA").unwrap();
        assert!(kg.type_relation_id().is_some());
        let car = EntityId(kg.entities().id("Car").unwrap());
        assert_eq!(kg.instances_of(car).len(), 1);
    }

    fn sorted_labeled(kg: &KnowledgeGraph) -> Vec<(String, String, String)> {
        let mut v: Vec<_> = kg
            .triples()
            .iter()
            .map(|&t| {
                let (h, r, tl) = kg.labeled(t);
                (h.to_string(), r.to_string(), tl.to_string())
            })
            .collect();
        v.sort();
        v
    }

    proptest::proptest! {
        #[test]
        fn round_trip_preserves_triples(
            triples in proptest::collection::vec(
                ("[a-z]{1,6}", "[a-z]{1,4}", "[a-z]{1,6}"), 0..50)
        ) {
            let mut builder = KgBuilder::new();
            for (h, r, t) in &triples {
                builder.add(h, r, t).unwrap();
            }
            let kg = builder.build();
            let text = write_triples(&kg);
            let reparsed = parse_triples(&text).unwrap();
            proptest::prop_assert_eq!(sorted_labeled(&kg), sorted_labeled(&reparsed));
            proptest::prop_assert_eq!(kg.triple_count(), reparsed.triple_count());
            // parse ∘ write ∘ parse is a fixed point after one round trip
            let text2 = write_triples(&reparsed);
            proptest::prop_assert_eq!(text, text2);
        }
    }

    #[test]
    fn labels_iterate_in_id_order() {
        let kg = parse_triples("b\tr\ta\na\tr\tb\n").unwrap();
        let labels = kg.entities().labels();
        assert_eq!(labels, &["b".to_string(), "a".to_string()]);
        for (i, l) in labels.iter().enumerate() {
            assert_eq!(kg.entities().id(l), Some(i as u32), "{}", format!("{l}"));
        }
    }
}
