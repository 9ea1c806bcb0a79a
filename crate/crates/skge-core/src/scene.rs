//! Scene-annotation datasets and their knowledge-graph emission.
//!
//! A dataset is scenes → sub-scenes → annotated objects and events. Emission
//! follows the scene-ontology structure: scenes and sub-scenes are typed
//! `Scene`, objects/events attach to sub-scenes via `includes`, and
//! feature-of-interest objects participate in reified event instances via
//! `isParticipantOf`. Taxonomy edges are emitted as `subClassOf` triples
//! under the two root classes `FeatureOfInterest` and `Event`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashSet;
use serde::{Deserialize, Serialize};

use crate::kg::{KgBuilder, KgError, KnowledgeGraph};

pub const REL_TYPE: &str = "type";
pub const REL_SUBCLASS_OF: &str = "subClassOf";
pub const REL_HAS_SUBSCENE: &str = "hasSubScene";
pub const REL_HAS_LOCATION: &str = "hasLocation";
pub const REL_INCLUDES: &str = "includes";
pub const REL_IS_PARTICIPANT_OF: &str = "isParticipantOf";
/// Only emitted when [`OntologyConfig::emit_time_of_day`] is set.
pub const REL_HAS_TIME_OF_DAY: &str = "hasTimeOfDay";

pub const CLASS_SCENE: &str = "Scene";
pub const CLASS_FOI: &str = "FeatureOfInterest";
pub const CLASS_EVENT: &str = "Event";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SceneError {
    #[error("invalid dataset JSON: {0}")]
    Json(String),
    #[error("duplicate scene id {0:?}")]
    DuplicateSceneId(String),
    #[error("duplicate sub-scene id {0:?}")]
    DuplicateSubSceneId(String),
    #[error("scene {0:?} has no sub-scenes")]
    EmptySubScenes(String),
    #[error("scene {scene:?}: sub-scene {sub_scene:?} breaks timestamp order")]
    TimestampOrder { scene: String, sub_scene: String },
    #[error("object {0:?} has an empty category")]
    EmptyCategory(String),
    #[error("taxonomy cycle through {0:?}")]
    TaxonomyCycle(String),
    #[error("category {0:?} does not resolve to a root class")]
    UnresolvableCategory(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("unknown event class {0:?}")]
    UnknownEventClass(String),
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Top-level input: `{"scenes": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneDataset {
    pub scenes: Vec<SceneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub id: String,
    pub location: String,
    pub sub_scenes: Vec<SubSceneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSceneRecord {
    pub id: String,
    /// Seconds; must be non-negative and non-decreasing within a scene.
    pub timestamp: f64,
    #[serde(default)]
    pub objects: Vec<ObjectRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: String,
    /// Taxonomy leaf, e.g. `vehicle.car`.
    pub category: String,
    #[serde(default)]
    pub events: Vec<String>,
}

/// Ontology configuration: the feature-of-interest taxonomy (child → parent,
/// chains ending at [`CLASS_FOI`]), the closed set of event classes, and the
/// fixed relation vocabulary plus user extras.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OntologyConfig {
    #[serde(default)]
    pub taxonomy: BTreeMap<String, String>,
    #[serde(default)]
    pub event_classes: BTreeSet<String>,
    /// Extra relation labels declared into the vocabulary even when unused.
    #[serde(default)]
    pub extra_relations: Vec<String>,
    /// Bucket sub-scene timestamps into coarse time-of-day entities
    /// (`morning`/`afternoon`/`evening`/`night`) linked via `hasTimeOfDay`.
    /// Off by default: literal-valued nodes poison embedding training.
    #[serde(default)]
    pub emit_time_of_day: bool,
}

impl OntologyConfig {
    /// The fixed relation labels this config emits, in declaration order.
    pub fn relation_labels(&self) -> Vec<&str> {
        let mut labels = alloc::vec![
            REL_TYPE,
            REL_SUBCLASS_OF,
            REL_HAS_SUBSCENE,
            REL_HAS_LOCATION,
            REL_INCLUDES,
            REL_IS_PARTICIPANT_OF,
        ];
        if self.emit_time_of_day {
            labels.push(REL_HAS_TIME_OF_DAY);
        }
        labels.extend(self.extra_relations.iter().map(String::as_str));
        labels
    }

    /// Walks `category` up the taxonomy, erroring on unknown categories,
    /// cycles, and chains that do not end at a root class.
    pub fn resolve_category(&self, category: &str) -> Result<(), SceneError> {
        if !self.taxonomy.contains_key(category) {
            return Err(SceneError::UnknownCategory(category.to_string()));
        }
        let mut current = category;
        let mut hops = 0usize;
        while let Some(parent) = self.taxonomy.get(current) {
            if parent == CLASS_FOI || parent == CLASS_EVENT {
                return Ok(());
            }
            current = parent;
            hops += 1;
            if hops > self.taxonomy.len() {
                return Err(SceneError::TaxonomyCycle(category.to_string()));
            }
        }
        Err(SceneError::UnresolvableCategory(category.to_string()))
    }
}

/// Parses and validates a scene dataset from JSON text.
pub fn load_scene_dataset(json_text: &str) -> Result<SceneDataset, SceneError> {
    let dataset: SceneDataset =
        serde_json::from_str(json_text).map_err(|e| SceneError::Json(e.to_string()))?;
    validate_dataset(&dataset)?;
    Ok(dataset)
}

/// Parses and validates an ontology config from JSON text.
pub fn load_ontology_config(json_text: &str) -> Result<OntologyConfig, SceneError> {
    let config: OntologyConfig =
        serde_json::from_str(json_text).map_err(|e| SceneError::Json(e.to_string()))?;
    validate_ontology(&config)?;
    Ok(config)
}

pub fn validate_dataset(dataset: &SceneDataset) -> Result<(), SceneError> {
    let mut scene_ids: HashSet<&str> = HashSet::new();
    let mut sub_ids: HashSet<&str> = HashSet::new();
    for scene in &dataset.scenes {
        if !scene_ids.insert(&scene.id) {
            return Err(SceneError::DuplicateSceneId(scene.id.clone()));
        }
        if scene.sub_scenes.is_empty() {
            return Err(SceneError::EmptySubScenes(scene.id.clone()));
        }
        let mut last_ts = f64::NEG_INFINITY;
        for sub in &scene.sub_scenes {
            if !sub_ids.insert(&sub.id) {
                return Err(SceneError::DuplicateSubSceneId(sub.id.clone()));
            }
            if !(sub.timestamp >= 0.0) || sub.timestamp < last_ts {
                return Err(SceneError::TimestampOrder {
                    scene: scene.id.clone(),
                    sub_scene: sub.id.clone(),
                });
            }
            last_ts = sub.timestamp;
            for object in &sub.objects {
                if object.category.is_empty() {
                    return Err(SceneError::EmptyCategory(object.id.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Checks the taxonomy is a forest whose chains reach a root class.
pub fn validate_ontology(config: &OntologyConfig) -> Result<(), SceneError> {
    for category in config.taxonomy.keys() {
        config.resolve_category(category)?;
    }
    Ok(())
}

/// One `(child, subClassOf, parent)` triple per taxonomy edge, plus one
/// `(eventClass, subClassOf, Event)` per event class.
pub fn taxonomy_triples(config: &OntologyConfig) -> Result<Vec<(String, String, String)>, SceneError> {
    validate_ontology(config)?;
    let mut triples = Vec::new();
    for (child, parent) in &config.taxonomy {
        triples.push((child.clone(), REL_SUBCLASS_OF.to_string(), parent.clone()));
    }
    for event_class in &config.event_classes {
        triples.push((
            event_class.clone(),
            REL_SUBCLASS_OF.to_string(),
            CLASS_EVENT.to_string(),
        ));
    }
    Ok(triples)
}

fn time_of_day(timestamp: f64) -> &'static str {
    let seconds_in_day = (timestamp % 86_400.0 + 86_400.0) % 86_400.0;
    let hour = (seconds_in_day / 3_600.0) as u32;
    match hour {
        5..=11 => "morning",
        12..=16 => "afternoon",
        17..=20 => "evening",
        _ => "night",
    }
}

/// Emits the scene knowledge graph for a validated dataset.
///
/// Event instances are reified per (sub-scene, event class, object) with the
/// id `<subSceneId>/<eventClass>/<objectId>`, so `isParticipantOf` has a
/// concrete target. Emission is deterministic: iteration follows input
/// order and ids are assigned first-appearance.
pub fn emit_triples(
    dataset: &SceneDataset,
    config: &OntologyConfig,
) -> Result<KnowledgeGraph, SceneError> {
    validate_dataset(dataset)?;
    let mut builder = KgBuilder::new();
    for relation in config.relation_labels() {
        builder.declare_relation(relation)?;
    }
    for (child, relation, parent) in taxonomy_triples(config)? {
        builder.add(&child, &relation, &parent)?;
    }
    for scene in &dataset.scenes {
        builder.add(&scene.id, REL_TYPE, CLASS_SCENE)?;
        builder.add(&scene.id, REL_HAS_LOCATION, &scene.location)?;
        for sub in &scene.sub_scenes {
            builder.add(&scene.id, REL_HAS_SUBSCENE, &sub.id)?;
            builder.add(&sub.id, REL_TYPE, CLASS_SCENE)?;
            if config.emit_time_of_day {
                builder.add(&sub.id, REL_HAS_TIME_OF_DAY, time_of_day(sub.timestamp))?;
            }
            for object in &sub.objects {
                config.resolve_category(&object.category)?;
                builder.add(&sub.id, REL_INCLUDES, &object.id)?;
                builder.add(&object.id, REL_TYPE, &object.category)?;
                for event_class in &object.events {
                    if !config.event_classes.contains(event_class) {
                        return Err(SceneError::UnknownEventClass(event_class.clone()));
                    }
                    let instance = format!("{}/{}/{}", sub.id, event_class, object.id);
                    builder.add(&sub.id, REL_INCLUDES, &instance)?;
                    builder.add(&instance, REL_TYPE, event_class)?;
                    builder.add(&object.id, REL_IS_PARTICIPANT_OF, &instance)?;
                }
            }
        }
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::write_triples;
    use alloc::vec;

    fn toy_config() -> OntologyConfig {
        let mut taxonomy = BTreeMap::new();
        taxonomy.insert("vehicle.car".to_string(), "vehicle".to_string());
        taxonomy.insert("vehicle".to_string(), CLASS_FOI.to_string());
        let mut event_classes = BTreeSet::new();
        event_classes.insert("parked_car".to_string());
        OntologyConfig {
            taxonomy,
            event_classes,
            ..OntologyConfig::default()
        }
    }

    fn toy_dataset() -> SceneDataset {
        SceneDataset {
            scenes: vec![SceneRecord {
                id: "s".to_string(),
                location: "boston".to_string(),
                sub_scenes: vec![SubSceneRecord {
                    id: "s0".to_string(),
                    timestamp: 0.5,
                    objects: vec![ObjectRecord {
                        id: "o1".to_string(),
                        category: "vehicle.car".to_string(),
                        events: vec!["parked_car".to_string()],
                    }],
                }],
            }],
        }
    }

    #[test]
    fn loads_minimal_dataset() {
        let ds = load_scene_dataset(r#"{"scenes": []}"#).unwrap();
        assert!(ds.scenes.is_empty());
    }

    #[test]
    fn loads_toy_dataset() {
        let json = serde_json::to_string(&toy_dataset()).unwrap();
        let ds = load_scene_dataset(&json).unwrap();
        assert_eq!(ds.scenes.len(), 1);
        assert_eq!(ds.scenes[0].sub_scenes[0].objects[0].category, "vehicle.car");
    }

    #[test]
    fn rejects_out_of_order_timestamps() {
        let mut ds = toy_dataset();
        ds.scenes[0].sub_scenes.push(SubSceneRecord {
            id: "s1".to_string(),
            timestamp: 0.1,
            objects: vec![],
        });
        let err = validate_dataset(&ds).unwrap_err();
        assert!(matches!(err, SceneError::TimestampOrder { .. }));
    }

    #[test]
    fn rejects_duplicate_ids_by_name() {
        let mut ds = toy_dataset();
        ds.scenes.push(ds.scenes[0].clone());
        match validate_dataset(&ds).unwrap_err() {
            SceneError::DuplicateSceneId(id) => assert_eq!(id, "s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_sub_scenes() {
        let ds = SceneDataset {
            scenes: vec![SceneRecord {
                id: "s".to_string(),
                location: "x".to_string(),
                sub_scenes: vec![],
            }],
        };
        assert!(matches!(
            validate_dataset(&ds).unwrap_err(),
            SceneError::EmptySubScenes(_)
        ));
    }

    #[test]
    fn schema_violation_names_field() {
        let err = load_scene_dataset(r#"{"scenes": [{"id": "s"}]}"#).unwrap_err();
        match err {
            SceneError::Json(msg) => assert!(msg.contains("location"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn taxonomy_triples_for_car_chain() {
        let triples = taxonomy_triples(&toy_config()).unwrap();
        assert!(triples.contains(&(
            "vehicle.car".to_string(),
            REL_SUBCLASS_OF.to_string(),
            "vehicle".to_string()
        )));
        assert!(triples.contains(&(
            "vehicle".to_string(),
            REL_SUBCLASS_OF.to_string(),
            CLASS_FOI.to_string()
        )));
        assert!(triples.contains(&(
            "parked_car".to_string(),
            REL_SUBCLASS_OF.to_string(),
            CLASS_EVENT.to_string()
        )));
        assert_eq!(triples.len(), 3);
    }

    #[test]
    fn empty_taxonomy_yields_no_taxonomy_triples() {
        let triples = taxonomy_triples(&OntologyConfig::default()).unwrap();
        assert!(triples.is_empty());
    }

    #[test]
    fn taxonomy_cycle_detected() {
        let mut config = OntologyConfig::default();
        config.taxonomy.insert("a".to_string(), "b".to_string());
        config.taxonomy.insert("b".to_string(), "a".to_string());
        assert!(matches!(
            taxonomy_triples(&config).unwrap_err(),
            SceneError::TaxonomyCycle(_)
        ));
    }

    #[test]
    fn dangling_parent_is_unresolvable() {
        let mut config = OntologyConfig::default();
        config
            .taxonomy
            .insert("vehicle.car".to_string(), "vehicle".to_string());
        assert!(matches!(
            validate_ontology(&config).unwrap_err(),
            SceneError::UnresolvableCategory(_)
        ));
    }

    #[test]
    fn golden_emission_is_exact() {
        let kg = emit_triples(&toy_dataset(), &toy_config()).unwrap();
        let expected_instance = [
            ("s", "type", "Scene"),
            ("s", "hasSubScene", "s0"),
            ("s0", "type", "Scene"),
            ("s", "hasLocation", "boston"),
            ("s0", "includes", "o1"),
            ("s0", "includes", "s0/parked_car/o1"),
            ("o1", "type", "vehicle.car"),
            ("s0/parked_car/o1", "type", "parked_car"),
            ("o1", "isParticipantOf", "s0/parked_car/o1"),
        ];
        let taxonomy_count = 3;
        assert_eq!(kg.triple_count(), expected_instance.len() + taxonomy_count);
        let rendered = write_triples(&kg);
        for (h, r, t) in expected_instance {
            let line = format!("{h}\t{r}\t{t}\n");
            assert!(rendered.contains(&line), "missing {line:?}");
        }
        // byte-identical across runs
        let again = write_triples(&emit_triples(&toy_dataset(), &toy_config()).unwrap());
        assert_eq!(rendered, again);
    }

    #[test]
    fn empty_dataset_emits_only_taxonomy() {
        let kg = emit_triples(&SceneDataset::default(), &toy_config()).unwrap();
        assert_eq!(kg.triple_count(), 3);
        // the fixed relation vocabulary is declared even when unused
        assert_eq!(kg.relation_count(), 6);
    }

    #[test]
    fn two_events_reify_two_instances() {
        let mut ds = toy_dataset();
        let mut config = toy_config();
        config.event_classes.insert("moving_car".to_string());
        ds.scenes[0].sub_scenes[0].objects[0]
            .events
            .push("moving_car".to_string());
        let kg = emit_triples(&ds, &config).unwrap();
        let rendered = write_triples(&kg);
        for instance in ["s0/parked_car/o1", "s0/moving_car/o1"] {
            assert!(rendered.contains(&format!("o1\tisParticipantOf\t{instance}\n")));
            assert!(rendered.contains(&format!("s0\tincludes\t{instance}\n")));
            assert!(rendered.contains(&format!("{instance}\ttype\t")));
        }
        // 9 + 3 extra instance triples + 1 extra taxonomy (moving_car subClassOf Event)
        assert_eq!(kg.triple_count(), 9 + 3 + 3 + 1);
    }

    #[test]
    fn unknown_category_and_event_are_named() {
        let mut ds = toy_dataset();
        ds.scenes[0].sub_scenes[0].objects[0].category = "animal.dog".to_string();
        match emit_triples(&ds, &toy_config()).unwrap_err() {
            SceneError::UnknownCategory(c) => assert_eq!(c, "animal.dog"),
            other => panic!("unexpected {other:?}"),
        }
        let mut ds = toy_dataset();
        ds.scenes[0].sub_scenes[0].objects[0].events = vec!["levitating_car".to_string()];
        match emit_triples(&ds, &toy_config()).unwrap_err() {
            SceneError::UnknownEventClass(e) => assert_eq!(e, "levitating_car"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn instance_triple_count_formula_holds() {
        // 2 scenes x 2 sub-scenes, unique objects, one event each
        let mut scenes = Vec::new();
        for s in 0..2 {
            let mut sub_scenes = Vec::new();
            for ss in 0..2 {
                let object_id = format!("o{s}{ss}");
                sub_scenes.push(SubSceneRecord {
                    id: format!("s{s}.{ss}"),
                    timestamp: ss as f64,
                    objects: vec![ObjectRecord {
                        id: object_id,
                        category: "vehicle.car".to_string(),
                        events: vec!["parked_car".to_string()],
                    }],
                });
            }
            scenes.push(SceneRecord {
                id: format!("s{s}"),
                location: "loc".to_string(),
                sub_scenes,
            });
        }
        let ds = SceneDataset { scenes };
        let kg = emit_triples(&ds, &toy_config()).unwrap();
        let (n_scenes, n_subs, n_objects, n_events) = (2, 4, 4, 4);
        let instance = 2 * n_scenes + 2 * n_subs + n_objects + 3 * n_events + n_objects;
        assert_eq!(kg.triple_count(), instance + 3);
    }

    #[test]
    fn time_of_day_flag_adds_bucket_triples() {
        let mut config = toy_config();
        config.emit_time_of_day = true;
        let mut ds = toy_dataset();
        ds.scenes[0].sub_scenes[0].timestamp = 8.0 * 3600.0;
        let kg = emit_triples(&ds, &config).unwrap();
        assert!(write_triples(&kg).contains("s0\thasTimeOfDay\tmorning\n"));
        assert_eq!(kg.relation_count(), 7);
    }
}
