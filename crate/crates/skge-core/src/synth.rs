//! Seeded synthetic scene datasets with clustered class structure.
//!
//! The generator produces 4 feature-of-interest classes with 50 instances
//! each, spread over 10 scenes x 5 sub-scenes, where every object
//! participates in one or two events drawn from its own class's event pool
//! (class-correlated participation). The emitted graph lands around 1,400 to
//! 1,500 triples, small enough for fast tests but structured enough for
//! embeddings to pick up type and participation semantics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kg::KnowledgeGraph;
use crate::scene::{
    emit_triples, ObjectRecord, OntologyConfig, SceneDataset, SceneRecord, SubSceneRecord,
    CLASS_FOI,
};

/// Category leaf, its taxonomy parent, and its two correlated event classes.
const CATEGORIES: [(&str, &str, [&str; 2]); 4] = [
    ("vehicle.car", "vehicle", ["parked_car", "moving_car"]),
    ("vehicle.truck", "vehicle", ["parked_truck", "moving_truck"]),
    (
        "human.pedestrian",
        "human",
        ["walking_pedestrian", "standing_pedestrian"],
    ),
    (
        "movable_object.barrier",
        "movable_object",
        ["static_barrier", "shifted_barrier"],
    ),
];

const LOCATIONS: [&str; 4] = [
    "boston-seaport",
    "singapore-onenorth",
    "boston-downtown",
    "singapore-queenstown",
];

const INSTANCES_PER_CLASS: usize = 50;
const SCENES: usize = 10;
const SUBS_PER_SCENE: usize = 5;

/// The ontology config matching [`clustered_scene_dataset`].
pub fn clustered_ontology() -> OntologyConfig {
    let mut taxonomy = BTreeMap::new();
    let mut event_classes = BTreeSet::new();
    for (leaf, parent, events) in CATEGORIES {
        taxonomy.insert(leaf.to_string(), parent.to_string());
        taxonomy.insert(parent.to_string(), CLASS_FOI.to_string());
        for event in events {
            event_classes.insert(event.to_string());
        }
    }
    OntologyConfig {
        taxonomy,
        event_classes,
        ..OntologyConfig::default()
    }
}

/// Deterministic clustered dataset: 4 classes x 50 objects round-robined
/// over 50 sub-scenes, each object with 1-2 events from its class pool.
pub fn clustered_scene_dataset(seed: u64) -> (SceneDataset, OntologyConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub_count = SCENES * SUBS_PER_SCENE;

    // objects grouped per sub-scene index
    let mut per_sub: Vec<Vec<ObjectRecord>> = (0..sub_count).map(|_| Vec::new()).collect();
    for (class_index, (leaf, _, events)) in CATEGORIES.iter().enumerate() {
        for instance in 0..INSTANCES_PER_CLASS {
            let object_index = class_index * INSTANCES_PER_CLASS + instance;
            let mut picked = Vec::new();
            picked.push(events[rng.random_range(0..events.len())].to_string());
            if rng.random_bool(0.5) {
                let other = events[rng.random_range(0..events.len())].to_string();
                if !picked.contains(&other) {
                    picked.push(other);
                }
            }
            per_sub[object_index % sub_count].push(ObjectRecord {
                id: format!("obj-{leaf}-{instance:03}"),
                category: leaf.to_string(),
                events: picked,
            });
        }
    }

    let mut scenes = Vec::with_capacity(SCENES);
    let mut sub_iter = per_sub.into_iter();
    for scene_index in 0..SCENES {
        let mut sub_scenes = Vec::with_capacity(SUBS_PER_SCENE);
        for sub_index in 0..SUBS_PER_SCENE {
            sub_scenes.push(SubSceneRecord {
                id: format!("scene-{scene_index:02}/sub-{sub_index:02}"),
                timestamp: sub_index as f64 * 0.5,
                objects: sub_iter.next().expect("sub count matches"),
            });
        }
        scenes.push(SceneRecord {
            id: format!("scene-{scene_index:02}"),
            location: LOCATIONS[scene_index % LOCATIONS.len()].to_string(),
            sub_scenes,
        });
    }

    (SceneDataset { scenes }, clustered_ontology())
}

/// Emitted knowledge graph of [`clustered_scene_dataset`].
pub fn clustered_scene_kg(seed: u64) -> KnowledgeGraph {
    let (dataset, config) = clustered_scene_dataset(seed);
    emit_triples(&dataset, &config).expect("generated dataset is valid")
}
