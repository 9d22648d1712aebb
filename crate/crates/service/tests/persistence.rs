#[path = "../../core/tests/common/models.rs"]
mod models;

use archgraph_service::export::{export_graph, ExportFormat};
use archgraph_service::persist::{self, ParseMode, PersistError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn save_then_load_is_identity(seed in any::<u64>()) {
        let model = models::random_model(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        persist::save(&model, &path).unwrap();
        prop_assert_eq!(persist::load(&path, ParseMode::Strict).unwrap(), model.clone());
        persist::save(&model, &path).unwrap();
        prop_assert_eq!(std::fs::read_to_string(&path).unwrap(), persist::to_string(&model));
    }

    #[test]
    fn unknown_keys_fail_strict_and_pass_lax(seed in any::<u64>(), key in "[a-z]{3,8}") {
        let model = models::random_model(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let mut doc: serde_json::Value = serde_json::from_str(&persist::to_string(&model)).unwrap();
        prop_assume!(doc.get(&key).is_none());
        doc[&key] = serde_json::json!(true);
        let text = doc.to_string();
        let strict = persist::from_str(&text, ParseMode::Strict);
        prop_assert!(matches!(strict, Err(PersistError::UnknownKey { .. })), "{:?}", strict);
        prop_assert_eq!(persist::from_str(&text, ParseMode::Lax).unwrap(), model);
    }

    #[test]
    fn csv_export_has_one_row_per_edge(seed in any::<u64>()) {
        let model = models::random_model(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        let csv = export_graph(&model, None, ExportFormat::CsvEdges).unwrap();
        prop_assert_eq!(csv.lines().count(), model.edges.len() + 1);
        let dot = export_graph(&model, None, ExportFormat::Dot).unwrap();
        prop_assert_eq!(dot.matches(" -> ").count(), model.edges.len());
    }
}
