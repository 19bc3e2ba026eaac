use std::path::PathBuf;

use uavfl_core::model::check_feasibility;
use uavfl_core::oracle::{grid_search, GoldenRecord, GridSpec};
use uavfl_core::scenarios::tiny_scenario;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tiny.toml")
}

/// Set `UAVFL_BLESS=1` to rewrite the stored record.
#[test]
fn tiny_grid_matches_the_stored_record() {
    let config = tiny_scenario();
    let spec = GridSpec::with_points(17);
    let res = grid_search(&config, &spec).unwrap();
    assert!(check_feasibility(&config, &res.decision).unwrap().is_empty());

    let path = golden_path();
    if std::env::var_os("UAVFL_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, GoldenRecord::new(&config, &spec, &res).to_toml().unwrap()).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(&path).expect("golden record missing; rerun with UAVFL_BLESS=1");
    let rec = GoldenRecord::from_toml(&stored).unwrap();
    rec.check(&config, &spec, &res, 1e-12).unwrap();
    assert_eq!(rec.points_evaluated, res.points_evaluated);
}
