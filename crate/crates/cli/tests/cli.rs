use std::path::Path;
use std::process::{Command, Output};

fn brandt(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brandt")).args(args).env("BRANDT_CACHE_DIR", cache).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn composite_p_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["classset", "--g", "2", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not prime"));
}

#[test]
fn genus_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["brandt", "--g", "4", "--p", "7", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degree_equal_to_characteristic_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["graph", "--kind", "big", "--g", "2", "--l", "7", "--p", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ramanujan_verdict_first_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["ramanujan", "--g", "2", "--l", "2", "--p", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("RAMANUJAN"));

    let o = brandt(dir.path(), &["ramanujan", "--g", "2", "--l", "2", "--p", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("NOT RAMANUJAN"));
}

#[test]
fn verify_small_genus_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["verify", "--g", "1", "--p", "11", "--nmax", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("FAIL"));
    assert!(out.contains("B(2^2) = B(2^1) B(2) - 2 B(2^0)"));
}

#[test]
fn brandt_json_matches_across_cache_states() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["brandt", "--g", "2", "--p", "7", "--n", "3", "--json"];
    let cold = brandt(dir.path(), &args);
    assert_eq!(cold.status.code(), Some(0));
    let warm = brandt(dir.path(), &args);
    assert_eq!(stdout(&cold), stdout(&warm));
    let bypass = brandt(dir.path(), &["--no-cache", "brandt", "--g", "2", "--p", "7", "--n", "3", "--json"]);
    assert_eq!(stdout(&cold), stdout(&bypass));

    let m = brandt_core::BrandtMatrix::from_json(&stdout(&cold)).unwrap();
    assert_eq!(m.constant_row_sum(), Some(40));
}

#[test]
fn corrupt_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let first = brandt(dir.path(), &["classset", "--g", "2", "--p", "11"]);
    assert_eq!(first.status.code(), Some(0));
    let entry = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("classes-"))
        .expect("class set was cached");
    std::fs::write(&entry, "{\"format_version\": 1, \"g\": 2").unwrap();

    let second = brandt(dir.path(), &["classset", "--g", "2", "--p", "11"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(String::from_utf8_lossy(&second.stderr).contains("warning"));
    let repaired = std::fs::read_to_string(&entry).unwrap();
    assert!(brandt_core::ClassSet::from_json(&repaired).is_ok());
}

#[test]
fn classset_json_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    let o = brandt(dir.path(), &["--no-cache", "classset", "--g", "1", "--p", "11", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let set = brandt_core::ClassSet::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(set.h(), 2);
    assert!(set.mass_certified());
}

#[test]
fn survey_csv_has_header_and_one_row_per_prime() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("survey.csv");
    let o = brandt(dir.path(), &["survey", "--g", "2", "--l", "3", "--pmax", "7", "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], brandt_core::spectral::SURVEY_HEADER);
    // p = 2, 5, 7; p = 3 is the degree itself
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("2,3,2,"));
}

#[test]
fn graph_outputs_parse() {
    let dir = tempfile::tempdir().unwrap();
    let o = brandt(dir.path(), &["graph", "--kind", "enhanced", "--g", "1", "--l", "2", "--p", "11", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let g = brandt_core::WeightedGraph::from_json(brandt_core::GraphKind::Enhanced, &stdout(&o)).unwrap();
    assert_eq!(g.vertices.len(), 4);
    assert!(g.opposites_consistent());

    let o = brandt(dir.path(), &["graph", "--kind", "little", "--g", "2", "--l", "2", "--p", "7", "--dot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph"));
}
