use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jigglekit::io::scenarios::{refined_triangle, horizontal_line_field};
use jigglekit::io::{parse_json, to_json, ComplexFile, MapFile, OutcomeBundle, OutcomeSet, SubdivisionFile};
use jigglekit::pl_maps::PLMap;
use jigglekit::simplicial::standard_simplex;
use jigglekit::transversality::distribution::ConstantDistribution;
use jigglekit::transversality::{Distribution, TransversalityReport};
use tempfile::TempDir;

fn jigglekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jigglekit")).args(args).env_remove("JIGGLEKIT_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = path(dir, name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn horizontal_spec() -> String {
    to_json(&ConstantDistribution::new(horizontal_line_field()).spec())
}

#[test]
fn subdivide_triangle_twice() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "k2.json");
    let r = jigglekit(&["subdivide", "builtin:standard_simplex(2)", "--levels", "2", "-o", s(&out)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let file: SubdivisionFile = parse_json(&read(&out)).unwrap();
    // 2^(ℓ·m) triangles of a quarter the side length each.
    assert_eq!(file.complex.simplices.len(), 16);
    assert_eq!(file.complex.vertices.len(), 15);
    assert_eq!(file.subdivision.child_vertices(), 15);
}

#[test]
fn subdivide_level_zero_is_identity() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k.json", &to_json(&ComplexFile::from_complex(&standard_simplex(2))));
    let out = path(&dir, "k0.json");
    assert_eq!(code(&jigglekit(&["subdivide", s(&input), "--levels", "0", "-o", s(&out)])), 0);
    let file: SubdivisionFile = parse_json(&read(&out)).unwrap();
    assert_eq!(file.complex.to_complex().unwrap(), standard_simplex(2));
}

#[test]
fn barycentric_scheme() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "b.json");
    let r = jigglekit(&["subdivide", "builtin:standard_simplex(2)", "--scheme", "barycentric", "-o", s(&out)]);
    assert_eq!(code(&r), 0);
    let file: SubdivisionFile = parse_json(&read(&out)).unwrap();
    assert_eq!(file.complex.simplices.len(), 6);
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"ambient_dim\": 2, \"vertices\": [[0, 0]");
    let out = path(&dir, "out.json");
    let r = jigglekit(&["subdivide", s(&bad), "-o", s(&out)]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("line"));
    assert!(!out.exists());
    assert_eq!(code(&jigglekit(&["subdivide", s(&path(&dir, "missing.json")), "-o", s(&out)])), 2);
}

#[test]
fn invalid_input_exits_three() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "out.json");
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:nonexistent", "-o", s(&out)])), 3);
    let overlap = r#"{"ambient_dim": 2, "vertices": [[0,0],[2,0],[0,2],[0.5,0.5],[3,0.5],[0.5,3]], "simplices": [[0,1,2],[3,4,5]]}"#;
    let bad = write(&dir, "overlap.json", overlap);
    assert_eq!(code(&jigglekit(&["subdivide", s(&bad), "-o", s(&out)])), 3);
}

#[test]
fn jiggle_is_reproducible_and_passes() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid", "-o", s(&a)])), 0);
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid", "-o", s(&b)])), 0);
    assert_eq!(read(&a), read(&b));
    let bundle: OutcomeBundle = parse_json(&read(&a)).unwrap();
    assert!(bundle.report.pass);
    // The jiggled map is in general position against the stored field.
    assert_eq!(code(&jigglekit(&["verify", s(&a), "--notion", "general-position"])), 0);
}

#[test]
fn tower_writes_an_outcome_set() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "t.json");
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid_tower", "-o", s(&out)])), 0);
    let set: OutcomeSet = parse_json(&read(&out)).unwrap();
    assert_eq!(set.outcomes.iter().map(|o| o.level).collect::<Vec<_>>(), vec![2, 3, 4]);
}

#[test]
fn zero_gamma_exits_five() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "g.json");
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid", "--gamma", "0", "-o", s(&out)])), 5);
}

#[test]
fn seed_precedence() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "s.json");
    let seed_of = |p: &Path| parse_json::<OutcomeBundle>(&read(p)).unwrap().config.seed;

    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid", "-o", s(&out)])), 0);
    assert_eq!(seed_of(&out), 7);

    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_jigglekit")).args(args).env("JIGGLEKIT_SEED", "123").output().unwrap()
    };
    assert_eq!(code(&with_env(&["jiggle", "builtin:grid", "-o", s(&out)])), 0);
    assert_eq!(seed_of(&out), 123);
    assert_eq!(code(&with_env(&["jiggle", "builtin:grid", "--seed", "9", "-o", s(&out)])), 0);
    assert_eq!(seed_of(&out), 9);

    let bad = Command::new(env!("CARGO_BIN_EXE_jigglekit"))
        .args(["jiggle", "builtin:grid", "-o", s(&out)])
        .env("JIGGLEKIT_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 3);
}

#[test]
fn verify_notions_on_the_subdivided_triangle() {
    let dir = TempDir::new().unwrap();
    let (_, k2, _) = refined_triangle();
    let map = write(&dir, "map.json", &to_json(&MapFile::from_map(&PLMap::identity(&k2))));
    let dist = write(&dir, "xi.json", &horizontal_spec());
    let report_path = path(&dir, "report.json");
    let strat = jigglekit(&["verify", s(&map), "--distribution", s(&dist), "--notion", "stratified", "-o", s(&report_path)]);
    assert_eq!(code(&strat), 1);
    let report: TransversalityReport = parse_json(&read(&report_path)).unwrap();
    assert!(!report.pass);
    let trans = jigglekit(&["verify", s(&map), "--distribution", s(&dist), "--notion", "transverse"]);
    assert_eq!(code(&trans), 0);
    let printed: TransversalityReport = parse_json(&String::from_utf8(trans.stdout).unwrap()).unwrap();
    assert!(printed.pass);
    // A bare map without a distribution is an invalid request.
    assert_eq!(code(&jigglekit(&["verify", s(&map)])), 3);
}

#[test]
fn render_outputs() {
    let dir = TempDir::new().unwrap();
    let bundle = path(&dir, "grid.json");
    assert_eq!(code(&jigglekit(&["jiggle", "builtin:grid", "-o", s(&bundle)])), 0);
    let svg = path(&dir, "grid.svg");
    assert_eq!(code(&jigglekit(&["render", s(&bundle), "--svg", s(&svg)])), 0);
    let text = read(&svg);
    assert!(text.starts_with("<svg") && text.contains("id=\"distribution\""));

    let tet = write(&dir, "tet.json", &to_json(&ComplexFile::from_complex(&standard_simplex(3))));
    assert_eq!(code(&jigglekit(&["render", s(&tet), "--svg", s(&path(&dir, "tet.svg"))])), 3);

    let empty = write(&dir, "empty.json", r#"{"schema_version": 1, "ambient_dim": 2, "vertices": [], "simplices": []}"#);
    let empty_svg = path(&dir, "empty.svg");
    assert_eq!(code(&jigglekit(&["render", s(&empty), "--svg", s(&empty_svg)])), 0);
    assert!(read(&empty_svg).trim_end().ends_with("</svg>"));
}
