use jigglekit::engine::ModeRegistry;
use jigglekit::grassmannian::Plane;
use jigglekit::io::scenarios::unit_square_grid;
use jigglekit::io::{
    builtin_complex, builtin_scenario, parse_json, render_svg, to_json, ComplexFile, IoFailure, MapFile, OutcomeBundle,
    ScenarioFile,
};
use jigglekit::pl_maps::PLMap;
use jigglekit::simplicial::{crystalline_subdivide, standard_simplex, SimplicialComplex};
use jigglekit::transversality::distribution::ConstantDistribution;
use jigglekit::transversality::{assess, AssessOptions, Notion};
use jigglekit::JiggleError;
use proptest::prelude::*;

const SCENARIOS: [&str; 6] = ["grid", "grid_tower", "refined_triangle", "strip", "box", "box_rotor"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn complex_files_round_trip(n in 1usize..4, level in 0u32..3) {
        let (k, _) = crystalline_subdivide(&unit_square_grid(n).unwrap(), level);
        let file = ComplexFile::from_complex(&k);
        let back: ComplexFile = parse_json(&to_json(&file)).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_complex().unwrap(), k);
    }

    #[test]
    fn map_files_round_trip(shift in prop::collection::vec(-1e3..1e3f64, 2)) {
        let k = unit_square_grid(2).unwrap();
        let f = PLMap::identity(&k);
        let g = f.with_images(f.images().iter().map(|p| p.map(|x| x * 1.0001) + nalgebra::DVector::from_column_slice(&shift)).collect()).unwrap();
        let back: MapFile = parse_json(&to_json(&MapFile::from_map(&g))).unwrap();
        prop_assert_eq!(back.to_map().unwrap(), g);
    }
}

#[test]
fn builtin_scenarios_round_trip() {
    for name in SCENARIOS {
        let s = builtin_scenario(name).unwrap();
        let back: ScenarioFile = parse_json(&to_json(&s)).unwrap();
        assert_eq!(back, s, "{name}");
        assert!(back.resolve().is_ok(), "{name}");
    }
    assert!(matches!(builtin_scenario("nope"), Err(JiggleError::UnknownName { .. })));
}

#[test]
fn outcome_bundle_round_trip_is_byte_identical() {
    let scenario = builtin_scenario("refined_triangle").unwrap().resolve().unwrap();
    let outcomes = scenario.run(&ModeRegistry::default()).unwrap();
    let bundle = &scenario.bundles(&outcomes)[0];
    let text = to_json(bundle);
    let back: OutcomeBundle = parse_json(&text).unwrap();
    assert_eq!(to_json(&back), text);
    assert_eq!(back.to_outcome().unwrap(), outcomes[0]);
}

#[test]
fn malformed_json_reports_its_location() {
    match parse_json::<ComplexFile>("{\n  \"ambient_dim\": 2,\n  \"vertices\": [[0, 0],\n") {
        Err(IoFailure::Parse(m)) => assert!(m.contains("line"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_complexes_are_rejected() {
    let overlap = r#"{"schema_version": 1, "ambient_dim": 2,
        "vertices": [[0,0],[2,0],[0,2],[0.5,0.5],[3,0.5],[0.5,3]],
        "simplices": [[0,1,2],[3,4,5]]}"#;
    let err = parse_json::<ComplexFile>(overlap).unwrap().to_complex().unwrap_err();
    assert!(matches!(err, JiggleError::FaceIntersectionViolation { .. }), "{err:?}");

    let out_of_range = r#"{"schema_version": 1, "ambient_dim": 2, "vertices": [[0,0],[1,0]], "simplices": [[0,5]]}"#;
    let err = parse_json::<ComplexFile>(out_of_range).unwrap().to_complex().unwrap_err();
    assert!(matches!(err, JiggleError::IndexOutOfRange { index: 5, count: 2 }), "{err:?}");

    let future = r#"{"schema_version": 2, "ambient_dim": 1, "vertices": [[0],[1]], "simplices": [[0,1]]}"#;
    let err = parse_json::<ComplexFile>(future).unwrap().to_complex().unwrap_err();
    assert!(matches!(err, JiggleError::Malformed(_)), "{err:?}");
}

#[test]
fn builtin_complexes_parse_their_arguments() {
    assert_eq!(builtin_complex("standard_simplex(3)").unwrap(), standard_simplex(3));
    assert_eq!(builtin_complex("unit_square_grid(2)").unwrap().top_simplices().len(), 8);
    assert!(matches!(builtin_complex("unit_square_grid(x)"), Err(JiggleError::Malformed(_))));
}

fn lines_in_group<'a>(svg: &'a str, group: &str) -> Vec<&'a str> {
    let start = svg.find(&format!("<g id=\"{group}\">")).expect("group present");
    let end = start + svg[start..].find("</g>").unwrap();
    svg[start..end].lines().filter(|l| l.starts_with("<line")).collect()
}

fn attr(line: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let at = line.find(&key).unwrap() + key.len();
    line[at..at + line[at..].find('"').unwrap()].parse().unwrap()
}

#[test]
fn grid_drawing_with_horizontal_field() {
    let k = unit_square_grid(2).unwrap();
    let f = PLMap::identity(&k);
    let xi = ConstantDistribution::new(Plane::coordinate(2, &[0]));
    let report = assess(&f, &xi, &AssessOptions { notion: Notion::Stratified, ..Default::default() }).unwrap();
    let svg = render_svg(&f, Some(&xi), Some(&report)).unwrap();
    assert_eq!(svg, render_svg(&f, Some(&xi), Some(&report)).unwrap());
    assert_eq!(svg.matches("<polygon").count(), 8);
    assert_eq!(lines_in_group(&svg, "edges").len(), k.simplices(1).len());
    let glyphs = lines_in_group(&svg, "distribution");
    assert_eq!(glyphs.len(), 13 * 13);
    assert!(glyphs.iter().all(|l| attr(l, "y1") == attr(l, "y2")));
    // Horizontal edges fail stratified transversality and are drawn red.
    let red = lines_in_group(&svg, "edges").into_iter().filter(|l| l.contains("#d62728")).count();
    assert_eq!(red, 6);
}

#[test]
fn svg_rejects_other_dimensions_and_handles_empty_input() {
    let tet = PLMap::identity(&standard_simplex(3));
    assert!(matches!(render_svg(&tet, None, None), Err(JiggleError::UnsupportedDimension(3))));
    let empty = PLMap::identity(&SimplicialComplex::empty(2));
    let svg = render_svg(&empty, None, None).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("<polygon"));
}
