mod common;

use common::{data, golden, superlin};

const FIXTURES: [&str; 5] = ["ex1", "ex1_plus", "ex2a", "ex2b", "linear_only"];

#[test]
fn classify_and_min_visible_goldens() {
    for f in FIXTURES {
        let file = data(&format!("{f}.json"));
        let c = superlin(&["classify", &file]);
        assert_eq!(c.code, 0, "{f}");
        assert_eq!(c.stdout, golden(&format!("classify_{f}.txt")), "{f}");
        let m = superlin(&["min-visible", &file]);
        assert_eq!(m.code, 0, "{f}");
        assert_eq!(m.stdout, golden(&format!("min_visible_{f}.txt")), "{f}");
    }
}

#[test]
fn validate_exit_codes() {
    let ok = superlin(&["validate", &data("ex1.json")]);
    assert_eq!((ok.code, ok.stdout), (0, golden("validate_ex1.txt")));
    let bad = superlin(&["validate", &data("ex1_broken.json")]);
    assert_eq!(bad.code, 1);
    assert_eq!(bad.stdout, golden("validate_ex1_broken.txt"));
    assert!(bad.stdout.contains("PDE-1: FAIL"));
}

#[test]
fn parse_errors_exit_two() {
    let shape = superlin(&["validate", &data("bad_shape.json")]);
    assert_eq!(shape.code, 2);
    assert!(shape.stderr.contains("field \"G\""), "{}", shape.stderr);
    let syntax = superlin(&["classify", &data("bad_syntax.json")]);
    assert_eq!(syntax.code, 2);
    assert!(syntax.stderr.contains("line 5, column 21"), "{}", syntax.stderr);
    assert_eq!(superlin(&["frobnicate"]).code, 2);
    assert_eq!(superlin(&["validate", &data("missing.json")]).code, 2);
    assert_eq!(
        superlin(&["simulate", &data("ex1.json"), "--x0", "1,1", "--u", "ramp:1"]).code,
        2
    );
}

#[test]
fn emit_is_canonical() {
    for f in FIXTURES.iter().chain(&["ex1_shifted", "ex1_broken"]) {
        let file = data(&format!("{f}.json"));
        let text = std::fs::read_to_string(&file).unwrap();
        let l = superlin::io::parse_system(&text).unwrap();
        assert_eq!(superlin::io::emit_system(&l), text, "{f}");
    }
}

#[test]
fn transforms_match_fixtures() {
    let shifted = superlin(&["transform", &data("ex1.json"), "--shift", &data("shift_ex1.json")]);
    assert_eq!(shifted.code, 0);
    assert_eq!(
        shifted.stdout,
        std::fs::read_to_string(data("ex1_shifted.json")).unwrap()
    );
    let scaled = superlin(&["transform", &data("ex1.json"), "--conjugate", &data("p_scale2.json")]);
    assert_eq!(scaled.stdout, golden("conjugate_ex1.json"));
    let pruned = superlin(&["prune", &data("ex1_plus.json")]);
    assert_eq!(pruned.stdout, std::fs::read_to_string(data("ex1.json")).unwrap());
    let reduced = superlin(&["reduce", &data("ex2a.json")]);
    assert_eq!(reduced.stdout, golden("reduce_ex2a.json"));
    let fixed = superlin(&["realize-min", &data("ex2b.json")]);
    assert_eq!(fixed.stdout, std::fs::read_to_string(data("ex2b.json")).unwrap());
}

#[test]
fn files_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reduced.json");
    let rep = dir.path().join("report.json");
    let r = superlin(&[
        "reduce",
        &data("ex2a.json"),
        "--out",
        out.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden("reduce_ex2a.json"));
    let doc = superlin::io::ReportDocument::from_json(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert!(matches!(
        doc,
        superlin::io::ReportDocument::Reduction { m_v_star: 1, .. }
    ));

    let traj = dir.path().join("traj.csv");
    let s = superlin(&[
        "simulate",
        &data("ex1.json"),
        "--x0",
        "1,-0.5",
        "--u",
        "pwc:0,1;0.5,-1",
        "--T",
        "1",
        "--h",
        "0.01",
        "--traj",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(s.code, 0, "{}", s.stderr);
    assert!(s.stdout.starts_with("max_state_gap="));
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x1,x2,z1,z2,z3"));
    assert_eq!(csv.lines().count(), 102);

    let g = dir.path().join("gen.json");
    let gen = superlin(&[
        "gen",
        "--seed",
        "3",
        "--nx",
        "3",
        "--ny",
        "2",
        "--m",
        "4",
        "--deg",
        "3",
        "--rank",
        "2",
        "--scramble",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    assert_eq!(gen.stdout, "true_m_v_star=2\n");
    assert_eq!(superlin(&["min-visible", g.to_str().unwrap()]).stdout, "2\n");
    assert_eq!(superlin(&["validate", g.to_str().unwrap()]).code, 0);
}

#[test]
fn domain_errors_exit_one() {
    let infeasible = superlin(&[
        "gen", "--seed", "1", "--nx", "1", "--ny", "2", "--m", "4", "--deg", "3", "--rank", "3",
    ]);
    assert_eq!(infeasible.code, 1);
    let singular = superlin(&[
        "transform",
        &data("ex1_plus.json"),
        "--conjugate",
        &data("p_scale2.json"),
    ]);
    assert_eq!(singular.code, 1, "{}", singular.stderr);
}
