use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    format!("{}/../core/corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cordcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cordcat")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn int_compose_prints_the_golden_composite() {
    let fig1 = corpus("fig1.cord");
    let f = cordcat::dsl::parse(&std::fs::read_to_string(&fig1).unwrap()).unwrap();
    let golden = cordcat::dsl::print_interaction("composite", &f.interaction("FIG1").unwrap(), true);
    for strategy in ["both", "minus", "plus"] {
        let o = cordcat(&["int-compose", &fig1, "NSPK1", "NSPK2", "--strategy", strategy]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), golden, "{strategy}");
    }
}

#[test]
fn attack_analysis_exits_one() {
    let o = cordcat(&["analyze", &corpus("nspk.cord"), "NSPK", "attack-goal"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("Z = Y'': FAIL"), "{out}");
    assert!(out.contains("X = X'': PASS"));
    assert!(out.contains("derived by Z'"));
}

#[test]
fn honest_analysis_exits_zero() {
    let o = cordcat(&["analyze", &corpus("nspk.cord"), "NSPK-HONEST", "honest-goal", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["agreement"].as_array().unwrap().len(), 4);
}

#[test]
fn axioms_pass() {
    let o = cordcat(&["axioms", "--sizes", "2,2,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("uniformity [loop]: fails as expected"));
}

#[test]
fn census_reports() {
    let o = cordcat(&["census", "1", "1", "2", "--uniform"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("census 1 1 2 uniform\nclasses 2\n"));
}

#[test]
fn compose_and_trace() {
    let dir = std::env::temp_dir().join(format!("cordcat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("small.cord");
    std::fs::write(
        &file,
        "process F = (x, y) [ s @ #A : send(f(x)) ] <g(x, y), y>;\nprocess G = (u, v) [] <v, u>;\n",
    )
    .unwrap();
    let file = file.to_str().unwrap();
    let o = cordcat(&["compose", file, "F", "G"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("<_1, g(_0, _1)>"), "{}", stdout(&o));
    let o = cordcat(&["trace", file, "F", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("freed"), "{}", stdout(&o));
}

#[test]
fn print_is_idempotent() {
    let o = cordcat(&["print", &corpus("nspk.cord")]);
    assert_eq!(o.status.code(), Some(0));
    let tmp = std::env::temp_dir().join(format!("cordcat-print-{}.cord", std::process::id()));
    std::fs::write(&tmp, stdout(&o)).unwrap();
    let again = cordcat(&["print", tmp.to_str().unwrap()]);
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(cordcat(&["census", "1"]).status.code(), Some(2));
    assert_eq!(cordcat(&["axioms", "--sizes", "2,2"]).status.code(), Some(2));
    assert_eq!(cordcat(&["analyze", &corpus("nspk.cord"), "NOPE", "attack-goal"]).status.code(), Some(2));
    assert_eq!(cordcat(&["compose", "/nonexistent.cord", "P", "Q"]).status.code(), Some(2));
    let tmp = std::env::temp_dir().join(format!("cordcat-bad-{}.cord", std::process::id()));
    std::fs::write(&tmp, "process P = (x)\n  [ a @ #A : sned(x) ] <x>;\n").unwrap();
    let o = cordcat(&["print", tmp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":2:"), "{err}");
}
