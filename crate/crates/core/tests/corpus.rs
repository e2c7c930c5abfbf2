use cordcat::dsl::{self, Decl};
use cordcat::protocols::{self, analyze};

fn load(name: &str) -> dsl::SourceFile {
    let path = format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    dsl::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn nspk_file_matches_builders() {
    let f = load("nspk.cord");
    assert!(f.process("NSPK-SESSION").unwrap().alpha_eq(&protocols::nspk().process));
    assert!(f.interaction("NSPK1").unwrap().alpha_eq(&protocols::nspk1()));
    assert!(f.interaction("NSPK2").unwrap().alpha_eq(&protocols::nspk2()));
    let honest = f.protocol("NSPK-HONEST").unwrap();
    assert_eq!(honest.bindings, protocols::nspk().bindings);
    assert!(analyze(&honest, &f.goal("honest-goal").unwrap()).unwrap().passed());
}

#[test]
fn attack_from_file() {
    let f = load("nspk.cord");
    let report = analyze(&f.protocol("NSPK").unwrap(), &f.goal("attack-goal").unwrap()).unwrap();
    assert!(!report.passed());
    for claim in ["X = X''", "m = m''", "n = n''"] {
        assert!(report.find(claim).unwrap().pass, "{claim}");
    }
    assert!(!report.find("Z = Y''").unwrap().pass);
}

#[test]
fn golden_composite() {
    let f = load("fig1.cord");
    let fig = f.interaction("FIG1").unwrap();
    assert!(fig.alpha_eq(&protocols::attack_composite()));
    assert_eq!(fig.body.space().len(), 19);
    assert_eq!(
        dsl::print_interaction("FIG1", &fig, true),
        dsl::print_interaction("FIG1", &protocols::attack_composite(), true)
    );
}

#[test]
fn corpus_round_trips() {
    for name in ["nspk.cord", "fig1.cord"] {
        let f = load(name);
        let once = dsl::print_canonical(&f);
        let again = dsl::parse(&once).unwrap();
        assert_eq!(dsl::print_canonical(&again), once, "{name}");
        for (a, b) in f.decls.iter().zip(&again.decls) {
            match (a, b) {
                (Decl::Process { process: p, .. }, Decl::Process { process: q, .. }) => assert!(p.alpha_eq(q)),
                (Decl::Interaction { interaction: p, .. }, Decl::Interaction { interaction: q, .. }) => {
                    assert!(p.alpha_eq(q))
                }
                (a, b) => assert_eq!(a.name(), b.name()),
            }
        }
    }
}
