//! Protocols as processes with desired runs, the Needham-Schroeder public
//! key suite and its man-in-the-middle composite, and the agreement and
//! secrecy checks run against resolved runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cords::{Action, CordError, CordSpace, Event, Label, Run, RunVerdict};
use crate::int_cat::{int_compose, IntError, IntObject, Interaction, Strategy};
use crate::proc_cat::{Arity, CordProcess, ProcError};
use crate::terms::{free_vars, normalize_decr, term_equal, Sort, Subst, Term, Var, PAIR, PK, SK, ENC};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid run: {0}")]
    Run(String),
    #[error("match failed at {label}: {detail}")]
    Match { label: Label, detail: String },
    #[error("cannot resolve {label}: {detail}")]
    Resolution { label: Label, detail: String },
    #[error("goal error: {0}")]
    Goal(String),
    #[error(transparent)]
    Cord(#[from] CordError),
    #[error(transparent)]
    Proc(#[from] ProcError),
    #[error(transparent)]
    Int(#[from] IntError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Protocol {
    pub process: CordProcess,
    pub desired_runs: Vec<Run>,
    /// Role instantiation applied before the run executes (e.g. `Y' := Y`).
    pub bindings: Subst,
}

impl Protocol {
    pub fn new(process: CordProcess, desired_runs: Vec<Run>, bindings: Subst) -> Result<Self, ProtocolError> {
        if desired_runs.is_empty() {
            return Err(ProtocolError::Run("a protocol needs at least one desired run".into()));
        }
        for run in &desired_runs {
            match process.space().validate_run(run)? {
                RunVerdict::Ok => {}
                RunVerdict::Violation(l) => {
                    return Err(ProtocolError::Run(format!("receive {l} would precede its own send")))
                }
            }
        }
        Ok(Protocol { process, desired_runs, bindings })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SecurityGoal {
    /// Pairs of output variable names that must resolve to equal terms.
    pub agreement: Vec<(String, String)>,
    /// Output variable names with the roles allowed to know them.
    pub secrets: Vec<(String, Vec<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub order: Vec<Label>,
    /// Event agents after substitution.
    pub agents: BTreeMap<Label, Term>,
    /// Actions with every variable replaced and decryptions normalised.
    pub actions: BTreeMap<Label, Action>,
    /// Actions after substitution, before normalisation.
    pub raw: BTreeMap<Label, Action>,
    pub sigma: Subst,
    pub outputs: Vec<Term>,
}

struct Resolver<'a> {
    p: &'a CordProcess,
    run: &'a Run,
    sigma: Subst,
    atoms: BTreeSet<Var>,
    payloads: BTreeMap<Label, Term>,
}

impl Resolver<'_> {
    fn value(&self, t: &Term) -> Term {
        normalize_decr(&self.sigma.apply(t))
    }

    fn closed(&self, label: &str, t: &Term) -> Result<(), ProtocolError> {
        match free_vars(t).into_iter().find(|v| !self.atoms.contains(v)) {
            Some(v) => Err(ProtocolError::Resolution {
                label: label.to_string(),
                detail: format!("{} is not assigned in {t}", v.name),
            }),
            None => Ok(()),
        }
    }

    fn assign(&mut self, label: &str, v: &Var, t: Term) -> Result<(), ProtocolError> {
        if let Some(old) = self.sigma.get(v) {
            if !term_equal(old, &t) {
                return Err(ProtocolError::Match {
                    label: label.to_string(),
                    detail: format!("{} is already {old}, not {t}", v.name),
                });
            }
            return Ok(());
        }
        self.sigma.insert(v.clone(), t).map_err(|e| ProtocolError::Match { label: label.to_string(), detail: e.to_string() })
    }

    fn step(&mut self, e: &Event) -> Result<(), ProtocolError> {
        let label = e.label.as_str();
        match &e.action {
            Action::Send { payload, .. } => {
                let t = self.value(payload);
                self.closed(label, &t)?;
                self.payloads.insert(e.label.clone(), t);
            }
            Action::Recv { binders, .. } => {
                let send = self.run.map.get(label).ok_or_else(|| ProtocolError::Resolution {
                    label: label.to_string(),
                    detail: "the run assigns no send".into(),
                })?;
                let t = self.payloads.get(send).cloned().ok_or_else(|| ProtocolError::Resolution {
                    label: label.to_string(),
                    detail: format!("send {send} has not happened"),
                })?;
                let parts = t.untuple(binders.len()).ok_or_else(|| ProtocolError::Match {
                    label: label.to_string(),
                    detail: format!("{t} does not split into {} parts", binders.len()),
                })?;
                for (v, s) in binders.iter().zip(parts) {
                    self.assign(label, v, s)?;
                }
            }
            Action::New(v) => {
                self.atoms.insert(v.clone());
            }
            Action::Match { left, right } => {
                let mut rs: Vec<Term> = right.iter().map(|t| self.value(t)).collect();
                for t in &rs {
                    self.closed(label, t)?;
                }
                if rs.len() == 1 && left.len() > 1 {
                    rs = rs[0].untuple(left.len()).ok_or_else(|| ProtocolError::Match {
                        label: label.to_string(),
                        detail: format!("{} does not split into {} parts", rs[0], left.len()),
                    })?;
                }
                if rs.len() != left.len() {
                    return Err(ProtocolError::Match {
                        label: label.to_string(),
                        detail: format!("{} entries against {}", left.len(), rs.len()),
                    });
                }
                for (l, r) in left.iter().zip(rs) {
                    match l {
                        Term::Var(v) if !self.sigma.contains(v) && !self.atoms.contains(v) => self.assign(label, v, r)?,
                        _ => {
                            let lv = self.value(l);
                            if !term_equal(&lv, &r) {
                                return Err(ProtocolError::Match {
                                    label: label.to_string(),
                                    detail: format!("{lv} differs from {r}"),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Executes `run` in the canonical linearization of the run-extended order.
pub fn resolve(p: &CordProcess, run: &Run, bindings: &Subst) -> Result<Resolution, ProtocolError> {
    let order = p.space().with_run(run).linearization();
    resolve_in_order(p, run, bindings, &order)
}

/// Executes `run` along `order`, which must be a linearization of the
/// run-extended order.
pub fn resolve_in_order(
    p: &CordProcess,
    run: &Run,
    bindings: &Subst,
    order: &[Label],
) -> Result<Resolution, ProtocolError> {
    if let RunVerdict::Violation(l) = p.space().validate_run(run)? {
        return Err(ProtocolError::Run(format!("receive {l} would precede its own send")));
    }
    let mut atoms: BTreeSet<Var> = p.inputs().iter().cloned().collect();
    atoms.extend(p.context().iter().cloned());
    atoms.extend(p.freed().iter().cloned());
    for (v, _) in bindings.iter() {
        atoms.remove(v);
    }
    let mut r = Resolver { p, run, sigma: bindings.clone(), atoms, payloads: BTreeMap::new() };
    for l in order {
        let e = r.p.space().event(l).ok_or_else(|| ProtocolError::Run(format!("unknown label {l}")))?;
        r.step(e)?;
    }
    let mut agents = BTreeMap::new();
    let mut actions = BTreeMap::new();
    let mut raw = BTreeMap::new();
    for e in p.space().events() {
        let substituted = e.action.map(&|t| r.sigma.apply(t), &|v| v.clone());
        let bind = |v: &Var| v.clone();
        let resolved = match &e.action {
            Action::Recv { binders, .. } => Action::Recv {
                src: None,
                dst: None,
                binders: binders.iter().map(bind).collect(),
            },
            a => a.map(&|t| r.value(t), &bind),
        };
        agents.insert(e.label.clone(), r.value(&e.agent));
        raw.insert(e.label.clone(), substituted);
        actions.insert(e.label.clone(), resolved);
    }
    let outputs = p.outputs().iter().map(|t| r.value(t)).collect();
    Ok(Resolution { order: order.to_vec(), agents, actions, raw, sigma: r.sigma, outputs })
}

fn output_position(p: &CordProcess, name: &str) -> Result<usize, ProtocolError> {
    p.outputs()
        .iter()
        .position(|t| t.as_var().is_some_and(|v| v.name == name))
        .ok_or_else(|| ProtocolError::Goal(format!("{name} is not an output of the process")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub claim: String,
    pub pass: bool,
    pub witness: String,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} — {}", self.claim, if self.pass { "PASS" } else { "FAIL" }, self.witness)
    }
}

pub fn check_agreement(p: &CordProcess, res: &Resolution, goal: &SecurityGoal) -> Result<Vec<Claim>, ProtocolError> {
    let mut out = Vec::new();
    for (a, b) in &goal.agreement {
        let (ta, tb) = (&res.outputs[output_position(p, a)?], &res.outputs[output_position(p, b)?]);
        let pass = term_equal(ta, tb);
        let witness = if pass { format!("both are {ta}") } else { format!("{a} = {ta} but {b} = {tb}") };
        out.push(Claim { claim: format!("{a} = {b}"), pass, witness });
    }
    Ok(out)
}

/// How a term entered an agent's knowledge.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Origin {
    Observed(Label),
    Key(Label),
    Component(Term),
    Decrypted(Term, Term),
}

/// Dolev-Yao knowledge of one observer: everything it saw, closed under
/// projection and decryption with the private keys it holds.
#[derive(Clone, Debug, Default)]
pub struct Knowledge {
    facts: BTreeMap<Term, Origin>,
}

fn is_public_op(name: &str) -> bool {
    name != SK
}

impl Knowledge {
    fn learn(&mut self, t: Term, o: Origin) {
        self.facts.entry(t).or_insert(o);
    }

    fn saturate(&mut self) {
        loop {
            let mut new = Vec::new();
            for t in self.facts.keys() {
                if let Term::App(op, args) = t {
                    if op.name == PAIR && args.len() == 2 {
                        for a in args {
                            new.push((a.clone(), Origin::Component(t.clone())));
                        }
                    }
                    if op.name == ENC && args.len() == 2 {
                        if let Term::App(k, w) = &args[0] {
                            if k.name == PK && w.len() == 1 {
                                let key = Term::sk(w[0].clone());
                                if self.derivable(&key) {
                                    new.push((args[1].clone(), Origin::Decrypted(t.clone(), key)));
                                }
                            }
                        }
                    }
                }
            }
            let before = self.facts.len();
            for (t, o) in new {
                self.learn(t, o);
            }
            if self.facts.len() == before {
                return;
            }
        }
    }

    pub fn derivable(&self, t: &Term) -> bool {
        if self.facts.contains_key(t) {
            return true;
        }
        match t {
            Term::Agent(_) => true,
            Term::Var(v) => v.sort == Sort::Agent,
            Term::App(op, args) => is_public_op(&op.name) && args.iter().all(|a| self.derivable(a)),
            _ => false,
        }
    }

    /// A readable derivation of a known term.
    pub fn explain(&self, t: &Term) -> String {
        let mut steps = Vec::new();
        let mut cur = t.clone();
        for _ in 0..64 {
            match self.facts.get(&cur) {
                Some(Origin::Observed(l)) => {
                    steps.push(format!("{cur} seen at {l}"));
                    break;
                }
                Some(Origin::Key(l)) => {
                    steps.push(format!("{cur} held (used at {l})"));
                    break;
                }
                Some(Origin::Component(parent)) => {
                    steps.push(format!("{cur} projected from {parent}"));
                    cur = parent.clone();
                }
                Some(Origin::Decrypted(parent, key)) => {
                    steps.push(format!("{cur} decrypted from {parent} with {key}"));
                    cur = parent.clone();
                }
                None => {
                    steps.push(format!("{cur} composed from public parts"));
                    break;
                }
            }
        }
        steps.join("; ")
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

fn private_keys(t: &Term, out: &mut Vec<Term>) {
    t.for_each_subterm(&mut |s| {
        if s.is_op(SK) {
            out.push(normalize_decr(s));
        }
    });
}

/// Name under which observers are reported for passive eavesdropping.
pub const NETWORK: &str = "network";

/// Per-role knowledge after a resolved run; roles are the agent terms of
/// the events as written, plus the network observer.
pub fn knowledge(p: &CordProcess, res: &Resolution) -> BTreeMap<String, Knowledge> {
    let mut out: BTreeMap<String, Knowledge> = BTreeMap::new();
    for e in p.space().events() {
        let role = e.agent.to_string();
        let k = out.entry(role).or_default();
        let l = &e.label;
        let resolved = &res.actions[l];
        match resolved {
            Action::Recv { binders, .. } => {
                for v in binders {
                    if let Some(t) = res.sigma.get(v) {
                        k.learn(t.clone(), Origin::Observed(l.clone()));
                    }
                }
            }
            Action::New(v) => k.learn(Term::Var(v.clone()), Origin::Observed(l.clone())),
            Action::Match { left, .. } => {
                for v in left.iter().filter_map(Term::as_var) {
                    if let Some(t) = res.sigma.get(v) {
                        k.learn(t.clone(), Origin::Observed(l.clone()));
                    }
                }
                for t in resolved.terms() {
                    k.learn(t.clone(), Origin::Observed(l.clone()));
                }
            }
            Action::Send { .. } => {
                for t in resolved.terms() {
                    k.learn(t.clone(), Origin::Observed(l.clone()));
                }
            }
        }
        let mut keys = Vec::new();
        for t in res.raw[l].terms() {
            private_keys(t, &mut keys);
        }
        for key in keys {
            k.learn(key, Origin::Key(l.clone()));
        }
    }
    let mut net = Knowledge::default();
    for e in p.space().events() {
        if let Action::Send { payload, .. } = &res.actions[&e.label] {
            net.learn(payload.clone(), Origin::Observed(e.label.clone()));
        }
    }
    out.insert(NETWORK.to_string(), net);
    for k in out.values_mut() {
        k.saturate();
    }
    out
}

pub fn check_secrecy(
    p: &CordProcess,
    res: &Resolution,
    value: &Term,
    allowed: &[String],
) -> Claim {
    let know = knowledge(p, res);
    let leaks: Vec<(&String, &Knowledge)> =
        know.iter().filter(|(role, k)| !allowed.contains(role) && k.derivable(value)).collect();
    let claim = format!("secret {value} from {{{}}}", allowed.join(", "));
    match leaks.first() {
        None => Claim { claim, pass: true, witness: format!("no role outside {{{}}} derives {value}", allowed.join(", ")) },
        Some((role, k)) => Claim {
            claim,
            pass: false,
            witness: format!(
                "derived by {}: {}",
                leaks.iter().map(|(r, _)| r.as_str()).collect::<Vec<_>>().join(", "),
                format_args!("{role} has {}", k.explain(value))
            ),
        },
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub agreement: Vec<Claim>,
    pub secrecy: Vec<Claim>,
    pub run: Vec<Claim>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.agreement.iter().chain(&self.secrecy).chain(&self.run).all(|c| c.pass)
    }

    pub fn find(&self, claim: &str) -> Option<&Claim> {
        self.agreement.iter().chain(&self.secrecy).chain(&self.run).find(|c| c.claim == claim)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (title, claims) in [("AGREEMENT", &self.agreement), ("SECRECY", &self.secrecy), ("RUN", &self.run)] {
            writeln!(f, "{title}")?;
            for c in claims {
                writeln!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// Resolves every desired run and checks the goal against each.
pub fn analyze(protocol: &Protocol, goal: &SecurityGoal) -> Result<Report, ProtocolError> {
    let p = &protocol.process;
    let mut report = Report::default();
    let many = protocol.desired_runs.len() > 1;
    for (i, run) in protocol.desired_runs.iter().enumerate() {
        let tag = |s: String| if many { format!("run {}: {s}", i + 1) } else { s };
        let res = match resolve(p, run, &protocol.bindings) {
            Ok(res) => res,
            Err(e) => {
                report.run.push(Claim { claim: tag("run resolves".into()), pass: false, witness: e.to_string() });
                continue;
            }
        };
        report.run.push(Claim {
            claim: tag("run resolves".into()),
            pass: true,
            witness: format!("{} events, {} send/receive pairs", res.order.len(), run.len()),
        });
        for mut c in check_agreement(p, &res, goal)? {
            c.claim = tag(c.claim);
            report.agreement.push(c);
        }
        for (name, allowed) in &goal.secrets {
            let value = &res.outputs[output_position(p, name)?];
            let mut c = check_secrecy(p, &res, value, allowed);
            c.claim = tag(format!("secret {name} from {{{}}}", allowed.join(", ")));
            report.secrecy.push(c);
        }
    }
    Ok(report)
}

fn agent(n: &str) -> Var {
    Var::agent(n)
}

fn data(n: &str) -> Var {
    Var::data(n)
}

fn a(n: &str) -> Term {
    Term::agent_var(n)
}

fn d(n: &str) -> Term {
    Term::data_var(n)
}

fn enc(key_of: Term, body: Term) -> Term {
    Term::enc(Term::pk(key_of), body)
}

fn dec(key_of: Term, body: Term) -> Term {
    Term::dec(Term::sk(key_of), body)
}

fn role(at: &str, events: Vec<(&str, Action)>) -> CordSpace {
    CordSpace::chain(events.into_iter().map(|(l, act)| Event::new(l, a(at), act)).collect())
        .expect("labels are distinct")
}

fn initiator(labels: [&str; 5], x: &str, peer: &str) -> CordSpace {
    role(
        x,
        vec![
            (labels[0], Action::New(data("m"))),
            (labels[1], Action::send(enc(a(peer), Term::pair(a(x), d("m"))))),
            (labels[2], Action::recv1(data("x"))),
            (labels[3], Action::matching(vec![d("m"), d("n")], vec![dec(a(x), d("x"))])),
            (labels[4], Action::send(enc(a(peer), d("n")))),
        ],
    )
}

/// The responder `y` answering with a fresh nonce; primes mark its variables.
fn responder(labels: [&str; 6], y: &str, p: &str) -> CordSpace {
    let v = |n: &str| format!("{n}{p}");
    role(
        y,
        vec![
            (labels[0], Action::recv1(data(&v("u")))),
            (labels[1], Action::matching(vec![a(&v("X")), d(&v("m"))], vec![dec(a(y), d(&v("u")))])),
            (labels[2], Action::New(data(&v("n")))),
            (labels[3], Action::send(enc(a(&v("X")), Term::pair(d(&v("m")), d(&v("n")))))),
            (labels[4], Action::recv1(data(&v("w")))),
            (labels[5], Action::matching(vec![d(&v("n"))], vec![dec(a(y), d(&v("w")))])),
        ],
    )
}

/// The honest single session with its desired run and `Y' := Y`.
pub fn nspk() -> Protocol {
    let space = initiator(["x1", "x2", "x3", "x4", "x5"], "X", "Y")
        .par(&responder(["y1", "y2", "y3", "y4", "y5", "y6"], "Y'", "'"));
    let inputs = vec![agent("X"), data("kbX"), agent("Y"), agent("Y'"), data("kbY'")];
    let outputs = vec![a("X"), a("Y"), d("m"), d("n"), a("X'"), a("Y'"), d("m'"), d("n'")];
    let process = CordProcess::new(inputs, space, outputs).expect("NSPK is well formed");
    let run = Run::from_pairs([("y1", "x2"), ("x3", "y4"), ("y5", "x5")]);
    let bindings = Subst::singleton(agent("Y'"), a("Y")).unwrap();
    Protocol::new(process, vec![run], bindings).expect("desired run validates")
}

pub fn honest_goal() -> SecurityGoal {
    let s = |x: &str| x.to_string();
    SecurityGoal {
        agreement: vec![(s("X"), s("X'")), (s("Y"), s("Y'")), (s("m"), s("m'")), (s("n"), s("n'"))],
        secrets: vec![(s("m"), vec![s("X"), s("Y'")]), (s("n"), vec![s("X"), s("Y'")])],
    }
}

fn nspk1_with(forward: Term) -> Interaction {
    let zr = role(
        "Z'",
        vec![
            ("b1", Action::recv1(data("u'"))),
            ("b2", Action::matching(vec![a("X'"), d("m'")], vec![dec(a("Z'"), d("u'"))])),
            ("b3", Action::send(forward)),
            ("b4", Action::recv1(data("w'"))),
            ("b5", Action::matching(vec![d("n'")], vec![dec(a("Z'"), d("w'"))])),
        ],
    );
    let space = initiator(["a1", "a2", "a3", "a4", "a5"], "X", "Z").par(&zr);
    let inputs = vec![agent("X"), data("kbX"), agent("Z"), agent("Z'"), data("kbZ'"), data("z'")];
    let outputs = vec![
        a("X"),
        a("Z"),
        d("m"),
        d("n"),
        a("X'"),
        a("Z'"),
        d("m'"),
        d("n'"),
        d("kbZ'"),
        a("Y'"),
    ];
    let context = [agent("Y'")].into_iter().collect();
    let body = CordProcess::build(inputs, space, outputs, context, BTreeSet::new()).expect("NSPK1 is well formed");
    Interaction::new(nspk1_dom(), nspk_middle(), body).expect("NSPK1 has its interface type")
}

fn sorts(s: &str) -> Arity {
    Arity(s.chars().map(|c| if c == 'A' { Sort::Agent } else { Sort::Data }).collect())
}

fn nspk1_dom() -> IntObject {
    IntObject::new(sorts("AdA"), sorts("AAdd"))
}

/// The interface shared by the two halves: `⟨X',Z',m',n',kbZ',Y' ; Z',kbZ',z'⟩`.
fn nspk_middle() -> IntObject {
    IntObject::new(sorts("AAdddA"), sorts("Add"))
}

fn nspk2_cod() -> IntObject {
    IntObject::new(sorts("AAdd"), sorts("Ad"))
}

/// The first half of the attack: a session of `X` with `Z`, whose
/// responder `Z'` forwards the challenge `z'` it is handed.
pub fn nspk1() -> Interaction {
    nspk1_with(d("z'"))
}

/// The first half with the responder re-encrypting `z'` for `X'` instead of
/// forwarding it.
pub fn nspk1_reencrypting() -> Interaction {
    nspk1_with(enc(a("X'"), d("z'")))
}

/// The second half: `Z'` replays `X`'s session towards `Y''`.
pub fn nspk2() -> Interaction {
    let zi = role(
        "Z'",
        vec![
            ("c1", Action::send(enc(a("Y'"), Term::pair(a("X'"), d("m'"))))),
            ("c2", Action::recv1(data("z'"))),
            ("c3", Action::send(enc(a("Y'"), d("n'")))),
        ],
    );
    let space = zi.par(&responder(["d1", "d2", "d3", "d4", "d5", "d6"], "Y''", "''"));
    let inputs = vec![agent("X'"), agent("Z'"), data("m'"), data("n'"), data("kbZ'"), agent("Y'"), agent("Y''"), data("kbY''")];
    let outputs = vec![a("Z'"), d("kbZ'"), d("z'"), a("X''"), a("Y''"), d("m''"), d("n''")];
    let body = CordProcess::new(inputs, space, outputs).expect("NSPK2 is well formed");
    Interaction::new(nspk_middle(), nspk2_cod(), body).expect("NSPK2 has its interface type")
}

pub fn attack_composite() -> Interaction {
    int_compose(&nspk1(), &nspk2(), Strategy::default()).expect("the halves compose")
}

pub fn attack_run() -> Run {
    Run::from_pairs([("b1", "a2"), ("d1", "c1"), ("c2", "d4"), ("a3", "b3"), ("b4", "a5"), ("d5", "c3")])
}

/// `Z'` is played by `Z`, and the replayed session is addressed to `Y''`.
pub fn attack_bindings() -> Subst {
    Subst::from_pairs([(agent("Z'"), a("Z")), (agent("Y'"), a("Y''"))]).unwrap()
}

pub fn attack_protocol() -> Protocol {
    Protocol::new(attack_composite().body, vec![attack_run()], attack_bindings()).expect("attack run validates")
}

pub fn attack_goal() -> SecurityGoal {
    let s = |x: &str| x.to_string();
    SecurityGoal {
        agreement: vec![(s("X"), s("X''")), (s("Z"), s("Y''")), (s("m"), s("m''")), (s("n"), s("n''"))],
        secrets: vec![(s("m"), vec![s("X"), s("Y''")]), (s("n"), vec![s("X"), s("Y''")])],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_session() {
        let p = nspk();
        assert_eq!(p.process.space().len(), 11);
        let res = resolve(&p.process, &p.desired_runs[0], &p.bindings).unwrap();
        let u = res.sigma.get(&data("u'")).unwrap();
        assert_eq!(u, &enc(a("Y"), Term::pair(a("X"), d("m"))));
        assert_eq!(res.sigma.get(&agent("X'")), Some(&a("X")));
        assert_eq!(res.sigma.get(&data("m'")), Some(&d("m")));
        let report = analyze(&p, &honest_goal()).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn empty_run() {
        let p = CordProcess::new(vec![], CordSpace::new(), vec![]).unwrap();
        let res = resolve(&p, &Run::new(), &Subst::new()).unwrap();
        assert!(res.actions.is_empty());
    }

    #[test]
    fn interfaces_line_up() {
        assert_eq!(nspk1().cod, nspk2().dom);
        let outs: Vec<String> = nspk1().body.outputs()[4..].iter().map(|t| t.to_string()).collect();
        assert_eq!(outs, ["X'", "Z'", "m'", "n'", "kbZ'", "Y'"]);
    }

    #[test]
    fn attack() {
        let p = attack_protocol();
        assert_eq!(p.process.space().len(), 19);
        let res = resolve(&p.process, &attack_run(), &p.bindings).unwrap();
        let out = |i: usize| res.outputs[i].clone();
        assert_eq!(out(2), out(6));
        assert_eq!(out(3), out(7));
        let report = analyze(&p, &attack_goal()).unwrap();
        assert!(report.find("X = X''").unwrap().pass);
        assert!(!report.find("Z = Y''").unwrap().pass);
        let m = report.find("secret m from {X, Y''}").unwrap();
        assert!(!m.pass);
        assert!(m.witness.starts_with("derived by Z'"), "{}", m.witness);
    }

    #[test]
    fn reencrypting_variant_fails_at_the_initiator_check() {
        let comp = int_compose(&nspk1_reencrypting(), &nspk2(), Strategy::TraceBoth).unwrap();
        let err = resolve(&comp.body, &attack_run(), &attack_bindings()).unwrap_err();
        assert!(matches!(err, ProtocolError::Match { ref label, .. } if label == "a4"), "{err}");
    }

    #[test]
    fn public_terms_are_not_secret() {
        let k = Knowledge::default();
        assert!(k.derivable(&Term::agent("A")));
        assert!(k.derivable(&Term::pk(Term::agent("A"))));
        assert!(!k.derivable(&Term::sk(Term::agent("A"))));
    }
}
