//! Cord spaces: finite sets of localized actions under a temporal preorder.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::terms::{free_vars, Subst, Term, Var};

pub type Label = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CordError {
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("run is not total: receive {0} is unassigned")]
    NonTotalRun(Label),
    #[error("run maps {0} to {1}, which is not a receive/send pair")]
    NotASendRecvPair(Label, Label),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Send { src: Option<Term>, dst: Option<Term>, payload: Term },
    Recv { src: Option<Term>, dst: Option<Term>, binders: Vec<Var> },
    New(Var),
    Match { left: Vec<Term>, right: Vec<Term> },
}

impl Action {
    pub fn send(payload: Term) -> Action {
        Action::Send { src: None, dst: None, payload }
    }

    pub fn recv(binders: Vec<Var>) -> Action {
        Action::Recv { src: None, dst: None, binders }
    }

    pub fn recv1(binder: Var) -> Action {
        Action::recv(vec![binder])
    }

    pub fn new_name(binder: Var) -> Action {
        Action::New(binder)
    }

    pub fn matching(left: Vec<Term>, right: Vec<Term>) -> Action {
        Action::Match { left, right }
    }

    pub fn is_send(&self) -> bool {
        matches!(self, Action::Send { .. })
    }

    pub fn is_recv(&self) -> bool {
        matches!(self, Action::Recv { .. })
    }

    pub fn bv(&self) -> BTreeSet<Var> {
        match self {
            Action::Send { .. } => BTreeSet::new(),
            Action::Recv { binders, .. } => binders.iter().cloned().collect(),
            Action::New(v) => [v.clone()].into_iter().collect(),
            Action::Match { left, .. } => left.iter().filter_map(|t| t.as_var().cloned()).collect(),
        }
    }

    /// Binders in syntactic order, with repetitions removed.
    pub fn binders(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        let mut push = |v: &Var| {
            if !out.contains(v) {
                out.push(v.clone())
            }
        };
        match self {
            Action::Send { .. } => {}
            Action::Recv { binders, .. } => binders.iter().for_each(&mut push),
            Action::New(v) => push(v),
            Action::Match { left, .. } => left.iter().filter_map(Term::as_var).for_each(&mut push),
        }
        out
    }

    pub fn fv(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        match self {
            Action::Send { src, dst, payload } => {
                out.extend(free_vars(payload));
                for t in src.iter().chain(dst.iter()) {
                    out.extend(free_vars(t));
                }
            }
            Action::Recv { src, dst, .. } => {
                for t in src.iter().chain(dst.iter()) {
                    out.extend(free_vars(t));
                }
            }
            Action::New(_) => {}
            Action::Match { left, right } => {
                for t in right {
                    out.extend(free_vars(t));
                }
                for t in left.iter().filter(|t| t.as_var().is_none()) {
                    out.extend(free_vars(t));
                }
            }
        }
        out
    }

    /// Every term position (binders excluded).
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Action::Send { src, dst, payload } => {
                src.iter().chain(dst.iter()).chain(std::iter::once(payload)).collect()
            }
            Action::Recv { src, dst, .. } => src.iter().chain(dst.iter()).collect(),
            Action::New(_) => vec![],
            Action::Match { left, right } => left.iter().chain(right.iter()).collect(),
        }
    }

    /// Rewrites every term position, keeping binders; match-left variables
    /// are binders and are renamed only through `rename`.
    pub fn map(&self, term: &impl Fn(&Term) -> Term, rename: &impl Fn(&Var) -> Var) -> Action {
        let opt = |o: &Option<Term>| o.as_ref().map(term);
        match self {
            Action::Send { src, dst, payload } => {
                Action::Send { src: opt(src), dst: opt(dst), payload: term(payload) }
            }
            Action::Recv { src, dst, binders } => {
                Action::Recv { src: opt(src), dst: opt(dst), binders: binders.iter().map(rename).collect() }
            }
            Action::New(v) => Action::New(rename(v)),
            Action::Match { left, right } => Action::Match {
                left: left
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(rename(v)),
                        other => term(other),
                    })
                    .collect(),
                right: right.iter().map(term).collect(),
            },
        }
    }

    /// Applies a substitution to the used positions; binders are untouched.
    pub fn substitute(&self, sigma: &Subst) -> Action {
        self.map(&|t| sigma.apply(t), &|v| v.clone())
    }
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

fn fmt_route(f: &mut fmt::Formatter<'_>, src: &Option<Term>, dst: &Option<Term>) -> fmt::Result {
    match (src, dst) {
        (Some(s), Some(d)) => write!(f, "{s} -> {d} : "),
        (Some(s), None) => write!(f, "{s} -> : "),
        (None, Some(d)) => write!(f, "-> {d} : "),
        (None, None) => Ok(()),
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binder = |f: &mut fmt::Formatter<'_>, v: &Var| {
            write!(f, "{}", v.name)?;
            if v.sort == crate::terms::Sort::Agent {
                f.write_str(":agent")?;
            }
            Ok(())
        };
        match self {
            Action::Send { src, dst, payload } => {
                f.write_str("send(")?;
                fmt_route(f, src, dst)?;
                write!(f, "{payload})")
            }
            Action::Recv { src, dst, binders } => {
                f.write_str("recv(")?;
                fmt_route(f, src, dst)?;
                for (i, b) in binders.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    binder(f, b)?;
                }
                f.write_str(")")
            }
            Action::New(v) => {
                f.write_str("new(")?;
                binder(f, v)?;
                f.write_str(")")
            }
            Action::Match { left, right } => {
                f.write_str("match(")?;
                for (i, t) in left.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match t {
                        Term::Var(v) => binder(f, v)?,
                        other => write!(f, "{other}")?,
                    }
                }
                f.write_str(" = ")?;
                fmt_terms(f, right)?;
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub label: Label,
    pub agent: Term,
    pub action: Action,
}

impl Event {
    pub fn new(label: impl Into<Label>, agent: Term, action: Action) -> Self {
        Event { label: label.into(), agent, action }
    }
}

/// Events plus generator pairs of the preorder; queries use the closure.
#[derive(Clone, Debug, Default)]
pub struct CordSpace {
    events: BTreeMap<Label, Event>,
    order: BTreeSet<(Label, Label)>,
}

impl PartialEq for CordSpace {
    /// Same events and the same closure.
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events && self.canonical_order() == other.canonical_order()
    }
}

impl Eq for CordSpace {}

impl CordSpace {
    pub fn new() -> Self {
        CordSpace::default()
    }

    pub fn from_parts(
        events: impl IntoIterator<Item = Event>,
        order: impl IntoIterator<Item = (Label, Label)>,
    ) -> Result<Self, CordError> {
        let mut s = CordSpace::new();
        for e in events {
            s.add_event(e)?;
        }
        for (a, b) in order {
            s.add_order(a, b)?;
        }
        Ok(s)
    }

    /// A chain of events in the given order.
    pub fn chain(events: Vec<Event>) -> Result<Self, CordError> {
        let pairs: Vec<(Label, Label)> =
            events.windows(2).map(|w| (w[0].label.clone(), w[1].label.clone())).collect();
        CordSpace::from_parts(events, pairs)
    }

    pub fn add_event(&mut self, e: Event) -> Result<(), CordError> {
        if self.events.contains_key(&e.label) {
            return Err(CordError::DuplicateLabel(e.label));
        }
        self.events.insert(e.label.clone(), e);
        Ok(())
    }

    pub fn add_order(&mut self, a: impl Into<Label>, b: impl Into<Label>) -> Result<(), CordError> {
        let (a, b) = (a.into(), b.into());
        for l in [&a, &b] {
            if !self.events.contains_key(l) {
                return Err(CordError::UnknownLabel(l.clone()));
            }
        }
        self.order.insert((a, b));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.values()
    }

    pub fn event(&self, label: &str) -> Option<&Event> {
        self.events.get(label)
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.events.keys().cloned().collect()
    }

    pub fn generators(&self) -> &BTreeSet<(Label, Label)> {
        &self.order
    }

    pub fn recvs(&self) -> BTreeSet<Label> {
        self.events.values().filter(|e| e.action.is_recv()).map(|e| e.label.clone()).collect()
    }

    pub fn sends(&self) -> BTreeSet<Label> {
        self.events.values().filter(|e| e.action.is_send()).map(|e| e.label.clone()).collect()
    }

    /// Applies `f` to every event, keeping labels and order.
    pub fn map_events(&self, f: impl Fn(&Event) -> Event) -> CordSpace {
        CordSpace {
            events: self.events.values().map(|e| {
                let e2 = f(e);
                debug_assert_eq!(e2.label, e.label);
                (e.label.clone(), e2)
            }).collect(),
            order: self.order.clone(),
        }
    }

    pub fn substitute(&self, sigma: &Subst) -> CordSpace {
        self.map_events(|e| Event {
            label: e.label.clone(),
            agent: sigma.apply(&e.agent),
            action: e.action.substitute(sigma),
        })
    }

    pub fn relabel(&self, map: &BTreeMap<Label, Label>) -> CordSpace {
        let r = |l: &Label| map.get(l).cloned().unwrap_or_else(|| l.clone());
        CordSpace {
            events: self
                .events
                .values()
                .map(|e| (r(&e.label), Event { label: r(&e.label), ..e.clone() }))
                .collect(),
            order: self.order.iter().map(|(a, b)| (r(a), r(b))).collect(),
        }
    }

    /// Disjoint union; clashing labels of `other` get a numeric suffix.
    /// Returns the relabelling applied to `other`.
    pub fn par_with_renaming(&self, other: &CordSpace) -> (CordSpace, BTreeMap<Label, Label>) {
        let mut taken: BTreeSet<Label> = self.labels();
        taken.extend(other.labels());
        let mut map = BTreeMap::new();
        for l in other.events.keys() {
            if self.events.contains_key(l) {
                let fresh = (1..).map(|i| format!("{l}_{i}")).find(|c| !taken.contains(c)).unwrap();
                taken.insert(fresh.clone());
                map.insert(l.clone(), fresh);
            }
        }
        let other = other.relabel(&map);
        let mut out = self.clone();
        out.events.extend(other.events);
        out.order.extend(other.order);
        (out, map)
    }

    pub fn par(&self, other: &CordSpace) -> CordSpace {
        self.par_with_renaming(other).0
    }

    pub fn seq(&self, other: &CordSpace) -> CordSpace {
        let (mut out, map) = self.par_with_renaming(other);
        for a in self.events.keys() {
            for b in other.events.keys() {
                let b = map.get(b).unwrap_or(b);
                out.order.insert((a.clone(), b.clone()));
            }
        }
        out
    }

    /// `P ⊘ Q(σ)`: adds a ≲ b whenever an action of P binds a variable free in
    /// an action of Q(σ).
    pub fn oslash_with_renaming(&self, other: &CordSpace, sigma: &Subst) -> (CordSpace, BTreeMap<Label, Label>) {
        let q = other.substitute(sigma);
        let (mut out, map) = self.par_with_renaming(&q);
        for a in self.events.values() {
            let bv = a.action.bv();
            if bv.is_empty() {
                continue;
            }
            for b in q.events.values() {
                if !bv.is_disjoint(&b.action.fv()) {
                    let bl = map.get(&b.label).unwrap_or(&b.label);
                    out.order.insert((a.label.clone(), bl.clone()));
                }
            }
        }
        (out, map)
    }

    pub fn oslash(&self, other: &CordSpace, sigma: &Subst) -> CordSpace {
        self.oslash_with_renaming(other, sigma).0
    }

    fn successors(&self) -> BTreeMap<&Label, Vec<&Label>> {
        let mut succ: BTreeMap<&Label, Vec<&Label>> = self.events.keys().map(|l| (l, vec![])).collect();
        for (a, b) in &self.order {
            succ.get_mut(a).unwrap().push(b);
        }
        succ
    }

    fn reach_from<'a>(succ: &BTreeMap<&'a Label, Vec<&'a Label>>, start: &'a Label) -> BTreeSet<&'a Label> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(x) = queue.pop_front() {
            for &y in &succ[x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Reflexive-transitive closure as a relation.
    pub fn closure(&self) -> BTreeSet<(Label, Label)> {
        let succ = self.successors();
        let mut out = BTreeSet::new();
        for a in self.events.keys() {
            for b in Self::reach_from(&succ, a) {
                out.insert((a.clone(), b.clone()));
            }
        }
        out
    }

    pub fn preceq(&self, a: &str, b: &str) -> Result<bool, CordError> {
        for l in [a, b] {
            if !self.events.contains_key(l) {
                return Err(CordError::UnknownLabel(l.to_string()));
            }
        }
        let succ = self.successors();
        let a = self.events.get_key_value(a).unwrap().0;
        Ok(Self::reach_from(&succ, a).iter().any(|l| l.as_str() == b))
    }

    /// Strongly connected components in label order (each sorted).
    pub fn components(&self) -> Vec<BTreeSet<Label>> {
        let succ = self.successors();
        let reach: BTreeMap<&Label, BTreeSet<&Label>> =
            self.events.keys().map(|l| (l, Self::reach_from(&succ, l))).collect();
        let mut done: BTreeSet<&Label> = BTreeSet::new();
        let mut out = Vec::new();
        for a in self.events.keys() {
            if done.contains(a) {
                continue;
            }
            let comp: BTreeSet<Label> =
                reach[a].iter().filter(|b| reach[**b].contains(a)).map(|b| (*b).clone()).collect();
            for l in &comp {
                done.insert(self.events.get_key_value(l).unwrap().0);
            }
            out.push(comp);
        }
        out
    }

    /// Nontrivial strongly connected components (potential deadlocks).
    pub fn temporal_cycles(&self) -> Vec<BTreeSet<Label>> {
        self.components()
            .into_iter()
            .filter(|c| c.len() > 1 || c.iter().next().is_some_and(|l| self.order.contains(&(l.clone(), l.clone()))))
            .collect()
    }

    /// A linear order of all labels refining the preorder: components in
    /// topological order, least label first among the ready ones.
    pub fn linearization(&self) -> Vec<Label> {
        let comps = self.components();
        let comp_of: BTreeMap<&Label, usize> =
            comps.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |l| (l, i))).collect();
        let mut indeg = vec![0usize; comps.len()];
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); comps.len()];
        for (a, b) in &self.order {
            let (ca, cb) = (comp_of[a], comp_of[b]);
            if ca != cb && succ[ca].insert(cb) {
                indeg[cb] += 1;
            }
        }
        // components are indexed in order of their least label
        let mut ready: BTreeSet<usize> = (0..comps.len()).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::with_capacity(self.events.len());
        while let Some(c) = ready.pop_first() {
            out.extend(comps[c].iter().cloned());
            for &d in &succ[c] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        out
    }

    /// Canonical generators of the closure: a ring through each component
    /// in label order, plus the transitive reduction between components
    /// (represented by their least labels).
    pub fn canonical_order(&self) -> BTreeSet<(Label, Label)> {
        let comps = self.components();
        let comp_of: BTreeMap<&Label, usize> =
            comps.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |l| (l, i))).collect();
        let mut out = BTreeSet::new();
        for c in &comps {
            if c.len() > 1 {
                let v: Vec<&Label> = c.iter().collect();
                for i in 0..v.len() {
                    out.insert((v[i].clone(), v[(i + 1) % v.len()].clone()));
                }
            }
        }
        let k = comps.len();
        let mut direct = vec![BTreeSet::new(); k];
        for (a, b) in &self.order {
            let (ca, cb) = (comp_of[a], comp_of[b]);
            if ca != cb {
                direct[ca].insert(cb);
            }
        }
        // reachability between components
        let mut reach = vec![BTreeSet::new(); k];
        for s in 0..k {
            let mut stack: Vec<usize> = direct[s].iter().copied().collect();
            while let Some(x) = stack.pop() {
                if reach[s].insert(x) {
                    stack.extend(direct[x].iter().copied());
                }
            }
        }
        for s in 0..k {
            for &t in &reach[s] {
                let implied = reach[s].iter().any(|&m| m != t && reach[m].contains(&t));
                if !implied {
                    let a = comps[s].iter().next().unwrap();
                    let b = comps[t].iter().next().unwrap();
                    out.insert((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    /// The same space with generators replaced by `canonical_order`.
    pub fn canonicalized(&self) -> CordSpace {
        CordSpace { events: self.events.clone(), order: self.canonical_order() }
    }

    pub fn validate_run(&self, run: &Run) -> Result<RunVerdict, CordError> {
        let recvs = self.recvs();
        for (r, s) in &run.map {
            let ok = self.event(r).is_some_and(|e| e.action.is_recv())
                && self.event(s).is_some_and(|e| e.action.is_send());
            if !ok {
                return Err(CordError::NotASendRecvPair(r.clone(), s.clone()));
            }
        }
        if let Some(r) = recvs.iter().find(|r| !run.map.contains_key(*r)) {
            return Err(CordError::NonTotalRun(r.clone()));
        }
        let mut ext = self.clone();
        for (r, s) in &run.map {
            ext.order.insert((s.clone(), r.clone()));
        }
        let succ = ext.successors();
        for (r, s) in &run.map {
            if Self::reach_from(&succ, r).contains(s) {
                return Ok(RunVerdict::Violation(r.clone()));
            }
        }
        Ok(RunVerdict::Ok)
    }

    /// The run-extended space: each receive placed after its send.
    pub fn with_run(&self, run: &Run) -> CordSpace {
        let mut ext = self.clone();
        for (r, s) in &run.map {
            if ext.events.contains_key(r) && ext.events.contains_key(s) {
                ext.order.insert((s.clone(), r.clone()));
            }
        }
        ext
    }
}

/// An assignment of receives to sends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run {
    pub map: BTreeMap<Label, Label>,
}

impl Run {
    pub fn new() -> Self {
        Run::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Run { map: pairs.into_iter().map(|(r, s)| (r.to_string(), s.to_string())).collect() }
    }

    pub fn insert(&mut self, recv: impl Into<Label>, send: impl Into<Label>) {
        self.map.insert(recv.into(), send.into());
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// No send feeds two receives.
    pub fn is_injective(&self) -> bool {
        let sends: BTreeSet<&Label> = self.map.values().collect();
        sends.len() == self.map.len()
    }

    pub fn relabel(&self, map: &BTreeMap<Label, Label>) -> Run {
        let r = |l: &Label| map.get(l).cloned().unwrap_or_else(|| l.clone());
        Run { map: self.map.iter().map(|(a, b)| (r(a), r(b))).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunVerdict {
    Ok,
    Violation(Label),
}

/// Disjoint union of runs of the two components of a composite; `q_renaming`
/// is the relabelling applied to the second component.
pub fn union_runs(rp: &Run, rq: &Run, q_renaming: &BTreeMap<Label, Label>) -> Run {
    let mut out = rp.clone();
    out.map.extend(rq.relabel(q_renaming).map);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(l: &str, a: Action) -> Event {
        Event::new(l, Term::agent("A"), a)
    }
    fn snd(l: &str) -> Event {
        ev(l, Action::send(Term::constant("c")))
    }
    fn rcv(l: &str, v: &str) -> Event {
        ev(l, Action::recv1(Var::data(v)))
    }

    #[test]
    fn recvs_and_sends() {
        assert!(CordSpace::new().recvs().is_empty());
        let p = CordSpace::chain(vec![snd("a"), rcv("b", "x")]).unwrap();
        let q = CordSpace::chain(vec![rcv("c", "y")]).unwrap();
        let pq = p.par(&q);
        assert_eq!(pq.recvs(), ["b", "c"].iter().map(|s| s.to_string()).collect());
        assert_eq!(pq.len(), 3);
        assert_eq!(pq.sends().len(), 1);
    }

    #[test]
    fn par_and_seq_orders() {
        let a = CordSpace::chain(vec![snd("a")]).unwrap();
        let b = CordSpace::chain(vec![snd("b")]).unwrap();
        let c = CordSpace::chain(vec![snd("c")]).unwrap();
        assert_eq!(a.par(&CordSpace::new()), a);
        let ab = a.seq(&b);
        assert!(ab.preceq("a", "b").unwrap());
        assert!(!ab.preceq("b", "a").unwrap());
        assert_eq!(ab.seq(&c), a.seq(&b.seq(&c)));
        assert_eq!(CordSpace::new().seq(&b), b);
        assert!(!a.par(&b).preceq("a", "b").unwrap());
        assert!(matches!(ab.preceq("a", "z"), Err(CordError::UnknownLabel(_))));
    }

    #[test]
    fn clashing_labels_are_freshened() {
        let a = CordSpace::chain(vec![snd("a")]).unwrap();
        let (aa, map) = a.par_with_renaming(&a);
        assert_eq!(aa.len(), 2);
        assert_eq!(map.get("a").map(String::as_str), Some("a_1"));
    }

    #[test]
    fn oslash_adds_flow_pairs() {
        let p = CordSpace::chain(vec![rcv("r", "z")]).unwrap();
        let q = CordSpace::chain(vec![ev("s", Action::send(Term::app("t", vec![Term::data_var("y")])))]).unwrap();
        let sigma = Subst::singleton(Var::data("y"), Term::data_var("z")).unwrap();
        let pq = p.oslash(&q, &sigma);
        assert!(pq.preceq("r", "s").unwrap());
        let none = Subst::singleton(Var::data("y"), Term::data_var("w")).unwrap();
        assert_eq!(p.oslash(&q, &none), p.par(&q.substitute(&none)));
    }

    #[test]
    fn cycles_and_runs() {
        let chain = CordSpace::chain(vec![snd("a"), rcv("b", "x")]).unwrap();
        assert!(chain.temporal_cycles().is_empty());
        let mut cyc = CordSpace::from_parts(vec![snd("a"), rcv("b", "x")], vec![]).unwrap();
        cyc.add_order("a", "b").unwrap();
        cyc.add_order("b", "a").unwrap();
        assert_eq!(cyc.temporal_cycles(), vec![["a", "b"].iter().map(|s| s.to_string()).collect()]);

        assert_eq!(chain.validate_run(&Run::from_pairs([("b", "a")])).unwrap(), RunVerdict::Ok);
        let back = CordSpace::chain(vec![rcv("b", "x"), snd("a")]).unwrap();
        assert_eq!(
            back.validate_run(&Run::from_pairs([("b", "a")])).unwrap(),
            RunVerdict::Violation("b".into())
        );
        assert!(matches!(back.validate_run(&Run::new()), Err(CordError::NonTotalRun(_))));
        // one send, one receive, each waiting for the other: no run
        let mut dead = CordSpace::from_parts(vec![snd("a"), rcv("b", "x")], vec![]).unwrap();
        dead.add_order("b", "a").unwrap();
        assert_eq!(dead.validate_run(&Run::from_pairs([("b", "a")])).unwrap(), RunVerdict::Violation("b".into()));
    }

    #[test]
    fn action_variables() {
        let nu = Action::New(Var::data("m"));
        assert_eq!(nu.bv(), [Var::data("m")].into_iter().collect());
        let t = Term::enc(Term::pk(Term::agent_var("Y")), Term::pair(Term::agent_var("X"), Term::data_var("m")));
        let s = Action::send(t);
        assert!(s.bv().is_empty());
        assert_eq!(s.fv(), [Var::agent("X"), Var::agent("Y"), Var::data("m")].into_iter().collect());
        let m = Action::matching(
            vec![Term::data_var("a"), Term::app("f", vec![Term::data_var("b")])],
            vec![Term::data_var("c"), Term::data_var("d")],
        );
        assert_eq!(m.bv(), [Var::data("a")].into_iter().collect());
        assert_eq!(m.fv(), ["b", "c", "d"].iter().map(|n| Var::data(*n)).collect());
    }

    #[test]
    fn canonical_order_is_closure_invariant() {
        let mut p = CordSpace::from_parts(vec![snd("a"), snd("b"), snd("c")], vec![]).unwrap();
        p.add_order("a", "b").unwrap();
        p.add_order("b", "c").unwrap();
        p.add_order("a", "c").unwrap();
        let mut q = p.clone();
        q.order.remove(&("a".to_string(), "c".to_string()));
        assert_eq!(p.canonical_order(), q.canonical_order());
        assert_eq!(p, q);
        assert_eq!(p.linearization(), vec!["a", "b", "c"]);
    }
}
