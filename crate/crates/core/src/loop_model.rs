//! Finite loop models over the category of finite sets and functions.
//!
//! A loop morphism `A -> B` with loop object `U` is a function
//! `a + u -> b + u`; indices `0..a` (resp. `0..b`) are the boundary and the
//! last `u` indices the loop. Equivalence is generated by loop relabelling
//! along functions (coend moves), removal of untouched identity loops,
//! contraction of loop nodes that are not fixed points, and, for the
//! uniform variant, the intertwining squares.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("type error: {0}")]
    Type(String),
    #[error("table entry {entry} out of range {cod}")]
    Range { entry: usize, cod: usize },
    #[error("not a monoid: {0}")]
    Monoid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinFun {
    pub dom: usize,
    pub cod: usize,
    pub table: Vec<usize>,
}

impl FinFun {
    /// The function `table.len() -> cod`.
    pub fn new(cod: usize, table: Vec<usize>) -> Result<Self, LoopError> {
        if let Some(&e) = table.iter().find(|&&e| e >= cod) {
            return Err(LoopError::Range { entry: e, cod });
        }
        Ok(FinFun { dom: table.len(), cod, table })
    }

    pub fn identity(n: usize) -> Self {
        FinFun { dom: n, cod: n, table: (0..n).collect() }
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &FinFun) -> Result<FinFun, LoopError> {
        if f.cod != self.dom {
            return Err(LoopError::Type(format!("cannot compose {} -> {} after {} -> {}", self.dom, self.cod, f.dom, f.cod)));
        }
        Ok(FinFun { dom: f.dom, cod: self.cod, table: f.table.iter().map(|&i| self.table[i]).collect() })
    }

    pub fn tensor(&self, g: &FinFun) -> FinFun {
        let mut table = self.table.clone();
        table.extend(g.table.iter().map(|&j| self.cod + j));
        FinFun { dom: self.dom + g.dom, cod: self.cod + g.cod, table }
    }

    /// Every function `dom -> cod`, in lexicographic order of tables.
    pub fn all(dom: usize, cod: usize) -> impl Iterator<Item = FinFun> {
        let count = if dom == 0 { 1 } else { cod.checked_pow(dom as u32).unwrap_or(0) };
        (0..count).map(move |mut k| {
            let mut table = vec![0; dom];
            for slot in table.iter_mut().rev() {
                *slot = k % cod;
                k /= cod;
            }
            FinFun { dom, cod, table }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// The loop category with the coend equivalence.
    Loop,
    /// The uniform loop category.
    Uniform,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Loop => "loop",
            Variant::Uniform => "uniform",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopHom {
    pub a: usize,
    pub b: usize,
    pub u: usize,
    pub f: FinFun,
}

impl LoopHom {
    pub fn new(a: usize, b: usize, u: usize, table: Vec<usize>) -> Result<Self, LoopError> {
        if table.len() != a + u {
            return Err(LoopError::Type(format!("table has {} entries, expected {}", table.len(), a + u)));
        }
        Ok(LoopHom { a, b, u, f: FinFun::new(b + u, table)? })
    }

    /// A loop-free morphism.
    pub fn plain(f: &FinFun) -> LoopHom {
        LoopHom { a: f.dom, b: f.cod, u: 0, f: f.clone() }
    }

    pub fn identity(n: usize) -> LoopHom {
        LoopHom::plain(&FinFun::identity(n))
    }

    /// `U ⊗ V -> V ⊗ U`.
    pub fn swap(u: usize, v: usize) -> LoopHom {
        let table = (0..u).map(|i| v + i).chain(0..v).collect();
        LoopHom::plain(&FinFun { dom: u + v, cod: u + v, table })
    }

    pub fn table(&self) -> &[usize] {
        &self.f.table
    }

    fn is_loop_out(&self, y: usize) -> bool {
        y >= self.b
    }

    /// Loop node `i` as a domain index and as a codomain index.
    fn node(&self, i: usize) -> (usize, usize) {
        (self.a + i, self.b + i)
    }

    /// Removes loop node `i`; entries pointing at it must have been redirected.
    fn drop_node(&self, i: usize) -> LoopHom {
        let (di, ci) = self.node(i);
        let table = self
            .f
            .table
            .iter()
            .enumerate()
            .filter(|(x, _)| *x != di)
            .map(|(_, &y)| {
                debug_assert_ne!(y, ci);
                if y > ci {
                    y - 1
                } else {
                    y
                }
            })
            .collect();
        LoopHom::new(self.a, self.b, self.u - 1, table).unwrap()
    }

    /// Skips loop node `i` (which must not be a fixed point) and deletes it.
    pub fn contract(&self, i: usize) -> LoopHom {
        let (di, ci) = self.node(i);
        let next = self.f.table[di];
        assert_ne!(next, ci, "contracting a fixed point");
        let mut g = self.clone();
        for y in g.f.table.iter_mut() {
            if *y == ci {
                *y = next;
            }
        }
        g.drop_node(i)
    }

    /// Whether loop node `i` maps to itself and nothing else maps to it.
    pub fn is_isolated_fixed_point(&self, i: usize) -> bool {
        let (di, ci) = self.node(i);
        self.f.table[di] == ci && self.f.table.iter().enumerate().all(|(x, &y)| y != ci || x == di)
    }

    /// Relabels the loop along the permutation `perm` (old node -> new node).
    pub fn permute_loop(&self, perm: &[usize]) -> LoopHom {
        let mut table = vec![0; self.a + self.u];
        let out = |y: usize| if y < self.b { y } else { self.b + perm[y - self.b] };
        for x in 0..self.a {
            table[x] = out(self.f.table[x]);
        }
        for i in 0..self.u {
            table[self.a + perm[i]] = out(self.f.table[self.a + i]);
        }
        LoopHom::new(self.a, self.b, self.u, table).unwrap()
    }

    /// Where boundary input `x` ends up: an output, or `None` if it enters a cycle.
    pub fn execute(&self, x: usize) -> Option<usize> {
        let mut y = self.f.table[x];
        for _ in 0..=self.u {
            if !self.is_loop_out(y) {
                return Some(y);
            }
            y = self.f.table[self.a + (y - self.b)];
        }
        None
    }
}

impl fmt::Display for LoopHom {
    /// The fixture line `a b u table`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} [", self.a, self.b, self.u)?;
        for (i, y) in self.f.table.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{y}")?;
        }
        f.write_str("]")
    }
}

/// Composition `f` then `g`; the loop of the result is `U ⊗ V`.
pub fn loop_compose(f: &LoopHom, g: &LoopHom) -> Result<LoopHom, LoopError> {
    if f.b != g.a {
        return Err(LoopError::Type(format!("boundary mismatch {} vs {}", f.b, g.a)));
    }
    let (a, u, v, c) = (f.a, f.u, g.u, g.b);
    let via_g = |z: usize| if z < c { z } else { c + u + (z - c) };
    let mut table = Vec::with_capacity(a + u + v);
    for x in 0..a + u {
        let y = f.f.table[x];
        table.push(if y >= f.b { c + (y - f.b) } else { via_g(g.f.table[y]) });
    }
    for j in 0..v {
        table.push(via_g(g.f.table[g.a + j]));
    }
    LoopHom::new(a, c, u + v, table)
}

/// Tensor `f ⊗ h`; the loop of the result is `U ⊗ V`.
pub fn loop_tensor(f: &LoopHom, h: &LoopHom) -> LoopHom {
    let (bb, db) = (f.b, h.b);
    let fo = |y: usize| if y < bb { y } else { bb + db + (y - bb) };
    let ho = |z: usize| if z < db { bb + z } else { bb + db + f.u + (z - db) };
    let mut table = Vec::with_capacity(f.a + h.a + f.u + h.u);
    table.extend(f.f.table[..f.a].iter().map(|&y| fo(y)));
    table.extend(h.f.table[..h.a].iter().map(|&z| ho(z)));
    table.extend(f.f.table[f.a..].iter().map(|&y| fo(y)));
    table.extend(h.f.table[h.a..].iter().map(|&z| ho(z)));
    LoopHom::new(f.a + h.a, f.b + h.b, f.u + h.u, table).unwrap()
}

/// Moves the last `w` boundary wires into the loop.
pub fn loop_trace(f: &LoopHom, w: usize) -> Result<LoopHom, LoopError> {
    if w > f.a || w > f.b {
        return Err(LoopError::Type(format!("cannot trace {w} wires of {} -> {}", f.a, f.b)));
    }
    Ok(LoopHom { a: f.a - w, b: f.b - w, u: f.u + w, f: f.f.clone() })
}

/// The side condition of the hom-set formula for the given variant.
pub fn formula_holds(f: &LoopHom, variant: Variant) -> bool {
    (0..f.u).all(|i| node_ok(f, i, variant))
}

fn node_ok(f: &LoopHom, i: usize, variant: Variant) -> bool {
    let (di, ci) = f.node(i);
    let fy = f.f.table[di];
    let hit = f.f.table.iter().enumerate().any(|(x, &y)| y == ci && (x >= f.a || f.is_loop_out(fy)));
    if !hit {
        return false;
    }
    match variant {
        Variant::Loop => true,
        Variant::Uniform => {
            if fy == ci {
                return true;
            }
            let mut y = fy;
            for _ in 0..=f.u {
                if !f.is_loop_out(y) {
                    return true;
                }
                y = f.f.table[f.a + (y - f.b)];
            }
            false
        }
    }
}

/// Garbage collection: contracts loop nodes violating the variant's side
/// condition until none is left.
pub fn canonical_loop(f: &LoopHom, variant: Variant) -> LoopHom {
    let mut g = f.clone();
    while let Some(i) = (0..g.u).find(|&i| !node_ok(&g, i, variant)) {
        g = g.contract(i);
    }
    g
}

/// Full reduction: every non-fixed loop node contracted, unreached fixed
/// points removed, sinks ordered by their least input, and (uniform
/// variant) all sinks merged.
pub fn normal_form(f: &LoopHom, variant: Variant) -> LoopHom {
    let mut g = f.clone();
    while let Some(i) = (0..g.u).find(|&i| g.f.table[g.a + i] != g.b + i) {
        g = g.contract(i);
    }
    while let Some(i) = (0..g.u).find(|&i| g.is_isolated_fixed_point(i)) {
        g = g.drop_node(i);
    }
    // every remaining node is a sink hit from the boundary
    let mut order: Vec<usize> = Vec::new();
    for x in 0..g.a {
        let y = g.f.table[x];
        if y >= g.b && !order.contains(&(y - g.b)) {
            order.push(y - g.b);
        }
    }
    let mut perm = vec![0; g.u];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    g = g.permute_loop(&perm);
    if variant == Variant::Uniform && g.u > 1 {
        let b = g.b;
        let mut table: Vec<usize> = g.f.table[..g.a].iter().map(|&y| if y >= b { b } else { y }).collect();
        table.push(b);
        g = LoopHom::new(g.a, g.b, 1, table).unwrap();
    }
    g
}

/// Union-find quotient of every loop morphism `a -> b` with loop size at
/// most `bound`, under the generating moves of the variant.
pub struct Quotient {
    pub a: usize,
    pub b: usize,
    pub bound: usize,
    pub variant: Variant,
    offsets: Vec<usize>,
    parent: Vec<u32>,
}

impl Quotient {
    pub fn build(a: usize, b: usize, bound: usize, variant: Variant) -> Quotient {
        let mut offsets = vec![0];
        for u in 0..=bound {
            let n = count_funs(a + u, b + u);
            offsets.push(offsets[u] + n);
        }
        let total = offsets[bound + 1];
        let mut q = Quotient { a, b, bound, variant, offsets, parent: (0..total as u32).collect() };
        q.local_moves();
        q.coend_moves();
        if variant == Variant::Uniform {
            q.square_moves();
        }
        q
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn encode(&self, u: usize, table: &[usize]) -> usize {
        let base = self.b + u;
        let mut k = 0;
        for &y in table {
            k = k * base + y;
        }
        self.offsets[u] + k
    }

    pub fn index(&self, f: &LoopHom) -> Option<usize> {
        (f.a == self.a && f.b == self.b && f.u <= self.bound).then(|| self.encode(f.u, &f.f.table))
    }

    pub fn state(&self, idx: usize) -> LoopHom {
        let u = (0..=self.bound).find(|&u| idx < self.offsets[u + 1]).expect("index in range");
        let f = FinFun::all(self.a + u, self.b + u).nth(idx - self.offsets[u]).unwrap();
        LoopHom { a: self.a, b: self.b, u, f }
    }

    fn decode_into(&self, idx: usize, table: &mut Vec<usize>) -> usize {
        let u = (0..=self.bound).find(|&u| idx < self.offsets[u + 1]).unwrap();
        let base = self.b + u;
        let mut k = idx - self.offsets[u];
        table.clear();
        table.resize(self.a + u, 0);
        for slot in table.iter_mut().rev() {
            *slot = k % base;
            k /= base;
        }
        u
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            let p = self.parent[i] as usize;
            self.parent[i] = self.parent[p];
            i = p;
        }
        i
    }

    fn find_ro(&self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            i = self.parent[i] as usize;
        }
        i
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            // the smaller index (fewer loop nodes, lexicographically least) wins
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo as u32;
        }
    }

    fn local_moves(&mut self) {
        let mut table = Vec::new();
        for idx in 0..self.len() {
            let u = self.decode_into(idx, &mut table);
            if u == 0 {
                continue;
            }
            let f = LoopHom { a: self.a, b: self.b, u, f: FinFun { dom: self.a + u, cod: self.b + u, table: table.clone() } };
            for i in 0..u {
                let g = if f.f.table[f.a + i] != f.b + i {
                    f.contract(i)
                } else if f.is_isolated_fixed_point(i) {
                    f.drop_node(i)
                } else {
                    continue;
                };
                let j = self.encode(g.u, &g.f.table);
                self.union(idx, j);
            }
        }
    }

    /// `(B⊗h)∘f' ~ f'∘(A⊗h)` for `f': A⊗U -> B⊗V`, `h: V -> U`.
    fn coend_moves(&mut self) {
        let (a, b) = (self.a, self.b);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for u in 0..=self.bound {
            for v in 0..=self.bound {
                for h in FinFun::all(v, u) {
                    for fp in FinFun::all(a + u, b + v) {
                        left.clear();
                        left.extend(fp.table.iter().map(|&y| if y < b { y } else { b + h.table[y - b] }));
                        right.clear();
                        right.extend_from_slice(&fp.table[..a]);
                        right.extend(h.table.iter().map(|&i| fp.table[a + i]));
                        let (l, r) = (self.encode(u, &left), self.encode(v, &right));
                        self.union(l, r);
                    }
                }
            }
        }
    }

    /// `Tr f ≈ Tr g` whenever `(B⊗h)∘f = g∘(A⊗h)` for a function `h: U -> V`.
    fn square_moves(&mut self) {
        let (a, b) = (self.a, self.b);
        let mut g = Vec::new();
        for u in 0..=self.bound {
            for v in 0..=self.bound {
                for h in FinFun::all(u, v) {
                    let image: BTreeSet<usize> = h.table.iter().copied().collect();
                    let free: Vec<usize> = (0..v).filter(|j| !image.contains(j)).collect();
                    let bh = |y: usize| if y < b { y } else { b + h.table[y - b] };
                    'f: for f in FinFun::all(a + u, b + u) {
                        g.clear();
                        g.resize(a + v, usize::MAX);
                        for x in 0..a {
                            g[x] = bh(f.table[x]);
                        }
                        for i in 0..u {
                            let want = bh(f.table[a + i]);
                            let slot = &mut g[a + h.table[i]];
                            if *slot != usize::MAX && *slot != want {
                                continue 'f;
                            }
                            *slot = want;
                        }
                        let fi = self.encode(u, &f.table);
                        for fill in FinFun::all(free.len(), b + v) {
                            for (k, &j) in free.iter().enumerate() {
                                g[a + j] = fill.table[k];
                            }
                            let gi = self.encode(v, &g);
                            self.union(fi, gi);
                        }
                    }
                }
            }
        }
    }

    pub fn same(&self, f: &LoopHom, g: &LoopHom) -> Option<bool> {
        Some(self.find_ro(self.index(f)?) == self.find_ro(self.index(g)?))
    }

    /// Class representatives (least member of each class).
    pub fn representatives(&self) -> Vec<LoopHom> {
        (0..self.len()).filter(|&i| self.find_ro(i) == i).map(|i| self.state(i)).collect()
    }

    pub fn class_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.find_ro(i) == i).count()
    }

    /// Representative of the class of `f`.
    pub fn representative(&self, f: &LoopHom) -> Option<LoopHom> {
        Some(self.state(self.find_ro(self.index(f)?)))
    }
}

fn count_funs(dom: usize, cod: usize) -> usize {
    if dom == 0 {
        1
    } else {
        cod.pow(dom as u32)
    }
}

/// Default loop-size bound of the equivalence decision.
pub const DEFAULT_BOUND: usize = 3;

type QuotientKey = (usize, usize, usize, Variant);

fn quotient_cache() -> &'static Mutex<HashMap<QuotientKey, Arc<Quotient>>> {
    static CACHE: OnceLock<Mutex<HashMap<QuotientKey, Arc<Quotient>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared quotient for the given boundary and bound.
pub fn quotient(a: usize, b: usize, bound: usize, variant: Variant) -> Arc<Quotient> {
    let key = (a, b, bound, variant);
    if let Some(q) = quotient_cache().lock().unwrap().get(&key) {
        return q.clone();
    }
    let q = Arc::new(Quotient::build(a, b, bound, variant));
    quotient_cache().lock().unwrap().entry(key).or_insert(q).clone()
}

fn equiv(f: &LoopHom, g: &LoopHom, bound: usize, variant: Variant) -> bool {
    if f.a != g.a || f.b != g.b {
        return false;
    }
    let q = quotient(f.a, f.b, bound, variant);
    let fits = |h: &LoopHom| if h.u <= bound { h.clone() } else { reduce(h) };
    q.same(&fits(f), &fits(g)).unwrap_or(false)
}

/// Sound size reduction using only contraction and identity-loop removal.
fn reduce(f: &LoopHom) -> LoopHom {
    normal_form(f, Variant::Loop)
}

/// Bounded decision of the coend equivalence; complete for loops up to `bound`.
pub fn loop_equiv(f: &LoopHom, g: &LoopHom, bound: usize) -> bool {
    equiv(f, g, bound, Variant::Loop)
}

/// Bounded decision of the uniform equivalence.
pub fn uniform_equiv(f: &LoopHom, g: &LoopHom, bound: usize) -> bool {
    equiv(f, g, bound, Variant::Uniform)
}

pub fn equiv_in(variant: Variant, f: &LoopHom, g: &LoopHom) -> bool {
    equiv(f, g, DEFAULT_BOUND, variant)
}

#[derive(Clone, Debug)]
pub struct Census {
    pub a: usize,
    pub b: usize,
    pub u_max: usize,
    pub variant: Variant,
    pub class_count: usize,
    pub representatives: Vec<LoopHom>,
    /// Loop morphisms satisfying the hom-set formula, counted up to loop relabelling.
    pub formula_count: usize,
}

impl Census {
    pub fn agrees(&self) -> bool {
        self.class_count == self.formula_count
    }

    /// One `a b u table` line per representative.
    pub fn fixture(&self) -> String {
        let mut out = String::new();
        for r in &self.representatives {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

/// Brute-force quotient of all loop morphisms `a -> b` with loop ≤ `u_max`.
pub fn hom_census(a: usize, b: usize, u_max: usize, variant: Variant) -> Census {
    let q = quotient(a, b, u_max, variant);
    let representatives = q.representatives();
    let mut seen = BTreeSet::new();
    for u in 0..=u_max {
        for f in FinFun::all(a + u, b + u) {
            let h = LoopHom { a, b, u, f };
            if formula_holds(&h, variant) {
                seen.insert(relabel_min(&h));
            }
        }
    }
    Census { a, b, u_max, variant, class_count: representatives.len(), representatives, formula_count: seen.len() }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Least table over all relabellings of the loop.
fn relabel_min(f: &LoopHom) -> LoopHom {
    permutations(f.u).iter().map(|p| f.permute_loop(p)).min().unwrap()
}

/// A morphism of the doubly iterated loop construction, flattened: blocks
/// `A | L0 | L1 | ...` with `L0` the outermost loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedLoopHom {
    pub a: usize,
    pub b: usize,
    pub loops: Vec<usize>,
    pub f: FinFun,
}

impl NestedLoopHom {
    pub fn new(a: usize, b: usize, loops: Vec<usize>, table: Vec<usize>) -> Result<Self, LoopError> {
        let total: usize = loops.iter().sum();
        if table.len() != a + total {
            return Err(LoopError::Type("nested table size".into()));
        }
        Ok(NestedLoopHom { a, b, loops, f: FinFun::new(b + total, table)? })
    }

    /// Multiplication at level `k`: merges loops `k` and `k+1`.
    pub fn flatten_at(&self, k: usize) -> NestedLoopHom {
        let mut loops = self.loops.clone();
        let merged = loops[k] + loops[k + 1];
        loops.splice(k..k + 2, [merged]);
        NestedLoopHom { loops, ..self.clone() }
    }
}

/// Unit: a plain function as a loop morphism with the trivial loop.
pub fn monad_eta(f: &FinFun) -> LoopHom {
    LoopHom::plain(f)
}

/// Multiplication: flattens the two outermost loops into one.
pub fn monad_mu(x: &NestedLoopHom) -> Result<LoopHom, LoopError> {
    if x.loops.len() != 2 {
        return Err(LoopError::Type(format!("expected two loop levels, found {}", x.loops.len())));
    }
    LoopHom::new(x.a, x.b, x.loops[0] + x.loops[1], x.f.table.clone())
}

/// The unit at the outer level: `f` viewed with a trivial outer loop.
pub fn eta_outer(f: &LoopHom) -> NestedLoopHom {
    NestedLoopHom { a: f.a, b: f.b, loops: vec![0, f.u], f: f.f.clone() }
}

/// The loop construction applied to the unit: a trivial inner loop.
pub fn eta_inner(f: &LoopHom) -> NestedLoopHom {
    NestedLoopHom { a: f.a, b: f.b, loops: vec![f.u, 0], f: f.f.clone() }
}

/// Unit and associativity laws of the loop monad, checked exhaustively on
/// morphisms `a -> b` and nested loops within `sizes`.
pub fn check_monad_laws(sizes: Sizes) -> AxiomResult {
    let mut res = AxiomResult { name: "monad", variant: Variant::Loop, instances: 0, counterexample: None };
    let fail = |res: &mut AxiomResult, msg: String| {
        res.counterexample.get_or_insert(msg);
    };
    for a in 0..=sizes.a {
        for b in 0..=sizes.b {
            for u in 0..=sizes.u {
                for t in FinFun::all(a + u, b + u) {
                    let f = LoopHom { a, b, u, f: t };
                    res.instances += 1;
                    for (side, nested) in [("outer", eta_outer(&f)), ("inner", eta_inner(&f))] {
                        match monad_mu(&nested) {
                            Ok(g) if equiv_in(Variant::Loop, &g, &f) => {}
                            _ => fail(&mut res, format!("mu after eta-{side} differs on {f}")),
                        }
                    }
                }
            }
            for u0 in 0..=1 {
                for u1 in 0..=1 {
                    for u2 in 0..=1 {
                        let total = u0 + u1 + u2;
                        for t in FinFun::all(a + total, b + total) {
                            let x = NestedLoopHom { a, b, loops: vec![u0, u1, u2], f: t };
                            res.instances += 1;
                            let left = monad_mu(&x.flatten_at(0));
                            let right = monad_mu(&x.flatten_at(1));
                            match (left, right) {
                                (Ok(l), Ok(r)) if equiv_in(Variant::Loop, &l, &r) => {}
                                _ => fail(&mut res, format!("associativity fails on loops {:?} {:?}", x.loops, x.f.table)),
                            }
                        }
                    }
                }
            }
        }
    }
    res
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMonoid {
    pub unit: usize,
    pub table: Vec<Vec<usize>>,
}

impl FinMonoid {
    pub fn new(unit: usize, table: Vec<Vec<usize>>) -> Result<Self, LoopError> {
        let n = table.len();
        if unit >= n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(LoopError::Monoid("malformed table".into()));
        }
        for x in 0..n {
            if table[unit][x] != x || table[x][unit] != x {
                return Err(LoopError::Monoid(format!("unit law fails at {x}")));
            }
            for y in 0..n {
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(LoopError::Monoid(format!("associativity fails at ({x},{y},{z})")));
                    }
                }
            }
        }
        Ok(FinMonoid { unit, table })
    }

    pub fn trivial() -> Self {
        FinMonoid { unit: 0, table: vec![vec![0]] }
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        FinMonoid { unit: 0, table: (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn op(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }
}

/// `{ s | ∀t ∃u. s t u ≠ s t }`.
pub fn regular_scalars(m: &FinMonoid) -> BTreeSet<usize> {
    let n = m.len();
    (0..n)
        .filter(|&s| (0..n).all(|t| (0..n).any(|u| m.op(m.op(s, t), u) != m.op(s, t))))
        .collect()
}

#[derive(Clone, Debug)]
pub struct AxiomResult {
    pub name: &'static str,
    pub variant: Variant,
    pub instances: usize,
    pub counterexample: Option<String>,
}

impl AxiomResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(AxiomResult::passed)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            match &r.counterexample {
                None => writeln!(f, "{} [{}]: PASS ({} instances)", r.name, r.variant, r.instances)?,
                Some(c) => writeln!(f, "{} [{}]: FAIL: {}", r.name, r.variant, c)?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sizes {
    pub a: usize,
    pub b: usize,
    pub u: usize,
}

/// Loop morphisms `a -> b` with a loop of size at most 1.
fn small_morphisms(a: usize, b: usize) -> Vec<LoopHom> {
    let mut out: Vec<LoopHom> = FinFun::all(a, b).map(|f| LoopHom::plain(&f)).collect();
    out.extend(FinFun::all(a + 1, b + 1).map(|f| LoopHom { a, b, u: 1, f }));
    out
}

fn plain_morphisms(a: usize, b: usize) -> Vec<LoopHom> {
    FinFun::all(a, b).map(|f| LoopHom::plain(&f)).collect()
}

struct Checker {
    variant: Variant,
    name: &'static str,
    instances: usize,
    counterexample: Option<String>,
}

impl Checker {
    fn new(variant: Variant, name: &'static str) -> Self {
        Checker { variant, name, instances: 0, counterexample: None }
    }

    fn check(&mut self, lhs: &LoopHom, rhs: &LoopHom, what: impl FnOnce() -> String) {
        self.instances += 1;
        if self.counterexample.is_none() && !equiv_in(self.variant, lhs, rhs) {
            self.counterexample = Some(format!("{}: {} vs {}", what(), lhs, rhs));
        }
    }

    fn finish(self) -> AxiomResult {
        AxiomResult { name: self.name, variant: self.variant, instances: self.instances, counterexample: self.counterexample }
    }
}

fn id(n: usize) -> LoopHom {
    LoopHom::identity(n)
}

/// Exhaustive trace-axiom check in both finite loop categories, for
/// boundaries up to `a`/`b` and traced objects up to `u`.
pub fn check_axioms_fin(sizes: Sizes) -> AxiomReport {
    let mut results = Vec::new();
    for variant in [Variant::Loop, Variant::Uniform] {
        results.extend(check_variant(variant, sizes));
    }
    results.push(uniformity(Variant::Uniform, sizes));
    AxiomReport { results }
}

fn check_variant(variant: Variant, s: Sizes) -> Vec<AxiomResult> {
    let mut out = Vec::new();
    let dims = |n: usize| 0..=n;

    // tightening: Tr(g⊗U ; f ; h⊗U) = g ; Tr f ; h
    let mut c = Checker::new(variant, "tightening");
    for a in dims(s.a) {
        for b in dims(s.b) {
            for u in dims(s.u) {
                let fs = small_morphisms(a + u, b + u);
                for a2 in dims(s.a) {
                    for g in plain_morphisms(a2, a) {
                        for b2 in dims(s.b) {
                            for h in plain_morphisms(b, b2) {
                                for f in &fs {
                                    let inner = loop_compose(
                                        &loop_compose(&loop_tensor(&g, &id(u)), f).unwrap(),
                                        &loop_tensor(&h, &id(u)),
                                    )
                                    .unwrap();
                                    let lhs = loop_trace(&inner, u).unwrap();
                                    let tf = loop_trace(f, u).unwrap();
                                    let rhs = loop_compose(&loop_compose(&g, &tf).unwrap(), &h).unwrap();
                                    c.check(&lhs, &rhs, || format!("f={f} g={g} h={h} U={u}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.push(c.finish());

    // sliding: Tr^U(f ; B⊗k) = Tr^V(A⊗k ; f) for f: A⊗V -> B⊗U, k: U -> V
    let mut c = Checker::new(variant, "sliding");
    for a in dims(s.a) {
        for b in dims(s.b) {
            for u in dims(s.u) {
                for v in dims(s.u) {
                    for f in small_morphisms(a + v, b + u) {
                        for k in small_morphisms(u, v) {
                            let lhs = loop_trace(&loop_compose(&f, &loop_tensor(&id(b), &k)).unwrap(), v).unwrap();
                            let rhs = loop_trace(&loop_compose(&loop_tensor(&id(a), &k), &f).unwrap(), u).unwrap();
                            c.check(&lhs, &rhs, || format!("f={f} k={k}"));
                        }
                    }
                }
            }
        }
    }
    out.push(c.finish());

    // vanishing: Tr^0 f = f and Tr^{U⊗V} f = Tr^U(Tr^V f)
    let mut c = Checker::new(variant, "vanishing");
    for a in dims(s.a) {
        for b in dims(s.b) {
            for f in small_morphisms(a, b) {
                c.check(&loop_trace(&f, 0).unwrap(), &f, || format!("f={f}"));
            }
            for u in dims(s.u) {
                for v in dims(s.u - u) {
                    for f in small_morphisms(a + u + v, b + u + v) {
                        let lhs = loop_trace(&f, u + v).unwrap();
                        let rhs = loop_trace(&loop_trace(&f, v).unwrap(), u).unwrap();
                        c.check(&lhs, &rhs, || format!("f={f} U={u} V={v}"));
                    }
                }
            }
        }
    }
    out.push(c.finish());

    // superposing: Tr^U(g ⊗ f) = g ⊗ Tr^U f
    let mut c = Checker::new(variant, "superposing");
    for a in dims(s.a) {
        for b in dims(s.b) {
            for u in dims(s.u) {
                let fs = small_morphisms(a + u, b + u);
                for c1 in dims(s.a.min(1)) {
                    for d1 in dims(s.b.min(1)) {
                        for g in small_morphisms(c1, d1) {
                            for f in &fs {
                                let lhs = loop_trace(&loop_tensor(&g, f), u).unwrap();
                                let rhs = loop_tensor(&g, &loop_trace(f, u).unwrap());
                                c.check(&lhs, &rhs, || format!("g={g} f={f} U={u}"));
                            }
                        }
                    }
                }
            }
        }
    }
    out.push(c.finish());

    // yanking: Tr^U(σ_{U,U}) = id_U
    let mut c = Checker::new(variant, "yanking");
    for u in dims(s.u.max(s.a)) {
        let lhs = loop_trace(&LoopHom::swap(u, u), u).unwrap();
        c.check(&lhs, &id(u), || format!("U={u}"));
    }
    out.push(c.finish());

    // normality: Tr^U(f ⊗ U) = f
    let mut c = Checker::new(variant, "normality");
    for a in dims(s.a) {
        for b in dims(s.b) {
            for w in dims(s.u) {
                for f in FinFun::all(a + w, b + w) {
                    let f = LoopHom { a, b, u: w, f };
                    for u in dims(s.u) {
                        let lhs = loop_trace(&loop_tensor(&f, &id(u)), u).unwrap();
                        c.check(&lhs, &f, || format!("f={f} U={u}"));
                    }
                }
            }
        }
    }
    out.push(c.finish());
    out
}

/// A pair of traces related by an intertwining function on the loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityWitness {
    pub f: LoopHom,
    pub g: LoopHom,
    pub h: FinFun,
    pub trace_f: LoopHom,
    pub trace_g: LoopHom,
}

impl fmt::Display for UniformityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "f={} g={} h={:?}: Tr f = {} and Tr g = {} are not equivalent",
            self.f, self.g, self.h.table, self.trace_f, self.trace_g
        )
    }
}

/// Every intertwined pair `(f, g, h)` with plain `f: A⊗U -> B⊗U`,
/// `g: A⊗V -> B⊗V`, `h: U -> V` and `(B⊗h)∘f = g∘(A⊗h)`.
fn intertwined(a: usize, b: usize, u: usize, v: usize, mut visit: impl FnMut(&LoopHom, &LoopHom, &FinFun) -> bool) {
    for h in FinFun::all(u, v) {
        let hh = LoopHom::plain(&h);
        let bh = loop_tensor(&id(b), &hh);
        let ah = loop_tensor(&id(a), &hh);
        for f in plain_morphisms(a + u, b + u) {
            let lhs = loop_compose(&f, &bh).unwrap();
            for g in plain_morphisms(a + v, b + v) {
                if loop_compose(&ah, &g).unwrap() == lhs && !visit(&f, &g, &h) {
                    return;
                }
            }
        }
    }
}

fn uniformity(variant: Variant, s: Sizes) -> AxiomResult {
    let mut c = Checker::new(variant, "uniformity");
    for a in 0..=s.a {
        for b in 0..=s.b {
            for u in 0..=s.u {
                for v in 0..=s.u {
                    intertwined(a, b, u, v, |f, g, h| {
                        let (tf, tg) = (loop_trace(f, u).unwrap(), loop_trace(g, v).unwrap());
                        c.check(&tf, &tg, || format!("f={f} g={g} h={:?}", h.table));
                        true
                    });
                }
            }
        }
    }
    c.finish()
}

/// Searches for an intertwined pair whose traces are not equivalent in
/// the given variant, starting at `a = b = 1` and widening.
pub fn find_uniformity_counterexample(variant: Variant, max: usize) -> Option<UniformityWitness> {
    let mut shapes: Vec<(usize, usize)> = Vec::new();
    for n in 0..=2 * max {
        for a in 0..=max {
            if n >= a && n - a <= max {
                shapes.push((a, n - a));
            }
        }
    }
    shapes.sort_by_key(|&(a, b)| (if (a, b) == (1, 1) { 0 } else { 1 }, a + b, std::cmp::Reverse(a)));
    for (a, b) in shapes {
        for u in 0..=max {
            for v in 0..=max {
                let mut found = None;
                intertwined(a, b, u, v, |f, g, h| {
                    let (tf, tg) = (loop_trace(f, u).unwrap(), loop_trace(g, v).unwrap());
                    if !equiv_in(variant, &tf, &tg) {
                        found = Some(UniformityWitness { f: f.clone(), g: g.clone(), h: h.clone(), trace_f: tf, trace_g: tg });
                        return false;
                    }
                    true
                });
                if found.is_some() {
                    return found;
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lh(a: usize, b: usize, u: usize, t: &[usize]) -> LoopHom {
        LoopHom::new(a, b, u, t.to_vec()).unwrap()
    }

    #[test]
    fn finfun_enumeration() {
        assert_eq!(FinFun::all(2, 3).count(), 9);
        assert_eq!(FinFun::all(0, 0).count(), 1);
        assert_eq!(FinFun::all(1, 0).count(), 0);
        let f = FinFun::new(3, vec![2, 0]).unwrap();
        let g = FinFun::new(2, vec![1, 1, 0]).unwrap();
        assert_eq!(g.after(&f).unwrap().table, vec![0, 1]);
    }

    #[test]
    fn compose_and_trace_shapes() {
        let f = lh(1, 1, 1, &[1, 0]);
        let g = lh(1, 1, 2, &[2, 0, 1]);
        let fg = loop_compose(&f, &g).unwrap();
        assert_eq!(fg.u, 3);
        assert!(loop_equiv(&loop_compose(&f, &id(1)).unwrap(), &f, 3));
        assert_eq!(loop_trace(&f, 0).unwrap(), f);
        let yank = loop_trace(&LoopHom::swap(1, 1), 1).unwrap();
        assert!(loop_equiv(&yank, &id(1), 3));
        assert!(loop_equiv(&loop_trace(&loop_tensor(&f, &id(1)), 1).unwrap(), &f, 3));
        assert!(matches!(loop_compose(&f, &lh(2, 1, 0, &[0, 0])), Err(LoopError::Type(_))));
    }

    #[test]
    fn normalization_move() {
        // g ⊗ id_1 with loop 1 against g with no loop
        let g = lh(1, 1, 0, &[0]);
        let gi = lh(1, 1, 1, &[0, 1]);
        assert!(loop_equiv(&gi, &g, 3));
    }

    #[test]
    fn coend_instance() {
        // h: 1 -> 2 relabels a two-node loop into a one-node loop
        let fp = LoopHom { a: 1, b: 1, u: 2, f: FinFun::new(2, vec![1, 1, 0]).unwrap() };
        // fp is read as f': A⊗2 -> B⊗1
        let h = [1usize];
        let left: Vec<usize> = fp.f.table.iter().map(|&y| if y < 1 { y } else { 1 + h[y - 1] }).collect();
        let right: Vec<usize> = vec![fp.f.table[0], fp.f.table[1 + h[0]]];
        assert!(loop_equiv(&lh(1, 1, 2, &left), &lh(1, 1, 1, &right), 3));
    }

    #[test]
    fn canonical_loop_collects_garbage() {
        let f = lh(1, 1, 1, &[0, 0]);
        assert_eq!(canonical_loop(&f, Variant::Loop).u, 0);
        for variant in [Variant::Loop, Variant::Uniform] {
            for u in 0..=2 {
                for t in FinFun::all(2 + u, 1 + u) {
                    let f = LoopHom { a: 2, b: 1, u, f: t };
                    let c = canonical_loop(&f, variant);
                    assert!(formula_holds(&c, variant));
                    assert_eq!(canonical_loop(&c, variant), c);
                    assert!(equiv_in(variant, &c, &f));
                }
            }
        }
    }

    #[test]
    fn normal_form_decides_the_quotient() {
        for (a, b) in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (1, 2)] {
            for variant in [Variant::Loop, Variant::Uniform] {
                let q = quotient(a, b, 3, variant);
                let mut by_nf: HashMap<LoopHom, usize> = HashMap::new();
                for i in 0..q.len() {
                    let s = q.state(i);
                    let nf = normal_form(&s, variant);
                    let root = q.find_ro(i);
                    let prev = *by_nf.entry(nf.clone()).or_insert(root);
                    assert_eq!(prev, root, "{s} has normal form {nf}");
                }
                assert_eq!(by_nf.len(), q.class_count());
            }
        }
    }

    #[test]
    fn census_counts() {
        let expect = [
            ((1, 1), 2, 2),
            ((2, 1), 5, 4),
            ((1, 2), 3, 3),
            ((2, 0), 2, 1),
            ((0, 0), 1, 1),
        ];
        for ((a, b), l, u) in expect {
            assert_eq!(hom_census(a, b, 2, Variant::Loop).class_count, l);
            assert_eq!(hom_census(a, b, 2, Variant::Uniform).class_count, u);
        }
        for (a, b) in [(0, 1), (1, 1), (2, 2)] {
            let c = hom_census(a, b, 0, Variant::Loop);
            assert_eq!(c.class_count, b.pow(a as u32));
        }
    }

    #[test]
    fn monad_laws() {
        for u in 0..=2 {
            for t in FinFun::all(1 + u, 1 + u) {
                let f = LoopHom { a: 1, b: 1, u, f: t };
                assert_eq!(monad_mu(&eta_outer(&f)).unwrap(), f);
                assert_eq!(monad_mu(&eta_inner(&f)).unwrap(), f);
            }
        }
        let x = NestedLoopHom::new(1, 1, vec![1, 1, 1], vec![1, 2, 3, 0]).unwrap();
        let left = monad_mu(&x.flatten_at(0)).unwrap();
        let right = monad_mu(&x.flatten_at(1)).unwrap();
        assert_eq!(left, right);
        assert_eq!(monad_eta(&FinFun::identity(2)), id(2));
        assert!(check_monad_laws(Sizes { a: 1, b: 1, u: 1 }).passed());
    }

    #[test]
    fn scalars() {
        assert!(regular_scalars(&FinMonoid::trivial()).is_empty());
        assert_eq!(regular_scalars(&FinMonoid::cyclic(3)), (0..3).collect());
        let meet = FinMonoid::new(0, vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert!(regular_scalars(&meet).is_empty());
        assert!(FinMonoid::new(0, vec![vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn uniformity_separates_the_variants() {
        let w = find_uniformity_counterexample(Variant::Loop, 2).expect("a counterexample exists");
        assert_eq!((w.trace_f.a, w.trace_f.b), (2, 0));
        assert!(uniform_equiv(&w.trace_f, &w.trace_g, 3));
        assert!(!loop_equiv(&w.trace_f, &w.trace_g, 3));
        assert!(find_uniformity_counterexample(Variant::Uniform, 2).is_none());
    }
}
