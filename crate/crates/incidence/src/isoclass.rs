//! Isomorphism machinery: the radical filtration through cover bimodules,
//! necessary invariants, the full graded-isomorphism decision, recognition
//! of good/elementary gradings, orbit-condition verification, minimum
//! support, and searches (multiplicative basis, good-grading census).

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use thiserror::Error;

use crate::algebra::{verify_grading, Grading, IncidenceAlgebra, IncidenceElement};
use crate::bimodule::{bimodule_iso_check, decompose_all, BimoduleDecomposition, BimoduleError};
use crate::canonical::CanonicalForm;
use crate::groups::{Character, Degree, GradingGroup, GroupElement};
use crate::linalg::{kernel, Echelon};
use crate::poset::PosetError;
use crate::scalars::{RootScalar, Scalar};

#[derive(Debug, Error)]
pub enum IsoError {
    #[error("search budget of {0} nodes exhausted")]
    SearchBudgetExceeded(u64),
    #[error(transparent)]
    Bimodule(#[from] BimoduleError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

// ---------------------------------------------------------------------------
// Radical filtration through cover bimodules
// ---------------------------------------------------------------------------

/// Verification data for `J = J_1 (+) sum of higher powers of J_1` and
/// `J_1 ~ J/J^2`.
#[derive(Debug, Clone)]
pub struct RadicalFiltration<S: Scalar> {
    pub j1_basis: Vec<IncidenceElement<S>>,
    pub j_dim: usize,
    pub j1_dim: usize,
    pub j2_dim: usize,
    pub higher_dim: usize,
    /// `J_1` is complementary to the higher powers inside `J`.
    pub splits: bool,
    /// The projection `J_1 -> J/J^2` is a linear isomorphism.
    pub projects_onto_cotangent: bool,
}

pub fn radical_filtration<S: Scalar>(cf: &CanonicalForm<S>) -> RadicalFiltration<S> {
    let alg = &cf.algebra;
    let covers: BTreeSet<(usize, usize)> = cf.assoc.covers().pairs.into_iter().collect();
    let mut j1_basis: Vec<IncidenceElement<S>> = Vec::new();
    for (&(i, j), slices) in &cf.bimodules {
        if covers.contains(&(i, j)) {
            for basis in slices.values() {
                j1_basis.extend(basis.iter().cloned());
            }
        }
    }
    let j_basis = alg.jacobson_radical_basis::<S>();
    let j_dim = j_basis.len();
    let j1 = alg.span(j1_basis.iter());
    // Powers of J_1.
    let mut higher = Echelon::new(alg.dim());
    let mut layer: Vec<IncidenceElement<S>> = j1_basis.clone();
    loop {
        let mut next: Vec<IncidenceElement<S>> = Vec::new();
        let mut ech = Echelon::new(alg.dim());
        for u in &layer {
            for v in &j1_basis {
                let p = alg.mul(u, v);
                if !p.is_zero() && ech.insert(alg.to_vec(&p)) {
                    next.push(p);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for e in &next {
            higher.insert(alg.to_vec(e));
        }
        layer = next;
    }
    let higher_dim = higher.rank();
    let mut all = higher.clone();
    let mut j1_extra = 0usize;
    for e in &j1_basis {
        if all.insert(alg.to_vec(e)) {
            j1_extra += 1;
        }
    }
    let splits = j1_extra == j1.rank() && all.rank() == j_dim;
    // J^2 of the algebra itself.
    let mut j2 = Echelon::new(alg.dim());
    for u in &j_basis {
        for v in &j_basis {
            let p = alg.mul(u, v);
            if !p.is_zero() {
                j2.insert(alg.to_vec(&p));
            }
        }
    }
    let j2_dim = j2.rank();
    let mut j1_plus_j2 = j2.clone();
    let mut disjoint = true;
    for e in &j1_basis {
        if !j1_plus_j2.insert(alg.to_vec(e)) {
            disjoint = false;
        }
    }
    let projects_onto_cotangent = disjoint && j1.rank() == j_dim - j2_dim;
    RadicalFiltration {
        j1_basis,
        j_dim,
        j1_dim: j1.rank(),
        j2_dim,
        higher_dim,
        splits,
        projects_onto_cotangent,
    }
}

// ---------------------------------------------------------------------------
// Graded isomorphism decision
// ---------------------------------------------------------------------------

/// Witness of a graded isomorphism between two canonical forms.
#[derive(Debug, Clone)]
pub struct IsoWitness {
    /// Poset isomorphism between the associated posets (`alpha[i]` in B).
    pub alpha: Vec<usize>,
    /// One character per block of A.
    pub chars: Vec<Character>,
    /// Per comparable pair, the tag matching.
    pub sigmas: BTreeMap<(usize, usize), Vec<usize>>,
}

fn edge_twisted_match<S: Scalar>(
    da: &BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
    db: &BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
    alpha: &[usize],
    chars: &[Option<Character>],
    cf_a: &CanonicalForm<S>,
    i: usize,
    j: usize,
) -> Option<Vec<usize>> {
    let (lo_b, hi_b) = {
        let (a, b) = (alpha[i], alpha[j]);
        (a.min(b), a.max(b))
    };
    let tag_a = da.get(&(i, j)).map(|d| d.tag()).unwrap_or_default();
    let tag_b = db.get(&(lo_b, hi_b)).map(|d| d.tag()).unwrap_or_default();
    if tag_a.len() != tag_b.len() {
        return None;
    }
    if tag_a.is_empty() {
        return Some(vec![]);
    }
    let d_a = da.get(&(i, j)).unwrap();
    let chi_i = chars[i].as_ref().unwrap();
    let chi_j = chars[j].as_ref().unwrap();
    let ri = cf_a.blocks[i].dual.restrict(chi_i, &d_a.meet_dual);
    let rj = cf_a.blocks[j].dual.restrict(chi_j, &d_a.meet_dual);
    let twist = d_a.meet_dual.mul(&ri, &rj);
    let twisted: Vec<(Character, GroupElement)> = tag_b
        .iter()
        .map(|(c, h)| (d_a.meet_dual.mul(&twist, c), h.clone()))
        .collect();
    bimodule_iso_check(&tag_a, &twisted, &d_a.join)
}

struct IsoCtx<'a, S: Scalar> {
    cf_a: &'a CanonicalForm<S>,
    da: &'a BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
    db: &'a BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
    alpha: &'a [usize],
    block_chars: &'a [Vec<Character>],
    budget: u64,
}

fn assign_chars<S: Scalar>(
    ctx: &IsoCtx<'_, S>,
    k: usize,
    chars: &mut Vec<Option<Character>>,
    sigmas: &mut BTreeMap<(usize, usize), Vec<usize>>,
    nodes: &mut u64,
) -> Result<bool, IsoError> {
    let t = ctx.cf_a.t();
    if k == t {
        return Ok(true);
    }
    for chi in &ctx.block_chars[k] {
        *nodes += 1;
        if *nodes > ctx.budget {
            return Err(IsoError::SearchBudgetExceeded(ctx.budget));
        }
        chars[k] = Some(chi.clone());
        let mut ok = true;
        let mut added: Vec<(usize, usize)> = Vec::new();
        for j in 0..k {
            if ctx.cf_a.assoc.leq(j, k) {
                match edge_twisted_match(ctx.da, ctx.db, ctx.alpha, chars, ctx.cf_a, j, k) {
                    Some(sigma) => {
                        sigmas.insert((j, k), sigma);
                        added.push((j, k));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok && assign_chars(ctx, k + 1, chars, sigmas, nodes)? {
            return Ok(true);
        }
        for e in added {
            sigmas.remove(&e);
        }
        chars[k] = None;
    }
    Ok(false)
}

/// Decides graded isomorphism of two canonical forms over the same abelian
/// group: filters poset isomorphisms with equal block subgroups, then
/// backtracks over per-block character tuples, pruning each comparable pair
/// through the tag-matching condition.
pub fn iso_check<S: RootScalar>(
    cf_a: &CanonicalForm<S>,
    cf_b: &CanonicalForm<S>,
    budget: u64,
) -> Result<Option<IsoWitness>, IsoError> {
    assert_eq!(cf_a.group, cf_b.group, "gradings must share the group");
    if cf_a.t() != cf_b.t() {
        return Ok(None);
    }
    let da = decompose_all(cf_a)?;
    let db = decompose_all(cf_b)?;
    let alphas = cf_a.assoc.isomorphisms(&cf_b.assoc, budget)?;
    let mut nodes = 0u64;
    for alpha in alphas {
        if !(0..cf_a.t()).all(|i| cf_a.blocks[i].subgroup == cf_b.blocks[alpha[i]].subgroup) {
            continue;
        }
        // Dimensions and tag sizes must agree edge by edge.
        let t = cf_a.t();
        let sizes_ok = (0..t).all(|i| {
            (i + 1..t).all(|j| {
                if !cf_a.assoc.leq(i, j) {
                    return true;
                }
                let (bi, bj) = (alpha[i].min(alpha[j]), alpha[i].max(alpha[j]));
                cf_a.bimodule_dim(i, j) == cf_b.bimodule_dim(bi, bj)
                    && da.get(&(i, j)).map(|d| d.pairs.len()).unwrap_or(0)
                        == db.get(&(bi, bj)).map(|d| d.pairs.len()).unwrap_or(0)
            })
        });
        if !sizes_ok {
            continue;
        }
        let mut chars: Vec<Option<Character>> = vec![None; t];
        let mut sigmas: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let block_chars: Vec<Vec<Character>> = (0..t)
            .map(|i| cf_a.blocks[i].dual.characters())
            .collect();
        let ctx = IsoCtx {
            cf_a,
            da: &da,
            db: &db,
            alpha: &alpha,
            block_chars: &block_chars,
            budget,
        };
        if assign_chars(&ctx, 0, &mut chars, &mut sigmas, &mut nodes)? {
            let witness = IsoWitness {
                alpha: alpha.clone(),
                chars: chars.into_iter().map(Option::unwrap).collect(),
                sigmas,
            };
            debug_assert!(verify_iso_witness(cf_a, cf_b, &witness, &da, &db));
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// Re-verifies every condition of an isomorphism witness.
pub fn verify_iso_witness<S: Scalar>(
    cf_a: &CanonicalForm<S>,
    cf_b: &CanonicalForm<S>,
    w: &IsoWitness,
    da: &BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
    db: &BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
) -> bool {
    let t = cf_a.t();
    if cf_b.t() != t || w.alpha.len() != t || w.chars.len() != t {
        return false;
    }
    let mut seen = vec![false; t];
    for &a in &w.alpha {
        if a >= t || seen[a] {
            return false;
        }
        seen[a] = true;
    }
    for i in 0..t {
        if cf_a.blocks[i].subgroup != cf_b.blocks[w.alpha[i]].subgroup {
            return false;
        }
        for j in 0..t {
            if i != j
                && cf_a.assoc.leq(i.min(j), i.max(j))
                    != cf_b
                        .assoc
                        .leq(w.alpha[i].min(w.alpha[j]), w.alpha[i].max(w.alpha[j]))
            {
                return false;
            }
        }
    }
    let chars: Vec<Option<Character>> = w.chars.iter().cloned().map(Some).collect();
    for i in 0..t {
        for j in i + 1..t {
            if cf_a.assoc.leq(i, j)
                && edge_twisted_match(da, db, &w.alpha, &chars, cf_a, i, j).is_none()
            {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Good and elementary gradings
// ---------------------------------------------------------------------------

/// When every block is a point (`t = n`), the canonical grading makes each
/// matrix unit homogeneous; returns the unit degrees, or `None` when some
/// block is larger.
pub fn is_good_equivalent<S: Scalar>(
    cf: &CanonicalForm<S>,
) -> Option<BTreeMap<(usize, usize), GroupElement>> {
    if cf.blocks.iter().any(|b| b.order() != 1) {
        return None;
    }
    let mut degrees = BTreeMap::new();
    for b in &cf.blocks {
        let x = b.support[0];
        degrees.insert((x, x), cf.group.identity());
    }
    for (&(i, j), slices) in &cf.bimodules {
        let x = cf.blocks[i].support[0];
        let y = cf.blocks[j].support[0];
        debug_assert_eq!(slices.len(), 1);
        let g = slices.keys().next().unwrap().clone();
        degrees.insert((x, y), g);
    }
    Some(degrees)
}

/// Solves `deg e_{xy} = g_x - g_y` over the comparability graph by breadth
/// first propagation, one free base point per connected component; `None`
/// when a cycle constraint fails (good but not elementary).
pub fn is_elementary(
    poset: &crate::poset::Poset,
    group: &GradingGroup,
    degrees: &BTreeMap<(usize, usize), Degree>,
) -> Option<Vec<Degree>> {
    let n = poset.len();
    let mut assigned: Vec<Option<Degree>> = vec![None; n];
    let edges: Vec<((usize, usize), &Degree)> = degrees
        .iter()
        .filter(|(&(x, y), _)| x != y)
        .map(|(&p, d)| (p, d))
        .collect();
    for root in 0..n {
        if assigned[root].is_some() {
            continue;
        }
        assigned[root] = Some(group.identity());
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let gv = assigned[v].clone().unwrap();
            for &((x, y), d) in &edges {
                // deg e_{xy} = g_x * g_y^{-1}
                if x == v && assigned[y].is_none() {
                    assigned[y] = Some(group.mul(&group.inv(d), &gv));
                    queue.push_back(y);
                } else if y == v && assigned[x].is_none() {
                    assigned[x] = Some(group.mul(d, &gv));
                    queue.push_back(x);
                }
            }
        }
    }
    for (&(x, y), d) in degrees {
        if x == y {
            continue;
        }
        let gx = assigned[x].clone().unwrap();
        let gy = assigned[y].clone().unwrap();
        if group.mul(&gx, &group.inv(&gy)) != *d {
            return None;
        }
    }
    Some(assigned.into_iter().map(Option::unwrap).collect())
}

// ---------------------------------------------------------------------------
// Orbit condition
// ---------------------------------------------------------------------------

/// Outcome of the orbit-condition search.
#[derive(Debug, Clone)]
pub enum OrbitOutcome {
    /// A valid automorphism subset with its per-block multiplicities.
    Found {
        subset: Vec<Vec<usize>>,
        lambdas: Vec<u64>,
    },
    /// No subset exists: witness block whose support splits into several
    /// orbits of the support-preserving automorphism group.
    NotFound { block: usize, orbits: Vec<Vec<usize>> },
}

/// Verifies the orbit condition exactly. Every automorphism usable in a
/// valid subset must preserve each block support, and a valid subset forces
/// the support-preserving subgroup to act transitively on each support; the
/// full subgroup is then itself a valid subset. Transitivity is therefore a
/// complete decision, and it also settles the multiset reading (a valid
/// multiset forces the same transitivity), so no multiset retry is needed.
pub fn verify_orbit_condition<S: Scalar>(
    cf: &CanonicalForm<S>,
    budget: u64,
) -> Result<OrbitOutcome, IsoError> {
    let auts = cf.algebra.poset().automorphisms(budget)?;
    let supports: Vec<BTreeSet<usize>> = cf
        .blocks
        .iter()
        .map(|b| b.support.iter().copied().collect())
        .collect();
    let preserving: Vec<Vec<usize>> = auts
        .into_iter()
        .filter(|a| supports.iter().all(|s| s.iter().all(|&x| s.contains(&a[x]))))
        .collect();
    for (bi, s) in supports.iter().enumerate() {
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for &x in s {
            if seen.contains(&x) {
                continue;
            }
            let mut orbit: BTreeSet<usize> = BTreeSet::from([x]);
            let mut frontier = vec![x];
            while let Some(v) = frontier.pop() {
                for a in &preserving {
                    if orbit.insert(a[v]) {
                        frontier.push(a[v]);
                    }
                }
            }
            seen.extend(orbit.iter().copied());
            orbits.push(orbit.into_iter().collect());
        }
        if orbits.len() > 1 {
            return Ok(OrbitOutcome::NotFound { block: bi, orbits });
        }
    }
    let lambdas: Vec<u64> = supports
        .iter()
        .map(|s| (preserving.len() / s.len()) as u64)
        .collect();
    // Sanity: the subset really sums to lambda_i e_i on every position.
    for (bi, s) in supports.iter().enumerate() {
        for &x in s {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for a in &preserving {
                *counts.entry(a[x]).or_insert(0) += 1;
            }
            debug_assert!(
                s.iter().all(|y| counts.get(y) == Some(&lambdas[bi])),
                "uniform covering of block {bi}"
            );
        }
    }
    Ok(OrbitOutcome::Found {
        subset: preserving,
        lambdas,
    })
}

// ---------------------------------------------------------------------------
// Minimum support
// ---------------------------------------------------------------------------

/// Minimum number of nonzero entries over nonzero vectors of the span of
/// `basis`, by ascending support-set enumeration (rank test per subset).
pub fn min_support<S: Scalar>(alg: &IncidenceAlgebra, basis: &[IncidenceElement<S>]) -> usize {
    assert!(!basis.is_empty(), "min_support needs a nonzero subspace");
    let universe: Vec<usize> = {
        let mut u: BTreeSet<usize> = BTreeSet::new();
        for e in basis {
            for (x, y) in e.support() {
                u.insert(alg.pair_index(x, y).unwrap());
            }
        }
        u.into_iter().collect()
    };
    let best_single = basis
        .iter()
        .map(IncidenceElement::support_size)
        .min()
        .unwrap();
    let vectors: Vec<Vec<S>> = basis.iter().map(|e| alg.to_vec(e)).collect();
    for size in 1..best_single {
        for subset in universe.iter().copied().combinations(size) {
            let inside: BTreeSet<usize> = subset.into_iter().collect();
            let rows: Vec<Vec<S>> = universe
                .iter()
                .filter(|d| !inside.contains(d))
                .map(|&d| vectors.iter().map(|v| v[d].clone()).collect())
                .collect();
            for c in kernel(&rows, basis.len()) {
                let mut v = vec![S::zero(); alg.dim()];
                for (coef, w) in c.iter().zip(&vectors) {
                    for d in &universe {
                        v[*d] = v[*d].add(&coef.mul(&w[*d]));
                    }
                }
                let supp = v.iter().filter(|x| !x.is_zero()).count();
                if supp > 0 {
                    debug_assert!(supp <= size);
                    return supp;
                }
            }
        }
    }
    best_single
}

// ---------------------------------------------------------------------------
// Multiplicative basis search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum BasisOutcome<S: Scalar> {
    /// A verified multiplicative homogeneous basis.
    Found(Vec<IncidenceElement<S>>),
    /// Definitive obstruction from the forced-direction analysis.
    NotFound(BasisObstruction),
    /// The bounded search ran out of budget without a verdict.
    Exhausted { budget: u64 },
}

#[derive(Debug, Clone)]
pub enum BasisObstruction {
    /// More pairwise non-proportional forced directions than the component
    /// dimension (pigeonhole on a homogeneous basis of the component).
    Pigeonhole {
        degree: String,
        dim: usize,
        forced: usize,
    },
    /// Two block chains force incompatible support sizes in one slice.
    ChainInterference {
        degree: String,
        target: (usize, usize),
        other_chain: (usize, usize, usize),
        pinned_support: usize,
        interfering_support: usize,
    },
}

fn normalize_direction<S: Scalar>(mut v: Vec<S>) -> Vec<S> {
    if let Some(p) = v.iter().position(|c| !c.is_zero()) {
        let inv = v[p].inv().expect("nonzero leading entry");
        for c in &mut v {
            *c = c.mul(&inv);
        }
    }
    v
}

/// Searches for a multiplicative homogeneous basis. Phase (a) saturates the
/// directions every such basis must contain (one-dimensional components,
/// products of forced directions, one-dimensional one-sided multiplication
/// images of whole components) and reports a definitive obstruction when
/// they overflow a component, or when two block chains force incompatible
/// supports inside one slice of a non-cover bimodule. The interference
/// conclusion is drawn only under the hypotheses of the underlying argument
/// (level-pure components, one-dimensional chain slices, a fully pinned
/// target slice), which are checked. Phase (b) is a budgeted exhaustive
/// search over low-support homogeneous candidates; only phase (a) produces
/// a definitive `NotFound`.
pub fn search_multiplicative_basis<S: RootScalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
    cf: &CanonicalForm<S>,
    budget: u64,
) -> BasisOutcome<S> {
    let comp_spans: BTreeMap<&Degree, Echelon<S>> = grading
        .components
        .iter()
        .map(|(g, b)| (g, alg.span(b.iter())))
        .collect();
    let mut forced: BTreeMap<Degree, Vec<Vec<S>>> = BTreeMap::new();
    for (g, span) in &comp_spans {
        if span.rank() == 1 {
            forced
                .entry((*g).clone())
                .or_default()
                .push(normalize_direction(span.basis()[0].clone()));
        }
    }
    let push = |forced: &mut BTreeMap<Degree, Vec<Vec<S>>>, g: Degree, v: Vec<S>| -> bool {
        let v = normalize_direction(v);
        let list = forced.entry(g).or_default();
        if list.contains(&v) {
            false
        } else {
            list.push(v);
            true
        }
    };
    loop {
        let mut changed = false;
        let snapshot: Vec<(Degree, Vec<Vec<S>>)> = forced
            .iter()
            .map(|(g, vs)| (g.clone(), vs.clone()))
            .collect();
        // Products of forced directions.
        for (g, us) in &snapshot {
            for (h, vs) in &snapshot {
                let gh = grading.group.mul(g, h);
                for u in us {
                    for v in vs {
                        let p = alg.mul(&alg.from_vec(u), &alg.from_vec(v));
                        if !p.is_zero() {
                            changed |= push(&mut forced, gh.clone(), alg.to_vec(&p));
                        }
                    }
                }
            }
        }
        // One-sided images of whole components under forced directions.
        for (g, us) in &snapshot {
            for u in us {
                let ue = alg.from_vec(u);
                for (h, basis) in &grading.components {
                    let gh = grading.group.mul(g, h);
                    let hg = grading.group.mul(h, g);
                    let mut left = Echelon::new(alg.dim());
                    let mut right = Echelon::new(alg.dim());
                    for b in basis {
                        left.insert(alg.to_vec(&alg.mul(&ue, b)));
                        right.insert(alg.to_vec(&alg.mul(b, &ue)));
                    }
                    if left.rank() == 1 {
                        changed |= push(&mut forced, gh.clone(), left.basis()[0].clone());
                    }
                    if right.rank() == 1 {
                        changed |= push(&mut forced, hg.clone(), right.basis()[0].clone());
                    }
                }
            }
        }
        for (g, vs) in &forced {
            if let Some(span) = comp_spans.get(g) {
                if vs.len() > span.rank() {
                    return BasisOutcome::NotFound(BasisObstruction::Pigeonhole {
                        degree: g.to_string(),
                        dim: span.rank(),
                        forced: vs.len(),
                    });
                }
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(obstruction) = chain_interference(alg, grading, cf, &forced) {
        return BasisOutcome::NotFound(obstruction);
    }
    bounded_basis_search(alg, grading, budget)
}

/// Block-pair signature of a vector: which `(i, j)` slices it touches.
fn block_signature<S: Scalar>(
    v: &IncidenceElement<S>,
    position_block: &[usize],
) -> BTreeSet<(usize, usize)> {
    v.support()
        .map(|(x, y)| (position_block[x], position_block[y]))
        .collect()
}

fn chain_level(assoc: &crate::poset::Poset, i: usize, j: usize) -> usize {
    if i == j {
        return 0;
    }
    (0..assoc.len())
        .filter(|&k| k != i && assoc.leq(i, k) && assoc.leq(k, j))
        .map(|k| 1 + chain_level(assoc, k, j))
        .max()
        .unwrap_or(0)
}

fn chain_interference<S: Scalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
    cf: &CanonicalForm<S>,
    forced: &BTreeMap<Degree, Vec<Vec<S>>>,
) -> Option<BasisObstruction> {
    let t = cf.t();
    let mut position_block = vec![0usize; alg.n()];
    for (bi, b) in cf.blocks.iter().enumerate() {
        for &x in &b.support {
            position_block[x] = bi;
        }
    }
    // Hypothesis: within each component every touched block pair has the
    // same chain level in the associated poset.
    for basis in grading.components.values() {
        let mut levels: BTreeSet<usize> = BTreeSet::new();
        for v in basis {
            for (i, j) in block_signature(v, &position_block) {
                levels.insert(chain_level(&cf.assoc, i, j));
            }
        }
        if levels.len() > 1 {
            return None;
        }
    }
    let covers: BTreeSet<(usize, usize)> = cf.assoc.covers().pairs.into_iter().collect();
    for i in 0..t {
        for j in i + 1..t {
            if !cf.assoc.leq(i, j) || covers.contains(&(i, j)) {
                continue;
            }
            let Some(target) = cf.bimodules.get(&(i, j)) else {
                continue;
            };
            let mids: Vec<usize> = (0..t)
                .filter(|&k| k != i && k != j && cf.assoc.leq(i, k) && cf.assoc.leq(k, j))
                .collect();
            if mids.len() < 2 {
                continue;
            }
            for (d, slice) in target {
                for &k2 in &mids {
                    if let Some(o) = interference_at(
                        alg,
                        cf,
                        forced,
                        &position_block,
                        (i, j),
                        k2,
                        d,
                        slice,
                    ) {
                        return Some(o);
                    }
                }
            }
        }
    }
    None
}

/// Checks one candidate interfering chain `i -> k2 -> j` against a fully
/// pinned target slice at degree `d`.
fn interference_at<S: Scalar>(
    alg: &IncidenceAlgebra,
    cf: &CanonicalForm<S>,
    forced: &BTreeMap<Degree, Vec<Vec<S>>>,
    position_block: &[usize],
    target_pair: (usize, usize),
    k2: usize,
    d: &GroupElement,
    slice: &[IncidenceElement<S>],
) -> Option<BasisObstruction> {
    let (i, j) = target_pair;
    let group = &cf.group;
    let deg = Degree::Abelian(d.clone());
    // Forced directions confined to the (i, j) slice at this degree.
    let in_slice: Vec<&Vec<S>> = forced
        .get(&deg)
        .map(|vs| {
            vs.iter()
                .filter(|v| {
                    block_signature(&alg.from_vec(v), position_block)
                        .iter()
                        .all(|&p| p == (i, j))
                })
                .collect()
        })
        .unwrap_or_default();
    if in_slice.len() != slice.len() {
        return None;
    }
    let slice_span = alg.span(slice.iter());
    if !in_slice.iter().all(|v| slice_span.contains(v)) {
        return None;
    }
    let pinned_min = in_slice
        .iter()
        .map(|v| v.iter().filter(|c| !c.is_zero()).count())
        .min()?;
    let m_ik2 = cf.bimodules.get(&(i.min(k2), i.max(k2)))?;
    let m_k2j = cf.bimodules.get(&(k2.min(j), k2.max(j)))?;
    for (g1, s1) in m_ik2 {
        if s1.len() != 1 {
            continue;
        }
        for (g2, s2) in m_k2j {
            if s2.len() != 1 || group.add(g1, g2) != *d {
                continue;
            }
            let p = alg.mul(&s1[0], &s2[0]);
            if p.is_zero() {
                continue;
            }
            let pv = normalize_direction(alg.to_vec(&p));
            let proportional = in_slice
                .iter()
                .any(|v| normalize_direction((*v).clone()) == pv);
            if !proportional {
                let supp = p.support_size();
                if supp < pinned_min {
                    return Some(BasisObstruction::ChainInterference {
                        degree: d.to_string(),
                        target: (i, j),
                        other_chain: (i, k2, j),
                        pinned_support: pinned_min,
                        interfering_support: supp,
                    });
                }
            }
        }
    }
    None
}

/// Candidate vectors per component for the bounded search: combinations of
/// minimal support, found over ascending support subsets.
fn low_support_candidates<S: Scalar>(
    alg: &IncidenceAlgebra,
    basis: &[IncidenceElement<S>],
    cap: usize,
) -> Vec<IncidenceElement<S>> {
    let universe: Vec<usize> = {
        let mut u: BTreeSet<usize> = BTreeSet::new();
        for e in basis {
            for (x, y) in e.support() {
                u.insert(alg.pair_index(x, y).unwrap());
            }
        }
        u.into_iter().collect()
    };
    let vectors: Vec<Vec<S>> = basis.iter().map(|e| alg.to_vec(e)).collect();
    let mut out: Vec<IncidenceElement<S>> = Vec::new();
    let mut seen: Vec<Vec<S>> = Vec::new();
    for size in 1..=universe.len() {
        for subset in universe.iter().copied().combinations(size) {
            let inside: BTreeSet<usize> = subset.into_iter().collect();
            let rows: Vec<Vec<S>> = universe
                .iter()
                .filter(|p| !inside.contains(p))
                .map(|&p| vectors.iter().map(|v| v[p].clone()).collect())
                .collect();
            for c in kernel(&rows, basis.len()) {
                let mut v = vec![S::zero(); alg.dim()];
                for (coef, w) in c.iter().zip(&vectors) {
                    for p in &universe {
                        v[*p] = v[*p].add(&coef.mul(&w[*p]));
                    }
                }
                if v.iter().all(Scalar::is_zero) {
                    continue;
                }
                let v = normalize_direction(v);
                if !seen.contains(&v) {
                    seen.push(v.clone());
                    out.push(alg.from_vec(&v));
                    if out.len() >= cap {
                        return out;
                    }
                }
            }
        }
        if out.len() >= cap {
            break;
        }
    }
    out
}

fn proportional_to_some<S: Scalar>(
    p: &IncidenceElement<S>,
    basis: &[&IncidenceElement<S>],
) -> bool {
    let pv: Vec<(usize, usize)> = p.support().collect();
    basis.iter().any(|b| {
        let bv: Vec<(usize, usize)> = b.support().collect();
        if pv != bv {
            return false;
        }
        let (x0, y0) = pv[0];
        match p.get(x0, y0).div(&b.get(x0, y0)) {
            Ok(ratio) => pv.iter().all(|&(x, y)| p.get(x, y) == ratio.mul(&b.get(x, y))),
            Err(_) => false,
        }
    })
}

fn bounded_basis_search<S: Scalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
    budget: u64,
) -> BasisOutcome<S> {
    let degrees: Vec<&Degree> = grading.components.keys().collect();
    let dims: Vec<usize> = degrees
        .iter()
        .map(|g| alg.span(grading.components[*g].iter()).rank())
        .collect();
    let candidates: Vec<Vec<IncidenceElement<S>>> = degrees
        .iter()
        .zip(&dims)
        .map(|(g, &dim)| low_support_candidates(alg, &grading.components[*g], 2 * dim + 6))
        .collect();
    let comp_start: Vec<usize> = {
        let mut acc = 0usize;
        let mut out = Vec::new();
        for d in &dims {
            out.push(acc);
            acc += d;
        }
        out
    };

    struct Search<'a, S: Scalar> {
        alg: &'a IncidenceAlgebra,
        group: &'a GradingGroup,
        degrees: &'a [&'a Degree],
        dims: &'a [usize],
        candidates: &'a [Vec<IncidenceElement<S>>],
        comp_start: &'a [usize],
        budget: u64,
    }

    impl<S: Scalar> Search<'_, S> {
        /// Incremental pruning: only products landing in already-complete
        /// components are decided now; products into pending components are
        /// deferred to the final closure check.
        fn closure_ok_incremental(
            &self,
            chosen: &[IncidenceElement<S>],
            comp: usize,
            newest: &IncidenceElement<S>,
        ) -> bool {
            let deg_of = |idx: usize| -> &Degree {
                let c = self
                    .comp_start
                    .iter()
                    .rposition(|&s| s <= idx)
                    .expect("index within chosen");
                self.degrees[c]
            };
            let all: Vec<(&Degree, &IncidenceElement<S>)> = chosen
                .iter()
                .enumerate()
                .map(|(k, e)| (deg_of(k), e))
                .chain([(self.degrees[comp], newest)])
                .collect();
            for &(dg, b) in &all {
                for ((d1, u), (d2, v)) in [((dg, b), (self.degrees[comp], newest)),
                    ((self.degrees[comp], newest), (dg, b))]
                {
                    let p = self.alg.mul(u, v);
                    if p.is_zero() {
                        continue;
                    }
                    let target = self.group.mul(d1, d2);
                    let Some(tc) = self.degrees.iter().position(|&g| *g == target) else {
                        return false;
                    };
                    if tc < comp {
                        let members: Vec<&IncidenceElement<S>> = chosen
                            [self.comp_start[tc]..self.comp_start[tc] + self.dims[tc]]
                            .iter()
                            .collect();
                        if !proportional_to_some(&p, &members) {
                            return false;
                        }
                    }
                }
            }
            true
        }

        fn closure_ok_full(&self, chosen: &[IncidenceElement<S>]) -> bool {
            let all: Vec<&IncidenceElement<S>> = chosen.iter().collect();
            for u in &all {
                for v in &all {
                    let p = self.alg.mul(*u, *v);
                    if !p.is_zero() && !proportional_to_some(&p, &all) {
                        return false;
                    }
                }
            }
            true
        }

        fn pick(
            &self,
            comp: usize,
            slot: usize,
            start: usize,
            chosen: &mut Vec<IncidenceElement<S>>,
            nodes: &mut u64,
        ) -> Result<bool, ()> {
            if comp == self.dims.len() {
                return Ok(self.closure_ok_full(chosen));
            }
            if slot == self.dims[comp] {
                return self.pick(comp + 1, 0, 0, chosen, nodes);
            }
            for (ci, cand) in self.candidates[comp].iter().enumerate().skip(start) {
                *nodes += 1;
                if *nodes > self.budget {
                    return Err(());
                }
                // Independence inside this component.
                let mut ech = Echelon::new(self.alg.dim());
                for e in &chosen[self.comp_start[comp]..] {
                    ech.insert(self.alg.to_vec(e));
                }
                if !ech.insert(self.alg.to_vec(cand)) {
                    continue;
                }
                if !self.closure_ok_incremental(chosen, comp, cand) {
                    continue;
                }
                chosen.push(cand.clone());
                if self.pick(comp, slot + 1, ci + 1, chosen, nodes)? {
                    return Ok(true);
                }
                chosen.pop();
            }
            Ok(false)
        }
    }

    let search = Search {
        alg,
        group: &grading.group,
        degrees: &degrees,
        dims: &dims,
        candidates: &candidates,
        comp_start: &comp_start,
        budget,
    };
    let mut chosen: Vec<IncidenceElement<S>> = Vec::new();
    let mut nodes = 0u64;
    match search.pick(0, 0, 0, &mut chosen, &mut nodes) {
        Ok(true) => BasisOutcome::Found(chosen),
        Ok(false) | Err(()) => BasisOutcome::Exhausted { budget },
    }
}

// ---------------------------------------------------------------------------
// Necessary invariants
// ---------------------------------------------------------------------------

/// Isomorphism-invariant fingerprint: equality is necessary for graded
/// isomorphism. The block data is canonicalized by minimizing over all
/// relabelings of the associated poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub t: usize,
    canonical: Vec<u8>,
}

pub fn necessary_invariants<S: Scalar>(
    cf: &CanonicalForm<S>,
    decomps: &BTreeMap<(usize, usize), BimoduleDecomposition<S>>,
) -> Fingerprint {
    let t = cf.t();
    let mut best: Option<Vec<u8>> = None;
    for perm in (0..t).permutations(t) {
        // perm maps new label -> old block.
        let inv = perm;
        let mut desc = Vec::new();
        for a in 0..t {
            for b in 0..t {
                let (x, y) = (inv[a], inv[b]);
                desc.push(u8::from(x != y && x.min(y) == x && cf.assoc.leq(x, y) && a < b
                    || x != y && y < x && cf.assoc.leq(y, x) && a < b));
            }
        }
        for &old in &inv {
            desc.push(0xFE);
            for row in cf.blocks[old].subgroup.lattice_basis() {
                for &v in row {
                    desc.extend(v.to_be_bytes());
                }
                desc.push(0xFD);
            }
        }
        for a in 0..t {
            for b in a + 1..t {
                let (x, y) = (inv[a].min(inv[b]), inv[a].max(inv[b]));
                let dim = cf.bimodule_dim(x, y) as u64;
                let s = decomps.get(&(x, y)).map_or(0, |d| d.pairs.len()) as u64;
                desc.extend(dim.to_be_bytes());
                desc.extend(s.to_be_bytes());
            }
        }
        if best.as_ref().map_or(true, |b| desc < *b) {
            best = Some(desc);
        }
    }
    Fingerprint {
        t,
        canonical: best.unwrap_or_default(),
    }
}

// ---------------------------------------------------------------------------
// Good-grading census (oracle machinery)
// ---------------------------------------------------------------------------

/// Enumerates all good gradings over a finite abelian group: assignments of
/// degrees to cover units whose path sums agree on every comparable pair.
pub fn enumerate_good_gradings<S: Scalar>(
    alg: &IncidenceAlgebra,
    group: &crate::groups::AbelianGroup,
    budget: u64,
) -> Result<Vec<Grading<S>>, IsoError> {
    let covers = alg.poset().covers().pairs;
    let elements = group
        .elements()
        .expect("good-grading census needs a finite group");
    let total = (elements.len() as u64)
        .checked_pow(covers.len() as u32)
        .unwrap_or(u64::MAX);
    if total > budget {
        return Err(IsoError::SearchBudgetExceeded(budget));
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; covers.len()];
    loop {
        if let Some(degrees) =
            path_consistent_degrees(alg, &covers, &assignment, &elements, group)
        {
            let mut grading = Grading::new(GradingGroup::Abelian(group.clone()));
            for x in 0..alg.n() {
                grading.push(Degree::Abelian(group.identity()), alg.unit(x, x));
            }
            for (&(x, y), g) in &degrees {
                grading.push(Degree::Abelian(g.clone()), alg.unit(x, y));
            }
            debug_assert!(verify_grading(alg, &grading).pass());
            out.push(grading);
        }
        let mut k = 0;
        loop {
            if k == covers.len() {
                return Ok(out);
            }
            assignment[k] += 1;
            if assignment[k] < elements.len() {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
    }
}

/// Degrees for every strict comparable pair when all cover paths agree.
fn path_consistent_degrees(
    alg: &IncidenceAlgebra,
    covers: &[(usize, usize)],
    assignment: &[usize],
    elements: &[GroupElement],
    group: &crate::groups::AbelianGroup,
) -> Option<BTreeMap<(usize, usize), GroupElement>> {
    let mut degrees: BTreeMap<(usize, usize), GroupElement> = BTreeMap::new();
    for (k, &(x, y)) in covers.iter().enumerate() {
        degrees.insert((x, y), elements[assignment[k]].clone());
    }
    let mut pairs: Vec<(usize, usize)> = alg
        .pairs()
        .iter()
        .copied()
        .filter(|&(x, y)| x != y)
        .collect();
    pairs.sort_by_key(|&(x, y)| y - x);
    for (x, y) in pairs {
        let mut value: Option<GroupElement> = degrees.get(&(x, y)).cloned();
        for z in x + 1..y {
            if alg.poset().lt(x, z) && alg.poset().lt(z, y) {
                if let (Some(a), Some(b)) = (degrees.get(&(x, z)), degrees.get(&(z, y))) {
                    let candidate = group.add(a, b);
                    match &value {
                        None => value = Some(candidate),
                        Some(v) if *v != candidate => return None,
                        _ => {}
                    }
                }
            }
        }
        degrees.insert((x, y), value.expect("interval has a cover factorization"));
    }
    Some(degrees)
}

/// Brute-force graded-isomorphism oracle for good gradings: diagonal
/// conjugations fix every matrix-unit component, so the graded isomorphisms
/// to search are exactly the transports along poset automorphisms.
pub fn good_iso_oracle<S: Scalar>(
    alg: &IncidenceAlgebra,
    a: &Grading<S>,
    b: &Grading<S>,
    budget: u64,
) -> Result<bool, IsoError> {
    let auts = alg.poset().automorphisms(budget)?;
    let spans_b: BTreeMap<&Degree, Echelon<S>> = b
        .components
        .iter()
        .map(|(g, basis)| (g, alg.span(basis.iter())))
        .collect();
    'auto: for aut in auts {
        for (g, basis) in &a.components {
            let Some(span_b) = spans_b.get(g) else {
                continue 'auto;
            };
            for v in basis {
                if !span_b.contains(&alg.to_vec(&alg.relabel(v, &aut))) {
                    continue 'auto;
                }
            }
        }
        return Ok(true);
    }
    Ok(false)
}
