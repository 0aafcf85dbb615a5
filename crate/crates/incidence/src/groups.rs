//! Finitely generated abelian groups (grading groups and their finite
//! subgroups), characters, subgroup-lattice operations, and finite groups
//! given by a multiplication table for verification-only workflows.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::scalars::{RootScalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("operands live in different ambient groups")]
    AmbientMismatch,
    #[error("the claimed subgroup relation H <= K does not hold")]
    NotASubgroup,
    #[error("subgroup is infinite where a finite one is required")]
    InfiniteSubgroup,
    #[error("multiplication table is not a group: {0}")]
    BadTable(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Direct product of cyclic groups; `moduli[i] = 0` encodes an infinite
/// cyclic factor, `moduli[i] = d > 1` a factor of order `d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
}

/// Element of an `AbelianGroup`, componentwise reduced: `0 <= c < d`
/// whenever the corresponding modulus `d` is positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<i64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Self {
        assert!(moduli.iter().all(|&d| d != 1 || true));
        AbelianGroup { moduli }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_finite(&self) -> bool {
        self.moduli.iter().all(|&d| d > 0)
    }

    pub fn order(&self) -> Option<u64> {
        self.moduli.iter().try_fold(1u64, |acc, &d| {
            if d == 0 {
                None
            } else {
                Some(acc * d)
            }
        })
    }

    pub fn reduce(&self, coords: &[i64]) -> GroupElement {
        assert_eq!(coords.len(), self.moduli.len());
        let coords = coords
            .iter()
            .zip(&self.moduli)
            .map(|(&c, &d)| if d > 0 { c.rem_euclid(d as i64) } else { c })
            .collect();
        GroupElement { coords }
    }

    pub fn element(&self, coords: &[i64]) -> GroupElement {
        self.reduce(coords)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let coords: Vec<i64> = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x + y)
            .collect();
        self.reduce(&coords)
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let coords: Vec<i64> = a.coords.iter().map(|x| -x).collect();
        self.reduce(&coords)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn scalar_mul(&self, k: i64, a: &GroupElement) -> GroupElement {
        let coords: Vec<i64> = a.coords.iter().map(|x| x * k).collect();
        self.reduce(&coords)
    }

    /// Order of the element; `None` when infinite.
    pub fn element_order(&self, a: &GroupElement) -> Option<u64> {
        let mut ord = 1u64;
        for (&c, &d) in a.coords.iter().zip(&self.moduli) {
            if d == 0 {
                if c != 0 {
                    return None;
                }
            } else if c != 0 {
                let c = c.rem_euclid(d as i64) as u64;
                ord = ord.lcm(&(d / c.gcd(&d)));
            }
        }
        Some(ord)
    }

    /// All elements of a finite group, in lexicographic coordinate order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = vec![self.identity()];
        for (i, &d) in self.moduli.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for e in &out {
                for v in 0..d as i64 {
                    let mut c = e.coords.clone();
                    c[i] = v;
                    next.push(GroupElement { coords: c });
                }
            }
            out = next;
        }
        out.sort();
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Integer lattices: row-style Hermite normal form
// ---------------------------------------------------------------------------

/// Row-style HNF: echelon rows, positive pivots, entries above each pivot
/// reduced into `[0, pivot)`. Zero rows dropped. Unique per lattice.
pub fn hermite_normal_form(mut rows: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].len();
    let mut top = 0usize;
    for col in 0..ncols {
        // Euclidean elimination below `top` in this column.
        loop {
            let mut best: Option<usize> = None;
            for r in top..rows.len() {
                if rows[r][col] != 0
                    && best.map_or(true, |b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            rows.swap(top, b);
            let mut done = true;
            for r in top + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = rows[r][col].div_euclid(rows[top][col]);
                    for c in 0..ncols {
                        rows[r][c] -= q * rows[top][c];
                    }
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if top < rows.len() && rows[top][col] != 0 {
            if rows[top][col] < 0 {
                for c in 0..ncols {
                    rows[top][c] = -rows[top][c];
                }
            }
            let p = rows[top][col];
            for r in 0..top {
                let q = rows[r][col].div_euclid(p);
                if q != 0 {
                    for c in 0..ncols {
                        rows[r][c] -= q * rows[top][c];
                    }
                }
            }
            top += 1;
        }
    }
    rows.truncate(top);
    rows
}

/// Basis of the left kernel `{ v : v M = 0 }` of the row matrix `M`.
pub fn left_kernel(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let m = rows.len();
    if m == 0 {
        return vec![];
    }
    let ncols = rows[0].len();
    // Augment each row with the identity and run the HNF elimination; the
    // transform part of rows whose lattice part became zero spans the kernel.
    let mut aug: Vec<Vec<i64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..m).map(|j| if i == j { 1 } else { 0 }));
            v
        })
        .collect();
    let mut top = 0usize;
    for col in 0..ncols {
        loop {
            let mut best: Option<usize> = None;
            for r in top..aug.len() {
                if aug[r][col] != 0
                    && best.map_or(true, |b| aug[r][col].abs() < aug[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            aug.swap(top, b);
            let mut done = true;
            for r in top + 1..aug.len() {
                if aug[r][col] != 0 {
                    let q = aug[r][col].div_euclid(aug[top][col]);
                    for c in 0..ncols + m {
                        aug[r][c] -= q * aug[top][c];
                    }
                    if aug[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if top < aug.len() && aug[top][col] != 0 {
            top += 1;
        }
    }
    aug[top..]
        .iter()
        .map(|row| row[ncols..].to_vec())
        .collect()
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

/// Subgroup of an `AbelianGroup`, canonicalized as the HNF basis of its
/// preimage lattice in `Z^r` (generators together with the moduli relations),
/// so subgroup equality is row-by-row equality of `lattice`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    ambient: AbelianGroup,
    lattice: Vec<Vec<i64>>,
}

impl Subgroup {
    pub fn from_generators(ambient: &AbelianGroup, gens: &[GroupElement]) -> Self {
        let r = ambient.rank();
        let mut rows: Vec<Vec<i64>> = gens.iter().map(|g| g.coords.clone()).collect();
        for (i, &d) in ambient.moduli().iter().enumerate() {
            if d > 0 {
                let mut row = vec![0i64; r];
                row[i] = d as i64;
                rows.push(row);
            }
        }
        Subgroup {
            ambient: ambient.clone(),
            lattice: hermite_normal_form(rows),
        }
    }

    pub fn trivial(ambient: &AbelianGroup) -> Self {
        Subgroup::from_generators(ambient, &[])
    }

    pub fn full(ambient: &AbelianGroup) -> Self {
        let r = ambient.rank();
        let gens: Vec<GroupElement> = (0..r)
            .map(|i| {
                let mut c = vec![0i64; r];
                c[i] = 1;
                ambient.element(&c)
            })
            .collect();
        Subgroup::from_generators(ambient, &gens)
    }

    pub fn ambient(&self) -> &AbelianGroup {
        &self.ambient
    }

    /// Canonical HNF basis rows of the preimage lattice.
    pub fn lattice_basis(&self) -> &[Vec<i64>] {
        &self.lattice
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let mut v = g.coords.clone();
        for row in &self.lattice {
            let Some(p) = row.iter().position(|&x| x != 0) else {
                continue;
            };
            if v[p] != 0 {
                let q = v[p].div_euclid(row[p]);
                if q != 0 {
                    for c in 0..v.len() {
                        v[c] -= q * row[c];
                    }
                }
            }
            if v[p] != 0 {
                return false;
            }
        }
        v.iter().all(|&x| x == 0)
    }

    fn check_ambient(&self, other: &Subgroup) -> Result<(), GroupError> {
        if self.ambient != other.ambient {
            return Err(GroupError::AmbientMismatch);
        }
        Ok(())
    }

    /// Smallest subgroup containing both (`H = H_1 H_2`).
    pub fn join(&self, other: &Subgroup) -> Result<Subgroup, GroupError> {
        self.check_ambient(other)?;
        let mut rows = self.lattice.clone();
        rows.extend(other.lattice.iter().cloned());
        Ok(Subgroup {
            ambient: self.ambient.clone(),
            lattice: hermite_normal_form(rows),
        })
    }

    /// Intersection, via the left kernel of the stacked lattice bases.
    pub fn meet(&self, other: &Subgroup) -> Result<Subgroup, GroupError> {
        self.check_ambient(other)?;
        let k1 = self.lattice.len();
        let mut stacked = self.lattice.clone();
        stacked.extend(other.lattice.iter().cloned());
        let kern = left_kernel(&stacked);
        let rows: Vec<Vec<i64>> = kern
            .iter()
            .map(|v| {
                let r = self.ambient.rank();
                let mut x = vec![0i64; r];
                for (i, row) in self.lattice.iter().enumerate() {
                    for c in 0..r {
                        x[c] += v[i] * row[c];
                    }
                }
                let _ = k1;
                x
            })
            .collect();
        Ok(Subgroup {
            ambient: self.ambient.clone(),
            lattice: hermite_normal_form(rows),
        })
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.ambient == other.ambient
            && self
                .lattice
                .iter()
                .all(|row| other.contains(&self.ambient.reduce(row)))
    }

    pub fn is_finite(&self) -> bool {
        self.lattice
            .iter()
            .all(|row| self.ambient.element_order(&self.ambient.reduce(row)).is_some())
    }

    /// All elements of a finite subgroup, sorted; errors when infinite.
    pub fn elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        if !self.is_finite() {
            return Err(GroupError::InfiniteSubgroup);
        }
        let gens: Vec<GroupElement> = self
            .lattice
            .iter()
            .map(|row| self.ambient.reduce(row))
            .collect();
        let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
        let mut queue = VecDeque::new();
        let id = self.ambient.identity();
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(e) = queue.pop_front() {
            for g in &gens {
                let f = self.ambient.add(&e, g);
                if seen.insert(f.clone()) {
                    queue.push_back(f);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    pub fn order(&self) -> Result<u64, GroupError> {
        Ok(self.elements()?.len() as u64)
    }

    /// True iff `g` and `h` lie in the same coset of this subgroup.
    pub fn coset_equal(&self, g: &GroupElement, h: &GroupElement) -> bool {
        self.contains(&self.ambient.sub(g, h))
    }

    /// Adapted generators with invariant-factor orders (largest first), plus
    /// the coordinate map used by the character machinery.
    pub fn dual_basis(&self) -> Result<DualBasis, GroupError> {
        let elements = self.elements()?;
        let amb = self.ambient.clone();
        let (gens, orders) = adapted_generators(&amb, &elements);
        let exponent = orders.iter().fold(1u64, |a, &b| a.lcm(&b)).max(1);
        // Enumerate coordinates.
        let mut coord_map: BTreeMap<GroupElement, Vec<u64>> = BTreeMap::new();
        let mut stack = vec![(amb.identity(), Vec::new())];
        let mut expanded = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            expanded.clear();
            for (e, coords) in &stack {
                let mut acc = e.clone();
                for a in 0..orders[i] {
                    let mut c = coords.clone();
                    c.push(a);
                    expanded.push((acc.clone(), c));
                    acc = amb.add(&acc, g);
                }
            }
            std::mem::swap(&mut stack, &mut expanded);
        }
        for (e, coords) in stack {
            let prior = coord_map.insert(e, coords);
            assert!(prior.is_none(), "adapted generators give unique coordinates");
        }
        assert_eq!(coord_map.len(), elements.len());
        Ok(DualBasis {
            gens,
            orders,
            exponent,
            coord_map,
        })
    }
}

/// Adapted (invariant-factor) generators of a finite abelian group given by
/// its element set: split off an element of maximal order, recurse on the
/// quotient, lift coset representatives.
fn adapted_generators(
    amb: &AbelianGroup,
    elements: &[GroupElement],
) -> (Vec<GroupElement>, Vec<u64>) {
    if elements.len() <= 1 {
        return (vec![], vec![]);
    }
    let order_of = |e: &GroupElement| amb.element_order(e).expect("finite subgroup");
    let max_ord = elements.iter().map(|e| order_of(e)).max().unwrap();
    let g = elements
        .iter()
        .find(|e| order_of(e) == max_ord)
        .unwrap()
        .clone();
    // Cyclic subgroup generated by g.
    let mut cyc = Vec::new();
    let mut acc = amb.identity();
    for _ in 0..max_ord {
        cyc.push(acc.clone());
        acc = amb.add(&acc, &g);
    }
    let cyc_set: BTreeSet<GroupElement> = cyc.iter().cloned().collect();
    // Quotient: canonical representative = minimum of the coset.
    let rep = |e: &GroupElement| -> GroupElement {
        cyc.iter()
            .map(|c| amb.add(e, c))
            .min()
            .expect("nonempty coset")
    };
    let reps: BTreeSet<GroupElement> = elements.iter().map(|e| rep(e)).collect();
    let reps: Vec<GroupElement> = reps.into_iter().collect();
    if reps.len() == 1 {
        return (vec![g], vec![max_ord]);
    }
    // The quotient is a group under (a, b) -> rep(a + b); recursion works on
    // representatives with the induced operation. We model it directly on the
    // ambient with a wrapped add by recursing over the rep set and quotient
    // orders computed by hand.
    let quot_order_of = |e: &GroupElement| -> u64 {
        let mut acc = e.clone();
        let mut k = 1u64;
        while !cyc_set.contains(&acc) {
            acc = amb.add(&acc, e);
            k += 1;
        }
        k
    };
    // Recurse manually: pick maximal quotient-order representative, etc.
    // For convenience rebuild the quotient as an abstract table and reuse the
    // same splitting logic via explicit recursion.
    fn split_quotient(
        amb: &AbelianGroup,
        reps: &[GroupElement],
        rep: &dyn Fn(&GroupElement) -> GroupElement,
        quot_order_of: &dyn Fn(&GroupElement) -> u64,
    ) -> (Vec<GroupElement>, Vec<u64>) {
        if reps.len() <= 1 {
            return (vec![], vec![]);
        }
        let max_ord = reps
            .iter()
            .filter(|e| *e != &rep(&amb.identity()))
            .map(|e| quot_order_of(e))
            .max()
            .unwrap();
        let h = reps
            .iter()
            .find(|e| *e != &rep(&amb.identity()) && quot_order_of(e) == max_ord)
            .unwrap()
            .clone();
        // Cosets of <h> inside the quotient.
        let mut hcyc = Vec::new();
        let mut acc = rep(&amb.identity());
        for _ in 0..max_ord {
            hcyc.push(acc.clone());
            acc = rep(&amb.add(&acc, &h));
        }
        let rep2 = {
            let hcyc = hcyc.clone();
            move |e: &GroupElement| -> GroupElement {
                hcyc.iter().map(|c| rep(&amb.add(e, c))).min().unwrap()
            }
        };
        let reps2: BTreeSet<GroupElement> = reps.iter().map(|e| rep2(e)).collect();
        let reps2: Vec<GroupElement> = reps2.into_iter().collect();
        let hset: BTreeSet<GroupElement> = hcyc.iter().cloned().collect();
        let quot2_order_of = {
            let hset = hset.clone();
            move |e: &GroupElement| -> u64 {
                let mut acc = rep(e);
                let mut k = 1u64;
                while !hset.contains(&acc) {
                    acc = rep(&amb.add(&acc, e));
                    k += 1;
                }
                k
            }
        };
        let (mut gens, mut orders) = split_quotient(amb, &reps2, &rep2, &quot2_order_of);
        gens.insert(0, h);
        orders.insert(0, max_ord);
        (gens, orders)
    }

    let (qgens, qorders) = split_quotient(amb, &reps, &rep, &quot_order_of);

    // Lift quotient generators: adjust h so that (quot order) * h = 0.
    let mut gens = vec![g.clone()];
    let mut orders = vec![max_ord];
    for (h, &n) in qgens.iter().zip(&qorders) {
        let nh = amb.scalar_mul(n as i64, h);
        // nh lies in <g>: find c with nh = c*g.
        let mut c = 0u64;
        let mut acc = amb.identity();
        while acc != nh {
            acc = amb.add(&acc, &g);
            c += 1;
            assert!(c <= max_ord, "lift stays inside the cyclic factor");
        }
        assert!(c % n == 0, "coset representative lifts to an exact generator");
        let adjust = amb.scalar_mul((c / n) as i64, &g);
        let lifted = amb.sub(h, &adjust);
        debug_assert_eq!(amb.scalar_mul(n as i64, &lifted), amb.identity());
        gens.push(lifted);
        orders.push(n);
    }
    (gens, orders)
}

// ---------------------------------------------------------------------------
// Characters
// ---------------------------------------------------------------------------

/// Adapted generators of a finite subgroup together with the coordinate map;
/// the home of its character group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualBasis {
    pub gens: Vec<GroupElement>,
    pub orders: Vec<u64>,
    pub exponent: u64,
    coord_map: BTreeMap<GroupElement, Vec<u64>>,
}

/// Character of a finite abelian subgroup, recorded by exponents against the
/// subgroup's adapted generators: `chi(gen_i) = zeta_exp^(exps_i * exp/m_i)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Character {
    pub exps: Vec<u64>,
}

impl DualBasis {
    pub fn group_order(&self) -> u64 {
        self.coord_map.len() as u64
    }

    pub fn coords(&self, h: &GroupElement) -> Option<&Vec<u64>> {
        self.coord_map.get(h)
    }

    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.coord_map.keys()
    }

    pub fn trivial_character(&self) -> Character {
        Character {
            exps: vec![0; self.orders.len()],
        }
    }

    /// All characters, in lexicographic exponent order (the trivial character
    /// first); exactly `|H|` of them.
    pub fn characters(&self) -> Vec<Character> {
        let mut out = vec![Character { exps: vec![] }];
        for &m in &self.orders {
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for c in &out {
                for v in 0..m {
                    let mut e = c.exps.clone();
                    e.push(v);
                    next.push(Character { exps: e });
                }
            }
            out = next;
        }
        out
    }

    /// `chi(h)` as an exponent of `zeta_exponent`.
    pub fn eval_exponent(&self, chi: &Character, h: &GroupElement) -> u64 {
        let coords = self
            .coord_map
            .get(h)
            .expect("element belongs to the subgroup");
        let mut k = 0u64;
        for ((&c, &a), &m) in chi.exps.iter().zip(coords).zip(&self.orders) {
            k = (k + c * (self.exponent / m) % self.exponent * a) % self.exponent;
        }
        k % self.exponent
    }

    pub fn eval<S: RootScalar>(
        &self,
        chi: &Character,
        h: &GroupElement,
    ) -> Result<S, ScalarError> {
        S::root_of_unity(self.exponent, self.eval_exponent(chi, h) as i64)
    }

    pub fn mul(&self, a: &Character, b: &Character) -> Character {
        Character {
            exps: a
                .exps
                .iter()
                .zip(&b.exps)
                .zip(&self.orders)
                .map(|((&x, &y), &m)| (x + y) % m)
                .collect(),
        }
    }

    pub fn inv(&self, a: &Character) -> Character {
        Character {
            exps: a
                .exps
                .iter()
                .zip(&self.orders)
                .map(|(&x, &m)| (m - x) % m)
                .collect(),
        }
    }

    /// Restriction of a character on this basis's group to a subgroup `H`.
    pub fn restrict(&self, chi: &Character, sub: &DualBasis) -> Character {
        let exps = sub
            .gens
            .iter()
            .zip(&sub.orders)
            .map(|(h, &m)| {
                let v = self.eval_exponent(chi, h);
                // zeta_expK^v = zeta_expH^(v * expH / expK); the result is an
                // exact multiple of expH/m by the character laws.
                let step = self.exponent / m;
                assert!(v % step == 0, "restricted value has order dividing {m}");
                (v / step) % m
            })
            .collect();
        Character { exps }
    }
}

/// Extends `chi` on `H` to a character of `K >= H`; deterministic choice:
/// lexicographically minimal exponent vector against `K`'s adapted basis.
pub fn extend_character(
    h: &Subgroup,
    k: &Subgroup,
    h_basis: &DualBasis,
    chi: &Character,
) -> Result<(DualBasis, Character), GroupError> {
    if !h.is_subgroup_of(k) {
        return Err(GroupError::NotASubgroup);
    }
    let k_basis = k.dual_basis()?;
    for cand in k_basis.characters() {
        if k_basis.restrict(&cand, h_basis) == *chi {
            return Ok((k_basis, cand));
        }
    }
    unreachable!("every character of a subgroup extends to the whole group")
}

// ---------------------------------------------------------------------------
// Finite groups given by multiplication table (verification-only)
// ---------------------------------------------------------------------------

/// Finite group presented by its full multiplication table; the constructor
/// verifies the group laws exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    pub fn new(order: usize, table: Vec<usize>) -> Result<Self, GroupError> {
        if table.len() != order * order {
            return Err(GroupError::BadTable(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if table.iter().any(|&x| x >= order) {
            return Err(GroupError::BadTable("index out of range".into()));
        }
        let at = |a: usize, b: usize| table[a * order + b];
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| GroupError::BadTable("no identity element".into()))?;
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(GroupError::BadTable(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| at(a, b) == identity && at(b, a) == identity) {
                Some(b) => inverse[a] = b,
                None => {
                    return Err(GroupError::BadTable(format!("{a} has no inverse")));
                }
            }
        }
        Ok(FiniteGroupTable {
            order,
            table,
            identity,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut acc = a;
        let mut k = 1u64;
        while acc != self.identity {
            acc = self.mul(acc, a);
            k += 1;
        }
        k
    }
}

// ---------------------------------------------------------------------------
// Grading groups: abelian or table-backed degrees
// ---------------------------------------------------------------------------

/// The group a grading is indexed by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GradingGroup {
    Abelian(AbelianGroup),
    Table(FiniteGroupTable),
}

/// Degree of a homogeneous element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Abelian(GroupElement),
    Table(usize),
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Abelian(g) => write!(f, "{g}"),
            Degree::Table(i) => write!(f, "#{i}"),
        }
    }
}

impl GradingGroup {
    pub fn identity(&self) -> Degree {
        match self {
            GradingGroup::Abelian(g) => Degree::Abelian(g.identity()),
            GradingGroup::Table(t) => Degree::Table(t.identity()),
        }
    }

    pub fn mul(&self, a: &Degree, b: &Degree) -> Degree {
        match (self, a, b) {
            (GradingGroup::Abelian(g), Degree::Abelian(x), Degree::Abelian(y)) => {
                Degree::Abelian(g.add(x, y))
            }
            (GradingGroup::Table(t), Degree::Table(x), Degree::Table(y)) => {
                Degree::Table(t.mul(*x, *y))
            }
            _ => panic!("degree does not belong to this grading group"),
        }
    }

    pub fn inv(&self, a: &Degree) -> Degree {
        match (self, a) {
            (GradingGroup::Abelian(g), Degree::Abelian(x)) => Degree::Abelian(g.neg(x)),
            (GradingGroup::Table(t), Degree::Table(x)) => Degree::Table(t.inv(*x)),
            _ => panic!("degree does not belong to this grading group"),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GradingGroup::Abelian(_) => true,
            GradingGroup::Table(t) => t.is_abelian(),
        }
    }

    pub fn abelian(&self) -> Option<&AbelianGroup> {
        match self {
            GradingGroup::Abelian(g) => Some(g),
            GradingGroup::Table(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z2() -> AbelianGroup {
        AbelianGroup::new(vec![2, 2])
    }

    fn sub(g: &AbelianGroup, gens: &[&[i64]]) -> Subgroup {
        let gens: Vec<GroupElement> = gens.iter().map(|c| g.element(c)).collect();
        Subgroup::from_generators(g, &gens)
    }

    #[test]
    fn join_examples() {
        let g = z2z2();
        let a = sub(&g, &[&[1, 0]]);
        let b = sub(&g, &[&[0, 1]]);
        assert_eq!(a.join(&b).unwrap(), Subgroup::full(&g));
        assert_eq!(a.join(&a).unwrap(), a);

        // Z2 x Z2 x Z, G1 = Z2 x 0 x 0, G2 = 0 x Z2 x 0.
        let g3 = AbelianGroup::new(vec![2, 2, 0]);
        let g1 = sub(&g3, &[&[1, 0, 0]]);
        let g2 = sub(&g3, &[&[0, 1, 0]]);
        let j = g1.join(&g2).unwrap();
        assert_eq!(j, sub(&g3, &[&[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(j.order().unwrap(), 4);
    }

    #[test]
    fn meet_examples() {
        let g = z2z2();
        let a = sub(&g, &[&[1, 0]]);
        let b = sub(&g, &[&[0, 1]]);
        assert_eq!(a.meet(&b).unwrap(), Subgroup::trivial(&g));
        assert_eq!(a.meet(&a).unwrap(), a);

        let g3 = AbelianGroup::new(vec![2, 2, 0]);
        let g1 = sub(&g3, &[&[1, 0, 0]]);
        let g2 = sub(&g3, &[&[0, 1, 0]]);
        assert_eq!(g1.meet(&g2).unwrap(), Subgroup::trivial(&g3));
    }

    #[test]
    fn coset_membership() {
        let g3 = AbelianGroup::new(vec![2, 2, 0]);
        let h = sub(&g3, &[&[1, 0, 0], &[0, 1, 0]]);
        let a = g3.element(&[0, 0, 1]);
        let b = g3.element(&[0, 0, 2]);
        assert!(!h.coset_equal(&a, &b), "(0,0,-1) is not in Z2 x Z2 x 0");
        assert!(h.coset_equal(&a, &a));
        let g = z2z2();
        let h = sub(&g, &[&[1, 0]]);
        assert!(h.coset_equal(&g.element(&[1, 0]), &g.element(&[0, 0])));
    }

    #[test]
    fn subgroup_equality_via_hnf() {
        let g = AbelianGroup::new(vec![4, 2]);
        let a = sub(&g, &[&[1, 0]]);
        let b = sub(&g, &[&[1, 0], &[2, 0]]);
        assert_eq!(a, b);
        let g22 = z2z2();
        assert_ne!(sub(&g22, &[&[1, 0]]), sub(&g22, &[&[0, 1]]));
    }

    #[test]
    fn product_of_orders_identity() {
        // |A.B| * |A meet B| = |A| * |B| on random subgroup pairs.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xABCD);
        for _ in 0..60 {
            let r = rng.gen_range(1..=4usize);
            let moduli: Vec<u64> = (0..r).map(|_| rng.gen_range(1..=6u64)).collect();
            let g = AbelianGroup::new(moduli);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let gens: Vec<GroupElement> = (0..rng.gen_range(0..=2))
                    .map(|_| {
                        let c: Vec<i64> =
                            (0..r).map(|_| rng.gen_range(0..12) as i64).collect();
                        g.element(&c)
                    })
                    .collect();
                Subgroup::from_generators(&g, &gens)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let join = a.join(&b).unwrap().order().unwrap();
            let meet = a.meet(&b).unwrap().order().unwrap();
            assert_eq!(
                join * meet,
                a.order().unwrap() * b.order().unwrap(),
                "|AB| |A^B| = |A||B|"
            );
        }
    }

    #[test]
    fn dual_basis_structure() {
        let g = AbelianGroup::new(vec![4, 2]);
        let whole = Subgroup::full(&g);
        let basis = whole.dual_basis().unwrap();
        assert_eq!(basis.orders, vec![4, 2]);
        assert_eq!(basis.exponent, 4);
        assert_eq!(basis.group_order(), 8);
    }

    #[test]
    fn characters_of_z2() {
        let g = AbelianGroup::new(vec![2]);
        let h = Subgroup::full(&g);
        let basis = h.dual_basis().unwrap();
        let chars = basis.characters();
        assert_eq!(chars.len(), 2);
        // Value matrix [[1,1],[1,-1]] as exponents of zeta_2.
        let e0 = g.identity();
        let e1 = g.element(&[1]);
        assert_eq!(basis.eval_exponent(&chars[0], &e0), 0);
        assert_eq!(basis.eval_exponent(&chars[0], &e1), 0);
        assert_eq!(basis.eval_exponent(&chars[1], &e0), 0);
        assert_eq!(basis.eval_exponent(&chars[1], &e1), 1);
    }

    #[test]
    fn characters_of_z2z2_match_brute_force() {
        use crate::scalars::{CyclotomicScalar, Scalar};
        let g = z2z2();
        let h = Subgroup::full(&g);
        let basis = h.dual_basis().unwrap();
        let chars = basis.characters();
        assert_eq!(chars.len(), 4);
        let elements = h.elements().unwrap();
        // Brute-force oracle: all maps gens -> {1,-1} that are homomorphisms.
        let one = CyclotomicScalar::one();
        let m1 = CyclotomicScalar::from_int(-1);
        let mut brute: Vec<Vec<CyclotomicScalar>> = Vec::new();
        for s1 in [&one, &m1] {
            for s2 in [&one, &m1] {
                let row: Vec<CyclotomicScalar> = elements
                    .iter()
                    .map(|e| {
                        let c = e.coords();
                        s1.pow(c[0] as u64).mul(&s2.pow(c[1] as u64))
                    })
                    .collect();
                brute.push(row);
            }
        }
        let mut ours: Vec<Vec<CyclotomicScalar>> = chars
            .iter()
            .map(|chi| {
                elements
                    .iter()
                    .map(|e| basis.eval::<CyclotomicScalar>(chi, e).unwrap())
                    .collect()
            })
            .collect();
        // Same set of rows.
        for row in &brute {
            let pos = ours.iter().position(|r| r == row);
            assert!(pos.is_some(), "brute-force character realized");
            ours.remove(pos.unwrap());
        }
        assert!(ours.is_empty());
        // Orthogonality of distinct sign rows.
        for i in 0..4 {
            for j in i + 1..4 {
                let dot = (0..4).fold(CyclotomicScalar::zero(), |acc, k| {
                    acc.add(&brute[i][k].mul(&brute[j][k]))
                });
                assert!(Scalar::is_zero(&dot));
            }
        }
    }

    #[test]
    fn character_evaluation_matrix_has_full_rank() {
        use crate::linalg;
        use crate::scalars::CyclotomicScalar;
        for moduli in [vec![2u64], vec![3], vec![2, 2], vec![4, 2], vec![6]] {
            let g = AbelianGroup::new(moduli);
            let h = Subgroup::full(&g);
            let basis = h.dual_basis().unwrap();
            let chars = basis.characters();
            let elements = h.elements().unwrap();
            let rows: Vec<Vec<CyclotomicScalar>> = chars
                .iter()
                .map(|chi| {
                    elements
                        .iter()
                        .map(|e| basis.eval::<CyclotomicScalar>(chi, e).unwrap())
                        .collect()
                })
                .collect();
            assert_eq!(linalg::rank(&rows, elements.len()), elements.len());
        }
    }

    #[test]
    fn extend_character_examples() {
        // H = 2Z_4 inside K = Z_4, chi(2) = -1: extension sends 1 to a
        // primitive 4th root.
        let g = AbelianGroup::new(vec![4]);
        let h = sub(&g, &[&[2]]);
        let k = Subgroup::full(&g);
        let hb = h.dual_basis().unwrap();
        let chi = Character { exps: vec![1] }; // chi(2) = zeta_2 = -1
        assert_eq!(hb.exponent, 2);
        let (kb, ext) = extend_character(&h, &k, &hb, &chi).unwrap();
        assert_eq!(kb.exponent, 4);
        let v = kb.eval_exponent(&ext, &g.element(&[1]));
        assert!(v == 1 || v == 3, "extension sends 1 to a primitive 4th root");
        assert_eq!(kb.restrict(&ext, &hb), chi);
        // Lexicographically minimal choice: exps [1] rather than [3].
        assert_eq!(ext.exps, vec![1]);

        // Trivial character extends to the trivial character.
        let triv = hb.trivial_character();
        let (_, ext) = extend_character(&h, &k, &hb, &triv).unwrap();
        assert_eq!(ext.exps, vec![0]);
    }

    #[test]
    fn extend_then_restrict_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let moduli: Vec<u64> = (0..rng.gen_range(1..=3usize))
                .map(|_| [2u64, 3, 4, 6][rng.gen_range(0..4)])
                .collect();
            let g = AbelianGroup::new(moduli);
            let r = g.rank();
            let kgens: Vec<GroupElement> = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let c: Vec<i64> = (0..r).map(|_| rng.gen_range(0..6) as i64).collect();
                    g.element(&c)
                })
                .collect();
            let k = Subgroup::from_generators(&g, &kgens);
            let k_elems = k.elements().unwrap();
            let hgens: Vec<GroupElement> = (0..rng.gen_range(0..=2))
                .map(|_| k_elems[rng.gen_range(0..k_elems.len())].clone())
                .collect();
            let h = Subgroup::from_generators(&g, &hgens);
            let hb = h.dual_basis().unwrap();
            let chars = hb.characters();
            let chi = chars[rng.gen_range(0..chars.len())].clone();
            let (kb, ext) = extend_character(&h, &k, &hb, &chi).unwrap();
            assert_eq!(kb.restrict(&ext, &hb), chi);
        }
    }

    #[test]
    fn table_group_verification() {
        // Z_3 as a table.
        let t = FiniteGroupTable::new(3, vec![0, 1, 2, 1, 2, 0, 2, 0, 1]).unwrap();
        assert_eq!(t.identity(), 0);
        assert!(t.is_abelian());
        assert_eq!(t.element_order(1), 3);
        // Broken associativity (a random non-group latin square).
        let bad = FiniteGroupTable::new(
            5,
            vec![
                0, 1, 2, 3, 4, //
                1, 0, 3, 4, 2, //
                2, 4, 0, 1, 3, //
                3, 2, 4, 0, 1, //
                4, 3, 1, 2, 0,
            ],
        );
        assert!(matches!(bad, Err(GroupError::BadTable(_))));
    }

    #[test]
    fn element_orders() {
        let g = AbelianGroup::new(vec![4, 0]);
        assert_eq!(g.element_order(&g.element(&[2, 0])), Some(2));
        assert_eq!(g.element_order(&g.element(&[1, 0])), Some(4));
        assert_eq!(g.element_order(&g.element(&[0, 3])), None);
    }
}
