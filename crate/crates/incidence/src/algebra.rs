//! The incidence algebra `I(X)` of a finite poset as an exact sparse matrix
//! algebra, group gradings on it, grading/radical verification, and the
//! idempotent toolkit (diagonalization, polynomial idempotent extraction).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::groups::{Degree, GradingGroup};
use crate::linalg::{kernel, Echelon};
use crate::poset::Poset;
use crate::scalars::{poly_crt_split, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("entry ({0}, {1}) is not a comparable pair of the poset")]
    SupportNotComparable(usize, usize),
    #[error("element is not invertible (zero diagonal entry at {0})")]
    NotInvertible(usize),
    #[error("element is not idempotent")]
    NotIdempotent,
    #[error("idempotents are not pairwise orthogonal (indices {0}, {1})")]
    NotOrthogonal(usize, usize),
    #[error("diagonal entry at {0} lies outside {{0, 1}}")]
    BadSpectrum(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Element of `I(X)`: a sparse map from comparable pairs to nonzero scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceElement<S: Scalar> {
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> IncidenceElement<S> {
    pub fn zero() -> Self {
        IncidenceElement {
            entries: BTreeMap::new(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), S> {
        &self.entries
    }

    pub fn get(&self, x: usize, y: usize) -> S {
        self.entries.get(&(x, y)).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    fn set(&mut self, x: usize, y: usize, v: S) {
        if v.is_zero() {
            self.entries.remove(&(x, y));
        } else {
            self.entries.insert((x, y), v);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&(x, y), v) in &rhs.entries {
            let w = out.get(x, y).add(v);
            out.set(x, y, w);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        IncidenceElement {
            entries: self.entries.iter().map(|(&k, v)| (k, v.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return IncidenceElement::zero();
        }
        IncidenceElement {
            entries: self.entries.iter().map(|(&k, v)| (k, v.mul(c))).collect(),
        }
    }

    /// Diagonal part, as a map position -> value.
    pub fn diagonal(&self) -> BTreeMap<usize, S> {
        self.entries
            .iter()
            .filter(|(&(x, y), _)| x == y)
            .map(|(&(x, _), v)| (x, v.clone()))
            .collect()
    }

    /// Strictly upper part.
    pub fn strict_part(&self) -> Self {
        IncidenceElement {
            entries: self
                .entries
                .iter()
                .filter(|(&(x, y), _)| x != y)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for IncidenceElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(x, y), v) in &self.entries {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if v.is_one() {
                write!(f, "e[{},{}]", x + 1, y + 1)?;
            } else {
                write!(f, "({})*e[{},{}]", v, x + 1, y + 1)?;
            }
        }
        Ok(())
    }
}

/// The incidence algebra context: the poset plus the fixed coordinate order
/// (comparable pairs, lexicographically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceAlgebra {
    poset: Poset,
    pairs: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
}

impl IncidenceAlgebra {
    pub fn new(poset: Poset) -> Self {
        let pairs = poset.comparable_pairs();
        let index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        IncidenceAlgebra {
            poset,
            pairs,
            index,
        }
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn n(&self) -> usize {
        self.poset.len()
    }

    /// `dim I(X)` = number of comparable pairs.
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, x: usize, y: usize) -> Option<usize> {
        self.index.get(&(x, y)).copied()
    }

    pub fn element<S: Scalar>(
        &self,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Result<IncidenceElement<S>, AlgebraError> {
        let mut e: IncidenceElement<S> = IncidenceElement::zero();
        for ((x, y), v) in entries {
            if x >= self.n() || y >= self.n() || !self.poset.leq(x, y) {
                return Err(AlgebraError::SupportNotComparable(x, y));
            }
            let w = e.get(x, y).add(&v);
            e.set(x, y, w);
        }
        Ok(e)
    }

    /// Matrix unit `e_{xy}` (0-based indices; requires `x <= y` in the poset).
    pub fn unit<S: Scalar>(&self, x: usize, y: usize) -> IncidenceElement<S> {
        assert!(self.poset.leq(x, y), "unit must sit on a comparable pair");
        let mut e = IncidenceElement::zero();
        e.set(x, y, S::one());
        e
    }

    pub fn identity<S: Scalar>(&self) -> IncidenceElement<S> {
        let mut e = IncidenceElement::zero();
        for i in 0..self.n() {
            e.set(i, i, S::one());
        }
        e
    }

    /// Diagonal 0/1 idempotent supported on `positions`.
    pub fn diagonal_idempotent<S: Scalar>(&self, positions: &[usize]) -> IncidenceElement<S> {
        let mut e = IncidenceElement::zero();
        for &i in positions {
            e.set(i, i, S::one());
        }
        e
    }

    /// Convolution product restricted to comparable pairs.
    pub fn mul<S: Scalar>(
        &self,
        a: &IncidenceElement<S>,
        b: &IncidenceElement<S>,
    ) -> IncidenceElement<S> {
        let mut out: IncidenceElement<S> = IncidenceElement::zero();
        for (&(x, z), u) in &a.entries {
            for (&(z2, y), v) in &b.entries {
                if z == z2 {
                    debug_assert!(self.poset.leq(x, y));
                    let w = out.get(x, y).add(&u.mul(v));
                    out.set(x, y, w);
                }
            }
        }
        out
    }

    pub fn pow<S: Scalar>(&self, a: &IncidenceElement<S>, k: usize) -> IncidenceElement<S> {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_invertible<S: Scalar>(&self, m: &IncidenceElement<S>) -> bool {
        (0..self.n()).all(|i| !m.get(i, i).is_zero())
    }

    /// Inverse of an invertible element via `M = D(1 + U)` with `U` strictly
    /// upper nilpotent: `M^{-1} = (sum of (-U)^k) D^{-1}`.
    pub fn inverse<S: Scalar>(
        &self,
        m: &IncidenceElement<S>,
    ) -> Result<IncidenceElement<S>, AlgebraError> {
        for i in 0..self.n() {
            if m.get(i, i).is_zero() {
                return Err(AlgebraError::NotInvertible(i));
            }
        }
        let mut d_inv = IncidenceElement::zero();
        for i in 0..self.n() {
            d_inv.set(i, i, m.get(i, i).inv()?);
        }
        let u = self.mul(&d_inv, m).sub(&self.identity());
        let mut acc = self.identity::<S>();
        let mut pow: IncidenceElement<S> = self.identity();
        for _ in 0..self.n() {
            pow = self.mul(&pow, &u).neg();
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(self.mul(&acc, &d_inv))
    }

    /// Conjugation `x -> M^{-1} x M`.
    pub fn conjugate<S: Scalar>(
        &self,
        x: &IncidenceElement<S>,
        m: &IncidenceElement<S>,
        m_inv: &IncidenceElement<S>,
    ) -> IncidenceElement<S> {
        self.mul(&self.mul(m_inv, x), m)
    }

    /// Transport along a relabeling `perm[old] = new` of the poset elements.
    pub fn relabel<S: Scalar>(
        &self,
        x: &IncidenceElement<S>,
        perm: &[usize],
    ) -> IncidenceElement<S> {
        IncidenceElement {
            entries: x
                .entries
                .iter()
                .map(|(&(a, b), v)| ((perm[a], perm[b]), v.clone()))
                .collect(),
        }
    }

    /// Basis of the Jacobson radical: matrix units on strict pairs.
    pub fn jacobson_radical_basis<S: Scalar>(&self) -> Vec<IncidenceElement<S>> {
        self.pairs
            .iter()
            .filter(|&&(x, y)| x != y)
            .map(|&(x, y)| self.unit(x, y))
            .collect()
    }

    pub fn to_vec<S: Scalar>(&self, e: &IncidenceElement<S>) -> Vec<S> {
        let mut v = vec![S::zero(); self.pairs.len()];
        for (&(x, y), val) in &e.entries {
            v[self.index[&(x, y)]] = val.clone();
        }
        v
    }

    pub fn from_vec<S: Scalar>(&self, v: &[S]) -> IncidenceElement<S> {
        let mut e = IncidenceElement::zero();
        for (i, val) in v.iter().enumerate() {
            if !val.is_zero() {
                let (x, y) = self.pairs[i];
                e.set(x, y, val.clone());
            }
        }
        e
    }

    pub fn span<'a, S: Scalar + 'a>(
        &self,
        elems: impl IntoIterator<Item = &'a IncidenceElement<S>>,
    ) -> Echelon<S> {
        Echelon::from_vectors(self.dim(), elems.into_iter().map(|e| self.to_vec(e)))
    }

    /// Diagonal support when the element is a diagonal 0/1 idempotent.
    pub fn diagonal_support<S: Scalar>(&self, e: &IncidenceElement<S>) -> Option<Vec<usize>> {
        let mut supp = Vec::new();
        for (&(x, y), v) in &e.entries {
            if x != y || !v.is_one() {
                return None;
            }
            supp.push(x);
        }
        Some(supp)
    }

    /// Lemma-style diagonalizer: columns `f_i = e e_i` or `e_i - e e_i`,
    /// whichever is nonzero at `(i, i)`; `M^{-1} e M` is diagonal 0/1.
    pub fn diagonalize_idempotent<S: Scalar>(
        &self,
        e: &IncidenceElement<S>,
    ) -> Result<IncidenceElement<S>, AlgebraError> {
        if self.mul(e, e) != *e {
            return Err(AlgebraError::NotIdempotent);
        }
        let mut m = IncidenceElement::zero();
        for i in 0..self.n() {
            let dii = e.get(i, i);
            if dii.is_one() {
                // f_i = e * e_i: column i of e.
                for x in 0..=i {
                    let v = e.get(x, i);
                    if !v.is_zero() {
                        m.set(x, i, v);
                    }
                }
            } else if dii.is_zero() {
                // f_i = e_i - e * e_i.
                m.set(i, i, S::one());
                for x in 0..i {
                    let v = e.get(x, i);
                    if !v.is_zero() {
                        m.set(x, i, v.neg());
                    }
                }
            } else {
                return Err(AlgebraError::BadSpectrum(i));
            }
        }
        Ok(m)
    }

    /// Single conjugator diagonalizing a family of pairwise orthogonal
    /// idempotents, by the inductive column replacement.
    pub fn simultaneous_diagonalize<S: Scalar>(
        &self,
        es: &[IncidenceElement<S>],
    ) -> Result<IncidenceElement<S>, AlgebraError> {
        for (i, a) in es.iter().enumerate() {
            if self.mul(a, a) != *a {
                return Err(AlgebraError::NotIdempotent);
            }
            for (j, b) in es.iter().enumerate() {
                if i != j && !self.mul(a, b).is_zero() {
                    return Err(AlgebraError::NotOrthogonal(i, j));
                }
            }
        }
        let mut m_total = self.identity::<S>();
        let mut m_total_inv = self.identity::<S>();
        for e in es {
            let cur = self.conjugate(e, &m_total, &m_total_inv);
            let m = self.diagonalize_idempotent(&cur)?;
            let m_inv = self.inverse(&m)?;
            m_total = self.mul(&m_total, &m);
            m_total_inv = self.mul(&m_inv, &m_total_inv);
        }
        Ok(m_total)
    }

    /// Extracts an idempotent from `x = e + b` with 0/1 diagonal `e != 0` and
    /// strictly upper `b`, as `p(x)` for the CRT-split polynomial `p`; the
    /// result lies in `Span{x, x^2, ...}` and keeps the diagonal of `e`.
    pub fn idempotent_from<S: Scalar>(
        &self,
        x: &IncidenceElement<S>,
    ) -> Result<IncidenceElement<S>, AlgebraError> {
        let mut nonzero_diag = false;
        for i in 0..self.n() {
            let d = x.get(i, i);
            if d.is_one() {
                nonzero_diag = true;
            } else if !d.is_zero() {
                return Err(AlgebraError::BadSpectrum(i));
            }
        }
        if !nonzero_diag {
            return Err(AlgebraError::BadSpectrum(0));
        }
        if self.mul(x, x) == *x {
            return Ok(x.clone());
        }
        let p = poly_crt_split(self.n());
        // Horner evaluation; p(0) = 0 keeps the result in Span{x, x^2, ...}.
        let mut acc: IncidenceElement<S> = IncidenceElement::zero();
        for c in p.coeffs().iter().rev() {
            acc = self.mul(&acc, x);
            let c = S::from_rational(c)?;
            if !c.is_zero() {
                let mut diag = IncidenceElement::zero();
                for i in 0..self.n() {
                    diag.set(i, i, c.clone());
                }
                acc = acc.add(&diag);
            }
        }
        debug_assert!(self.mul(&acc, &acc) == acc);
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// Gradings
// ---------------------------------------------------------------------------

/// Group-indexed decomposition of `I(X)`: each degree carries a list of
/// homogeneous basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Grading<S: Scalar> {
    pub group: GradingGroup,
    pub components: BTreeMap<Degree, Vec<IncidenceElement<S>>>,
}

/// A homogeneous element with its degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedElement<S: Scalar> {
    pub element: IncidenceElement<S>,
    pub degree: Degree,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GradingViolation {
    /// Component vectors fail to be a basis of `I(X)`.
    NotDirectSum {
        expected_dim: usize,
        vector_count: usize,
        rank: usize,
    },
    /// `A_g A_h` escapes `A_{gh}`: witness basis-vector pair.
    ProductEscapes {
        g: Degree,
        h: Degree,
        i: usize,
        j: usize,
    },
}

impl fmt::Display for GradingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradingViolation::NotDirectSum {
                expected_dim,
                vector_count,
                rank,
            } => write!(
                f,
                "components do not decompose I(X): dim {expected_dim}, {vector_count} vectors of rank {rank}"
            ),
            GradingViolation::ProductEscapes { g, h, i, j } => write!(
                f,
                "product of vector {i} of degree {g} with vector {j} of degree {h} leaves its component"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradingReport {
    pub violations: Vec<GradingViolation>,
}

impl GradingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&GradingViolation> {
        self.violations.first()
    }
}

impl<S: Scalar> Grading<S> {
    pub fn new(group: GradingGroup) -> Self {
        Grading {
            group,
            components: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, degree: Degree, element: IncidenceElement<S>) {
        self.components.entry(degree).or_default().push(element);
    }

    pub fn component(&self, degree: &Degree) -> &[IncidenceElement<S>] {
        self.components.get(degree).map_or(&[], |v| v.as_slice())
    }

    pub fn degrees(&self) -> impl Iterator<Item = &Degree> {
        self.components.keys()
    }

    pub fn total_vectors(&self) -> usize {
        self.components.values().map(Vec::len).sum()
    }

    /// Degree of an element that lies in a single component, if any.
    pub fn degree_of(&self, alg: &IncidenceAlgebra, e: &IncidenceElement<S>) -> Option<Degree> {
        for (g, basis) in &self.components {
            let span = alg.span(basis.iter());
            if span.contains(&alg.to_vec(e)) {
                return Some(g.clone());
            }
        }
        None
    }

    /// The trivial grading: everything in the identity degree.
    pub fn trivial(alg: &IncidenceAlgebra, group: GradingGroup) -> Self {
        let mut grading = Grading::new(group);
        let id = grading.group.identity();
        for &(x, y) in alg.pairs() {
            grading.push(id.clone(), alg.unit(x, y));
        }
        grading
    }
}

/// Checks the grading axioms: the components form a direct-sum decomposition
/// of `I(X)` and `A_g A_h` lies in the span of `A_{gh}` for every basis pair.
/// Returns a structured report rather than aborting.
pub fn verify_grading<S: Scalar>(alg: &IncidenceAlgebra, grading: &Grading<S>) -> GradingReport {
    let mut violations = Vec::new();
    let all = alg.span(grading.components.values().flatten());
    let count = grading.total_vectors();
    if all.rank() != alg.dim() || count != alg.dim() {
        violations.push(GradingViolation::NotDirectSum {
            expected_dim: alg.dim(),
            vector_count: count,
            rank: all.rank(),
        });
    }
    let spans: BTreeMap<&Degree, Echelon<S>> = grading
        .components
        .iter()
        .map(|(g, basis)| (g, alg.span(basis.iter())))
        .collect();
    'outer: for (g, gb) in &grading.components {
        for (h, hb) in &grading.components {
            let gh = grading.group.mul(g, h);
            for (i, u) in gb.iter().enumerate() {
                for (j, v) in hb.iter().enumerate() {
                    let prod = alg.mul(u, v);
                    if prod.is_zero() {
                        continue;
                    }
                    let ok = spans
                        .get(&gh)
                        .map_or(false, |span| span.contains(&alg.to_vec(&prod)));
                    if !ok {
                        violations.push(GradingViolation::ProductEscapes {
                            g: g.clone(),
                            h: h.clone(),
                            i,
                            j,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    GradingReport { violations }
}

/// Checks that the Jacobson radical is graded, i.e. equals the sum of the
/// per-degree intersections of components with `J`; returns a homogeneous
/// basis of `J` on success.
pub fn verify_radical_graded<S: Scalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
) -> (bool, Vec<GradedElement<S>>) {
    let radical_dim = alg.dim() - alg.n();
    let mut basis = Vec::new();
    for (g, comp) in &grading.components {
        for v in component_radical_intersection(alg, comp) {
            basis.push(GradedElement {
                element: v,
                degree: g.clone(),
            });
        }
    }
    (basis.len() == radical_dim, basis)
}

/// Basis of the kernel of the diagonal projection restricted to the span of
/// `comp`, i.e. of the intersection with `J`.
pub fn component_radical_intersection<S: Scalar>(
    alg: &IncidenceAlgebra,
    comp: &[IncidenceElement<S>],
) -> Vec<IncidenceElement<S>> {
    if comp.is_empty() {
        return vec![];
    }
    let rows: Vec<Vec<S>> = (0..alg.n())
        .map(|d| comp.iter().map(|e| e.get(d, d)).collect())
        .collect();
    kernel(&rows, comp.len())
        .into_iter()
        .map(|c| {
            let mut acc = IncidenceElement::zero();
            for (coef, e) in c.iter().zip(comp) {
                acc = acc.add(&e.scale(coef));
            }
            acc
        })
        .filter(|e| !e.is_zero())
        .collect()
}

/// Transports the grading along `x -> M^{-1} x M`.
pub fn conjugate_grading<S: Scalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
    m: &IncidenceElement<S>,
) -> Result<Grading<S>, AlgebraError> {
    let m_inv = alg.inverse(m)?;
    let mut out = Grading::new(grading.group.clone());
    for (g, basis) in &grading.components {
        for e in basis {
            out.push(g.clone(), alg.conjugate(e, m, &m_inv));
        }
    }
    Ok(out)
}

/// Transports the grading along a relabeling of the poset elements.
pub fn relabel_grading<S: Scalar>(
    alg: &IncidenceAlgebra,
    grading: &Grading<S>,
    perm: &[usize],
) -> Grading<S> {
    let mut out = Grading::new(grading.group.clone());
    for (g, basis) in &grading.components {
        for e in basis {
            out.push(g.clone(), alg.relabel(e, perm));
        }
    }
    out
}
