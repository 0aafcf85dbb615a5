//! Finite posets with a fixed linear-extension labeling, Hasse diagrams, and
//! automorphism/isomorphism search. The labeling invariant (`x <= y` in the
//! poset implies `x <= y` as integers) keeps every incidence-algebra matrix
//! upper triangular.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("cover relations contain a cycle")]
    CycleDetected,
    #[error("cover pair ({0}, {1}) is out of range")]
    IndexOutOfRange(usize, usize),
    #[error("search budget of {0} nodes exhausted")]
    SearchBudgetExceeded(u64),
}

/// Finite poset on `{0, .., n-1}` whose labeling is a linear extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    leq: Vec<bool>,
}

/// Hasse edges: `(x, y)` with `y` covering `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverRelation {
    pub pairs: Vec<(usize, usize)>,
}

impl Poset {
    /// Builds a poset from cover pairs (0-based), computes the
    /// transitive-reflexive closure, rejects cycles, and relabels along the
    /// lexicographically smallest linear extension. Returns the poset and the
    /// permutation `perm` with `perm[old] = new`.
    pub fn from_covers(
        n: usize,
        covers: &[(usize, usize)],
    ) -> Result<(Poset, Vec<usize>), PosetError> {
        for &(a, b) in covers {
            if a >= n || b >= n || a == b {
                return Err(PosetError::IndexOutOfRange(a, b));
            }
        }
        // Lexicographically smallest linear extension via greedy Kahn.
        let mut indeg = vec![0usize; n];
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in covers {
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut avail: std::collections::BTreeSet<usize> =
            (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = avail.iter().next() {
            avail.remove(&v);
            order.push(v);
            for &w in &adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    avail.insert(w);
                }
            }
        }
        if order.len() != n {
            return Err(PosetError::CycleDetected);
        }
        let mut perm = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        // Closure on relabeled vertices.
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in covers {
            leq[perm[a] * n + perm[b]] = true;
        }
        // Labels follow a linear extension, so a forward scan closes paths.
        for x in (0..n).rev() {
            for y in x + 1..n {
                if leq[x * n + y] {
                    for z in y + 1..n {
                        if leq[y * n + z] {
                            leq[x * n + z] = true;
                        }
                    }
                }
            }
        }
        Ok((Poset { n, leq }, perm))
    }

    /// Builds a poset from a full relation matrix without relabeling; the
    /// given labeling must already be a linear extension. Validates
    /// reflexivity, antisymmetry, transitivity and the labeling invariant.
    pub fn from_relation(n: usize, leq: Vec<bool>) -> Result<Poset, PosetError> {
        assert_eq!(leq.len(), n * n);
        for x in 0..n {
            if !leq[x * n + x] {
                return Err(PosetError::IndexOutOfRange(x, x));
            }
            for y in 0..n {
                if x != y && leq[x * n + y] {
                    if leq[y * n + x] || y < x {
                        return Err(PosetError::CycleDetected);
                    }
                    for z in 0..n {
                        if leq[y * n + z] && !leq[x * n + z] {
                            return Err(PosetError::CycleDetected);
                        }
                    }
                }
            }
        }
        Ok(Poset { n, leq })
    }

    pub fn chain(n: usize) -> Poset {
        let covers: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Poset::from_covers(n, &covers).expect("chains are acyclic").0
    }

    pub fn antichain(n: usize) -> Poset {
        Poset::from_covers(n, &[]).expect("antichains are acyclic").0
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// Comparable pairs `(x, y)` with `x <= y`, in lexicographic order.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in x..self.n {
                if self.leq(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn covers(&self) -> CoverRelation {
        let mut pairs = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if self.lt(x, y)
                    && !(x + 1..y).any(|z| self.lt(x, z) && self.lt(z, y))
                {
                    pairs.push((x, y));
                }
            }
        }
        CoverRelation { pairs }
    }

    /// Per-element invariant used to prune the search: (down-set size, up-set
    /// size, cover in/out degrees).
    fn refinement_key(&self, x: usize) -> (usize, usize, usize, usize) {
        let down = (0..self.n).filter(|&z| self.leq(z, x)).count();
        let up = (0..self.n).filter(|&z| self.leq(x, z)).count();
        let covers = self.covers();
        let indeg = covers.pairs.iter().filter(|&&(_, b)| b == x).count();
        let outdeg = covers.pairs.iter().filter(|&&(a, _)| a == x).count();
        (down, up, indeg, outdeg)
    }

    /// All order-preserving bijections of the poset onto itself.
    pub fn automorphisms(&self, budget: u64) -> Result<Vec<Vec<usize>>, PosetError> {
        self.isomorphisms_impl(self, budget, false)
    }

    /// Some isomorphism onto `other`, if one exists.
    pub fn isomorphism(&self, other: &Poset, budget: u64) -> Result<Option<Vec<usize>>, PosetError> {
        Ok(self.isomorphisms_impl(other, budget, true)?.into_iter().next())
    }

    /// All isomorphisms onto `other`.
    pub fn isomorphisms(&self, other: &Poset, budget: u64) -> Result<Vec<Vec<usize>>, PosetError> {
        self.isomorphisms_impl(other, budget, false)
    }

    fn isomorphisms_impl(
        &self,
        other: &Poset,
        budget: u64,
        first_only: bool,
    ) -> Result<Vec<Vec<usize>>, PosetError> {
        if self.n != other.n {
            return Ok(vec![]);
        }
        let keys_a: Vec<_> = (0..self.n).map(|x| self.refinement_key(x)).collect();
        let keys_b: Vec<_> = (0..other.n).map(|x| other.refinement_key(x)).collect();
        {
            let mut ka = keys_a.clone();
            let mut kb = keys_b.clone();
            ka.sort_unstable();
            kb.sort_unstable();
            if ka != kb {
                return Ok(vec![]);
            }
        }
        let mut map = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        let mut found = Vec::new();
        let mut nodes = 0u64;

        fn consistent(p: &Poset, q: &Poset, map: &[usize], x: usize, y: usize) -> bool {
            for z in 0..p.len() {
                if map[z] != usize::MAX && z != x {
                    if p.leq(z, x) != q.leq(map[z], y) || p.leq(x, z) != q.leq(y, map[z]) {
                        return false;
                    }
                }
            }
            true
        }

        fn search(
            p: &Poset,
            q: &Poset,
            keys_a: &[(usize, usize, usize, usize)],
            keys_b: &[(usize, usize, usize, usize)],
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
            x: usize,
            found: &mut Vec<Vec<usize>>,
            nodes: &mut u64,
            budget: u64,
            first_only: bool,
        ) -> Result<(), PosetError> {
            if x == p.len() {
                found.push(map.clone());
                return Ok(());
            }
            for y in 0..q.len() {
                if used[y] || keys_a[x] != keys_b[y] {
                    continue;
                }
                *nodes += 1;
                if *nodes > budget {
                    return Err(PosetError::SearchBudgetExceeded(budget));
                }
                if consistent(p, q, map, x, y) {
                    map[x] = y;
                    used[y] = true;
                    search(
                        p, q, keys_a, keys_b, map, used, x + 1, found, nodes, budget, first_only,
                    )?;
                    map[x] = usize::MAX;
                    used[y] = false;
                    if first_only && !found.is_empty() {
                        return Ok(());
                    }
                }
            }
            Ok(())
        }

        search(
            self, other, &keys_a, &keys_b, &mut map, &mut used, 0, &mut found, &mut nodes,
            budget, first_only,
        )?;
        Ok(found)
    }

    /// DOT rendering of the Hasse diagram, edges bottom-to-top, 1-based labels.
    pub fn dot_export(&self, labels: Option<&[String]>) -> String {
        let mut out = String::new();
        out.push_str("digraph poset {\n  rankdir=BT;\n");
        for x in 0..self.n {
            let label = labels
                .and_then(|ls| ls.get(x).cloned())
                .unwrap_or_else(|| format!("{}", x + 1));
            let _ = writeln!(out, "  n{} [label=\"{}\"];", x + 1, label);
        }
        for (a, b) in self.covers().pairs {
            let _ = writeln!(out, "  n{} -> n{};", a + 1, b + 1);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ex1_poset() -> Poset {
        Poset::from_covers(3, &[(0, 1), (0, 2)]).unwrap().0
    }

    #[test]
    fn from_covers_examples() {
        let p = ex1_poset();
        assert!(p.leq(0, 1) && p.leq(0, 2) && !p.leq(1, 2) && !p.leq(2, 1));

        let anti = Poset::antichain(4);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(anti.leq(x, y), x == y);
            }
        }

        // Reversed chain input relabels to a forward chain.
        let (p, perm) = Poset::from_covers(2, &[(1, 0)]).unwrap();
        assert_eq!(p.covers().pairs, vec![(0, 1)]);
        assert_eq!(perm, vec![1, 0]);

        assert_eq!(
            Poset::from_covers(2, &[(0, 1), (1, 0)]),
            Err(PosetError::CycleDetected)
        );
        assert!(matches!(
            Poset::from_covers(2, &[(0, 5)]),
            Err(PosetError::IndexOutOfRange(0, 5))
        ));
    }

    #[test]
    fn transitive_closure() {
        let p = Poset::chain(4);
        assert!(p.leq(0, 3));
        assert_eq!(p.covers().pairs, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(p.comparable_pairs().len(), 10);
    }

    #[test]
    fn covers_of_ex1() {
        assert_eq!(ex1_poset().covers().pairs, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn automorphisms_examples() {
        let chain = Poset::chain(5);
        assert_eq!(chain.automorphisms(1 << 20).unwrap().len(), 1);

        let anti = Poset::antichain(4);
        assert_eq!(anti.automorphisms(1 << 20).unwrap().len(), 24);

        let auts = ex1_poset().automorphisms(1 << 20).unwrap();
        assert_eq!(auts.len(), 2);
        assert!(auts.contains(&vec![0, 1, 2]));
        assert!(auts.contains(&vec![0, 2, 1]));
    }

    #[test]
    fn automorphisms_form_a_group() {
        let (p, _) = Poset::from_covers(6, &[(0, 2), (1, 2), (0, 3), (1, 3), (2, 4), (3, 5)]).unwrap();
        let auts = p.automorphisms(1 << 20).unwrap();
        let compose = |f: &Vec<usize>, g: &Vec<usize>| -> Vec<usize> {
            (0..p.len()).map(|x| f[g[x]]).collect()
        };
        for f in &auts {
            for g in &auts {
                assert!(auts.contains(&compose(f, g)));
            }
            let mut inv = vec![0; p.len()];
            for (x, &y) in f.iter().enumerate() {
                inv[y] = x;
            }
            assert!(auts.contains(&inv));
        }
    }

    #[test]
    fn isomorphism_examples() {
        let c = Poset::chain(3);
        assert_eq!(c.isomorphism(&c, 1 << 20).unwrap(), Some(vec![0, 1, 2]));
        assert_eq!(c.isomorphism(&Poset::antichain(3), 1 << 20).unwrap(), None);

        // Diamond vs itself with swapped middle layer.
        let d1 = Poset::from_covers(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap().0;
        let d2 = Poset::from_covers(4, &[(0, 2), (0, 1), (2, 3), (1, 3)]).unwrap().0;
        assert!(d1.isomorphism(&d2, 1 << 20).unwrap().is_some());
        assert_eq!(d1.isomorphisms(&d2, 1 << 20).unwrap().len(), 2);
    }

    /// All labeled posets on n elements whose labeling is a linear extension,
    /// generated by brute force over strict-upper relation sets.
    fn all_posets(n: usize) -> Vec<Poset> {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .collect();
        let mut out = Vec::new();
        'outer: for mask in 0..(1u32 << pairs.len()) {
            let mut leq = vec![false; n * n];
            for i in 0..n {
                leq[i * n + i] = true;
            }
            for (k, &(x, y)) in pairs.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    leq[x * n + y] = true;
                }
            }
            // Keep only transitive relations.
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if leq[x * n + y] && leq[y * n + z] && !leq[x * n + z] {
                            continue 'outer;
                        }
                    }
                }
            }
            out.push(Poset { n, leq });
        }
        out
    }

    fn brute_force_iso(p: &Poset, q: &Poset) -> bool {
        if p.len() != q.len() {
            return false;
        }
        let n = p.len();
        let mut perm: Vec<usize> = (0..n).collect();
        // Heap's algorithm over all permutations.
        fn permutations(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == 1 {
                out.push(perm.clone());
                return;
            }
            for i in 0..k {
                permutations(k - 1, perm, out);
                if k % 2 == 0 {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
            }
        }
        let mut perms = Vec::new();
        permutations(n, &mut perm, &mut perms);
        perms.iter().any(|f| {
            (0..n).all(|x| (0..n).all(|y| p.leq(x, y) == q.leq(f[x], f[y])))
        })
    }

    #[test]
    fn isomorphism_agrees_with_brute_force_small() {
        for n in 1..=4usize {
            let posets = all_posets(n);
            for (i, p) in posets.iter().enumerate() {
                for q in posets.iter().skip(i) {
                    let fast = p.isomorphism(q, 1 << 22).unwrap().is_some();
                    assert_eq!(fast, brute_force_iso(p, q), "n={n}");
                }
            }
        }
    }

    #[test]
    fn isomorphism_agrees_with_brute_force_sampled() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for n in [5usize, 6] {
            let posets = all_posets(n);
            for _ in 0..40 {
                let p = posets.choose(&mut rng).unwrap();
                let q = posets.choose(&mut rng).unwrap();
                let fast = p.isomorphism(q, 1 << 22).unwrap().is_some();
                assert_eq!(fast, brute_force_iso(p, q), "n={n}");
            }
        }
    }

    #[test]
    fn dot_export_shapes() {
        let two = Poset::antichain(2).dot_export(None);
        assert_eq!(two.matches("->").count(), 0);
        assert_eq!(two.matches("label").count(), 2);

        let ex1 = ex1_poset().dot_export(None);
        assert_eq!(ex1.matches("->").count(), 2);
        assert_eq!(ex1.matches("label").count(), 3);
    }
}
