//! Shared helpers for the integration and acceptance suites: fixture
//! loading and randomized instance generation.

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use incidence::algebra::{Grading, IncidenceAlgebra, IncidenceElement};
use incidence::format;
use incidence::groups::{AbelianGroup, Degree, GradingGroup, GroupElement, Subgroup};
use incidence::poset::Poset;
use incidence::scalars::{rat, CyclotomicScalar};

pub type Cyc = CyclotomicScalar;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_fixture(stem: &str) -> (IncidenceAlgebra, Grading<Cyc>) {
    let ptext = std::fs::read_to_string(fixture_path(&format!("{stem}.poset"))).unwrap();
    let (poset, perm) = format::parse_poset(&ptext).unwrap();
    let alg = IncidenceAlgebra::new(poset);
    let gtext = std::fs::read_to_string(fixture_path(&format!("{stem}.grading"))).unwrap();
    let grading = format::parse_grading(&gtext, &alg, &perm).unwrap();
    (alg, grading)
}

/// Random poset on up to `max_n` points, labels already a linear extension.
pub fn random_poset(rng: &mut ChaCha8Rng, max_n: usize) -> Poset {
    let n = rng.gen_range(2..=max_n);
    let mut covers = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(0.3) {
                covers.push((x, y));
            }
        }
    }
    Poset::from_covers(n, &covers).unwrap().0
}

/// Random elementary grading: degrees `deg e_xy = g_x - g_y` for a random
/// point sequence; always path-consistent.
pub fn random_elementary_grading(
    alg: &IncidenceAlgebra,
    group: &AbelianGroup,
    rng: &mut ChaCha8Rng,
) -> Grading<Cyc> {
    let elements = group.elements().expect("finite group");
    let points: Vec<GroupElement> = (0..alg.n())
        .map(|_| elements[rng.gen_range(0..elements.len())].clone())
        .collect();
    let mut grading = Grading::new(GradingGroup::Abelian(group.clone()));
    for &(x, y) in alg.pairs() {
        let d = group.sub(&points[x], &points[y]);
        grading.push(Degree::Abelian(d), alg.unit(x, y));
    }
    grading
}

/// Random invertible element: nonzero small diagonal, sparse strict part.
pub fn random_invertible(alg: &IncidenceAlgebra, rng: &mut ChaCha8Rng) -> IncidenceElement<Cyc> {
    let diag_choices = [1i64, -1, 2, 3, -2];
    let mut entries = Vec::new();
    for &(x, y) in alg.pairs() {
        if x == y {
            let v = diag_choices[rng.gen_range(0..diag_choices.len())];
            entries.push(((x, y), Cyc::from_rational_value(rat(v, 1))));
        } else if rng.gen_bool(0.5) {
            let num = rng.gen_range(-2..=2i64);
            if num != 0 {
                entries.push(((x, y), Cyc::from_rational_value(rat(num, 1))));
            }
        }
    }
    alg.element(entries).unwrap()
}

/// All subgroups of Z4 x Z2, by brute-force closure of generator subsets.
pub fn subgroups_of_z4z2() -> (AbelianGroup, Vec<Subgroup>) {
    let g = AbelianGroup::new(vec![4, 2]);
    let elements = g.elements().unwrap();
    let mut subs: Vec<Subgroup> = Vec::new();
    for a in &elements {
        for b in &elements {
            let s = Subgroup::from_generators(&g, &[a.clone(), b.clone()]);
            if !subs.contains(&s) {
                subs.push(s);
            }
        }
    }
    (g, subs)
}

/// Cover-degree sequence of a good grading on a chain.
pub fn chain_cover_degrees(alg: &IncidenceAlgebra, grading: &Grading<Cyc>) -> Vec<Degree> {
    (0..alg.n() - 1)
        .map(|x| {
            grading
                .degree_of(alg, &alg.unit::<Cyc>(x, x + 1))
                .expect("cover units are homogeneous in a good grading")
        })
        .collect()
}
