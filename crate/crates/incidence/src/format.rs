//! Text formats: `.poset` and `.grading` files, realization specs, and the
//! deterministic line-oriented reports consumed by the CLI.
//!
//! Scalar literals are integers, fractions `a/b`, and `z^k`, where `z` is
//! the primitive root of unity for the file-declared conductor; `e[x,y]`
//! denotes a matrix unit in the file's (1-based) labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_integer::Integer;
use thiserror::Error;

use crate::algebra::{Grading, IncidenceAlgebra, IncidenceElement};
use crate::bimodule::BimoduleDecomposition;
use crate::canonical::CanonicalForm;
use crate::groups::{
    AbelianGroup, Character, Degree, FiniteGroupTable, GradingGroup, GroupElement, Subgroup,
};
use crate::poset::Poset;
use crate::scalars::{rat_int, CyclotomicScalar, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

// ---------------------------------------------------------------------------
// Posets
// ---------------------------------------------------------------------------

/// Parses the `.poset` format: `n=<int>` then `covers= (a,b); (c,d); ...`.
/// Returns the poset and the relabeling permutation applied to reach a
/// linear extension (`perm[file_label - 1] = internal index`).
pub fn parse_poset(text: &str) -> Result<(Poset, Vec<usize>), ParseError> {
    let mut n: Option<usize> = None;
    let mut covers: Vec<(usize, usize)> = Vec::new();
    let mut covers_seen = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.split("//").next().unwrap().trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix("n=") {
            n = Some(rest.trim().parse::<usize>().map_err(|e| ParseError {
                line,
                msg: format!("bad element count: {e}"),
            })?);
        } else if let Some(rest) = s.strip_prefix("covers=") {
            covers_seen = true;
            for part in rest.split(';') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let inner = part
                    .strip_prefix('(')
                    .and_then(|p| p.strip_suffix(')'))
                    .ok_or_else(|| ParseError {
                        line,
                        msg: format!("expected (a,b), found {part}"),
                    })?;
                let mut it = inner.split(',');
                let a: usize = it
                    .next()
                    .and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| ParseError {
                        line,
                        msg: "bad cover pair".into(),
                    })?;
                let b: usize = it
                    .next()
                    .and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| ParseError {
                        line,
                        msg: "bad cover pair".into(),
                    })?;
                if a == 0 || b == 0 {
                    return err(line, "poset elements are 1-based");
                }
                covers.push((a - 1, b - 1));
            }
        } else {
            return err(line, format!("unrecognized poset line: {s}"));
        }
    }
    let Some(n) = n else {
        return err(0, "missing n= line");
    };
    if !covers_seen {
        return err(0, "missing covers= line");
    }
    Poset::from_covers(n, &covers).map_err(|e| ParseError {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_poset(poset: &Poset) -> String {
    let covers = poset.covers().pairs;
    let mut out = format!("n={}\n", poset.len());
    out.push_str("covers=");
    for (k, (a, b)) in covers.iter().enumerate() {
        if k > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "({},{})", a + 1, b + 1);
    }
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Groups
// ---------------------------------------------------------------------------

/// Parses `Z2 x Z2 x Z` style abelian group declarations.
pub fn parse_abelian_group(spec: &str) -> Result<AbelianGroup, ParseError> {
    let mut moduli = Vec::new();
    for tok in spec.split('x') {
        let tok = tok.trim();
        if tok == "Z" {
            moduli.push(0);
        } else if let Some(d) = tok.strip_prefix('Z') {
            let d: u64 = d.parse().map_err(|_| ParseError {
                line: 0,
                msg: format!("bad cyclic factor {tok}"),
            })?;
            if d == 0 {
                return err(0, "use plain Z for an infinite factor");
            }
            moduli.push(d);
        } else {
            return err(0, format!("bad group factor {tok}"));
        }
    }
    Ok(AbelianGroup::new(moduli))
}

pub fn write_abelian_group(group: &AbelianGroup) -> String {
    group
        .moduli()
        .iter()
        .map(|&d| {
            if d == 0 {
                "Z".to_string()
            } else {
                format!("Z{d}")
            }
        })
        .collect::<Vec<_>>()
        .join(" x ")
}

/// Parses either an abelian `group=` spec or a `group-table: n; entries`.
pub fn parse_grading_group(s: &str, line: usize) -> Result<GradingGroup, ParseError> {
    if let Some(rest) = s.strip_prefix("group-table:") {
        let mut parts = rest.splitn(2, ';');
        let n: usize = parts
            .next()
            .and_then(|x| x.trim().parse().ok())
            .ok_or_else(|| ParseError {
                line,
                msg: "bad table order".into(),
            })?;
        let entries: Vec<usize> = parts
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|x| x.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| ParseError {
                line,
                msg: format!("bad table entry: {e}"),
            })?;
        let table = FiniteGroupTable::new(n, entries).map_err(|e| ParseError {
            line,
            msg: e.to_string(),
        })?;
        Ok(GradingGroup::Table(table))
    } else {
        Ok(GradingGroup::Abelian(parse_abelian_group(s)?))
    }
}

/// Parses `(a,b,...)` abelian degrees and `#k` table degrees.
pub fn parse_degree(s: &str, group: &GradingGroup, line: usize) -> Result<Degree, ParseError> {
    let s = s.trim();
    if let Some(idx) = s.strip_prefix('#') {
        let k: usize = idx.parse().map_err(|_| ParseError {
            line,
            msg: format!("bad table degree {s}"),
        })?;
        match group {
            GradingGroup::Table(t) if k < t.order() => Ok(Degree::Table(k)),
            GradingGroup::Table(_) => err(line, format!("degree index {k} out of range")),
            GradingGroup::Abelian(_) => err(line, "table degree used with an abelian group"),
        }
    } else {
        let inner = s
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| ParseError {
                line,
                msg: format!("expected (c1,c2,...), found {s}"),
            })?;
        let coords: Vec<i64> = if inner.trim().is_empty() {
            vec![]
        } else {
            inner
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ParseError {
                    line,
                    msg: format!("bad coordinate: {e}"),
                })?
        };
        match group {
            GradingGroup::Abelian(g) if coords.len() == g.rank() => {
                Ok(Degree::Abelian(g.element(&coords)))
            }
            GradingGroup::Abelian(g) => err(
                line,
                format!(
                    "degree has {} coordinates, group has rank {}",
                    coords.len(),
                    g.rank()
                ),
            ),
            GradingGroup::Table(_) => err(line, "abelian degree used with a table group"),
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar literal and linear-combination parsing
// ---------------------------------------------------------------------------

fn parse_rational(tok: &str, line: usize) -> Result<Rational, ParseError> {
    if let Some((a, b)) = tok.split_once('/') {
        let num: i64 = a.trim().parse().map_err(|_| ParseError {
            line,
            msg: format!("bad numerator {a}"),
        })?;
        let den: i64 = b.trim().parse().map_err(|_| ParseError {
            line,
            msg: format!("bad denominator {b}"),
        })?;
        if den == 0 {
            return err(line, "zero denominator");
        }
        Ok(crate::scalars::rat(num, den))
    } else {
        let v: i64 = tok.trim().parse().map_err(|_| ParseError {
            line,
            msg: format!("bad integer {tok}"),
        })?;
        Ok(rat_int(v))
    }
}

/// Scalar literal: `int`, `a/b`, `z^k`, or `rational*z^k`.
fn parse_scalar(tok: &str, conductor: u64, line: usize) -> Result<CyclotomicScalar, ParseError> {
    let tok = tok.trim();
    let (rat_part, z_part) = if let Some((a, b)) = tok.split_once('*') {
        (Some(a.trim()), Some(b.trim()))
    } else if tok.starts_with('z') {
        (None, Some(tok))
    } else {
        (Some(tok), None)
    };
    let mut value = match rat_part {
        Some(r) => CyclotomicScalar::from_rational_value(parse_rational(r, line)?),
        None => CyclotomicScalar::one(),
    };
    if let Some(z) = z_part {
        let k: i64 = if z == "z" {
            1
        } else {
            z.strip_prefix("z^")
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| ParseError {
                    line,
                    msg: format!("bad root literal {z}"),
                })?
        };
        let zeta = CyclotomicScalar::zeta(conductor, k).map_err(|e| ParseError {
            line,
            msg: e.to_string(),
        })?;
        value = value.mul(&zeta);
    }
    Ok(value)
}

/// Linear combination of matrix units with scalar coefficients, e.g.
/// `e[1,1] + z^2*e[2,2] - 1/2*e[3,3]`. `perm` carries the poset relabeling.
fn parse_combination(
    s: &str,
    alg: &IncidenceAlgebra,
    perm: &[usize],
    conductor: u64,
    line: usize,
) -> Result<IncidenceElement<CyclotomicScalar>, ParseError> {
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut sign = true;
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' | '[' => {
                depth += 1;
                current.push(c);
            }
            ')' | ']' => {
                depth -= 1;
                current.push(c);
            }
            '+' | '-' if depth == 0 && !current.trim().is_empty() => {
                terms.push((sign, current.trim().to_string()));
                sign = c == '+';
                current = String::new();
            }
            '-' if depth == 0 && current.trim().is_empty() => {
                sign = !sign;
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        terms.push((sign, current.trim().to_string()));
    }
    let mut entries: Vec<((usize, usize), CyclotomicScalar)> = Vec::new();
    for (positive, term) in terms {
        let (coeff_str, unit_str) = match term.rfind("e[") {
            Some(pos) => {
                let coeff = term[..pos].trim().trim_end_matches('*').trim();
                (coeff, &term[pos..])
            }
            None => return err(line, format!("term without a matrix unit: {term}")),
        };
        let inner = unit_str
            .strip_prefix("e[")
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| ParseError {
                line,
                msg: format!("bad matrix unit {unit_str}"),
            })?;
        let mut it = inner.split(',');
        let x: usize = it
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| ParseError {
                line,
                msg: "bad unit row".into(),
            })?;
        let y: usize = it
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| ParseError {
                line,
                msg: "bad unit column".into(),
            })?;
        if x == 0 || y == 0 || x > perm.len() || y > perm.len() {
            return err(line, format!("unit e[{x},{y}] out of range"));
        }
        let coeff_str = coeff_str.trim_start_matches('(').trim_end_matches(')');
        let mut c = if coeff_str.is_empty() {
            CyclotomicScalar::one()
        } else {
            parse_scalar(coeff_str, conductor, line)?
        };
        if !positive {
            c = c.neg();
        }
        entries.push(((perm[x - 1], perm[y - 1]), c));
    }
    alg.element(entries).map_err(|e| ParseError {
        line,
        msg: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Grading files
// ---------------------------------------------------------------------------

/// Parses the `.grading` format: `conductor=<N>`, `group=<spec>` (or
/// `group-table: ...`), then one `deg <degree> : <combination>` line per
/// homogeneous basis vector.
pub fn parse_grading(
    text: &str,
    alg: &IncidenceAlgebra,
    perm: &[usize],
) -> Result<Grading<CyclotomicScalar>, ParseError> {
    let mut conductor = 1u64;
    let mut group: Option<GradingGroup> = None;
    let mut grading: Option<Grading<CyclotomicScalar>> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.split("//").next().unwrap().trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix("conductor=") {
            conductor = rest.trim().parse().map_err(|_| ParseError {
                line,
                msg: format!("bad conductor {rest}"),
            })?;
            if conductor == 0 {
                return err(line, "conductor must be positive");
            }
        } else if let Some(rest) = s.strip_prefix("group=") {
            group = Some(parse_grading_group(rest.trim(), line)?);
        } else if s.starts_with("group-table:") {
            group = Some(parse_grading_group(s, line)?);
        } else if let Some(rest) = s.strip_prefix("deg") {
            let Some(g) = group.clone() else {
                return err(line, "deg line before group declaration");
            };
            let grading = grading.get_or_insert_with(|| Grading::new(g.clone()));
            let (deg_str, comb_str) = rest.split_once(':').ok_or_else(|| ParseError {
                line,
                msg: "expected deg <degree> : <combination>".into(),
            })?;
            let degree = parse_degree(deg_str.trim(), &grading.group, line)?;
            let elem = parse_combination(comb_str.trim(), alg, perm, conductor, line)?;
            if elem.is_zero() {
                return err(line, "zero homogeneous basis vector");
            }
            grading.push(degree, elem);
        } else {
            return err(line, format!("unrecognized grading line: {s}"));
        }
    }
    grading.ok_or(ParseError {
        line: 0,
        msg: "grading file declares no components".into(),
    })
}

/// Serializes a grading; scalars are embedded into the least common
/// conductor so every `z^k` refers to the declared root.
pub fn write_grading(alg: &IncidenceAlgebra, grading: &Grading<CyclotomicScalar>) -> String {
    let mut conductor = 1u64;
    for basis in grading.components.values() {
        for e in basis {
            for v in e.entries().values() {
                conductor = conductor.lcm(&v.conductor());
            }
        }
    }
    let mut out = format!("conductor={conductor}\n");
    match &grading.group {
        GradingGroup::Abelian(g) => {
            let _ = writeln!(out, "group={}", write_abelian_group(g));
        }
        GradingGroup::Table(t) => {
            let entries: Vec<String> = (0..t.order())
                .flat_map(|a| (0..t.order()).map(move |b| (a, b)))
                .map(|(a, b)| t.mul(a, b).to_string())
                .collect();
            let _ = writeln!(out, "group-table: {}; {}", t.order(), entries.join(" "));
        }
    }
    for (g, basis) in &grading.components {
        for e in basis {
            let _ = writeln!(out, "deg {g} : {}", write_combination(alg, e, conductor));
        }
    }
    out
}

fn scalar_literal(v: &CyclotomicScalar, conductor: u64) -> String {
    let v = v.embed(conductor);
    if let Some(q) = v.try_rational() {
        return q.to_string();
    }
    let poly = v.as_poly();
    let mut parts: Vec<String> = Vec::new();
    for (k, c) in poly.coeffs().iter().enumerate() {
        if Scalar::is_zero(c) {
            continue;
        }
        let piece = if k == 0 {
            c.to_string()
        } else if Scalar::is_one(c) {
            format!("z^{k}")
        } else {
            format!("{c}*z^{k}")
        };
        parts.push(piece);
    }
    parts.join("+")
}

fn write_combination(
    alg: &IncidenceAlgebra,
    e: &IncidenceElement<CyclotomicScalar>,
    conductor: u64,
) -> String {
    let _ = alg;
    let mut out = String::new();
    for (k, (&(x, y), v)) in e.entries().iter().enumerate() {
        let mut lit = scalar_literal(v, conductor);
        let negated = !lit.contains('+') && lit.starts_with('-');
        if negated {
            lit = lit[1..].to_string();
        }
        if k > 0 {
            out.push_str(if negated { " - " } else { " + " });
        } else if negated {
            out.push('-');
        }
        if lit == "1" {
            let _ = write!(out, "e[{},{}]", x + 1, y + 1);
        } else if lit.contains('+') {
            let _ = write!(out, "({lit})*e[{},{}]", x + 1, y + 1);
        } else {
            let _ = write!(out, "{lit}*e[{},{}]", x + 1, y + 1);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Realization specs
// ---------------------------------------------------------------------------

pub struct RealizeSpec {
    pub group: AbelianGroup,
    pub h1: Subgroup,
    pub h2: Subgroup,
    pub tag: Vec<(Character, GroupElement)>,
}

/// Parses a two-block realization spec:
/// `group=...`, `h1=(..);(..)`, `h2=...`, `tag=(chi=[..]; h=(..)) ; ...`.
/// Character exponents refer to the adapted generators of the meet.
pub fn parse_realize_spec(text: &str) -> Result<RealizeSpec, ParseError> {
    let mut group: Option<AbelianGroup> = None;
    let mut gens1: Option<Vec<GroupElement>> = None;
    let mut gens2: Option<Vec<GroupElement>> = None;
    let mut tag_line: Option<(usize, String)> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.split("//").next().unwrap().trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix("group=") {
            group = Some(parse_abelian_group(rest.trim())?);
        } else if let Some(rest) = s.strip_prefix("h1=") {
            gens1 = Some(parse_element_list(rest, group.as_ref(), line)?);
        } else if let Some(rest) = s.strip_prefix("h2=") {
            gens2 = Some(parse_element_list(rest, group.as_ref(), line)?);
        } else if let Some(rest) = s.strip_prefix("tag=") {
            tag_line = Some((line, rest.to_string()));
        } else {
            return err(line, format!("unrecognized spec line: {s}"));
        }
    }
    let group = group.ok_or(ParseError {
        line: 0,
        msg: "missing group=".into(),
    })?;
    let h1 = Subgroup::from_generators(&group, &gens1.unwrap_or_default());
    let h2 = Subgroup::from_generators(&group, &gens2.unwrap_or_default());
    let meet = h1.meet(&h2).map_err(|e| ParseError {
        line: 0,
        msg: e.to_string(),
    })?;
    let meet_dual = meet.dual_basis().map_err(|e| ParseError {
        line: 0,
        msg: e.to_string(),
    })?;
    let mut tag = Vec::new();
    if let Some((line, s)) = tag_line {
        for part in split_top_level(&s, ';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let inner = part
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| ParseError {
                    line,
                    msg: format!("expected (chi=[..]; h=(..)), found {part}"),
                })?;
            let mut chi: Option<Character> = None;
            let mut h: Option<GroupElement> = None;
            for field in split_top_level(inner, ';') {
                let field = field.trim();
                if let Some(rest) = field.strip_prefix("chi=") {
                    let exps_str = rest
                        .trim()
                        .strip_prefix('[')
                        .and_then(|x| x.strip_suffix(']'))
                        .ok_or_else(|| ParseError {
                            line,
                            msg: "chi expects [e1,e2,...]".into(),
                        })?;
                    let exps: Vec<u64> = if exps_str.trim().is_empty() {
                        vec![]
                    } else {
                        exps_str
                            .split(',')
                            .map(|x| x.trim().parse::<u64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| ParseError {
                                line,
                                msg: format!("bad exponent: {e}"),
                            })?
                    };
                    if exps.len() != meet_dual.orders.len() {
                        return err(
                            line,
                            format!(
                                "chi has {} exponents, meet has {} adapted generators",
                                exps.len(),
                                meet_dual.orders.len()
                            ),
                        );
                    }
                    let exps = exps
                        .iter()
                        .zip(&meet_dual.orders)
                        .map(|(&e, &m)| e % m)
                        .collect();
                    chi = Some(Character { exps });
                } else if let Some(rest) = field.strip_prefix("h=") {
                    match parse_degree(rest.trim(), &GradingGroup::Abelian(group.clone()), line)? {
                        Degree::Abelian(g) => h = Some(g),
                        Degree::Table(_) => unreachable!(),
                    }
                } else {
                    return err(line, format!("unrecognized tag field {field}"));
                }
            }
            match (chi, h) {
                (Some(c), Some(h)) => tag.push((c, h)),
                _ => return err(line, "tag entry needs both chi= and h="),
            }
        }
    }
    Ok(RealizeSpec {
        group,
        h1,
        h2,
        tag,
    })
}

fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' => {
                depth += 1;
                cur.push(c);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(c);
            }
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn parse_element_list(
    s: &str,
    group: Option<&AbelianGroup>,
    line: usize,
) -> Result<Vec<GroupElement>, ParseError> {
    let Some(group) = group else {
        return err(line, "subgroup generators before group declaration");
    };
    let mut out = Vec::new();
    for part in split_top_level(s, ';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match parse_degree(part, &GradingGroup::Abelian(group.clone()), line)? {
            Degree::Abelian(g) => out.push(g),
            Degree::Table(_) => unreachable!(),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

fn subgroup_shape(sub: &Subgroup) -> String {
    match sub.dual_basis() {
        Ok(d) if d.orders.is_empty() => "trivial".to_string(),
        Ok(d) => d
            .orders
            .iter()
            .map(|m| format!("Z{m}"))
            .collect::<Vec<_>>()
            .join(" x "),
        Err(_) => "infinite".to_string(),
    }
}

/// Deterministic, line-oriented canonical-form report with bimodule tags.
pub fn canonical_report(
    cf: &CanonicalForm<CyclotomicScalar>,
    decomps: &BTreeMap<(usize, usize), BimoduleDecomposition<CyclotomicScalar>>,
) -> String {
    let mut conductor = 1u64;
    for b in &cf.blocks {
        for e in b.basis.values() {
            for v in e.entries().values() {
                conductor = conductor.lcm(&v.conductor());
            }
        }
    }
    for d in decomps.values() {
        for p in &d.pairs {
            for v in p.generator.entries().values() {
                conductor = conductor.lcm(&v.conductor());
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "group={}", write_abelian_group(&cf.group));
    let _ = writeln!(out, "conductor={conductor}");
    let _ = writeln!(out, "t={}", cf.t());
    for (i, b) in cf.blocks.iter().enumerate() {
        let supp: Vec<String> = b.support.iter().map(|x| (x + 1).to_string()).collect();
        let _ = writeln!(out, "block.{}.support={}", i + 1, supp.join(","));
        let _ = writeln!(
            out,
            "block.{}.subgroup={}",
            i + 1,
            subgroup_shape(&b.subgroup)
        );
        for (u, xu) in &b.basis {
            let _ = writeln!(
                out,
                "block.{}.basis.{}={}",
                i + 1,
                u,
                write_combination(&cf.algebra, xu, conductor)
            );
        }
    }
    for (a, b) in cf.assoc.covers().pairs {
        let _ = writeln!(out, "assoc.cover=({},{})", a + 1, b + 1);
    }
    for (&(i, j), d) in decomps {
        let _ = writeln!(
            out,
            "bimodule.{}.{}.dim={}",
            i + 1,
            j + 1,
            cf.bimodule_dim(i, j)
        );
        for (k, p) in d.pairs.iter().enumerate() {
            let exps: Vec<String> = p.chi.exps.iter().map(u64::to_string).collect();
            let _ = writeln!(
                out,
                "bimodule.{}.{}.tag.{}=(chi=[{}]; h={})",
                i + 1,
                j + 1,
                k + 1,
                exps.join(","),
                p.degree
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::verify_grading;
    use crate::canonical::canonicalize;

    #[test]
    fn poset_roundtrip() {
        let text = "n=3\ncovers= (1,2); (1,3)\n";
        let (poset, perm) = parse_poset(text).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(write_poset(&poset), "n=3\ncovers=(1,2); (1,3)\n");

        // Reversed labels get relabeled.
        let (poset, perm) = parse_poset("n=2\ncovers=(2,1)\n").unwrap();
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(poset.covers().pairs, vec![(0, 1)]);

        assert!(parse_poset("covers=(1,2)\n").is_err());
        assert!(parse_poset("n=2\ncovers=(1,2); (2,1)\n").is_err());
    }

    #[test]
    fn group_specs() {
        let g = parse_abelian_group("Z2 x Z2 x Z").unwrap();
        assert_eq!(g.moduli(), &[2, 2, 0]);
        assert_eq!(write_abelian_group(&g), "Z2 x Z2 x Z");
        assert!(parse_abelian_group("Q8").is_err());
    }

    #[test]
    fn grading_file_roundtrip() {
        let (poset, perm) = parse_poset("n=3\ncovers=(1,2); (1,3)\n").unwrap();
        let alg = IncidenceAlgebra::new(poset);
        let text = "\
conductor=1
group=Z2 x Z2
deg (0,0) : e[1,1]
deg (0,0) : e[2,2] + e[3,3]
deg (0,1) : e[2,2] - e[3,3]
deg (1,0) : e[1,2] - e[1,3]
deg (1,1) : e[1,2] + e[1,3]
";
        let grading = parse_grading(text, &alg, &perm).unwrap();
        assert!(verify_grading(&alg, &grading).pass());
        let written = write_grading(&alg, &grading);
        let reparsed = parse_grading(&written, &alg, &[0, 1, 2]).unwrap();
        assert_eq!(grading, reparsed);
    }

    #[test]
    fn scalar_literals() {
        assert_eq!(
            parse_scalar("-3/2", 4, 1).unwrap(),
            CyclotomicScalar::from_rational_value(crate::scalars::rat(-3, 2))
        );
        let z = parse_scalar("z^1", 4, 1).unwrap();
        assert_eq!(z, CyclotomicScalar::zeta(4, 1).unwrap());
        let two_z3 = parse_scalar("2*z^3", 6, 1).unwrap();
        let expected = CyclotomicScalar::zeta(6, 3)
            .unwrap()
            .mul(&CyclotomicScalar::from_int(2));
        assert_eq!(two_z3, expected);
        assert!(parse_scalar("z^x", 4, 1).is_err());
    }

    #[test]
    fn table_grading_parses() {
        let (poset, perm) = parse_poset("n=6\ncovers=(1,4); (2,5); (3,6)\n").unwrap();
        let alg = IncidenceAlgebra::new(poset);
        let text = "\
conductor=3
group-table: 6; 0 1 2 3 4 5 1 2 0 4 5 3 2 0 1 5 3 4 3 5 4 0 2 1 4 3 5 1 0 2 5 4 3 2 1 0
deg #0 : e[1,1] + e[2,2] + e[3,3]
deg #1 : e[1,1] + z^1*e[2,2] + z^2*e[3,3]
deg #2 : e[1,1] + z^2*e[2,2] + z^1*e[3,3]
deg #3 : e[1,4] + e[2,5] + e[3,6]
deg #4 : e[1,4] + z^1*e[2,5] + z^2*e[3,6]
deg #5 : e[1,4] + z^2*e[2,5] + z^1*e[3,6]
deg #0 : e[4,4] + e[5,5] + e[6,6]
deg #2 : e[4,4] + z^1*e[5,5] + z^2*e[6,6]
deg #1 : e[4,4] + z^2*e[5,5] + z^1*e[6,6]
";
        let grading = parse_grading(text, &alg, &perm).unwrap();
        assert!(verify_grading(&alg, &grading).pass());
    }

    #[test]
    fn realize_spec_parses() {
        let text = "\
group=Z4 x Z2
h1=(1,0)
h2=(2,0); (0,1)
tag=(chi=[0]; h=(1,1)) ; (chi=[1]; h=(0,0))
";
        let spec = parse_realize_spec(text).unwrap();
        assert_eq!(spec.h1.order().unwrap(), 4);
        assert_eq!(spec.h2.order().unwrap(), 4);
        assert_eq!(spec.tag.len(), 2);
    }

    #[test]
    fn canonical_report_is_deterministic() {
        let (poset, perm) = parse_poset("n=3\ncovers=(1,2); (1,3)\n").unwrap();
        let alg = IncidenceAlgebra::new(poset);
        let text = "\
conductor=1
group=Z2 x Z2
deg (0,0) : e[1,1]
deg (0,0) : e[2,2] + e[3,3]
deg (0,1) : e[2,2] - e[3,3]
deg (1,0) : e[1,2] - e[1,3]
deg (1,1) : e[1,2] + e[1,3]
";
        let grading = parse_grading(text, &alg, &perm).unwrap();
        let cf = canonicalize(&alg, &grading).unwrap();
        let decomps = crate::bimodule::decompose_all(&cf).unwrap();
        let r1 = canonical_report(&cf, &decomps);
        let r2 = canonical_report(&cf, &decomps);
        assert_eq!(r1, r2);
        assert!(r1.contains("t=2"));
        assert!(r1.contains("block.2.subgroup=Z2"));
        assert!(r1.contains("bimodule.1.2.dim=2"));
    }
}
