//! Finite groups in Cayley-table form and their left regular representation.
//!
//! Elements are dense indices `0..order` with the identity always stored at
//! index 0, so any quantity indexed by group elements (Schmidt weights,
//! measurement outcomes, ...) is a plain slice.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unknown group name `{0}`")]
    UnknownName(String),
    #[error("invalid parameter for {name}: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("cayley table violates group axioms: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("cannot parse group spec `{0}`")]
    Parse(String),
}

/// A single violated group axiom, as reported by [`validate_parts`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { expected: usize, row: usize, found: usize },
    EntryOutOfRange { row: usize, col: usize, value: usize },
    LatinRow { row: usize },
    LatinColumn { col: usize },
    Associativity { f: usize, g: usize, h: usize },
    Identity { element: usize },
    Inverse { element: usize },
    IdentityNotFirst { identity: usize },
}

/// Cayley-table presentation of a finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    label: String,
    cayley: Vec<Vec<usize>>,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Builds a group from a multiplication table, locating the identity and
    /// inverses. The identity must sit at index 0.
    pub fn from_table(label: impl Into<String>, cayley: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = cayley.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| cayley[e].get(g) == Some(&g) && cayley[g].get(e) == Some(&g)))
            .unwrap_or(0);
        let inverses: Vec<usize> = (0..n)
            .map(|f| {
                (0..n)
                    .find(|&g| cayley[f].get(g) == Some(&identity) && cayley.get(g).and_then(|r| r.get(f)) == Some(&identity))
                    .unwrap_or(0)
            })
            .collect();
        let mut violations = validate_parts(&cayley, identity, &inverses);
        if identity != 0 && n > 0 {
            violations.push(Violation::IdentityNotFirst { identity });
        }
        if n == 0 {
            return Err(GroupError::InvalidParameter { name: "table".into(), reason: "empty table".into() });
        }
        if !violations.is_empty() {
            return Err(GroupError::Invalid(violations));
        }
        Ok(Self { label: label.into(), cayley, inverses })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverses
    }

    #[inline]
    pub fn mul(&self, f: usize, g: usize) -> usize {
        self.cayley[f][g]
    }

    #[inline]
    pub fn inv(&self, f: usize) -> usize {
        self.inverses[f]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|f| self.elements().all(|g| self.mul(f, g) == self.mul(g, f)))
    }

    /// Order of a single element.
    pub fn element_order(&self, f: usize) -> usize {
        let mut k = 1;
        let mut x = f;
        while x != 0 {
            x = self.mul(x, f);
            k += 1;
        }
        k
    }

    /// Lists every violated axiom; empty means the group is valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate_parts(&self.cayley, 0, &self.inverses)
    }

    /// Returns a copy with element `i` renamed to `perm[i]`. `perm` must fix 0.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GroupError> {
        let n = self.order();
        let mut table = vec![vec![0; n]; n];
        for f in 0..n {
            for g in 0..n {
                table[perm[f]][perm[g]] = perm[self.mul(f, g)];
            }
        }
        Self::from_table(self.label.clone(), table)
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {})", self.label, self.order())
    }
}

#[derive(Serialize, Deserialize)]
struct GroupRecord {
    label: String,
    order: usize,
    cayley: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GroupInput {
    Name(String),
    Table { label: Option<String>, order: Option<usize>, cayley: Vec<Vec<usize>> },
}

impl Serialize for FiniteGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupRecord { label: self.label.clone(), order: self.order(), cayley: self.cayley.clone() }.serialize(s)
    }
}

/// Accepts either a group name understood by [`parse_group`] or a record
/// `{label?, order?, cayley}`.
impl<'de> Deserialize<'de> for FiniteGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match GroupInput::deserialize(d)? {
            GroupInput::Name(name) => parse_group(&name).map_err(serde::de::Error::custom),
            GroupInput::Table { label, order, cayley } => {
                if order.is_some_and(|o| o != cayley.len()) {
                    return Err(serde::de::Error::custom(format!(
                        "order {} does not match table size {}",
                        order.unwrap_or_default(),
                        cayley.len()
                    )));
                }
                let label = label.unwrap_or_else(|| format!("table({})", cayley.len()));
                FiniteGroup::from_table(label, cayley).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// Checks the group axioms on raw parts. Malformed shapes are reported as
/// violations rather than errors.
pub fn validate_parts(cayley: &[Vec<usize>], identity: usize, inverses: &[usize]) -> Vec<Violation> {
    let n = cayley.len();
    let mut out = Vec::new();
    for (row, r) in cayley.iter().enumerate() {
        if r.len() != n {
            out.push(Violation::Shape { expected: n, row, found: r.len() });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (row, r) in cayley.iter().enumerate() {
        for (col, &v) in r.iter().enumerate() {
            if v >= n {
                out.push(Violation::EntryOutOfRange { row, col, value: v });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (row, r) in cayley.iter().enumerate() {
        let mut seen = vec![false; n];
        r.iter().for_each(|&v| seen[v] = true);
        if seen.iter().any(|s| !s) {
            out.push(Violation::LatinRow { row });
        }
    }
    for col in 0..n {
        let mut seen = vec![false; n];
        cayley.iter().for_each(|r| seen[r[col]] = true);
        if seen.iter().any(|s| !s) {
            out.push(Violation::LatinColumn { col });
        }
    }
    for f in 0..n {
        for g in 0..n {
            for h in 0..n {
                if cayley[cayley[f][g]][h] != cayley[f][cayley[g][h]] {
                    out.push(Violation::Associativity { f, g, h });
                }
            }
        }
    }
    if identity < n {
        for g in 0..n {
            if cayley[identity][g] != g || cayley[g][identity] != g {
                out.push(Violation::Identity { element: g });
            }
        }
    } else {
        out.push(Violation::Identity { element: identity });
    }
    for f in 0..n {
        let ok = inverses.get(f).is_some_and(|&fi| {
            fi < n && identity < n && cayley[f][fi] == identity && cayley[fi][f] == identity
        });
        if !ok {
            out.push(Violation::Inverse { element: f });
        }
    }
    out
}

/// Integers mod `n` under addition.
pub fn cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
    if n == 0 {
        return Err(GroupError::InvalidParameter { name: "cyclic".into(), reason: "order must be positive".into() });
    }
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_table(format!("Z{n}"), table)
}

/// Componentwise product; element `(a, b)` has index `a * |G2| + b`.
pub fn direct_product(g1: &FiniteGroup, g2: &FiniteGroup) -> FiniteGroup {
    let (n1, n2) = (g1.order(), g2.order());
    let table = (0..n1 * n2)
        .map(|x| {
            (0..n1 * n2)
                .map(|y| g1.mul(x / n2, y / n2) * n2 + g2.mul(x % n2, y % n2))
                .collect()
        })
        .collect();
    FiniteGroup::from_table(format!("{}x{}", g1.label(), g2.label()), table)
        .expect("direct product of valid groups is a group")
}

/// Dihedral group of the given (even) order `2n`. Element `r^k s^j` has index
/// `k + n * j`.
pub fn dihedral(order: usize) -> Result<FiniteGroup, GroupError> {
    if order < 2 || order % 2 != 0 {
        return Err(GroupError::InvalidParameter {
            name: "dihedral".into(),
            reason: format!("order must be even and >= 2, got {order}"),
        });
    }
    let n = order / 2;
    let table = (0..order)
        .map(|x| {
            let (a, sx) = (x % n, x / n);
            (0..order)
                .map(|y| {
                    let (b, sy) = (y % n, y / n);
                    // (r^a s^sx)(r^b s^sy) = r^(a + (-1)^sx b) s^(sx + sy)
                    let rot = if sx == 0 { (a + b) % n } else { (a + n - b) % n };
                    rot + n * ((sx + sy) % 2)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(format!("D{n}"), table)
}

/// Symmetric group on `k` symbols. Permutations are enumerated in
/// lexicographic order (identity first); the product is composition,
/// `(fg)(x) = f(g(x))`.
pub fn symmetric(k: usize) -> Result<FiniteGroup, GroupError> {
    if !(1..=5).contains(&k) {
        return Err(GroupError::InvalidParameter {
            name: "symmetric".into(),
            reason: format!("supported degrees are 1..=5, got {k}"),
        });
    }
    let perms = permutations(k);
    let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("closed under composition");
    let table = perms
        .iter()
        .map(|f| {
            perms
                .iter()
                .map(|g| {
                    let fg: Vec<usize> = (0..k).map(|x| f[g[x]]).collect();
                    index(&fg)
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(format!("S{k}"), table)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Quaternion group Q8. Index layout: `1, -1, i, -i, j, -j, k, -k`.
pub fn quaternion(order: usize) -> Result<FiniteGroup, GroupError> {
    if order != 8 {
        return Err(GroupError::InvalidParameter {
            name: "quaternion".into(),
            reason: format!("only order 8 is supported, got {order}"),
        });
    }
    // unit products: units 0=1, 1=i, 2=j, 3=k; returns (sign_flip, unit)
    fn unit_mul(a: usize, b: usize) -> (bool, usize) {
        match (a, b) {
            (0, x) | (x, 0) => (false, x),
            (x, y) if x == y => (true, 0),
            (1, 2) => (false, 3),
            (2, 3) => (false, 1),
            (3, 1) => (false, 2),
            (2, 1) => (true, 3),
            (3, 2) => (true, 1),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    }
    let table = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (neg, u) = unit_mul(x / 2, y / 2);
                    let sign = (x % 2) ^ (y % 2) ^ usize::from(neg);
                    2 * u + sign
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table("Q8", table)
}

/// Builds one of the named families. `direct_product` is not reachable from
/// here since its parameters are groups; use [`parse_group`] or
/// [`direct_product`].
pub fn make_named_group(name: &str, params: &[usize]) -> Result<FiniteGroup, GroupError> {
    let one = |what: &str| -> Result<usize, GroupError> {
        match params {
            [p] => Ok(*p),
            _ => Err(GroupError::InvalidParameter {
                name: what.into(),
                reason: format!("expected exactly one integer parameter, got {}", params.len()),
            }),
        }
    };
    match name {
        "cyclic" => cyclic(one("cyclic")?),
        "dihedral" => dihedral(one("dihedral")?),
        "symmetric" => symmetric(one("symmetric")?),
        "quaternion" => quaternion(one("quaternion")?),
        other => Err(GroupError::UnknownName(other.to_string())),
    }
}

/// Parses group specs such as `Z4`, `Z2xZ2`, `S3`, `D4`, `Q8`, `cyclic(6)`,
/// `dihedral(8)`, `direct_product(Z2,Z3)`.
///
/// In the short form `Dn` denotes the dihedral group of order `2n`.
pub fn parse_group(spec: &str) -> Result<FiniteGroup, GroupError> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(GroupError::Parse(spec.to_string()));
    }
    if let Some(open) = s.find('(') {
        if !s.ends_with(')') {
            return Err(GroupError::Parse(spec.to_string()));
        }
        let name = &s[..open];
        let inner = &s[open + 1..s.len() - 1];
        if name == "direct_product" {
            let parts = split_top_level(inner);
            if parts.len() < 2 {
                return Err(GroupError::InvalidParameter {
                    name: "direct_product".into(),
                    reason: "needs at least two factors".into(),
                });
            }
            let mut acc = parse_group(parts[0])?;
            for p in &parts[1..] {
                acc = direct_product(&acc, &parse_group(p)?);
            }
            return Ok(acc);
        }
        let params = inner
            .split(',')
            .map(|p| p.parse::<usize>().map_err(|_| GroupError::Parse(spec.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        return make_named_group(name, &params);
    }
    if s.contains(['x', 'X', '*']) && !s.starts_with("cyclic") {
        let parts: Vec<&str> = s.split(['x', 'X', '*']).collect();
        let mut acc = parse_group(parts[0])?;
        for p in &parts[1..] {
            acc = direct_product(&acc, &parse_group(p)?);
        }
        return Ok(acc);
    }
    let (head, tail) = s.split_at(1);
    let n: usize = tail.parse().map_err(|_| GroupError::Parse(spec.to_string()))?;
    match head {
        "Z" | "C" => cyclic(n),
        "S" => symmetric(n),
        "D" => dihedral(2 * n),
        "Q" => quaternion(n),
        _ => Err(GroupError::UnknownName(spec.to_string())),
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut depth = 0usize;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// A permutation of `0..n` stored by images: `self.0[x]` is where `x` goes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: first `other`, then `self` (matches matrix product order).
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&x| self.0[x]).collect())
    }

    /// 0/1 matrix with a 1 at `(image[j], j)`.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let n = self.len();
        let mut m = vec![vec![0; n]; n];
        for (j, &i) in self.0.iter().enumerate() {
            m[i][j] = 1;
        }
        m
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, &x)| *i == x).count()
    }
}

/// Left regular representation, `L(f)|g⟩ = |fg⟩`, indexed by element.
pub fn regular_representation(group: &FiniteGroup) -> Vec<Permutation> {
    group
        .elements()
        .map(|f| Permutation(group.elements().map(|g| group.mul(f, g)).collect()))
        .collect()
}

/// Right regular representation, `R(f)|g⟩ = |g f⁻¹⟩`. Commutes with every `L(h)`.
pub fn right_regular_representation(group: &FiniteGroup) -> Vec<Permutation> {
    group
        .elements()
        .map(|f| Permutation(group.elements().map(|g| group.mul(g, group.inv(f))).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    fn all_small_groups() -> Vec<FiniteGroup> {
        ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6", "S3", "Z7", "Z8", "D4", "Q8", "Z2xZ2xZ2", "Z2xZ4"]
            .iter()
            .map(|s| parse_group(s).unwrap())
            .collect()
    }

    #[test]
    fn z2_table() {
        let g = cyclic(2).unwrap();
        assert_eq!(g.cayley(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn klein_is_self_inverse() {
        let g = direct_product(&cyclic(2).unwrap(), &cyclic(2).unwrap());
        assert_eq!(g.order(), 4);
        assert!(g.elements().all(|f| g.inv(f) == f));
    }

    #[test]
    fn s3_from_explicit_permutation_composition() {
        // oracle: compose permutations of 3 symbols directly
        let perms = permutations(3);
        let g = symmetric(3).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        for (a, f) in perms.iter().enumerate() {
            for (b, h) in perms.iter().enumerate() {
                let fh: Vec<usize> = (0..3).map(|x| f[h[x]]).collect();
                assert_eq!(perms[g.mul(a, b)], fh);
            }
        }
    }

    #[test]
    fn named_groups_valid() {
        for g in all_small_groups() {
            assert!(g.validate().is_empty(), "{g}");
            assert!(g.elements().all(|f| g.inv(g.inv(f)) == f));
        }
        assert_eq!(quaternion(8).unwrap().element_order(2), 4);
        assert!(!parse_group("D4").unwrap().is_abelian());
        assert!(!parse_group("Q8").unwrap().is_abelian());
    }

    #[test]
    fn errors() {
        assert!(matches!(cyclic(0), Err(GroupError::InvalidParameter { .. })));
        assert!(matches!(make_named_group("nope", &[3]), Err(GroupError::UnknownName(_))));
        assert!(parse_group("Zfoo").is_err());
        assert!(dihedral(5).is_err());
    }

    #[test]
    fn swapped_entry_reports_latin_violation() {
        let mut t: Vec<Vec<usize>> = cyclic(3).unwrap().cayley().to_vec();
        t[1][1] = 0;
        let v = validate_parts(&t, 0, &[0, 2, 1]);
        assert!(v.iter().any(|x| matches!(x, Violation::LatinRow { row: 1 })));
        assert!(v.iter().any(|x| matches!(x, Violation::LatinColumn { .. })));
    }

    #[test]
    fn degenerate_table_reports_identity_and_latin() {
        let t = vec![vec![0, 1], vec![1, 1]];
        let v = validate_parts(&t, 0, &[0, 1]);
        assert!(v.iter().any(|x| matches!(x, Violation::LatinRow { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Inverse { element: 1 })));
        assert!(FiniteGroup::from_table("bad", t).is_err());
        let v = validate_parts(&[vec![0, 1], vec![1]], 0, &[0, 1]);
        assert!(matches!(v[0], Violation::Shape { .. }));
    }

    #[test]
    fn regular_rep_is_homomorphism() {
        for g in all_small_groups() {
            let l = regular_representation(&g);
            let n = g.order();
            let id = Permutation::identity(n).matrix();
            assert_eq!(l[0].matrix(), id);
            for f in g.elements() {
                let m = l[f].matrix();
                assert!(m.iter().all(|r| r.iter().sum::<i64>() == 1));
                assert!((0..n).all(|j| m.iter().map(|r| r[j]).sum::<i64>() == 1));
                let trace: i64 = (0..n).map(|i| m[i][i]).sum();
                assert_eq!(trace, if f == 0 { n as i64 } else { 0 });
                for h in g.elements() {
                    assert_eq!(int_matmul(&m, &l[h].matrix()), l[g.mul(f, h)].matrix());
                }
            }
        }
    }

    #[test]
    fn z2_swap() {
        let l = regular_representation(&cyclic(2).unwrap());
        assert_eq!(l[1].matrix(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn right_rep_commutes_with_left() {
        let g = symmetric(3).unwrap();
        let l = regular_representation(&g);
        let r = right_regular_representation(&g);
        for a in g.elements() {
            for b in g.elements() {
                assert_eq!(l[a].compose(&r[b]), r[b].compose(&l[a]));
            }
        }
    }

    #[test]
    fn relabel_and_serde_roundtrip() {
        let g = parse_group("S3").unwrap();
        let h = g.relabel(&[0, 2, 1, 4, 3, 5]).unwrap();
        assert!(h.validate().is_empty());
        let json = serde_json::to_string(&g).unwrap();
        let back: FiniteGroup = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<FiniteGroup>(r#"{"label":"x","order":2,"cayley":[[0,1],[1,1]]}"#).is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_group("direct_product(Z2,Z3)").unwrap().order(), 6);
        assert_eq!(parse_group("dihedral(8)").unwrap().order(), 8);
        assert_eq!(parse_group("cyclic(5)").unwrap().order(), 5);
        assert_eq!(parse_group("symmetric(3)").unwrap().order(), 6);
        assert_eq!(parse_group("quaternion(8)").unwrap().order(), 8);
        assert_eq!(parse_group("Z2xZ2xZ2").unwrap().order(), 8);
    }
}
