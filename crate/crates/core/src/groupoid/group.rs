use serde::{Deserialize, Serialize};

use super::{validate_groupoid, Arrow, FiniteGroupoid, Unit};
use crate::error::{Error, Result};

/// A finite group stored as a one-unit groupoid; elements are arrow indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub groupoid: FiniteGroupoid,
    pub identity: usize,
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.groupoid.n_arrows()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.groupoid.mul(Arrow(a), Arrow(b)).0
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.groupoid.inv(Arrow(a)).0
    }

    pub fn label(&self, a: usize) -> &str {
        self.groupoid.label(Arrow(a))
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn trivial() -> Self {
        make_group(&[vec![0]], Some(vec!["e".into()])).expect("trivial group")
    }

    /// `Z/n` with elements `0..n` and addition mod `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        make_group(&table, Some((0..n).map(|a| a.to_string()).collect()))
    }

    /// Direct product; element `(a, b)` has index `a * |h| + b`.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let nh = h.order();
        let n = g.order() * nh;
        let table: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| g.mul(x / nh, y / nh) * nh + h.mul(x % nh, y % nh))
                    .collect()
            })
            .collect();
        let labels = (0..n)
            .map(|x| format!("({},{})", g.label(x / nh), h.label(x % nh)))
            .collect();
        make_group(&table, Some(labels)).expect("product of groups is a group")
    }

    /// Symmetric group on `n` letters; elements are permutations in
    /// lexicographic order, composed as functions (`(ab)(i) = a(b(i))`).
    pub fn symmetric(n: usize) -> Result<Self> {
        let perms = permutations(n);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&b.iter().map(|&i| a[i]).collect()))
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(""))
            .collect();
        make_group(&table, Some(labels))
    }

    /// The permutation `i ↦ a(i)` for elements of [`FiniteGroup::symmetric`].
    pub fn symmetric_permutation(n: usize, a: usize) -> Vec<usize> {
        permutations(n).swap_remove(a)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Builds a group from a multiplication table `table[a][b] = ab`.
///
/// Rejects tables that are not Latin squares, lack an identity, or fail
/// associativity; the error names the offending entry or triple.
pub fn make_group(table: &[Vec<usize>], labels: Option<Vec<String>>) -> Result<FiniteGroup> {
    let n = table.len();
    if n == 0 {
        return Err(Error::InvalidGroup("empty multiplication table".into()));
    }
    for (a, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidGroup(format!("row {a} has length {} (expected {n})", row.len())));
        }
        if let Some(&b) = row.iter().find(|&&b| b >= n) {
            return Err(Error::InvalidGroup(format!("row {a} contains out-of-range entry {b}")));
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
        .ok_or_else(|| Error::InvalidGroup("no two-sided identity".into()))?;
    let mut inv = vec![usize::MAX; n];
    for a in 0..n {
        let b = (0..n)
            .find(|&b| table[a][b] == identity && table[b][a] == identity)
            .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        inv[a] = b;
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(Error::InvalidGroup(format!(
                        "associativity fails at triple ({a}, {b}, {c})"
                    )));
                }
            }
        }
    }
    let labels = labels.unwrap_or_else(|| (0..n).map(|a| a.to_string()).collect());
    if labels.len() != n {
        return Err(Error::InvalidGroup("label count disagrees with order".into()));
    }
    let groupoid = FiniteGroupoid {
        arrow_labels: labels,
        unit_labels: vec!["*".into()],
        unit_arrow: vec![Arrow(identity)],
        src: vec![Unit(0); n],
        rng: vec![Unit(0); n],
        inv: inv.into_iter().map(Arrow).collect(),
        comp: (0..n * n).map(|k| Some(Arrow(table[k / n][k % n]))).collect(),
    };
    let report = validate_groupoid(&groupoid);
    if !report.is_ok() {
        return Err(Error::InvalidGroup(report.to_string()));
    }
    Ok(FiniteGroup { groupoid, identity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_groups() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        assert_eq!(z2.order(), 2);
        assert_eq!(z2.mul(1, 1), 0);
        let z3 = FiniteGroup::cyclic(3).unwrap();
        assert_eq!(z3.order(), 3);
        assert_eq!(z3.inv(1), 2);
        assert!(z3.is_abelian());
    }

    #[test]
    fn broken_associativity_names_triple() {
        // Latin square with identity 0 that is not associative.
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = make_group(&t, None).unwrap_err().to_string();
        assert!(err.contains("triple"), "{err}");
    }

    #[test]
    fn missing_inverse_rejected() {
        let t = vec![vec![0, 1], vec![1, 1]];
        assert!(make_group(&t, None).is_err());
    }

    #[test]
    fn symmetric_group_s3_is_nonabelian() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        let a = 1;
        let pa = FiniteGroup::symmetric_permutation(3, a);
        let pb = FiniteGroup::symmetric_permutation(3, 3);
        let pab = FiniteGroup::symmetric_permutation(3, s3.mul(a, 3));
        for i in 0..3 {
            assert_eq!(pab[i], pa[pb[i]]);
        }
    }

    #[test]
    fn product_group_order() {
        let k = FiniteGroup::product(&FiniteGroup::cyclic(2).unwrap(), &FiniteGroup::cyclic(2).unwrap());
        assert_eq!(k.order(), 4);
        assert!(k.elements().all(|a| k.mul(a, a) == k.identity));
    }
}
