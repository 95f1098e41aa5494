use serde::{Deserialize, Serialize};

use super::{validate_groupoid, Arrow, FiniteGroup, FiniteGroupoid, Unit};
use crate::error::{Error, Result};
use crate::report::ValidationReport;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A finite group acting on a groupoid by automorphisms.
///
/// `table[t][x]` is `t·x` for a left action and `x·t` for a right action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAction {
    pub group: FiniteGroup,
    pub target: FiniteGroupoid,
    pub side: Side,
    pub table: Vec<Vec<Arrow>>,
}

impl GroupAction {
    /// Builds and validates an action from a function `(t, x) ↦ t·x` (or `x·t`).
    pub fn from_fn(
        group: FiniteGroup,
        target: FiniteGroupoid,
        side: Side,
        f: impl Fn(usize, Arrow) -> Arrow,
    ) -> Result<Self> {
        let table = group
            .elements()
            .map(|t| target.arrows().map(|x| f(t, x)).collect())
            .collect();
        let a = GroupAction { group, target, side, table };
        let rep = check_action(&a);
        if rep.is_ok() {
            Ok(a)
        } else {
            Err(Error::InvalidAction(rep))
        }
    }

    pub fn trivial(group: FiniteGroup, target: FiniteGroupoid, side: Side) -> Self {
        let table = vec![target.arrows().collect(); group.order()];
        GroupAction { group, target, side, table }
    }

    /// Action on a principal groupoid (at most one arrow between two units)
    /// induced by permutations of the units: the arrow from `v` to `u` goes
    /// to the arrow from `π(v)` to `π(u)`.
    pub fn from_unit_permutations(
        group: FiniteGroup,
        target: FiniteGroupoid,
        side: Side,
        perms: &[Vec<usize>],
    ) -> Result<Self> {
        if perms.len() != group.order() || perms.iter().any(|p| p.len() != target.n_units()) {
            return Err(Error::InvalidArgument(
                "need one unit permutation per group element".into(),
            ));
        }
        let mut lookup = std::collections::HashMap::new();
        for x in target.arrows() {
            if lookup.insert((target.rng(x), target.src(x)), x).is_some() {
                return Err(Error::InvalidArgument(
                    "unit permutations only determine actions on principal groupoids".into(),
                ));
            }
        }
        let mut table = Vec::with_capacity(group.order());
        for p in perms {
            let mut row = Vec::with_capacity(target.n_arrows());
            for x in target.arrows() {
                let key = (Unit(p[target.rng(x).0]), Unit(p[target.src(x).0]));
                let y = lookup.get(&key).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "permutation does not preserve the arrow {}",
                        target.label(x)
                    ))
                })?;
                row.push(y);
            }
            table.push(row);
        }
        let a = GroupAction { group, target, side, table };
        let rep = check_action(&a);
        if rep.is_ok() {
            Ok(a)
        } else {
            Err(Error::InvalidAction(rep))
        }
    }

    #[inline]
    pub fn apply(&self, t: usize, x: Arrow) -> Arrow {
        self.table[t][x.0]
    }

    /// The induced action on units.
    pub fn apply_unit(&self, t: usize, u: Unit) -> Unit {
        self.target.src(self.apply(t, self.target.unit_arrow(u)))
    }

    /// The same action viewed from the other side: `x·t := t⁻¹·x`.
    pub fn flipped(&self) -> GroupAction {
        let table = self
            .group
            .elements()
            .map(|t| self.table[self.group.inv(t)].clone())
            .collect();
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        GroupAction {
            group: self.group.clone(),
            target: self.target.clone(),
            side,
            table,
        }
    }

    pub fn require_side(&self, side: Side) -> Result<()> {
        if self.side == side {
            Ok(())
        } else {
            Err(Error::SideMismatch { expected: side.name() })
        }
    }
}

/// Checks the automorphism, identity and group-law axioms exhaustively.
pub fn check_action(a: &GroupAction) -> ValidationReport {
    let mut rep = ValidationReport::new(format!("{} group action", a.side.name()));
    let g = &a.target;
    let grp = &a.group;
    if a.table.len() != grp.order() || a.table.iter().any(|r| r.len() != g.n_arrows() || r.iter().any(|x| x.0 >= g.n_arrows())) {
        rep.fail("tables", "action table has wrong shape", "");
        return rep;
    }
    let base = validate_groupoid(g);
    if !base.is_ok() {
        rep.merge(base);
        return rep;
    }
    for t in grp.elements() {
        let mut hit = vec![false; g.n_arrows()];
        for x in g.arrows() {
            hit[a.apply(t, x).0] = true;
        }
        if hit.iter().any(|h| !h) {
            rep.push_capped("automorphism", "not a bijection", format!("t={}", grp.label(t)));
        }
        for u in g.units() {
            if !g.is_unit_arrow(a.apply(t, g.unit_arrow(u))) {
                rep.push_capped("automorphism", "unit not sent to a unit", format!("t={}, u={}", grp.label(t), g.unit_label(u)));
            }
        }
        for x in g.arrows() {
            let tx = a.apply(t, x);
            if g.src(tx) != a.apply_unit(t, g.src(x)) || g.rng(tx) != a.apply_unit(t, g.rng(x)) {
                rep.push_capped("automorphism", "source/range not equivariant", format!("t={}, x={}", grp.label(t), g.label(x)));
            }
            if a.apply(t, g.inv(x)) != g.inv(tx) {
                rep.push_capped("automorphism", "inverse not preserved", format!("t={}, x={}", grp.label(t), g.label(x)));
            }
        }
        for (x, y) in g.composable_pairs() {
            if g.comp(a.apply(t, x), a.apply(t, y)) != Some(a.apply(t, g.mul(x, y))) {
                rep.push_capped(
                    "automorphism",
                    "composition not preserved",
                    format!("t={}, ({}, {})", grp.label(t), g.label(x), g.label(y)),
                );
            }
        }
    }
    rep.record("automorphism", grp.order() * g.n_arrows(), 0.0);
    for x in g.arrows() {
        if a.apply(grp.identity, x) != x {
            rep.push_capped("identity", "identity element moves an arrow", g.label(x).to_string());
        }
    }
    rep.record("identity", g.n_arrows(), 0.0);
    for s in grp.elements() {
        for t in grp.elements() {
            for x in g.arrows() {
                let (lhs, st) = match a.side {
                    Side::Left => (a.apply(s, a.apply(t, x)), grp.mul(s, t)),
                    Side::Right => (a.apply(t, a.apply(s, x)), grp.mul(s, t)),
                };
                if lhs != a.apply(st, x) {
                    rep.push_capped(
                        "group-law",
                        "composite action disagrees with action of product",
                        format!("s={}, t={}, x={}", grp.label(s), grp.label(t), g.label(x)),
                    );
                }
            }
        }
    }
    rep.record("group-law", grp.order() * grp.order() * g.n_arrows(), 0.0);
    rep.note("properness", "vacuous for finite spaces");
    rep
}

/// A pair `(t, x)` with `t ≠ e` fixing `x`, if any.
pub fn free_witness(a: &GroupAction) -> Option<(usize, Arrow)> {
    let e = a.group.identity;
    a.group
        .elements()
        .filter(|&t| t != e)
        .flat_map(|t| a.target.arrows().map(move |x| (t, x)))
        .find(|&(t, x)| a.apply(t, x) == x)
}

pub fn is_free(a: &GroupAction) -> bool {
    free_witness(a).is_none()
}

pub(crate) fn require_free(a: &GroupAction) -> Result<()> {
    match free_witness(a) {
        None => Ok(()),
        Some((t, x)) => Err(Error::NotFree {
            witness: format!("{} fixes {}", a.group.label(t), a.target.label(x)),
        }),
    }
}

/// `(t, x, k)` with `(t·x)·k ≠ t·(x·k)`, if any.
pub(crate) fn commute_witness(g: &GroupAction, h: &GroupAction) -> Option<(usize, Arrow, usize)> {
    for t in g.group.elements() {
        for k in h.group.elements() {
            for x in g.target.arrows() {
                if h.apply(k, g.apply(t, x)) != g.apply(t, h.apply(k, x)) {
                    return Some((t, x, k));
                }
            }
        }
    }
    None
}

/// A groupoid acting on a finite set through a fibring map.
///
/// Left: `x·u` is defined iff `src(x) == fibring(u)` and lands in the fiber
/// over `rng(x)`. Right: `u·x` is defined iff `fibring(u) == rng(x)` and lands
/// over `src(x)`. `table[x * n_points + u]` stores the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceAction {
    pub groupoid: FiniteGroupoid,
    pub point_labels: Vec<String>,
    pub fibring: Vec<Unit>,
    pub side: Side,
    pub table: Vec<Option<usize>>,
}

impl SpaceAction {
    pub fn n_points(&self) -> usize {
        self.point_labels.len()
    }

    pub fn defined(&self, x: Arrow, u: usize) -> bool {
        match self.side {
            Side::Left => self.groupoid.src(x) == self.fibring[u],
            Side::Right => self.groupoid.rng(x) == self.fibring[u],
        }
    }

    #[inline]
    pub fn act(&self, x: Arrow, u: usize) -> Option<usize> {
        self.table[x.0 * self.n_points() + u]
    }

    /// Builds and validates an action, evaluating `f` on defined pairs only.
    pub fn from_fn(
        groupoid: FiniteGroupoid,
        point_labels: Vec<String>,
        fibring: Vec<Unit>,
        side: Side,
        f: impl Fn(Arrow, usize) -> usize,
    ) -> Result<Self> {
        let a = Self::from_fn_unchecked(groupoid, point_labels, fibring, side, f);
        let rep = check_space_action(&a);
        if rep.is_ok() {
            Ok(a)
        } else {
            Err(Error::InvalidAction(rep))
        }
    }

    pub(crate) fn from_fn_unchecked(
        groupoid: FiniteGroupoid,
        point_labels: Vec<String>,
        fibring: Vec<Unit>,
        side: Side,
        mut f: impl FnMut(Arrow, usize) -> usize,
    ) -> Self {
        let n = point_labels.len();
        let mut a = SpaceAction {
            groupoid,
            point_labels,
            fibring,
            side,
            table: Vec::new(),
        };
        let mut table = vec![None; a.groupoid.n_arrows() * n];
        for x in a.groupoid.arrows() {
            for u in 0..n {
                if a.defined(x, u) {
                    table[x.0 * n + u] = Some(f(x, u));
                }
            }
        }
        a.table = table;
        a
    }

    /// A group acting on a set, as a one-unit groupoid action.
    pub fn group_on_set(
        group: &FiniteGroup,
        point_labels: Vec<String>,
        side: Side,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let n = point_labels.len();
        Self::from_fn(group.groupoid.clone(), point_labels, vec![Unit(0); n], side, |x, u| f(x.0, u))
    }

    /// A group acting on the arrows of `x` through an action by automorphisms.
    pub fn group_on_arrows(a: &GroupAction) -> Self {
        let labels = a.target.arrow_labels.clone();
        Self::group_on_set(&a.group, labels, a.side, |t, y| a.apply(t, Arrow(y)).0)
            .expect("automorphism actions restrict to actions on arrows")
    }

    /// Left translation of `x` on its own arrows, fibred by the range map.
    pub fn left_translation(x: &FiniteGroupoid) -> Self {
        Self::from_fn_unchecked(
            x.clone(),
            x.arrow_labels.clone(),
            x.rng.clone(),
            Side::Left,
            |a, b| x.mul(a, Arrow(b)).0,
        )
    }

    /// Right translation of `x` on its own arrows, fibred by the source map.
    pub fn right_translation(x: &FiniteGroupoid) -> Self {
        Self::from_fn_unchecked(
            x.clone(),
            x.arrow_labels.clone(),
            x.src.clone(),
            Side::Right,
            |a, b| x.mul(Arrow(b), a).0,
        )
    }

    /// `p ≠ unit` with `p·u = u`, if any.
    pub fn free_witness(&self) -> Option<(Arrow, usize)> {
        for x in self.groupoid.arrows() {
            if self.groupoid.is_unit_arrow(x) {
                continue;
            }
            for u in 0..self.n_points() {
                if self.act(x, u) == Some(u) {
                    return Some((x, u));
                }
            }
        }
        None
    }

    pub fn is_free(&self) -> bool {
        self.free_witness().is_none()
    }
}

/// Checks the groupoid-action axioms exhaustively.
pub fn check_space_action(a: &SpaceAction) -> ValidationReport {
    let mut rep = ValidationReport::new(format!("{} groupoid action", a.side.name()));
    let g = &a.groupoid;
    let n = a.n_points();
    if a.fibring.len() != n || a.table.len() != g.n_arrows() * n || a.fibring.iter().any(|u| u.0 >= g.n_units()) {
        rep.fail("tables", "action table has wrong shape", "");
        return rep;
    }
    for x in g.arrows() {
        for u in 0..n {
            let v = a.act(x, u);
            match (a.defined(x, u), v) {
                (true, None) => rep.push_capped("defined", "action undefined on a fibred pair", format!("({}, {})", g.label(x), a.point_labels[u])),
                (false, Some(_)) => rep.push_capped("defined", "action defined off the fibring condition", format!("({}, {})", g.label(x), a.point_labels[u])),
                (true, Some(v)) => {
                    let expected = match a.side {
                        Side::Left => g.rng(x),
                        Side::Right => g.src(x),
                    };
                    if v >= n || a.fibring[v] != expected {
                        rep.push_capped("fibring", "result lies over the wrong unit", format!("({}, {})", g.label(x), a.point_labels[u]));
                    }
                }
                (false, None) => {}
            }
        }
    }
    rep.record("defined", g.n_arrows() * n, 0.0);
    if !rep.is_ok() {
        return rep;
    }
    for u in 0..n {
        if a.act(g.unit_arrow(a.fibring[u]), u) != Some(u) {
            rep.push_capped("unit", "unit arrow moves a point", a.point_labels[u].clone());
        }
    }
    let mut cases = 0;
    for (x, y) in g.composable_pairs() {
        let xy = g.mul(x, y);
        for u in 0..n {
            let (lhs, rhs) = match a.side {
                Side::Left => {
                    if !a.defined(y, u) {
                        continue;
                    }
                    (a.act(xy, u), a.act(y, u).and_then(|v| a.act(x, v)))
                }
                Side::Right => {
                    if !a.defined(x, u) {
                        continue;
                    }
                    (a.act(xy, u), a.act(x, u).and_then(|v| a.act(y, v)))
                }
            };
            cases += 1;
            if lhs != rhs || lhs.is_none() {
                rep.push_capped(
                    "composition",
                    "action of a product disagrees with iterated action",
                    format!("({}, {}, {})", g.label(x), g.label(y), a.point_labels[u]),
                );
            }
        }
    }
    rep.record("composition", cases, 0.0);
    rep
}
