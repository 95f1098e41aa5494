//! Finite groupoids with dense composition tables, group actions by
//! automorphisms, groupoid actions on finite sets, and the base-level
//! constructions built from them (transformation, semidirect and orbit
//! groupoids, groupoid equivalences, principal decompositions).

mod action;
mod construct;
mod equivalence;
mod group;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

pub use action::{check_action, check_space_action, free_witness, is_free, GroupAction, Side, SpaceAction};
pub use construct::{
    check_covariant, orbit_space_action, orbit_space_action_right, principal_decomposition,
    quotient_groupoid, semidirect_left, semidirect_right, semidirect_right_space_action,
    semidirect_space_action, transformation_groupoid, verify_principal_decomposition, verify_quotient,
    PrincipalDecomposition, Quotient, Semidirect, Transformation,
};
pub(crate) use action::{commute_witness, require_free};
pub(crate) use construct::unique;
pub use equivalence::{
    left_bracket, right_bracket, symmetric_groupoid_equivalence, verify_groupoid_equivalence,
    GroupoidEquivalence, SymmetricGroupoidEquivalence,
};
pub use group::{make_group, FiniteGroup};

/// Index of an arrow in a [`FiniteGroupoid`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow(pub usize);

/// Index of a unit (object) in a [`FiniteGroupoid`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Unit(pub usize);

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finite groupoid given by explicit tables.
///
/// `comp[x * n + y]` holds `x ∘ y` (first `y`, then `x`), which is defined
/// exactly when `src(x) == rng(y)`. Fields are public so that tests and the
/// model-file reader can build or corrupt tables directly; every constructor
/// in this crate produces tables that pass [`validate_groupoid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroupoid {
    pub arrow_labels: Vec<String>,
    pub unit_labels: Vec<String>,
    pub unit_arrow: Vec<Arrow>,
    pub src: Vec<Unit>,
    pub rng: Vec<Unit>,
    pub inv: Vec<Arrow>,
    pub comp: Vec<Option<Arrow>>,
}

impl FiniteGroupoid {
    pub fn n_arrows(&self) -> usize {
        self.src.len()
    }

    pub fn n_units(&self) -> usize {
        self.unit_arrow.len()
    }

    pub fn arrows(&self) -> impl Iterator<Item = Arrow> + Clone {
        (0..self.n_arrows()).map(Arrow)
    }

    pub fn units(&self) -> impl Iterator<Item = Unit> + Clone {
        (0..self.n_units()).map(Unit)
    }

    #[inline]
    pub fn src(&self, x: Arrow) -> Unit {
        self.src[x.0]
    }

    #[inline]
    pub fn rng(&self, x: Arrow) -> Unit {
        self.rng[x.0]
    }

    #[inline]
    pub fn inv(&self, x: Arrow) -> Arrow {
        self.inv[x.0]
    }

    #[inline]
    pub fn unit_arrow(&self, u: Unit) -> Arrow {
        self.unit_arrow[u.0]
    }

    /// `x ∘ y`, defined iff `src(x) == rng(y)`.
    #[inline]
    pub fn comp(&self, x: Arrow, y: Arrow) -> Option<Arrow> {
        self.comp[x.0 * self.n_arrows() + y.0]
    }

    pub fn composable(&self, x: Arrow, y: Arrow) -> bool {
        self.src(x) == self.rng(y)
    }

    /// Composition for pairs known to be composable.
    pub fn mul(&self, x: Arrow, y: Arrow) -> Arrow {
        self.comp(x, y).unwrap_or_else(|| {
            panic!(
                "composition {} ∘ {} undefined",
                self.label(x),
                self.label(y)
            )
        })
    }

    pub fn label(&self, x: Arrow) -> &str {
        &self.arrow_labels[x.0]
    }

    pub fn unit_label(&self, u: Unit) -> &str {
        &self.unit_labels[u.0]
    }

    /// The unit whose identity arrow is `x`, if `x` is an identity.
    pub fn as_unit(&self, x: Arrow) -> Option<Unit> {
        let u = self.src(x);
        (self.unit_arrow(u) == x).then_some(u)
    }

    pub fn is_unit_arrow(&self, x: Arrow) -> bool {
        self.as_unit(x).is_some()
    }

    /// `r⁻¹(u)`, the support of the counting Haar measure at `u`.
    pub fn range_fiber(&self, u: Unit) -> Vec<Arrow> {
        self.arrows().filter(|&x| self.rng(x) == u).collect()
    }

    pub fn composable_pairs(&self) -> impl Iterator<Item = (Arrow, Arrow)> + '_ {
        self.arrows()
            .flat_map(move |x| self.arrows().map(move |y| (x, y)))
            .filter(move |&(x, y)| self.composable(x, y))
    }

    pub fn arrow_by_label(&self, label: &str) -> Option<Arrow> {
        self.arrow_labels.iter().position(|l| l == label).map(Arrow)
    }

    pub fn unit_by_label(&self, label: &str) -> Option<Unit> {
        self.unit_labels.iter().position(|l| l == label).map(Unit)
    }

    /// Builds a groupoid from source/range/inverse data and a composition
    /// function evaluated on every composable pair. Unit arrows are given by
    /// `unit_arrow`. The result is validated.
    pub fn from_fn(
        arrow_labels: Vec<String>,
        unit_labels: Vec<String>,
        unit_arrow: Vec<Arrow>,
        src: Vec<Unit>,
        rng: Vec<Unit>,
        inv: Vec<Arrow>,
        mut comp: impl FnMut(Arrow, Arrow) -> Arrow,
    ) -> Result<Self> {
        let n = src.len();
        let mut table = vec![None; n * n];
        for x in 0..n {
            for y in 0..n {
                if src[x] == rng[y] {
                    table[x * n + y] = Some(comp(Arrow(x), Arrow(y)));
                }
            }
        }
        let g = FiniteGroupoid {
            arrow_labels,
            unit_labels,
            unit_arrow,
            src,
            rng,
            inv,
            comp: table,
        };
        let report = validate_groupoid(&g);
        if report.is_ok() {
            Ok(g)
        } else {
            Err(Error::InvalidGroupoid(report))
        }
    }

    /// The one-unit, one-arrow groupoid.
    pub fn trivial() -> Self {
        Self::unit_space(vec!["*".to_string()])
    }

    /// A space viewed as a groupoid consisting only of units.
    pub fn unit_space(labels: Vec<String>) -> Self {
        let n = labels.len();
        FiniteGroupoid {
            arrow_labels: labels.clone(),
            unit_labels: labels,
            unit_arrow: (0..n).map(Arrow).collect(),
            src: (0..n).map(Unit).collect(),
            rng: (0..n).map(Unit).collect(),
            inv: (0..n).map(Arrow).collect(),
            comp: (0..n * n)
                .map(|k| (k / n == k % n).then_some(Arrow(k / n)))
                .collect(),
        }
    }

    /// Pair groupoid on `n` points labelled `1..=n`: arrows `(i,j)` with
    /// range `i`, source `j`, and `(i,j)(j,k) = (i,k)`. Arrow `(i,j)` has
    /// index `(i-1) * n + (j-1)`.
    pub fn pair(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "pair groupoid needs at least one point".into(),
            ));
        }
        Self::equivalence_relation(n, |_, _| true)
    }

    /// The groupoid of an equivalence relation on `n` points given by a
    /// predicate. Arrows are the related pairs `(i,j)` in lexicographic order.
    pub fn equivalence_relation(n: usize, related: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || related(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        let index: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        let arrow_labels = pairs
            .iter()
            .map(|(i, j)| format!("({},{})", i + 1, j + 1))
            .collect();
        let unit_labels = (1..=n).map(|i| i.to_string()).collect();
        let unit_arrow = (0..n).map(|i| Arrow(index[&(i, i)])).collect();
        let src = pairs.iter().map(|p| Unit(p.1)).collect();
        let rng = pairs.iter().map(|p| Unit(p.0)).collect();
        let inv = pairs
            .iter()
            .map(|&(i, j)| {
                index
                    .get(&(j, i))
                    .map(|&k| Arrow(k))
                    .ok_or_else(|| Error::InvalidArgument("relation is not symmetric".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_fn(arrow_labels, unit_labels, unit_arrow, src, rng, inv, |x, y| {
            let (i, _) = pairs[x.0];
            let (_, k) = pairs[y.0];
            Arrow(*index.get(&(i, k)).expect("relation is transitive"))
        })
    }

    /// Direct product groupoid; arrow `(x, y)` has index `x * |b| + y`.
    pub fn product(a: &FiniteGroupoid, b: &FiniteGroupoid) -> Self {
        let nb = b.n_arrows();
        let nub = b.n_units();
        let idx = |x: Arrow, y: Arrow| Arrow(x.0 * nb + y.0);
        let uidx = |u: Unit, v: Unit| Unit(u.0 * nub + v.0);
        let mut arrow_labels = Vec::new();
        let mut src = Vec::new();
        let mut rng = Vec::new();
        let mut inv = Vec::new();
        for x in a.arrows() {
            for y in b.arrows() {
                arrow_labels.push(format!("({},{})", a.label(x), b.label(y)));
                src.push(uidx(a.src(x), b.src(y)));
                rng.push(uidx(a.rng(x), b.rng(y)));
                inv.push(idx(a.inv(x), b.inv(y)));
            }
        }
        let mut unit_labels = Vec::new();
        let mut unit_arrow = Vec::new();
        for u in a.units() {
            for v in b.units() {
                unit_labels.push(format!("({},{})", a.unit_label(u), b.unit_label(v)));
                unit_arrow.push(idx(a.unit_arrow(u), b.unit_arrow(v)));
            }
        }
        Self::from_fn(arrow_labels, unit_labels, unit_arrow, src, rng, inv, |p, q| {
            let (x1, y1) = (Arrow(p.0 / nb), Arrow(p.0 % nb));
            let (x2, y2) = (Arrow(q.0 / nb), Arrow(q.0 % nb));
            idx(a.mul(x1, x2), b.mul(y1, y2))
        })
        .expect("product of valid groupoids is valid")
    }
}

/// Checks every groupoid axiom exhaustively; the report is empty iff valid.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let mut rep = ValidationReport::new("groupoid");
    let n = g.n_arrows();
    let nu = g.n_units();
    if g.rng.len() != n || g.inv.len() != n || g.comp.len() != n * n || g.arrow_labels.len() != n {
        rep.fail("tables", "table sizes disagree with arrow count", format!("n={n}"));
        return rep;
    }
    if g.unit_labels.len() != nu {
        rep.fail("tables", "unit label count disagrees with unit count", format!("units={nu}"));
        return rep;
    }
    let in_range = g.src.iter().chain(&g.rng).all(|u| u.0 < nu)
        && g.inv.iter().chain(&g.unit_arrow).all(|x| x.0 < n)
        && g.comp.iter().flatten().all(|x| x.0 < n);
    if !in_range {
        rep.fail("tables", "index out of range", "");
        return rep;
    }

    for u in g.units() {
        let e = g.unit_arrow(u);
        if g.src(e) != u || g.rng(e) != u || g.inv(e) != e {
            rep.push_capped("unit", "identity arrow has wrong source/range/inverse", format!("unit {}", g.unit_label(u)));
        }
    }
    let mut cases = 0;
    for x in g.arrows() {
        for y in g.arrows() {
            cases += 1;
            let defined = g.comp(x, y);
            match (g.composable(x, y), defined) {
                (true, None) => rep.push_capped(
                    "composability",
                    "composable pair has no product",
                    format!("({}, {})", g.label(x), g.label(y)),
                ),
                (false, Some(_)) => rep.push_capped(
                    "composability",
                    "product defined for non-composable pair",
                    format!("({}, {})", g.label(x), g.label(y)),
                ),
                (true, Some(z)) => {
                    if g.rng(z) != g.rng(x) || g.src(z) != g.src(y) {
                        rep.push_capped(
                            "source-range",
                            "product has wrong source or range",
                            format!("({}, {}) -> {}", g.label(x), g.label(y), g.label(z)),
                        );
                    }
                }
                (false, None) => {}
            }
        }
    }
    rep.record("composability", cases, 0.0);
    rep.record("source-range", cases, 0.0);

    for x in g.arrows() {
        let ls = g.unit_arrow(g.src(x));
        let lr = g.unit_arrow(g.rng(x));
        if g.comp(x, ls) != Some(x) || g.comp(lr, x) != Some(x) {
            rep.push_capped("unit", "identity law fails", g.label(x).to_string());
        }
    }
    rep.record("unit", n, 0.0);

    let mut triples = 0;
    for x in g.arrows() {
        for y in g.arrows() {
            let Some(xy) = g.comp(x, y) else { continue };
            for z in g.arrows() {
                let Some(yz) = g.comp(y, z) else { continue };
                triples += 1;
                let left = g.comp(xy, z);
                let right = g.comp(x, yz);
                if left != right || left.is_none() {
                    rep.push_capped(
                        "associativity",
                        "(xy)z != x(yz)",
                        format!("({}, {}, {})", g.label(x), g.label(y), g.label(z)),
                    );
                }
            }
        }
    }
    rep.record("associativity", triples, 0.0);

    for x in g.arrows() {
        let xi = g.inv(x);
        let ok = g.inv(xi) == x
            && g.src(xi) == g.rng(x)
            && g.comp(x, xi) == Some(g.unit_arrow(g.rng(x)))
            && g.comp(xi, x) == Some(g.unit_arrow(g.src(x)));
        if !ok {
            rep.push_capped("inverse", "inverse law fails", g.label(x).to_string());
        }
    }
    rep.record("inverse", n, 0.0);
    rep
}

/// Checks that `map` (indexed by arrows of `src`) is a groupoid
/// homomorphism into `dst`; with `bijective` also checks it is an isomorphism.
pub fn check_homomorphism(
    src: &FiniteGroupoid,
    dst: &FiniteGroupoid,
    map: &[Arrow],
    bijective: bool,
) -> ValidationReport {
    let mut rep = ValidationReport::new("groupoid homomorphism");
    if map.len() != src.n_arrows() || map.iter().any(|y| y.0 >= dst.n_arrows()) {
        rep.fail("tables", "map has wrong length or targets", "");
        return rep;
    }
    for u in src.units() {
        if !dst.is_unit_arrow(map[src.unit_arrow(u).0]) {
            rep.push_capped("units", "unit not sent to a unit", src.unit_label(u).to_string());
        }
    }
    let mut cases = 0;
    for (x, y) in src.composable_pairs() {
        cases += 1;
        let (fx, fy) = (map[x.0], map[y.0]);
        if dst.comp(fx, fy) != Some(map[src.mul(x, y).0]) {
            rep.push_capped(
                "multiplicative",
                "f(x)f(y) != f(xy)",
                format!("({}, {})", src.label(x), src.label(y)),
            );
        }
    }
    rep.record("multiplicative", cases, 0.0);
    for x in src.arrows() {
        if dst.inv(map[x.0]) != map[src.inv(x).0] {
            rep.push_capped("inverse", "f(x⁻¹) != f(x)⁻¹", src.label(x).to_string());
        }
    }
    if bijective {
        let mut hit = vec![false; dst.n_arrows()];
        for y in map {
            hit[y.0] = true;
        }
        if src.n_arrows() != dst.n_arrows() || hit.iter().any(|h| !h) {
            rep.fail("bijective", "map is not a bijection", format!("{} -> {}", src.n_arrows(), dst.n_arrows()));
        }
    }
    rep
}
