use super::FellBundle;
use crate::error::{Error, Result};
use crate::groupoid::{check_action, is_free, Arrow, FiniteGroup, GroupAction, Side};
use crate::linalg::{basis_vec, conj_matrix, identity, mat_vec, CMatrix, C64, DEFAULT_TOL};
use crate::report::ValidationReport;

/// A group acting on a Fell bundle by automorphisms covering an action on
/// the base. `maps[t][x]` is the linear map `A(x) → A(t·x)` (or `A(x·t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct BundleAction {
    pub bundle: FellBundle,
    pub base_action: GroupAction,
    pub maps: Vec<Vec<CMatrix>>,
}

impl BundleAction {
    pub fn from_fn(bundle: FellBundle, base_action: GroupAction, f: impl Fn(usize, Arrow) -> CMatrix) -> Result<Self> {
        let maps = base_action
            .group
            .elements()
            .map(|t| bundle.base.arrows().map(|x| f(t, x)).collect())
            .collect();
        let ba = BundleAction { bundle, base_action, maps };
        let rep = check_bundle_action(&ba, DEFAULT_TOL);
        if rep.is_ok() {
            Ok(ba)
        } else {
            Err(Error::InvalidBundle(rep))
        }
    }

    /// Identity fiber maps; valid whenever the base action preserves the
    /// structure constants, e.g. for line bundles.
    pub fn identity_maps(bundle: FellBundle, base_action: GroupAction) -> Result<Self> {
        let dims = bundle.dim.clone();
        Self::from_fn(bundle, base_action, |_, x| identity(dims[x.0]))
    }

    pub fn trivial(bundle: FellBundle, group: FiniteGroup, side: Side) -> Self {
        let base_action = GroupAction::trivial(group, bundle.base.clone(), side);
        let maps = vec![bundle.dim.iter().map(|&d| identity(d)).collect(); base_action.group.order()];
        BundleAction { bundle, base_action, maps }
    }

    pub fn side(&self) -> Side {
        self.base_action.side
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.base_action.group
    }

    #[inline]
    pub fn map(&self, t: usize, x: Arrow) -> &CMatrix {
        &self.maps[t][x.0]
    }

    /// `t·a` (or `a·t`) for `a ∈ A(x)`; lands over `apply(t, x)`.
    pub fn apply(&self, t: usize, x: Arrow, a: &[C64]) -> Vec<C64> {
        mat_vec(&self.maps[t][x.0], a)
    }

    /// The same action from the other side: `a·t := t⁻¹·a`.
    pub fn flipped(&self) -> BundleAction {
        let g = self.group();
        BundleAction {
            bundle: self.bundle.clone(),
            base_action: self.base_action.flipped(),
            maps: g.elements().map(|t| self.maps[g.inv(t)].clone()).collect(),
        }
    }
}

/// Checks that every element acts by a bundle automorphism (multiplicative,
/// \*-preserving, isometric in the fiber C\*-norms) and that the group law
/// and identity hold.
pub fn check_bundle_action(ba: &BundleAction, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new(format!("{} bundle action", ba.side().name()));
    let b = &ba.bundle;
    let g = &b.base;
    let act = &ba.base_action;
    if act.target != *g {
        rep.fail("tables", "base action is on a different groupoid", "");
        return rep;
    }
    let base = check_action(act);
    if !base.is_ok() {
        rep.merge(base);
        return rep;
    }
    let grp = &act.group;
    if ba.maps.len() != grp.order() {
        rep.fail("tables", "one row of fiber maps per group element is required", "");
        return rep;
    }
    for t in grp.elements() {
        for x in g.arrows() {
            let m = &ba.maps[t][x.0];
            if ba.maps[t].len() != g.n_arrows() || m.nrows() != b.dim(act.apply(t, x)) || m.ncols() != b.dim(x) {
                rep.fail("tables", "fiber map has wrong shape", format!("t={}, x={}", grp.label(t), g.label(x)));
                return rep;
            }
        }
    }
    rep.record("equivariance", grp.order() * g.n_arrows(), 0.0);

    let mut worst: f64 = 0.0;
    for t in grp.elements() {
        for (x, y) in g.composable_pairs() {
            let (tx, ty) = (act.apply(t, x), act.apply(t, y));
            let lhs = ba.maps[t][g.mul(x, y).0].clone();
            let tensor = b.mult(x, y);
            let tensor_t = b.mult(tx, ty);
            let mut res: f64 = 0.0;
            for i in 0..b.dim(x) {
                let mi = ba.apply(t, x, &basis_vec(b.dim(x), i));
                for j in 0..b.dim(y) {
                    let mj = ba.apply(t, y, &basis_vec(b.dim(y), j));
                    let l = mat_vec(&lhs, &tensor.basis_image(i, j));
                    let r = tensor_t.apply(&mi, &mj);
                    res = res.max(crate::linalg::max_abs_diff(&l, &r));
                }
            }
            worst = worst.max(res);
            if res > tol {
                rep.push_capped(
                    "multiplicative",
                    format!("t·(ab) != (t·a)(t·b), residual {res:.3e}"),
                    format!("t={}, ({}, {})", grp.label(t), g.label(x), g.label(y)),
                );
            }
        }
    }
    rep.record("multiplicative", grp.order(), worst);

    let mut worst: f64 = 0.0;
    for t in grp.elements() {
        for x in g.arrows() {
            let xi = g.inv(x);
            let tx = act.apply(t, x);
            let lhs = &ba.maps[t][xi.0] * b.star_matrix(x);
            let rhs = b.star_matrix(tx) * conj_matrix(&ba.maps[t][x.0]);
            let res = (lhs - rhs).camax();
            worst = worst.max(res);
            if res > tol {
                rep.push_capped("star", format!("t·a* != (t·a)*, residual {res:.3e}"), format!("t={}, x={}", grp.label(t), g.label(x)));
            }
        }
    }
    rep.record("star", grp.order() * g.n_arrows(), worst);

    let mut worst: f64 = 0.0;
    for x in g.arrows() {
        let res = (&ba.maps[grp.identity][x.0] - identity(b.dim(x))).camax();
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("identity", "identity element acts nontrivially", g.label(x).to_string());
        }
    }
    rep.record("identity", g.n_arrows(), worst);

    let mut worst: f64 = 0.0;
    for s in grp.elements() {
        for t in grp.elements() {
            let st = grp.mul(s, t);
            for x in g.arrows() {
                // Left: s·(t·a) = (st)·a. Right: (a·s)·t = a·(st).
                let composite = match act.side {
                    Side::Left => &ba.maps[s][act.apply(t, x).0] * &ba.maps[t][x.0],
                    Side::Right => &ba.maps[t][act.apply(s, x).0] * &ba.maps[s][x.0],
                };
                let res = (composite - &ba.maps[st][x.0]).camax();
                worst = worst.max(res);
                if res > tol {
                    rep.push_capped(
                        "group-law",
                        format!("composite fiber map disagrees, residual {res:.3e}"),
                        format!("s={}, t={}, x={}", grp.label(s), grp.label(t), g.label(x)),
                    );
                }
            }
        }
    }
    rep.record("group-law", grp.order() * grp.order() * g.n_arrows(), worst);

    let mut worst: f64 = 0.0;
    for t in grp.elements() {
        for x in g.arrows() {
            let tx = act.apply(t, x);
            for i in 0..b.dim(x) {
                let e = basis_vec(b.dim(x), i);
                let res = (b.fiber_norm(tx, &ba.apply(t, x, &e)) - b.fiber_norm(x, &e)).abs();
                worst = worst.max(res);
                if res > tol.max(1e-7) {
                    rep.push_capped("isometric", format!("norm changed by {res:.3e}"), format!("t={}, x={}, basis {i}", grp.label(t), g.label(x)));
                }
            }
        }
    }
    rep.record("isometric", grp.order() * g.n_arrows(), worst);
    rep.note("isometric", "norms are spectral radii of a*a in the unit fibers");
    rep
}

/// Freeness of a bundle action means freeness of the base action.
pub fn is_free_bundle_action(ba: &BundleAction) -> bool {
    is_free(&ba.base_action)
}

/// Fiber-level commutation `(t·a)·k = t·(a·k)`; returns a witness on failure.
pub(crate) fn bundle_commute_witness(g: &BundleAction, h: &BundleAction, tol: f64) -> Option<String> {
    if let Some((t, x, k)) = crate::groupoid::commute_witness(&g.base_action, &h.base_action) {
        return Some(format!("base: t={}, x={}, k={}", g.group().label(t), g.bundle.base.label(x), h.group().label(k)));
    }
    for t in g.group().elements() {
        for k in h.group().elements() {
            for x in g.bundle.base.arrows() {
                let lhs = h.map(k, g.base_action.apply(t, x)) * g.map(t, x);
                let rhs = g.map(t, h.base_action.apply(k, x)) * h.map(k, x);
                if (lhs - rhs).camax() > tol {
                    return Some(format!("fiber: t={}, x={}, k={}", g.group().label(t), g.bundle.base.label(x), h.group().label(k)));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;
    use crate::linalg::ONE;

    #[test]
    fn trivial_group_action_is_valid_and_free() {
        let b = FellBundle::line(FiniteGroupoid::pair(2).unwrap());
        let ba = BundleAction::trivial(b, FiniteGroup::trivial(), Side::Left);
        assert!(check_bundle_action(&ba, DEFAULT_TOL).is_ok());
        assert!(is_free_bundle_action(&ba));
    }

    #[test]
    fn swap_on_line_bundle_is_equivariant() {
        let x = FiniteGroupoid::pair(4).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let act = GroupAction::from_unit_permutations(z2, x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let ba = BundleAction::identity_maps(FellBundle::line(x), act).unwrap();
        assert!(is_free_bundle_action(&ba));
        for t in ba.group().elements() {
            for x in ba.bundle.base.arrows() {
                let y = ba.base_action.apply(t, x);
                assert_eq!(ba.apply(t, x, &[ONE]).len(), ba.bundle.dim(y));
            }
        }
    }

    #[test]
    fn non_multiplicative_maps_rejected() {
        let x = FiniteGroupoid::pair(2).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let act = GroupAction::trivial(z2, x.clone(), Side::Left);
        let err = BundleAction::from_fn(FellBundle::line(x), act, |t, _| {
            CMatrix::from_element(1, 1, if t == 0 { ONE } else { -ONE })
        });
        assert!(err.is_err());
    }
}
