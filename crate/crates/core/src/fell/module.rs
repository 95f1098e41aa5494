use super::FellBundle;
use crate::groupoid::{check_space_action, Arrow, Side, SpaceAction};
use crate::linalg::{basis_vec, max_abs_diff, Tensor3, C64};
use crate::report::ValidationReport;

/// A Fell bundle acting on a fibered family of vector spaces `E(z)` over a
/// space on which its base groupoid acts.
///
/// Kept apart from [`FellBundle`] so that module actions are never confused
/// with bundle multiplication. For a left action `tensors[p * |Z| + z]` maps
/// `B(p) × E(z) → E(p·z)`; for a right action it maps `E(z) × B(q) → E(z·q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleAction {
    pub space: SpaceAction,
    pub bundle: FellBundle,
    pub fiber_dims: Vec<usize>,
    pub tensors: Vec<Option<Tensor3>>,
}

impl ModuleAction {
    pub fn side(&self) -> Side {
        self.space.side
    }

    pub fn n_points(&self) -> usize {
        self.space.n_points()
    }

    pub fn tensor(&self, p: Arrow, z: usize) -> Option<&Tensor3> {
        self.tensors[p.0 * self.n_points() + z].as_ref()
    }

    /// `b·e` (left) or `e·b` (right) for `b ∈ B(p)`, `e ∈ E(z)`.
    pub fn act(&self, p: Arrow, b: &[C64], z: usize, e: &[C64]) -> Option<(usize, Vec<C64>)> {
        let w = self.space.act(p, z)?;
        let t = self.tensor(p, z)?;
        let v = match self.side() {
            Side::Left => t.apply(b, e),
            Side::Right => t.apply(e, b),
        };
        Some((w, v))
    }

    pub(crate) fn build(
        space: SpaceAction,
        bundle: FellBundle,
        fiber_dims: Vec<usize>,
        mut f: impl FnMut(Arrow, usize) -> crate::error::Result<Tensor3>,
    ) -> crate::error::Result<Self> {
        let nz = space.n_points();
        let mut tensors = vec![None; space.groupoid.n_arrows() * nz];
        for p in space.groupoid.arrows() {
            for z in 0..nz {
                if space.act(p, z).is_some() {
                    tensors[p.0 * nz + z] = Some(f(p, z)?);
                }
            }
        }
        Ok(ModuleAction { space, bundle, fiber_dims, tensors })
    }
}

/// Checks shapes and the module law `(pp')·e = p·(p'·e)` (or its mirror)
/// on basis elements.
pub fn check_module_action(m: &ModuleAction, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new(format!("{} module action", m.side().name()));
    let space_rep = check_space_action(&m.space);
    if !space_rep.is_ok() {
        rep.merge(space_rep);
        return rep;
    }
    let g = &m.space.groupoid;
    let b = &m.bundle;
    let nz = m.n_points();
    if b.base != *g || m.fiber_dims.len() != nz || m.tensors.len() != g.n_arrows() * nz {
        rep.fail("tables", "module data do not match the space action", "");
        return rep;
    }
    for p in g.arrows() {
        for z in 0..nz {
            let expected = m.space.act(p, z).map(|w| match m.side() {
                Side::Left => (m.fiber_dims[w], b.dim(p), m.fiber_dims[z]),
                Side::Right => (m.fiber_dims[w], m.fiber_dims[z], b.dim(p)),
            });
            let got = m.tensor(p, z).map(|t| (t.out, t.left, t.right));
            if expected != got {
                rep.push_capped("tables", "module tensor missing or misshapen", format!("({}, {})", g.label(p), m.space.point_labels[z]));
            }
        }
    }
    if !rep.is_ok() {
        return rep;
    }
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (p1, p2) in g.composable_pairs() {
        let p12 = g.mul(p1, p2);
        let bm = b.mult(p1, p2);
        for z in 0..nz {
            let (first, second) = match m.side() {
                Side::Left => (p2, p1),
                Side::Right => (p1, p2),
            };
            let Some(w) = m.space.act(first, z) else { continue };
            cases += 1;
            let (t_first, t_second, t_prod) = (m.tensor(first, z).unwrap(), m.tensor(second, w).unwrap(), m.tensor(p12, z).unwrap());
            let mut res: f64 = 0.0;
            for i in 0..b.dim(p1) {
                for j in 0..b.dim(p2) {
                    let ab = bm.basis_image(i, j);
                    for k in 0..m.fiber_dims[z] {
                        let e = basis_vec(m.fiber_dims[z], k);
                        let (lhs, rhs) = match m.side() {
                            Side::Left => (
                                t_prod.apply(&ab, &e),
                                t_second.apply(&basis_vec(b.dim(p1), i), &t_first.apply(&basis_vec(b.dim(p2), j), &e)),
                            ),
                            Side::Right => (
                                t_prod.apply(&e, &ab),
                                t_second.apply(&t_first.apply(&e, &basis_vec(b.dim(p1), i)), &basis_vec(b.dim(p2), j)),
                            ),
                        };
                        res = res.max(max_abs_diff(&lhs, &rhs));
                    }
                }
            }
            worst = worst.max(res);
            if res > tol {
                rep.push_capped(
                    "module-law",
                    format!("iterated action disagrees with action of product, residual {res:.3e}"),
                    format!("({}, {}, {})", g.label(p1), g.label(p2), m.space.point_labels[z]),
                );
            }
        }
    }
    rep.record("module-law", cases, worst);
    rep
}
