//! Linking algebras of bundle equivalences and Morita certificates, with the
//! standard equivalence scenarios built on them.

mod linking;

pub use linking::{linking_system, verify_morita, Block, CornerSummary, Identification, LinkingSystem, MoritaCertificate, Verdict};

use crate::error::{Error, Result};
use crate::fell::{
    make_trivial_cbundle, one_sided_equivalence, one_sided_transformation_equivalence, semidirect_fell_bundle_right,
    symmetric_action_equivalence, transformation_fell_bundle, BundleAction, BundleEquivalence, FellBundle,
    SymmetricBundleEquivalence,
};
use crate::groupoid::{Arrow, FiniteGroup, GroupAction, Semidirect, Side, SpaceAction, Transformation, Unit};
use crate::linalg::{CMatrix, C64, ONE};
use crate::star::{
    algebra_crossed_product, check_star_homomorphism, crossed_product, induced_action, induced_algebra, section_action,
    section_algebra, star_structure_report, StarAlgebra,
};

/// Builds the linking system of a verified equivalence and certifies it.
pub fn certify(e: &BundleEquivalence, scenario: &str, tol: f64, seed: u64) -> Result<(LinkingSystem, MoritaCertificate)> {
    let ls = linking_system(e, tol)?;
    let cert = verify_morita(&ls, scenario, tol, seed);
    Ok((ls, cert))
}

/// The map from sections of a semidirect bundle `𝒜⋊G` (or `G⋉𝒜`) to
/// `C*(𝒜)⋊G` sending the fiber over `(y, s)` to `twist_s(A(y))·u_s`.
pub(crate) fn crossed_iso(sd: &Semidirect, sd_bundle: &FellBundle, base: &FellBundle, twist: Option<&[CMatrix]>) -> CMatrix {
    let n = base.total_dim();
    let off = base.offsets();
    let sd_off = sd_bundle.offsets();
    let mut m = CMatrix::zeros(n * sd.group_order, sd_bundle.total_dim());
    for p in sd_bundle.base.arrows() {
        let (y, s) = sd.split(p);
        for i in 0..sd_bundle.dim(p) {
            let col = sd_off[p.0] + i;
            match twist {
                None => m[(s * n + off[y.0] + i, col)] = ONE,
                Some(tw) => {
                    for k in 0..n {
                        m[(s * n + k, col)] = tw[s][(k, off[y.0] + i)];
                    }
                }
            }
        }
    }
    m
}

fn identity_iso(a: &StarAlgebra, b: &StarAlgebra, tol: f64) -> crate::report::ValidationReport {
    let m = CMatrix::identity(b.dim(), a.dim());
    check_star_homomorphism(a, b, &m, true, tol)
}

/// `C*(𝒜/H)⋊_α G ∼ C*(G\𝒜)⋊_β H`, with both corners identified with
/// crossed products computed from the actions on the section algebras.
pub fn symmetric_morita(g: &BundleAction, h: &BundleAction, tol: f64, seed: u64) -> Result<MoritaCertificate> {
    symmetric_parts(g, h, tol, seed).map(|(_, c)| c)
}

fn symmetric_parts(g: &BundleAction, h: &BundleAction, tol: f64, seed: u64) -> Result<(SymmetricBundleEquivalence, MoritaCertificate)> {
    let s = symmetric_action_equivalence(g, h)?;
    let (ls, mut cert) = certify(&s.equivalence, "symmetric", tol, seed)?;

    let half = &s.left_half;
    let cp = crossed_product(&half.quotient.bundle, &half.induced)?;
    cert.identify("left corner = C*(A/H) x G (bundle)", &identity_iso(&ls.left_corner, &cp, tol));
    let alpha = section_action(&half.induced)?;
    let ar = algebra_crossed_product(&section_algebra(&half.quotient.bundle), g.group(), &alpha);
    let iso = crossed_iso(&half.semidirect, &half.bundle, &half.quotient.bundle, None);
    cert.identify("left corner = C*(A/H) x G (action)", &check_star_homomorphism(&ls.left_corner, &ar, &iso, true, tol));

    let (qsd, qbundle) = semidirect_fell_bundle_right(&s.induced_h)?;
    cert.identify("right corner = H x C*(G\\A) (bundle)", &identity_iso(&ls.right_corner, &section_algebra(&qbundle), tol));
    let beta = section_action(&s.induced_h.flipped())?;
    let br = algebra_crossed_product(&section_algebra(&s.quotient_g.bundle), h.group(), &beta);
    let iso = crossed_iso(&qsd, &qbundle, &s.quotient_g.bundle, Some(&beta));
    cert.identify("right corner = C*(G\\A) x H (action)", &check_star_homomorphism(&ls.right_corner, &br, &iso, true, tol));
    Ok((s, cert))
}

/// `C*(𝒜)⋊_α G ∼ C*(G\𝒜)` for a free action.
pub fn one_sided_morita(g: &BundleAction, tol: f64, seed: u64) -> Result<MoritaCertificate> {
    let o = one_sided_equivalence(g)?;
    let (ls, mut cert) = certify(&o.equivalence, "one-sided", tol, seed)?;
    let alpha = section_action(g)?;
    let ar = algebra_crossed_product(&section_algebra(&g.bundle), g.group(), &alpha);
    let iso = crossed_iso(&o.semidirect, &o.equivalence.left.bundle, &g.bundle, None);
    cert.identify("left corner = C*(A) x G", &check_star_homomorphism(&ls.left_corner, &ar, &iso, true, tol));
    cert.identify("right corner = C*(G\\A)", &identity_iso(&ls.right_corner, &section_algebra(&o.quotient.bundle), tol));
    Ok(cert)
}

/// `C*(𝔅∗Ω)⋊_α G ∼ C*(𝔅)` for the principal-bundle data of
/// [`one_sided_transformation_equivalence`].
pub fn one_sided_transformation_morita(
    b: &FellBundle,
    act: &SpaceAction,
    group: &FiniteGroup,
    gact: &SpaceAction,
    tol: f64,
    seed: u64,
) -> Result<MoritaCertificate> {
    let t = one_sided_transformation_equivalence(b, act, group, gact)?;
    let (ls, mut cert) = certify(&t.equivalence, "one-sided transformation", tol, seed)?;
    let alpha = section_action(&t.group_action)?;
    let ar = algebra_crossed_product(&section_algebra(&t.transformation_bundle), group, &alpha);
    let iso = crossed_iso(&t.semidirect, &t.equivalence.left.bundle, &t.transformation_bundle, None);
    cert.identify("left corner = C*(B*Omega) x G", &check_star_homomorphism(&ls.left_corner, &ar, &iso, true, tol));
    cert.identify("right corner = C*(B)", &identity_iso(&ls.right_corner, &section_algebra(b), tol));
    Ok(cert)
}

fn fiber_algebra(a: &FellBundle, u: Unit) -> StarAlgebra {
    let (t, s) = a.unit_fiber(u);
    let labels = (0..t.out).map(|i| format!("{}#{}", a.base.unit_label(u), i)).collect();
    StarAlgebra::from_tensor(labels, &t, s, format!("fiber at {}", a.base.unit_label(u)))
}

/// `Γ₀(𝒜)⋊_α G ∼ Γ₀(G\𝒜)` for a C\*-bundle over a finite set.
pub fn cstar_bundle_morita(g: &BundleAction, tol: f64, seed: u64) -> Result<MoritaCertificate> {
    let a = &g.bundle;
    if a.base.n_arrows() != a.base.n_units() {
        return Err(Error::Precondition("the base of a C*-bundle must be a set".into()));
    }
    let fibers: Vec<StarAlgebra> = a.base.units().map(|u| fiber_algebra(a, u)).collect();
    for f in &fibers {
        let r = star_structure_report(f, tol, seed);
        if !r.is_cstar {
            return Err(Error::NotCStar(format!("{} has radical dimension {}", f.provenance, r.radical_dim)));
        }
    }
    let mut cert = one_sided_morita(g, tol, seed)?;
    cert.scenario = "C*-bundle".into();
    // Units are the arrows of a set, in order, so sections are pointwise.
    let pointwise = StarAlgebra::direct_sum(&fibers);
    cert.identify("sections are pointwise", &identity_iso(&section_algebra(a), &pointwise, tol));
    Ok(cert)
}

/// Input of the Raeburn scenario: commuting free actions `left[t][x] = t·x`
/// and `right[h][x] = x·h` on a set, and commuting actions `σ`, `τ` of the
/// two groups on `B` by \*-automorphisms.
#[derive(Debug, Clone)]
pub struct RaeburnData {
    pub points: Vec<String>,
    pub g: FiniteGroup,
    pub left: Vec<Vec<usize>>,
    pub h: FiniteGroup,
    pub right: Vec<Vec<usize>>,
    pub b: StarAlgebra,
    pub sigma: Vec<CMatrix>,
    pub tau: Vec<CMatrix>,
}

fn intertwining_residual(theta: &CMatrix, src_action: &[CMatrix], dst_action: &[CMatrix]) -> f64 {
    src_action
        .iter()
        .zip(dst_action)
        .map(|(s, d)| (theta * s - d * theta).camax())
        .fold(0.0, f64::max)
}

/// The diagonal actions `t·(b, x) = (σ_t(b), t·x)` and
/// `(b, x)·h = (τ_h⁻¹(b), x·h)` on `B × X`.
pub fn raeburn_actions(d: &RaeburnData, tol: f64) -> Result<(BundleAction, BundleAction)> {
    let n = d.points.len();
    for t in d.g.elements() {
        for h in d.h.elements() {
            if (&d.sigma[t] * &d.tau[h] - &d.tau[h] * &d.sigma[t]).camax() > tol {
                return Err(Error::NotCommuting { witness: format!("σ_{} and τ_{}", d.g.label(t), d.h.label(h)) });
            }
            for x in 0..n {
                if d.right[h][d.left[t][x]] != d.left[t][d.right[h][x]] {
                    return Err(Error::NotCommuting { witness: format!("t={}, h={}, x={}", d.g.label(t), d.h.label(h), d.points[x]) });
                }
            }
        }
    }
    let bundle = make_trivial_cbundle(&d.b, d.points.clone(), tol)?;
    let gact = GroupAction::from_fn(d.g.clone(), bundle.base.clone(), Side::Left, |t, x| Arrow(d.left[t][x.0]))?;
    let hact = GroupAction::from_fn(d.h.clone(), bundle.base.clone(), Side::Right, |h, x| Arrow(d.right[h][x.0]))?;
    let g_ba = BundleAction::from_fn(bundle.clone(), gact, |t, _| d.sigma[t].clone())?;
    let h_ba = BundleAction::from_fn(bundle, hact, |h, _| d.tau[d.h.inv(h)].clone())?;
    Ok((g_ba, h_ba))
}

/// `Ind_H^X B ⋊_{ind σ} G ∼ Ind_G^X B ⋊_{ind τ} H`, via the diagonal actions
/// on `B × X` and the identifications `θ` of induced algebras with section
/// algebras of orbit bundles.
pub fn raeburn(d: &RaeburnData, tol: f64, seed: u64) -> Result<MoritaCertificate> {
    let (g_ba, h_ba) = raeburn_actions(d, tol)?;
    let (s, mut cert) = symmetric_parts(&g_ba, &h_ba, tol, seed)?;
    cert.scenario = "raeburn".into();

    let ind_h = induced_algebra(&d.b, d.points.clone(), &d.h, &d.right, &d.tau, tol)?;
    cert.identify("theta: Ind_H B = C*((B x X)/H)", &ind_h.report);
    cert.identify_with("orbit bundle (B x X)/H", ind_h.quotient.bundle == s.left_half.quotient.bundle, "same structure constants");
    let ind_sigma = induced_action(&ind_h, &d.g, &d.left, &d.sigma, tol)?;
    let alpha = section_action(&s.left_half.induced)?;
    let res = intertwining_residual(&ind_h.theta, &ind_sigma, &alpha);
    cert.identify_with("theta intertwines ind sigma", res <= tol, format!("residual {res:.3e}"));

    let flipped_left: Vec<Vec<usize>> = d.g.elements().map(|t| d.left[d.g.inv(t)].clone()).collect();
    let ind_g = induced_algebra(&d.b, d.points.clone(), &d.g, &flipped_left, &d.sigma, tol)?;
    cert.identify("theta: Ind_G B = C*(G\\(B x X))", &ind_g.report);
    cert.identify_with("orbit bundle G\\(B x X)", ind_g.quotient.bundle == s.quotient_g.bundle, "same structure constants");
    let h_as_left: Vec<Vec<usize>> = d.h.elements().map(|h| d.right[d.h.inv(h)].clone()).collect();
    let ind_tau = induced_action(&ind_g, &d.h, &h_as_left, &d.tau, tol)?;
    let beta = section_action(&s.induced_h.flipped())?;
    let res = intertwining_residual(&ind_g.theta, &ind_tau, &beta);
    cert.identify_with("theta intertwines ind tau", res <= tol, format!("residual {res:.3e}"));
    Ok(cert)
}

/// `𝔅∗G` over `G ×_lt G` with the free action `r·(b, s) = (b, s r⁻¹)`.
pub fn coaction_action(b: &FellBundle) -> Result<(Transformation, BundleAction)> {
    if b.base.n_units() != 1 {
        return Err(Error::Precondition("the base of the bundle must be a group".into()));
    }
    let group = FiniteGroup { groupoid: b.base.clone(), identity: b.base.unit_arrow(Unit(0)).0 };
    let labels = b.base.arrow_labels.clone();
    let lt = SpaceAction::group_on_set(&group, labels, Side::Left, |s, u| group.mul(s, u))?;
    let (t, a) = transformation_fell_bundle(b, &lt)?;
    let gact = GroupAction::from_fn(group.clone(), t.groupoid.clone(), Side::Left, |r, p| {
        let (x, u) = t.pairs[p.0];
        t.arrow(x, group.mul(u, group.inv(r))).expect("right translation preserves the fibration")
    })?;
    let ba = BundleAction::identity_maps(a, gact)?;
    Ok((t, ba))
}

/// The finite form of `C*(𝔅)⋊_δ G⋊_δ̂ G ∼ C*(𝔅)`: `𝒜 = 𝔅∗G` over
/// `G ×_lt G` with `t·(b, s) = (b, st⁻¹)`, and `G\𝒜` identified with `𝔅`.
pub fn coaction_demo(b: &FellBundle, tol: f64, seed: u64) -> Result<MoritaCertificate> {
    let (t, ba) = coaction_action(b)?;
    let mut cert = one_sided_morita(&ba, tol, seed)?;
    cert.scenario = "coaction".into();

    let o = one_sided_equivalence(&ba)?;
    let q = &o.quotient;
    let qalg = section_algebra(&q.bundle);
    let balg = section_algebra(b);
    let (qoff, boff) = (q.bundle.offsets(), b.offsets());
    let mut iso = CMatrix::zeros(balg.dim(), qalg.dim());
    for (c, &r) in q.quotient.rep.iter().enumerate() {
        let x = t.pairs[r.0].0;
        for i in 0..b.dim(x) {
            iso[(boff[x.0] + i, qoff[c] + i)] = C64::new(1.0, 0.0);
        }
    }
    cert.identify("orbit bundle G\\(B*G) = B", &check_star_homomorphism(&qalg, &balg, &iso, true, tol));
    Ok(cert)
}

#[cfg(test)]
mod tests;
