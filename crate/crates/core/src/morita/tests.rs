use super::*;
use crate::groupoid::FiniteGroupoid;
use crate::linalg::{DEFAULT_TOL, ZERO};

fn z2() -> FiniteGroup {
    FiniteGroup::cyclic(2).unwrap()
}

fn four_point() -> (BundleAction, BundleAction) {
    let x = FiniteGroupoid::pair(4).unwrap();
    let g = GroupAction::from_unit_permutations(z2(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]]).unwrap();
    let h = GroupAction::from_unit_permutations(z2(), x.clone(), Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
    let b = FellBundle::line(x);
    (BundleAction::identity_maps(b.clone(), g).unwrap(), BundleAction::identity_maps(b, h).unwrap())
}

fn swap2() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

#[test]
fn four_point_symmetric_certificate() {
    let (g, h) = four_point();
    let cert = symmetric_morita(&g, &h, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent(), "{}", cert.render());
    // Both corners are Morita equivalent to M4 ⋊ (Z/2 × Z/2) with inner
    // actions, i.e. to four copies of M4; each corner is 16-dimensional.
    assert_eq!(cert.left.structure.blocks, vec![2, 2, 2, 2]);
    assert_eq!(cert.right.structure.blocks, vec![2, 2, 2, 2]);
    assert!(cert.identifications.iter().all(|i| i.passed));
}

#[test]
fn linking_groupoid_size() {
    let (g, h) = four_point();
    let s = symmetric_action_equivalence(&g, &h).unwrap();
    let ls = linking_system(&s.equivalence, DEFAULT_TOL).unwrap();
    let e = &s.equivalence;
    assert_eq!(ls.groupoid.n_arrows(), e.left.bundle.base.n_arrows() + e.right.bundle.base.n_arrows() + 2 * e.n_points());
    assert!(ls.report.is_ok(), "{}", ls.report);
}

#[test]
fn trivial_groups_give_equal_algebras() {
    let x = FiniteGroupoid::pair(2).unwrap();
    let b = FellBundle::line(x);
    let g = BundleAction::trivial(b.clone(), FiniteGroup::trivial(), Side::Left);
    let h = BundleAction::trivial(b, FiniteGroup::trivial(), Side::Right);
    let cert = symmetric_morita(&g, &h, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent());
    assert_eq!(cert.left.structure.blocks, vec![2]);
    assert_eq!(cert.right.structure.blocks, vec![2]);
}

#[test]
fn zeroed_inner_products_lose_fullness() {
    let (g, h) = four_point();
    let s = symmetric_action_equivalence(&g, &h).unwrap();
    let ls = linking_system(&s.equivalence, DEFAULT_TOL).unwrap().with_zeroed_inner_products(DEFAULT_TOL).unwrap();
    let cert = verify_morita(&ls, "zeroed", DEFAULT_TOL, 0);
    assert_eq!(cert.left.fullness_rank, 0);
    assert!(!cert.left.is_full() && !cert.right.is_full());
    assert_eq!(cert.verdict, Verdict::NotCertified);
}

#[test]
fn one_sided_four_point() {
    let (g, _) = four_point();
    let cert = one_sided_morita(&g, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent(), "{}", cert.render());
    // M4 ⋊ Z/2 by an inner action is M4 ⊕ M4; G\pair(4) is pair(2) × Z/2.
    assert_eq!(cert.left.structure.blocks, vec![4, 4]);
    assert_eq!(cert.right.structure.blocks, vec![2, 2]);
}

#[test]
fn one_sided_transformation_z2() {
    let g = z2();
    let b = FellBundle::line(g.groupoid.clone());
    let pts = vec!["0".to_string(), "1".to_string()];
    let act = SpaceAction::group_on_set(&g, pts.clone(), Side::Left, |s, u| (s + u) % 2).unwrap();
    let gact = SpaceAction::group_on_set(&g, pts, Side::Left, |t, u| (t + u) % 2).unwrap();
    let cert = one_sided_transformation_morita(&b, &act, &g, &gact, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent(), "{}", cert.render());
    assert_eq!(cert.right.structure.blocks, vec![1, 1]);
}

#[test]
fn cstar_bundles() {
    let x = FiniteGroupoid::unit_space(vec!["0".into(), "1".into()]);
    let act = GroupAction::from_fn(z2(), x.clone(), Side::Left, |t, u| Arrow((u.0 + t) % 2)).unwrap();
    for (fiber, left, right) in [(StarAlgebra::complex(), 2, 1), (StarAlgebra::matrix(2), 4, 2)] {
        let b = make_trivial_cbundle(&fiber, x.unit_labels.clone(), DEFAULT_TOL).unwrap();
        let ba = BundleAction::identity_maps(b, act.clone()).unwrap();
        let cert = cstar_bundle_morita(&ba, DEFAULT_TOL, 0).unwrap();
        assert!(cert.is_equivalent(), "{}", cert.render());
        assert_eq!(cert.left.structure.blocks, vec![left]);
        assert_eq!(cert.right.structure.blocks, vec![right]);
    }
}

#[test]
fn raeburn_translation() {
    let d = RaeburnData {
        points: vec!["0".into(), "1".into()],
        g: z2(),
        left: vec![vec![0, 1], vec![1, 0]],
        h: FiniteGroup::trivial(),
        right: vec![vec![0, 1]],
        b: StarAlgebra::complex(),
        sigma: vec![CMatrix::identity(1, 1); 2],
        tau: vec![CMatrix::identity(1, 1)],
    };
    let cert = raeburn(&d, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent(), "{}", cert.render());
    assert_eq!(cert.left.structure.blocks, vec![2]);
    assert_eq!(cert.right.structure.blocks, vec![1]);
}

#[test]
fn raeburn_two_sided_swap() {
    // X = Z/2 × Z/2 at index 2a+b; G moves a, H moves b.
    let d = RaeburnData {
        points: (0..4).map(|k| format!("({},{})", k / 2, k % 2)).collect(),
        g: z2(),
        left: vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]],
        h: z2(),
        right: vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]],
        b: StarAlgebra::diagonal(2),
        sigma: vec![CMatrix::identity(2, 2), swap2()],
        tau: vec![CMatrix::identity(2, 2); 2],
    };
    let cert = raeburn(&d, DEFAULT_TOL, 0).unwrap();
    assert!(cert.is_equivalent(), "{}", cert.render());
    assert_eq!(cert.left.structure.center_dim, cert.right.structure.center_dim);
}

#[test]
fn raeburn_rejects_noncommuting_automorphisms() {
    // Ad(swap) and Ad(diag(1, i)) do not commute on M2.
    let ad = |u: &CMatrix| {
        let ui = u.adjoint();
        CMatrix::from_fn(4, 4, |r, c| u[(r / 2, c / 2)] * ui[(c % 2, r % 2)])
    };
    let d1 = CMatrix::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { C64::new(0.0, 1.0) });
    let tau1 = ad(&d1);
    // X = Z/2 × Z/4 at index 4a+b; G flips a, H rotates b.
    let d = RaeburnData {
        points: (0..8).map(|k| format!("({},{})", k / 4, k % 4)).collect(),
        g: z2(),
        left: (0..2).map(|t| (0..8).map(|k| 4 * ((k / 4 + t) % 2) + k % 4).collect()).collect(),
        h: FiniteGroup::cyclic(4).unwrap(),
        right: (0..4).map(|h| (0..8).map(|k| 4 * (k / 4) + (k % 4 + h) % 4).collect()).collect(),
        b: StarAlgebra::matrix(2),
        sigma: vec![CMatrix::identity(4, 4), ad(&swap2())],
        tau: vec![CMatrix::identity(4, 4), tau1.clone(), &tau1 * &tau1, &tau1 * &tau1 * &tau1],
    };
    assert!(matches!(raeburn(&d, DEFAULT_TOL, 0), Err(Error::NotCommuting { .. })));
}

#[test]
fn coaction_dimensions() {
    for (n, blocks_left, blocks_right) in [(1usize, vec![1], vec![1]), (2, vec![2, 2], vec![1, 1]), (3, vec![3, 3, 3], vec![1, 1, 1])] {
        let g = FiniteGroup::cyclic(n).unwrap();
        let b = FellBundle::line(g.groupoid.clone());
        let cert = coaction_demo(&b, DEFAULT_TOL, 0).unwrap();
        assert!(cert.is_equivalent(), "{}", cert.render());
        assert_eq!(cert.left.dimension, n * n * n);
        assert_eq!(cert.right.dimension, n);
        assert_eq!(cert.left.structure.blocks, blocks_left);
        assert_eq!(cert.right.structure.blocks, blocks_right);
    }
}

#[test]
fn coaction_rejects_non_group_base() {
    let b = FellBundle::line(FiniteGroupoid::pair(2).unwrap());
    assert!(matches!(coaction_demo(&b, DEFAULT_TOL, 0), Err(Error::Precondition(_))));
}

#[test]
fn certificate_serializes() {
    let (g, _) = four_point();
    let cert = one_sided_morita(&g, DEFAULT_TOL, 3).unwrap();
    let json = cert.to_json();
    let back: MoritaCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cert);
    assert!(cert.render().contains("verdict: equivalent"));
}
