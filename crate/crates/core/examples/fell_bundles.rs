// Fell bundles over finite groupoids: a constant matrix bundle, its
// semidirect product by an automorphic action, and an orbit bundle.

use groupoidal::fell::{
    quotient_fell_bundle, semidirect_fell_bundle, validate_fell_bundle, verify_quotient_bundle, BundleAction, FellBundle,
};
use groupoidal::groupoid::{FiniteGroup, FiniteGroupoid, GroupAction, Side};
use groupoidal::linalg::{CMatrix, DEFAULT_TOL, ONE, ZERO};
use groupoidal::star::StarAlgebra;

pub fn run_example() -> String {
    let z2 = FiniteGroup::cyclic(2).unwrap();
    let x = FiniteGroupoid::pair(4).unwrap();
    let m2 = StarAlgebra::matrix(2);
    let bundle = FellBundle::constant(x.clone(), m2.structure_tensor(), m2.star_matrix());
    assert!(validate_fell_bundle(&bundle, DEFAULT_TOL).is_ok());
    let mut out = format!("M2 over pair(4): total dimension {}\n", bundle.total_dim());

    // The nontrivial element moves the units by (13)(24) and conjugates
    // each fiber by the flip matrix.
    let flip = CMatrix::from_fn(4, 4, |r, c| if r == 3 - c { ONE } else { ZERO });
    let left = GroupAction::from_unit_permutations(z2.clone(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]]).unwrap();
    let ba = BundleAction::from_fn(bundle.clone(), left, |t, _| if t == 0 { CMatrix::identity(4, 4) } else { flip.clone() }).unwrap();
    let (_, sd) = semidirect_fell_bundle(&ba).unwrap();
    assert!(validate_fell_bundle(&sd, DEFAULT_TOL).is_ok());
    out += &format!("semidirect bundle: total dimension {}\n", sd.total_dim());

    let right = GroupAction::from_unit_permutations(z2, x, Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
    let rba = BundleAction::identity_maps(bundle, right).unwrap();
    let q = quotient_fell_bundle(&rba).unwrap();
    assert!(verify_quotient_bundle(&rba, &q, DEFAULT_TOL).is_ok());
    out += &format!("orbit bundle: total dimension {}\n", q.bundle.total_dim());
    out
}

fn main() {
    print!("{}", run_example());
}
