// Section algebras and their Wedderburn data: the convolution algebra of
// the pair groupoid is a full matrix algebra, a group algebra is abelian,
// and a crossed product computed two ways gives the same algebra.

use groupoidal::fell::{BundleAction, FellBundle};
use groupoidal::groupoid::{FiniteGroup, FiniteGroupoid, GroupAction, Side};
use groupoidal::linalg::DEFAULT_TOL;
use groupoidal::star::{crossed_product, section_algebra, star_structure_report, validate_star_algebra, StarAlgebra};

pub fn run_example() -> String {
    let mut out = String::new();
    let pair = section_algebra(&FellBundle::line(FiniteGroupoid::pair(3).unwrap()));
    assert!(validate_star_algebra(&pair, DEFAULT_TOL).is_ok());
    let s = star_structure_report(&pair, DEFAULT_TOL, 0);
    assert_eq!(s.blocks, vec![3]);
    out += &format!("C*(pair(3)): {}\n", s.render());

    let s3 = FiniteGroup::symmetric(3).unwrap();
    let s = star_structure_report(&StarAlgebra::group_algebra(&s3), DEFAULT_TOL, 0);
    assert_eq!(s.blocks, vec![1, 1, 2]);
    out += &format!("C*(S3): {}\n", s.render());

    let z2 = FiniteGroup::cyclic(2).unwrap();
    let units = FiniteGroupoid::unit_space(vec!["a".into(), "b".into()]);
    let swap = GroupAction::from_unit_permutations(z2, units.clone(), Side::Left, &[vec![0, 1], vec![1, 0]]).unwrap();
    let ba = BundleAction::identity_maps(FellBundle::line(units), swap).unwrap();
    let cp = crossed_product(&ba.bundle, &ba).unwrap();
    let s = star_structure_report(&cp, DEFAULT_TOL, 0);
    assert_eq!(s.blocks, vec![2]);
    out += &format!("C(2 points) ⋊ Z/2: {}\n", s.render());
    out
}

fn main() {
    print!("{}", run_example());
}
