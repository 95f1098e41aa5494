// Pair, transformation, semidirect and quotient groupoids, each checked
// exhaustively against the groupoid axioms.

use groupoidal::groupoid::{
    quotient_groupoid, semidirect_left, transformation_groupoid, validate_groupoid, verify_quotient, FiniteGroup,
    FiniteGroupoid, GroupAction, Side, SpaceAction,
};

pub fn run_example() -> String {
    let mut out = String::new();
    let pair = FiniteGroupoid::pair(3).unwrap();
    assert!(validate_groupoid(&pair).is_ok());
    out += &format!("pair(3): {} arrows over {} units\n", pair.n_arrows(), pair.n_units());

    let t = transformation_groupoid(&SpaceAction::left_translation(&pair)).unwrap();
    assert!(validate_groupoid(&t.groupoid).is_ok());
    out += &format!("pair(3) acting on itself: {} arrows\n", t.groupoid.n_arrows());

    let z2 = FiniteGroup::cyclic(2).unwrap();
    let x = FiniteGroupoid::pair(4).unwrap();
    let swap = |side| GroupAction::from_unit_permutations(z2.clone(), x.clone(), side, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();

    let sd = semidirect_left(&swap(Side::Left)).unwrap();
    assert!(validate_groupoid(&sd.groupoid).is_ok());
    out += &format!("pair(4) ⋊ Z/2: {} arrows\n", sd.groupoid.n_arrows());

    let right = swap(Side::Right);
    let q = quotient_groupoid(&right).unwrap();
    assert!(verify_quotient(&right, &q).is_ok());
    out += &format!("pair(4) / Z/2: {} arrows over {} units\n", q.groupoid.n_arrows(), q.groupoid.n_units());
    out
}

fn main() {
    print!("{}", run_example());
}
