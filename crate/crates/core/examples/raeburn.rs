// Induced algebras from commuting actions on a finite set: translation on
// two points, and the two-sided case with a swap of the coefficients.

use groupoidal::instances::{raeburn_translation, raeburn_two_sided_swap};
use groupoidal::linalg::DEFAULT_TOL;
use groupoidal::morita::raeburn;

pub fn run_example() -> String {
    let mut out = String::new();
    for (name, data) in [("translation", raeburn_translation()), ("two-sided swap", raeburn_two_sided_swap())] {
        let cert = raeburn(&data, DEFAULT_TOL, 0).unwrap();
        assert!(cert.is_equivalent(), "{}", cert.render());
        out += &format!(
            "{name}: blocks {:?} ~ {:?}, verdict {}\n",
            cert.left.structure.blocks,
            cert.right.structure.blocks,
            cert.verdict.name()
        );
    }
    out
}

fn main() {
    print!("{}", run_example());
}
