// The Morita certificate for Z/2 acting on both sides of the line bundle
// over the pair groupoid on four points.

use groupoidal::instances::symmetric_z2z2;
use groupoidal::linalg::DEFAULT_TOL;
use groupoidal::morita::{symmetric_morita, Verdict};

pub fn run_example() -> String {
    let (g, h) = symmetric_z2z2();
    let cert = symmetric_morita(&g, &h, DEFAULT_TOL, 0).unwrap();
    assert_eq!(cert.verdict, Verdict::Equivalent);
    assert_eq!(cert.left.structure.center_dim, cert.right.structure.center_dim);
    cert.render()
}

fn main() {
    print!("{}", run_example());
}
