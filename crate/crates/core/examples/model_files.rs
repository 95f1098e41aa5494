// Reading a model, resolving its references, emitting a constructed
// object and reading it back.

use groupoidal::cli::BUILTIN_MODEL;
use groupoidal::groupoid::semidirect_left;
use groupoidal::io::{emit_groupoid, parse_model, resolve, ModelFile};

pub fn run_example() -> String {
    let objs = resolve(&parse_model(BUILTIN_MODEL).unwrap()).unwrap();
    let g = objs.action("g").unwrap();
    let sd = semidirect_left(g).unwrap();
    let emitted = ModelFile { decls: vec![emit_groupoid("SD", &sd.groupoid)], ..Default::default() }.to_text();
    let back = resolve(&parse_model(&emitted).unwrap()).unwrap();
    assert_eq!(back.groupoid("SD").unwrap().n_arrows(), sd.groupoid.n_arrows());
    let head: Vec<&str> = emitted.lines().take(4).collect();
    format!("{} declarations read; emitted model starts:\n{}\n", objs.items.len(), head.join("\n"))
}

fn main() {
    print!("{}", run_example());
}
