fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, out) = groupoidal::cli::run(&args);
    if code == 3 {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    std::process::exit(code);
}
