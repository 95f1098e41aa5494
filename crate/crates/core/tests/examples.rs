macro_rules! example {
    ($name:ident, $($needle:literal),*) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            let out = $name::run_example();
            $(assert!(out.contains($needle), "{out}");)*
        }
    };
}

example!(groupoids, "pair(3): 9 arrows", "pair(4) ⋊ Z/2: 32 arrows");
example!(fell_bundles, "total dimension 64");
example!(section_algebras, "blocks [1, 1, 2]");
example!(groupoid_equivalence, "verified");
example!(symmetric_morita, "verdict: equivalent");
example!(raeburn, "translation: blocks [2] ~ [1]");
example!(coaction, "Z/2: dimension 8 ~ 2", "Z/3: dimension 27 ~ 3");
example!(principal, "max residual");
example!(model_files, "groupoid SD explicit");
example!(cli_reports, "morita verdict from JSON: equivalent");
