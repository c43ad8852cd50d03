//! Every runnable example must keep working.

macro_rules! examples {
    ($($name:ident),* $(,)?) => {
        $(mod $name { include!(concat!("../examples/", stringify!($name), ".rs")); pub fn run() { main() } })*

        #[test]
        fn examples_run() {
            let dir = tempfile::tempdir().unwrap();
            // examples read the output directory from the environment; set it once
            std::env::set_var(vort1d::cli_io::OUT_ENV, dir.path());
            $($name::run();)*
        }
    };
}

examples!(
    hilbert_identities,
    steady_state,
    fig2_mhd,
    fig3_growth,
    de_gregorio,
    clm_blowup,
    transport_characteristics,
    modulus_bound,
    convergence,
    sweep,
);
