// Run a small parameter sweep over `a` in parallel; each run writes its own
// subdirectory of `$VORT1D_OUT` (default `out/sweep_example`).

use std::path::PathBuf;

use vort1d::cli_io::{parse_config, sweep, OUT_ENV};

fn main() {
    let base = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out/sweep_example"), PathBuf::from);
    let jobs: Vec<_> = [-1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|a| {
            let text = format!(
                "model = mhd1d\na = {a}\nn = 64\nt_end = 0.5\n\
                 initial.Omega = sin:1:1, cos:1:4, const:5\ninitial.omega = sin:1:2, const:2\n"
            );
            (format!("a_{a}"), parse_config(&text).expect("valid config"))
        })
        .collect();
    for ((name, _), res) in jobs.iter().zip(sweep(&jobs, &base)) {
        let r = res.expect("run completes").report;
        println!("{name}: {:?}, bkm integral {:.4}, final linf_ux {:.4}", r.status, r.bkm_integral, r.final_record.linf_ux);
    }
}
