// Desk-scale run of the fig2 preset (a = 1) through the config layer.
// Usage: `cargo run --release --example fig2_mhd [n] [t_end]`.
// Outputs go to `$VORT1D_OUT` or `out/fig2_example`.

use vort1d::cli_io::{execute, out_dir_from_env, parse_config};

fn main() {
    let mut args = std::env::args().skip(1);
    let n = args.next().unwrap_or_else(|| "256".into());
    let t_end = args.next().unwrap_or_else(|| "1".into());
    let text = format!("preset = fig2\nn = {n}\nt_end = {t_end}\nsnapshot_times = 0, {t_end}\nout_dir = out/fig2_example\n");
    let mut cfg = parse_config(&text).expect("valid config");
    out_dir_from_env(&mut cfg);
    let out = execute(&cfg).expect("run completes");
    let r = &out.report;
    println!("status {:?} after {} steps, bkm integral {:.4}", r.status, r.steps, r.bkm_integral);
    if let Some(fit) = r.growth_linf_ux {
        println!("linf_ux envelope: slope {:.4}, residual/range {:.3}", fit.slope, fit.relative_residual());
    }
    println!("files in {}", cfg.out_dir.display());
}
