use vort1d::characteristics::{
    comparison_solution, trace, ConstantVelocity, FrozenVelocity, ModulusSpec, ParticleLabel, ParticleSet,
    StoredRun, VelocitySampler, CALIBRATED_C0,
};
use vort1d::diagnostics::{gronwall_constant, record};
use vort1d::models::ModelSpec;
use vort1d::spectral::{make_grid, periodic_distance, velocity_from_vorticity, Gauge, SpectralField};
use vort1d::studies::fig2_state;
use vort1d::timestepper::{advance, StepControls};

fn transport_run(n: usize, t_end: f64) -> StoredRun {
    StoredRun::record(&fig2_state(n).unwrap(), &ModelSpec::transport(), &StepControls::cfl(0.5, t_end)).unwrap()
}

#[test]
fn backward_trace_inverts_forward_trace() {
    let run = transport_run(128, 0.5);
    let dt = run.p_history.max_interval();
    for (hist, fwd, bwd) in [
        (&run.p_history, ParticleLabel::X, ParticleLabel::Q1),
        (&run.m_history, ParticleLabel::Y, ParticleLabel::Q2),
    ] {
        let out = trace(hist, &ParticleSet::uniform(64, fwd), 0.0, 0.5, dt).unwrap();
        let back = trace(hist, &ParticleSet::new(out.positions.clone(), bwd), 0.0, 0.5, dt).unwrap();
        for (x, seed) in back.positions.iter().zip(&out.seeds) {
            assert!(periodic_distance(*x, *seed) <= 1e-6);
        }
    }
}

#[test]
fn transported_particles_never_cross() {
    let run = transport_run(128, 1.0);
    let dt = run.p_history.max_interval();
    for (hist, label) in [(&run.p_history, ParticleLabel::X), (&run.m_history, ParticleLabel::Y)] {
        let out = trace(hist, &ParticleSet::uniform(200, label), 0.0, 1.0, dt).unwrap();
        assert!(out.order_preserved(1e-8));
    }
}

#[test]
fn constant_velocity_wraps_with_winding() {
    let set = ParticleSet::new(vec![3.0], ParticleLabel::X);
    let out = trace(&ConstantVelocity(1.0), &set, 0.0, 1.0, 0.1).unwrap();
    assert!((out.unwrapped(0) - 4.0).abs() < 1e-12);
    assert!((out.positions[0] - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert_eq!(out.windings[0], 1);
}

fn frozen_exact(x0: f64, t: f64) -> f64 {
    2.0 * ((-t).exp() * (x0 / 2.0).tan()).atan()
}

#[test]
fn rk4_particle_paths_are_fourth_order() {
    let g = make_grid(32).unwrap();
    let v = FrozenVelocity::new(&SpectralField::from_fn(&g, |x| -x.sin()));
    let seeds = vec![-2.0, -0.5, 0.7, std::f64::consts::FRAC_PI_2, 2.5];
    let err = |dt: f64| {
        let out = trace(&v, &ParticleSet::new(seeds.clone(), ParticleLabel::X), 0.0, 1.0, dt).unwrap();
        seeds
            .iter()
            .zip(&out.positions)
            .map(|(x0, x)| (x - frozen_exact(*x0, 1.0)).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    assert!((order - 4.0).abs() < 0.2, "order {order}");
    assert!(err(1e-3) <= 1e-10);
}

/// Trajectories driven by a velocity with bounded vorticity separate no
/// faster than the comparison solution of `z' = F(z)`.
#[test]
fn trajectory_separation_is_bounded_by_comparison_solution() {
    let n = 128;
    let s0 = fig2_state(n).unwrap();
    let run = StoredRun::record(&s0, &ModelSpec::transport(), &StepControls::cfl(0.5, 1.0)).unwrap();
    let dt = run.p_history.max_interval();
    for (hist, w0) in [(&run.p_history, &s0.omega_p), (&run.m_history, &s0.omega_m)] {
        let rate = ModulusSpec { c0: CALIBRATED_C0, amplitude: w0.max_abs() }.rate();
        let out = trace(hist, &ParticleSet::uniform(48, ParticleLabel::X), 0.0, 1.0, dt).unwrap();
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                let d0 = periodic_distance(out.seeds[i], out.seeds[j]);
                if d0 >= 1.0 {
                    continue;
                }
                let bound = comparison_solution(d0, rate, 1.0).unwrap();
                let d1 = periodic_distance(out.positions[i], out.positions[j]);
                assert!(d1 <= bound * (1.0 + 1e-3), "pair ({i},{j}): {d1} > {bound}");
            }
        }
    }
}

#[test]
fn h1_growth_obeys_a_gronwall_bound() {
    let s0 = fig2_state(128).unwrap();
    for a in [1.0, -1.0] {
        let spec = ModelSpec::mhd1d(a);
        let mut recs = vec![record(&s0, &spec, None)];
        advance(&s0, &spec, &StepControls::cfl(0.5, 1.0), |s| {
            let r = record(s, &spec, recs.last());
            recs.push(r);
            Ok(())
        })
        .unwrap();
        let c = gronwall_constant(&recs).expect("constant exists");
        assert!(c.is_finite() && c >= 0.0);
        let h0 = recs[0].h1_total();
        for r in &recs {
            assert!((r.h1_total() / h0).ln() <= c * r.bkm_integral + 1e-12);
        }
    }
}

#[test]
fn history_sampler_reproduces_stored_fields() {
    let run = transport_run(64, 0.2);
    let p0 = velocity_from_vorticity(&run.initial.omega_p, Gauge::ZeroMean);
    let v0 = run.p_history.velocity(0.0, 0.4).unwrap();
    assert!((v0 - vort1d::spectral::interpolate(&p0, 0.4)).abs() < 1e-12);
    assert!(run.p_history.velocity(0.3, 0.0).is_err());
}
