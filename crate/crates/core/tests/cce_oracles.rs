use std::f64::consts::PI;

use sibi::analysis::{find_df_db_extrema, find_owp, fit_decay, tsd_sweep, ExtremumKind, SweepOptions};
use sibi::cce::*;
use sibi::lattice::{
    neighbor_distance, polar_angle, BathConfiguration, BathModel, BathSite, Cluster, LatticeSpec, SI_LATTICE_CONSTANT,
};
use sibi::spin::{eigensystem, DonorSpec};

fn spec() -> DonorSpec {
    DonorSpec::si_bi()
}

fn taus(n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
}

/// Second-shell pair at 45° to the field, far from the donor.
fn pair(a1_hz: f64, a2_hz: f64) -> ClusterSystem {
    let u = SI_LATTICE_CONSTANT / 4.0;
    let site = |k: usize, c: [f64; 3], a: f64| {
        let r = c.map(|x| x * u);
        BathSite { index: k, position: r, a_iso: 2.0 * PI * a, t_aniso: 0.0, theta: polar_angle(r) }
    };
    let sites = vec![site(0, [20.0, 20.0, 20.0], a1_hz), site(1, [22.0, 20.0, 22.0], a2_hz)];
    let cutoff = neighbor_distance(SI_LATTICE_CONSTANT, 3).unwrap();
    let config = BathConfiguration::from_sites(&spec(), sites, cutoff).unwrap();
    ClusterSystem::from_cluster(&config, &pair_lookup(&config), &Cluster::new(vec![0, 1]).unwrap()).unwrap()
}

#[test]
fn owp_satisfies_the_gamma_condition_for_every_minimum() {
    let s = spec();
    let minima: Vec<_> =
        find_df_db_extrema(&s, 5e9, 7.5e9).unwrap().into_iter().filter(|e| e.kind == ExtremumKind::Minimum).collect();
    assert!(!minima.is_empty());
    for e in minima {
        let r = find_owp(&s, e.upper, e.lower).unwrap().unwrap();
        let es = eigensystem(&s, r.b_owp).unwrap();
        let (up, lo) = (es.level(e.upper).unwrap(), es.level(e.lower).unwrap());
        let sum = s.gamma(up.m, es.omega0) + s.gamma(lo.m, es.omega0);
        assert!(sum.abs() < 1e-8, "{}→{}: γ sum {sum:e}", e.upper, e.lower);
        assert!((r.b_owp - e.field).abs() < 1e-3, "OWP {} vs turning point {}", r.b_owp, e.field);
    }
}

#[test]
fn gauge_shift_of_the_bath_zeeman_term_leaves_the_echo_unchanged() {
    let sys = pair(600e3, 600.3e3);
    let mut ctx = EchoContext::new(&spec(), 0.32, (12, 9)).unwrap();
    let t = taus(40, 4e-3);
    let base = cluster_echo_fast(&sys, &ctx, &t).unwrap();
    let base_exact = hahn_echo_exact(&sys, &ctx, &t).unwrap();
    ctx.nu += 2.0 * PI * 3.7e5;
    let shifted = cluster_echo_fast(&sys, &ctx, &t).unwrap();
    let shifted_exact = hahn_echo_exact(&sys, &ctx, &t).unwrap();
    for k in 0..t.len() {
        assert!((base[k].norm() - shifted[k].norm()).abs() < 1e-10);
        assert!((base_exact[k].norm() - shifted_exact[k].norm()).abs() < 1e-10);
    }
}

#[test]
fn weak_coupling_decay_scales_with_the_square_of_the_coupling() {
    // with Δα ≪ b_ff the echo depth is ∝ Δα², so 1 − L(τ) scales as ε²
    let ctx = EchoContext::new(&spec(), 0.32, (12, 9)).unwrap();
    let t = taus(30, 10e-3);
    let full = cluster_echo_fast(&pair(600e3, 600.02e3), &ctx, &t).unwrap();
    for eps in [0.5, 0.2, 0.1] {
        let weak = cluster_echo_fast(&pair(600e3 * eps, (600e3 + 20.0) * eps), &ctx, &t).unwrap();
        for k in 1..t.len() {
            let (d1, de) = (1.0 - full[k].norm(), 1.0 - weak[k].norm());
            if d1 > 1e-6 {
                let ratio = de / d1 / (eps * eps);
                assert!((ratio - 1.0).abs() < 0.05, "ε = {eps}, τ = {}: ratio {ratio}", t[k]);
            }
        }
    }
}

#[test]
fn exact_kernel_matches_fast_for_a_sampled_configuration() {
    let model = BathModel::new(&spec(), &LatticeSpec { side_length: 40.0, ..LatticeSpec::default() }).unwrap();
    let config = model.sample(model.lattice_spec.occupancy, 9).unwrap();
    let ctx = EchoContext::new(&spec(), 0.25, (12, 9)).unwrap();
    let t = taus(20, 2e-3);
    let fast = configuration_echo(&config, &ctx, &CceOptions::default(), &t).unwrap().0;
    let opts = CceOptions { kernel: Kernel::Exact, ..CceOptions::default() };
    let exact = configuration_echo(&config, &ctx, &opts, &t).unwrap().0;
    for (a, b) in fast.iter().zip(&exact) {
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn third_order_leaves_the_fitted_decay_time_within_ten_percent() {
    let lattice = LatticeSpec { side_length: 80.0, ..LatticeSpec::default() };
    let model = BathModel::new(&spec(), &lattice).unwrap();
    let fit = |k_max: usize| {
        let params = EnsembleParams { lattice, n_configs: 6, k_max, ..EnsembleParams::default() };
        let c = adaptive_echo(&model, &params).unwrap();
        assert_eq!(c.meta.invalid_divisions, 0);
        fit_decay(&c.times, &c.l).unwrap()
    };
    let (k2, k3) = (fit(2), fit(3));
    assert!(!k2.diverged && !k3.diverged, "{k2:?} {k3:?}");
    let rel = (k3.t_sd - k2.t_sd).abs() / k2.t_sd;
    assert!(rel < 0.1, "k=2 {} s, k=3 {} s", k2.t_sd, k3.t_sd);
}

#[test]
fn echo_is_contractive_and_starts_at_one() {
    let model = BathModel::new(&spec(), &LatticeSpec { side_length: 50.0, ..LatticeSpec::default() }).unwrap();
    let t = default_times(4e-3).unwrap();
    for (seed, b) in [(1, 0.1), (2, 0.188), (3, 0.45)] {
        let params = EnsembleParams {
            lattice: model.lattice_spec,
            field: b,
            n_configs: 3,
            seed,
            amplitude_average: seed == 2,
            ..EnsembleParams::default()
        };
        let c = ensemble_average_with(&model, &params, &t, true).unwrap();
        assert_eq!(c.l[0], 1.0);
        for curve in c.per_config.unwrap() {
            assert_eq!(curve[0], 1.0);
            assert!(curve.iter().all(|l| *l <= 1.0 + 1e-12));
        }
    }
}

#[test]
fn fit_of_an_ensemble_curve_is_consistent_with_its_data() {
    let params = EnsembleParams {
        lattice: LatticeSpec { side_length: 80.0, ..LatticeSpec::default() },
        n_configs: 8,
        ..EnsembleParams::default()
    };
    let model = BathModel::new(&spec(), &params.lattice).unwrap();
    let c = adaptive_echo(&model, &params).unwrap();
    let f = fit_decay(&c.times, &c.l).unwrap();
    assert!(!f.diverged);
    // the fitted curve crosses 1/e where the data does, to within two grid steps
    let cross = c.times.iter().zip(&c.l).find(|(_, l)| **l < (-1.0f64).exp()).map(|(t, _)| *t).unwrap();
    let step = c.times[c.times.len() - 1] / 45.0;
    assert!((cross - f.t_sd).abs() < 2.0 * step, "crossing {cross}, T_SD {}", f.t_sd);
}

#[test]
fn sweep_peak_is_sharp_at_full_size() {
    // ±5 mT around the OWP the decay time is far below its value at the OWP
    let b_owp = find_owp(&spec(), 12, 9).unwrap().unwrap().b_owp;
    let params = EnsembleParams { n_configs: 10, ..EnsembleParams::default() };
    let fields = [b_owp - 5e-3, b_owp, b_owp + 5e-3];
    let r = tsd_sweep(&spec(), &params, &fields, &SweepOptions::default()).unwrap();
    let t: Vec<f64> = r.entries.iter().map(|e| e.fit.as_ref().unwrap().effective_t_sd()).collect();
    assert!(r.entries[1].fit.as_ref().unwrap().diverged);
    assert!(t[0] * 10.0 <= t[1] && t[2] * 10.0 <= t[1], "{t:?}");
}
