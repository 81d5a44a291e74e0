mod common;

use cas_core::gaussian::linalg::{herm_eigenvalues, CMat, C64};
use cas_core::gaussian::{GramMatrix, TrmGenerator, TrmModel};
use cas_core::waveform::{
    evaluate, optimize_isac, optimize_sw, sw_at_split, sweep_snr, IsacOptions, Scheme, SwOptions, SweepOptions,
};
use common::{commuting_model, commuting_objective, golden_section, random_unitary, rng};

fn generated(seed: u64) -> TrmModel {
    TrmGenerator {
        n: 3,
        m_s: 2,
        m_c: 3,
        t: 16,
        noise_s: 1.0,
        noise_c: 1.0,
        power: 0.2,
    }
    .generate(seed)
    .unwrap()
}

#[test]
fn scalar_optimum_matches_golden_section() {
    let h = CMat::from_column_slice(2, 1, &[C64::new(0.4, 0.1), C64::new(-0.2, 0.3)]);
    let g: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    for power in [0.01, 0.1, 1.0] {
        let m = TrmModel::new(CMat::from_element(1, 1, C64::new(1.5, 0.0)), h.clone(), 1.0, 1.0, 16, 2, power).unwrap();
        let f = |p: f64| commuting_objective(&[1.5], &[g], &[p], 2, 16.0, 1.0, 1.0);
        let (_, want) = golden_section(f, 0.0, m.trace_budget(), 200);
        let got = optimize_isac(&m, None, &IsacOptions::default()).unwrap();
        assert!((got.point.d_total - want).abs() <= 1e-4 * want, "{} vs {}", got.point.d_total, want);
    }
}

#[test]
fn commuting_optimum_matches_grid() {
    let u = random_unitary(&mut rng(3), 2);
    let (a, g) = ([2.0, 0.5], [0.05, 1.5]);
    let m = commuting_model(&u, &a, &g, 2, 16, 0.1);
    let budget = m.trace_budget();
    let steps = 199;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let p = [budget * i as f64 / steps as f64, budget * j as f64 / steps as f64];
            best = best.min(commuting_objective(&a, &g, &p, 2, 16.0, 1.0, 1.0));
        }
    }
    let got = optimize_isac(&m, None, &IsacOptions::default()).unwrap();
    assert!((got.point.d_total - best).abs() <= 1e-3 * best, "{} vs {}", got.point.d_total, best);
}

#[test]
fn sw_split_matches_closed_form() {
    // in the commuting case both SW Grams are diagonal in the same basis
    let u = random_unitary(&mut rng(4), 2);
    let (a, g) = ([1.0, 1.0], [0.7, 0.7]);
    let m = commuting_model(&u, &a, &g, 1, 16, 0.5);
    let budget = m.trace_budget();
    for rho in [0.0, 0.3, 0.8, 1.0] {
        let (q_s, q_c, eval) = sw_at_split(&m, rho);
        let ps = rho * budget / 2.0;
        let pc = (1.0 - rho) * budget / 2.0;
        let post = 1.0 / (16.0 * ps + 1.0);
        let d_s = 2.0 * post;
        let mi = 2.0 * (1.0 + 16.0 * 0.7 * pc).ln();
        let lam = 1.0 - post;
        let d_c = 2.0 * lam * (-mi / 2.0).exp();
        assert!((eval.d_s - d_s).abs() < 1e-10);
        assert!((eval.mi - mi).abs() < 1e-10);
        assert!((eval.d_c - d_c).abs() < 1e-10);
        let tr = herm_eigenvalues(&q_s).iter().sum::<f64>() + herm_eigenvalues(&q_c).iter().sum::<f64>();
        assert!((tr - budget).abs() < 1e-9);
    }
}

#[test]
fn sw_optimum_beats_its_endpoints() {
    for seed in 0..5 {
        let m = generated(seed);
        let best = optimize_sw(&m, &SwOptions::default()).unwrap();
        for rho in [0.0, 1.0] {
            assert!(best.point.d_total <= sw_at_split(&m, rho).2.total() + 1e-12);
        }
        let rho = best.split.unwrap();
        assert!((0.0..=1.0).contains(&rho));
    }
}

#[test]
fn isac_result_is_feasible_and_coupled() {
    for seed in 0..5 {
        let m = generated(seed);
        let res = optimize_isac(&m, None, &IsacOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.trace_used <= m.trace_budget() + 1e-9);
        assert!(herm_eigenvalues(&res.q_star.q).iter().all(|&v| v >= -1e-10));
        assert!(res.point.rate <= res.point.capacity + 1e-9);
        let eval = evaluate(&m, &res.q_star.q, &res.q_star.q);
        assert!((eval.total() - res.point.d_total).abs() < 1e-12);
        // never worse than spending the budget isotropically
        let iso = GramMatrix::isotropic(&m);
        assert!(res.point.d_total <= evaluate(&m, &iso.q, &iso.q).total() + 1e-9);
    }
}

#[test]
fn joint_gram_of_sw_pair_is_no_worse() {
    // Sending Q_s + Q_c as one waveform improves sensing and the link at once.
    for seed in 0..5 {
        let m = generated(seed);
        let sw = optimize_sw(&m, &SwOptions::default()).unwrap();
        let sum = &sw.q_star.q + &sw.q_comm.as_ref().unwrap().q;
        let joint = evaluate(&m, &sum, &sum);
        assert!(joint.total() <= sw.point.d_total + 1e-10);
        let init = GramMatrix { q: sum };
        let isac = optimize_isac(&m, Some(&init), &IsacOptions::default()).unwrap();
        assert!(isac.point.d_total <= joint.total() + 1e-10);
    }
}

#[test]
fn sweep_reports_both_schemes_per_point() {
    let m = generated(0);
    let snr = [-5.0, 5.0, 15.0];
    let curve = sweep_snr(&m, &snr, &[Scheme::Isac, Scheme::Sw], &SweepOptions::default()).unwrap();
    assert_eq!(curve.rows().len(), 6);
    for (i, s) in snr.iter().enumerate() {
        let p = 10f64.powf(s / 10.0) * m.noise_c;
        for scheme in [Scheme::Isac, Scheme::Sw] {
            let entry = curve.get(i, scheme).unwrap();
            let res = entry.result.as_ref().unwrap();
            assert!((res.point.budget - m.t as f64 * p).abs() < 1e-9 * res.point.budget);
        }
    }
    // distortion falls as the SNR grows
    let isac: Vec<f64> = (0..3).map(|i| curve.get(i, Scheme::Isac).unwrap().result.as_ref().unwrap().point.d_total).collect();
    assert!(isac.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_rejects_unsorted_grid() {
    let m = generated(0);
    assert!(sweep_snr(&m, &[5.0, 0.0], &[Scheme::Isac], &SweepOptions::default()).is_err());
    assert!(sweep_snr(&m, &[], &[Scheme::Isac], &SweepOptions::default()).is_err());
}
