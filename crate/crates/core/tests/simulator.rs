mod common;

use cas_core::gaussian::linalg::{CMat, C64};
use cas_core::gaussian::{GramMatrix, TrmGenerator, TrmModel};
use cas_core::simulator::SimOptions;
use cas_core::{simulate_end_to_end, simulate_sensing};

fn scalar() -> (TrmModel, CMat) {
    let m = TrmModel::new(
        CMat::from_element(1, 1, C64::new(1.0, 0.0)),
        CMat::from_element(1, 1, C64::new(1.0, 0.0)),
        1.0,
        1.0,
        1,
        1,
        4.0,
    )
    .unwrap();
    // T |x|^2 / noise = 3, so D_s = 1 / (1 + 3)
    (m, CMat::from_element(1, 1, C64::new(3f64.sqrt(), 0.0)))
}

#[test]
fn scalar_sensing_distortion() {
    let (m, x) = scalar();
    let rep = simulate_sensing(&m, &x, 100_000, 7, &SimOptions::default()).unwrap();
    assert!((rep.analytic_d_s - 0.25).abs() < 1e-12);
    assert!(rep.d_s.within(0.25, 3.0), "{:?}", rep.d_s);
}

#[test]
fn scalar_link_distortion() {
    let (m, x) = scalar();
    // estimate variance 0.75 at rate ln 4 leaves 0.75 / 4
    let rep = simulate_end_to_end(&m, &x, 4f64.ln(), 100_000, 8, &SimOptions::default()).unwrap();
    assert!((rep.analytic_d_c.unwrap() - 0.1875).abs() < 1e-12);
    assert!(rep.d_c.unwrap().within(0.1875, 3.0), "{:?}", rep.d_c);
    assert!(rep.cross_term.unwrap().within(0.0, 3.0));
    assert!(rep.d_total.unwrap().within(0.25 + 0.1875, 3.0));
}

#[test]
fn reconstruction_mode_powers_match() {
    let m = TrmGenerator {
        n: 3,
        m_s: 2,
        m_c: 2,
        t: 16,
        noise_s: 1.0,
        noise_c: 1.0,
        power: 0.1,
    }
    .generate(4)
    .unwrap();
    let x = GramMatrix::isotropic(&m).waveform(m.t);
    let rep = simulate_end_to_end(&m, &x, 2.0, 50_000, 9, &SimOptions::default()).unwrap();
    let emp = rep.mode_power.unwrap();
    for (e, want) in emp.iter().zip(rep.analytic_mode_power.unwrap()) {
        assert!(e.within(want, 4.0), "{e:?} vs {want}");
    }
    assert!(rep.d_s.within(rep.analytic_d_s, 4.0));
}

#[test]
fn fixed_seed_is_reproducible() {
    let (m, x) = scalar();
    let opts = SimOptions {
        chunk_size: 1000,
        record_trials: true,
    };
    let a = simulate_end_to_end(&m, &x, 1.0, 5_500, 3, &opts).unwrap();
    let b = simulate_end_to_end(&m, &x, 1.0, 5_500, 3, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trials.as_ref().unwrap().len(), 5_500);
    let c = simulate_end_to_end(&m, &x, 1.0, 5_500, 4, &opts).unwrap();
    assert_ne!(a.d_s.mean, c.d_s.mean);
}

#[test]
fn invalid_inputs_are_rejected() {
    let (m, x) = scalar();
    assert!(simulate_sensing(&m, &x, 0, 1, &SimOptions::default()).is_err());
    assert!(simulate_end_to_end(&m, &x, -1.0, 10, 1, &SimOptions::default()).is_err());
    let wide = CMat::from_element(2, 1, C64::new(1.0, 0.0));
    assert!(simulate_sensing(&m, &wide, 10, 1, &SimOptions::default()).is_err());
}
