use husimi_flow::algebra::XPPolynomial;
use husimi_flow::grid::PositionGrid;
use husimi_flow::propagator::{energy, initial_coherent_state, propagate, PotentialSpec, PropagationConfig};
use husimi_flow::OscillatorParams;
use num_complex::Complex64 as C64;

fn setup() -> (OscillatorParams, PotentialSpec, PositionGrid) {
    let params = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
    let pot = PotentialSpec::from_hamiltonian(&XPPolynomial::double_well(&params, 1.0 / 3.0)).unwrap();
    (params, pot, PositionGrid::default())
}

#[test]
fn norm_holds_to_t4() {
    let (params, pot, grid) = setup();
    let wf0 = initial_coherent_state(C64::new(-0.866, 0.9228), grid, params).unwrap();
    let times: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let run = propagate(&wf0, &pot, &PropagationConfig::until(1e-3, grid, times)).unwrap();
    for s in &run.snapshots {
        assert!((s.state.norm_sqr() - 1.0).abs() < 1e-10, "t = {}", s.t);
    }
}

#[test]
fn energy_drift_stays_below_1e6() {
    let (params, pot, grid) = setup();
    let wf0 = initial_coherent_state(C64::new(-0.866, 0.9228), grid, params).unwrap();
    let e0 = energy(&wf0, &pot).re;
    let times: Vec<f64> = (1..=40).map(|k| 0.1 * k as f64).collect();
    let run = propagate(&wf0, &pot, &PropagationConfig::until(5e-4, grid, times)).unwrap();
    for s in &run.snapshots {
        let e = energy(&s.state, &pot);
        assert!(((e.re - e0) / e0).abs() < 1e-6, "t = {}: {}", s.t, e.re);
        assert!(e.im.abs() < 1e-10);
    }
}

#[test]
fn halving_the_step_converges_at_t4() {
    let (params, pot, grid) = setup();
    let wf0 = initial_coherent_state(C64::new(-0.866, 0.9228), grid, params).unwrap();
    let coarse = propagate(&wf0, &pot, &PropagationConfig::until(2.5e-4, grid, vec![4.0])).unwrap();
    let fine = propagate(&wf0, &pot, &PropagationConfig::until(1.25e-4, grid, vec![4.0])).unwrap();
    assert!(coarse.final_state.distance(&fine.final_state) < 1e-6);
}
