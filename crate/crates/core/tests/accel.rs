mod common;

use common::*;
use ris_bmm::accel::*;
use ris_bmm::channel::*;
use ris_bmm::design::{modulus_defect, Design};
use ris_bmm::options::{Acceleration, SolverOptions};
use ris_bmm::sr::{run_sr_bmm, sr_default_init, SrMap};
use ris_bmm::wsr::{default_init, run_wsr_bmm, WsrMap};
use ris_bmm::{CMat, C64};
use std::cell::Cell;

fn w_only(w: CMat) -> Design {
    Design { w, theta: vec![] }
}

fn opts(iters: usize) -> SolverOptions {
    SolverOptions { max_outer_iters: iters, acceleration: Acceleration::Squarem, ..Default::default() }
}

#[test]
fn fixed_point_is_returned_unchanged() {
    let mut r = rng(1);
    let x0 = Design { w: cmat(&mut r, 3, 2), theta: vec![phases(&mut r, 4)] };
    let (x, log) = squarem_wrap(|d: &Design| Ok(d.clone()), |d| d.clone(), |_| Ok(1.0), &x0, &opts(100)).unwrap();
    assert_eq!(x, x0);
    assert!(log.converged);
    assert_eq!(log.map_evaluations, 2);
}

#[test]
fn linear_contraction_solved_in_one_cycle() {
    // F(x) = (x + c)/2: r = (c−x)/2, v = −(c−x)/4, α = −2, so x − 2αr + α²v = c
    let mut r = rng(2);
    let c = cmat(&mut r, 2, 2);
    let x0 = w_only(CMat::zeros(2, 2));
    let target = c.clone();
    let step = |d: &Design| Ok(w_only((&d.w + &target) * C64::from(0.5)));
    let obj = |d: &Design| Ok(-(&d.w - &target).norm_squared());
    let (x, log, states) = squarem_trace(step, |d| d.clone(), obj, &x0, &opts(100)).unwrap();
    assert!((states[0].alpha + 2.0).abs() < 1e-12);
    assert!(states[0].accepted);
    assert!((&x.w - &c).norm() < 1e-12);
    assert!(log.converged);
}

#[test]
fn rejected_candidate_falls_back_to_two_step_point() {
    let mut r = rng(3);
    let c = cmat(&mut r, 2, 2);
    let x0 = w_only(cmat(&mut r, 2, 2));
    let target = c.clone();
    let step = |d: &Design| Ok(w_only((&d.w + &target) * C64::from(0.5)));
    let obj = |d: &Design| Ok(-(&d.w - &target).norm_squared());
    // a projection that ruins every extrapolated point
    let ruin = |d: &Design| w_only(&d.w * C64::from(50.0));
    let (x, log, states) = squarem_trace(step, ruin, obj, &x0, &opts(2)).unwrap();
    assert!(!states[0].accepted);
    assert_eq!(log.rejected, 1);
    let two_step = (&x0.w + &c * C64::from(3.0)) * C64::from(0.25);
    assert!((&x.w - two_step).norm() < 1e-14);
    assert_eq!(states[0].emitted, states[0].two_step);
}

#[test]
fn budget_counts_map_evaluations() {
    let mut r = rng(4);
    let c = cmat(&mut r, 2, 1);
    let target = c.clone();
    let calls = Cell::new(0);
    let step = |d: &Design| {
        calls.set(calls.get() + 1);
        Ok(w_only((&d.w + &target) * C64::from(0.9)))
    };
    let obj = |d: &Design| Ok(-(&d.w - &target * C64::from(9.0)).norm_squared());
    let (_, log) = squarem_wrap(step, |d| d.clone(), obj, &w_only(CMat::zeros(2, 1)), &opts(7)).unwrap();
    assert!(log.map_evaluations <= 7);
    assert_eq!(log.map_evaluations, calls.get());
    let (_, log) = squarem_wrap(|d: &Design| Ok(d.clone()), |d| d.clone(), |_| Ok(0.0), &w_only(CMat::zeros(1, 1)), &opts(1)).unwrap();
    assert_eq!(log.map_evaluations, 0);
    assert_eq!(log.iterations(), 0);
}

#[test]
fn wsr_emitted_points_feasible_and_monotone() {
    for seed in 0..10 {
        let cfg = SystemConfig::miso(4, 4, 16, 200.0);
        let ch = generate_miso(&cfg, seed).unwrap();
        let x0 = default_init(&cfg, &ch, &cfg.miso_budget(false).unwrap(), seed);
        let o = opts(200);
        let map = WsrMap::new(&cfg, &ch, &cfg.topology, &o).unwrap();
        // every point whose objective is read is feasible, emitted ones included
        let obj = |d: &Design| {
            map.check_feasible(d).unwrap();
            map.objective(d)
        };
        let (x, log, states) = squarem_trace(|d: &Design| map.step(d).map(|(n, _)| n), |d| map.project(d), obj, &x0, &o).unwrap();
        assert!(modulus_defect(&x.theta) < 1e-12);
        let f = log.objectives();
        for w in f.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "seed {seed}: {} -> {}", w[0], w[1]);
        }
        for s in &states {
            assert!(s.emitted >= s.two_step);
            assert!(s.alpha <= -1.0);
        }
        let (_, via_solver) = run_wsr_bmm(&cfg, &ch, &cfg.topology, &o, &x0).unwrap();
        assert_eq!(via_solver.objectives(), f);
    }
}

#[test]
fn sr_accelerated_run_is_monotone() {
    for seed in 0..5 {
        let cfg = SystemConfig::mimo(3, 2, 2, 2, 16, 200.0);
        let ch = generate_mimo(&cfg, seed).unwrap();
        let budgets: Vec<_> = (0..3).map(|k| cfg.pair_budget(k, false).unwrap()).collect();
        let x0 = sr_default_init(&cfg, &ch, &budgets, seed);
        let o = opts(100);
        let (x, log) = run_sr_bmm(&cfg, &ch, &o, &x0).unwrap();
        SrMap::new(&cfg, &ch, &o).unwrap().check_feasible(&x).unwrap();
        let f = log.objectives();
        for w in f.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
    }
}
