//! Per-slot solver against exhaustive enumeration, plus queue properties.

mod support;

use gocoexist::optimizer::{solve_slot, DecisionMode, DriftCheck, SolverConfig, VirtualQueueState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{genie_success, naive_solve, random_instance};

fn solve(inst: &support::Instance, mode: DecisionMode, z: f64, omega: f64) -> gocoexist::optimizer::SlotDecision {
    let cfg = SolverConfig { omega, mode };
    solve_slot(
        z,
        &inst.channel,
        inst.d_comp,
        &inst.table,
        &cfg,
        &inst.radio,
        &inst.req,
        Some(&inst.theta),
    )
    .unwrap()
}

#[test]
fn fast_search_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..2000 {
        let inst = random_instance(&mut rng);
        let fast = solve(&inst, DecisionMode::Approximate, inst.z, inst.omega);
        assert_eq!(fast, naive_solve(&inst, &inst.table.p_success));
        let genie = solve(&inst, DecisionMode::Genie, inst.z, inst.omega);
        assert_eq!(genie, naive_solve(&inst, &genie_success(&inst)));
    }
}

#[test]
fn argmin_invariant_under_joint_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..500 {
        let inst = random_instance(&mut rng);
        let c = 2f64.powi(k % 9 - 4);
        let a = solve(&inst, DecisionMode::Approximate, inst.z, inst.omega);
        let b = solve(&inst, DecisionMode::Approximate, c * inst.z, c * inst.omega);
        assert_eq!((a.per_index, a.power_index), (b.per_index, b.power_index));
    }
}

#[test]
fn zero_weight_and_empty_queue_pick_first_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = random_instance(&mut rng);
    let d = solve(&inst, DecisionMode::Approximate, 0.0, 0.0);
    assert_eq!((d.per_index, d.power_index), (0, 0));
}

proptest! {
    #[test]
    fn queue_non_negative_and_bounded_step(z in 0.0f64..1e4, e_th in 0.0f64..1.0, success: bool) {
        let next = VirtualQueueState { z }.update(success, e_th);
        prop_assert!(next.z >= 0.0);
        prop_assert!((next.z - z).abs() <= 1.0);
    }

    #[test]
    fn drift_bound_with_symmetric_constant(z in 0.0f64..1e3, e_th in 0.0f64..1.0, success: bool) {
        let next = VirtualQueueState { z }.update(success, e_th).z;
        prop_assert!(DriftCheck::new(z, next, success, e_th).holds());
    }
}

#[test]
fn stated_constant_fails_on_failures_above_one_half() {
    // Z large enough that the max(0, ·) is inactive.
    let check = DriftCheck::new(10.0, 10.8, false, 0.8);
    assert!(!check.holds_success_constant());
    assert!(check.holds());
    let check = DriftCheck::new(10.0, 10.3, false, 0.3);
    assert!(check.holds_success_constant());
}
