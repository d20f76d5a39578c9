mod common;

use timed_tx::chain::GasSchedule;
use timed_tx::econ::{path_cost, pes_cost_with_reports, pooling_report, run_cost, CostPath};
use timed_tx::protocol::{FollowerSpec, InjectionTarget, Misbehavior, PayloadSpec};

use common::*;

#[test]
fn report_totals_equal_metered_fees() {
    let g = GasSchedule::default();
    let mut scenarios = vec![honest(3, 4, 10, 34, 1), honest(2, 2, 3, 8, 2)];
    let mut pooled = honest(2, 2, 3, 8, 3);
    pooled.followers.push(FollowerSpec { fund: 0, fee: None, payload: PayloadSpec::Transfer { value: 0 } });
    scenarios.push(pooled);
    scenarios.push(honest(2, 2, 3, 8, 4).with_injection(InjectionTarget::Slot(2), Misbehavior::Withhold));
    scenarios.push(honest(2, 2, 3, 8, 5).with_injection(InjectionTarget::Slot(0), Misbehavior::Fake));
    scenarios.push(honest(2, 2, 3, 8, 6).with_injection(InjectionTarget::Slot(5), Misbehavior::Leak));
    for sc in scenarios {
        let s = run(sc).summary();
        let r = run_cost(&g, &s);
        assert_eq!(r.total_fee_wei, s.service_fee_wei, "{:?}", s.service_ops);
    }
}

#[test]
fn analytic_paths_match_runs() {
    let g = GasSchedule::default();
    let s = run(honest(3, 4, 10, 34, 7)).summary();
    assert_eq!(run_cost(&g, &s).total_gas, path_cost(&g, CostPath::Opt, 30, 1).total_gas);

    // A withholder does not reveal but is reported missing.
    let s = run(honest(2, 2, 3, 8, 8).with_injection(InjectionTarget::Slot(1), Misbehavior::Withhold)).summary();
    let full = pes_cost_with_reports(&g, CostPath::Pes, 6, 1, 1, 0);
    let one_reveal = g.gas_for("reveal", 6);
    assert_eq!(run_cost(&g, &s).total_gas, full.total_gas - one_reveal);
}

#[test]
fn pooling_average_is_monotone_and_bounded() {
    let g = GasSchedule::default();
    let fee = timed_tx::contracts::Economics::default().pool_fee;
    let rows: Vec<_> = (0..=40).map(|f| pooling_report(&g, 30, f, fee)).collect();
    for w in rows.windows(2) {
        assert!(w[1].average_per_request < w[0].average_per_request);
        assert!(w[1].average_per_request > w[1].per_follower_cost);
    }
}
