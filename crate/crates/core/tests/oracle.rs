use adtn_core::netsim::{
    contact_oracle, GroupSpec, Injection, Mobility, OracleInput, OracleOutcome, OracleVerdict, Payload, Scenario,
};
use adtn_core::{NodeId, SourceCachePolicy};
use proptest::prelude::*;

/// A small scenario whose node policies never drop the message early.
fn scenario(seed: u64, nodes: u32, group_count: usize, memberships: &[u8], mobile: bool, period: u64) -> Scenario {
    let mut s = Scenario::single_group(nodes, 600);
    s.seed = seed;
    s.arena.width = 300.0;
    s.arena.height = 300.0;
    s.radio_range = 90.0;
    if mobile {
        s.mobility = Mobility::RandomWaypoint { speed_min: 2.0, speed_max: 6.0, pause: 5 };
    }
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); group_count];
    for n in 0..nodes {
        let mask = memberships[n as usize] as usize % (1 << group_count);
        let mask = if mask == 0 { 1 << (n as usize % group_count) } else { mask };
        for (g, members) in groups.iter_mut().enumerate() {
            if mask & (1 << g) != 0 {
                members.push(NodeId(n));
            }
        }
    }
    // every group needs two members; pad from the front
    for members in &mut groups {
        for n in 0..nodes {
            if members.len() >= 2 {
                break;
            }
            if !members.contains(&NodeId(n)) {
                members.push(NodeId(n));
            }
        }
    }
    s.groups = groups
        .into_iter()
        .enumerate()
        .map(|(i, members)| GroupSpec { name: format!("g{i}"), members })
        .collect();
    s.policies.tx_period = period;
    s.policies.freshness_age = 10_000;
    s.policies.overheard_cap = 10_000;
    s.policies.retransmit_cap = 10_000;
    s.policies.seen_forget = 20_000;
    s.traffic = vec![Injection { tick: 5, node: NodeId(0), payload: Payload::Random(40), to: None }];
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn protocol_meets_oracle(
        seed in any::<u64>(),
        nodes in 2u32..=15,
        group_count in 1usize..=4,
        memberships in prop::collection::vec(any::<u8>(), 15),
        mobile in any::<bool>(),
        period in 1u64..6,
    ) {
        let s = scenario(seed, nodes, group_count, &memberships, mobile, period);
        let outcome = OracleOutcome::check(&s).unwrap();
        prop_assert_eq!(&outcome.verdict, &OracleVerdict::Match, "oracle {:?} protocol {:?}", outcome.oracle, outcome.protocol);
    }
}

#[test]
fn caching_or_extra_traffic_voids_the_comparison() {
    let mut s = scenario(1, 5, 2, &[1, 2, 3, 1, 2], false, 3);
    s.policies.source_cache = SourceCachePolicy::On { fail_threshold: 2, expiry: 100 };
    assert!(matches!(OracleOutcome::check(&s).unwrap().verdict, OracleVerdict::Invalid(_)));

    let mut s = scenario(1, 5, 2, &[1, 2, 3, 1, 2], false, 3);
    s.traffic.push(s.traffic[0].clone());
    assert!(matches!(OracleOutcome::check(&s).unwrap().verdict, OracleVerdict::Invalid(_)));
}

#[test]
fn early_staleness_voids_the_comparison() {
    let mut s = scenario(3, 10, 1, &[1; 15], true, 4);
    s.policies.retransmit_cap = 1;
    s.policies.overheard_cap = 1;
    let outcome = OracleOutcome::check(&s).unwrap();
    assert!(matches!(outcome.verdict, OracleVerdict::Invalid(_)), "{:?}", outcome.verdict);
}

#[test]
fn oracle_input_follows_the_scenario() {
    let s = scenario(8, 6, 3, &[1, 2, 4, 3, 5, 6], true, 2);
    let input = OracleInput::from_scenario(&s, 0).unwrap();
    assert_eq!(input.trace.len(), 600);
    assert_eq!(input.origin, NodeId(0));
    assert_eq!(input.start, 5);
    let arrivals = contact_oracle(&input);
    assert_eq!(arrivals[0], Some(5));
    assert!(arrivals.iter().flatten().all(|&t| t >= 5));
}
