use std::collections::HashSet;

use scenario::*;

fn component_count(s: &Scenario) -> usize {
    assemble(s).unwrap().handles().len()
}

#[test]
fn component_counts() {
    assert_eq!(component_count(&build_monolithic()), 1);
    assert_eq!(component_count(&build_small_scale()), 3);
    assert_eq!(component_count(&build_large_scale().unwrap()), 65);
}

#[test]
fn small_scale_wiring() {
    let s = build_small_scale();
    assert!(s.connections.len() >= 6);
    assert_eq!(s.connections.len(), 11);
    let m = assemble(&s).unwrap();
    assert_eq!(m.order(), vec!["grid", "frt_wpp", "conv_wpp"]);
    assert_eq!(s.wtg.units[0].bus, 3);
    assert_eq!(s.wtg.units[0].rating_mva, 85.0);
}

#[test]
fn large_scale_topology() {
    let s = build_large_scale().unwrap();
    let (net, branch) = build_network(&s).unwrap();
    assert_eq!(net.buses.len(), 9 + 32 + 1);
    assert_eq!(net.branches.len(), 9 + 32 + 1);
    assert!(branch.is_some());
    assert_eq!(s.connections.len(), 32 * 11);
    assert_eq!(net.buses.iter().filter(|b| b.kind == grid_rms::BusKind::Slack).count(), 1);
    net.validate().unwrap();
    let total: f64 = s.wtg.units.iter().map(|u| u.rating_mva).sum();
    assert!((total - 85.0).abs() < 1e-9);
    assert!(s.controller.frt.values().all(|f| !f.ramp_enabled));
    let ids: HashSet<_> = s.wtg.units.iter().map(|u| u.id.as_str()).collect();
    assert_eq!(ids.len(), 32);
}

#[test]
fn every_builder_emits_the_same_fault() {
    let all = [build_monolithic(), build_small_scale(), build_large_scale().unwrap()];
    for s in &all {
        assert_eq!(s.events.len(), 1);
        let e = &s.events[0];
        assert_eq!((e.bus, e.start, e.duration), (6, 1.0, 0.18));
        assert_eq!(s.events, all[0].events);
    }
}

#[test]
fn small_scale_and_monolithic_share_the_network() {
    let (a, pa) = build_network(&build_monolithic()).unwrap();
    let (b, pb) = build_network(&build_small_scale()).unwrap();
    assert_eq!(a, b);
    assert_eq!(pa, pb);
}

#[test]
fn layout_rating_mismatch_is_an_error() {
    let l = WppLayout { turbine_mva: 2.6, ..WppLayout::default() };
    let e = build_large_scale_with(&l).unwrap_err();
    assert_eq!(e.code(), "layout");
}

#[test]
fn short_runs_start_in_equilibrium() {
    for mut s in [build_monolithic(), build_small_scale(), build_large_scale().unwrap()] {
        s.master.t_end = 0.2;
        let run = run_scenario(&s).unwrap();
        let p = run.trace.channel("P_wpp").unwrap();
        assert_eq!(run.trace.len(), 201);
        assert!(p.iter().all(|x| (x - p[0]).abs() < 1e-9), "{}", s.name);
        assert_eq!(run.trace.meta.scenario, s.name);
        assert_eq!(run.trace.meta.event_times, vec![1.0, 1.18]);
        assert!(run.grid().is_some());
    }
}
