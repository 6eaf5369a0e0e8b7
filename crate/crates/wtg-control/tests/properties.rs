use proptest::prelude::*;
use wtg_control::{
    current_limit, Converter, ConverterParams, FrtMode, FrtParams, FrtSupervisor, Measurements,
    OuterQMode, Priority,
};

fn priority() -> impl Strategy<Value = Priority> {
    prop_oneof![Just(Priority::Active), Just(Priority::Reactive)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn limiter_never_exceeds_ceiling(
        d in -1e3f64..1e3,
        q in -1e3f64..1e3,
        i_max in 1e-3f64..10.0,
        pr in priority(),
    ) {
        let (a, b) = current_limit(d, q, i_max, pr);
        prop_assert!(a.hypot(b) <= i_max + 1e-9);
        prop_assert!(a == 0.0 || a.signum() == d.signum());
        prop_assert!(b == 0.0 || b.signum() == q.signum());
        if d.hypot(q) <= i_max {
            prop_assert_eq!((a, b), (d, q));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Closed loop of supervisor and converter against an arbitrary voltage
    /// sequence and a resistive plant.
    #[test]
    fn closed_loop_invariants(
        volts in prop::collection::vec(0.0f64..1.2, 1..400),
        q_mode in any::<bool>(),
        ramp in any::<bool>(),
    ) {
        let dt = 1e-3;
        let params = ConverterParams {
            outer_q_mode: if q_mode { OuterQMode::ReactivePower } else { OuterQMode::VoltageMagnitude },
            ..ConverterParams::default()
        };
        let mut conv = Converter::new(params).unwrap();
        conv.settle(&Measurements { v_mag: 1.0, p: 1.0, q: 0.0 }).unwrap();
        let fp = FrtParams { ramp_enabled: ramp, ..FrtParams::default() };
        let mut frt = FrtSupervisor::new(fp.clone()).unwrap();
        frt.settle(conv.commands().0);
        let mut prev_mode = FrtMode::Normal;
        let mut prev_ref = frt.state().i_d_ref_limited;
        for v in volts {
            let (i_d, i_q) = conv.commands();
            let ov = frt.step(v, i_d, dt).unwrap();
            prop_assert!(prev_mode.can_transition(ov.mode));
            let m = Measurements { v_mag: v, p: v * i_d, q: v * i_q };
            let (d, q) = conv.step(&m, &ov, dt).unwrap();
            prop_assert!(d.hypot(q) <= 1.1 + 1e-9);
            if ov.mode == FrtMode::Fault {
                prop_assert_eq!(d, 0.0);
                prop_assert!(ov.block_active);
            }
            if ramp && ov.mode == FrtMode::Recovery && prev_mode == FrtMode::Recovery {
                prop_assert!((ov.i_d_ref_limited - prev_ref).abs() <= fp.ramp_rate * dt + 1e-12);
            }
            prev_mode = ov.mode;
            prev_ref = ov.i_d_ref_limited;
        }
    }
}
