use wtg_control::{
    Converter, ConverterParams, FrtMode, FrtOverrides, Measurements, OuterQMode, Priority,
};

const DT: f64 = 1e-3;

fn settled(params: ConverterParams, v: f64) -> Converter {
    let mut c = Converter::new(params).unwrap();
    let (p, q) = (c.params().p_ref, c.params().q_ref);
    c.settle(&Measurements { v_mag: v, p, q }).unwrap();
    c
}

/// Algebraic plant: the terminal powers follow the previous command.
fn measure(v: f64, (i_d, i_q): (f64, f64)) -> Measurements {
    Measurements { v_mag: v, p: v * i_d, q: v * i_q }
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let mut c = settled(ConverterParams { q_ref: 0.1, ..ConverterParams::default() }, 1.02);
    let start = c.commands();
    for _ in 0..1000 {
        let m = measure(1.02, c.commands());
        c.step(&m, &FrtOverrides::none(start.0), DT).unwrap();
    }
    assert!((c.commands().0 - start.0).abs() < 1e-12);
    assert!((c.commands().1 - start.1).abs() < 1e-12);
}

#[test]
fn fault_boost_follows_dip_depth() {
    // No q-loop gains, so the q command is the boost alone.
    let params = ConverterParams { kp_v: 0.0, ki_v: 0.0, i_max: 10.0, ..ConverterParams::default() };
    let mut c = settled(params, 1.0);
    let ov = FrtOverrides {
        mode: FrtMode::Fault,
        block_active: true,
        i_q_boost: 2.0 * (0.9 - 0.3),
        i_d_ref_limited: 0.0,
    };
    let (i_d, i_q) = c.step(&Measurements { v_mag: 0.3, p: 0.3, q: 0.0 }, &ov, DT).unwrap();
    assert_eq!(i_d, 0.0);
    assert!((i_q - 1.2).abs() < 1e-12);
}

#[test]
fn active_power_step_settles_within_100_ms() {
    let mut c = settled(ConverterParams { p_ref: 0.5, ..ConverterParams::default() }, 1.0);
    c.set_p_ref(0.6);
    let mut last = 0.0;
    let mut settled_at = None;
    for k in 1..=300 {
        let m = measure(1.0, c.commands());
        last = m.p;
        if (m.p - 0.6).abs() > 1e-3 {
            settled_at = None;
        } else if settled_at.is_none() {
            settled_at = Some(k as f64 * DT);
        }
        c.step(&m, &FrtOverrides::none(0.0), DT).unwrap();
    }
    let t = settled_at.expect("never settled");
    assert!(t <= 0.1, "settled at {t} s");
    assert!((last - 0.6).abs() < 1e-6);
}

#[test]
fn integrator_does_not_wind_up_while_saturated() {
    let mut c = settled(ConverterParams { p_ref: 0.5, ..ConverterParams::default() }, 1.0);
    // Unreachable reference: the limiter pins i_d at I_max for two seconds.
    c.set_p_ref(3.0);
    for _ in 0..2000 {
        let m = measure(1.0, c.commands());
        c.step(&m, &FrtOverrides::none(0.0), DT).unwrap();
    }
    assert_eq!(c.commands().0, 1.1);
    c.set_p_ref(0.5);
    // The integrator holds what it had when clipping began instead of
    // accumulating two seconds of error.
    let step = 2.5;
    assert!((c.state().integ_d - 0.5).abs() <= 0.1 * step);
    let tau = (1.0 + c.params().kp_d) / c.params().ki_d;
    let tau_steps = (tau / DT).round() as usize;
    let mut left_at = None;
    let mut worst_after_tau: f64 = 0.0;
    for k in 1..=500 {
        let m = measure(1.0, c.commands());
        c.step(&m, &FrtOverrides::none(0.0), DT).unwrap();
        if left_at.is_none() && c.commands().0 < 1.1 {
            left_at = Some(k as f64 * DT);
        }
        if k > tau_steps {
            worst_after_tau = worst_after_tau.max((c.commands().0 - 0.5).abs());
        }
    }
    assert!(left_at.unwrap() <= tau + 1e-12, "left the limit at {left_at:?}");
    assert!(worst_after_tau <= 0.1 * step, "deviation {worst_after_tau} after one time constant");
    assert!((c.commands().0 - 0.5).abs() < 1e-6);
}

#[test]
fn outer_loop_switches_with_mode() {
    let params = ConverterParams {
        outer_q_mode: OuterQMode::ReactivePower,
        priority: Priority::Active,
        ..ConverterParams::default()
    };
    // Q error only: V sits at its reference.
    let m = Measurements { v_mag: 1.0, p: 1.0, q: -0.2 };

    let mut normal = settled(params.clone(), 1.0);
    normal.step(&m, &FrtOverrides::none(1.0), DT).unwrap();
    assert!(normal.commands().1 > 0.05, "Q mode must react to the Q error");

    let mut fault = settled(params, 1.0);
    let ov = FrtOverrides { mode: FrtMode::Fault, block_active: true, i_q_boost: 0.0, i_d_ref_limited: 0.0 };
    fault.step(&m, &ov, DT).unwrap();
    assert_eq!(fault.commands().1, 0.0, "voltage mode ignores the Q error");
}

#[test]
fn recovery_caps_active_current_at_the_ramp() {
    let mut c = settled(ConverterParams::default(), 1.0);
    let ov = FrtOverrides { mode: FrtMode::Recovery, block_active: false, i_q_boost: 0.0, i_d_ref_limited: 0.3 };
    let (i_d, _) = c.step(&Measurements { v_mag: 1.0, p: 0.0, q: 0.0 }, &ov, DT).unwrap();
    assert_eq!(i_d, 0.3);
    // Integrator held at its pre-fault value while the ramp overrides.
    assert_eq!(c.state().integ_d, 1.0);
}

#[test]
fn infeasible_operating_point_is_reported() {
    let mut c = Converter::new(ConverterParams { p_ref: 1.05, ..ConverterParams::default() }).unwrap();
    let err = c.settle(&Measurements { v_mag: 0.9, p: 1.05, q: 0.0 }).unwrap_err();
    assert!(matches!(err, wtg_control::ControlError::InfeasibleEquilibrium { .. }));
}

#[test]
fn invalid_gains_rejected() {
    assert!(Converter::new(ConverterParams { kp_d: -1.0, ..ConverterParams::default() }).is_err());
    assert!(Converter::new(ConverterParams { kp_d: 0.0, ki_d: 0.0, ..ConverterParams::default() }).is_err());
    assert!(Converter::new(ConverterParams { i_max: 0.0, ..ConverterParams::default() }).is_err());
}
