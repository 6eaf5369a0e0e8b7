//! The three study configurations.

use std::collections::BTreeMap;

use cosim::Scheme;
use grid_rms::BusKind;
use wtg_control::{ConverterParams, FrtParams, OuterQMode};

use crate::data::{self, FAULT_BUS, FAULT_DURATION, FAULT_START, PCC_BUS, WPP_MVA};
use crate::error::ScenarioError;
use crate::layout::WppLayout;
use crate::schema::*;

pub const MACRO_STEP: f64 = 1e-3;
pub const MICRO_STEP: f64 = 5e-4;
pub const T_END: f64 = 3.0;

/// Reactive power the park controller asks of the whole plant (MVAr).
pub const PARK_Q_SETPOINT_MVAR: f64 = 0.0;

pub const COLLECTOR_BUS: u32 = 100;
/// Park transformer, collector bus to PCC (pu on the system base).
pub const PARK_TRANSFORMER: (f64, f64) = (0.002, 0.06);

fn master() -> MasterSection {
    MasterSection {
        scheme: Scheme::Serial,
        macro_step: MACRO_STEP,
        micro_step: MICRO_STEP,
        t_end: T_END,
        order: None,
        record: Vec::new(),
    }
}

fn fault() -> EventSpec {
    EventSpec {
        kind: EventKind::Fault,
        bus: FAULT_BUS,
        start: FAULT_START,
        duration: FAULT_DURATION,
        admittance: 1e6,
    }
}

/// The eleven connections joining one turbine's controllers to the grid.
pub fn unit_connections(unit: &str) -> Vec<ConnectionSpec> {
    let g = |v: &str| format!("{GRID_ID}.{unit}.{v}");
    let c = |v: &str| format!("{}.{v}", converter_id(unit));
    let f = |v: &str| format!("{}.{v}", frt_id(unit));
    [
        (g("V"), c("V_mag")),
        (g("P"), c("P_meas")),
        (g("Q"), c("Q_meas")),
        (f("mode"), c("frt_mode")),
        (f("block_active"), c("block_active")),
        (f("i_q_boost"), c("i_q_boost")),
        (f("i_d_ref_limited"), c("i_d_ref_limited")),
        (g("V"), f("V_mag")),
        (c("i_d_cmd"), f("i_d_cmd")),
        (c("i_d_cmd"), g("i_d")),
        (c("i_q_cmd"), g("i_q")),
    ]
    .into_iter()
    .map(|(a, b)| ConnectionSpec::new(a, b))
    .collect()
}

fn record(mode: Mode, probe: &str) -> Vec<RecordEntry> {
    let e = |channel: &str, var: String| RecordEntry { channel: channel.into(), var };
    let (id, iq, fm) = match mode {
        Mode::Monolithic => (
            format!("{GRID_ID}.{probe}.i_d_cmd"),
            format!("{GRID_ID}.{probe}.i_q_cmd"),
            format!("{GRID_ID}.{probe}.frt_mode"),
        ),
        Mode::Cosim => (
            format!("{}.i_d_cmd", converter_id(probe)),
            format!("{}.i_q_cmd", converter_id(probe)),
            format!("{}.mode", frt_id(probe)),
        ),
    };
    vec![
        e("V_pcc", format!("{GRID_ID}.V_pcc")),
        e("P_wpp", format!("{GRID_ID}.P_pcc")),
        e("Q_wpp", format!("{GRID_ID}.Q_pcc")),
        e("V_wtg", format!("{GRID_ID}.{probe}.V")),
        e("i_d_cmd", id),
        e("i_q_cmd", iq),
        e("frt_mode", fm),
        e("speed_G2", format!("{GRID_ID}.G2.speed")),
        e("balance_residual", format!("{GRID_ID}.balance_residual")),
    ]
}

fn aggregated(name: &str, mode: Mode) -> Scenario {
    let unit = "wpp";
    let mut m = master();
    m.record = record(mode, unit);
    Scenario {
        name: name.into(),
        mode,
        master: m,
        network: data::nine_bus(),
        wtg: WtgSection {
            wpp_rating_mva: WPP_MVA,
            units: vec![WtgUnit {
                id: unit.into(),
                bus: PCC_BUS,
                rating_mva: WPP_MVA,
                converter: unit.into(),
                frt: unit.into(),
            }],
        },
        controller: ControllerSection {
            converter: BTreeMap::from([(unit.to_string(), ConverterParams::default())]),
            frt: BTreeMap::from([(unit.to_string(), FrtParams::default())]),
        },
        connections: match mode {
            Mode::Cosim => unit_connections(unit),
            Mode::Monolithic => Vec::new(),
        },
        events: vec![fault()],
    }
}

/// Aggregated plant with its controllers inside the grid's own time loop.
pub fn build_monolithic() -> Scenario {
    aggregated("monolithic", Mode::Monolithic)
}

/// Aggregated plant as three components: grid, converter, FRT supervisor.
pub fn build_small_scale() -> Scenario {
    aggregated("small_scale", Mode::Cosim)
}

pub fn build_large_scale() -> Result<Scenario, ScenarioError> {
    build_large_scale_with(&WppLayout::default())
}

/// Disaggregated plant: one turbine per array position on an explicit
/// collector grid, each with its own converter and FRT components.
pub fn build_large_scale_with(layout: &WppLayout) -> Result<Scenario, ScenarioError> {
    layout.validate()?;
    let n = layout.turbine_count();
    let total = layout.turbine_mva * n as f64;
    if (total - WPP_MVA).abs() > RATING_TOL {
        return Err(ScenarioError::Layout(format!(
            "{n} turbines of {} MVA give {total} MVA, plant is {WPP_MVA} MVA",
            layout.turbine_mva
        )));
    }

    let mut network = data::nine_bus();
    let (z, b) = layout.segment_pu(network.base_mva);
    network.buses.push(BusSpec {
        id: COLLECTOR_BUS,
        kind: BusKind::Pq,
        base_kv: layout.collector_kv,
        v_set: 1.0,
        p_gen: 0.0,
        p_load: 0.0,
        q_load: 0.0,
    });
    network.branches.push(BranchSpec {
        from: COLLECTOR_BUS,
        to: PCC_BUS,
        r: PARK_TRANSFORMER.0,
        x: PARK_TRANSFORMER.1,
        b: 0.0,
        tap: 1.0,
    });
    network.pcc_branch = Some([COLLECTOR_BUS, PCC_BUS]);

    let width = n.to_string().len().max(2);
    let id_of = |t: usize| format!("wt{:0width$}", t + 1);
    let bus_of = |t: usize| COLLECTOR_BUS + 1 + t as u32;
    let (edges, _) = layout.tree(network.base_mva);
    for &(up, down, _) in &edges {
        let from = if up == 0 { COLLECTOR_BUS } else { bus_of(up - 1) };
        let to = bus_of(down - 1);
        network.buses.push(BusSpec {
            id: to,
            kind: BusKind::Pq,
            base_kv: layout.collector_kv,
            v_set: 1.0,
            p_gen: 0.0,
            p_load: 0.0,
            q_load: 0.0,
        });
        network.branches.push(BranchSpec { from, to, r: z.re, x: z.im, b, tap: 1.0 });
    }

    let conv = ConverterParams {
        outer_q_mode: OuterQMode::ReactivePower,
        q_ref: PARK_Q_SETPOINT_MVAR / total,
        ..ConverterParams::default()
    };
    let frt = FrtParams { ramp_enabled: false, ..FrtParams::default() };
    let key = "turbine".to_string();
    let units: Vec<WtgUnit> = (0..n)
        .map(|t| WtgUnit {
            id: id_of(t),
            bus: bus_of(t),
            rating_mva: layout.turbine_mva,
            converter: key.clone(),
            frt: key.clone(),
        })
        .collect();
    let connections = units.iter().flat_map(|u| unit_connections(&u.id)).collect();
    let mut m = master();
    m.record = record(Mode::Cosim, &units[0].id);

    let s = Scenario {
        name: "large_scale".into(),
        mode: Mode::Cosim,
        master: m,
        network,
        wtg: WtgSection { wpp_rating_mva: WPP_MVA, units },
        controller: ControllerSection {
            converter: BTreeMap::from([(key.clone(), conv)]),
            frt: BTreeMap::from([(key, frt)]),
        },
        connections,
        events: vec![fault()],
    };
    s.validate()?;
    Ok(s)
}
