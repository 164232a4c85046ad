//! Tiled GEMM execution on a BR x BC macro array.
//!
//! A GEMM multiplies an `M x K` activation matrix by a `K x N` weight matrix.
//! The array works through it in rounds; one round pairs every macro's
//! `(PC * LSL) x AL` weight block with one `AL x TL` activation block and
//! takes `LSL` weight-row passes. How the GEMM axes are spread over the array
//! depends on the dataflow:
//!
//! | mapping | array rows | array columns | m_tile   | n_tile        | k_tile   |
//! |---------|------------|---------------|----------|---------------|----------|
//! | WS      | K slices   | N slices      | TL       | BC * PC * LSL | BR * AL  |
//! | OS      | M slices   | N slices      | BR * TL  | BC * PC * LSL | AL       |
//!
//! Edge tiles run at full-tile cost; only real MACs are counted.

mod engine;

use std::fmt;

use crate::design_space::{Dataflow, DesignPoint, Interconnect};
use crate::error::{Error, Result};
use crate::macro_model::{macro_timing, SimMode};

use engine::{Discipline, Engine, EngineOutput, EngineParams, UpdateChain};
pub use engine::EventKind;

/// GEMM dimensions: activations `M x K`, weights `K x N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GemmSpec {
    pub m: u64,
    pub n: u64,
    pub k: u64,
}

impl GemmSpec {
    pub fn new(m: u64, n: u64, k: u64) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::Argument(format!("GEMM dimensions must be positive (got {m}x{n}x{k})")));
        }
        Ok(GemmSpec { m, n, k })
    }

    pub fn macs(&self) -> u128 {
        self.m as u128 * self.n as u128 * self.k as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapping {
    WsMap,
    OsMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tiling {
    pub n_m: u64,
    pub n_n: u64,
    pub n_k: u64,
    pub m_tile: u64,
    pub n_tile: u64,
    pub k_tile: u64,
    pub mapping: Mapping,
}

impl Tiling {
    pub fn rounds(&self) -> u64 {
        self.n_m * self.n_n * self.n_k
    }
}

pub fn tile(gemm: &GemmSpec, point: &DesignPoint) -> Tiling {
    let m = point.macro_cfg();
    let a = point.array();
    let n_tile = a.bc as u64 * m.pc as u64 * m.lsl as u64;
    let (mapping, m_tile, k_tile) = match a.dataflow {
        Dataflow::Ws => (Mapping::WsMap, a.tl as u64, a.br as u64 * m.al as u64),
        Dataflow::Os => (Mapping::OsMap, a.br as u64 * a.tl as u64, m.al as u64),
    };
    Tiling {
        n_m: gemm.m.div_ceil(m_tile),
        n_n: gemm.n.div_ceil(n_tile),
        n_k: gemm.k.div_ceil(k_tile),
        m_tile,
        n_tile,
        k_tile,
        mapping,
    }
}

/// Elements of an axis of length `dim` actually covered when it is cut into
/// `tiles` tiles, each split into `parts` sub-blocks of `part` elements.
fn axis_coverage(dim: u64, tiles: u64, parts: u64, part: u64) -> u64 {
    let mut covered = 0;
    for t in 0..tiles {
        for q in 0..parts {
            let offset = (t * parts + q) * part;
            covered += dim.saturating_sub(offset).min(part);
        }
    }
    covered
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub mode: SimMode,
    /// Exact mode only: skip the rewrite after the final pass.
    pub elide_last_update: bool,
}

impl SimOptions {
    pub fn paper() -> Self {
        SimOptions::default()
    }

    pub fn exact() -> Self {
        SimOptions {
            mode: SimMode::Exact,
            elide_last_update: false,
        }
    }
}

/// Totals and activity counters of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimResult {
    pub total_cycles: u64,
    /// Real MACs performed (`M * N * K`).
    pub macs_executed: u128,
    /// Includes the initial weight-tile preload.
    pub weight_rows_written: u64,
    /// Macro-cycles neither computing nor updating, after the macro's first event.
    pub idle_macro_cycles: u64,
    pub activation_transfers: u128,
    pub weight_transfers: u128,
    pub output_transfers: u128,
    pub compute_macro_cycles: u64,
    pub update_macro_cycles: u64,
    /// Macro-cycles before each macro's first event (systolic entry skew).
    pub skew_fill_cycles: u64,
    /// Macro-cycles between the end of one pass and the start of the next.
    pub stall_cycles: u64,
    pub rounds: u64,
}

impl SimResult {
    /// Adds another result's counters; cycles add as for back-to-back runs.
    pub fn accumulate(&mut self, other: &SimResult, repeat: u64) {
        let r = repeat;
        self.total_cycles += other.total_cycles * r;
        self.macs_executed += other.macs_executed * r as u128;
        self.weight_rows_written += other.weight_rows_written * r;
        self.idle_macro_cycles += other.idle_macro_cycles * r;
        self.activation_transfers += other.activation_transfers * r as u128;
        self.weight_transfers += other.weight_transfers * r as u128;
        self.output_transfers += other.output_transfers * r as u128;
        self.compute_macro_cycles += other.compute_macro_cycles * r;
        self.update_macro_cycles += other.update_macro_cycles * r;
        self.skew_fill_cycles += other.skew_fill_cycles * r;
        self.stall_cycles += other.stall_cycles * r;
        self.rounds += other.rounds * r;
    }

    /// Merges results of cores running side by side: counters add, cycles take the max.
    pub fn merge_parallel(&mut self, other: &SimResult) {
        let cycles = self.total_cycles.max(other.total_cycles);
        self.accumulate(other, 1);
        self.total_cycles = cycles;
    }
}

fn discipline(dataflow: Dataflow, interconnect: Interconnect) -> Discipline {
    match (dataflow, interconnect) {
        (Dataflow::Ws, Interconnect::Broadcast) => Discipline {
            sync_compute: true,
            stagger_rows: false,
            psum_chain: false,
            left_handoff: false,
            chain: UpdateChain::ColumnSequential,
        },
        (Dataflow::Os, Interconnect::Broadcast) => Discipline {
            sync_compute: true,
            stagger_rows: false,
            psum_chain: false,
            left_handoff: false,
            chain: UpdateChain::ColumnBroadcast,
        },
        (Dataflow::Ws, Interconnect::Systolic) => Discipline {
            sync_compute: false,
            stagger_rows: true,
            psum_chain: true,
            left_handoff: false,
            chain: UpdateChain::SystolicForward,
        },
        (Dataflow::Os, Interconnect::Systolic) => Discipline {
            sync_compute: false,
            stagger_rows: true,
            psum_chain: false,
            left_handoff: true,
            chain: UpdateChain::SystolicForward,
        },
    }
}

fn engine_params(gemm: &GemmSpec, point: &DesignPoint, opts: SimOptions) -> (EngineParams, Tiling) {
    let timing = macro_timing(point);
    let tiling = tile(gemm, point);
    let fill = match opts.mode {
        SimMode::Paper => 0,
        SimMode::Exact => timing.fill_drain,
    };
    let a = point.array();
    let params = EngineParams {
        rows: a.br as usize,
        cols: a.bc as usize,
        compute: (timing.tc + fill) as i64,
        update: timing.ts as i64,
        lsl: point.macro_cfg().lsl as usize,
        rounds: tiling.rounds(),
        overlap: point.macro_cfg().ol,
        mode: opts.mode,
        elide_last_update: opts.elide_last_update,
        discipline: discipline(a.dataflow, a.interconnect),
    };
    (params, tiling)
}

fn assemble(gemm: &GemmSpec, point: &DesignPoint, tiling: &Tiling, out: &EngineOutput) -> SimResult {
    let m = point.macro_cfg();
    let a = point.array();
    let (br, bc) = (a.br as u64, a.bc as u64);
    let (al, pc, lsl, tl) = (m.al as u64, m.pc as u64, m.lsl as u64, a.tl as u64);
    let row_block = pc * lsl;
    let macs = match tiling.mapping {
        Mapping::WsMap => {
            axis_coverage(gemm.m, tiling.n_m, 1, tl) as u128
                * axis_coverage(gemm.n, tiling.n_n, bc, row_block) as u128
                * axis_coverage(gemm.k, tiling.n_k, br, al) as u128
        }
        Mapping::OsMap => {
            axis_coverage(gemm.m, tiling.n_m, br, tl) as u128
                * axis_coverage(gemm.n, tiling.n_n, bc, row_block) as u128
                * axis_coverage(gemm.k, tiling.n_k, 1, al) as u128
        }
    };
    let rounds = tiling.rounds() as u128;
    let macros = (br * bc) as u128;
    let preload = br * bc * lsl;
    let weight_rows = out.counters.update_events + preload;
    let outputs = match tiling.mapping {
        // partial sums leave every column each round
        Mapping::WsMap => rounds * bc as u128 * (lsl * pc * tl) as u128,
        // outputs stay resident until the whole K extent has streamed through
        Mapping::OsMap => {
            (tiling.n_m * tiling.n_n) as u128 * macros * (lsl * pc * tl) as u128
        }
    };
    SimResult {
        total_cycles: out.makespan,
        macs_executed: macs,
        weight_rows_written: weight_rows,
        idle_macro_cycles: out.idle,
        activation_transfers: rounds * macros * (al * tl) as u128,
        weight_transfers: weight_rows as u128 * (pc * al) as u128,
        output_transfers: outputs,
        compute_macro_cycles: out.counters.compute,
        update_macro_cycles: out.counters.update,
        skew_fill_cycles: out.skew_fill,
        stall_cycles: out.counters.stall,
        rounds: tiling.rounds(),
    }
}

/// Simulates `gemm` on the array described by `point` (a single core).
pub fn simulate(gemm: &GemmSpec, point: &DesignPoint, opts: SimOptions) -> SimResult {
    let (params, tiling) = engine_params(gemm, point, opts);
    let out = match Engine::new(params, false, None).run() {
        Ok(o) | Err(o) => o,
    };
    assemble(gemm, point, &tiling, &out)
}

/// Occupancy state of one macro over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceState {
    SkewFill,
    Compute,
    Update,
    Idle,
}

impl fmt::Display for TraceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceState::SkewFill => "skew-fill",
            TraceState::Compute => "compute",
            TraceState::Update => "update",
            TraceState::Idle => "idle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub row: u32,
    pub col: u32,
    pub start: u64,
    pub end: u64,
    pub state: TraceState,
}

impl TraceEvent {
    pub fn duration(&self) -> u64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub result: SimResult,
}

/// Largest array `trace` accepts.
pub const TRACE_MAX_DIM: u32 = 8;
pub const DEFAULT_TRACE_CAP: usize = 100_000;

fn raw_to_trace(raw: &[engine::RawEvent], rows: usize, cols: usize, makespan: u64) -> Vec<TraceEvent> {
    let mut per_macro: Vec<Vec<(u64, u64, TraceState)>> = vec![Vec::new(); rows * cols];
    for ev in raw {
        let state = match ev.kind {
            EventKind::Compute => TraceState::Compute,
            EventKind::Update => TraceState::Update,
        };
        per_macro[ev.row * cols + ev.col].push((ev.start as u64, ev.end as u64, state));
    }
    let mut out = Vec::new();
    for (i, mut busy) in per_macro.into_iter().enumerate() {
        let (row, col) = ((i / cols) as u32, (i % cols) as u32);
        busy.sort();
        let first = busy.first().map_or(makespan, |b| b.0);
        let mut states = Vec::with_capacity(busy.len() * 2 + 2);
        if first > 0 {
            states.push((0, first, TraceState::SkewFill));
        }
        let mut covered = first;
        for &(s, e, st) in &busy {
            if s > covered {
                states.push((covered, s, TraceState::Idle));
            }
            covered = covered.max(e);
            states.push((s, e, st));
        }
        if makespan > covered {
            states.push((covered, makespan, TraceState::Idle));
        }
        out.extend(states.into_iter().map(|(start, end, state)| TraceEvent {
            row,
            col,
            start,
            end,
            state,
        }));
    }
    out
}

/// Full per-macro occupancy timeline. The number of compute and update
/// events is limited by `event_cap`; on overflow the error carries the
/// events produced so far.
pub fn trace(gemm: &GemmSpec, point: &DesignPoint, opts: SimOptions, event_cap: usize) -> Result<Trace> {
    let a = point.array();
    if a.br > TRACE_MAX_DIM || a.bc > TRACE_MAX_DIM {
        return Err(Error::Argument(format!(
            "trace supports arrays up to {TRACE_MAX_DIM}x{TRACE_MAX_DIM} (got {}x{})",
            a.br, a.bc
        )));
    }
    let (params, tiling) = engine_params(gemm, point, opts);
    let (rows, cols) = (params.rows, params.cols);
    match Engine::new(params, true, Some(event_cap)).run() {
        Ok(out) => {
            let raw = out.events.as_deref().unwrap_or_default();
            let events = raw_to_trace(raw, rows, cols, out.makespan);
            Ok(Trace {
                events,
                result: assemble(gemm, point, &tiling, &out),
            })
        }
        Err(out) => {
            let raw = out.events.as_deref().unwrap_or_default();
            let partial = raw_to_trace(raw, rows, cols, out.makespan);
            Err(Error::TraceCapExceeded {
                cap: event_cap,
                partial,
            })
        }
    }
}

pub const TRACE_HEADER: &str = "row,col,start_cycle,end_cycle,state";

/// Line-oriented trace text: one header line, then one event per line.
pub fn trace_to_csv(events: &[TraceEvent]) -> String {
    let mut out = String::with_capacity(events.len() * 24 + 40);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format!("{},{},{},{},{}\n", e.row, e.col, e.start, e.end, e.state));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_space::{validate, ArrayConfig, MacroConfig};

    #[allow(clippy::too_many_arguments)]
    fn point(
        al: u32,
        lsl: u32,
        pc: u32,
        ol: bool,
        br: u32,
        bc: u32,
        tl: u32,
        dataflow: Dataflow,
        interconnect: Interconnect,
    ) -> DesignPoint {
        let m = MacroConfig {
            al,
            lsl,
            pc,
            ol,
            ..MacroConfig::default()
        };
        let a = ArrayConfig {
            br,
            bc,
            tl,
            dataflow,
            interconnect,
            ..ArrayConfig::default()
        };
        validate(&m, &a).unwrap()
    }

    #[test]
    fn llama_qkv_ws_tiling() {
        let p = point(256, 2, 16, false, 2, 4, 32, Dataflow::Ws, Interconnect::Systolic);
        let t = tile(&GemmSpec::new(8192, 4096, 4096).unwrap(), &p);
        assert_eq!((t.k_tile, t.n_k), (512, 8));
        assert_eq!((t.n_tile, t.n_n), (128, 32));
        assert_eq!((t.m_tile, t.n_m), (32, 256));
        assert_eq!(t.mapping, Mapping::WsMap);
    }

    #[test]
    fn unit_gemm_and_os_tiling() {
        let p = point(64, 4, 8, true, 3, 5, 16, Dataflow::Os, Interconnect::Broadcast);
        let t = tile(&GemmSpec::new(1, 1, 1).unwrap(), &p);
        assert_eq!((t.n_m, t.n_n, t.n_k), (1, 1, 1));
        let p = point(8, 2, 2, false, 2, 1, 16, Dataflow::Os, Interconnect::Systolic);
        assert_eq!(tile(&GemmSpec::new(100, 100, 100).unwrap(), &p).m_tile, 32);
    }

    #[test]
    fn axis_coverage_partitions() {
        assert_eq!(axis_coverage(10, 3, 2, 2), 10);
        assert_eq!(axis_coverage(4096, 8, 2, 256), 4096);
        assert_eq!(axis_coverage(1, 1, 8, 256), 1);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(GemmSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn ws_broadcast_two_rows_one_pass() {
        let p = point(8, 2, 2, false, 2, 1, 8, Dataflow::Ws, Interconnect::Broadcast);
        let t = macro_timing(&p);
        // one round with LSL=2 is two passes of Tc + 2 Ts each
        let r = simulate(&GemmSpec::new(8, 4, 16).unwrap(), &p, SimOptions::paper());
        assert_eq!(r.rounds, 1);
        assert_eq!(r.total_cycles, 2 * (t.tc + 2 * t.ts));
        // every macro waits Ts per pass while its column neighbour rewrites
        assert_eq!(r.idle_macro_cycles, 2 * 2 * t.ts);
    }

    #[test]
    fn extrapolation_matches_full_replay() {
        let gemm = GemmSpec::new(300, 200, 700).unwrap();
        for df in Dataflow::ALL {
            for ic in Interconnect::ALL {
                for ol in [false, true] {
                    for mode in [SimOptions::paper(), SimOptions::exact()] {
                        let p = point(32, 4, 8, ol, 3, 2, 16, df, ic);
                        let fast = simulate(&gemm, &p, mode);
                        let (params, tiling) = engine_params(&gemm, &p, mode);
                        let slow = Engine::new(params, true, None).run().unwrap();
                        let slow = assemble(&gemm, &p, &tiling, &slow);
                        assert_eq!(fast, slow, "{} {:?}", p.flow_tag(), mode);
                    }
                }
            }
        }
    }

    #[test]
    fn long_runs_are_extrapolated() {
        let gemm = GemmSpec::new(4096, 1024, 1024).unwrap();
        for df in Dataflow::ALL {
            for ic in Interconnect::ALL {
                for ol in [false, true] {
                    for mode in [SimOptions::paper(), SimOptions::exact()] {
                        let p = point(64, 2, 8, ol, 2, 2, 32, df, ic);
                        let (params, _) = engine_params(&gemm, &p, mode);
                        let rounds = params.rounds;
                        let out = Engine::new(params, false, None).run().unwrap();
                        assert!(out.extrapolated_rounds > rounds / 2, "{} {:?}", p.flow_tag(), mode);
                    }
                }
            }
        }
    }
}
