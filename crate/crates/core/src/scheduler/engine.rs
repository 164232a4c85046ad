//! Event timeline of a macro array executing a sequence of weight-row passes.
//!
//! Every macro runs the same loop: compute one weight row against the
//! resident activation block (`Tc`), then rewrite that row (`Ts`). The
//! dataflow only changes which events must wait for which. Event times follow
//! a max-plus recurrence, so once the whole state shifts by a constant per
//! round the remaining rounds are extrapolated exactly instead of replayed.

use std::collections::VecDeque;

use crate::macro_model::SimMode;

/// Ordering of weight-row rewrites inside one array column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum UpdateChain {
    /// One shared bus per column; rows rewrite one after another.
    ColumnSequential,
    /// A column receives one broadcast write that lands in every row at once.
    ColumnBroadcast,
    /// Each row forwards its new weights to the row below.
    SystolicForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Discipline {
    /// All macros start every pass together.
    pub sync_compute: bool,
    /// Row `r` enters `r * Ts` cycles after row 0.
    pub stagger_rows: bool,
    /// Row `r` may not start a pass before row `r - 1` plus `Ts`.
    pub psum_chain: bool,
    /// Column `c` may not start a pass before column `c - 1` of its row.
    pub left_handoff: bool,
    pub chain: UpdateChain,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineParams {
    pub rows: usize,
    pub cols: usize,
    /// Cycles one compute pass occupies (including reduction drain in exact mode).
    pub compute: i64,
    pub update: i64,
    pub lsl: usize,
    pub rounds: u64,
    pub overlap: bool,
    pub mode: SimMode,
    pub elide_last_update: bool,
    pub discipline: Discipline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Compute,
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RawEvent {
    pub row: usize,
    pub col: usize,
    pub start: i64,
    pub end: i64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub compute: u64,
    pub update: u64,
    pub overlap: u64,
    pub stall: u64,
    pub update_events: u64,
}

impl Counters {
    fn delta(&self, earlier: &Counters) -> Counters {
        Counters {
            compute: self.compute - earlier.compute,
            update: self.update - earlier.update,
            overlap: self.overlap - earlier.overlap,
            stall: self.stall - earlier.stall,
            update_events: self.update_events - earlier.update_events,
        }
    }

    fn add_scaled(&mut self, d: &Counters, times: u64) {
        self.compute += d.compute * times;
        self.update += d.update * times;
        self.overlap += d.overlap * times;
        self.stall += d.stall * times;
        self.update_events += d.update_events * times;
    }
}

#[derive(Debug, Clone)]
pub(crate) struct EngineOutput {
    pub makespan: u64,
    pub counters: Counters,
    /// Per-macro time before its first event.
    pub skew_fill: u64,
    /// Macro-cycles in `[first event, makespan)` covered by neither compute nor update.
    pub idle: u64,
    /// Set only when events were recorded.
    pub events: Option<Vec<RawEvent>>,
    /// Rounds that were extrapolated rather than replayed.
    #[cfg_attr(not(test), allow(dead_code))]
    pub extrapolated_rounds: u64,
}

#[derive(Debug, Clone)]
struct MacroState {
    c_start: i64,
    c_end: i64,
    u_end: i64,
    /// Update end times of the last `lsl` passes, oldest first.
    recent_update_ends: VecDeque<i64>,
    /// Intervals that may still overlap a future interval of the other kind.
    live_computes: VecDeque<(i64, i64)>,
    live_updates: VecDeque<(i64, i64)>,
    first_start: Option<i64>,
}

impl MacroState {
    fn new() -> Self {
        MacroState {
            c_start: 0,
            c_end: 0,
            u_end: 0,
            recent_update_ends: VecDeque::new(),
            live_computes: VecDeque::new(),
            live_updates: VecDeque::new(),
            first_start: None,
        }
    }

    fn shift(&mut self, by: i64) {
        self.c_start += by;
        self.c_end += by;
        self.u_end += by;
        for t in self.recent_update_ends.iter_mut() {
            *t += by;
        }
        for iv in self.live_computes.iter_mut().chain(self.live_updates.iter_mut()) {
            iv.0 += by;
            iv.1 += by;
        }
    }

    fn snapshot_into(&self, out: &mut Vec<i64>, shape: &mut Vec<usize>) {
        out.extend([self.c_start, self.c_end, self.u_end]);
        out.extend(self.recent_update_ends.iter().copied());
        for &(s, e) in self.live_computes.iter().chain(self.live_updates.iter()) {
            out.push(s);
            out.push(e);
        }
        shape.extend([
            self.recent_update_ends.len(),
            self.live_computes.len(),
            self.live_updates.len(),
        ]);
    }
}

/// Sum of intersections of `iv` with a start-sorted run of disjoint intervals.
fn overlap_with(iv: (i64, i64), others: &VecDeque<(i64, i64)>) -> u64 {
    let mut total = 0;
    for &(s, e) in others.iter().rev() {
        if e <= iv.0 {
            break;
        }
        let lo = s.max(iv.0);
        let hi = e.min(iv.1);
        if hi > lo {
            total += (hi - lo) as u64;
        }
    }
    total
}

struct Snapshot {
    times: Vec<i64>,
    shape: Vec<usize>,
    counters: Counters,
}

const MAX_PERIOD: usize = 4;

pub(crate) struct Engine {
    p: EngineParams,
    macros: Vec<MacroState>,
    /// End of the last write on each column bus.
    bus_end: Vec<i64>,
    makespan: i64,
    counters: Counters,
    events: Option<Vec<RawEvent>>,
    event_cap: Option<usize>,
    cand: Vec<i64>,
    ustart: Vec<i64>,
}

impl Engine {
    pub fn new(p: EngineParams, record: bool, event_cap: Option<usize>) -> Self {
        let n = p.rows * p.cols;
        Engine {
            p,
            macros: vec![MacroState::new(); n],
            bus_end: vec![0; p.cols],
            makespan: 0,
            counters: Counters::default(),
            events: record.then(Vec::new),
            event_cap,
            cand: vec![0; n],
            ustart: vec![0; n],
        }
    }

    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.p.cols + c
    }

    fn record(&mut self, row: usize, col: usize, start: i64, end: i64, kind: EventKind) -> bool {
        if let Some(ev) = self.events.as_mut() {
            if let Some(cap) = self.event_cap {
                if ev.len() >= cap {
                    return false;
                }
            }
            ev.push(RawEvent { row, col, start, end, kind });
        }
        true
    }

    /// Runs one weight-row pass on every macro. Returns `false` if the event
    /// cap was hit.
    fn step(&mut self, s: u64, total_steps: u64) -> bool {
        let p = self.p;
        let (rows, cols) = (p.rows, p.cols);
        let paper_overlap = p.overlap && p.mode == SimMode::Paper;

        // earliest compute start from each macro's own history
        for r in 0..rows {
            for c in 0..cols {
                let i = self.idx(r, c);
                let m = &self.macros[i];
                self.cand[i] = if s == 0 {
                    if p.discipline.stagger_rows {
                        r as i64 * p.update
                    } else {
                        0
                    }
                } else if !p.overlap || paper_overlap {
                    // the update just issued must land before the next pass
                    m.c_end.max(m.u_end)
                } else {
                    // the row used now was rewritten `lsl` passes ago
                    let ready = if m.recent_update_ends.len() == p.lsl {
                        m.recent_update_ends[0]
                    } else {
                        0
                    };
                    m.c_end.max(ready)
                };
            }
        }
        if p.discipline.psum_chain || p.discipline.left_handoff {
            for r in 0..rows {
                for c in 0..cols {
                    let i = self.idx(r, c);
                    if p.discipline.psum_chain && r > 0 {
                        let above = self.cand[self.idx(r - 1, c)];
                        self.cand[i] = self.cand[i].max(above + p.update);
                    }
                    if p.discipline.left_handoff && c > 0 {
                        let left = self.cand[self.idx(r, c - 1)];
                        self.cand[i] = self.cand[i].max(left);
                    }
                }
            }
        }
        if p.discipline.sync_compute {
            let all = self.cand.iter().copied().max().unwrap_or(0);
            self.cand.iter_mut().for_each(|t| *t = all);
        }

        for r in 0..rows {
            for c in 0..cols {
                let i = self.idx(r, c);
                let start = self.cand[i];
                let end = start + p.compute;
                let m = &mut self.macros[i];
                if s > 0 {
                    self.counters.stall += (start - m.c_end) as u64;
                }
                m.first_start.get_or_insert(start);
                self.counters.compute += p.compute as u64;
                self.counters.overlap += overlap_with((start, end), &m.live_updates);
                m.c_start = start;
                m.c_end = end;
                m.live_computes.push_back((start, end));
                self.makespan = self.makespan.max(end);
                if !self.record(r, c, start, end, EventKind::Compute) {
                    return false;
                }
            }
        }

        let elide = p.elide_last_update && p.mode == SimMode::Exact && s + 1 == total_steps;
        if !elide {
            for r in 0..rows {
                for c in 0..cols {
                    let i = self.idx(r, c);
                    let m = &self.macros[i];
                    let base = if paper_overlap { m.c_start } else { m.c_end };
                    self.ustart[i] = base.max(m.u_end);
                }
            }
            match p.discipline.chain {
                UpdateChain::ColumnSequential => {
                    for c in 0..cols {
                        for r in 0..rows {
                            let i = self.idx(r, c);
                            let t = self.ustart[i].max(self.bus_end[c]);
                            self.ustart[i] = t;
                            self.bus_end[c] = t + p.update;
                        }
                    }
                }
                UpdateChain::ColumnBroadcast => {
                    for c in 0..cols {
                        let t = (0..rows)
                            .map(|r| self.ustart[self.idx(r, c)])
                            .max()
                            .unwrap_or(0)
                            .max(self.bus_end[c]);
                        for r in 0..rows {
                            let i = self.idx(r, c);
                            self.ustart[i] = t;
                        }
                        self.bus_end[c] = t + p.update;
                    }
                }
                UpdateChain::SystolicForward => {
                    for c in 0..cols {
                        for r in 1..rows {
                            let i = self.idx(r, c);
                            let above = self.ustart[self.idx(r - 1, c)];
                            self.ustart[i] = self.ustart[i].max(above + p.update);
                        }
                    }
                }
            }
            for r in 0..rows {
                for c in 0..cols {
                    let i = self.idx(r, c);
                    let start = self.ustart[i];
                    let end = start + p.update;
                    let m = &mut self.macros[i];
                    self.counters.update += p.update as u64;
                    self.counters.update_events += 1;
                    self.counters.overlap += overlap_with((start, end), &m.live_computes);
                    m.u_end = end;
                    m.live_updates.push_back((start, end));
                    m.recent_update_ends.push_back(end);
                    if m.recent_update_ends.len() > p.lsl {
                        m.recent_update_ends.pop_front();
                    }
                    self.makespan = self.makespan.max(end);
                    if !self.record(r, c, start, end, EventKind::Update) {
                        return false;
                    }
                }
            }
        }

        // future computes start at or after c_end, future updates at or after u_end
        for m in self.macros.iter_mut() {
            let (c_end, u_end) = (m.c_end, m.u_end);
            while m.live_computes.front().is_some_and(|iv| iv.1 <= u_end) {
                m.live_computes.pop_front();
            }
            while m.live_updates.front().is_some_and(|iv| iv.1 <= c_end) {
                m.live_updates.pop_front();
            }
        }
        true
    }

    fn snapshot(&self) -> Snapshot {
        let mut times = Vec::with_capacity(self.macros.len() * 8 + self.bus_end.len() + 1);
        let mut shape = Vec::with_capacity(self.macros.len() * 3);
        for m in &self.macros {
            m.snapshot_into(&mut times, &mut shape);
        }
        // systolic columns have no shared bus, so bus_end never advances there
        if self.p.discipline.chain != UpdateChain::SystolicForward {
            times.extend(self.bus_end.iter().copied());
        }
        times.push(self.makespan);
        Snapshot {
            times,
            shape,
            counters: self.counters.clone(),
        }
    }

    fn shift(&mut self, by: i64) {
        for m in self.macros.iter_mut() {
            m.shift(by);
        }
        for t in self.bus_end.iter_mut() {
            *t += by;
        }
        self.makespan += by;
    }

    /// Uniform per-period time shift between snapshots `a` (earlier) and `b`.
    fn uniform_shift(a: &Snapshot, b: &Snapshot) -> Option<i64> {
        if a.shape != b.shape || a.times.len() != b.times.len() || a.times.is_empty() {
            return None;
        }
        let lambda = b.times[0] - a.times[0];
        a.times
            .iter()
            .zip(&b.times)
            .all(|(x, y)| y - x == lambda)
            .then_some(lambda)
    }

    pub fn run(mut self) -> Result<EngineOutput, EngineOutput> {
        let p = self.p;
        let lsl = p.lsl as u64;
        let total_steps = p.rounds * lsl;
        let extrapolate = self.events.is_none();
        let mut history: VecDeque<Snapshot> = VecDeque::new();
        let mut extrapolated = 0u64;
        let mut round = 0u64;
        let mut jumped = false;
        while round < p.rounds {
            for j in 0..lsl {
                let s = round * lsl + j;
                if !self.step(s, total_steps) {
                    return Err(self.finish(extrapolated));
                }
            }
            round += 1;
            if !extrapolate || jumped {
                continue;
            }
            history.push_back(self.snapshot());
            if history.len() > 2 * MAX_PERIOD + 1 {
                history.pop_front();
            }
            let remaining = p.rounds - round;
            if remaining < 2 {
                continue;
            }
            let k = history.len() - 1;
            for period in 1..=MAX_PERIOD {
                if k < 2 * period {
                    break;
                }
                let (a, b, c) = (&history[k - 2 * period], &history[k - period], &history[k]);
                let (Some(l1), Some(l2)) = (Self::uniform_shift(a, b), Self::uniform_shift(b, c))
                else {
                    continue;
                };
                let d1 = b.counters.delta(&a.counters);
                let d2 = c.counters.delta(&b.counters);
                if l1 != l2 || d1 != d2 {
                    continue;
                }
                // keep the final round simulated so end-of-run effects stay exact
                let periods = (remaining - 1) / period as u64;
                if periods == 0 {
                    break;
                }
                self.shift(l2 * periods as i64);
                self.counters.add_scaled(&d2, periods);
                round += periods * period as u64;
                extrapolated = periods * period as u64;
                jumped = true;
                break;
            }
        }
        Ok(self.finish(extrapolated))
    }

    fn finish(self, extrapolated: u64) -> EngineOutput {
        let makespan = self.makespan.max(0) as u64;
        let first_starts: Vec<i64> = self
            .macros
            .iter()
            .map(|m| m.first_start.unwrap_or(makespan as i64))
            .collect();
        let skew_fill: u64 = first_starts.iter().map(|&t| t as u64).sum();
        let busy = self.counters.compute + self.counters.update - self.counters.overlap;
        let span: u64 = first_starts.iter().map(|&t| makespan - t as u64).sum();
        let idle = span.saturating_sub(busy);
        EngineOutput {
            makespan,
            counters: self.counters,
            skew_fill,
            idle,
            events: self.events,
            extrapolated_rounds: extrapolated,
        }
    }
}
