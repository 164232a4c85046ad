//! Design-space exploration and Pareto analysis.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cost_model::{estimate, peak_throughput, Calibration, PpaEstimate};
use crate::design_space::{Dataflow, DesignPoint, Interconnect, Space, FIELD_NAMES};
use crate::error::{Error, Result};
use crate::scheduler::SimOptions;
use crate::workload::{simulate_workload, GemmWorkload};

/// Minimized metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Latency,
    Power,
    Area,
    /// Reciprocal of peak MAC rate, for workload-free comparisons.
    InversePeakThroughput,
}

impl Objective {
    pub const PPA: [Objective; 3] = [Objective::Latency, Objective::Power, Objective::Area];

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Latency => "latency_s",
            Objective::Power => "power_w",
            Objective::Area => "area_mm2",
            Objective::InversePeakThroughput => "inv_peak_macs_per_s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluatedPoint {
    pub point: DesignPoint,
    pub ppa: PpaEstimate,
    pub peak_macs_per_s: f64,
}

impl EvaluatedPoint {
    pub fn value(&self, obj: Objective) -> f64 {
        match obj {
            Objective::Latency => self.ppa.latency_s,
            Objective::Power => self.ppa.power_w,
            Objective::Area => self.ppa.area_mm2,
            Objective::InversePeakThroughput => 1.0 / self.peak_macs_per_s,
        }
    }

    pub fn vector(&self, objectives: &[Objective]) -> Vec<f64> {
        objectives.iter().map(|&o| self.value(o)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    /// Ascending by design-point id.
    pub points: Vec<EvaluatedPoint>,
    pub objectives: Vec<Objective>,
}

/// Strict Pareto dominance under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "objective vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(dominates_unchecked(a, b))
}

fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated vectors, ascending.
///
/// Vectors are visited in lexicographic order, so anything that dominates a
/// vector has already been seen and is represented on the running front.
pub fn non_dominated(vectors: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(&vectors[i], &vectors[j]).then(i.cmp(&j)));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates_unchecked(&vectors[f], &vectors[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// The non-dominated subset of `points`, ordered by design-point id.
pub fn pareto_filter(points: &[EvaluatedPoint], objectives: &[Objective]) -> Result<ParetoFront> {
    if points.is_empty() {
        return Err(Error::Argument("cannot filter an empty point set".to_string()));
    }
    if objectives.is_empty() {
        return Err(Error::Argument("at least one objective is required".to_string()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|e| e.point.id());
    let vectors: Vec<Vec<f64>> = sorted.iter().map(|e| e.vector(objectives)).collect();
    let keep = non_dominated(&vectors);
    Ok(ParetoFront {
        points: keep.into_iter().map(|i| sorted[i]).collect(),
        objectives: objectives.to_vec(),
    })
}

/// The point with the smallest `latency^2 * power * area`, ties to the lower id.
pub fn scalar_optimum(points: &[EvaluatedPoint]) -> Option<EvaluatedPoint> {
    points.iter().copied().min_by(|a, b| {
        a.ppa
            .objective
            .total_cmp(&b.ppa.objective)
            .then(a.point.id().cmp(&b.point.id()))
    })
}

pub fn evaluate(
    point: &DesignPoint,
    workload: &GemmWorkload,
    cal: &Calibration,
    opts: SimOptions,
) -> Result<EvaluatedPoint> {
    let sim = simulate_workload(workload, point, opts);
    Ok(EvaluatedPoint {
        point: *point,
        ppa: estimate(point, &sim, cal)?,
        peak_macs_per_s: peak_throughput(point, cal),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every point in ascending id order, truncated to the budget.
    Exhaustive,
    /// `n` distinct points drawn uniformly.
    Random { n: usize, seed: u64 },
    /// Non-dominated sorting genetic search.
    Evolutionary { pop: usize, gens: usize, seed: u64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Random { .. } => "random",
            Strategy::Evolutionary { .. } => "evolutionary",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub space: Space,
    /// Upper bound on the peak throughput of one core's macro array, ops/s
    /// (two per MAC).
    pub capacity_bound: Option<f64>,
    pub strategy: Strategy,
    /// Maximum number of evaluations.
    pub budget: usize,
    pub objectives: Vec<Objective>,
    pub sim: SimOptions,
    /// Evaluation threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl ExploreConfig {
    pub fn new(space: Space, strategy: Strategy, budget: usize) -> Self {
        ExploreConfig {
            space,
            capacity_bound: None,
            strategy,
            budget,
            objectives: Objective::PPA.to_vec(),
            sim: SimOptions::paper(),
            jobs: 0,
        }
    }

    fn admits(&self, point: &DesignPoint, cal: &Calibration) -> bool {
        self.capacity_bound
            .is_none_or(|bound| core_peak_ops(point, cal) <= bound)
    }
}

/// Peak ops/s of a single core.
pub fn core_peak_ops(point: &DesignPoint, cal: &Calibration) -> f64 {
    2.0 * peak_throughput(point, cal) / point.array().cores as f64
}

#[derive(Debug, Clone)]
pub struct ExploreResult {
    /// Every evaluated point, ascending by id.
    pub evaluated: Vec<EvaluatedPoint>,
    pub front: ParetoFront,
    pub optimum: EvaluatedPoint,
}

/// Evaluates points of `cfg.space` chosen by the strategy and extracts the
/// frontier over everything evaluated.
pub fn explore(cfg: &ExploreConfig, workload: &GemmWorkload, cal: &Calibration) -> Result<ExploreResult> {
    if cfg.budget == 0 {
        return Err(Error::Argument("budget must be at least 1".to_string()));
    }
    if cfg.space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
    let eval_batch = |points: &[DesignPoint]| -> Result<Vec<EvaluatedPoint>> {
        pool.install(|| {
            points
                .par_iter()
                .map(|p| evaluate(p, workload, cal, cfg.sim))
                .collect()
        })
    };

    let mut evaluated = match cfg.strategy {
        Strategy::Exhaustive => {
            let points: Vec<DesignPoint> = cfg
                .space
                .iter()
                .filter(|p| cfg.admits(p, cal))
                .take(cfg.budget)
                .collect();
            eval_batch(&points)?
        }
        Strategy::Random { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picker = Picker::new(cfg, cal);
            let mut points = Vec::new();
            while points.len() < n.min(cfg.budget) {
                match picker.fresh(&mut rng) {
                    Some(p) => points.push(p),
                    None => break,
                }
            }
            eval_batch(&points)?
        }
        Strategy::Evolutionary { pop, gens, seed } => evolve(cfg, cal, pop, gens, seed, &eval_batch)?,
    };
    if evaluated.is_empty() {
        return Err(Error::EmptySpace);
    }
    evaluated.sort_by_key(|e| e.point.id());
    let front = pareto_filter(&evaluated, &cfg.objectives)?;
    let optimum = scalar_optimum(&evaluated).expect("non-empty");
    Ok(ExploreResult {
        evaluated,
        front,
        optimum,
    })
}

/// Hands out admissible points that have not been handed out before.
struct Picker<'a> {
    cfg: &'a ExploreConfig,
    cal: &'a Calibration,
    radices: [usize; 11],
    seen: HashSet<[usize; 11]>,
    /// Remaining unseen admissible genomes, built once rejection sampling
    /// starts failing on a small space.
    pool: Option<Vec<[usize; 11]>>,
}

const ENUMERABLE: u64 = 1 << 20;
const REJECTION_TRIES: usize = 64;

impl<'a> Picker<'a> {
    fn new(cfg: &'a ExploreConfig, cal: &'a Calibration) -> Self {
        Picker {
            cfg,
            cal,
            radices: cfg.space.index_radices(),
            seen: HashSet::new(),
            pool: None,
        }
    }

    /// Claims `genome` if it is new and admissible.
    fn claim(&mut self, genome: [usize; 11]) -> Option<DesignPoint> {
        if self.seen.contains(&genome) {
            return None;
        }
        let p = self.cfg.space.point_from_indices(&genome);
        self.seen.insert(genome);
        if self.cfg.admits(&p, self.cal) {
            Some(p)
        } else {
            None
        }
    }

    fn random_genome(&self, rng: &mut ChaCha8Rng) -> [usize; 11] {
        let mut g = [0usize; 11];
        for (slot, &r) in g.iter_mut().zip(&self.radices) {
            *slot = rng.gen_range(0..r);
        }
        g
    }

    /// A uniformly drawn unseen admissible point, or `None` once the space is used up.
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> Option<DesignPoint> {
        if self.pool.is_none() {
            for _ in 0..REJECTION_TRIES {
                let g = self.random_genome(rng);
                if let Some(p) = self.claim(g) {
                    return Some(p);
                }
            }
            if self.cfg.space.len() > ENUMERABLE {
                return None;
            }
            let all: Vec<[usize; 11]> = self
                .cfg
                .space
                .iter()
                .filter_map(|p| self.cfg.space.indices_of(&p))
                .filter(|g| !self.seen.contains(g))
                .collect();
            self.pool = Some(all);
        }
        loop {
            let pool = self.pool.as_mut().expect("set above");
            if pool.is_empty() {
                return None;
            }
            let i = rng.gen_range(0..pool.len());
            let g = pool.swap_remove(i);
            if let Some(p) = self.claim(g) {
                return Some(p);
            }
        }
    }
}

#[derive(Clone)]
struct Member {
    genome: [usize; 11],
    eval: EvaluatedPoint,
    rank: usize,
    crowding: f64,
}

fn evolve(
    cfg: &ExploreConfig,
    cal: &Calibration,
    pop: usize,
    gens: usize,
    seed: u64,
    eval_batch: &dyn Fn(&[DesignPoint]) -> Result<Vec<EvaluatedPoint>>,
) -> Result<Vec<EvaluatedPoint>> {
    if pop < 2 {
        return Err(Error::Argument("population must be at least 2".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picker = Picker::new(cfg, cal);
    let mut all = Vec::new();

    let mut seeds = Vec::new();
    while seeds.len() < pop.min(cfg.budget) {
        match picker.fresh(&mut rng) {
            Some(p) => seeds.push(p),
            None => break,
        }
    }
    let mut population = into_members(cfg, eval_batch(&seeds)?);
    all.extend(population.iter().map(|m| m.eval));
    rank_and_crowd(&mut population, &cfg.objectives);

    for _ in 0..gens {
        let room = cfg.budget - all.len();
        if room == 0 || population.is_empty() {
            break;
        }
        let mut children = Vec::new();
        while children.len() < pop.min(room) {
            let a = tournament(&population, &mut rng);
            let b = tournament(&population, &mut rng);
            let child = mutate(crossover(&a.genome, &b.genome, &mut rng), &picker.radices, &mut rng);
            let point = picker.claim(child).or_else(|| picker.fresh(&mut rng));
            match point {
                Some(p) => children.push(p),
                None => break,
            }
        }
        if children.is_empty() {
            break;
        }
        let offspring = into_members(cfg, eval_batch(&children)?);
        all.extend(offspring.iter().map(|m| m.eval));
        population.extend(offspring);
        rank_and_crowd(&mut population, &cfg.objectives);
        population.sort_by(|x, y| {
            x.rank
                .cmp(&y.rank)
                .then(y.crowding.total_cmp(&x.crowding))
                .then(x.eval.point.id().cmp(&y.eval.point.id()))
        });
        population.truncate(pop);
        rank_and_crowd(&mut population, &cfg.objectives);
    }
    Ok(all)
}

fn into_members(cfg: &ExploreConfig, evals: Vec<EvaluatedPoint>) -> Vec<Member> {
    evals
        .into_iter()
        .map(|eval| Member {
            genome: cfg.space.indices_of(&eval.point).expect("point drawn from the space"),
            eval,
            rank: 0,
            crowding: 0.0,
        })
        .collect()
}

/// Assigns non-domination ranks (0 is best) and crowding distances.
fn rank_and_crowd(members: &mut [Member], objectives: &[Objective]) {
    let vectors: Vec<Vec<f64>> = members.iter().map(|m| m.eval.vector(objectives)).collect();
    let n = members.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates_unchecked(&vectors[i], &vectors[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        for &i in &current {
            members[i].rank = rank;
        }
        crowd(members, &vectors, &current);
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        current = next;
        rank += 1;
    }
}

#[allow(clippy::needless_range_loop)]
fn crowd(members: &mut [Member], vectors: &[Vec<f64>], front: &[usize]) {
    for &i in front {
        members[i].crowding = 0.0;
    }
    let dims = vectors.first().map_or(0, Vec::len);
    for d in 0..dims {
        let mut order = front.to_vec();
        order.sort_by(|&a, &b| vectors[a][d].total_cmp(&vectors[b][d]).then(a.cmp(&b)));
        let (lo, hi) = (vectors[order[0]][d], vectors[order[order.len() - 1]][d]);
        members[order[0]].crowding = f64::INFINITY;
        members[order[order.len() - 1]].crowding = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len().saturating_sub(1) {
                let gap = (vectors[order[w + 1]][d] - vectors[order[w - 1]][d]) / (hi - lo);
                members[order[w]].crowding += gap;
            }
        }
    }
}

/// Binary tournament on (rank, crowding).
fn tournament<'m>(population: &'m [Member], rng: &mut ChaCha8Rng) -> &'m Member {
    let a = &population[rng.gen_range(0..population.len())];
    let b = &population[rng.gen_range(0..population.len())];
    match a.rank.cmp(&b.rank) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal if a.crowding >= b.crowding => a,
        Ordering::Equal => b,
    }
}

fn crossover(a: &[usize; 11], b: &[usize; 11], rng: &mut ChaCha8Rng) -> [usize; 11] {
    let mut child = *a;
    for (c, &gene) in child.iter_mut().zip(b) {
        if rng.gen_bool(0.5) {
            *c = gene;
        }
    }
    child
}

/// Each gene moves to a neighbouring candidate with probability 1/11.
fn mutate(mut genome: [usize; 11], radices: &[usize; 11], rng: &mut ChaCha8Rng) -> [usize; 11] {
    for (g, &r) in genome.iter_mut().zip(radices) {
        if r > 1 && rng.gen_range(0..radices.len()) == 0 {
            *g = if *g == 0 {
                1
            } else if *g + 1 == r || rng.gen_bool(0.5) {
                *g - 1
            } else {
                *g + 1
            };
        }
    }
    genome
}

/// One dataflow variant: dataflow, interconnect and overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flow {
    pub dataflow: Dataflow,
    pub interconnect: Interconnect,
    pub ol: bool,
}

impl Flow {
    pub fn all() -> Vec<Flow> {
        let mut flows = Vec::new();
        for dataflow in Dataflow::ALL {
            for interconnect in Interconnect::ALL {
                for ol in [false, true] {
                    flows.push(Flow {
                        dataflow,
                        interconnect,
                        ol,
                    });
                }
            }
        }
        flows
    }

    pub fn tag(&self) -> String {
        format!(
            "{}-{}-{}",
            self.dataflow,
            self.interconnect,
            if self.ol { "OL" } else { "NOL" }
        )
    }

    pub fn of(point: &DesignPoint) -> Flow {
        Flow {
            dataflow: point.array().dataflow,
            interconnect: point.array().interconnect,
            ol: point.macro_cfg().ol,
        }
    }

    /// `space` restricted to this flow.
    pub fn restrict(&self, space: &Space) -> Space {
        Space {
            dataflow: vec![self.dataflow],
            interconnect: vec![self.interconnect],
            ol: vec![self.ol],
            ..space.clone()
        }
    }
}

impl std::str::FromStr for Flow {
    type Err = Error;

    /// Parses tags such as `WS-Systolic-NOL`.
    fn from_str(s: &str) -> Result<Flow> {
        let bad = || Error::Argument(format!("unknown flow `{s}` (expected e.g. WS-Systolic-OL)"));
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let ol = match parts[2] {
            "OL" => true,
            "NOL" => false,
            _ => return Err(bad()),
        };
        Ok(Flow {
            dataflow: parts[0].parse().map_err(|_| bad())?,
            interconnect: parts[1].parse().map_err(|_| bad())?,
            ol,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FlowFront {
    pub flow: Flow,
    pub result: ExploreResult,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub flows: Vec<FlowFront>,
    /// Frontier over the union of all per-flow frontiers; each member's flow
    /// is its origin.
    pub merged: ParetoFront,
}

/// Explores each flow separately under the same workload, calibration and
/// strategy, then merges the frontiers.
pub fn compare_dataflows(
    base: &ExploreConfig,
    flows: &[Flow],
    workload: &GemmWorkload,
    cal: &Calibration,
) -> Result<Comparison> {
    if flows.is_empty() {
        return Err(Error::Argument("no flows to compare".to_string()));
    }
    let mut out = Vec::with_capacity(flows.len());
    for flow in flows {
        let cfg = ExploreConfig {
            space: flow.restrict(&base.space),
            ..base.clone()
        };
        out.push(FlowFront {
            flow: *flow,
            result: explore(&cfg, workload, cal)?,
        });
    }
    let union: Vec<EvaluatedPoint> = out.iter().flat_map(|f| f.result.front.points.iter().copied()).collect();
    let merged = pareto_filter(&union, &base.objectives)?;
    Ok(Comparison { flows: out, merged })
}

/// Column order of frontier and evaluation CSV files.
pub fn csv_header() -> String {
    let mut cols = vec!["id".to_string()];
    cols.extend(FIELD_NAMES.iter().map(|s| s.to_string()));
    cols.extend(
        [
            "cycles",
            "frequency_hz",
            "latency_s",
            "power_w",
            "area_mm2",
            "objective",
            "origin",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn csv_row(e: &EvaluatedPoint) -> String {
    let mut cols = vec![e.point.id().to_string()];
    cols.extend(e.point.field_values());
    cols.push(e.ppa.cycles.to_string());
    for v in [
        e.ppa.frequency_hz,
        e.ppa.latency_s,
        e.ppa.power_w,
        e.ppa.area_mm2,
        e.ppa.objective,
    ] {
        cols.push(format!("{v:e}"));
    }
    cols.push(e.point.flow_tag());
    cols.join(",")
}

pub fn points_to_csv(points: &[EvaluatedPoint]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for e in points {
        out.push_str(&csv_row(e));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_space::{validate, ArrayConfig, MacroConfig};

    fn fake(id_seed: u32, l: f64, p: f64, a: f64) -> EvaluatedPoint {
        let al = [8, 16, 32, 64, 128, 256][id_seed as usize % 6];
        let point = validate(
            &MacroConfig {
                al,
                ..MacroConfig::default()
            },
            &ArrayConfig {
                br: 1 + id_seed / 6,
                ..ArrayConfig::default()
            },
        )
        .unwrap();
        let ppa = PpaEstimate {
            latency_s: l,
            power_w: p,
            area_mm2: a,
            objective: crate::cost_model::objective(l, p, a),
            frequency_hz: 1e9,
            cycles: 1,
            static_power_w: 0.0,
            macro_power_w: p,
            integration_power_w: 0.0,
            macro_area_mm2: a,
            integration_area_mm2: 0.0,
        };
        EvaluatedPoint {
            point,
            ppa,
            peak_macs_per_s: 1.0,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn filter_examples() {
        let objs = [Objective::Latency, Objective::Power];
        let pts = [fake(0, 1.0, 1.0, 1.0), fake(1, 2.0, 2.0, 1.0), fake(2, 2.0, 0.5, 1.0)];
        let front = pareto_filter(&pts, &objs).unwrap();
        let kept: Vec<(f64, f64)> = front.points.iter().map(|e| (e.ppa.latency_s, e.ppa.power_w)).collect();
        assert_eq!(kept, vec![(1.0, 1.0), (2.0, 0.5)]);

        let same: Vec<EvaluatedPoint> = (0..5).map(|i| fake(i, 3.0, 3.0, 3.0)).collect();
        assert_eq!(pareto_filter(&same, &objs).unwrap().points.len(), 5);
        assert!(pareto_filter(&[], &objs).is_err());
    }

    #[test]
    fn filter_is_ordered_by_id() {
        let pts = [fake(5, 1.0, 3.0, 1.0), fake(1, 3.0, 1.0, 1.0), fake(3, 2.0, 2.0, 1.0)];
        let front = pareto_filter(&pts, &Objective::PPA).unwrap();
        let ids: Vec<u64> = front.points.iter().map(|e| e.point.id()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn scalar_objective() {
        assert_eq!(fake(0, 2.0, 3.0, 4.0).ppa.objective, 48.0);
    }

    #[test]
    fn csv_columns_line_up() {
        let header = csv_header();
        let row = csv_row(&fake(0, 2.0, 3.0, 4.0));
        assert_eq!(header.split(',').count(), 21);
        assert_eq!(row.split(',').count(), 21);
        assert!(header.starts_with("id,AL,LSL,PC,PL,OL,WBW,IBW,BR,BC,dataflow,interconnect,TL,cores,cycles"));
        assert!(row.ends_with(",4.8e1,WS-Broadcast-NOL"));
    }

    #[test]
    fn flows_cover_eight_variants() {
        let flows = Flow::all();
        assert_eq!(flows.len(), 8);
        let tags: HashSet<String> = flows.iter().map(Flow::tag).collect();
        assert_eq!(tags.len(), 8);
        assert!(tags.contains("OS-Systolic-NOL"));
        for f in flows {
            assert_eq!(f.tag().parse::<Flow>().unwrap(), f);
        }
        assert!("WS-Systolic".parse::<Flow>().is_err());
        assert!("XS-Systolic-OL".parse::<Flow>().is_err());
    }
}
