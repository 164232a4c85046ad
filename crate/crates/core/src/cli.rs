//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 validation error,
//! 4 empty result.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost_model::{estimate, load_calibration, peak_throughput, Calibration};
use crate::design_space::{validate, ArrayConfig, DesignPoint, MacroConfig, Space};
use crate::dse::{
    compare_dataflows, csv_header, csv_row, evaluate, explore, points_to_csv, ExploreConfig, Flow, Objective,
    Strategy,
};
use crate::error::Error;
use crate::macro_model::SimMode;
use crate::scheduler::{trace, trace_to_csv, SimOptions, SimResult, DEFAULT_TRACE_CAP};
use crate::workload::{load_workload, partition_cores, qkv_workload, simulate_workload, ModelDesc, Stage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "cim-dse", version, about = "SRAM compute-in-memory dataflow simulator and design-space explorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one design point on a workload and report PPA.
    Simulate(SimulateArgs),
    /// Search a design space and write its Pareto frontier.
    Explore(ExploreArgs),
    /// Explore every dataflow variant separately and merge the frontiers.
    Compare(CompareArgs),
    /// Evaluate reference design points on LLM prefill workloads.
    Casestudy(CasestudyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct CalibrationArgs {
    /// Calibration file (flat `key = number`); shipped defaults when absent.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Reject calibration files that omit any key.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value = "paper")]
    pub mode: SimMode,
    /// Skip the weight update after the last pass (exact mode only).
    #[arg(long)]
    pub elide_last_update: bool,
}

impl SimArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            mode: self.mode,
            elide_last_update: self.elide_last_update,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Exhaustive,
    Random,
    Evolutionary,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub strategy: StrategyName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evolutionary population size.
    #[arg(long, default_value_t = 32)]
    pub pop: usize,
    /// Evolutionary generation limit.
    #[arg(long, default_value_t = 1000)]
    pub gens: usize,
    /// Upper bound on the peak throughput of one core, TOPS.
    #[arg(long)]
    pub capacity_bound: Option<f64>,
    /// Comma-separated minimized metrics: latency, power, area, inv-peak.
    #[arg(long, value_delimiter = ',', default_value = "latency,power,area")]
    pub objectives: Vec<ObjectiveName>,
    /// Evaluation threads (0 = all cores). Never changes results.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveName {
    Latency,
    Power,
    Area,
    InvPeak,
}

impl From<ObjectiveName> for Objective {
    fn from(o: ObjectiveName) -> Objective {
        match o {
            ObjectiveName::Latency => Objective::Latency,
            ObjectiveName::Power => Objective::Power,
            ObjectiveName::Area => Objective::Area,
            ObjectiveName::InvPeak => Objective::InversePeakThroughput,
        }
    }
}

impl SearchArgs {
    fn strategy(&self, budget: usize) -> Strategy {
        match self.strategy {
            StrategyName::Exhaustive => Strategy::Exhaustive,
            StrategyName::Random => Strategy::Random {
                n: budget,
                seed: self.seed,
            },
            StrategyName::Evolutionary => Strategy::Evolutionary {
                pop: self.pop,
                gens: self.gens,
                seed: self.seed,
            },
        }
    }

    fn config(&self, space: Space, budget: usize, sim: SimOptions) -> ExploreConfig {
        ExploreConfig {
            capacity_bound: self.capacity_bound.map(|tops| tops * 1e12),
            objectives: self.objectives.iter().map(|&o| o.into()).collect(),
            sim,
            jobs: self.jobs,
            ..ExploreConfig::new(space, self.strategy(budget), budget)
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design point record (`AL = 64`, `dataflow = "WS"`, ...).
    #[arg(long)]
    pub point: PathBuf,
    /// `M,N,K,repeat` lines or a model description.
    #[arg(long)]
    pub workload: PathBuf,
    #[command(flatten)]
    pub cal: CalibrationArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write a per-macro occupancy trace of the first GEMM to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TRACE_CAP)]
    pub trace_cap: usize,
    /// Also write the report and a manifest into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    /// Space restriction file; the full macro/array table when absent.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub workload: PathBuf,
    #[command(flatten)]
    pub cal: CalibrationArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Maximum number of evaluations.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub workload: PathBuf,
    #[command(flatten)]
    pub cal: CalibrationArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_per_flow: u64,
    /// Comma-separated flow tags such as WS-Systolic-OL; all eight when absent.
    #[arg(long, value_delimiter = ',')]
    pub flows: Vec<Flow>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CasestudyArgs {
    /// Model list with reference design tuples.
    #[arg(long)]
    pub models: PathBuf,
    #[command(flatten)]
    pub cal: CalibrationArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Per-core peak throughput bound for searched designs, TOPS.
    #[arg(long, default_value_t = 20.0)]
    pub capacity_bound: f64,
    /// Evaluations spent searching per model; 0 reports reference points only.
    #[arg(long, default_value_t = 0)]
    pub budget: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub strategy: StrategyName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub pop: usize,
    #[arg(long, default_value_t = 1000)]
    pub gens: usize,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Write the report and a manifest here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Arguments after the subcommand, without `--out` and `--jobs`.
    pub args: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub calibration: Option<String>,
    pub seed: Option<u64>,
    pub strategy: Option<String>,
    pub budget: Option<u64>,
    pub output_dir: String,
    pub outputs: Vec<String>,
    /// SHA-256 over the input hashes in order.
    pub inputs_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let recorded = recorded_args(&args);
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, &recorded, stdout, stderr),
        Command::Explore(a) => cmd_explore(a, &recorded, stdout),
        Command::Compare(a) => cmd_compare(a, &recorded, stdout),
        Command::Casestudy(a) => cmd_casestudy(a, &recorded, stdout),
        Command::Replay(a) => cmd_replay(a, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Argument(_) => EXIT_USAGE,
        Error::Validation { .. } | Error::Calibration(_) | Error::Degenerate(_) => EXIT_VALIDATION,
        Error::EmptySpace => EXIT_EMPTY,
        Error::TraceCapExceeded { .. } => EXIT_USAGE,
    }
}

/// Arguments after the subcommand with `--out` and `--jobs` removed.
fn recorded_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in args.iter().skip(2) {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--out" || a == "--jobs" {
            skip_next = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--jobs=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::Argument(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_cal(args: &CalibrationArgs) -> Result<Calibration, Error> {
    match &args.calibration {
        Some(path) => Ok(load_calibration(&read(path)?, &path.display().to_string(), args.strict)?.0),
        None => Ok(Calibration::defaults()),
    }
}

fn load_space(path: Option<&PathBuf>) -> Result<Space, Error> {
    match path {
        Some(p) => Space::from_toml_str(&read(p)?, &p.display().to_string()),
        None => Ok(Space::standard()),
    }
}

struct ManifestBuilder {
    command: &'static str,
    args: Vec<String>,
    inputs: Vec<InputRecord>,
    calibration: Option<String>,
    seed: Option<u64>,
    strategy: Option<String>,
    budget: Option<u64>,
}

impl ManifestBuilder {
    fn new(command: &'static str, args: &[String]) -> Self {
        ManifestBuilder {
            command,
            args: args.to_vec(),
            inputs: Vec::new(),
            calibration: None,
            seed: None,
            strategy: None,
            budget: None,
        }
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<(), Error> {
        let bytes = fs::read(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        self.inputs.push(InputRecord {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    fn calibration(&mut self, args: &CalibrationArgs) -> Result<(), Error> {
        if let Some(p) = &args.calibration {
            self.input("calibration", p)?;
            self.calibration = Some(p.display().to_string());
        }
        Ok(())
    }

    fn search(&mut self, s: &SearchArgs, budget: u64) {
        self.seed = Some(s.seed);
        self.strategy = Some(format!("{:?}", s.strategy).to_lowercase());
        self.budget = Some(budget);
    }

    /// Writes the manifest into `dir`.
    fn finish(self, dir: &Path, outputs: Vec<String>) -> Result<(), Error> {
        let joined: String = self.inputs.iter().map(|i| i.sha256.as_str()).collect::<Vec<_>>().join("\n");
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            args: self.args,
            inputs: self.inputs,
            calibration: self.calibration,
            seed: self.seed,
            strategy: self.strategy,
            budget: self.budget,
            output_dir: dir.display().to_string(),
            outputs,
            inputs_sha256: sha256_hex(joined.as_bytes()),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_file(&dir.join(MANIFEST_NAME), &text)
    }
}

const SIM_COUNTER_COLUMNS: &str =
    "macs_executed,weight_rows_written,compute_macro_cycles,update_macro_cycles,idle_macro_cycles,stall_cycles,skew_fill_cycles";

fn sim_counters(s: &SimResult) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.macs_executed,
        s.weight_rows_written,
        s.compute_macro_cycles,
        s.update_macro_cycles,
        s.idle_macro_cycles,
        s.stall_cycles,
        s.skew_fill_cycles
    )
}

fn cmd_simulate(a: &SimulateArgs, recorded: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let point = DesignPoint::from_record(&read(&a.point)?, &a.point.display().to_string())?;
    let wl = load_workload(&read(&a.workload)?, &a.workload.display().to_string())?;
    let cal = load_cal(&a.cal)?;
    let opts = a.sim.options();
    let sim = simulate_workload(&wl, &point, opts);
    let ppa = estimate(&point, &sim, &cal)?;
    let eval = crate::dse::EvaluatedPoint {
        point,
        ppa,
        peak_macs_per_s: peak_throughput(&point, &cal),
    };
    let report = format!(
        "{},{SIM_COUNTER_COLUMNS}\n{},{}\n",
        csv_header(),
        csv_row(&eval),
        sim_counters(&sim)
    );
    stdout.write_all(report.as_bytes()).map_err(|e| Error::Argument(e.to_string()))?;

    let mut outputs = Vec::new();
    if let Some(path) = &a.trace {
        let first = partition_cores(&wl, point.array().cores)[0].items()[0].0;
        let events = match trace(&first, &point, opts, a.trace_cap) {
            Ok(t) => t.events,
            Err(Error::TraceCapExceeded { cap, partial }) => {
                let _ = writeln!(stderr, "warning: trace truncated at {cap} events");
                partial
            }
            Err(e) => return Err(e),
        };
        write_file(path, &trace_to_csv(&events))?;
        outputs.push(path.display().to_string());
    }
    if let Some(dir) = &a.out {
        write_file(&dir.join("simulate.csv"), &report)?;
        outputs.insert(0, "simulate.csv".to_string());
        let mut m = ManifestBuilder::new("simulate", recorded);
        m.input("point", &a.point)?;
        m.input("workload", &a.workload)?;
        m.calibration(&a.cal)?;
        m.finish(dir, outputs)?;
    }
    Ok(())
}

fn cmd_explore(a: &ExploreArgs, recorded: &[String], stdout: &mut dyn Write) -> Result<(), Error> {
    let space = load_space(a.space.as_ref())?;
    let wl = load_workload(&read(&a.workload)?, &a.workload.display().to_string())?;
    let cal = load_cal(&a.cal)?;
    let cfg = a.search.config(space, a.budget as usize, a.sim.options());
    let result = explore(&cfg, &wl, &cal)?;

    write_file(&a.out.join("frontier.csv"), &points_to_csv(&result.front.points))?;
    write_file(&a.out.join("evaluations.csv"), &points_to_csv(&result.evaluated))?;
    write_file(&a.out.join("optimum.csv"), &points_to_csv(&[result.optimum]))?;
    let mut m = ManifestBuilder::new("explore", recorded);
    if let Some(p) = &a.space {
        m.input("space", p)?;
    }
    m.input("workload", &a.workload)?;
    m.calibration(&a.cal)?;
    m.search(&a.search, a.budget);
    m.finish(
        &a.out,
        vec!["frontier.csv".into(), "evaluations.csv".into(), "optimum.csv".into()],
    )?;
    let _ = writeln!(
        stdout,
        "evaluated {} points, {} on the frontier, optimum id {}",
        result.evaluated.len(),
        result.front.points.len(),
        result.optimum.point.id()
    );
    Ok(())
}

fn cmd_compare(a: &CompareArgs, recorded: &[String], stdout: &mut dyn Write) -> Result<(), Error> {
    let space = load_space(a.space.as_ref())?;
    let wl = load_workload(&read(&a.workload)?, &a.workload.display().to_string())?;
    let cal = load_cal(&a.cal)?;
    let flows = if a.flows.is_empty() { Flow::all() } else { a.flows.clone() };
    let cfg = a.search.config(space, a.budget_per_flow as usize, a.sim.options());
    let cmp = compare_dataflows(&cfg, &flows, &wl, &cal)?;

    let mut outputs = Vec::new();
    for f in &cmp.flows {
        let name = format!("frontier_{}.csv", f.flow.tag());
        write_file(&a.out.join(&name), &points_to_csv(&f.result.front.points))?;
        let _ = writeln!(
            stdout,
            "{}: {} evaluated, {} on the frontier",
            f.flow.tag(),
            f.result.evaluated.len(),
            f.result.front.points.len()
        );
        outputs.push(name);
    }
    write_file(&a.out.join("merged.csv"), &points_to_csv(&cmp.merged.points))?;
    outputs.push("merged.csv".to_string());
    let mut m = ManifestBuilder::new("compare", recorded);
    if let Some(p) = &a.space {
        m.input("space", p)?;
    }
    m.input("workload", &a.workload)?;
    m.calibration(&a.cal)?;
    m.search(&a.search, a.budget_per_flow);
    m.finish(&a.out, outputs)
}

/// One row of a case-study models file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseModel {
    pub name: String,
    pub layers: u64,
    pub hidden_dim: u64,
    pub seq_len: u64,
    #[serde(default = "one")]
    pub batch: u64,
    #[serde(default = "one_u32")]
    pub cores: u32,
    /// Reference flow tag, e.g. `OS-Systolic-OL`.
    pub flow: String,
    /// `(LSL, AL, PC, PL, BC, BR, TL)`.
    pub tuple: [u32; 7],
}

fn one() -> u64 {
    1
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    model: Vec<CaseModel>,
}

impl CaseModel {
    pub fn desc(&self) -> ModelDesc {
        ModelDesc {
            name: self.name.clone(),
            layers: self.layers,
            hidden_dim: self.hidden_dim,
            seq_len: self.seq_len,
            batch: self.batch,
            stage: Stage::Prefill,
        }
    }

    pub fn reference_point(&self) -> Result<DesignPoint, Error> {
        let flow: Flow = self.flow.parse()?;
        let [lsl, al, pc, pl, bc, br, tl] = self.tuple;
        validate(
            &MacroConfig {
                al,
                lsl,
                pc,
                pl,
                ol: flow.ol,
                ..MacroConfig::default()
            },
            &ArrayConfig {
                br,
                bc,
                dataflow: flow.dataflow,
                interconnect: flow.interconnect,
                tl,
                cores: self.cores,
            },
        )
    }
}

pub fn parse_models(text: &str, source_name: &str) -> Result<Vec<CaseModel>, Error> {
    let file: ModelsFile = toml::from_str(text).map_err(|e| Error::parse(source_name, e.message().to_string()))?;
    for m in &file.model {
        m.desc().check()?;
    }
    Ok(file.model)
}

pub const CASESTUDY_BANNER: &str = "# calibration: local (absolute values are not comparable with silicon)";

pub const CASESTUDY_COLUMNS: &str = "model,layers,hidden_dim,seq_len,batch,cores,source,flow,LSL,AL,PC,PL,BC,BR,TL,total_macs,cycles,frequency_hz,latency_ms,power_w,area_mm2,objective,core_peak_tops,within_bound";

fn casestudy_row(model: &CaseModel, source: &str, e: &crate::dse::EvaluatedPoint, total_macs: u128, bound_tops: f64) -> String {
    let m = e.point.macro_cfg();
    let a = e.point.array();
    let peak_tops = 2.0 * e.peak_macs_per_s / a.cores as f64 / 1e12;
    format!(
        "{},{},{},{},{},{},{source},{},{},{},{},{},{},{},{},{total_macs},{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
        model.name,
        model.layers,
        model.hidden_dim,
        model.seq_len,
        model.batch,
        a.cores,
        e.point.flow_tag(),
        m.lsl,
        m.al,
        m.pc,
        m.pl,
        a.bc,
        a.br,
        a.tl,
        e.ppa.cycles,
        e.ppa.frequency_hz,
        e.ppa.latency_s * 1e3,
        e.ppa.power_w,
        e.ppa.area_mm2,
        e.ppa.objective,
        peak_tops,
        peak_tops <= bound_tops,
    )
}

fn cmd_casestudy(a: &CasestudyArgs, recorded: &[String], stdout: &mut dyn Write) -> Result<(), Error> {
    let models = parse_models(&read(&a.models)?, &a.models.display().to_string())?;
    let cal = load_cal(&a.cal)?;
    let opts = a.sim.options();
    let mut report = format!("{CASESTUDY_BANNER}\n{CASESTUDY_COLUMNS}\n");
    for model in &models {
        let wl = qkv_workload(&model.desc());
        let reference = evaluate(&model.reference_point()?, &wl, &cal, opts)?;
        report.push_str(&casestudy_row(model, "reference", &reference, wl.total_macs(), a.capacity_bound));
        report.push('\n');
        if a.budget > 0 {
            let search = SearchArgs {
                strategy: a.strategy,
                seed: a.seed,
                pop: a.pop,
                gens: a.gens,
                capacity_bound: Some(a.capacity_bound),
                objectives: vec![ObjectiveName::Latency, ObjectiveName::Power, ObjectiveName::Area],
                jobs: a.jobs,
            };
            let space = Space {
                cores: vec![model.cores],
                ..Space::full()
            };
            let result = explore(&search.config(space, a.budget as usize, opts), &wl, &cal)?;
            report.push_str(&casestudy_row(model, "searched", &result.optimum, wl.total_macs(), a.capacity_bound));
            report.push('\n');
        }
    }
    match &a.out {
        Some(dir) => {
            write_file(&dir.join("casestudy.csv"), &report)?;
            let mut m = ManifestBuilder::new("casestudy", recorded);
            m.input("models", &a.models)?;
            m.calibration(&a.cal)?;
            if a.budget > 0 {
                m.seed = Some(a.seed);
                m.strategy = Some(format!("{:?}", a.strategy).to_lowercase());
                m.budget = Some(a.budget);
            }
            m.finish(dir, vec!["casestudy.csv".to_string()])
        }
        None => stdout.write_all(report.as_bytes()).map_err(|e| Error::Argument(e.to_string())),
    }
}

fn cmd_replay(a: &ReplayArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let source = a.manifest.display().to_string();
    let manifest: RunManifest =
        serde_json::from_str(&read(&a.manifest)?).map_err(|e| Error::parse(&source, e.to_string()))?;
    for input in &manifest.inputs {
        let bytes = fs::read(&input.path).map_err(|e| Error::parse(&input.path, e.to_string()))?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(Error::parse(&input.path, "content differs from the manifest"));
        }
    }
    if manifest.command == "replay" {
        return Err(Error::parse(&source, "cannot replay a replay"));
    }
    let mut args = vec!["cim-dse".to_string(), manifest.command.clone()];
    args.extend(manifest.args.iter().cloned());
    args.push("--out".to_string());
    args.push(a.out.display().to_string());
    if manifest.command != "simulate" {
        args.push("--jobs".to_string());
        args.push(a.jobs.to_string());
    }
    match run(args, stdout, stderr) {
        EXIT_OK => Ok(()),
        EXIT_EMPTY => Err(Error::EmptySpace),
        EXIT_VALIDATION => Err(Error::Validation {
            field: "manifest",
            message: "replayed command failed validation".to_string(),
        }),
        _ => Err(Error::parse(&source, "replayed command failed")),
    }
}
