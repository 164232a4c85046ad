//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Pass criterion numbers as arguments to run a
//! subset.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use cim_dse::cli::{parse_models, run, CASESTUDY_BANNER, CASESTUDY_COLUMNS, MANIFEST_NAME};
use cim_dse::cost_model::Calibration;
use cim_dse::design_space::{
    validate, ArrayConfig, Dataflow, DesignPoint, Interconnect, MacroConfig, Space, AL_CANDIDATES, LSL_CANDIDATES,
    PC_CANDIDATES,
};
use cim_dse::dse::{evaluate, explore, non_dominated, pareto_filter, EvaluatedPoint, ExploreConfig, Objective, Strategy};
use cim_dse::scheduler::{simulate, tile, GemmSpec, SimOptions};
use cim_dse::workload::GemmWorkload;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const FLOWS: [(Dataflow, Interconnect); 4] = [
    (Dataflow::Ws, Interconnect::Broadcast),
    (Dataflow::Ws, Interconnect::Systolic),
    (Dataflow::Os, Interconnect::Broadcast),
    (Dataflow::Os, Interconnect::Systolic),
];

const TL_GRID: [u32; 7] = [8, 16, 32, 64, 128, 256, 512];

#[allow(clippy::too_many_arguments)]
fn point(
    al: u32,
    lsl: u32,
    pc: u32,
    ol: bool,
    br: u32,
    bc: u32,
    tl: u32,
    flow: (Dataflow, Interconnect),
) -> DesignPoint {
    validate(
        &MacroConfig {
            al,
            lsl,
            pc,
            pl: 0,
            ol,
            ..MacroConfig::default()
        },
        &ArrayConfig {
            br,
            bc,
            dataflow: flow.0,
            interconnect: flow.1,
            tl,
            cores: 1,
        },
    )
    .unwrap()
}

fn tc_oracle(tl: u32) -> u64 {
    tl as u64 * 8 / 2
}

fn ts_oracle(pc: u32) -> u64 {
    pc as u64 * 8
}

/// Near-square split of `2^k` macros.
fn near_square(k: u32) -> (u32, u32) {
    let br = 1 << (k / 2);
    (br, (1 << k) / br)
}

fn llama_qkv() -> GemmWorkload {
    GemmWorkload::single(GemmSpec::new(8192, 4096, 4096).unwrap())
}

/// One (M, N, K) block that fills the array exactly once.
fn one_block(p: &DesignPoint) -> GemmSpec {
    let m = p.macro_cfg();
    let a = p.array();
    let n = (a.bc * m.pc * m.lsl) as u64;
    let (mt, kt) = match a.dataflow {
        Dataflow::Ws => (a.tl as u64, (a.br * m.al) as u64),
        Dataflow::Os => ((a.br * a.tl) as u64, m.al as u64),
    };
    GemmSpec::new(mt, n, kt).unwrap()
}

fn c1_closed_form() -> Outcome {
    let mut combos = 0;
    for tl in TL_GRID {
        for pc in PC_CANDIDATES {
            for lsl in LSL_CANDIDATES {
                let (tc, ts) = (tc_oracle(tl), ts_oracle(pc));
                let eq3 = lsl as u64 * (ts + tc);
                let eq4 = lsl as u64 * ts.max(tc);
                for (ol, expected) in [(false, eq3), (true, eq4)] {
                    let p = point(64, lsl, pc, ol, 1, 1, tl, FLOWS[0]);
                    let g = GemmSpec::new(tl as u64, (pc * lsl) as u64, 64).unwrap();
                    let got = simulate(&g, &p, SimOptions::paper()).total_cycles;
                    ensure!(got == expected, "TL={tl} PC={pc} LSL={lsl} OL={ol}: {got} != {expected}");
                }
                combos += 1;
            }
        }
    }
    ensure!(combos >= 200, "grid has only {combos} combinations");
    Ok(format!("{combos} grid points, both overlap settings"))
}

fn c2_overlap_bound() -> Outcome {
    let (mut cases, mut at_bound) = (0u64, 0u64);
    for tl in TL_GRID {
        for pc in PC_CANDIDATES {
            for lsl in LSL_CANDIDATES {
                for br in [1, 2, 4, 8] {
                    for bc in [1, 2, 4, 8] {
                        for flow in FLOWS {
                            let nol_p = point(64, lsl, pc, false, br, bc, tl, flow);
                            let ol_p = point(64, lsl, pc, true, br, bc, tl, flow);
                            let g = one_block(&nol_p);
                            let nol = simulate(&g, &nol_p, SimOptions::paper()).total_cycles;
                            let ol = simulate(&g, &ol_p, SimOptions::paper()).total_cycles;
                            let tag = nol_p.flow_tag();
                            ensure!(ol < nol, "{tag} TL={tl} PC={pc} LSL={lsl} {br}x{bc}: no reduction");
                            ensure!(2 * ol >= nol, "{tag} TL={tl} PC={pc} LSL={lsl} {br}x{bc}: ratio above 1/2");
                            // a shared column bus serializes the BR row updates
                            let ts_eff = match flow {
                                (Dataflow::Ws, Interconnect::Broadcast) => br as u64 * ts_oracle(pc),
                                _ => ts_oracle(pc),
                            };
                            if 2 * ol <= nol + 2 {
                                at_bound += 1;
                                ensure!(
                                    ts_eff == tc_oracle(tl),
                                    "{tag} TL={tl} PC={pc} LSL={lsl} {br}x{bc}: ratio 1/2 with Ts={ts_eff} Tc={}",
                                    tc_oracle(tl)
                                );
                            }
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    ensure!(at_bound > 0, "the bound was never reached");
    Ok(format!("{cases} cases, {at_bound} at the 1/2 bound"))
}

fn random_point(rng: &mut ChaCha8Rng, max_dim: u32, flow: (Dataflow, Interconnect), ol: bool) -> DesignPoint {
    point(
        AL_CANDIDATES[rng.gen_range(0..AL_CANDIDATES.len())],
        LSL_CANDIDATES[rng.gen_range(0..LSL_CANDIDATES.len())],
        PC_CANDIDATES[rng.gen_range(0..PC_CANDIDATES.len())],
        ol,
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
        TL_GRID[rng.gen_range(0..TL_GRID.len())],
        flow,
    )
}

fn c3_mac_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0;
    for _ in 0..500 {
        let g = GemmSpec::new(rng.gen_range(1..=3000), rng.gen_range(1..=3000), rng.gen_range(1..=3000)).unwrap();
        let base = random_point(&mut rng, 16, FLOWS[0], false);
        let expected = g.m as u128 * g.n as u128 * g.k as u128;
        for flow in FLOWS {
            for ol in [false, true] {
                let p = base
                    .with(|m, a| {
                        m.ol = ol;
                        a.dataflow = flow.0;
                        a.interconnect = flow.1;
                    })
                    .unwrap();
                let got = simulate(&g, &p, SimOptions::paper()).macs_executed;
                ensure!(got == expected, "{} on {g:?}: {got} != {expected}", p.flow_tag());
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} simulations"))
}

fn c4_broadcast_idle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let flow = (Dataflow::Ws, Interconnect::Broadcast);
    let (mut holding, mut violating) = (0, 0);
    while holding < 50 || violating < 50 {
        let p = random_point(&mut rng, 8, flow, true);
        let br_ts = p.array().br as u64 * ts_oracle(p.macro_cfg().pc);
        let holds = br_ts <= tc_oracle(p.array().tl);
        if (holds && holding >= 50) || (!holds && violating >= 50) {
            continue;
        }
        let t = tile(&GemmSpec::new(1, 1, 1).unwrap(), &p);
        let g = GemmSpec::new(
            // partial edge tiles included
            t.m_tile * rng.gen_range(1..=3) - rng.gen_range(0..t.m_tile),
            t.n_tile * rng.gen_range(1..=3) - rng.gen_range(0..t.n_tile),
            t.k_tile * rng.gen_range(1..=3) - rng.gen_range(0..t.k_tile),
        )
        .unwrap();
        let r = simulate(&g, &p, SimOptions::paper());
        if holds {
            ensure!(r.idle_macro_cycles == 0, "{} idle cycles at {:?}", r.idle_macro_cycles, p.field_values());
            holding += 1;
        } else {
            ensure!(
                r.idle_macro_cycles + r.stall_cycles > 0,
                "no idle or stall with BR*Ts > Tc at {:?}",
                p.field_values()
            );
            violating += 1;
        }
    }
    Ok("50 points with BR*Ts <= Tc idle-free, 50 violating points idle".to_string())
}

fn brute_force(vs: &[Vec<f64>]) -> Vec<usize> {
    (0..vs.len())
        .filter(|&i| {
            !vs.iter().any(|o| {
                o.iter().zip(&vs[i]).all(|(a, b)| a <= b) && o.iter().zip(&vs[i]).any(|(a, b)| a < b)
            })
        })
        .collect()
}

fn c5_pareto() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // coarse values force ties and duplicates
    let vs: Vec<Vec<f64>> = (0..1000)
        .map(|i| {
            (0..3)
                .map(|_| if i % 2 == 0 { rng.gen::<f64>() } else { rng.gen_range(0..12) as f64 })
                .collect()
        })
        .collect();
    let front = non_dominated(&vs);
    let truth = brute_force(&vs);
    ensure!(front == truth, "filter kept {} points, brute force {}", front.len(), truth.len());
    let survivors: Vec<Vec<f64>> = front.iter().map(|&i| vs[i].clone()).collect();
    ensure!(
        non_dominated(&survivors) == (0..survivors.len()).collect::<Vec<_>>(),
        "filter is not idempotent"
    );
    Ok(format!("{} of 1000 vectors non-dominated", front.len()))
}

fn c6_exhaustive_oracle() -> Outcome {
    let cal = Calibration::defaults();
    let wl = llama_qkv();
    // 4 * 2 * 3 * 2 * 2 * 2 * 2 = 384 points
    let space = Space {
        al: vec![32, 64, 128, 256],
        lsl: vec![2, 8],
        pc: vec![8, 16, 32],
        pl: vec![1],
        ol: vec![false, true],
        br: vec![2, 4],
        bc: vec![2, 8],
        dataflow: vec![Dataflow::Ws, Dataflow::Os],
        interconnect: vec![Interconnect::Systolic],
        tl: vec![32],
        ..Space::standard()
    };
    let size = space.len() as usize;
    ensure!(size <= 500, "space has {size} points");
    let res = explore(&ExploreConfig::new(space.clone(), Strategy::Exhaustive, size), &wl, &cal).map_err(|e| e.to_string())?;
    ensure!(res.evaluated.len() == size, "evaluated {} of {size}", res.evaluated.len());
    let all: Vec<EvaluatedPoint> = space
        .iter()
        .map(|p| evaluate(&p, &wl, &cal, SimOptions::paper()).unwrap())
        .collect();
    let truth = pareto_filter(&all, &Objective::PPA).unwrap();
    ensure!(res.front == truth, "exhaustive frontier differs from the filter over all evaluations");

    let evo = Strategy::Evolutionary {
        pop: 32,
        gens: 1000,
        seed: 6,
    };
    let e = explore(&ExploreConfig::new(space, evo, size), &wl, &cal).map_err(|e| e.to_string())?;
    let ids: HashSet<u64> = truth.points.iter().map(|p| p.point.id()).collect();
    ensure!(
        e.front.points.iter().all(|p| ids.contains(&p.point.id())),
        "evolutionary frontier has points off the true frontier"
    );
    ensure!(e.optimum.point == res.optimum.point, "scalar optima differ");
    Ok(format!("{size} points, {} on the frontier", truth.points.len()))
}

fn eval(p: &DesignPoint, wl: &GemmWorkload, cal: &Calibration) -> EvaluatedPoint {
    evaluate(p, wl, cal, SimOptions::paper()).unwrap()
}

fn c7_trends() -> Outcome {
    let cal = Calibration::defaults();
    let wl = llama_qkv();
    let macs = wl.total_macs();

    // (a) integration power share, arrays of 1..64 macros
    let mut worst_power = 0.0f64;
    for k in 0..=6 {
        let (br, bc) = near_square(k);
        for flow in FLOWS {
            for ol in [false, true] {
                let e = eval(&point(256, 2, 32, ol, br, bc, 128, flow), &wl, &cal);
                worst_power = worst_power.max(e.ppa.integration_power_fraction());
            }
        }
    }
    ensure!(worst_power < 0.20, "(a) integration power share {worst_power:.3}");

    // (b) integration area share, broadcast vs systolic
    let mut last_gap = 0.0;
    for k in 2..=12 {
        let (br, bc) = near_square(k);
        let share = |ic| {
            let e = eval(&point(256, 2, 32, false, br, bc, 128, (Dataflow::Ws, ic)), &wl, &cal);
            e.ppa.integration_area_mm2 / e.ppa.area_mm2
        };
        let gap = share(Interconnect::Broadcast) - share(Interconnect::Systolic);
        ensure!(gap > 0.0, "(b) broadcast overhead not above systolic at {br}x{bc}");
        ensure!(gap > last_gap, "(b) gap does not grow at {br}x{bc}");
        last_gap = gap;
    }

    // (c) energy-efficiency cost of compute/update overlap on a 2x4 array
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for pc in PC_CANDIDATES {
        for flow in FLOWS {
            let eff = |ol| eval(&point(256, 2, pc, ol, 2, 4, 128, flow), &wl, &cal).ppa.ops_per_joule(macs);
            let drop = 1.0 - eff(true) / eff(false);
            lo = lo.min(drop);
            hi = hi.max(drop);
        }
    }
    ensure!((0.25..=0.35).contains(&lo) && (0.25..=0.35).contains(&hi), "(c) drop in [{lo:.3}, {hi:.3}]");

    // (d) macro selection at 512K multipliers
    const SIZES: [(u32, u32); 10] = [
        (32, 4),
        (32, 8),
        (64, 8),
        (64, 16),
        (128, 16),
        (128, 32),
        (256, 32),
        (256, 64),
        (256, 128),
        (256, 256),
    ];
    for flow in FLOWS {
        let (mut energy, mut area) = (Vec::new(), Vec::new());
        for (al, pc) in SIZES {
            let macros = (1u32 << 16) / (al * pc);
            let (br, bc) = near_square(macros.trailing_zeros());
            let p = point(al, 2, pc, false, br, bc, 128, flow);
            debug_assert_eq!(p.macro_cfg().multipliers() * (br * bc) as u64, 1 << 19);
            let e = eval(&p, &wl, &cal);
            energy.push(e.ppa.ops_per_joule(macs));
            area.push(e.ppa.ops_per_second_mm2(macs));
        }
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
        let tag = format!("{}-{}", flow.0, flow.1);
        ensure!(argmax(&energy) == SIZES.len() - 1, "(d) {tag} energy efficiency peaks at {:?}", SIZES[argmax(&energy)]);
        let a = argmax(&area);
        ensure!(a > 0 && a < SIZES.len() - 1, "(d) {tag} area efficiency peaks at the edge {:?}", SIZES[a]);
    }
    Ok(format!(
        "integration power <= {:.1}%, OL drop {:.3}..{:.3}, interior area optimum in all flows",
        worst_power * 100.0,
        lo,
        hi
    ))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["cim-dse"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    Ok(String::from_utf8(out).unwrap())
}

fn models_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/llm_models.toml").to_string()
}

fn c8_casestudy() -> Outcome {
    let path = models_path();
    let text = cli(&["casestudy", "--models", &path])?;
    let models = parse_models(&fs::read_to_string(&path).unwrap(), &path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    ensure!(lines.first() == Some(&CASESTUDY_BANNER), "missing banner");
    ensure!(lines.get(1) == Some(&CASESTUDY_COLUMNS), "missing column header");
    let header: Vec<&str> = CASESTUDY_COLUMNS.split(',').collect();
    let rows = &lines[2..];
    ensure!(rows.len() == models.len(), "{} rows for {} models", rows.len(), models.len());
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for (row, m) in rows.iter().zip(&models) {
        let cells: Vec<&str> = row.split(',').collect();
        ensure!(cells.len() == header.len(), "{}: {} cells", m.name, cells.len());
        ensure!(cells.iter().all(|c| !c.is_empty()), "{}: empty cell", m.name);
        let expected = 3 * m.layers as u128 * (m.batch * m.seq_len) as u128 * (m.hidden_dim as u128).pow(2);
        let got: u128 = cells[col("total_macs")].parse().unwrap();
        ensure!(got == expected, "{}: total_macs {got} != {expected}", m.name);
        let latency: f64 = cells[col("latency_ms")].parse().unwrap();
        ensure!(latency.is_finite() && latency > 0.0, "{}: latency {latency}", m.name);
    }
    Ok(format!("{} models", rows.len()))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c9_determinism() -> Outcome {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    let wl = root.join("w.csv");
    fs::write(&wl, "2048,1024,1024,1\n1024,1024,4096,2\n").unwrap();
    let space = root.join("s.toml");
    fs::write(&space, "AL = [64, 128, 256]\nPC = [8, 16, 32]\nBR = [1, 2, 4]\nBC = [1, 2, 4]\nTL = [32]\n").unwrap();
    let record = root.join("p.toml");
    fs::write(&record, point(128, 4, 16, true, 2, 4, 32, FLOWS[1]).to_record()).unwrap();
    let (wl, space, point, models) = (
        wl.display().to_string(),
        space.display().to_string(),
        record.display().to_string(),
        models_path(),
    );
    let invocations: Vec<Vec<&str>> = vec![
        vec!["simulate", "--point", &point, "--workload", &wl],
        vec!["explore", "--space", &space, "--workload", &wl, "--budget", "40", "--seed", "2"],
        vec![
            "explore", "--space", &space, "--workload", &wl, "--budget", "40", "--strategy", "evolutionary", "--pop",
            "8", "--seed", "2",
        ],
        vec!["compare", "--space", &space, "--workload", &wl, "--budget-per-flow", "10", "--seed", "2"],
        vec!["casestudy", "--models", &models, "--budget", "6", "--seed", "2"],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let first = root.join(format!("run{i}"));
        let first_s = first.display().to_string();
        let mut full = args.clone();
        full.extend(["--out", &first_s]);
        if args[0] != "simulate" {
            full.extend(["--jobs", "1"]);
        }
        cli(&full)?;
        let reference = csv_files(&first);
        ensure!(!reference.is_empty(), "{}: no CSV output", args[0]);
        let manifest = first.join(MANIFEST_NAME).display().to_string();
        for jobs in ["1", "8"] {
            let again = root.join(format!("run{i}_replay{jobs}"));
            cli(&["replay", &manifest, "--jobs", jobs, "--out", &again.display().to_string()])?;
            ensure!(csv_files(&again) == reference, "{}: replay with {jobs} jobs differs", args[0]);
        }
    }
    Ok(format!("{} invocations replayed with 1 and 8 jobs", invocations.len()))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "closed-form macro latency", Duration::from_secs(10), c1_closed_form),
        (2, "overlap reduction bound", Duration::from_secs(30), c2_overlap_bound),
        (3, "MAC conservation", Duration::from_secs(60), c3_mac_conservation),
        (4, "WS-Broadcast idle elimination", Duration::from_secs(60), c4_broadcast_idle),
        (5, "Pareto filter vs brute force", Duration::from_secs(5), c5_pareto),
        (6, "exhaustive DSE oracle", Duration::from_secs(300), c6_exhaustive_oracle),
        (7, "qualitative trends", Duration::from_secs(120), c7_trends),
        (8, "case study", Duration::from_secs(120), c8_casestudy),
        (9, "CLI determinism", Duration::from_secs(60), c9_determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{elapsed:.1?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{elapsed:.1?}] {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
