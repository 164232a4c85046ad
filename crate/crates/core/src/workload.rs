//! GEMM workloads built from LLM model shapes.

use serde::Deserialize;

use crate::design_space::DesignPoint;
use crate::error::{Error, Result};
use crate::scheduler::{simulate, GemmSpec, SimOptions, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    #[default]
    Prefill,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDesc {
    pub name: String,
    pub layers: u64,
    pub hidden_dim: u64,
    pub seq_len: u64,
    #[serde(default = "one")]
    pub batch: u64,
    #[serde(default)]
    pub stage: Stage,
}

fn one() -> u64 {
    1
}

impl ModelDesc {
    pub fn check(&self) -> Result<()> {
        for (field, v) in [
            ("layers", self.layers),
            ("hidden_dim", self.hidden_dim),
            ("seq_len", self.seq_len),
            ("batch", self.batch),
        ] {
            if v == 0 {
                return Err(Error::Validation {
                    field: "model",
                    message: format!("{}: {field} must be at least 1", self.name),
                });
            }
        }
        Ok(())
    }
}

/// GEMMs executed back to back, each repeated `repeat` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GemmWorkload {
    items: Vec<(GemmSpec, u64)>,
    total_macs: u128,
}

impl GemmWorkload {
    pub fn new(items: Vec<(GemmSpec, u64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Argument("workload has no GEMMs".to_string()));
        }
        if items.iter().any(|(_, r)| *r == 0) {
            return Err(Error::Argument("repeat counts must be at least 1".to_string()));
        }
        let total_macs = items.iter().map(|(g, r)| g.macs() * *r as u128).sum();
        Ok(GemmWorkload { items, total_macs })
    }

    pub fn single(gemm: GemmSpec) -> Self {
        GemmWorkload::new(vec![(gemm, 1)]).expect("one GEMM with repeat 1")
    }

    pub fn items(&self) -> &[(GemmSpec, u64)] {
        &self.items
    }

    pub fn total_macs(&self) -> u128 {
        self.total_macs
    }
}

/// Q, K and V projections of every layer at the prefill stage.
pub fn qkv_workload(model: &ModelDesc) -> GemmWorkload {
    let gemm = GemmSpec {
        m: model.batch * model.seq_len,
        n: model.hidden_dim,
        k: model.hidden_dim,
    };
    GemmWorkload::new(vec![(gemm, 3 * model.layers)]).expect("model dims are positive")
}

/// Splits N into `cores` near-equal chunks, larger chunks first.
///
/// Cores that would receive no columns are dropped.
pub fn partition_cores(wl: &GemmWorkload, cores: u32) -> Vec<GemmWorkload> {
    assert!(cores >= 1, "at least one core");
    let cores = cores as u64;
    let mut per_core: Vec<Vec<(GemmSpec, u64)>> = vec![Vec::new(); cores as usize];
    for (g, repeat) in &wl.items {
        let (base, extra) = (g.n / cores, g.n % cores);
        for (c, items) in per_core.iter_mut().enumerate() {
            let n = base + u64::from((c as u64) < extra);
            if n > 0 {
                items.push((GemmSpec { n, ..*g }, *repeat));
            }
        }
    }
    per_core
        .into_iter()
        .filter(|items| !items.is_empty())
        .map(|items| GemmWorkload::new(items).expect("chunks are non-empty"))
        .collect()
}

/// Runs a workload on every core of `point`.
///
/// GEMMs on one core run back to back; cores run side by side, so the
/// latency is that of the slowest core.
pub fn simulate_workload(wl: &GemmWorkload, point: &DesignPoint, opts: SimOptions) -> SimResult {
    let mut cache: Vec<(GemmSpec, SimResult)> = Vec::new();
    let mut total: Option<SimResult> = None;
    for core in partition_cores(wl, point.array().cores) {
        let mut acc = SimResult::default();
        for (g, repeat) in core.items() {
            let sim = match cache.iter().find(|(c, _)| c == g) {
                Some((_, s)) => *s,
                None => {
                    let s = simulate(g, point, opts);
                    cache.push((*g, s));
                    s
                }
            };
            acc.accumulate(&sim, *repeat);
        }
        match &mut total {
            Some(t) => t.merge_parallel(&acc),
            None => total = Some(acc),
        }
    }
    total.expect("a workload yields at least one core")
}

/// Parses `M,N,K,repeat` lines; `#` starts a comment and blank lines are skipped.
pub fn parse_workload(text: &str, source_name: &str) -> Result<GemmWorkload> {
    let mut items = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::parse(format!("{source_name}:{}", lineno + 1), msg);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(at(format!("expected M,N,K,repeat (got {} fields)", fields.len())));
        }
        let mut nums = [0u64; 4];
        for (slot, (name, f)) in nums.iter_mut().zip(["M", "N", "K", "repeat"].iter().zip(&fields)) {
            *slot = f
                .parse()
                .map_err(|_| at(format!("{name} is not a non-negative integer: `{f}`")))?;
            if *slot == 0 {
                return Err(at(format!("{name} must be at least 1")));
            }
        }
        items.push((GemmSpec::new(nums[0], nums[1], nums[2])?, nums[3]));
    }
    if items.is_empty() {
        return Err(Error::parse(source_name, "no GEMM lines"));
    }
    GemmWorkload::new(items)
}

/// Parses a single model description with the [`ModelDesc`] field names.
pub fn parse_model(text: &str, source_name: &str) -> Result<ModelDesc> {
    let model: ModelDesc =
        toml::from_str(text).map_err(|e| Error::parse(source_name, e.message().to_string()))?;
    model.check()?;
    Ok(model)
}

/// Loads either a GEMM list or a model description (turned into its QKV workload).
pub fn load_workload(text: &str, source_name: &str) -> Result<GemmWorkload> {
    if looks_like_toml(text) {
        Ok(qkv_workload(&parse_model(text, source_name)?))
    } else {
        parse_workload(text, source_name)
    }
}

fn looks_like_toml(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.contains('=') || l.starts_with('['))
}
