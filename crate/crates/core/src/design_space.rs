//! Design-point data model and the candidate space it is drawn from.
//!
//! A [`DesignPoint`] couples one macro configuration with one array
//! configuration. Points only exist in validated form: [`validate`] is the
//! single constructor, and it assigns the point a canonical identifier equal
//! to its mixed-radix index in the full candidate space. Enumeration walks
//! that index in ascending order, so ids double as the canonical ordering.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AL_CANDIDATES: [u32; 6] = [8, 16, 32, 64, 128, 256];
pub const LSL_CANDIDATES: [u32; 6] = [2, 4, 8, 16, 32, 64];
pub const PC_CANDIDATES: [u32; 8] = [2, 4, 8, 16, 32, 64, 128, 256];
pub const PL_CANDIDATES: [u32; 6] = [0, 1, 2, 3, 4, 5];
pub const TL_CANDIDATES: [u32; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];
pub const ARRAY_DIM_MAX: u32 = 64;
pub const WEIGHT_BITS: u32 = 8;
pub const INPUT_BITS: u32 = 8;

/// Activation tile length used when a space does not say otherwise.
pub const DEFAULT_TL: u32 = 32;

/// CSV / record field names, in canonical column order.
pub const FIELD_NAMES: [&str; 13] = [
    "AL",
    "LSL",
    "PC",
    "PL",
    "OL",
    "WBW",
    "IBW",
    "BR",
    "BC",
    "dataflow",
    "interconnect",
    "TL",
    "cores",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataflow {
    #[serde(rename = "WS")]
    Ws,
    #[serde(rename = "OS")]
    Os,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Interconnect {
    Broadcast,
    Systolic,
}

impl Dataflow {
    pub const ALL: [Dataflow; 2] = [Dataflow::Ws, Dataflow::Os];

    fn index(self) -> usize {
        self as usize
    }
}

impl Interconnect {
    pub const ALL: [Interconnect; 2] = [Interconnect::Broadcast, Interconnect::Systolic];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dataflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataflow::Ws => "WS",
            Dataflow::Os => "OS",
        })
    }
}

impl fmt::Display for Interconnect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interconnect::Broadcast => "Broadcast",
            Interconnect::Systolic => "Systolic",
        })
    }
}

impl FromStr for Dataflow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "WS" | "ws" => Ok(Dataflow::Ws),
            "OS" | "os" => Ok(Dataflow::Os),
            _ => Err(Error::Argument(format!("unknown dataflow `{s}` (expected WS or OS)"))),
        }
    }
}

impl FromStr for Interconnect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Broadcast" | "broadcast" => Ok(Interconnect::Broadcast),
            "Systolic" | "systolic" => Ok(Interconnect::Systolic),
            _ => Err(Error::Argument(format!(
                "unknown interconnect `{s}` (expected Broadcast or Systolic)"
            ))),
        }
    }
}

/// Macro-level parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroConfig {
    /// Accumulation length: dot-product length per pass.
    pub al: u32,
    /// Local storage length: weight rows per bank.
    pub lsl: u32,
    /// Parallel channels: banks per macro.
    pub pc: u32,
    /// Pipeline depth of the reduction logic.
    pub pl: u32,
    /// Compute-I/O overlap.
    pub ol: bool,
    pub wbw: u32,
    pub ibw: u32,
    /// Intrinsic weight-write speed factor.
    pub kappa: f64,
}

impl MacroConfig {
    /// Bit-wise multiplier count: `AL * PC * WBW`.
    ///
    /// Two input bit-slices are broadcast per cycle against `WBW / 2` two-bit
    /// weight subarrays in each of the `PC` banks, i.e. `AL * PC * 2 * WBW / 2`.
    pub fn multipliers(&self) -> u64 {
        self.al as u64 * self.pc as u64 * self.wbw as u64
    }
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig {
            al: 8,
            lsl: 2,
            pc: 2,
            pl: 0,
            ol: false,
            wbw: WEIGHT_BITS,
            ibw: INPUT_BITS,
            kappa: 1.0,
        }
    }
}

/// Array-level parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayConfig {
    pub br: u32,
    pub bc: u32,
    pub dataflow: Dataflow,
    pub interconnect: Interconnect,
    /// Activation tile length (columns of one activation block).
    pub tl: u32,
    /// Identical CIM cores sharing the workload.
    pub cores: u32,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            br: 1,
            bc: 1,
            dataflow: Dataflow::Ws,
            interconnect: Interconnect::Broadcast,
            tl: 8,
            cores: 1,
        }
    }
}

/// A validated accelerator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    macro_cfg: MacroConfig,
    array: ArrayConfig,
    id: u64,
}

impl DesignPoint {
    pub fn new(macro_cfg: MacroConfig, array: ArrayConfig) -> Result<Self> {
        validate(&macro_cfg, &array)
    }

    pub fn macro_cfg(&self) -> &MacroConfig {
        &self.macro_cfg
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    /// Canonical identifier; ascending ids follow enumeration order.
    ///
    /// `kappa` is a technology constant and does not participate.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn macros_per_core(&self) -> u64 {
        self.array.br as u64 * self.array.bc as u64
    }

    /// Short dataflow tag such as `WS-Systolic-NOL`.
    pub fn flow_tag(&self) -> String {
        format!(
            "{}-{}-{}",
            self.array.dataflow,
            self.array.interconnect,
            if self.macro_cfg.ol { "OL" } else { "NOL" }
        )
    }

    /// Same point with some fields replaced, revalidated.
    pub fn with(
        &self,
        f: impl FnOnce(&mut MacroConfig, &mut ArrayConfig),
    ) -> Result<DesignPoint> {
        let mut m = self.macro_cfg;
        let mut a = self.array;
        f(&mut m, &mut a);
        validate(&m, &a)
    }

    /// Values in [`FIELD_NAMES`] order.
    pub fn field_values(&self) -> [String; 13] {
        let m = &self.macro_cfg;
        let a = &self.array;
        [
            m.al.to_string(),
            m.lsl.to_string(),
            m.pc.to_string(),
            m.pl.to_string(),
            m.ol.to_string(),
            m.wbw.to_string(),
            m.ibw.to_string(),
            a.br.to_string(),
            a.bc.to_string(),
            a.dataflow.to_string(),
            a.interconnect.to_string(),
            a.tl.to_string(),
            a.cores.to_string(),
        ]
    }

    /// Flat `key = value` record.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        for (name, value) in FIELD_NAMES.iter().zip(self.field_values()) {
            let quoted = matches!(*name, "dataflow" | "interconnect");
            if quoted {
                out.push_str(&format!("{name} = \"{value}\"\n"));
            } else {
                out.push_str(&format!("{name} = {value}\n"));
            }
        }
        if self.macro_cfg.kappa != 1.0 {
            out.push_str(&format!("kappa = {:?}\n", self.macro_cfg.kappa));
        }
        out
    }

    /// Parses a flat record. Parse problems and validation problems are
    /// reported as distinct error kinds.
    pub fn from_record(text: &str, source_name: &str) -> Result<DesignPoint> {
        let rec: PointRecord =
            toml::from_str(text).map_err(|e| Error::parse(source_name, e.to_string()))?;
        let macro_cfg = MacroConfig {
            al: rec.al,
            lsl: rec.lsl,
            pc: rec.pc,
            pl: rec.pl,
            ol: rec.ol,
            wbw: rec.wbw,
            ibw: rec.ibw,
            kappa: rec.kappa,
        };
        let array = ArrayConfig {
            br: rec.br,
            bc: rec.bc,
            dataflow: rec.dataflow,
            interconnect: rec.interconnect,
            tl: rec.tl,
            cores: rec.cores,
        };
        validate(&macro_cfg, &array)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    #[serde(rename = "AL")]
    al: u32,
    #[serde(rename = "LSL")]
    lsl: u32,
    #[serde(rename = "PC")]
    pc: u32,
    #[serde(rename = "PL")]
    pl: u32,
    #[serde(rename = "OL")]
    ol: bool,
    #[serde(rename = "WBW", default = "default_wbw")]
    wbw: u32,
    #[serde(rename = "IBW", default = "default_ibw")]
    ibw: u32,
    #[serde(rename = "BR")]
    br: u32,
    #[serde(rename = "BC")]
    bc: u32,
    dataflow: Dataflow,
    interconnect: Interconnect,
    #[serde(rename = "TL")]
    tl: u32,
    #[serde(default = "default_cores")]
    cores: u32,
    #[serde(default = "default_kappa")]
    kappa: f64,
}

fn default_wbw() -> u32 {
    WEIGHT_BITS
}
fn default_ibw() -> u32 {
    INPUT_BITS
}
fn default_cores() -> u32 {
    1
}
fn default_kappa() -> f64 {
    1.0
}

fn fmt_set(values: &[u32]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn position(field: &'static str, value: u32, candidates: &[u32]) -> Result<usize> {
    candidates.iter().position(|&c| c == value).ok_or_else(|| Error::Validation {
        field,
        message: format!("{field} not in {} (got {value})", fmt_set(candidates)),
    })
}

fn array_dim(field: &'static str, value: u32) -> Result<usize> {
    if (1..=ARRAY_DIM_MAX).contains(&value) {
        Ok((value - 1) as usize)
    } else {
        Err(Error::Validation {
            field,
            message: format!("{field} not in {{1..{ARRAY_DIM_MAX}}} (got {value})"),
        })
    }
}

/// Per-field candidate indices, least significant first.
struct Digits {
    ol: usize,
    pl: usize,
    pc: usize,
    lsl: usize,
    al: usize,
    bc: usize,
    br: usize,
    interconnect: usize,
    dataflow: usize,
    tl: usize,
    cores: u64,
}

const RADIX_OL: u64 = 2;
const RADIX_PL: u64 = PL_CANDIDATES.len() as u64;
const RADIX_PC: u64 = PC_CANDIDATES.len() as u64;
const RADIX_LSL: u64 = LSL_CANDIDATES.len() as u64;
const RADIX_AL: u64 = AL_CANDIDATES.len() as u64;
const RADIX_DIM: u64 = ARRAY_DIM_MAX as u64;
const RADIX_TL: u64 = TL_CANDIDATES.len() as u64;

impl Digits {
    fn id(&self) -> u64 {
        let mut id = self.cores;
        id = id * RADIX_TL + self.tl as u64;
        id = id * 2 + self.dataflow as u64;
        id = id * 2 + self.interconnect as u64;
        id = id * RADIX_DIM + self.br as u64;
        id = id * RADIX_DIM + self.bc as u64;
        id = id * RADIX_AL + self.al as u64;
        id = id * RADIX_LSL + self.lsl as u64;
        id = id * RADIX_PC + self.pc as u64;
        id = id * RADIX_PL + self.pl as u64;
        id * RADIX_OL + self.ol as u64
    }
}

/// Checks every field against its candidate set and returns the validated point.
pub fn validate(macro_cfg: &MacroConfig, array: &ArrayConfig) -> Result<DesignPoint> {
    let m = macro_cfg;
    let al = position("AL", m.al, &AL_CANDIDATES)?;
    let lsl = position("LSL", m.lsl, &LSL_CANDIDATES)?;
    let pc = position("PC", m.pc, &PC_CANDIDATES)?;
    let pl = position("PL", m.pl, &PL_CANDIDATES)?;
    if m.wbw != WEIGHT_BITS {
        return Err(Error::Validation {
            field: "WBW",
            message: format!("WBW must be {WEIGHT_BITS} (got {})", m.wbw),
        });
    }
    if m.ibw != INPUT_BITS {
        return Err(Error::Validation {
            field: "IBW",
            message: format!("IBW must be {INPUT_BITS} (got {})", m.ibw),
        });
    }
    if !(m.kappa.is_finite() && m.kappa > 0.0) {
        return Err(Error::Validation {
            field: "kappa",
            message: format!("kappa must be a positive number (got {})", m.kappa),
        });
    }
    let br = array_dim("BR", array.br)?;
    let bc = array_dim("BC", array.bc)?;
    let tl = position("TL", array.tl, &TL_CANDIDATES)?;
    if array.cores == 0 {
        return Err(Error::Validation {
            field: "cores",
            message: "cores must be at least 1 (got 0)".to_string(),
        });
    }
    let digits = Digits {
        ol: m.ol as usize,
        pl,
        pc,
        lsl,
        al,
        bc,
        br,
        interconnect: array.interconnect.index(),
        dataflow: array.dataflow.index(),
        tl,
        cores: (array.cores - 1) as u64,
    };
    Ok(DesignPoint {
        macro_cfg: *macro_cfg,
        array: *array,
        id: digits.id(),
    })
}

/// A rectangular subset of the candidate space: one sorted candidate list
/// per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    pub al: Vec<u32>,
    pub lsl: Vec<u32>,
    pub pc: Vec<u32>,
    pub pl: Vec<u32>,
    pub ol: Vec<bool>,
    pub br: Vec<u32>,
    pub bc: Vec<u32>,
    pub dataflow: Vec<Dataflow>,
    pub interconnect: Vec<Interconnect>,
    pub tl: Vec<u32>,
    pub cores: Vec<u32>,
    pub kappa: f64,
}

impl Space {
    /// Every combination of the macro and array tables, with TL fixed to
    /// [`DEFAULT_TL`] and a single core.
    pub fn standard() -> Space {
        Space {
            al: AL_CANDIDATES.to_vec(),
            lsl: LSL_CANDIDATES.to_vec(),
            pc: PC_CANDIDATES.to_vec(),
            pl: PL_CANDIDATES.to_vec(),
            ol: vec![false, true],
            br: (1..=ARRAY_DIM_MAX).collect(),
            bc: (1..=ARRAY_DIM_MAX).collect(),
            dataflow: Dataflow::ALL.to_vec(),
            interconnect: Interconnect::ALL.to_vec(),
            tl: vec![DEFAULT_TL],
            cores: vec![1],
            kappa: 1.0,
        }
    }

    /// [`Space::standard`] with every TL candidate.
    pub fn full() -> Space {
        Space {
            tl: TL_CANDIDATES.to_vec(),
            ..Space::standard()
        }
    }

    /// Number of points, saturating at `u64::MAX`.
    pub fn len(&self) -> u64 {
        [
            self.al.len(),
            self.lsl.len(),
            self.pc.len(),
            self.pl.len(),
            self.ol.len(),
            self.br.len(),
            self.bc.len(),
            self.dataflow.len(),
            self.interconnect.len(),
            self.tl.len(),
            self.cores.len(),
        ]
        .iter()
        .fold(1u64, |acc, &n| acc.saturating_mul(n as u64))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorts and deduplicates every list, then checks each value against
    /// its candidate set.
    pub fn normalized(mut self) -> Result<Space> {
        fn tidy<T: Ord>(v: &mut Vec<T>) {
            v.sort();
            v.dedup();
        }
        tidy(&mut self.al);
        tidy(&mut self.lsl);
        tidy(&mut self.pc);
        tidy(&mut self.pl);
        tidy(&mut self.ol);
        tidy(&mut self.br);
        tidy(&mut self.bc);
        tidy(&mut self.dataflow);
        tidy(&mut self.interconnect);
        tidy(&mut self.tl);
        tidy(&mut self.cores);
        for &v in &self.al {
            position("AL", v, &AL_CANDIDATES)?;
        }
        for &v in &self.lsl {
            position("LSL", v, &LSL_CANDIDATES)?;
        }
        for &v in &self.pc {
            position("PC", v, &PC_CANDIDATES)?;
        }
        for &v in &self.pl {
            position("PL", v, &PL_CANDIDATES)?;
        }
        for &v in &self.br {
            array_dim("BR", v)?;
        }
        for &v in &self.bc {
            array_dim("BC", v)?;
        }
        for &v in &self.tl {
            position("TL", v, &TL_CANDIDATES)?;
        }
        if self.cores.contains(&0) {
            return Err(Error::Validation {
                field: "cores",
                message: "cores must be at least 1 (got 0)".to_string(),
            });
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Validation {
                field: "kappa",
                message: format!("kappa must be a positive number (got {})", self.kappa),
            });
        }
        Ok(self)
    }

    /// Builds the point with the given per-field indices into this space.
    fn point_at(&self, idx: &[usize; 11]) -> DesignPoint {
        let macro_cfg = MacroConfig {
            al: self.al[idx[6]],
            lsl: self.lsl[idx[7]],
            pc: self.pc[idx[8]],
            pl: self.pl[idx[9]],
            ol: self.ol[idx[10]],
            wbw: WEIGHT_BITS,
            ibw: INPUT_BITS,
            kappa: self.kappa,
        };
        let array = ArrayConfig {
            br: self.br[idx[4]],
            bc: self.bc[idx[5]],
            dataflow: self.dataflow[idx[2]],
            interconnect: self.interconnect[idx[3]],
            tl: self.tl[idx[1]],
            cores: self.cores[idx[0]],
        };
        validate(&macro_cfg, &array).expect("space values are validated on construction")
    }

    /// Lengths of the per-field lists, most significant first.
    fn radices(&self) -> [usize; 11] {
        [
            self.cores.len(),
            self.tl.len(),
            self.dataflow.len(),
            self.interconnect.len(),
            self.br.len(),
            self.bc.len(),
            self.al.len(),
            self.lsl.len(),
            self.pc.len(),
            self.pl.len(),
            self.ol.len(),
        ]
    }

    /// Lazily walks the space in ascending id order.
    pub fn iter(&self) -> SpaceIter<'_> {
        SpaceIter {
            space: self,
            radices: self.radices(),
            digits: [0; 11],
            done: self.is_empty(),
        }
    }

    /// Parses a space description: each key names a parameter and maps to
    /// either a list of candidates or a `{ min, max }` table selecting the
    /// candidates inside that range. Missing keys keep [`Space::standard`].
    pub fn from_toml_str(text: &str, source_name: &str) -> Result<Space> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::parse(source_name, e.to_string()))?;
        Space::from_table(&table, source_name)
    }

    pub fn from_table(table: &toml::Table, source_name: &str) -> Result<Space> {
        let mut space = Space::standard();
        for (key, value) in table {
            let bad = |msg: &str| Error::parse(source_name, format!("key `{key}`: {msg}"));
            match key.as_str() {
                "AL" => space.al = int_list(value, &AL_CANDIDATES).map_err(|m| bad(&m))?,
                "LSL" => space.lsl = int_list(value, &LSL_CANDIDATES).map_err(|m| bad(&m))?,
                "PC" => space.pc = int_list(value, &PC_CANDIDATES).map_err(|m| bad(&m))?,
                "PL" => space.pl = int_list(value, &PL_CANDIDATES).map_err(|m| bad(&m))?,
                "TL" => space.tl = int_list(value, &TL_CANDIDATES).map_err(|m| bad(&m))?,
                "BR" | "BC" => {
                    let all: Vec<u32> = (1..=ARRAY_DIM_MAX).collect();
                    let list = int_list(value, &all).map_err(|m| bad(&m))?;
                    if key == "BR" {
                        space.br = list;
                    } else {
                        space.bc = list;
                    }
                }
                "cores" => {
                    let max = match value {
                        toml::Value::Table(t) => t
                            .get("max")
                            .and_then(|v| v.as_integer())
                            .unwrap_or(1)
                            .max(1) as u32,
                        _ => 4096,
                    };
                    let all: Vec<u32> = (1..=max).collect();
                    space.cores = int_list(value, &all).map_err(|m| bad(&m))?;
                }
                "OL" => {
                    let arr = value.as_array().ok_or_else(|| bad("expected a list of booleans"))?;
                    space.ol = arr
                        .iter()
                        .map(|v| v.as_bool().ok_or_else(|| bad("expected a boolean")))
                        .collect::<Result<_>>()?;
                }
                "dataflow" => {
                    space.dataflow = str_list(value)
                        .map_err(|m| bad(&m))?
                        .iter()
                        .map(|s| s.parse().map_err(|e: Error| bad(&e.to_string())))
                        .collect::<Result<_>>()?;
                }
                "interconnect" => {
                    space.interconnect = str_list(value)
                        .map_err(|m| bad(&m))?
                        .iter()
                        .map(|s| s.parse().map_err(|e: Error| bad(&e.to_string())))
                        .collect::<Result<_>>()?;
                }
                "kappa" => {
                    space.kappa = value
                        .as_float()
                        .or_else(|| value.as_integer().map(|i| i as f64))
                        .ok_or_else(|| bad("expected a number"))?;
                }
                _ => return Err(Error::parse(source_name, format!("unknown key `{key}`"))),
            }
        }
        space.normalized()
    }
}

fn int_list(value: &toml::Value, universe: &[u32]) -> std::result::Result<Vec<u32>, String> {
    match value {
        toml::Value::Array(arr) => arr
            .iter()
            .map(|v| {
                v.as_integer()
                    .filter(|&i| i >= 0 && i <= u32::MAX as i64)
                    .map(|i| i as u32)
                    .ok_or_else(|| "expected non-negative integers".to_string())
            })
            .collect(),
        toml::Value::Integer(i) if *i >= 0 => Ok(vec![*i as u32]),
        toml::Value::Table(t) => {
            let get = |k: &str, default: u32| -> std::result::Result<u32, String> {
                match t.get(k) {
                    None => Ok(default),
                    Some(v) => v
                        .as_integer()
                        .filter(|&i| i >= 0)
                        .map(|i| i as u32)
                        .ok_or_else(|| format!("`{k}` must be a non-negative integer")),
                }
            };
            let lo = get("min", 0)?;
            let hi = get("max", u32::MAX)?;
            Ok(universe.iter().copied().filter(|v| (lo..=hi).contains(v)).collect())
        }
        _ => Err("expected a list, an integer, or a { min, max } table".to_string()),
    }
}

fn str_list(value: &toml::Value) -> std::result::Result<Vec<String>, String> {
    match value {
        toml::Value::Array(arr) => arr
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| "expected strings".to_string()))
            .collect(),
        toml::Value::String(s) => Ok(vec![s.clone()]),
        _ => Err("expected a list of strings".to_string()),
    }
}

/// Single-consumer stream over a [`Space`].
pub struct SpaceIter<'a> {
    space: &'a Space,
    radices: [usize; 11],
    digits: [usize; 11],
    done: bool,
}

impl Iterator for SpaceIter<'_> {
    type Item = DesignPoint;

    fn next(&mut self) -> Option<DesignPoint> {
        if self.done {
            return None;
        }
        let point = self.space.point_at(&self.digits);
        // odometer increment, least significant digit last
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.radices[i] {
                break;
            }
            self.digits[i] = 0;
        }
        Some(point)
    }
}

/// Streams every point of `space` in canonical order, keeping only those
/// accepted by `filter` when one is given.
pub fn enumerate_space<'a>(
    space: &'a Space,
    filter: Option<&'a dyn Fn(&DesignPoint) -> bool>,
) -> impl Iterator<Item = DesignPoint> + 'a {
    space.iter().filter(move |p| filter.is_none_or(|f| f(p)))
}

/// Draws `n` points uniformly (with replacement) from `space`.
pub fn sample_space(space: &Space, n: usize, seed: u64) -> Result<Vec<DesignPoint>> {
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".to_string()));
    }
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sample_one(space, &mut rng)).collect())
}

pub(crate) fn sample_one(space: &Space, rng: &mut impl Rng) -> DesignPoint {
    let radices = space.radices();
    let mut idx = [0usize; 11];
    for (slot, &r) in idx.iter_mut().zip(radices.iter()) {
        *slot = rng.gen_range(0..r);
    }
    space.point_at(&idx)
}

impl Space {
    /// Indices of `point`'s field values within this space, most significant
    /// first, or `None` when the point lies outside it.
    pub(crate) fn indices_of(&self, point: &DesignPoint) -> Option<[usize; 11]> {
        let m = point.macro_cfg();
        let a = point.array();
        Some([
            self.cores.iter().position(|&v| v == a.cores)?,
            self.tl.iter().position(|&v| v == a.tl)?,
            self.dataflow.iter().position(|&v| v == a.dataflow)?,
            self.interconnect.iter().position(|&v| v == a.interconnect)?,
            self.br.iter().position(|&v| v == a.br)?,
            self.bc.iter().position(|&v| v == a.bc)?,
            self.al.iter().position(|&v| v == m.al)?,
            self.lsl.iter().position(|&v| v == m.lsl)?,
            self.pc.iter().position(|&v| v == m.pc)?,
            self.pl.iter().position(|&v| v == m.pl)?,
            self.ol.iter().position(|&v| v == m.ol)?,
        ])
    }

    pub(crate) fn point_from_indices(&self, idx: &[usize; 11]) -> DesignPoint {
        self.point_at(idx)
    }

    pub(crate) fn index_radices(&self) -> [usize; 11] {
        self.radices()
    }
}
