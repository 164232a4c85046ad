//! Parametric power, performance and area model.
//!
//! Every coefficient comes from a calibration file; the shipped defaults live
//! in `data/default_calibration.toml`. Dynamic energy is charged per event
//! using the counters of a [`SimResult`].

use crate::design_space::{DesignPoint, Interconnect};
use crate::error::{Error, Result};
use crate::macro_model::macro_timing;
use crate::scheduler::SimResult;

const DEFAULT_CALIBRATION: &str = include_str!("../data/default_calibration.toml");

/// Calibration keys in file order.
pub const CALIBRATION_KEYS: [&str; 17] = [
    "f0",
    "alpha_f",
    "beta_PL",
    "c0",
    "e_mac",
    "e_write",
    "e_xfer_bcast",
    "e_xfer_syst",
    "p_static_per_mult",
    "ol_energy_penalty",
    "ol_area_penalty",
    "a_mult",
    "a_macro_fixed",
    "gamma_bcast",
    "gamma_syst",
    "delta_bcast",
    "delta_syst",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Frequency of a `c0`-multiplier macro with no pipelining, Hz.
    pub f0: f64,
    pub alpha_f: f64,
    pub beta_pl: f64,
    pub c0: f64,
    pub e_mac: f64,
    /// Per weight bit written.
    pub e_write: f64,
    /// Per element moved over a broadcast network.
    pub e_xfer_bcast: f64,
    /// Per element moved over a neighbour link.
    pub e_xfer_syst: f64,
    pub p_static_per_mult: f64,
    /// Fractional energy-efficiency loss of overlap-capable macros.
    pub ol_energy_penalty: f64,
    pub ol_area_penalty: f64,
    pub a_mult: f64,
    pub a_macro_fixed: f64,
    pub gamma_bcast: f64,
    pub gamma_syst: f64,
    pub delta_bcast: f64,
    pub delta_syst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    File,
    Default,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Origin::File => "file",
            Origin::Default => "default",
        })
    }
}

/// Where each calibration key's value came from, in [`CALIBRATION_KEYS`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance(pub Vec<(&'static str, Origin)>);

impl Provenance {
    pub fn defaulted(&self) -> Vec<&'static str> {
        self.0
            .iter()
            .filter(|(_, o)| *o == Origin::Default)
            .map(|(k, _)| *k)
            .collect()
    }
}

impl Calibration {
    /// The shipped default calibration.
    pub fn defaults() -> Calibration {
        load_calibration(DEFAULT_CALIBRATION, "default_calibration.toml", true)
            .expect("shipped calibration is valid")
            .0
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "f0" => self.f0,
            "alpha_f" => self.alpha_f,
            "beta_PL" => self.beta_pl,
            "c0" => self.c0,
            "e_mac" => self.e_mac,
            "e_write" => self.e_write,
            "e_xfer_bcast" => self.e_xfer_bcast,
            "e_xfer_syst" => self.e_xfer_syst,
            "p_static_per_mult" => self.p_static_per_mult,
            "ol_energy_penalty" => self.ol_energy_penalty,
            "ol_area_penalty" => self.ol_area_penalty,
            "a_mult" => self.a_mult,
            "a_macro_fixed" => self.a_macro_fixed,
            "gamma_bcast" => self.gamma_bcast,
            "gamma_syst" => self.gamma_syst,
            "delta_bcast" => self.delta_bcast,
            "delta_syst" => self.delta_syst,
            _ => return None,
        })
    }

    fn slot(&mut self, key: &str) -> &mut f64 {
        match key {
            "f0" => &mut self.f0,
            "alpha_f" => &mut self.alpha_f,
            "beta_PL" => &mut self.beta_pl,
            "c0" => &mut self.c0,
            "e_mac" => &mut self.e_mac,
            "e_write" => &mut self.e_write,
            "e_xfer_bcast" => &mut self.e_xfer_bcast,
            "e_xfer_syst" => &mut self.e_xfer_syst,
            "p_static_per_mult" => &mut self.p_static_per_mult,
            "ol_energy_penalty" => &mut self.ol_energy_penalty,
            "ol_area_penalty" => &mut self.ol_area_penalty,
            "a_mult" => &mut self.a_mult,
            "a_macro_fixed" => &mut self.a_macro_fixed,
            "gamma_bcast" => &mut self.gamma_bcast,
            "gamma_syst" => &mut self.gamma_syst,
            "delta_bcast" => &mut self.delta_bcast,
            "delta_syst" => &mut self.delta_syst,
            _ => unreachable!("key list and fields out of sync"),
        }
    }

    /// Checks the coefficient invariants.
    pub fn check(&self) -> Result<()> {
        const POSITIVE: [&str; 12] = [
            "f0",
            "alpha_f",
            "c0",
            "e_mac",
            "e_write",
            "e_xfer_bcast",
            "e_xfer_syst",
            "p_static_per_mult",
            "a_mult",
            "a_macro_fixed",
            "delta_bcast",
            "delta_syst",
        ];
        for key in CALIBRATION_KEYS {
            let v = self.get(key).unwrap();
            if !v.is_finite() {
                return Err(Error::Calibration(format!("{key} must be finite (got {v})")));
            }
            if POSITIVE.contains(&key) {
                if v <= 0.0 {
                    return Err(Error::Calibration(format!("{key} must be positive (got {v})")));
                }
            } else if v < 0.0 {
                return Err(Error::Calibration(format!("{key} must be non-negative (got {v})")));
            }
        }
        if self.ol_energy_penalty >= 1.0 {
            return Err(Error::Calibration(format!(
                "ol_energy_penalty must be below 1 (got {})",
                self.ol_energy_penalty
            )));
        }
        if self.delta_bcast <= self.delta_syst {
            return Err(Error::Calibration(format!(
                "delta_bcast must exceed delta_syst (got {} <= {})",
                self.delta_bcast, self.delta_syst
            )));
        }
        Ok(())
    }

    pub fn gamma(&self, ic: Interconnect) -> f64 {
        match ic {
            Interconnect::Broadcast => self.gamma_bcast,
            Interconnect::Systolic => self.gamma_syst,
        }
    }

    pub fn delta(&self, ic: Interconnect) -> f64 {
        match ic {
            Interconnect::Broadcast => self.delta_bcast,
            Interconnect::Systolic => self.delta_syst,
        }
    }

    pub fn e_xfer(&self, ic: Interconnect) -> f64 {
        match ic {
            Interconnect::Broadcast => self.e_xfer_bcast,
            Interconnect::Systolic => self.e_xfer_syst,
        }
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration::defaults()
    }
}

/// Parses a flat `key = number` document.
///
/// Missing keys fall back to the shipped defaults unless `strict` is set, in
/// which case they are an error.
pub fn load_calibration(text: &str, source_name: &str, strict: bool) -> Result<(Calibration, Provenance)> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::parse(source_name, e.to_string().trim_end().to_string())
    })?;
    for key in doc.keys() {
        if !CALIBRATION_KEYS.contains(&key.as_str()) {
            return Err(Error::parse(source_name, format!("unknown calibration key `{key}`")));
        }
    }
    let defaults = if text == DEFAULT_CALIBRATION {
        None
    } else {
        Some(Calibration::defaults())
    };
    let mut cal = Calibration {
        f0: 0.0,
        alpha_f: 0.0,
        beta_pl: 0.0,
        c0: 0.0,
        e_mac: 0.0,
        e_write: 0.0,
        e_xfer_bcast: 0.0,
        e_xfer_syst: 0.0,
        p_static_per_mult: 0.0,
        ol_energy_penalty: 0.0,
        ol_area_penalty: 0.0,
        a_mult: 0.0,
        a_macro_fixed: 0.0,
        gamma_bcast: 0.0,
        gamma_syst: 0.0,
        delta_bcast: 0.0,
        delta_syst: 0.0,
    };
    let mut provenance = Vec::with_capacity(CALIBRATION_KEYS.len());
    for key in CALIBRATION_KEYS {
        let (value, origin) = match doc.get(key) {
            Some(toml::Value::Float(v)) => (*v, Origin::File),
            Some(toml::Value::Integer(v)) => (*v as f64, Origin::File),
            Some(other) => {
                return Err(Error::parse(
                    source_name,
                    format!("`{key}` must be a number (got {})", other.type_str()),
                ))
            }
            None if strict => {
                return Err(Error::Calibration(format!("missing key `{key}` in {source_name}")))
            }
            None => match &defaults {
                Some(d) => (d.get(key).unwrap(), Origin::Default),
                None => unreachable!("shipped calibration defines every key"),
            },
        };
        *cal.slot(key) = value;
        provenance.push((key, origin));
    }
    cal.check()?;
    Ok((cal, Provenance(provenance)))
}

/// Clock frequency in Hz; depends only on the macro.
pub fn frequency(point: &DesignPoint, cal: &Calibration) -> f64 {
    let c = point.macro_cfg().multipliers() as f64;
    let pl = point.macro_cfg().pl as f64;
    cal.f0 * (c / cal.c0).powf(-cal.alpha_f) * (1.0 + cal.beta_pl * pl)
}

/// Peak MAC rate of the whole design, MACs per second.
pub fn peak_throughput(point: &DesignPoint, cal: &Calibration) -> f64 {
    let a = point.array();
    let per_macro = macro_timing(point).peak_macs_per_cycle;
    (a.br as f64) * (a.bc as f64) * (a.cores as f64) * per_macro * frequency(point, cal)
}

/// Single-macro area in mm^2.
pub fn macro_area(point: &DesignPoint, cal: &Calibration) -> f64 {
    let m = point.macro_cfg();
    let ol = if m.ol { cal.ol_area_penalty } else { 0.0 };
    cal.a_macro_fixed + cal.a_mult * m.multipliers() as f64 * (1.0 + ol)
}

/// Array integration area as a fraction of total macro area.
pub fn integration_area_fraction(ic: Interconnect, macros: u32, cal: &Calibration) -> f64 {
    cal.gamma(ic) * (macros as f64).powf(cal.delta(ic))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpaEstimate {
    pub latency_s: f64,
    pub power_w: f64,
    pub area_mm2: f64,
    /// `latency_s^2 * power_w * area_mm2`.
    pub objective: f64,
    pub frequency_hz: f64,
    pub cycles: u64,
    pub static_power_w: f64,
    /// Macro-internal dynamic power: MACs and weight writes.
    pub macro_power_w: f64,
    /// Interconnect transfers between macros and array edges.
    pub integration_power_w: f64,
    pub macro_area_mm2: f64,
    pub integration_area_mm2: f64,
}

impl PpaEstimate {
    pub fn energy_j(&self) -> f64 {
        self.power_w * self.latency_s
    }

    pub fn integration_power_fraction(&self) -> f64 {
        self.integration_power_w / self.power_w
    }

    /// Operations (two per MAC) per joule.
    pub fn ops_per_joule(&self, macs: u128) -> f64 {
        2.0 * macs as f64 / self.energy_j()
    }

    /// Operations per second per mm^2.
    pub fn ops_per_second_mm2(&self, macs: u128) -> f64 {
        2.0 * macs as f64 / self.latency_s / self.area_mm2
    }
}

pub fn objective(latency_s: f64, power_w: f64, area_mm2: f64) -> f64 {
    latency_s * latency_s * power_w * area_mm2
}

/// Turns a simulation of `point` into latency, power and area.
pub fn estimate(point: &DesignPoint, sim: &SimResult, cal: &Calibration) -> Result<PpaEstimate> {
    if sim.total_cycles == 0 {
        return Err(Error::Degenerate("simulation reported zero cycles".to_string()));
    }
    let m = point.macro_cfg();
    let a = point.array();
    let f = frequency(point, cal);
    let latency = sim.total_cycles as f64 / f;

    let macros = a.br as f64 * a.bc as f64 * a.cores as f64;
    let mults = m.multipliers() as f64;
    let (energy_scale, leak_scale) = if m.ol {
        (1.0 / (1.0 - cal.ol_energy_penalty), 1.0 + cal.ol_area_penalty)
    } else {
        (1.0, 1.0)
    };
    let static_power = cal.p_static_per_mult * mults * macros * leak_scale;
    let bits_written = sim.weight_rows_written as f64 * m.pc as f64 * m.wbw as f64;
    let macro_energy = energy_scale * (cal.e_mac * sim.macs_executed as f64 + cal.e_write * bits_written);
    let transfers = (sim.activation_transfers + sim.weight_transfers + sim.output_transfers) as f64;
    let integration_energy = energy_scale * cal.e_xfer(a.interconnect) * transfers;
    let macro_power = macro_energy / latency;
    let integration_power = integration_energy / latency;
    let power = static_power + macro_power + integration_power;

    let macro_area_total = macros * macro_area(point, cal);
    let integration_area = macro_area_total * integration_area_fraction(a.interconnect, a.br * a.bc, cal);
    let area = macro_area_total + integration_area;

    Ok(PpaEstimate {
        latency_s: latency,
        power_w: power,
        area_mm2: area,
        objective: objective(latency, power, area),
        frequency_hz: f,
        cycles: sim.total_cycles,
        static_power_w: static_power,
        macro_power_w: macro_power,
        integration_power_w: integration_power,
        macro_area_mm2: macro_area_total,
        integration_area_mm2: integration_area,
    })
}
