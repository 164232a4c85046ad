//! Closed-form timing of a single CIM macro.

use crate::design_space::DesignPoint;
use crate::error::{Error, Result};

/// How pipeline fill/drain and other transients are accounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SimMode {
    /// Steady-state accounting: reduction fill/drain is ignored and, with
    /// overlap, each weight-row pass costs exactly `max(Tc, Ts)`.
    #[default]
    Paper,
    /// Reduction pipeline adds `PL` cycles to every pass and overlap only
    /// starts once a row's compute has drained.
    Exact,
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SimMode::Paper),
            "exact" => Ok(SimMode::Exact),
            _ => Err(Error::Argument(format!("unknown mode `{s}` (expected paper or exact)"))),
        }
    }
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimMode::Paper => "paper",
            SimMode::Exact => "exact",
        })
    }
}

/// Derived per-macro cycle quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroTiming {
    /// One activation block against one weight row.
    pub tc: u64,
    /// One weight-row update.
    pub ts: u64,
    pub block_nol: u64,
    pub block_ol: u64,
    pub fill_drain: u64,
    pub peak_macs_per_cycle: f64,
}

/// `TL * IBW / 2`: two input bit-slices are consumed per cycle.
pub fn compute_cycles(tl: u32, ibw: u32) -> Result<u64> {
    if !ibw.is_multiple_of(2) || ibw == 0 {
        return Err(Error::Argument(format!("IBW must be a positive even number (got {ibw})")));
    }
    if tl == 0 {
        return Err(Error::Argument("TL must be at least 1".to_string()));
    }
    Ok(tl as u64 * ibw as u64 / 2)
}

/// `ceil(kappa * PC * WBW)`.
pub fn weight_row_cycles(kappa: f64, pc: u32, wbw: u32) -> Result<u64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Argument(format!("kappa must be positive (got {kappa})")));
    }
    if pc == 0 || wbw == 0 {
        return Err(Error::Argument("PC and WBW must be at least 1".to_string()));
    }
    let exact = kappa * pc as f64 * wbw as f64;
    // absorb float noise so that e.g. 0.1 * 80 does not round up to 9
    let nearest = exact.round();
    let cycles = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    Ok((cycles as u64).max(1))
}

/// `LSL * (Ts + Tc)` without overlap, `LSL * max(Ts, Tc)` with it.
pub fn block_cycles(tc: u64, ts: u64, lsl: u32, overlap: bool) -> u64 {
    let per_row = if overlap { tc.max(ts) } else { tc + ts };
    lsl as u64 * per_row
}

/// Fraction of block latency removed by enabling overlap:
/// `1 - max(Ts, Tc) / (Ts + Tc)`, always in `(0, 0.5]`.
pub fn overlap_gain(tc: u64, ts: u64) -> f64 {
    1.0 - tc.max(ts) as f64 / (tc + ts) as f64
}

pub fn macro_timing(point: &DesignPoint) -> MacroTiming {
    let m = point.macro_cfg();
    let tc = compute_cycles(point.array().tl, m.ibw).expect("validated point has even IBW");
    let ts = weight_row_cycles(m.kappa, m.pc, m.wbw).expect("validated point has positive kappa");
    MacroTiming {
        tc,
        ts,
        block_nol: block_cycles(tc, ts, m.lsl, false),
        block_ol: block_cycles(tc, ts, m.lsl, true),
        fill_drain: m.pl as u64,
        peak_macs_per_cycle: (m.pc as f64 * m.al as f64) / (m.ibw as f64 / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_space::{validate, ArrayConfig, MacroConfig};

    #[test]
    fn compute_cycles_examples() {
        assert_eq!(compute_cycles(16, 8).unwrap(), 64);
        assert_eq!(compute_cycles(1, 2).unwrap(), 1);
        assert_eq!(compute_cycles(512, 8).unwrap(), 2048);
        assert!(compute_cycles(16, 7).is_err());
    }

    #[test]
    fn weight_row_cycles_examples() {
        assert_eq!(weight_row_cycles(1.0, 16, 8).unwrap(), 128);
        assert_eq!(weight_row_cycles(1.0, 2, 8).unwrap(), 16);
        assert_eq!(weight_row_cycles(0.5, 3, 8).unwrap(), 12);
        assert_eq!(weight_row_cycles(0.1, 10, 8).unwrap(), 8);
        assert_eq!(weight_row_cycles(0.3, 1, 8).unwrap(), 3);
        assert!(weight_row_cycles(0.0, 16, 8).is_err());
        assert!(weight_row_cycles(-1.0, 16, 8).is_err());
    }

    #[test]
    fn block_cycles_examples() {
        assert_eq!(block_cycles(64, 128, 2, false), 384);
        assert_eq!(block_cycles(64, 128, 2, true), 256);
        let nol = block_cycles(100, 100, 4, false);
        let ol = block_cycles(100, 100, 4, true);
        assert_eq!((nol, ol), (800, 400));
        assert_eq!(1.0 - ol as f64 / nol as f64, 0.5);
    }

    #[test]
    fn overlap_gain_examples() {
        assert_eq!(overlap_gain(77, 77), 0.5);
        assert_eq!(overlap_gain(300, 100), 0.25);
        for ts in 1..50 {
            assert!(overlap_gain(10 * ts, ts) < 0.1);
        }
    }

    #[test]
    fn overlap_bound_exhaustive() {
        for tc in 1..=256u64 {
            for ts in 1..=256u64 {
                for lsl in [2u32, 4, 8, 16, 32, 64] {
                    let ol = block_cycles(tc, ts, lsl, true);
                    let nol = block_cycles(tc, ts, lsl, false);
                    assert!(ol <= nol && nol <= 2 * ol);
                }
                let g = overlap_gain(tc, ts);
                assert!(g > 0.0 && g <= 0.5);
            }
        }
    }

    #[test]
    fn llama3_8b_table_tuple() {
        let m = MacroConfig {
            al: 256,
            lsl: 2,
            pc: 16,
            pl: 4,
            ..MacroConfig::default()
        };
        let a = ArrayConfig {
            br: 2,
            bc: 4,
            tl: 32,
            ..ArrayConfig::default()
        };
        let t = macro_timing(&validate(&m, &a).unwrap());
        assert_eq!((t.tc, t.ts, t.block_ol, t.block_nol), (128, 128, 256, 512));
        assert_eq!(t.fill_drain, 4);
    }

    #[test]
    fn minimal_macro_peak_rate_and_purity() {
        let p = validate(&MacroConfig::default(), &ArrayConfig::default()).unwrap();
        let t = macro_timing(&p);
        assert_eq!(t.peak_macs_per_cycle, 4.0);
        assert_eq!(t.fill_drain, 0);
        assert_eq!(t, macro_timing(&p));
    }
}
