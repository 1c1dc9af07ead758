//! Game and flow parameters.
//!
//! `Desk` keeps the shape of the asymptotic choices at sizes where the
//! literal constants (c > 1000, h = 1000 c log m) would force a vanishing φ.
//! `Paper` enforces those constants and refuses φ ≥ 1/log m.

use crate::error::{input, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Paper,
    Desk,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(Mode::Paper),
            "desk" => Ok(Mode::Desk),
            _ => Err(format!("unknown mode `{s}` (expected paper or desk)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub phi: f64,
    #[serde(rename = "T")]
    pub rounds: usize,
    #[serde(rename = "Z")]
    pub z: f64,
    pub c: u64,
    pub d: u64,
    pub h: u64,
    pub mode: Mode,
    pub seed: u64,
    /// Edge count the values were derived for.
    pub m: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub rounds: Option<usize>,
    pub z: Option<f64>,
    pub c: Option<u64>,
    pub d: Option<u64>,
    pub h: Option<u64>,
}

/// User-facing configuration; resolved into [`Params`] per graph size,
/// since every recursive call of the decomposition sees a different `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub phi: f64,
    pub mode: Mode,
    pub seed: u64,
    pub overrides: Overrides,
}

impl ParamSpec {
    pub fn desk(phi: f64, seed: u64) -> Self {
        ParamSpec { phi, mode: Mode::Desk, seed, overrides: Overrides::default() }
    }

    pub fn paper(phi: f64, seed: u64) -> Self {
        ParamSpec { phi, mode: Mode::Paper, seed, overrides: Overrides::default() }
    }

    pub fn with_overrides(mut self, o: Overrides) -> Self {
        self.overrides = o;
        self
    }

    pub fn resolve(&self, m: usize) -> Result<Params> {
        self.resolve_seeded(m, self.seed)
    }

    pub fn resolve_seeded(&self, m: usize, seed: u64) -> Result<Params> {
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return input(format!("phi must lie in (0,1), got {}", self.phi));
        }
        let lg = log2m(m);
        let o = &self.overrides;
        let p = match self.mode {
            Mode::Desk => {
                let z = o.z.unwrap_or(lg.ceil());
                if !(z > 0.0) {
                    return input(format!("Z must be positive, got {z}"));
                }
                let c = o.c.unwrap_or_else(|| ((1.0 / (self.phi * z)).floor() as u64).max(2));
                let d = o.d.unwrap_or_else(|| pow2_at_least(lg));
                let h = o.h.unwrap_or_else(|| (10.0 * c as f64 * lg).ceil() as u64);
                let rounds = o.rounds.unwrap_or((lg * lg).ceil() as usize);
                log::debug!(
                    "desk params for m={m}: c={c} (paper mode needs > 1000), h={h} (paper mode: 1000 c log m)"
                );
                Params { phi: self.phi, rounds, z, c, d, h, mode: Mode::Desk, seed, m }
            }
            Mode::Paper => {
                if self.phi >= 1.0 / lg {
                    return input(format!(
                        "paper mode needs phi < 1/log m = {:.6}, got {}",
                        1.0 / lg,
                        self.phi
                    ));
                }
                let c = match (o.c, o.z) {
                    (Some(c), _) => c,
                    (None, Some(z)) => {
                        let c = 1.0 / (self.phi * z);
                        if (c - c.round()).abs() > 1e-9 {
                            return input(format!("1/(phi Z) = {c} is not an integer"));
                        }
                        c.round() as u64
                    }
                    (None, None) => (1.0 / (self.phi * lg)).floor() as u64,
                };
                if c <= 1000 {
                    return input(format!("paper mode needs c > 1000, got c = {c}"));
                }
                let z = 1.0 / (self.phi * c as f64);
                let h = (1000.0 * c as f64 * lg).ceil() as u64;
                if let Some(hh) = o.h {
                    if hh != h {
                        return input(format!("paper mode fixes h = 1000 c log m = {h}"));
                    }
                }
                let d = o.d.unwrap_or_else(|| pow2_at_least(lg));
                let rounds = o.rounds.unwrap_or((lg * lg).ceil() as usize);
                Params { phi: self.phi, rounds, z, c, d, h, mode: Mode::Paper, seed, m }
            }
        };
        p.validate()?;
        Ok(p)
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if self.c < 2 {
            return input(format!("c must be at least 2, got {}", self.c));
        }
        if self.d < 2 || !self.d.is_power_of_two() {
            return input(format!("d must be a power of two >= 2, got {}", self.d));
        }
        if self.h < 1 {
            return input("h must be at least 1");
        }
        if self.rounds < 1 {
            return input("T must be at least 1");
        }
        if self.mode == Mode::Paper && self.c <= 1000 {
            return input("paper mode needs c > 1000");
        }
        Ok(())
    }
}

/// `log2 m`, floored at 1 so tiny graphs still get sane values.
pub fn log2m(m: usize) -> f64 {
    (m.max(2) as f64).log2()
}

pub fn pow2_at_least(x: f64) -> u64 {
    let mut d = 2u64;
    while (d as f64) < x {
        d *= 2;
    }
    d
}
