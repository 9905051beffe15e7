//! Parameter grids written as `start:stop:count:log|lin`.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn single(x: f64) -> Self {
        Self { start: x, stop: x, count: 1, spacing: Spacing::Lin }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Lin => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            bail!("grid `{s}` must look like start:stop:count:log|lin");
        }
        let num = |p: &str, what: &str| p.trim().parse::<f64>().with_context(|| format!("grid {what} `{p}` is not a number"));
        let start = num(parts[0], "start")?;
        let stop = num(parts[1], "stop")?;
        let count: usize = parts[2].trim().parse().with_context(|| format!("grid count `{}` is not a positive integer", parts[2]))?;
        let spacing = match parts[3].trim() {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            o => bail!("grid spacing `{o}` must be `log` or `lin`"),
        };
        if count == 0 {
            bail!("grid count must be at least 1");
        }
        if count > 1 && !(start < stop) {
            bail!("grid start {start} must be below stop {stop}");
        }
        if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
            bail!("log grid needs positive endpoints, got {start} and {stop}");
        }
        Ok(Self { start, stop, count, spacing })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Lin => "lin",
            Spacing::Log => "log",
        };
        write!(f, "{}:{}:{}:{sp}", self.start, self.stop, self.count)
    }
}
