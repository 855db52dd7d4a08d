//! Run configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mood::{MoodMode, MoodSettings};
use crate::problems::ProblemId;
use crate::stencil::Delta;

pub const CONFIG_KEYS: [&str; 11] = [
    "problem",
    "space_order",
    "delta",
    "time_order",
    "cfl",
    "epsilon",
    "dec_iterations",
    "mood",
    "final_time",
    "n_nodes",
    "speed_safety",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub space_order: usize,
    pub delta: Delta,
    pub time_order: usize,
    pub cfl: f64,
    pub epsilon: f64,
    pub dec_iterations: usize,
    pub mood: MoodMode,
    /// Also test the velocity in the Euler extrema criteria.
    pub mood_velocity: bool,
    pub final_time: f64,
    pub n_nodes: usize,
    pub speed_safety: f64,
}

/// DEC sweeps used when none are given.
pub fn default_iterations(time_order: usize) -> usize {
    match time_order {
        1 => 1,
        2 => 3,
        _ => 4,
    }
}

impl RunConfig {
    /// Defaults for a problem at a given order in space and time.
    pub fn new(problem: ProblemId, order: usize) -> Result<Self> {
        let delta = Delta::for_order(order)?;
        Ok(Self {
            problem,
            space_order: order,
            delta,
            time_order: order,
            cfl: 1.0,
            epsilon: 0.0,
            dec_iterations: default_iterations(order),
            mood: MoodMode::Off,
            mood_velocity: false,
            final_time: problem.spec().default_final_time,
            n_nodes: 100,
            speed_safety: 1.01,
        })
    }

    pub fn mood_settings(&self) -> MoodSettings {
        MoodSettings { mode: self.mood, check_velocity: self.mood_velocity, tolerance: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.space_order) {
            return Err(Error::Config(format!("space_order must be 1, 2 or 3, got {}", self.space_order)));
        }
        if !(1..=3).contains(&self.time_order) {
            return Err(Error::Config(format!("time_order must be 1, 2 or 3, got {}", self.time_order)));
        }
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return Err(Error::Config(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if self.dec_iterations == 0 {
            return Err(Error::Config("dec_iterations must be positive".into()));
        }
        if !(self.final_time >= 0.0) || !self.final_time.is_finite() {
            return Err(Error::Config(format!("final_time must be non-negative, got {}", self.final_time)));
        }
        if self.n_nodes == 0 {
            return Err(Error::Config("n_nodes must be positive".into()));
        }
        if !(self.speed_safety >= 1.0) || !self.speed_safety.is_finite() {
            return Err(Error::Config(format!("speed_safety must be at least 1, got {}", self.speed_safety)));
        }
        Ok(())
    }

    /// Parses the flat config format. `problem` is required; every other key falls back
    /// to the defaults of [`RunConfig::new`], with `space_order` choosing the default
    /// delta and time order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim().to_string();
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if pairs.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
            pairs.push((k, v.trim().to_string()));
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let problem: ProblemId =
            get("problem").ok_or_else(|| Error::Config("missing key 'problem'".into()))?.parse()?;
        let order = get("space_order").map(|v| parse_num::<usize>("space_order", v)).transpose()?.unwrap_or(2);
        let mut cfg = Self::new(problem, order)?;
        if let Some(v) = get("delta") {
            cfg.delta = v.parse()?;
        }
        if let Some(v) = get("time_order") {
            cfg.time_order = parse_num("time_order", v)?;
            cfg.dec_iterations = default_iterations(cfg.time_order);
        }
        if let Some(v) = get("cfl") {
            cfg.cfl = parse_num("cfl", v)?;
        }
        if let Some(v) = get("epsilon") {
            cfg.epsilon = parse_num("epsilon", v)?;
        }
        if let Some(v) = get("dec_iterations") {
            cfg.dec_iterations = parse_num("dec_iterations", v)?;
        }
        if let Some(v) = get("mood") {
            cfg.mood = v.parse()?;
        }
        if let Some(v) = get("final_time") {
            cfg.final_time = parse_num("final_time", v)?;
        }
        if let Some(v) = get("n_nodes") {
            cfg.n_nodes = parse_num("n_nodes", v)?;
        }
        if let Some(v) = get("speed_safety") {
            cfg.speed_safety = parse_num("speed_safety", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Round-trips through [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem);
        let _ = writeln!(s, "space_order = {}", self.space_order);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "time_order = {}", self.time_order);
        let _ = writeln!(s, "cfl = {}", self.cfl);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "dec_iterations = {}", self.dec_iterations);
        let _ = writeln!(s, "mood = {}", self.mood);
        let _ = writeln!(s, "final_time = {}", self.final_time);
        let _ = writeln!(s, "n_nodes = {}", self.n_nodes);
        let _ = writeln!(s, "speed_safety = {}", self.speed_safety);
        s
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_by_order() {
        let c = RunConfig::new(ProblemId::Advection, 3).unwrap();
        assert_eq!((c.delta, c.dec_iterations, c.cfl, c.speed_safety), (Delta::D32, 4, 1.0, 1.01));
        assert_eq!(RunConfig::new(ProblemId::Advection, 1).unwrap().dec_iterations, 1);
        assert_eq!(RunConfig::new(ProblemId::Burgers, 2).unwrap().dec_iterations, 3);
    }

    #[test]
    fn parse_round_trip() {
        let mut c = RunConfig::new(ProblemId::EulerSod, 3).unwrap();
        c.delta = Delta::D31;
        c.mood = MoodMode::NanOnly;
        c.n_nodes = 200;
        c.epsilon = 1e-6;
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parse_partial_file() {
        let c = RunConfig::parse("# comment\nproblem = burgers\nspace_order = 3\nmood = full  # inline\n").unwrap();
        assert_eq!(c.problem, ProblemId::Burgers);
        assert_eq!(c.delta, Delta::D32);
        assert_eq!(c.mood, MoodMode::Full);
        assert_eq!(c.final_time, 0.5);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(RunConfig::parse("problem = burgers\nfoo = 1\n").is_err());
        assert!(RunConfig::parse("problem = burgers\ncfl = fast\n").is_err());
        assert!(RunConfig::parse("problem = burgers\ncfl = -1\n").is_err());
        assert!(RunConfig::parse("space_order = 2\n").is_err());
        assert!(RunConfig::parse("problem = burgers\nproblem = advection\n").is_err());
    }
}
