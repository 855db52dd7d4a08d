//! Benchmark problems: laws, domains, initial data and exact solutions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, SolutionField};
use crate::riemann::{sample, star_state, Primitive};
use crate::waves::{EulerState, Law, WaveKind};

pub const GAMMA: f64 = 1.4;

pub const SOD_LEFT: Primitive = Primitive::new(1.0, 0.0, 1.0);
pub const SOD_RIGHT: Primitive = Primitive::new(0.125, 0.0, 0.1);
pub const SOD_INTERFACE: f64 = 0.5;

pub const SHU_OSHER_LEFT: Primitive = Primitive::new(3.857143, 2.629369, 10.33333);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Advection,
    Burgers,
    BuckleyLeverett,
    EulerSod,
    EulerShuOsher,
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] = [
        ProblemId::Advection,
        ProblemId::Burgers,
        ProblemId::BuckleyLeverett,
        ProblemId::EulerSod,
        ProblemId::EulerShuOsher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Advection => "advection",
            ProblemId::Burgers => "burgers",
            ProblemId::BuckleyLeverett => "buckley_leverett",
            ProblemId::EulerSod => "euler_sod",
            ProblemId::EulerShuOsher => "euler_shu_osher",
        }
    }

    pub fn spec(self) -> ProblemSpec {
        ProblemSpec::new(self)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }
}

/// How a comparison solution is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceStrategy {
    Exact,
    FirstOrderFine,
    ThirdOrderMoodFine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub law: Law,
    pub wave: WaveKind,
    pub domain: (f64, f64),
    pub boundary: Boundary,
    pub default_final_time: f64,
    pub reference: ReferenceStrategy,
    /// Fine-grid size used by the non-exact reference strategies.
    pub reference_nodes: usize,
}

impl ProblemSpec {
    pub fn new(id: ProblemId) -> Self {
        let euler = Law::Euler { gamma: GAMMA };
        let periodic = |law, t, reference, reference_nodes| ProblemSpec {
            id,
            law,
            wave: WaveKind::TwoWave,
            domain: (0.0, 1.0),
            boundary: Boundary::Periodic,
            default_final_time: t,
            reference,
            reference_nodes,
        };
        match id {
            ProblemId::Advection => periodic(Law::Advection, 0.5, ReferenceStrategy::Exact, 0),
            ProblemId::Burgers => periodic(Law::Burgers, 0.5, ReferenceStrategy::FirstOrderFine, 10_000),
            ProblemId::BuckleyLeverett => {
                periodic(Law::BuckleyLeverett, 1.0, ReferenceStrategy::FirstOrderFine, 10_000)
            }
            ProblemId::EulerSod => ProblemSpec {
                id,
                law: euler,
                wave: WaveKind::ThreeWave,
                domain: (0.0, 1.0),
                boundary: Boundary::Transmissive,
                default_final_time: 0.16,
                reference: ReferenceStrategy::Exact,
                reference_nodes: 0,
            },
            ProblemId::EulerShuOsher => ProblemSpec {
                id,
                law: euler,
                wave: WaveKind::ThreeWave,
                domain: (-5.0, 5.0),
                boundary: Boundary::Transmissive,
                default_final_time: 1.8,
                reference: ReferenceStrategy::ThirdOrderMoodFine,
                reference_nodes: 10_000,
            },
        }
    }

    pub fn components(&self) -> usize {
        self.law.components()
    }

    pub fn grid(&self, n_nodes: usize) -> Result<Grid> {
        Grid::new(n_nodes, self.domain.0, self.domain.1, self.boundary)
    }

    /// Conserved initial state at `x`.
    pub fn initial_state(&self, x: f64) -> Vec<f64> {
        let prim = |s: Primitive| EulerState::from_primitive(s.rho, s.u, s.p, GAMMA).conserved().to_vec();
        match self.id {
            ProblemId::Advection | ProblemId::Burgers | ProblemId::BuckleyLeverett => vec![smooth_ic(x)],
            ProblemId::EulerSod => prim(if x < SOD_INTERFACE { SOD_LEFT } else { SOD_RIGHT }),
            ProblemId::EulerShuOsher => prim(if x < -4.0 {
                SHU_OSHER_LEFT
            } else {
                Primitive::new(1.0 + 0.2 * (5.0 * x).sin(), 0.0, 1.0)
            }),
        }
    }

    pub fn initial(&self, grid: &Grid) -> SolutionField {
        SolutionField::from_fn(grid.clone(), self.components(), |x| self.initial_state(x))
    }

    /// Closed-form solution where one exists.
    pub fn exact(&self, grid: &Grid, t: f64) -> Result<Option<SolutionField>> {
        match self.id {
            ProblemId::Advection => {
                let (lo, hi) = self.domain;
                let len = hi - lo;
                Ok(Some(SolutionField::from_fn(grid.clone(), 1, |x| {
                    let shifted = lo + (x - t - lo).rem_euclid(len);
                    vec![smooth_ic(shifted)]
                })))
            }
            ProblemId::EulerSod => {
                if t <= 0.0 {
                    return Ok(Some(self.initial(grid)));
                }
                let star = star_state(&SOD_LEFT, &SOD_RIGHT, GAMMA)?;
                Ok(Some(SolutionField::from_fn(grid.clone(), 3, |x| {
                    let s = sample(&star, (x - SOD_INTERFACE) / t, &SOD_LEFT, &SOD_RIGHT, GAMMA);
                    EulerState::from_primitive(s.rho, s.u, s.p, GAMMA).conserved().to_vec()
                })))
            }
            _ => Ok(None),
        }
    }
}

/// `sin(2 pi x) + 0.5`.
pub fn smooth_ic(x: f64) -> f64 {
    (2.0 * PI * x).sin() + 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in ProblemId::ALL {
            assert_eq!(p.name().parse::<ProblemId>().unwrap(), p);
        }
        assert!("kelvin_helmholtz".parse::<ProblemId>().is_err());
    }

    #[test]
    fn advection_exact_at_zero_is_ic() {
        let s = ProblemId::Advection.spec();
        let g = s.grid(20).unwrap();
        assert_eq!(s.exact(&g, 0.0).unwrap().unwrap(), s.initial(&g));
    }

    #[test]
    fn advection_exact_is_periodic_in_time() {
        let s = ProblemId::Advection.spec();
        let g = s.grid(16).unwrap();
        let a = s.exact(&g, 0.25).unwrap().unwrap();
        let b = s.exact(&g, 10.25).unwrap().unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shu_osher_states() {
        let s = ProblemId::EulerShuOsher.spec();
        let left = s.initial_state(-4.5);
        assert!((left[0] - 3.857143).abs() < 1e-15);
        let right = s.initial_state(0.0);
        assert!((right[0] - 1.0).abs() < 1e-15 && right[1] == 0.0);
    }
}
