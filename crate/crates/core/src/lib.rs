pub mod config;
pub mod dec;
pub mod error;
pub mod goldens;
pub mod grid;
pub mod harness;
pub mod mood;
pub mod output;
pub mod problems;
pub mod riemann;
pub mod stability;
pub mod stencil;
pub mod time_scheme;
pub mod waves;

pub use config::RunConfig;
pub use dec::{Solver, SpeedPolicy, StepSettings};
pub use error::{Error, Result};
pub use grid::{Boundary, Grid, KineticField, SolutionField};
pub use mood::{MoodMode, MoodSettings};
pub use stencil::{Delta, Stencil, StencilOperator};
pub use time_scheme::TimeScheme;
pub use waves::{EulerState, Law, WaveKind, WaveModel};
pub use harness::{error_norms, run, run_convergence, ErrorNorms};
pub use problems::{ProblemId, ProblemSpec};
