use kinetic::{run, MoodMode, ProblemId, RunConfig};

/// Frozen from a reference run; any change to the limiter chain moves it.
const BURGERS_O3_FLAGGED: usize = 287;
const BURGERS_O3_STEPS: usize = 76;

#[test]
fn burgers_limiter_flag_count() {
    let mut cfg = RunConfig::new(ProblemId::Burgers, 3).unwrap();
    cfg.mood = MoodMode::Full;
    cfg.final_time = 0.5;
    let out = run(&cfg).unwrap();
    assert_eq!(out.summary.steps, BURGERS_O3_STEPS);
    assert_eq!(out.summary.flagged_elements, BURGERS_O3_FLAGGED);
}
