//! Runs every example end to end.

#[path = "../examples/commuting_control.rs"]
mod commuting_control;
#[path = "../examples/config_driven.rs"]
mod config_driven;
#[path = "../examples/kraus_collapse.rs"]
mod kraus_collapse;
#[path = "../examples/qubit_sequential.rs"]
mod qubit_sequential;
#[path = "../examples/sampling_crosscheck.rs"]
mod sampling_crosscheck;
#[path = "../examples/sinc_washout.rs"]
mod sinc_washout;
#[path = "../examples/strong_limit.rs"]
mod strong_limit;
#[path = "../examples/weak_expansion.rs"]
mod weak_expansion;

#[test]
fn commuting_control_runs() {
    commuting_control::run_example().unwrap();
}

#[test]
fn config_driven_runs() {
    config_driven::run_example().unwrap();
}

#[test]
fn kraus_collapse_runs() {
    kraus_collapse::run_example().unwrap();
}

#[test]
fn qubit_sequential_runs() {
    qubit_sequential::run_example().unwrap();
}

#[test]
fn sampling_crosscheck_runs() {
    sampling_crosscheck::run_example().unwrap();
}

#[test]
fn sinc_washout_runs() {
    sinc_washout::run_example().unwrap();
}

#[test]
fn strong_limit_runs() {
    strong_limit::run_example().unwrap();
}

#[test]
fn weak_expansion_runs() {
    weak_expansion::run_example().unwrap();
}
