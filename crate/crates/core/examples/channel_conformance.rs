//! Choi-matrix checks of every shipped decomposition.

use cutknit::cutting::conformance_report;

fn main() {
    for r in conformance_report().expect("report") {
        println!(
            "{:<28} {} max diff {:.2e}  {}",
            r.name,
            if r.passed { "ok  " } else { "diff" },
            r.max_abs_diff,
            r.note
        );
    }
}
