mod common;

use std::process::ExitCode;

use stitchkit::acceptance;
use stitchkit::calculus::{EllSequence, SSequence};

fn oracle(s: &SSequence<f64>) -> stitchkit::Result<EllSequence<f64>> {
    EllSequence::new_unverified(common::oracle_a(s))
}

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, _) in acceptance::CRITERIA {
        let out = acceptance::run(id, &oracle);
        println!("{}", out.timed_line());
        failed += usize::from(!out.passed);
    }
    println!("{} of {} checks passed", acceptance::CRITERIA.len() - failed, acceptance::CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
