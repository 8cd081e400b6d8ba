//! One line per acceptance criterion. Bounds are pinned here rather than
//! taken from `SuiteConfig::default()` so a change of defaults cannot
//! silently weaken the test. Runs without the libtest harness so the lines
//! are printed even when everything passes.

use lsc_core::suite::{run_suite, SuiteConfig, SuiteName};

const BOUNDS: SuiteConfig = SuiteConfig {
    // criteria 1, 2 (net side) and 8: every term of size <= 8
    static_max: 8,
    // criteria 2 (closure oracle side) and 3
    quotient_max: 7,
    // criteria 4 and 5
    dynamic_max: 7,
    // criterion 6
    bisim_max: 7,
    // criterion 7: closed terms of size <= 7, plus the numeral programs
    normal_form_max: 7,
    fuel: 2000,
};

fn main() {
    let reports = run_suite(SuiteName::All, &BOUNDS);
    let ids: Vec<u8> = reports.iter().map(|r| r.id).collect();
    assert_eq!(ids, (1..=8).collect::<Vec<u8>>());
    for r in &reports {
        println!("{r}");
        for c in r.counterexamples.iter().take(3) {
            println!("    {c}");
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria pass", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
