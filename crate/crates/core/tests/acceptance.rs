//! One line per acceptance criterion. Tolerances come from `SuiteConfig::default()`:
//! pass 1e-8, fail floor 1e-4, eigenvalue clustering 1e-6, rank threshold 1e-8.

use curvlab::suite::{
    criterion_engine, criterion_equivalences, criterion_thm12, criterion_thm13, criterion_thm14, criterion_thm18,
    criterion_thm19, run_suite, CriterionFn, SuiteConfig,
};

fn report(f: CriterionFn) -> f64 {
    let result = f(&SuiteConfig::default());
    println!("{}", result.summary_line());
    for c in result.failed_checks().skip(1) {
        println!("       {}: {}", c.name, c.detail);
    }
    assert!(result.passed, "{}", result.summary_line());
    result.seconds
}

#[test]
fn criterion_1_split_metrics() {
    let seconds = report(criterion_thm12);
    println!("{}  1 runtime   {seconds:.2} s (limit 5 s)", if seconds < 5.0 { "PASS" } else { "FAIL" });
    assert!(seconds < 5.0);
}

#[test]
fn criterion_2_nilpotent_family() {
    report(criterion_thm13);
}

#[test]
fn criterion_3_walker_pairs() {
    report(criterion_thm14);
}

#[test]
fn criterion_4_equivalences() {
    report(criterion_equivalences);
}

#[test]
fn criterion_5_doubling() {
    report(criterion_thm18);
}

#[test]
fn criterion_6_locally_symmetric() {
    report(criterion_thm19);
}

#[test]
fn criterion_7_engine() {
    report(criterion_engine);
}

#[test]
fn full_suite_runtime() {
    let r = run_suite(&SuiteConfig::default(), None);
    let ok = r.seconds < 60.0;
    println!("{}  7 runtime   full suite {:.2} s (limit 60 s)", if ok { "PASS" } else { "FAIL" }, r.seconds);
    assert!(ok);
}
