//! Small seeded suites for every harness macro at word size 32, and the
//! 16-bit ones that fit.

use bbj_core::harness::{run_suite, selftest, SelftestOptions, MACROS};
use bbj_core::WordSpec;

#[test]
fn every_macro_at_word_size_32() {
    for name in MACROS {
        let cases = if matches!(*name, "div" | "prn") { 5 } else { 20 };
        let r = run_suite(name, WordSpec::new(32).unwrap(), 11, cases).unwrap();
        assert!(r.passed(), "{r}: {}", r.failures[0]);
    }
}

#[test]
fn selftest_reports_one_result_per_suite() {
    let opts = SelftestOptions {
        macros: vec!["add".into(), "div".into()],
        word_sizes: vec![16],
        seed: 2,
        cases: Some(5),
    };
    let r = selftest(&opts);
    assert_eq!(r.len(), 2);
    assert!(r[0].as_ref().unwrap().passed());
    // div does not fit 16-bit addresses.
    assert!(r[1].is_err());
}
