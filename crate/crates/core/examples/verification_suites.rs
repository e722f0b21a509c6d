//! Runs a few registered suites and prints their summaries and the first record lines.

use grand_lebesgue::verifier::{registry, run_suite, SuiteConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = SuiteConfig::default().with_cases(50);
    for spec in registry() {
        println!("{:<34} {}", spec.name, spec.description);
    }
    for name in ["norm_axioms", "holder_seq", "transfer", "mult_isometry"] {
        let rep = run_suite(name, &cfg)?;
        println!("{name}: {:?}", rep.summary());
    }
    let rep = run_suite("lambert_constants", &cfg)?;
    for line in rep.to_json_lines().lines().take(3) {
        println!("{line}");
    }
    Ok(())
}
