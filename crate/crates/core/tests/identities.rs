use std::time::Instant;

use tfbounds_core::identities::verify_identities;

#[test]
fn identity_suites_pass_on_the_standard_grid() {
    let start = Instant::now();
    let checks = verify_identities(7).unwrap();
    for c in &checks {
        println!("{:<40} {:>12.3e} <= {:.0e} {}", c.name, c.value, c.tolerance, if c.pass { "ok" } else { "FAIL" });
    }
    println!("elapsed {:.2?}", start.elapsed());
    assert!(checks.iter().all(|c| c.pass));
}
