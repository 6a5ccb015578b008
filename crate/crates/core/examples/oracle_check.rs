//! Grid oracle self-checks against the closed forms.
//!
//! cargo run --release --example oracle_check [N]

use popper_sim::experiments::fidelity_checks;

fn main() -> popper_sim::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2048);
    for c in fidelity_checks(n)? {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        println!("{mark} {:<38} {:>11.3e}  (tol {:.0e})", c.name, c.value, c.tolerance);
    }
    Ok(())
}
