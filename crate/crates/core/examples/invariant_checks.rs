//! The built-in invariant suite, also available as `wgoc check`.

use wg_control::checks::{commutative_property, run_all};
use wg_control::fe_space::SpaceConfig;

fn main() -> wg_control::Result<()> {
    for r in run_all() {
        println!("{:<24} {:.3e} <= {:.0e}: {}", r.name, r.worst, r.threshold, r.passed);
    }
    let quartic = commutative_property(SpaceConfig::new(4, 2)?, 20, 1);
    println!("k = 4: {:.3e}", quartic.worst);
    Ok(())
}
