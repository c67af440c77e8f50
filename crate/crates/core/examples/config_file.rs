//! Loading a run from the plain-text configuration format.

use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::convergence_study;
use wg_control::problems::parse_config;

const CONFIG: &str = "
# example 3 towards its alpha -> infinity limit
example = 3
alpha = 1e6
levels = 1..3
degree_k = 3
reference = limit
";

fn main() -> wg_control::Result<()> {
    let config = parse_config(CONFIG)?;
    let k = config.degree_k.unwrap_or(3);
    let space = match config.degree_r {
        Some(r) => SpaceConfig::new(k, r)?,
        None => SpaceConfig::with_default_r(k)?,
    };
    let (lo, hi) = config.levels.unwrap_or((1, 3));
    let levels: Vec<u32> = (lo..=hi).collect();
    let table = convergence_study(&config.problem, space, &levels)?;
    for row in &table.rows {
        println!(
            "level {}: energy {:.3e}, l2 {:.3e}",
            row.report.level, row.report.energy_error, row.report.l2_error
        );
    }

    match parse_config("example = 1\nalpha = -2\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
