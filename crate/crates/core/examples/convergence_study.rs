//! Error table for example 1 with cubic states and linear multipliers.
//!
//! Run with `cargo run --release --example convergence_study [k] [r]`.

use wg_control::cli::table_text;
use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::convergence_study;
use wg_control::problems::example1;

fn main() -> wg_control::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let k = args.next().transpose().ok().flatten().unwrap_or(3);
    let config = match args.next().transpose().ok().flatten() {
        Some(r) => SpaceConfig::new(k, r)?,
        None => SpaceConfig::with_default_r(k)?,
    };
    let table = convergence_study(&example1(), config, &[1, 2, 3, 4])?;
    print!("{}", table_text(&table, &format!("example 1, k = {}, r = {}", config.k, config.r)));
    Ok(())
}
