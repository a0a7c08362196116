// Weighted Rips filtration of four points where one heavy point swallows
// its neighbours early.

use weighted_persistence::io::filtration_to_string;
use weighted_persistence::{build_linear_rips, FiltrationParams, PointCloud, Result};

pub fn run_example() -> Result<String> {
    let cloud = PointCloud::new(
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ],
        vec![3.0, 1.0, 1.0, 1.0],
    )?;
    let filt = build_linear_rips(&cloud, &FiltrationParams::new(2, f64::INFINITY))?;
    Ok(filtration_to_string(&filt))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
