// Bottleneck distance between the loop diagrams of a square before and
// after its weights change.

use weighted_persistence::{
    bottleneck_distance, build_linear_rips, compute_diagram, FiltrationParams, PointCloud, Result,
};

pub fn run_example() -> Result<Vec<(usize, f64)>> {
    let square = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ];
    let a = PointCloud::unweighted(square.clone())?;
    let b = PointCloud::new(square, vec![1.0, 1.1, 0.9, 1.0])?;
    let params = FiltrationParams::new(2, f64::INFINITY);
    let da = compute_diagram(&build_linear_rips(&a, &params)?)?;
    let db = compute_diagram(&build_linear_rips(&b, &params)?)?;
    Ok((0..=1)
        .map(|dim| (dim, bottleneck_distance(&da, &db, dim)))
        .collect())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    for (dim, d) in run_example()? {
        println!("H{dim}\t{d}");
    }
    Ok(())
}
