// Barcode of a noisy weighted circle, written as TSV and SVG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weighted_persistence::io::{diagram_to_string, render_barcode_svg, SvgOptions};
use weighted_persistence::{
    build_linear_rips, compute_diagram, FiltrationParams, PointCloud, Result,
};

pub fn run_example() -> Result<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 24;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for k in 0..n {
        let a = std::f64::consts::TAU * k as f64 / n as f64;
        let r = 1.0 + rng.gen_range(-0.05..0.05);
        points.push(vec![r * a.cos(), r * a.sin()]);
        weights.push(rng.gen_range(0.8..1.2));
    }
    let cloud = PointCloud::new(points, weights)?;
    let dgm = compute_diagram(&build_linear_rips(&cloud, &FiltrationParams::new(2, 2.0))?)?;
    Ok((
        diagram_to_string(&dgm),
        render_barcode_svg(&dgm, &SvgOptions::default()),
    ))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let (tsv, svg) = run_example()?;
    print!("{tsv}");
    let path = std::env::temp_dir().join("weighted_circle.svg");
    std::fs::write(&path, svg).map_err(|source| weighted_persistence::Error::Io {
        path: path.clone(),
        source,
    })?;
    eprintln!("barcode written to {}", path.display());
    Ok(())
}
