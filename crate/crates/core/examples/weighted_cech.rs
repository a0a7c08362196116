// Čech scales against Rips scales on an obtuse and an equilateral triangle.

use weighted_persistence::filtration::vr_lemma_scale;
use weighted_persistence::{
    build_linear_rips, build_weighted_cech, FiltrationParams, PointCloud, Result, Simplex,
};

pub fn run_example() -> Result<String> {
    let h = 3f64.sqrt() / 2.0;
    let shapes = [
        (
            "equilateral",
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
        ),
        (
            "obtuse",
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.2]],
        ),
    ];
    let params = FiltrationParams::new(2, f64::INFINITY);
    let triangle = Simplex::new(vec![0, 1, 2])?;
    let mut out = String::from("shape\trips\tcech\tcech_upper\n");
    for (name, points) in shapes {
        let cloud = PointCloud::unweighted(points)?;
        let rips = build_linear_rips(&cloud, &params)?
            .scale_of(&triangle)
            .unwrap_or(f64::NAN);
        let cech = build_weighted_cech(&cloud, &params)?
            .scale_of(&triangle)
            .unwrap_or(f64::NAN);
        // a triangle in VR at t' is in Čech at t, so cech <= rips / sqrt(3/4)
        let upper = rips / vr_lemma_scale(1.0, 2);
        out.push_str(&format!("{name}\t{rips:.6}\t{cech:.6}\t{upper:.6}\n"));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
