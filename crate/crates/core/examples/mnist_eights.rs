// Eight detection on a few synthetic digits, weighted against unweighted.
//
// With a digits CSV path as the first argument the first 200 rows of that
// file are used instead.

use weighted_persistence::mnist::{
    confusion_table, evaluate, load_digits_csv, metrics_table, EvalConfig, LabeledImage, Mode, SIDE,
};
use weighted_persistence::Result;

/// A ring (label 0) or two stacked rings (label 8) with a soft edge.
fn synthetic(label: u8, shift: f64) -> Result<LabeledImage> {
    let centres: &[(f64, f64, f64)] = if label == 8 {
        &[(8.5, 13.5, 5.0), (19.0, 13.5, 5.5)]
    } else {
        &[(13.5, 13.5, 8.0)]
    };
    let mut pixels = vec![0u8; SIDE * SIDE];
    for row in 0..SIDE {
        for col in 0..SIDE {
            let mut v: f64 = 0.0;
            for &(cr, cc, radius) in centres {
                let d = ((row as f64 - cr).powi(2) + (col as f64 - cc - shift).powi(2)).sqrt();
                v = v.max(1.0 - ((d - radius).abs() / 1.5));
            }
            pixels[row * SIDE + col] = (v.max(0.0) * 255.0) as u8;
        }
    }
    LabeledImage::new(label, pixels)
}

pub fn run_example(path: Option<&str>) -> Result<String> {
    let images = match path {
        Some(p) => load_digits_csv(p)?.into_iter().take(200).collect(),
        None => {
            let mut v = Vec::new();
            for (k, shift) in [-1.0, 0.0, 1.0].into_iter().enumerate() {
                v.push(synthetic(if k == 1 { 8 } else { 0 }, shift)?);
                v.push(synthetic(8, shift)?);
            }
            v
        }
    };
    let config = EvalConfig::default();
    let weighted = evaluate(&images, Mode::Weighted, &config)?;
    let unweighted = evaluate(&images, Mode::Unweighted, &config)?;
    let mut out = format!("weighted\n{}", confusion_table(&weighted.confusion));
    out.push_str(&format!(
        "unweighted\n{}\n",
        confusion_table(&unweighted.confusion)
    ));
    out.push_str(&metrics_table(&[
        ("weighted", &weighted.confusion),
        ("unweighted", &unweighted.confusion),
    ]));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let path = std::env::args().nth(1);
    print!("{}", run_example(path.as_deref())?);
    Ok(())
}
