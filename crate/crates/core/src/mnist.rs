//! Detecting handwritten eights from the dimension-1 barcode of a digit image.
//!
//! Each image becomes a point cloud, one point per lit pixel. In weighted
//! mode a pixel's ball grows at a rate proportional to its intensity; in
//! unweighted mode every ball grows at the same rate. An image is called an
//! eight when the third longest loop is less than half as long as the second
//! longest one.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filtration::{build_linear_rips, FiltrationParams};
use crate::geometry::PointCloud;
use crate::persistence::compute_diagram;

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

/// Threshold on `L3 / L2` below which an image is called an eight.
pub const EIGHT_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pub label: u8,
    /// Row-major 28x28 intensities.
    pub pixels: Vec<u8>,
}

impl LabeledImage {
    pub fn new(label: u8, pixels: Vec<u8>) -> Result<Self> {
        if label > 9 {
            return Err(Error::InvalidParameter(format!(
                "label {label} is not a digit"
            )));
        }
        if pixels.len() != PIXELS {
            return Err(Error::InvalidParameter(format!(
                "expected {PIXELS} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(LabeledImage { label, pixels })
    }

    pub fn is_eight(&self) -> bool {
        self.label == 8
    }

    /// `(row, col, intensity)` of every nonzero pixel.
    pub fn lit_pixels(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(k, &v)| (k / SIDE, k % SIDE, v))
    }
}

/// Reads the label-first 785-column CSV. A header row is recognised by a
/// non-numeric first field.
pub fn load_digits_csv(path: impl AsRef<Path>) -> Result<Vec<LabeledImage>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_digits_csv(&text, path)
}

pub fn parse_digits_csv(text: &str, origin: &Path) -> Result<Vec<LabeledImage>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut images = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(origin, idx + 1, e.to_string()))?;
        let row = record.position().map_or(idx + 1, |p| p.line() as usize);
        if idx == 0
            && record
                .get(0)
                .is_some_and(|f| f.trim().parse::<i64>().is_err())
        {
            continue;
        }
        if record.len() != PIXELS + 1 {
            return Err(Error::parse(
                origin,
                row,
                format!("expected {} fields, found {}", PIXELS + 1, record.len()),
            ));
        }
        let field = |col: usize, max: i64| -> Result<u8> {
            let raw = record[col].trim();
            let value: i64 = raw.parse().map_err(|_| {
                Error::parse(
                    origin,
                    row,
                    format!("field {}: not an integer: {raw:?}", col + 1),
                )
            })?;
            if !(0..=max).contains(&value) {
                return Err(Error::parse(
                    origin,
                    row,
                    format!("field {}: {value} outside [0, {max}]", col + 1),
                ));
            }
            Ok(value as u8)
        };
        let label = field(0, 9)?;
        let pixels = (1..=PIXELS)
            .map(|c| field(c, 255))
            .collect::<Result<Vec<u8>>>()?;
        images.push(LabeledImage { label, pixels });
    }
    Ok(images)
}

/// Label-first CSV rows without a header.
pub fn digits_to_csv(images: &[LabeledImage]) -> String {
    let mut out = String::with_capacity(images.len() * PIXELS * 2);
    for img in images {
        let _ = write!(out, "{}", img.label);
        for p in &img.pixels {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

/// Point `(row, col)` per lit pixel with weight `intensity / 255`.
pub fn image_to_weighted_cloud(img: &LabeledImage) -> PointCloud {
    let (points, weights) = img
        .lit_pixels()
        .map(|(i, j, v)| (vec![i as f64, j as f64], v as f64 / 255.0))
        .unzip();
    PointCloud::new(points, weights).expect("pixel clouds are valid")
}

/// Same points as [`image_to_weighted_cloud`], all with weight 1.
pub fn image_to_unit_cloud(img: &LabeledImage) -> PointCloud {
    let points = img
        .lit_pixels()
        .map(|(i, j, _)| vec![i as f64, j as f64])
        .collect();
    PointCloud::unweighted(points).expect("pixel clouds are valid")
}

/// Second and third longest positive-length bars and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarRatio {
    pub second: f64,
    pub third: f64,
    /// `third / second`, `None` when there is no second bar.
    pub ratio: Option<f64>,
}

pub fn bar_ratio(bars: &[(f64, f64)]) -> BarRatio {
    let mut lengths: Vec<f64> = bars
        .iter()
        .map(|(b, d)| d - b)
        .filter(|l| *l > 0.0)
        .collect();
    lengths.sort_by(|a, b| b.total_cmp(a));
    let second = lengths.get(1).copied().unwrap_or(0.0);
    let third = lengths.get(2).copied().unwrap_or(0.0);
    BarRatio {
        second,
        third,
        ratio: (second > 0.0).then(|| third / second),
    }
}

/// True when there is a second loop and `L3 / L2 < 1/2`.
pub fn classify_eight(bars: &[(f64, f64)]) -> bool {
    bar_ratio(bars).ratio.is_some_and(|r| r < EIGHT_RATIO)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Weighted,
    Unweighted,
}

impl Mode {
    pub fn cloud(&self, img: &LabeledImage) -> PointCloud {
        match self {
            Mode::Weighted => image_to_weighted_cloud(img),
            Mode::Unweighted => image_to_unit_cloud(img),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Weighted => "weighted",
            Mode::Unweighted => "unweighted",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(Mode::Weighted),
            "unweighted" => Ok(Mode::Unweighted),
            other => Err(Error::InvalidParameter(format!(
                "mode must be weighted or unweighted, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Largest filtration scale, in units of `t` with weights in `(0, 1]`.
    pub t_max: f64,
    pub max_dim: usize,
    pub simplex_cap: usize,
    /// First scale tried; the scale grows by `growth` until every loop has died.
    pub initial_scale: f64,
    pub growth: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            t_max: 10.0,
            max_dim: 2,
            simplex_cap: crate::filtration::DEFAULT_SIMPLEX_CAP,
            initial_scale: 1.0,
            growth: 1.25,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 2 {
            return Err(Error::InvalidParameter(
                "max_dim must be at least 2 so that loops can die".into(),
            ));
        }
        if !(self.t_max > 0.0) || !(self.initial_scale > 0.0) || !(self.growth > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need t_max > 0, initial_scale > 0, growth > 1 (got {}, {}, {})",
                self.t_max, self.initial_scale, self.growth
            )));
        }
        Ok(())
    }
}

/// Finite dimension-1 bars of the weighted Rips filtration of `cloud`.
///
/// Persistence pairs of a filtration prefix agree with those of the whole
/// filtration, so the scale is raised geometrically from
/// `config.initial_scale` and the search stops at the first scale where no
/// loop is still open. Loops still open at `config.t_max` are an error.
pub fn loop_bars(cloud: &PointCloud, config: &EvalConfig) -> Result<Vec<(f64, f64)>> {
    let mut scale = config.initial_scale.min(config.t_max);
    loop {
        let params = FiltrationParams {
            max_dim: config.max_dim,
            t_max: scale,
            simplex_cap: config.simplex_cap,
        };
        let diagram = compute_diagram(&build_linear_rips(cloud, &params)?)?;
        let open = diagram.in_dim(1).filter(|p| p.is_essential()).count();
        if open == 0 {
            return Ok(diagram.barcode().in_dim(1).to_vec());
        }
        if scale >= config.t_max {
            return Err(Error::InvalidParameter(format!(
                "{open} loop(s) still open at t_max = {}",
                config.t_max
            )));
        }
        scale = (scale * config.growth).min(config.t_max);
    }
}

/// 2x2 counts with rows = reference (not 8, is 8) and columns = prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, is_eight: bool, predicted_eight: bool) {
        match (is_eight, predicted_eight) {
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (true, true) => self.tp += 1,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        ConfusionMatrix {
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tp: self.tp + other.tp,
        }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            f64::NAN
        } else {
            num as f64 / den as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        Self::ratio(self.tn + self.tp, self.total())
    }

    // The summary table treats "not 8" as the positive class.

    pub fn sensitivity(&self) -> f64 {
        Self::ratio(self.tn, self.tn + self.fp)
    }

    pub fn specificity(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fn_)
    }

    pub fn positive_predictive_value(&self) -> f64 {
        Self::ratio(self.tn, self.tn + self.fn_)
    }

    pub fn negative_predictive_value(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fp)
    }

    pub fn prevalence(&self) -> f64 {
        Self::ratio(self.tn + self.fp, self.total())
    }

    pub fn balanced_accuracy(&self) -> f64 {
        (self.sensitivity() + self.specificity()) / 2.0
    }

    pub fn metrics(&self) -> [(&'static str, f64); 7] {
        [
            ("Accuracy", self.accuracy()),
            ("Sensitivity", self.sensitivity()),
            ("Specificity", self.specificity()),
            ("Pos. Pred. Value", self.positive_predictive_value()),
            ("Neg. Pred. Value", self.negative_predictive_value()),
            ("Prevalence", self.prevalence()),
            ("Balanced Accuracy", self.balanced_accuracy()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub index: usize,
    pub label: u8,
    pub ratio: BarRatio,
    pub predicted_eight: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mode: Mode,
    pub confusion: ConfusionMatrix,
    pub predictions: Vec<Prediction>,
    /// Images that could not be processed, with the reason. Not in `confusion`.
    pub failures: Vec<(usize, String)>,
}

/// Classifies every image and tallies the confusion matrix. Images are
/// processed in parallel; results are merged in dataset order.
pub fn evaluate(dataset: &[LabeledImage], mode: Mode, config: &EvalConfig) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("dataset is empty".into()));
    }
    config.validate()?;
    let outcomes: Vec<std::result::Result<Prediction, (usize, String)>> = dataset
        .par_iter()
        .enumerate()
        .map(|(index, img)| {
            let cloud = mode.cloud(img);
            match loop_bars(&cloud, config) {
                Ok(bars) => {
                    let ratio = bar_ratio(&bars);
                    Ok(Prediction {
                        index,
                        label: img.label,
                        predicted_eight: ratio.ratio.is_some_and(|r| r < EIGHT_RATIO),
                        ratio,
                    })
                }
                Err(e) => Err((index, e.to_string())),
            }
        })
        .collect();

    let mut evaluation = Evaluation {
        mode,
        confusion: ConfusionMatrix::default(),
        predictions: Vec::with_capacity(dataset.len()),
        failures: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(p) => {
                evaluation.confusion.record(p.label == 8, p.predicted_eight);
                evaluation.predictions.push(p);
            }
            Err(f) => evaluation.failures.push(f),
        }
    }
    Ok(evaluation)
}

pub fn confusion_table(cm: &ConfusionMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>18}{:>16}",
        "", "Predicted not 8", "Predicted 8"
    );
    let _ = writeln!(out, "{:<10}{:>18}{:>16}", "Not 8", cm.tn, cm.fp);
    let _ = writeln!(out, "{:<10}{:>18}{:>16}", "Is 8", cm.fn_, cm.tp);
    out
}

/// Aligned metric table for one or more labelled runs.
pub fn metrics_table(runs: &[(&str, &ConfusionMatrix)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<20}", "");
    for (name, _) in runs {
        let _ = write!(out, "{name:>14}");
    }
    out.push('\n');
    let rows: Vec<[(&str, f64); 7]> = runs.iter().map(|(_, cm)| cm.metrics()).collect();
    for k in 0..7 {
        let _ = write!(out, "{:<20}", rows.first().map_or("", |r| r[k].0));
        for r in &rows {
            let _ = write!(out, "{:>14.4}", r[k].1);
        }
        out.push('\n');
    }
    out
}

/// `mode, tn, fp, fn, tp`, then one `metric<TAB>value` row per metric.
pub fn evaluation_tsv(eval: &Evaluation) -> String {
    let cm = &eval.confusion;
    let mut out = String::new();
    let _ = writeln!(out, "mode\t{}", eval.mode.name());
    let _ = writeln!(
        out,
        "tn\t{}\nfp\t{}\nfn\t{}\ntp\t{}",
        cm.tn, cm.fp, cm.fn_, cm.tp
    );
    let _ = writeln!(out, "failures\t{}", eval.failures.len());
    for (name, value) in cm.metrics() {
        let _ = writeln!(out, "{name}\t{value:.6}");
    }
    out
}

/// `index, label, L2, L3, ratio, predicted` per image.
pub fn prediction_log(eval: &Evaluation) -> String {
    let mut out = String::from("index\tlabel\tL2\tL3\tratio\tpredicted\n");
    for p in &eval.predictions {
        let ratio = p.ratio.ratio.map_or("nan".to_string(), |r| format!("{r}"));
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            p.index,
            p.label,
            p.ratio.second,
            p.ratio.third,
            ratio,
            u8::from(p.predicted_eight)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn here() -> &'static Path {
        Path::new("<test>")
    }

    fn blank(label: u8) -> LabeledImage {
        LabeledImage::new(label, vec![0; PIXELS]).unwrap()
    }

    fn row(label: u8, pixels: &[u8]) -> String {
        let mut s = label.to_string();
        for p in pixels {
            s.push(',');
            s.push_str(&p.to_string());
        }
        s
    }

    /// Two stacked square rings sharing a middle bar, like a blocky 8.
    fn blocky_eight(intensity: u8) -> LabeledImage {
        let mut px = vec![0u8; PIXELS];
        let mut set = |i: usize, j: usize| px[i * SIDE + j] = intensity;
        for j in 8..=18 {
            set(4, j);
            set(14, j);
            set(24, j);
        }
        for i in 4..=24 {
            set(i, 8);
            set(i, 18);
        }
        LabeledImage::new(8, px).unwrap()
    }

    #[test]
    fn parses_blank_eight_and_skips_header() {
        let header = format!(
            "label,{}",
            (0..PIXELS)
                .map(|k| format!("pixel{k}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        let text = format!("{header}\n{}\n", row(8, &[0; PIXELS]));
        let images = parse_digits_csv(&text, here()).unwrap();
        assert_eq!(images, vec![blank(8)]);
    }

    #[test]
    fn malformed_rows_are_located() {
        let mut px = vec![0u8; PIXELS];
        px[3] = 7;
        let good = row(1, &px);
        let short = "2,0,0";
        let err = parse_digits_csv(&format!("{good}\n{short}\n"), here()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let bad = good.replacen(",7", ",300", 1);
        let err = parse_digits_csv(&bad, here()).unwrap_err();
        assert!(err.to_string().contains("field 5"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let img = blocky_eight(200);
        let text = digits_to_csv(std::slice::from_ref(&img));
        assert_eq!(parse_digits_csv(&text, here()).unwrap(), vec![img]);
    }

    #[test]
    fn single_pixel_clouds() {
        let mut px = vec![0u8; PIXELS];
        px[3 * SIDE + 5] = 255;
        let img = LabeledImage::new(3, px).unwrap();
        let w = image_to_weighted_cloud(&img);
        assert_eq!(w.points(), &[vec![3.0, 5.0]]);
        assert_eq!(w.weights(), &[1.0]);
        let u = image_to_unit_cloud(&img);
        assert_eq!(u.points(), w.points());
        assert_eq!(u.weights(), &[1.0]);
        assert!(image_to_weighted_cloud(&blank(0)).is_empty());
    }

    #[test]
    fn clouds_share_support() {
        let img = blocky_eight(90);
        let w = image_to_weighted_cloud(&img);
        let u = image_to_unit_cloud(&img);
        assert_eq!(w.points(), u.points());
        assert_eq!(w.len(), img.pixels.iter().filter(|&&p| p > 0).count());
        assert!(w.weights().iter().all(|&x| x == 90.0 / 255.0));
    }

    #[test]
    fn ratio_rule() {
        let bars = |ls: &[f64]| ls.iter().map(|&l| (0.0, l)).collect::<Vec<_>>();
        assert!(classify_eight(&bars(&[10.0, 8.0, 1.0])));
        assert!(!classify_eight(&bars(&[10.0, 4.0, 3.0])));
        assert!(!classify_eight(&bars(&[10.0])));
        assert!(classify_eight(&bars(&[10.0, 8.0])));
        assert!(!classify_eight(&[]));
        // zero-length bars are ignored
        assert!(!classify_eight(&[(0.0, 10.0), (1.0, 1.0), (2.0, 2.0)]));
    }

    #[test]
    fn ratio_rule_is_scale_invariant() {
        let raw = [9.0, 6.5, 3.1, 0.4, 3.3];
        for c in [0.01, 0.5, 3.0, 255.0] {
            let scaled: Vec<(f64, f64)> = raw.iter().map(|&l| (0.0, l * c)).collect();
            let base: Vec<(f64, f64)> = raw.iter().map(|&l| (0.0, l)).collect();
            assert_eq!(classify_eight(&scaled), classify_eight(&base));
        }
    }

    #[test]
    fn blocky_eight_is_detected() {
        let config = EvalConfig::default();
        for mode in [Mode::Weighted, Mode::Unweighted] {
            let eval = evaluate(&[blocky_eight(255)], mode, &config).unwrap();
            assert!(eval.failures.is_empty());
            assert_eq!(
                eval.confusion,
                ConfusionMatrix {
                    tn: 0,
                    fp: 0,
                    fn_: 0,
                    tp: 1
                }
            );
        }
    }

    #[test]
    fn loop_bars_match_a_direct_run() {
        let img = blocky_eight(128);
        let cloud = image_to_weighted_cloud(&img);
        let config = EvalConfig {
            t_max: 30.0,
            ..Default::default()
        };
        let adaptive = loop_bars(&cloud, &config).unwrap();
        let direct =
            compute_diagram(&build_linear_rips(&cloud, &FiltrationParams::new(2, 30.0)).unwrap())
                .unwrap();
        assert_eq!(adaptive, direct.barcode().in_dim(1).to_vec());
    }

    #[test]
    fn open_loops_at_t_max_fail_the_image() {
        let config = EvalConfig {
            t_max: 1.0,
            ..Default::default()
        };
        let eval = evaluate(&[blocky_eight(255), blank(1)], Mode::Unweighted, &config).unwrap();
        assert_eq!(eval.failures.len(), 1);
        assert_eq!(eval.failures[0].0, 0);
        assert_eq!(eval.confusion.total(), 1);
    }

    #[test]
    fn reported_metrics_follow_the_counts() {
        // counts from the published 42,000-image run
        let weighted = ConfusionMatrix {
            tn: 36487,
            fp: 1450,
            fn_: 633,
            tp: 3430,
        };
        let unweighted = ConfusionMatrix {
            tn: 35869,
            fp: 2068,
            fn_: 1261,
            tp: 2802,
        };
        let close = |a: f64, b: f64, tol: f64| assert!((a - b).abs() <= tol, "{a} vs {b}");
        close(weighted.accuracy(), 0.9504, 5e-5);
        close(weighted.sensitivity(), 0.9618, 5e-5);
        close(weighted.specificity(), 0.8442, 5e-5);
        close(weighted.positive_predictive_value(), 0.9829, 5e-5);
        close(weighted.negative_predictive_value(), 0.7029, 5e-5);
        close(weighted.prevalence(), 0.9033, 5e-5);
        close(weighted.balanced_accuracy(), 0.903, 5e-4);
        close(unweighted.accuracy(), 0.9207, 5e-5);
        close(unweighted.sensitivity(), 0.9455, 5e-5);
        close(unweighted.specificity(), 0.6896, 5e-5);
        close(unweighted.positive_predictive_value(), 0.966, 5e-4);
        close(unweighted.negative_predictive_value(), 0.5754, 5e-5);
        close(unweighted.prevalence(), 0.9033, 5e-5);
        close(unweighted.balanced_accuracy(), 0.8176, 5e-5);
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig {
            max_dim: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EvalConfig {
            t_max: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(evaluate(&[], Mode::Weighted, &EvalConfig::default()).is_err());
        assert!("weighted".parse::<Mode>().is_ok());
        assert!("other".parse::<Mode>().is_err());
    }
}
