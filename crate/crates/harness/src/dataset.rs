//! Binary datasets: KEEL and CSV loaders, CSV export, toy generators and
//! synthetic stand-ins with the shape of the KEEL benchmark sets.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gmote_core::{Matrix, RngStream};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

/// Feature matrix with binary labels; `true` marks the positive (minority)
/// class.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub name: String,
    pub feature_names: Vec<String>,
    pub x: Matrix,
    pub y: Vec<bool>,
    pub positive_label: String,
    pub negative_label: String,
    /// Majority count over minority count.
    pub imbalance_ratio: f64,
}

impl DatasetRecord {
    /// Builds a record and checks that both classes occur.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        x: Matrix,
        y: Vec<bool>,
        positive_label: impl Into<String>,
        negative_label: impl Into<String>,
    ) -> Result<DatasetRecord> {
        let name = name.into();
        if y.len() != x.n_rows() || feature_names.len() != x.n_cols() {
            return Err(HarnessError::InvalidSpec(format!(
                "dataset {name}: {} rows, {} labels, {} columns, {} names",
                x.n_rows(),
                y.len(),
                x.n_cols(),
                feature_names.len()
            )));
        }
        let pos = y.iter().filter(|&&v| v).count();
        let neg = y.len() - pos;
        if pos == 0 || neg == 0 {
            return Err(HarnessError::SingleClass { path: name.into() });
        }
        Ok(DatasetRecord {
            name,
            feature_names,
            x,
            y,
            positive_label: positive_label.into(),
            negative_label: negative_label.into(),
            imbalance_ratio: neg as f64 / pos as f64,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn n_positive(&self) -> usize {
        self.y.iter().filter(|&&v| v).count()
    }
}

/// Turns raw class strings into labels, making the rarer class positive
/// (`positive` overrides). Ties go to the label seen first.
fn binarize(
    path: &Path,
    raw: &[String],
    positive: Option<&str>,
) -> Result<(Vec<bool>, String, String)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for label in raw {
        match counts.iter_mut().find(|(l, _)| l == label) {
            Some((_, c)) => *c += 1,
            None => counts.push((label.clone(), 1)),
        }
    }
    match counts.len() {
        0 | 1 => return Err(HarnessError::SingleClass { path: path.into() }),
        2 => {}
        found => {
            return Err(HarnessError::NotBinary {
                path: path.into(),
                found,
            })
        }
    }
    let pos_idx =
        match positive {
            Some(p) => counts.iter().position(|(l, _)| l == p).ok_or_else(|| {
                HarnessError::UnknownLabel {
                    path: path.into(),
                    label: p.to_string(),
                }
            })?,
            None => usize::from(counts[1].1 < counts[0].1),
        };
    let pos = counts[pos_idx].0.clone();
    let neg = counts[1 - pos_idx].0.clone();
    let y = raw.iter().map(|l| *l == pos).collect();
    Ok((y, pos, neg))
}

#[derive(Debug)]
enum AttrType {
    Numeric,
    Nominal,
}

fn malformed(path: &Path, reason: impl Into<String>) -> HarnessError {
    HarnessError::MalformedHeader {
        path: path.into(),
        reason: reason.into(),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

fn parse_attribute(path: &Path, rest: &str) -> Result<(String, AttrType)> {
    let rest = rest.trim();
    if let Some(brace) = rest.find('{') {
        let name = rest[..brace].trim();
        if name.is_empty() {
            return Err(malformed(path, format!("attribute without a name: {rest}")));
        }
        return Ok((name.to_string(), AttrType::Nominal));
    }
    let mut parts = rest.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| malformed(path, "empty @attribute"))?;
    let ty = parts
        .next()
        .ok_or_else(|| malformed(path, format!("attribute {name} has no type")))?;
    // "real[0.1, 2]" also occurs without a space before the range
    let ty = ty.split('[').next().unwrap_or(ty).to_ascii_lowercase();
    match ty.as_str() {
        "real" | "integer" | "numeric" => Ok((name.to_string(), AttrType::Numeric)),
        other => Err(malformed(
            path,
            format!("attribute {name} has unsupported type {other}"),
        )),
    }
}

/// Reads a KEEL `.dat` file. The output attribute (from `@outputs`, else the
/// last attribute) must be nominal with two values; every input must be
/// numeric. The rarer class becomes positive.
pub fn load_keel(path: impl AsRef<Path>) -> Result<DatasetRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    parse_keel(path, &text)
}

fn parse_keel(path: &Path, text: &str) -> Result<DatasetRecord> {
    let mut relation = None;
    let mut attributes: Vec<(String, AttrType)> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut lines = text.lines();
    let mut saw_data = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (directive, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match directive.to_ascii_lowercase().as_str() {
            "@relation" => relation = Some(rest.trim().to_string()),
            "@attribute" => attributes.push(parse_attribute(path, rest)?),
            "@inputs" | "@input" => inputs = Some(split_list(rest)),
            "@outputs" | "@output" => outputs = Some(split_list(rest)),
            "@data" => {
                saw_data = true;
                break;
            }
            _ if directive.starts_with('@') => {
                return Err(malformed(path, format!("unknown directive {directive}")));
            }
            _ => return Err(malformed(path, format!("data before @data: {line}"))),
        }
    }
    if !saw_data {
        return Err(malformed(path, "missing @data"));
    }
    if attributes.len() < 2 {
        return Err(malformed(
            path,
            "need at least one input and one output attribute",
        ));
    }
    let index_of = |name: &str| -> Result<usize> {
        attributes
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| malformed(path, format!("undeclared attribute {name}")))
    };
    let output = match &outputs {
        Some(o) if o.len() == 1 => index_of(&o[0])?,
        Some(o) => {
            return Err(malformed(
                path,
                format!("expected one output, got {}", o.len()),
            ))
        }
        None => attributes.len() - 1,
    };
    if !matches!(attributes[output].1, AttrType::Nominal) {
        return Err(malformed(
            path,
            format!("output {} is not nominal", attributes[output].0),
        ));
    }
    let input_idx: Vec<usize> = match &inputs {
        Some(names) => names.iter().map(|n| index_of(n)).collect::<Result<_>>()?,
        None => (0..attributes.len()).filter(|&i| i != output).collect(),
    };
    for &i in &input_idx {
        if matches!(attributes[i].1, AttrType::Nominal) {
            return Err(HarnessError::NonNumericFeature {
                path: path.into(),
                attribute: attributes[i].0.clone(),
                value: "nominal".into(),
            });
        }
    }
    let mut x = Matrix::with_cols(input_idx.len());
    let mut raw_labels = Vec::new();
    let mut row = vec![0.0; input_idx.len()];
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != attributes.len() {
            return Err(malformed(
                path,
                format!(
                    "row has {} fields, header declares {}: {line}",
                    fields.len(),
                    attributes.len()
                ),
            ));
        }
        for (slot, &i) in row.iter_mut().zip(&input_idx) {
            *slot = parse_number(fields[i]).ok_or_else(|| HarnessError::NonNumericFeature {
                path: path.into(),
                attribute: attributes[i].0.clone(),
                value: fields[i].to_string(),
            })?;
        }
        x.push_row(&row)?;
        raw_labels.push(fields[output].to_string());
    }
    let (y, pos, neg) = binarize(path, &raw_labels, None)?;
    let name = relation
        .filter(|r| !r.is_empty())
        .unwrap_or_else(|| file_stem(path));
    let names = input_idx.iter().map(|&i| attributes[i].0.clone()).collect();
    DatasetRecord::new(name, names, x, y, pos, neg)
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Reads a headed CSV. `positive_label` picks the positive class; `None`
/// makes the rarer class positive.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: Option<&str>,
) -> Result<DatasetRecord> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| HarnessError::MissingColumn {
            path: path.into(),
            column: label_column.to_string(),
        })?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != label_idx).collect();
    let mut x = Matrix::with_cols(feature_idx.len());
    let mut raw_labels = Vec::new();
    let mut row = vec![0.0; feature_idx.len()];
    for record in reader.records() {
        let record = record?;
        for (slot, &i) in row.iter_mut().zip(&feature_idx) {
            let field = record[i].trim();
            *slot = parse_number(field).ok_or_else(|| HarnessError::NonNumericFeature {
                path: path.into(),
                attribute: headers[i].to_string(),
                value: field.to_string(),
            })?;
        }
        x.push_row(&row)?;
        raw_labels.push(record[label_idx].trim().to_string());
    }
    let (y, pos, neg) = binarize(path, &raw_labels, positive_label)?;
    let names = feature_idx
        .iter()
        .map(|&i| headers[i].to_string())
        .collect();
    DatasetRecord::new(file_stem(path), names, x, y, pos, neg)
}

/// Writes features then a `label_column` holding the class strings.
pub fn write_csv(record: &DatasetRecord, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = record.feature_names.clone();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (row, &label) in record.x.rows().zip(&record.y) {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        fields.push(if label {
            record.positive_label.clone()
        } else {
            record.negative_label.clone()
        });
        w.write_record(&fields)?;
    }
    w.flush().map_err(io_error(path))?;
    Ok(())
}

fn normal(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

fn xy_names() -> Vec<String> {
    vec!["x1".into(), "x2".into()]
}

fn labelled(name: &str, minority: Matrix, majority: Matrix) -> DatasetRecord {
    let n_min = minority.n_rows();
    let n_maj = majority.n_rows();
    let x = minority.vstack(&majority).expect("same width");
    let y = (0..n_min + n_maj).map(|i| i < n_min).collect();
    DatasetRecord::new(name, xy_names(), x, y, "positive", "negative").expect("two classes")
}

/// Two Gaussian minority blobs (60 points each, centres (−2, 0) and (2, 0),
/// sd 0.5) inside 400 majority points uniform on [−5, 5]×[−4, 4] with the
/// discs of radius 1 around both centres left empty.
pub fn toy_example1(seed: u64) -> DatasetRecord {
    const CENTRES: [[f64; 2]; 2] = [[-2.0, 0.0], [2.0, 0.0]];
    let mut rng = RngStream::new(seed, "toy1");
    let mut minority = Matrix::with_cols(2);
    for c in CENTRES {
        for _ in 0..60 {
            let p = [c[0] + 0.5 * normal(&mut rng), c[1] + 0.5 * normal(&mut rng)];
            minority.push_row(&p).expect("width 2");
        }
    }
    let mut majority = Matrix::with_cols(2);
    while majority.n_rows() < 400 {
        let p = [rng.random_range(-5.0..5.0), rng.random_range(-4.0..4.0)];
        let in_core = CENTRES
            .iter()
            .any(|c| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) < 1.0);
        if !in_core {
            majority.push_row(&p).expect("width 2");
        }
    }
    labelled("toy1", minority, majority)
}

/// Interlocking half-moons: 120 minority points on the upper unit arc and 400
/// majority points on the lower arc shifted by (1, 0.5), both with Gaussian
/// noise of sd 0.2, which makes the classes overlap slightly.
pub fn toy_example2(seed: u64) -> DatasetRecord {
    let mut rng = RngStream::new(seed, "toy2");
    let mut arc = |n: usize, upper: bool| {
        let mut m = Matrix::with_cols(2);
        for _ in 0..n {
            let t = rng.random_range(0.0..std::f64::consts::PI);
            let p = if upper {
                [t.cos(), t.sin()]
            } else {
                [1.0 - t.cos(), 0.5 - t.sin()]
            };
            let noisy = [p[0] + 0.2 * normal(&mut rng), p[1] + 0.2 * normal(&mut rng)];
            m.push_row(&noisy).expect("width 2");
        }
        m
    };
    let minority = arc(120, true);
    let majority = arc(400, false);
    labelled("toy2", minority, majority)
}

/// Size profile of one benchmark dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub name: &'static str,
    pub imbalance_ratio: f64,
    pub n_samples: usize,
    pub n_features: usize,
    /// Distance between class cluster centres of the synthetic stand-in, in
    /// within-cluster standard deviations. Smaller means harder.
    pub separation: f64,
}

impl DatasetProfile {
    pub fn n_minority(&self) -> usize {
        (self.n_samples as f64 / (1.0 + self.imbalance_ratio)).round() as usize
    }
}

/// The eight KEEL datasets used in the benchmark, in report order.
pub const BENCHMARK_PROFILES: [DatasetProfile; 8] = [
    DatasetProfile {
        name: "ecoli0vs1",
        imbalance_ratio: 1.86,
        n_samples: 220,
        n_features: 7,
        separation: 4.0,
    },
    DatasetProfile {
        name: "glass0123vs456",
        imbalance_ratio: 3.19,
        n_samples: 214,
        n_features: 9,
        separation: 3.0,
    },
    DatasetProfile {
        name: "haberman",
        imbalance_ratio: 2.68,
        n_samples: 306,
        n_features: 3,
        separation: 0.8,
    },
    DatasetProfile {
        name: "newthyroid1",
        imbalance_ratio: 5.14,
        n_samples: 215,
        n_features: 5,
        separation: 3.0,
    },
    DatasetProfile {
        name: "pima",
        imbalance_ratio: 1.9,
        n_samples: 768,
        n_features: 8,
        separation: 1.2,
    },
    DatasetProfile {
        name: "segment0",
        imbalance_ratio: 6.01,
        n_samples: 2308,
        n_features: 19,
        separation: 4.0,
    },
    DatasetProfile {
        name: "wisconsin",
        imbalance_ratio: 1.86,
        n_samples: 683,
        n_features: 9,
        separation: 3.5,
    },
    DatasetProfile {
        name: "yeast1",
        imbalance_ratio: 2.46,
        n_samples: 1484,
        n_features: 8,
        separation: 1.0,
    },
];

pub fn profile(name: &str) -> Option<&'static DatasetProfile> {
    BENCHMARK_PROFILES
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
}

/// Gaussian-cluster stand-in with the row count, width and imbalance ratio of
/// `profile`. Minority rows come from two clusters and majority rows from
/// three; features are mixed by a random linear map so they correlate, and
/// values are rounded to three decimals.
pub fn surrogate(profile: &DatasetProfile, seed: u64) -> DatasetRecord {
    let m = profile.n_features;
    let mut rng = RngStream::new(seed, format!("surrogate/{}", profile.name));
    let direction = |rng: &mut RngStream| {
        let v: Vec<f64> = (0..m).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        v.into_iter().map(|a| a / norm).collect::<Vec<f64>>()
    };
    let axis = direction(&mut rng);
    let centre = |rng: &mut RngStream, side: f64| {
        let jitter = direction(rng);
        axis.iter()
            .zip(&jitter)
            .map(|(a, j)| side * 0.5 * profile.separation * a + 0.6 * j)
            .collect::<Vec<f64>>()
    };
    let min_centres = [centre(&mut rng, 1.0), centre(&mut rng, 1.0)];
    let maj_centres = [
        centre(&mut rng, -1.0),
        centre(&mut rng, -1.0),
        centre(&mut rng, -1.0),
    ];
    let mixing: Vec<f64> = (0..m * m)
        .map(|i| {
            if i % (m + 1) == 0 {
                1.0
            } else {
                0.3 * normal(&mut rng)
            }
        })
        .collect();
    let n_min = profile.n_minority();
    let n_maj = profile.n_samples - n_min;
    let draw = |rng: &mut RngStream, centres: &[Vec<f64>], n: usize| {
        let mut out = Matrix::with_cols(m);
        let mut z = vec![0.0; m];
        let mut row = vec![0.0; m];
        for i in 0..n {
            let c = &centres[i % centres.len()];
            z.iter_mut().for_each(|v| *v = normal(rng));
            for (a, slot) in row.iter_mut().enumerate() {
                let mixed: f64 = (0..m).map(|b| mixing[a * m + b] * z[b]).sum();
                *slot = ((c[a] + mixed) * 1000.0).round() / 1000.0;
            }
            out.push_row(&row).expect("width m");
        }
        out
    };
    let minority = draw(&mut rng, &min_centres, n_min);
    let majority = draw(&mut rng, &maj_centres, n_maj);
    let x = minority.vstack(&majority).expect("same width");
    let y = (0..profile.n_samples).map(|i| i < n_min).collect();
    let names = (1..=m).map(|j| format!("a{j}")).collect();
    DatasetRecord::new(profile.name, names, x, y, "positive", "negative").expect("two classes")
}

/// Lower-cased alphanumerics, so `ecoli-0_vs_1` matches `ecoli0vs1`.
pub fn normalized_name(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Finds the `.dat` files in `dir` whose names match benchmark profiles.
pub fn find_keel_files(
    dir: impl AsRef<Path>,
) -> Result<BTreeMap<&'static str, std::path::PathBuf>> {
    let dir = dir.as_ref();
    let mut found = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_error(dir))? {
        let path = entry.map_err(io_error(dir))?.path();
        if path.extension().is_none_or(|e| e != "dat") {
            continue;
        }
        let stem = normalized_name(&file_stem(&path));
        if let Some(p) = BENCHMARK_PROFILES
            .iter()
            .find(|p| normalized_name(p.name) == stem)
        {
            found.insert(p.name, path);
        }
    }
    Ok(found)
}
