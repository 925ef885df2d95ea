//! Quantum convolution: a small circuit slides over a 2D map and each
//! `k×k` patch becomes `k²` Pauli-Z expectation channels.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::vqc::{forward, EncodingSpec, Entangler, Input, MeasurementConfig, Nonlinearity, VqcModel};

/// Dense `height × width` grid of finite reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap2D {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl FeatureMap2D {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::domain("feature maps need positive height and width"));
        }
        if values.len() != height * width {
            return Err(Error::domain(format!("{} values cannot fill a {height}x{width} map", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("value at row {} col {} is not finite", i / width, i % width)));
        }
        Ok(Self { height, width, values })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Self::new(height, width, values)
    }

    /// Parses `H` lines of `W` comma-separated reals. Errors cite 1-based
    /// row and column numbers.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut width = None;
        let mut values = Vec::new();
        let mut height = 0;
        for (r, record) in reader.records().enumerate() {
            let row = r + 1;
            let record = record.map_err(|e| Error::parse(format!("row {row}"), e.to_string()))?;
            match width {
                None => width = Some(record.len()),
                Some(w) if w != record.len() => {
                    return Err(Error::parse(
                        format!("row {row}"),
                        format!("expected {w} columns, found {}", record.len()),
                    ))
                }
                _ => {}
            }
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::parse(format!("row {row} col {}", c + 1), format!("{field:?} is not a number"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(format!("row {row} col {}", c + 1), "value is not finite"));
                }
                values.push(v);
            }
            height += 1;
        }
        let width = width.ok_or_else(|| Error::parse("row 1", "empty map"))?;
        Self::new(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.width + col] = value;
    }
}

/// A `k×k` window, flattened row-major, anchored at its top-left cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub row: usize,
    pub col: usize,
    pub values: Vec<f64>,
}

/// `⌊(n − k)/s⌋ + 1` windows along an axis of length `n`.
pub fn output_len(n: usize, kernel: usize, stride: usize) -> usize {
    (n - kernel) / stride + 1
}

/// Every `kernel×kernel` window at stride `stride`, in row-major anchor
/// order, without padding.
pub fn extract_patches(map: &FeatureMap2D, kernel: usize, stride: usize) -> Result<Vec<Patch>> {
    if kernel == 0 || stride == 0 {
        return Err(Error::usage("kernel and stride must be positive"));
    }
    if map.height < kernel || map.width < kernel {
        return Err(Error::domain(format!(
            "{}x{} map is smaller than a {kernel}x{kernel} patch",
            map.height, map.width
        )));
    }
    let rows = output_len(map.height, kernel, stride);
    let cols = output_len(map.width, kernel, stride);
    let mut patches = Vec::with_capacity(rows * cols);
    for pr in 0..rows {
        for pc in 0..cols {
            let (row, col) = (pr * stride, pc * stride);
            let values = (0..kernel)
                .flat_map(|dr| (0..kernel).map(move |dc| (dr, dc)))
                .map(|(dr, dc)| map.get(row + dr, col + dc))
                .collect();
            patches.push(Patch { row, col, values });
        }
    }
    Ok(patches)
}

/// Circuit filter plus the affine map taking raw values in
/// `[input_min, input_max]` to `[0, 1]` before encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuanvFilter {
    kernel: usize,
    stride: usize,
    model: VqcModel,
    input_min: f64,
    input_max: f64,
}

/// Encoding used by default filters: the normalised value times π/2, no
/// further squashing.
pub fn filter_encoding() -> EncodingSpec {
    EncodingSpec::new(Nonlinearity::None, FRAC_PI_2)
}

impl QuanvFilter {
    pub fn new(kernel: usize, stride: usize, model: VqcModel, input_min: f64, input_max: f64) -> Result<Self> {
        if kernel == 0 || stride == 0 {
            return Err(Error::usage("kernel and stride must be positive"));
        }
        if kernel * kernel != model.num_qubits() {
            return Err(Error::domain(format!(
                "a {kernel}x{kernel} patch needs {} qubits, model has {}",
                kernel * kernel,
                model.num_qubits()
            )));
        }
        if !(input_min.is_finite() && input_max.is_finite() && input_max > input_min) {
            return Err(Error::usage(format!("input range [{input_min}, {input_max}] must be finite and non-empty")));
        }
        Ok(Self { kernel, stride, model, input_min, input_max })
    }

    /// Untrained filter with angles uniform in `(-π, π)`, drawn from `seed`.
    pub fn random(
        kernel: usize,
        stride: usize,
        depth: usize,
        input_min: f64,
        input_max: f64,
        seed: u64,
    ) -> Result<Self> {
        let u = kernel * kernel;
        let model = VqcModel::random_in(
            u,
            depth,
            Entangler::default_for(u),
            filter_encoding(),
            std::f64::consts::PI,
            &mut rng::seeded(seed),
        )?;
        Self::new(kernel, stride, model, input_min, input_max)
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn model(&self) -> &VqcModel {
        &self.model
    }

    pub fn input_range(&self) -> (f64, f64) {
        (self.input_min, self.input_max)
    }

    pub fn normalize(&self, value: f64) -> f64 {
        (value - self.input_min) / (self.input_max - self.input_min)
    }

    /// Encoder input for one patch.
    pub fn patch_features(&self, patch: &Patch) -> Vec<f64> {
        patch.values.iter().map(|&v| self.normalize(v)).collect()
    }
}

/// `height × width × channels` tensor, row-major with channels innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct QuanvOutput {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct QuanvOutputJson {
    shape: [usize; 3],
    data: Vec<f64>,
}

impl QuanvOutput {
    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, self.channels]
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// `{"shape": [H', W', U], "data": [...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&QuanvOutputJson { shape: self.shape(), data: self.data.clone() })
            .expect("output serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: QuanvOutputJson = serde_json::from_str(text).map_err(crate::vqc::json_error)?;
        let [height, width, channels] = raw.shape;
        if raw.data.len() != height * width * channels {
            return Err(Error::parse("data", "length does not match shape"));
        }
        Ok(Self { height, width, channels, data: raw.data })
    }
}

/// Analytic quanvolution of `map`.
pub fn quanv_forward(filter: &QuanvFilter, map: &FeatureMap2D) -> Result<QuanvOutput> {
    quanv_forward_measured(filter, map, &MeasurementConfig::Analytic)
}

/// Quanvolution with the given readout. In shots mode patch `i` is
/// sampled from a stream derived from the configured seed and `i`.
pub fn quanv_forward_measured(
    filter: &QuanvFilter,
    map: &FeatureMap2D,
    measurement: &MeasurementConfig,
) -> Result<QuanvOutput> {
    measurement.validate()?;
    let patches = extract_patches(map, filter.kernel, filter.stride)?;
    let pixels: Vec<Vec<f64>> = patches
        .par_iter()
        .enumerate()
        .map(|(i, patch)| {
            let m = match *measurement {
                MeasurementConfig::Shots { shots, seed } => {
                    MeasurementConfig::Shots { shots, seed: rng::derive_seed(seed, i as u64) }
                }
                analytic => analytic,
            };
            forward(&filter.model, Input::Features(&filter.patch_features(patch)), &m)
        })
        .collect::<Result<_>>()?;
    Ok(QuanvOutput {
        height: output_len(map.height, filter.kernel, filter.stride),
        width: output_len(map.width, filter.kernel, filter.stride),
        channels: filter.model.num_qubits(),
        data: pixels.into_iter().flatten().collect(),
    })
}
