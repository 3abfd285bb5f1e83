//! The window-cost regressor: dense layers, inference, serialization.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WISM";
const FORMAT_VERSION: u32 = 1;

/// One dense layer: `weights` has shape (inputs, outputs) so a batch of
/// activations multiplies on the left.
#[derive(Clone, Debug)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// A trained window-cost regressor.
///
/// Hidden layers apply ReLU, the single output neuron is linear. The model
/// predicts standardized targets; `target_mean`/`target_std` map predictions
/// back to path-length units.
#[derive(Clone, Debug)]
pub struct WismModel {
    pub w: usize,
    pub layers: Vec<Layer>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl WismModel {
    /// Number of inputs: 2(w+1) window coordinates.
    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    /// Layer widths from input to output, e.g. [8, 256, 256, 256, 1].
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.bias.len()));
        dims
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::config("model must have at least one layer"));
        }
        for pair in self.layers.windows(2) {
            if pair[0].bias.len() != pair[1].weights.nrows() {
                return Err(Error::config("layer dimensions do not chain"));
            }
        }
        for layer in &self.layers {
            if layer.weights.ncols() != layer.bias.len() {
                return Err(Error::config("bias width does not match layer output"));
            }
        }
        if self.layers.last().unwrap().bias.len() != 1 {
            return Err(Error::config("model must end in a single output neuron"));
        }
        if self.target_std.is_nan() || self.target_std <= 0.0 {
            return Err(Error::config("target standard deviation must be positive"));
        }
        if self.input_dim() != 2 * (self.w + 1) {
            return Err(Error::config(format!(
                "input width {} does not match window size w={}",
                self.input_dim(),
                self.w
            )));
        }
        Ok(())
    }

    /// Batched forward pass on the standardized output scale.
    pub(crate) fn forward_standardized(&self, x: &Array2<f64>) -> Array1<f64> {
        let mut act = x.dot(&self.layers[0].weights) + &self.layers[0].bias;
        for layer in self.layers.iter().skip(1) {
            act.mapv_inplace(|v| v.max(0.0));
            act = act.dot(&layer.weights) + &layer.bias;
        }
        debug_assert_eq!(act.ncols(), 1);
        act.index_axis(Axis(1), 0).to_owned()
    }

    /// Predicts a batch of windows given as rows of 2(w+1) coordinates.
    pub fn predict_batch(&self, windows: &Array2<f64>) -> Result<Vec<f64>> {
        if windows.ncols() != self.input_dim() {
            return Err(Error::config(format!(
                "model expects {} columns, got {}",
                self.input_dim(),
                windows.ncols()
            )));
        }
        let std_out = self.forward_standardized(windows);
        Ok(std_out.iter().map(|&v| v * self.target_std + self.target_mean).collect())
    }

    /// Predicts one window with a standalone single-row pass.
    ///
    /// The result depends only on `coords`, never on surrounding batch
    /// contents, which keeps cached and uncached callers bit-identical.
    pub fn predict_window(&self, coords: &[f64]) -> Result<f64> {
        if coords.len() != self.input_dim() {
            return Err(Error::config(format!(
                "model expects {} coordinates, got {}",
                self.input_dim(),
                coords.len()
            )));
        }
        let mut act = coords.to_vec();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = layer.bias.to_vec();
            for (i, &a) in act.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = layer.weights.row(i);
                let row = row.as_slice().expect("weights are row-major");
                for (n, &w) in next.iter_mut().zip(row) {
                    *n += a * w;
                }
            }
            if li < last {
                for v in &mut next {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            act = next;
        }
        Ok(act[0] * self.target_std + self.target_mean)
    }

    /// Writes the versioned binary model format: magic, version, window
    /// size, layer dims, standardization constants, then per layer the
    /// row-major weight block and the bias block, all little-endian.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.w as u32).to_le_bytes());
        let dims = self.layer_dims();
        buf.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for d in &dims {
            buf.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        buf.extend_from_slice(&self.target_mean.to_le_bytes());
        buf.extend_from_slice(&self.target_std.to_le_bytes());
        for layer in &self.layers {
            for row in layer.weights.rows() {
                for v in row {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            for v in &layer.bias {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut file = fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let mut reader = ByteReader { bytes: &bytes, at: 0, path };
        let magic = reader.take(4)?;
        if magic != MAGIC {
            return Err(Error::format(format!("{}: not a model file", path.display())));
        }
        let version = reader.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "{}: unsupported model format version {version}",
                path.display()
            )));
        }
        let w = reader.u32()? as usize;
        let n_layers = reader.u32()? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(Error::format(format!("{}: implausible layer count", path.display())));
        }
        let mut dims = Vec::with_capacity(n_layers + 1);
        for _ in 0..=n_layers {
            dims.push(reader.u32()? as usize);
        }
        let target_mean = reader.f64()?;
        let target_std = reader.f64()?;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (rows, cols) = (dims[l], dims[l + 1]);
            let mut weights = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                weights.push(reader.f64()?);
            }
            let weights = Array2::from_shape_vec((rows, cols), weights)
                .map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
            let mut bias = Vec::with_capacity(cols);
            for _ in 0..cols {
                bias.push(reader.f64()?);
            }
            layers.push(Layer { weights, bias: Array1::from_vec(bias) });
        }
        if reader.at != bytes.len() {
            return Err(Error::format(format!(
                "{}: {} trailing bytes after model data",
                path.display(),
                bytes.len() - reader.at
            )));
        }
        let model = WismModel { w, layers, target_mean, target_std };
        model.validate().map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
        Ok(model)
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.at + len > self.bytes.len() {
            return Err(Error::format(format!("{}: truncated model file", self.path.display())));
        }
        let out = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
