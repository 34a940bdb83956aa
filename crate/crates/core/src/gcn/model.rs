use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::sensor_graph::TAXEL_COUNT;
use crate::tensor::Matrix;

pub const INPUT_FEATURES: usize = 3;
pub const FC_HIDDEN: usize = 128;
pub const OUTPUT_CLASSES: usize = 2;
pub const MAX_CONV_LAYERS: usize = 10;

/// Conv widths used by the depth sweep; a depth-`d` network takes the first `d`.
pub const WIDTH_SCHEDULE: [usize; MAX_CONV_LAYERS] = [8, 8, 16, 16, 32, 32, 48, 48, 64, 64];

const INIT_STREAM: u64 = 0x494E_4954; // "INIT"

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcnConfig {
    pub conv_widths: Vec<usize>,
    pub init_seed: u64,
}

impl GcnConfig {
    pub fn new(conv_widths: Vec<usize>, init_seed: u64) -> Result<Self> {
        let config = Self {
            conv_widths,
            init_seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// The sweep architecture of the given depth (depth 5 is 8-8-16-16-32).
    pub fn for_depth(depth: usize, init_seed: u64) -> Result<Self> {
        if !(1..=MAX_CONV_LAYERS).contains(&depth) {
            return Err(Error::InvalidArgument(format!(
                "depth must be in [1, {MAX_CONV_LAYERS}], got {depth}"
            )));
        }
        Self::new(WIDTH_SCHEDULE[..depth].to_vec(), init_seed)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.conv_widths.len();
        if !(1..=MAX_CONV_LAYERS).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "{n} conv layers, expected 1 to {MAX_CONV_LAYERS}"
            )));
        }
        if self.conv_widths.contains(&0) {
            return Err(Error::InvalidArgument("conv widths must be positive".into()));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.conv_widths.len()
    }

    pub fn last_width(&self) -> usize {
        *self.conv_widths.last().expect("validated config has a layer")
    }

    /// Width of the flattened node features fed to the first dense layer.
    pub fn flatten_width(&self) -> usize {
        TAXEL_COUNT * self.last_width()
    }

    /// Parameter matrix shapes in declaration order: conv weights and biases
    /// layer by layer, then fc1 and fc2.
    pub fn parameter_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(2 * self.depth() + 4);
        let mut fan_in = INPUT_FEATURES;
        for &w in &self.conv_widths {
            shapes.push((fan_in, w));
            shapes.push((1, w));
            fan_in = w;
        }
        shapes.push((self.flatten_width(), FC_HIDDEN));
        shapes.push((1, FC_HIDDEN));
        shapes.push((FC_HIDDEN, OUTPUT_CLASSES));
        shapes.push((1, OUTPUT_CLASSES));
        shapes
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_shapes().iter().map(|(r, c)| r * c).sum()
    }

    /// `-`-joined conv widths, e.g. `8-8-16-16-32`.
    pub fn widths_label(&self) -> String {
        self.conv_widths
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Matrix,
}

/// Conv stack plus two dense readout layers. `revision` changes whenever
/// parameters are handed out mutably, so stale forward caches can be detected.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    config: GcnConfig,
    pub(crate) conv: Vec<Dense>,
    pub(crate) fc1: Dense,
    pub(crate) fc2: Dense,
    revision: u64,
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Matrix {
    let bound = glorot_bound(fan_in, fan_out);
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect();
    Matrix::from_vec(fan_in, fan_out, data).expect("sized to fit")
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Glorot-uniform weights, zero biases, drawn from a stream seeded by
/// `config.init_seed`.
pub fn init_model(config: &GcnConfig) -> Result<GcnModel> {
    config.validate()?;
    let mut rng = rng_for(config.init_seed, INIT_STREAM);
    let mut conv = Vec::with_capacity(config.depth());
    let mut fan_in = INPUT_FEATURES;
    for &w in &config.conv_widths {
        conv.push(Dense {
            weight: glorot(&mut rng, fan_in, w),
            bias: Matrix::zeros(1, w),
        });
        fan_in = w;
    }
    let fc1 = Dense {
        weight: glorot(&mut rng, config.flatten_width(), FC_HIDDEN),
        bias: Matrix::zeros(1, FC_HIDDEN),
    };
    let fc2 = Dense {
        weight: glorot(&mut rng, FC_HIDDEN, OUTPUT_CLASSES),
        bias: Matrix::zeros(1, OUTPUT_CLASSES),
    };
    Ok(GcnModel {
        config: config.clone(),
        conv,
        fc1,
        fc2,
        revision: 0,
    })
}

impl GcnModel {
    pub fn config(&self) -> &GcnConfig {
        &self.config
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn params(&self) -> Vec<&Matrix> {
        let mut out = Vec::with_capacity(2 * self.conv.len() + 4);
        for layer in &self.conv {
            out.push(&layer.weight);
            out.push(&layer.bias);
        }
        out.extend([&self.fc1.weight, &self.fc1.bias, &self.fc2.weight, &self.fc2.bias]);
        out
    }

    /// Mutable access to every parameter in declaration order. Invalidates
    /// caches from earlier forward passes.
    pub fn params_mut(&mut self) -> Vec<&mut Matrix> {
        self.revision += 1;
        let mut out = Vec::with_capacity(2 * self.conv.len() + 4);
        for layer in &mut self.conv {
            out.push(&mut layer.weight);
            out.push(&mut layer.bias);
        }
        out.extend([
            &mut self.fc1.weight,
            &mut self.fc1.bias,
            &mut self.fc2.weight,
            &mut self.fc2.bias,
        ]);
        out
    }

    /// Rebuilds a model from parameters in declaration order.
    pub fn from_params(config: GcnConfig, params: Vec<Matrix>) -> Result<Self> {
        config.validate()?;
        let shapes = config.parameter_shapes();
        if params.len() != shapes.len() {
            return Err(Error::Format(format!(
                "{} parameter tensors, config needs {}",
                params.len(),
                shapes.len()
            )));
        }
        for (i, (p, s)) in params.iter().zip(&shapes).enumerate() {
            if p.shape() != *s {
                return Err(Error::Format(format!(
                    "parameter {i} has shape {:?}, config needs {s:?}",
                    p.shape()
                )));
            }
            p.check_finite("parameter")?;
        }
        let mut it = params.into_iter();
        let mut next = || it.next().expect("count checked");
        let conv = (0..config.depth())
            .map(|_| Dense {
                weight: next(),
                bias: next(),
            })
            .collect();
        let fc1 = Dense {
            weight: next(),
            bias: next(),
        };
        let fc2 = Dense {
            weight: next(),
            bias: next(),
        };
        Ok(Self {
            config,
            conv,
            fc1,
            fc2,
            revision: 0,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
    }
}
