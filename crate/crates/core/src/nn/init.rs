//! Weight initializers. Matrices are `fan_in x fan_out`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Standard deviation of a unit normal truncated to [-2, 2]. Truncated draws
/// are scaled up by its inverse so the resulting spread matches the target.
pub const TRUNCATED_STD_2SIGMA: f64 = 0.879_625_661_034_239_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitScheme {
    /// U(-0.05, 0.05)
    RandomUniform,
    Orthogonal {
        gain: f64,
    },
    /// U(-k, k) with k = sqrt(6 / (fan_in + fan_out))
    XavierUniform,
    /// Truncated normal, std sqrt(2 / fan_in)
    HeNormal,
    /// Truncated normal, std sqrt(1 / fan_in)
    LecunNormal,
    /// Plain N(0, std^2)
    FixedNormal {
        std: f64,
    },
}

impl InitScheme {
    pub fn validate(self) -> Result<Self> {
        match self {
            InitScheme::Orthogonal { gain } if gain.is_nan() || gain <= 0.0 => Err(Error::Config(
                format!("orthogonal gain must be > 0, got {gain}"),
            )),
            InitScheme::FixedNormal { std } if std.is_nan() || std <= 0.0 => {
                Err(Error::Config(format!("normal std must be > 0, got {std}")))
            }
            s => Ok(s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitScheme::RandomUniform => "random_uniform",
            InitScheme::Orthogonal { .. } => "orthogonal",
            InitScheme::XavierUniform => "xavier",
            InitScheme::HeNormal => "he_normal",
            InitScheme::LecunNormal => "lecun_normal",
            InitScheme::FixedNormal { .. } => "fixed_normal",
        }
    }

    /// The five schemes compared in initializer sweeps.
    pub fn comparison_set() -> [InitScheme; 5] {
        [
            InitScheme::RandomUniform,
            InitScheme::Orthogonal { gain: 1.0 },
            InitScheme::XavierUniform,
            InitScheme::HeNormal,
            InitScheme::LecunNormal,
        ]
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitScheme::Orthogonal { gain } if *gain != 1.0 => write!(f, "orthogonal:{gain}"),
            InitScheme::FixedNormal { std } => write!(f, "fixed_normal:{std}"),
            s => f.write_str(s.name()),
        }
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    /// Accepts the scheme name, optionally followed by `:<param>` for
    /// `orthogonal` (gain) and `fixed_normal` (std).
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => {
                let v: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad initializer parameter in {s:?}")))?;
                (n.trim(), Some(v))
            }
            None => (s.trim(), None),
        };
        let scheme = match (name.to_ascii_lowercase().as_str(), param) {
            ("random_uniform", None) => InitScheme::RandomUniform,
            ("orthogonal", g) => InitScheme::Orthogonal {
                gain: g.unwrap_or(1.0),
            },
            ("xavier" | "xavier_uniform" | "glorot_uniform", None) => InitScheme::XavierUniform,
            ("he_normal", None) => InitScheme::HeNormal,
            ("lecun_normal", None) => InitScheme::LecunNormal,
            ("fixed_normal" | "normal", s) => InitScheme::FixedNormal {
                std: s.unwrap_or(0.01),
            },
            _ => return Err(Error::Config(format!("unknown initializer {s:?}"))),
        };
        scheme.validate()
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    let scale = std / TRUNCATED_STD_2SIGMA;
    loop {
        let x: f64 = StandardNormal.sample(rng);
        if x.abs() <= 2.0 {
            return x * scale;
        }
    }
}

fn orthogonal(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, gain: f64) -> Matrix {
    let (tall, wide) = (fan_in.max(fan_out), fan_in.min(fan_out));
    let g = nalgebra::DMatrix::<f64>::from_fn(tall, wide, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Sign fix so the draw is uniform over orthogonal matrices.
    for j in 0..wide {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = Matrix::zeros(fan_in, fan_out);
    for i in 0..fan_in {
        for j in 0..fan_out {
            let v = if fan_in >= fan_out {
                q[(i, j)]
            } else {
                q[(j, i)]
            };
            out.set(i, j, gain * v);
        }
    }
    out
}

pub fn init_weights(
    scheme: InitScheme,
    fan_in: usize,
    fan_out: usize,
    seed: u64,
) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Shape(format!(
            "layer dimensions must be positive, got {fan_in}x{fan_out}"
        )));
    }
    let scheme = scheme.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = fan_in * fan_out;
    let data: Vec<f64> = match scheme {
        InitScheme::RandomUniform => (0..len).map(|_| rng.random_range(-0.05..=0.05)).collect(),
        InitScheme::XavierUniform => {
            let k = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..len).map(|_| rng.random_range(-k..=k)).collect()
        }
        InitScheme::HeNormal => {
            let std = (2.0 / fan_in as f64).sqrt();
            (0..len).map(|_| truncated_normal(&mut rng, std)).collect()
        }
        InitScheme::LecunNormal => {
            let std = (1.0 / fan_in as f64).sqrt();
            (0..len).map(|_| truncated_normal(&mut rng, std)).collect()
        }
        InitScheme::FixedNormal { std } => (0..len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                std * z
            })
            .collect::<Vec<f64>>(),
        InitScheme::Orthogonal { gain } => {
            return Ok(orthogonal(&mut rng, fan_in, fan_out, gain));
        }
    };
    Ok(Matrix::from_raw(fan_in, fan_out, data))
}
