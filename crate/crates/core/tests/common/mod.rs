//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redlens::data::{write_idx_images, write_idx_labels};
use redlens::nn::{softmax_xent, MlpModel};
use redlens::{Linkage, Matrix, SimilarityMatrix};

/// Linkage value computed straight from the definition.
pub fn naive_linkage(omega: &[Vec<f64>], a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let cross: Vec<f64> = a
        .iter()
        .flat_map(|&i| b.iter().map(move |&j| omega[i][j]))
        .collect();
    match linkage {
        Linkage::GroupAverage => cross.iter().sum::<f64>() / cross.len() as f64,
        Linkage::SingleLink => cross.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        Linkage::CompleteLink => cross.iter().cloned().fold(f64::INFINITY, f64::min),
    }
}

/// Recompute-everything agglomerative clustering: each step scores every
/// cluster pair from scratch and merges the best one while it is strictly
/// above `tau`. Ties go to the pair with the smallest (min member, min
/// member). Returns clusters sorted by smallest member.
pub fn naive_agglomerate(omega: &[Vec<f64>], tau: f64, linkage: Linkage) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..omega.len()).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let s = naive_linkage(omega, &clusters[x], &clusters[y], linkage);
                if best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, x, y));
                }
            }
        }
        match best {
            Some((s, x, y)) if s > tau => {
                let moved = clusters.remove(y);
                clusters[x].extend(moved);
                clusters[x].sort_unstable();
            }
            _ => break,
        }
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Symmetric matrix with unit diagonal and distinct off-diagonal values.
/// Even seeds give Gram matrices of random unit vectors in a low
/// dimension (many high similarities); odd seeds give uniform entries in
/// [-1, 1].
pub fn random_similarity(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = vec![vec![0.0; n]; n];
        if seed.is_multiple_of(2) {
            let dim = rng.random_range(2..=4);
            let vecs: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / norm).collect()
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                    m[i][j] = if i == j { 1.0 } else { d.clamp(-1.0, 1.0) };
                }
            }
            for i in 0..n {
                for j in 0..i {
                    m[i][j] = m[j][i];
                }
            }
        } else {
            for i in 0..n {
                m[i][i] = 1.0;
                for j in i + 1..n {
                    let v = rng.random_range(-1.0..1.0);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
        }
        let mut off: Vec<f64> = (0..n)
            .flat_map(|i| {
                (i + 1..n).map({
                    let m = &m;
                    move |j| m[i][j]
                })
            })
            .collect();
        off.sort_by(f64::total_cmp);
        if off.windows(2).all(|w| w[0] != w[1]) {
            return m;
        }
    }
}

pub fn to_similarity(m: &[Vec<f64>]) -> SimilarityMatrix {
    SimilarityMatrix::from_matrix(Matrix::from_rows(m).unwrap()).unwrap()
}

/// Largest relative deviation between analytic and central-difference
/// gradients over every weight and bias. Relative error is
/// `|a - n| / max(|a|, |n|, floor)`.
pub fn gradcheck(model: &MlpModel, x: &Matrix, labels: &[usize], h: f64, floor: f64) -> f64 {
    let (logits, cache) = model.forward(x).unwrap();
    let (_, dlogits) = softmax_xent(&logits, labels).unwrap();
    let grads = model.backward(&cache, &dlogits).unwrap();
    let loss = |m: &MlpModel| softmax_xent(&m.forward(x).unwrap().0, labels).unwrap().0;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(floor);

    let mut worst = 0.0f64;
    let mut probe = model.clone();
    for l in 0..model.layers().len() {
        let (rows, cols) = model.layers()[l].weights.shape();
        for r in 0..rows {
            for c in 0..cols {
                let w0 = model.layers()[l].weights.get(r, c);
                probe.layers_mut()[l].weights.set(r, c, w0 + h);
                let up = loss(&probe);
                probe.layers_mut()[l].weights.set(r, c, w0 - h);
                let down = loss(&probe);
                probe.layers_mut()[l].weights.set(r, c, w0);
                worst = worst.max(rel(
                    grads.layers[l].weights.get(r, c),
                    (up - down) / (2.0 * h),
                ));
            }
        }
        for k in 0..cols {
            let b0 = model.layers()[l].bias[k];
            probe.layers_mut()[l].bias[k] = b0 + h;
            let up = loss(&probe);
            probe.layers_mut()[l].bias[k] = b0 - h;
            let down = loss(&probe);
            probe.layers_mut()[l].bias[k] = b0;
            worst = worst.max(rel(grads.layers[l].bias[k], (up - down) / (2.0 * h)));
        }
    }
    worst
}

/// Random model with non-zero biases, plus a batch and labels.
pub fn gradcheck_fixture(
    activation: redlens::nn::Activation,
    seed: u64,
) -> (MlpModel, Matrix, Vec<usize>) {
    let (n_in, widths, classes, batch) = (10, [8, 7, 6], 4, 16);
    let mut model = MlpModel::init(
        n_in,
        &widths,
        classes,
        activation,
        redlens::nn::InitScheme::XavierUniform,
        seed,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    for layer in model.layers_mut() {
        for b in &mut layer.bias {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let data = (0..batch * n_in)
        .map(|_| rng.random_range(-1.5..1.5))
        .collect();
    let x = Matrix::from_vec(batch, n_in, data).unwrap();
    let labels = (0..batch).map(|_| rng.random_range(0..classes)).collect();
    (model, x, labels)
}

/// Writes a tiny MNIST-shaped directory: `n_train` / `n_test` 4x4 images in
/// three linearly separable classes.
pub fn write_tiny_mnist(dir: &Path, n_train: usize, n_test: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut make = |n: usize| {
        let mut pixels = Vec::with_capacity(n * 16);
        let mut labels = Vec::with_capacity(n);
        for k in 0..n {
            let class = (k % 3) as u8;
            for p in 0..16 {
                let hot = p % 3 == class as usize;
                let base: u8 = if hot { 200 } else { 20 };
                pixels.push(base.saturating_add(rng.random_range(0..40)));
            }
            labels.push(class);
        }
        (pixels, labels)
    };
    let (tp, tl) = make(n_train);
    let (ep, el) = make(n_test);
    write_idx_images(dir.join("train-images-idx3-ubyte"), 4, 4, &tp).unwrap();
    write_idx_labels(dir.join("train-labels-idx1-ubyte"), &tl).unwrap();
    write_idx_images(dir.join("t10k-images-idx3-ubyte"), 4, 4, &ep).unwrap();
    write_idx_labels(dir.join("t10k-labels-idx1-ubyte"), &el).unwrap();
}
