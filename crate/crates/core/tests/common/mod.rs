#![allow(dead_code)]

use gearlmnn::{Dataset, LabeledInstance};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// `classes` Gaussian clusters with centres spread `spread` apart.
pub fn clusters(seed: u64, classes: usize, per_class: usize, dim: usize, spread: f64) -> Dataset {
    let mut r = rng(seed);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| spread * gaussian(&mut r)).collect())
        .collect();
    let mut instances = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_class {
            let x = centre.iter().map(|m| m + gaussian(&mut r)).collect();
            instances.push(LabeledInstance::new(x, c));
        }
    }
    Dataset::new(names("f", dim), names("c", classes), instances).unwrap()
}

pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| r.random_range(-scale..scale));
    (&m + m.transpose()) * 0.5
}

/// Random PSD matrix LᵀL, optionally rank-deficient.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let l = DMatrix::from_fn(rank, n, |_, _| gaussian(r));
    l.transpose() * l
}

/// Direct (a − b)ᵀ M (a − b) via nalgebra products.
pub fn oracle_distance(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let d = nalgebra::DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y));
    (d.transpose() * m * &d)[(0, 0)]
}

/// Brute-force weighted kNN: full sort by (squared distance, index), votes
/// `1/d²`, exact matches decide outright. Returns (label, neighbors).
pub fn knn_oracle(
    m: &DMatrix<f64>,
    train: &Dataset,
    query: &[f64],
    k: usize,
) -> (usize, Vec<usize>) {
    let mut all: Vec<(f64, usize)> = train
        .instances()
        .iter()
        .enumerate()
        .map(|(i, t)| (oracle_distance(m, query, &t.x), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    let neighbors: Vec<usize> = all.iter().map(|p| p.1).collect();
    if let Some(&(_, i)) = all.iter().filter(|p| p.0 < 1e-12).min_by_key(|p| p.1) {
        return (train.instances()[i].y, neighbors);
    }
    let mut votes = vec![0.0; train.n_classes()];
    for &(d, i) in &all {
        votes[train.instances()[i].y] += 1.0 / d;
    }
    let mut best = 0;
    for c in 1..votes.len() {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    (best, neighbors)
}

/// Gaussian samples from a 64-bit LCG with Box–Muller, reproducible in any
/// language.
pub fn lcg_gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut step = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let u1 = 1.0 - step();
            let u2 = step();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

pub fn feature_fixtures() -> Vec<(&'static str, Vec<f64>)> {
    let mut impulses = vec![0.0; 256];
    for i in (0..256).step_by(32) {
        impulses[i] = 8.0;
        impulses[i + 1] = -5.0;
    }
    vec![
        ("ramp5", vec![1.0, 2.0, 3.0, 4.0, 5.0]),
        ("spike5", vec![0.0, 0.0, 0.0, 0.0, 10.0]),
        ("textbook8", vec![2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]),
        ("ramp4", vec![1.0, 2.0, 3.0, 4.0]),
        ("binary6", vec![0.0, 1.0, 0.0, 1.0, 0.0, 2.0]),
        ("mixed7", vec![3.5, -1.25, 7.0, 0.5, 2.25, -4.0, 6.75]),
        ("sine32", (0..32).map(|i| (0.37 * i as f64).sin()).collect()),
        ("gauss1000", lcg_gaussian(1000, 42)),
        ("impulses256", impulses),
        (
            "repeats10",
            vec![10.0, -3.0, 4.0, 4.0, 4.0, 8.0, -1.0, 0.0, 2.0, 4.0],
        ),
    ]
}

/// Reference features for [`feature_fixtures`], produced by
/// `tests/oracle/feature_oracle.py` (numpy/scipy) and frozen here.
pub const FEATURE_TABLE: [(&str, [f64; 13]); 10] = [
    (
        "ramp5",
        [
            3.0,
            0.0,
            3.0,
            1.03125,
            1.5811388300841898,
            2.5,
            -1.2000000000000004,
            0.0,
            4.0,
            1.0,
            5.0,
            15.0,
            5.0,
        ],
    ),
    (
        "spike5",
        [
            2.0,
            3.6514837167011076,
            0.0,
            0.078125,
            4.47213595499958,
            20.0,
            5.0,
            2.23606797749979,
            10.0,
            0.0,
            10.0,
            10.0,
            5.0,
        ],
    ),
    (
        "textbook8",
        [
            5.0,
            0.8637312927246213,
            4.5,
            4.0234375,
            2.138089935299395,
            4.571428571428571,
            0.9406249999999998,
            0.8184875533567996,
            7.0,
            2.0,
            9.0,
            40.0,
            8.0,
        ],
    ),
    (
        "ramp4",
        [
            2.5,
            0.0,
            2.5,
            1.0234375,
            1.2909944487358056,
            1.6666666666666667,
            -1.1999999999999993,
            0.0,
            3.0,
            1.0,
            4.0,
            10.0,
            4.0,
        ],
    ),
    (
        "binary6",
        [
            0.6666666666666666,
            0.7776643908280132,
            0.5,
            0.015625,
            0.816496580927726,
            0.6666666666666667,
            -0.3000000000000007,
            0.8573214099741124,
            2.0,
            0.0,
            2.0,
            4.0,
            6.0,
        ],
    ),
    (
        "mixed7",
        [
            2.107142857142857,
            4.44068044978952,
            2.25,
            -3.9140625,
            4.053951628907751,
            16.43452380952381,
            -0.9659031255046324,
            -0.17456507678907926,
            11.0,
            -4.0,
            7.0,
            14.75,
            7.0,
        ],
    ),
    (
        "sine32",
        [
            0.03145217452503561,
            0.6926152046730775,
            0.09035206272760186,
            -0.9796795488901802,
            0.7270767905872914,
            0.5286406594107159,
            -1.5509683022662473,
            -0.108486365162469,
            1.9917154405097632,
            -0.9952398257691627,
            0.9964756147406005,
            1.0064695848011396,
            32.0,
        ],
    ),
    (
        "gauss1000",
        [
            -0.0420789454103108,
            1.003204915469117,
            -0.008985366165815899,
            0.6509529149782636,
            1.0027027663776866,
            1.0054128377014657,
            -0.07395673955062732,
            -0.06728398904141362,
            6.168649498786026,
            -3.156260447553737,
            3.0123890512322893,
            -42.0789454103108,
            1000.0,
        ],
    ),
    (
        "impulses256",
        [
            0.09375,
            1.6714704118550188,
            0.0,
            -0.0234375,
            1.6683325008322931,
            2.783333333333333,
            15.955775844928787,
            2.465145563441784,
            13.0,
            -5.0,
            8.0,
            24.0,
            256.0,
        ],
    ),
    (
        "repeats10",
        [
            3.2,
            4.062392189711661,
            4.0,
            4.0078125,
            3.9384147967311813,
            15.511111111111111,
            -0.19694595517043512,
            0.18224719335700115,
            13.0,
            -3.0,
            10.0,
            32.0,
            10.0,
        ],
    ),
];

/// Synthetic windows → 13-feature dataset.
pub fn synthetic_features(config: &gearlmnn::eval::SynthConfig) -> Dataset {
    let exec = gearlmnn::Execution::Parallel;
    let synth = gearlmnn::eval::generate_dataset(config, exec).unwrap();
    let features = gearlmnn::io::extract_all(&synth.signals, exec).unwrap();
    gearlmnn::io::feature_dataset(&features, &synth.labels_as_names()).unwrap()
}
