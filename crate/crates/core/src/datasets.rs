//! Benchmark time series: generation, rescaling to `[-1, 1]` and splitting.
//!
//! Every sequence has its own sub-seed derived from the task seed and the
//! sequence index. Deterministic systems use the sub-seed to pick a starting
//! point (a burn-in length or a time offset); stochastic ones use it to draw
//! their inputs.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetId {
    Henon,
    Mg,
    Mg25,
    Mso,
    Mso3,
    Narma10,
    Narma20,
    Narma30,
    Ncc,
    Ppst,
    Ppst10,
    Pmp,
}

impl DatasetId {
    pub const ALL: [DatasetId; 12] = [
        DatasetId::Henon,
        DatasetId::Mg,
        DatasetId::Mg25,
        DatasetId::Mso,
        DatasetId::Mso3,
        DatasetId::Narma10,
        DatasetId::Narma20,
        DatasetId::Narma30,
        DatasetId::Ncc,
        DatasetId::Ppst,
        DatasetId::Ppst10,
        DatasetId::Pmp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DatasetId::Henon => "henon",
            DatasetId::Mg => "mg",
            DatasetId::Mg25 => "mg_25",
            DatasetId::Mso => "mso",
            DatasetId::Mso3 => "mso_3",
            DatasetId::Narma10 => "narma_10",
            DatasetId::Narma20 => "narma_20",
            DatasetId::Narma30 => "narma_30",
            DatasetId::Ncc => "ncc",
            DatasetId::Ppst => "ppst",
            DatasetId::Ppst10 => "ppst_10",
            DatasetId::Pmp => "pmp",
        }
    }

    /// Steps ahead for tasks whose target is a future input value.
    fn horizon(&self) -> Option<usize> {
        match self {
            DatasetId::Henon | DatasetId::Mg | DatasetId::Mso | DatasetId::Ppst | DatasetId::Pmp => {
                Some(1)
            }
            DatasetId::Mg25 => Some(25),
            DatasetId::Mso3 => Some(3),
            DatasetId::Ppst10 => Some(10),
            DatasetId::Narma10 | DatasetId::Narma20 | DatasetId::Narma30 | DatasetId::Ncc => None,
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        DatasetId::ALL
            .into_iter()
            .find(|d| d.name() == key)
            .ok_or_else(|| Error::UnknownDataset(s.to_string()))
    }
}

/// Number and length of sequences per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_sequences: usize,
    pub test_sequences: usize,
    pub validation_sequences: usize,
    pub sequence_len: usize,
    pub washout: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_sequences: 100,
            test_sequences: 1,
            validation_sequences: 1,
            sequence_len: 1100,
            washout: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenOptions {
    /// Draw the random frequency offsets of the pseudo periodic series anew
    /// at every time step instead of once per sequence.
    pub ppst_rand_per_step: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub train: Vec<Sequence>,
    pub test: Vec<Sequence>,
    pub validation: Vec<Sequence>,
    pub seed: u64,
    pub washout: usize,
}

impl Task {
    pub fn sequences(&self) -> impl Iterator<Item = &Sequence> {
        self.train.iter().chain(&self.test).chain(&self.validation)
    }
}

/// Scored indices of one sequence after removing the washout.
pub fn scored_range(len: usize, washout: usize) -> Result<Range<usize>> {
    if len <= washout {
        return Err(Error::SequenceTooShort { len, washout });
    }
    Ok(washout..len)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRanges {
    pub train: Vec<Range<usize>>,
    pub test: Vec<Range<usize>>,
    pub validation: Vec<Range<usize>>,
}

pub fn split(task: &Task, washout: usize) -> Result<SplitRanges> {
    let ranges = |seqs: &[Sequence]| -> Result<Vec<Range<usize>>> {
        seqs.iter().map(|s| scored_range(s.x.len(), washout)).collect()
    };
    Ok(SplitRanges {
        train: ranges(&task.train)?,
        test: ranges(&task.test)?,
        validation: ranges(&task.validation)?,
    })
}

pub fn generate(name: &str, spec: &SplitSpec, seed: u64) -> Result<Task> {
    generate_with(name.parse()?, spec, seed, GenOptions::default())
}

const NARMA_RETRIES: u32 = 16;

pub fn generate_with(id: DatasetId, spec: &SplitSpec, seed: u64, opts: GenOptions) -> Result<Task> {
    scored_range(spec.sequence_len, spec.washout)?;
    if spec.train_sequences == 0 || spec.test_sequences == 0 {
        return Err(Error::InvalidConfig("train and test need at least one sequence".into()));
    }
    let total = spec.train_sequences + spec.test_sequences + spec.validation_sequences;
    let raw: Vec<(Vec<f64>, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|k| raw_sequence(id, spec.sequence_len, seed, k as u64, opts))
        .collect::<Result<_>>()?;

    let (x_map, y_map) = match id.horizon() {
        Some(_) => {
            let m = Affine::fit(raw.iter().flat_map(|(x, y)| x.iter().chain(y)));
            (m, m)
        }
        None => (
            Affine::fit(raw.iter().flat_map(|(x, _)| x.iter())),
            Affine::fit(raw.iter().flat_map(|(_, y)| y.iter())),
        ),
    };
    let mut seqs = raw.into_iter().map(|(x, y)| Sequence {
        x: x.into_iter().map(|v| x_map.apply(v)).collect(),
        y: y.into_iter().map(|v| y_map.apply(v)).collect(),
    });
    let train = seqs.by_ref().take(spec.train_sequences).collect();
    let test = seqs.by_ref().take(spec.test_sequences).collect();
    let validation = seqs.collect();
    Ok(Task {
        name: id.name().to_string(),
        train,
        test,
        validation,
        seed,
        washout: spec.washout,
    })
}

/// Min-max map onto `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    lo: f64,
    hi: f64,
}

impl Affine {
    fn fit<'a>(values: impl Iterator<Item = &'a f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        Affine { lo, hi }
    }

    fn apply(&self, v: f64) -> f64 {
        if self.hi > self.lo {
            (2.0 * (v - self.lo) / (self.hi - self.lo) - 1.0).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    }
}

fn raw_sequence(
    id: DatasetId,
    len: usize,
    seed: u64,
    index: u64,
    opts: GenOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sub = derive_seed(seed, &[index]);
    let mut rng = Rng::new(sub);
    if let Some(h) = id.horizon() {
        let series = match id {
            DatasetId::Henon => {
                let burn = 100 + rng.below(10_000) as usize;
                henon(burn + len + h)[burn..].to_vec()
            }
            DatasetId::Mg | DatasetId::Mg25 => {
                let burn = 500 + rng.below(5_000) as usize;
                mackey_glass(burn + len + h)[burn..].to_vec()
            }
            DatasetId::Mso | DatasetId::Mso3 => {
                let t0 = rng.below(1_000_000);
                (0..(len + h) as u64).map(|t| mso(t0 + t)).collect()
            }
            DatasetId::Ppst | DatasetId::Ppst10 => ppst(len + h, &mut rng, opts.ppst_rand_per_step),
            _ => {
                let t0 = rng.below(1_000_000);
                (0..(len + h) as u64).map(|t| pmp(t0 + t)).collect()
            }
        };
        return Ok((series[..len].to_vec(), series[h..h + len].to_vec()));
    }
    match id {
        DatasetId::Ncc => Ok(ncc(len, &mut rng)),
        _ => {
            let kind = match id {
                DatasetId::Narma10 => Narma::Ten,
                DatasetId::Narma20 => Narma::Twenty,
                _ => Narma::Thirty,
            };
            for attempt in 0..NARMA_RETRIES {
                let mut rng = Rng::new(derive_seed(sub, &[attempt as u64]));
                let u: Vec<f64> = (0..NARMA_BURN + len).map(|_| rng.uniform_in(0.0, 0.5)).collect();
                if let Some(x) = narma(kind, &u) {
                    return Ok((u[NARMA_BURN..].to_vec(), x[NARMA_BURN + 1..].to_vec()));
                }
            }
            Err(Error::NarmaDiverged(NARMA_RETRIES))
        }
    }
}

/// `x(t+1) = 1 - 1.4 x(t)^2 + 0.3 x(t-1)` from `x(0) = x(1) = 0`.
pub fn henon(len: usize) -> Vec<f64> {
    let mut x = vec![0.0; len.max(2)];
    for t in 2..len {
        x[t] = 1.0 - 1.4 * x[t - 1] * x[t - 1] + 0.3 * x[t - 2];
    }
    x.truncate(len);
    x
}

pub const MG_BETA: f64 = 0.2;
pub const MG_GAMMA: f64 = 0.1;
pub const MG_TAU: f64 = 17.0;
pub const MG_POWER: i32 = 10;
const MG_DT: f64 = 0.1;
const MG_SUBSTEPS: usize = 10;
const MG_HISTORY: f64 = 1.2;

pub fn mackey_glass_rate(x: f64, delayed: f64) -> f64 {
    MG_BETA * delayed / (1.0 + delayed.powi(MG_POWER)) - MG_GAMMA * x
}

/// Mackey-Glass series at unit time spacing: RK4 with step 0.1 and a linearly
/// interpolated delay, constant history 1.2 before `t = 0`.
pub fn mackey_glass(len: usize) -> Vec<f64> {
    let lag = (MG_TAU / MG_DT).round() as usize;
    let steps = len * MG_SUBSTEPS;
    let mut grid = Vec::with_capacity(steps + 1);
    grid.push(MG_HISTORY);
    let delayed = |grid: &[f64], i: usize| -> f64 {
        if i >= lag {
            grid[i - lag]
        } else {
            MG_HISTORY
        }
    };
    for i in 0..steps {
        let x = grid[i];
        let d0 = delayed(&grid, i);
        let d1 = delayed(&grid, i + 1);
        let dh = 0.5 * (d0 + d1);
        let k1 = mackey_glass_rate(x, d0);
        let k2 = mackey_glass_rate(x + 0.5 * MG_DT * k1, dh);
        let k3 = mackey_glass_rate(x + 0.5 * MG_DT * k2, dh);
        let k4 = mackey_glass_rate(x + MG_DT * k3, d1);
        grid.push(x + MG_DT / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    (0..len).map(|t| grid[t * MG_SUBSTEPS]).collect()
}

pub const MSO_FREQUENCIES: [f64; 12] = [
    0.2, 0.331, 0.42, 0.51, 0.63, 0.74, 0.85, 0.97, 1.08, 1.19, 1.27, 1.32,
];

pub fn mso(t: u64) -> f64 {
    MSO_FREQUENCIES.iter().map(|f| (f * t as f64).sin()).sum()
}

pub fn pmp(t: u64) -> f64 {
    let t = t as f64;
    (t + t.sin()).sin()
}

pub fn ppst(len: usize, rng: &mut Rng, per_step: bool) -> Vec<f64> {
    let mut offsets: Vec<f64> = (3..=7).map(|i| rng.uniform_in(0.0, (1u32 << i) as f64)).collect();
    (0..len)
        .map(|t| {
            if per_step && t > 0 {
                for (o, i) in offsets.iter_mut().zip(3..=7) {
                    *o = rng.uniform_in(0.0, (1u32 << i) as f64);
                }
            }
            (3..=7)
                .zip(&offsets)
                .map(|(i, o)| {
                    let base = (1u32 << (2 + i)) as f64;
                    (2.0 * std::f64::consts::PI * (base + o) * t as f64 / 10_000.0).sin()
                        / (1u32 << i) as f64
                })
                .sum()
        })
        .collect()
}

const NCC_TAPS: [f64; 10] = [0.08, -0.12, 1.0, 0.18, -0.1, 0.09, -0.05, 0.04, 0.03, 0.01];
const NCC_SYMBOLS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Channel output for a window `u(t+2), u(t+1), ..., u(t-7)`.
pub fn ncc_output(window: &[f64; 10]) -> f64 {
    let q: f64 = NCC_TAPS.iter().zip(window).map(|(a, u)| a * u).sum();
    q + 0.036 * q * q - 0.011 * q * q * q
}

/// Input `u(t)`, target `x(t-2)`.
fn ncc(len: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let pad = 9;
    let u: Vec<f64> = (0..len + pad)
        .map(|_| NCC_SYMBOLS[rng.below(4) as usize])
        .collect();
    let y = (0..len)
        .map(|t| {
            // x(t-2) reads u(t) down to u(t-9).
            let i = t + pad;
            let mut w = [0.0; 10];
            for (k, v) in w.iter_mut().enumerate() {
                *v = u[i - k];
            }
            ncc_output(&w)
        })
        .collect();
    (u[pad..].to_vec(), y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Narma {
    Ten,
    Twenty,
    Thirty,
}

const NARMA_BURN: usize = 200;
const NARMA_LIMIT: f64 = 10.0;

/// Runs the recurrence over the inputs and returns `x(0) ..= x(len)`, or
/// `None` once `|x| > 10`. `x(t+1)` is produced from `u(t)`.
pub fn narma(kind: Narma, u: &[f64]) -> Option<Vec<f64>> {
    let order = match kind {
        Narma::Ten => 10,
        Narma::Twenty => 20,
        Narma::Thirty => 30,
    };
    let mut x = vec![0.0; u.len() + 1];
    let mut window_sum = 0.0;
    for t in 0..u.len() {
        window_sum += x[t];
        if t >= order {
            window_sum -= x[t - order];
        }
        let lagged = if t + 1 >= order { u[t + 1 - order] } else { 0.0 };
        let xt = x[t];
        let next = match kind {
            Narma::Ten => 0.3 * xt + 0.05 * xt * window_sum + 1.5 * lagged * u[t] + 0.1,
            Narma::Twenty => {
                (0.3 * xt + 0.05 * xt * window_sum + 1.5 * lagged * u[t] + 0.01).tanh() + 0.2
            }
            Narma::Thirty => 0.2 * xt + 0.004 * xt * window_sum + 1.5 * lagged * u[t] + 0.201,
        };
        if !next.is_finite() || next.abs() > NARMA_LIMIT {
            return None;
        }
        x[t + 1] = next;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn small() -> SplitSpec {
        SplitSpec {
            train_sequences: 3,
            test_sequences: 1,
            validation_sequences: 1,
            sequence_len: 300,
            washout: 100,
        }
    }

    #[test]
    fn raw_examples() {
        assert_eq!(henon(3)[2], 1.0);
        assert_eq!(pmp(0), 0.0);
        assert_eq!(mso(0), 0.0);
        let x = narma(Narma::Ten, &[0.0; 12]).unwrap();
        assert!((x[1] - 0.1).abs() < 1e-15);
        assert_eq!(mackey_glass_rate(1.0, 1.0), 0.0);
    }

    #[test]
    fn mg_is_bounded_and_aperiodic() {
        let s = mackey_glass(2000);
        assert_eq!(s[0], 1.2);
        assert!(s.iter().all(|&v| v > 0.0 && v < 1.5));
        let tail = &s[1000..];
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo > 0.5);
    }

    #[test]
    fn narma_recurrence_by_hand() {
        let u = [0.1, 0.2, 0.3, 0.4, 0.5, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.25];
        let x = narma(Narma::Ten, &u).unwrap();
        let mut h = vec![0.0f64; 13];
        for t in 0..12 {
            let s: f64 = (0..10).filter(|&i| i <= t).map(|i| h[t - i]).sum();
            let lag = if t >= 9 { u[t - 9] } else { 0.0 };
            h[t + 1] = 0.3 * h[t] + 0.05 * h[t] * s + 1.5 * lag * u[t] + 0.1;
        }
        for t in 0..13 {
            assert!((x[t] - h[t]).abs() < 1e-15, "t={t}");
        }
    }

    #[test]
    fn ncc_channel_by_hand() {
        let w = [1.0, -1.0, 3.0, -3.0, 1.0, 1.0, -1.0, 3.0, -1.0, 1.0];
        let q = 0.08 - (-0.12) + 3.0 + 0.18 * -3.0 - 0.1 + 0.09 - 0.05 * -1.0 + 0.04 * 3.0
            + 0.03 * -1.0
            + 0.01;
        let expect = q + 0.036 * q * q - 0.011 * q * q * q;
        assert!((ncc_output(&w) - expect).abs() < 1e-12);
    }

    #[test]
    fn every_dataset_is_rescaled_and_aligned() {
        for id in DatasetId::ALL {
            let task = generate_with(id, &small(), 42, GenOptions::default()).unwrap();
            assert_eq!(task.train.len(), 3);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut ylo = f64::INFINITY;
            let mut yhi = f64::NEG_INFINITY;
            for s in task.sequences() {
                assert_eq!(s.x.len(), 300);
                assert_eq!(s.y.len(), 300);
                for &v in &s.x {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                for &v in &s.y {
                    ylo = ylo.min(v);
                    yhi = yhi.max(v);
                }
                if let Some(h) = id.horizon() {
                    assert_eq!(&s.x[h..], &s.y[..300 - h], "{id}");
                }
            }
            if id.horizon().is_some() {
                lo = lo.min(ylo);
                hi = hi.max(yhi);
            } else {
                assert!((ylo + 1.0).abs() < 1e-12 && (yhi - 1.0).abs() < 1e-12, "{id}");
            }
            assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12, "{id}");
            assert_ne!(task.train[0], task.train[1], "{id}");
        }
    }

    #[test]
    fn same_seed_same_series() {
        for id in [DatasetId::Mg, DatasetId::Narma10, DatasetId::Ppst] {
            let a = generate_with(id, &small(), 5, GenOptions::default()).unwrap();
            let b = generate_with(id, &small(), 5, GenOptions::default()).unwrap();
            assert_eq!(a, b);
            let c = generate_with(id, &small(), 6, GenOptions::default()).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn ncc_target_alignment() {
        let mut rng = Rng::new(3);
        let (u, y) = ncc(50, &mut rng);
        for t in 9..50 {
            let mut w = [0.0; 10];
            for (k, v) in w.iter_mut().enumerate() {
                *v = u[t - k];
            }
            assert!((y[t] - ncc_output(&w)).abs() < 1e-12);
        }
        assert!(u.iter().all(|v| NCC_SYMBOLS.contains(v)));
    }

    #[test]
    fn split_ranges() {
        assert_eq!(scored_range(1100, 100).unwrap(), 100..1100);
        assert_eq!(scored_range(10, 0).unwrap(), 0..10);
        assert_eq!(
            scored_range(100, 100),
            Err(Error::SequenceTooShort { len: 100, washout: 100 })
        );
        let task = generate("pmp", &small(), 1).unwrap();
        let r = split(&task, 100).unwrap();
        assert_eq!(r.train, vec![100..300; 3]);
        assert!(split(&task, 300).is_err());
    }

    #[test]
    fn unknown_dataset() {
        assert_eq!(generate("mnist", &small(), 1), Err(Error::UnknownDataset("mnist".into())));
        assert_eq!("MG_25".parse::<DatasetId>().unwrap(), DatasetId::Mg25);
    }

    proptest! {
        #[test]
        fn ppst_amplitude_bound(seed in any::<u64>(), per_step in any::<bool>()) {
            let bound: f64 = (3..=7).map(|i| 0.5f64.powi(i)).sum();
            let s = ppst(400, &mut Rng::new(seed), per_step);
            prop_assert!(s.iter().all(|v| v.abs() <= bound + 1e-12));
        }

        #[test]
        fn narma20_bounded(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let u: Vec<f64> = (0..500).map(|_| rng.uniform_in(0.0, 0.5)).collect();
            let x = narma(Narma::Twenty, &u).unwrap();
            prop_assert!(x[1..].iter().all(|&v| v > -0.8 && v < 1.2));
        }
    }
}
