//! Reservoir model: input transformation, quantization, compartment mapping,
//! encoding, CA iteration, ridge readout and error metrics.

use std::fmt;
use std::str::FromStr;

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::prelude::Solve;
use faer::{Accum, Mat, Par, Side};
use serde::{Deserialize, Serialize};

use crate::datasets::{scored_range, Sequence, Task};
use crate::error::{Error, Result};
use crate::lattice::{Configuration, LinearRule, Stepper};
use crate::rng::Rng;

/// Floating to fixed point conversion applied before quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transformation {
    Complement,
    Gray,
    ScaleOffset,
    SignValue,
}

impl Transformation {
    pub const ALL: [Transformation; 4] = [
        Transformation::Complement,
        Transformation::Gray,
        Transformation::ScaleOffset,
        Transformation::SignValue,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Transformation::Complement => "complement",
            Transformation::Gray => "gray",
            Transformation::ScaleOffset => "scale_offset",
            Transformation::SignValue => "sign_value",
        }
    }
}

/// How a quantized input is combined with the cell it lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Replacement,
    Xor,
    Additive,
    Subtractive,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [
        Encoding::Replacement,
        Encoding::Xor,
        Encoding::Additive,
        Encoding::Subtractive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Encoding::Replacement => "replacement",
            Encoding::Xor => "xor",
            Encoding::Additive => "additive",
            Encoding::Subtractive => "subtractive",
        }
    }
}

macro_rules! name_parsing {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown {} '{}'", $what, s)))
            }
        }
    };
}

name_parsing!(Transformation, "transformation");
name_parsing!(Encoding, "encoding");

/// Maps `x` in `[-1, 1]` to a real in `[0, m-1]`.
pub fn transform(x: f64, method: Transformation, m: u32) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InputOutOfRange(x));
    }
    Ok(transform_unchecked(x, method, m))
}

/// Like [`transform`] but clamps `x` into `[-1, 1]` first.
pub fn transform_clamped(x: f64, method: Transformation, m: u32) -> f64 {
    transform_unchecked(x.clamp(-1.0, 1.0), method, m)
}

fn transform_unchecked(x: f64, method: Transformation, m: u32) -> f64 {
    let shifted = match method {
        Transformation::Complement => {
            if x >= 0.0 {
                x
            } else {
                2.0 + x
            }
        }
        Transformation::Gray | Transformation::ScaleOffset => x + 1.0,
        Transformation::SignValue => {
            if x >= 0.0 {
                x
            } else {
                -x + 1.0
            }
        }
    };
    shifted * (m - 1) as f64 / 2.0
}

/// Rounds to the nearest residue with bins `[k - 0.5, k + 0.5)`, optionally
/// followed by a Gray code step.
pub fn quantize(x: f64, m: u32, gray: bool) -> u8 {
    let q = ((x + 0.5).floor().max(0.0) as u32).min(m - 1);
    if gray {
        ((q ^ (q >> 1)) % m) as u8
    } else {
        q as u8
    }
}

/// One input cell per compartment, fixed for the lifetime of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    indices: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Mapping {
    /// Draws one cell per compartment with [`Rng::below`].
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        check_lattice(rows, cols)?;
        let mut rng = Rng::new(seed);
        let indices = (0..rows)
            .map(|c| c * cols + rng.below(cols as u64) as usize)
            .collect();
        Ok(Mapping {
            indices,
            rows,
            cols,
        })
    }

    pub fn from_indices(indices: Vec<usize>, rows: usize, cols: usize) -> Result<Self> {
        check_lattice(rows, cols)?;
        if indices.len() != rows {
            return Err(Error::LengthMismatch(indices.len(), rows));
        }
        for (c, &i) in indices.iter().enumerate() {
            if i / cols != c {
                return Err(Error::InvalidConfig(format!(
                    "index {i} is not inside compartment {c}"
                )));
            }
        }
        Ok(Mapping {
            indices,
            rows,
            cols,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn lattice_len(&self) -> usize {
        self.rows * self.cols
    }
}

pub fn make_mapping(rows: usize, cols: usize, seed: u64) -> Result<Mapping> {
    Mapping::random(rows, cols, seed)
}

fn check_lattice(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidConfig(format!(
            "lattice {rows}x{cols} has no cells"
        )));
    }
    Ok(())
}

fn encode_cell(cell: u8, xq: u8, method: Encoding, m: u32) -> u8 {
    let (c, x) = (cell as u32, xq as u32);
    (match method {
        Encoding::Replacement => x,
        Encoding::Xor => (x ^ c) % m,
        Encoding::Additive => (x + c) % m,
        Encoding::Subtractive => x.abs_diff(c),
    }) as u8
}

/// Writes `xq` into the mapped cells of `cells` in place.
pub fn encode_in_place(cells: &mut [u8], mapping: &Mapping, xq: u8, method: Encoding, m: u32) {
    for &i in mapping.indices() {
        cells[i] = encode_cell(cells[i], xq, method, m);
    }
}

pub fn encode(
    state: &Configuration,
    mapping: &Mapping,
    xq: u8,
    method: Encoding,
) -> Result<Configuration> {
    if state.len() != mapping.lattice_len() {
        return Err(Error::LengthMismatch(state.len(), mapping.lattice_len()));
    }
    if xq as u32 >= state.m() {
        return Err(Error::CellOutOfRange {
            value: xq as u32,
            m: state.m(),
        });
    }
    let mut out = state.clone();
    encode_in_place(out.cells_mut(), mapping, xq, method, state.m());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(with = "rule_text")]
    pub rule: LinearRule,
    /// Number of compartments.
    pub rows: usize,
    /// Cells per compartment.
    pub cols: usize,
    pub iterations: usize,
    pub transformation: Transformation,
    pub encoding: Encoding,
    pub mapping_seed: u64,
    pub ridge_alpha: f64,
    pub input_skip: bool,
    /// Clamp inputs into `[-1, 1]` instead of rejecting them.
    pub clamp_input: bool,
    pub washout: usize,
}

mod rule_text {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::lattice::LinearRule;
    use crate::modring::Modulus;

    #[derive(Serialize, Deserialize)]
    struct Text {
        m: u32,
        w: String,
    }

    pub fn serialize<S: Serializer>(rule: &LinearRule, s: S) -> Result<S::Ok, S::Error> {
        Text {
            m: rule.m(),
            w: rule.to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<LinearRule, D::Error> {
        let t = Text::deserialize(d)?;
        let md = Modulus::new(t.m).map_err(serde::de::Error::custom)?;
        LinearRule::parse(md, &t.w).map_err(serde::de::Error::custom)
    }
}

impl ModelConfig {
    pub fn new(rule: LinearRule) -> Self {
        ModelConfig {
            rule,
            rows: 16,
            cols: 32,
            iterations: 4,
            transformation: Transformation::ScaleOffset,
            encoding: Encoding::Replacement,
            mapping_seed: 0,
            ridge_alpha: 1.0,
            input_skip: false,
            clamp_input: false,
            washout: 100,
        }
    }

    pub fn lattice_len(&self) -> usize {
        self.rows * self.cols
    }

    /// CA feature columns, `N * I`.
    pub fn feature_width(&self) -> usize {
        self.lattice_len() * self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        check_lattice(self.rows, self.cols)?;
        if self.lattice_len() < self.rule.neighborhood() {
            return Err(Error::LatticeTooShort {
                len: self.lattice_len(),
                neighborhood: self.rule.neighborhood(),
            });
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be positive".into()));
        }
        if !(self.ridge_alpha >= 0.0) || !self.ridge_alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge alpha must be a finite nonnegative number, got {}",
                self.ridge_alpha
            )));
        }
        Ok(())
    }
}

/// A running reservoir: carries the lattice state between samples.
pub struct Reservoir<'a> {
    mapping: &'a Mapping,
    stepper: Stepper,
    state: Vec<u8>,
    m: u32,
    iterations: usize,
    transformation: Transformation,
    encoding: Encoding,
    clamp: bool,
}

impl<'a> Reservoir<'a> {
    pub fn new(cfg: &ModelConfig, mapping: &'a Mapping) -> Result<Self> {
        cfg.validate()?;
        if mapping.lattice_len() != cfg.lattice_len() {
            return Err(Error::LengthMismatch(mapping.lattice_len(), cfg.lattice_len()));
        }
        Ok(Reservoir {
            mapping,
            stepper: Stepper::new(&cfg.rule, cfg.lattice_len())?,
            state: vec![0; cfg.lattice_len()],
            m: cfg.rule.m(),
            iterations: cfg.iterations,
            transformation: cfg.transformation,
            encoding: cfg.encoding,
            clamp: cfg.clamp_input,
        })
    }

    pub fn state(&self) -> &[u8] {
        &self.state
    }

    pub fn set_state(&mut self, cells: &[u8]) -> Result<()> {
        if cells.len() != self.state.len() {
            return Err(Error::LengthMismatch(cells.len(), self.state.len()));
        }
        if let Some(&v) = cells.iter().find(|&&v| v as u32 >= self.m) {
            return Err(Error::CellOutOfRange {
                value: v as u32,
                m: self.m,
            });
        }
        self.state.copy_from_slice(cells);
        Ok(())
    }

    pub fn reset(&mut self) {
        self.state.fill(0);
    }

    /// Quantizes one sample, feeds it and writes the `N * I` feature cells
    /// into `row`.
    pub fn feed(&mut self, x: f64, row: &mut [u8]) -> Result<()> {
        let xt = if self.clamp {
            transform_clamped(x, self.transformation, self.m)
        } else {
            transform(x, self.transformation, self.m)?
        };
        let xq = quantize(xt, self.m, self.transformation == Transformation::Gray);
        self.feed_quantized(xq, row);
        Ok(())
    }

    /// Feeds an already quantized input.
    pub fn feed_quantized(&mut self, xq: u8, row: &mut [u8]) {
        let n = self.state.len();
        debug_assert_eq!(row.len(), n * self.iterations);
        encode_in_place(&mut self.state, self.mapping, xq, self.encoding, self.m);
        self.stepper.step_into(&self.state, &mut row[..n]);
        for k in 1..self.iterations {
            let (done, rest) = row.split_at_mut(k * n);
            self.stepper.step_into(&done[(k - 1) * n..], &mut rest[..n]);
        }
        self.state.copy_from_slice(&row[(self.iterations - 1) * n..]);
    }
}

/// Feature rows `[s1 .. sI]` for every sample of `x`, starting from the
/// all-zero lattice.
pub fn reservoir_features(x: &[f64], cfg: &ModelConfig, mapping: &Mapping) -> Result<Vec<Vec<u8>>> {
    let mut res = Reservoir::new(cfg, mapping)?;
    let width = cfg.feature_width();
    x.iter()
        .map(|&v| {
            let mut row = vec![0u8; width];
            res.feed(v, &mut row)?;
            Ok(row)
        })
        .collect()
}

/// Trained linear readout. `weights[o]` holds one coefficient per input
/// column for output `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    pub weights: Vec<Vec<f64>>,
}

impl ReadoutModel {
    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(row).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Solves `(G + alpha J) U = B` where `J` is the identity with a zero at the
/// unpenalized column.
fn solve_normal(mut g: Mat<f64>, b: Mat<f64>, alpha: f64, free: Option<usize>) -> Result<Mat<f64>> {
    let p = g.nrows();
    for i in 0..p {
        if Some(i) != free {
            g[(i, i)] += alpha;
        }
    }
    let llt = g.llt(Side::Lower).map_err(|_| Error::RankDeficient)?;
    if alpha == 0.0 {
        let l = llt.L();
        let diag: Vec<f64> = (0..p).map(|i| l[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        if diag.iter().any(|&d| d <= max * 1e-7) {
            return Err(Error::RankDeficient);
        }
    }
    let u = llt.solve(&b);
    if u.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::RankDeficient);
    }
    Ok(u)
}

/// Ridge regression on an explicit design matrix. `bias_col` names the column
/// of ones, which is left unpenalized.
pub fn train_readout(
    r: &[Vec<f64>],
    y: &[Vec<f64>],
    alpha: f64,
    bias_col: Option<usize>,
) -> Result<ReadoutModel> {
    if r.is_empty() {
        return Err(Error::EmptyInput);
    }
    if r.len() != y.len() {
        return Err(Error::LengthMismatch(r.len(), y.len()));
    }
    let cols = r[0].len();
    let outs = y[0].len();
    if r.iter().any(|row| row.len() != cols) || y.iter().any(|row| row.len() != outs) {
        return Err(Error::InvalidConfig("ragged design matrix".into()));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidConfig(format!("negative ridge alpha {alpha}")));
    }
    let rm = Mat::from_fn(r.len(), cols, |i, j| r[i][j]);
    let ym = Mat::from_fn(y.len(), outs, |i, j| y[i][j]);
    let g = rm.transpose() * &rm;
    let b = rm.transpose() * &ym;
    let u = solve_normal(g, b, alpha, bias_col)?;
    Ok(ReadoutModel {
        weights: (0..outs).map(|o| (0..cols).map(|j| u[(j, o)]).collect()).collect(),
    })
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(pred.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / pred.len() as f64)
}

/// Population variance.
pub fn variance(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Ok(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n)
}

pub fn nmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let e = mse(pred, truth)?;
    let var = variance(truth)?;
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(e / var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub mse: f64,
    pub nmse: f64,
}

impl EvalResult {
    pub fn from_predictions(pred: &[f64], truth: &[f64]) -> Result<Self> {
        Ok(EvalResult {
            mse: mse(pred, truth)?,
            nmse: nmse(pred, truth)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub train: EvalResult,
    pub test: EvalResult,
    pub validation: Option<EvalResult>,
    pub readout: ReadoutModel,
}

/// Largest number of rows whose products can be summed exactly in `f32`.
fn exact_chunk_rows(m: u32) -> usize {
    let top = ((m - 1) as usize).pow(2).max(1);
    ((1usize << 24) / top).clamp(1, 1024)
}

/// Accumulates the normal equations of the pooled training rows.
///
/// CA cells are integers, so their Gram block is computed in `f32` chunks
/// small enough to stay exact and summed into `f64`. The result does not
/// depend on how the matrix product is scheduled.
struct NormalEquations {
    width: usize,
    skip: bool,
    chunk: Mat<f32>,
    filled: usize,
    partial: Mat<f32>,
    gram: Mat<f64>,
    col_sum: Vec<f64>,
    cross_x: Vec<f64>,
    cross_y: Vec<f64>,
    n: f64,
    sum_x: f64,
    sum_xx: f64,
    sum_y: f64,
    sum_yy: f64,
    sum_xy: f64,
}

impl NormalEquations {
    fn new(width: usize, m: u32, skip: bool) -> Self {
        let rows = exact_chunk_rows(m);
        NormalEquations {
            width,
            skip,
            chunk: Mat::zeros(width, rows),
            filled: 0,
            partial: Mat::zeros(width, width),
            gram: Mat::zeros(width, width),
            col_sum: vec![0.0; width],
            cross_x: vec![0.0; width],
            cross_y: vec![0.0; width],
            n: 0.0,
            sum_x: 0.0,
            sum_xx: 0.0,
            sum_y: 0.0,
            sum_yy: 0.0,
            sum_xy: 0.0,
        }
    }

    fn push(&mut self, row: &[u8], x: f64, y: f64) {
        let col = self.chunk.col_as_slice_mut(self.filled);
        for (c, &v) in col.iter_mut().zip(row) {
            *c = v as f32;
        }
        for (j, &v) in row.iter().enumerate() {
            let v = v as f64;
            self.col_sum[j] += v;
            self.cross_y[j] += v * y;
        }
        if self.skip {
            for (j, &v) in row.iter().enumerate() {
                self.cross_x[j] += v as f64 * x;
            }
        }
        self.n += 1.0;
        self.sum_x += x;
        self.sum_xx += x * x;
        self.sum_y += y;
        self.sum_yy += y * y;
        self.sum_xy += x * y;
        self.filled += 1;
        if self.filled == self.chunk.ncols() {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.filled == 0 {
            return;
        }
        let block = self.chunk.get(.., ..self.filled);
        triangular::matmul(
            self.partial.as_mut(),
            BlockStructure::TriangularLower,
            Accum::Replace,
            block,
            BlockStructure::Rectangular,
            block.transpose(),
            BlockStructure::Rectangular,
            1.0f32,
            Par::Seq,
        );
        for j in 0..self.width {
            for i in j..self.width {
                self.gram[(i, j)] += self.partial[(i, j)] as f64;
            }
        }
        self.filled = 0;
    }

    /// Returns the full normal matrix, the right-hand side and `y'y`.
    /// Column order: CA cells, bias, optional raw input.
    fn finish(mut self) -> (Mat<f64>, Mat<f64>, f64) {
        self.flush();
        let d = self.width;
        let p = d + 1 + self.skip as usize;
        let mut g = Mat::zeros(p, p);
        for j in 0..d {
            for i in j..d {
                g[(i, j)] = self.gram[(i, j)];
                g[(j, i)] = self.gram[(i, j)];
            }
            g[(d, j)] = self.col_sum[j];
            g[(j, d)] = self.col_sum[j];
        }
        g[(d, d)] = self.n;
        let mut b = Mat::zeros(p, 1);
        for j in 0..d {
            b[(j, 0)] = self.cross_y[j];
        }
        b[(d, 0)] = self.sum_y;
        if self.skip {
            let s = d + 1;
            for j in 0..d {
                g[(s, j)] = self.cross_x[j];
                g[(j, s)] = self.cross_x[j];
            }
            g[(s, d)] = self.sum_x;
            g[(d, s)] = self.sum_x;
            g[(s, s)] = self.sum_xx;
            b[(s, 0)] = self.sum_xy;
        }
        (g, b, self.sum_yy)
    }
}

fn predict_row(w: &[f64], row: &[u8], x: f64, skip: bool) -> f64 {
    let d = row.len();
    let mut acc = w[d];
    for (a, &v) in w.iter().zip(row) {
        acc += a * v as f64;
    }
    if skip {
        acc += w[d + 1] * x;
    }
    acc
}

/// Runs each sequence through a fresh reservoir and scores the rows after the
/// washout.
fn score(
    cfg: &ModelConfig,
    mapping: &Mapping,
    seqs: &[Sequence],
    w: &[f64],
) -> Result<EvalResult> {
    let mut res = Reservoir::new(cfg, mapping)?;
    let mut row = vec![0u8; cfg.feature_width()];
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for s in seqs {
        let range = scored_range(s.x.len(), cfg.washout)?;
        res.reset();
        for t in 0..s.x.len() {
            res.feed(s.x[t], &mut row)?;
            if range.contains(&t) {
                pred.push(predict_row(w, &row, s.x[t], cfg.input_skip));
                truth.push(s.y[t]);
            }
        }
    }
    EvalResult::from_predictions(&pred, &truth)
}

/// Trains the readout on all training sequences and reports errors on each
/// split.
pub fn evaluate(cfg: &ModelConfig, task: &Task) -> Result<Evaluation> {
    cfg.validate()?;
    if task.train.is_empty() || task.test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mapping = Mapping::random(cfg.rows, cfg.cols, cfg.mapping_seed)?;
    let mut res = Reservoir::new(cfg, &mapping)?;
    let width = cfg.feature_width();
    let mut acc = NormalEquations::new(width, cfg.rule.m(), cfg.input_skip);
    let mut row = vec![0u8; width];
    for s in &task.train {
        if s.x.len() != s.y.len() {
            return Err(Error::LengthMismatch(s.x.len(), s.y.len()));
        }
        let range = scored_range(s.x.len(), cfg.washout)?;
        res.reset();
        for t in 0..s.x.len() {
            res.feed(s.x[t], &mut row)?;
            if range.contains(&t) {
                acc.push(&row, s.x[t], s.y[t]);
            }
        }
    }
    let n = acc.n;
    let (mean_y, mean_yy) = (acc.sum_y / n, acc.sum_yy / n);
    let (g, b, yy) = acc.finish();
    let u = solve_normal(g.clone(), b.clone(), cfg.ridge_alpha, Some(width))?;

    // Training error from the normal equations: |y - Ru|^2 = y'y - 2u'b + u'Gu.
    let gu = &g * &u;
    let ub: f64 = (0..u.nrows()).map(|i| u[(i, 0)] * b[(i, 0)]).sum();
    let ugu: f64 = (0..u.nrows()).map(|i| u[(i, 0)] * gu[(i, 0)]).sum();
    let train_mse = ((yy - 2.0 * ub + ugu) / n).max(0.0);
    let train_var = mean_yy - mean_y * mean_y;
    if train_var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let train = EvalResult {
        mse: train_mse,
        nmse: train_mse / train_var,
    };

    let w: Vec<f64> = (0..u.nrows()).map(|i| u[(i, 0)]).collect();
    let test = score(cfg, &mapping, &task.test, &w)?;
    let validation = if task.validation.is_empty() {
        None
    } else {
        Some(score(cfg, &mapping, &task.validation, &w)?)
    };
    Ok(Evaluation {
        train,
        test,
        validation,
        readout: ReadoutModel { weights: vec![w] },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::factorize;

    fn rule(m: u32, w: &[u32]) -> LinearRule {
        LinearRule::new(factorize(m).unwrap(), w.to_vec()).unwrap()
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform(-1.0, Transformation::ScaleOffset, 4).unwrap(), 0.0);
        assert_eq!(transform(1.0, Transformation::ScaleOffset, 8).unwrap(), 7.0);
        assert!((transform(-0.5, Transformation::Complement, 4).unwrap() - 2.25).abs() < 1e-12);
        assert_eq!(transform(0.5, Transformation::SignValue, 3).unwrap(), 0.5);
        assert_eq!(transform(-0.5, Transformation::SignValue, 3).unwrap(), 1.5);
        assert_eq!(transform(1.5, Transformation::Gray, 4), Err(Error::InputOutOfRange(1.5)));
        assert_eq!(transform_clamped(1.5, Transformation::ScaleOffset, 4), 3.0);
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(2.25, 4, false), 2);
        assert_eq!(quantize(0.49, 4, false), 0);
        assert_eq!(quantize(0.5, 4, false), 1);
        assert_eq!(quantize(3.0, 4, false), 3);
        assert_eq!(quantize(2.0, 4, true), 3);
        assert_eq!(quantize(4.0, 5, true), 1);
    }

    #[test]
    fn mapping_examples() {
        let m = make_mapping(3, 4, 11).unwrap();
        assert_eq!(m.indices().len(), 3);
        for (c, &i) in m.indices().iter().enumerate() {
            assert!((c * 4..(c + 1) * 4).contains(&i));
        }
        assert_eq!(make_mapping(1, 1, 99).unwrap().indices(), &[0]);
        assert_eq!(make_mapping(16, 32, 5).unwrap(), make_mapping(16, 32, 5).unwrap());
        assert!(make_mapping(0, 3, 1).is_err());
        assert!(Mapping::from_indices(vec![2, 3, 9], 3, 4).is_err());
    }

    #[test]
    fn mapping_matches_documented_draws() {
        // Seed 0: first draw 0xE220A8397B1DCDAF, (x * 32) >> 64 = 28.
        let m = make_mapping(2, 32, 0).unwrap();
        assert_eq!(m.indices()[0], 28);
        // Second draw 0x6E789E6AA1B965F4 gives 13, offset by one compartment.
        assert_eq!(m.indices()[1], 32 + 13);
    }

    #[test]
    fn encode_examples() {
        let map = Mapping::from_indices(vec![2, 4, 9], 3, 4).unwrap();
        let s = Configuration::new(vec![0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1], 2).unwrap();
        let e = encode(&s, &map, 1, Encoding::Xor).unwrap();
        assert_eq!(e.to_vec(), [0, 1, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1]);

        let map = Mapping::from_indices(vec![0], 1, 2).unwrap();
        let s = Configuration::new(vec![1, 2], 4).unwrap();
        assert_eq!(encode(&s, &map, 3, Encoding::Replacement).unwrap().to_vec(), [3, 2]);
        let s = Configuration::new(vec![3, 0], 4).unwrap();
        assert_eq!(encode(&s, &map, 1, Encoding::Subtractive).unwrap().to_vec(), [2, 0]);
        assert_eq!(encode(&s, &map, 2, Encoding::Additive).unwrap().to_vec(), [1, 0]);
    }

    #[test]
    fn worked_example_features() {
        let mut cfg = ModelConfig::new(rule(2, &[1, 0, 1]));
        cfg.rows = 3;
        cfg.cols = 4;
        cfg.encoding = Encoding::Xor;
        let map = Mapping::from_indices(vec![2, 4, 9], 3, 4).unwrap();
        let mut res = Reservoir::new(&cfg, &map).unwrap();
        res.set_state(&[0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1]).unwrap();
        let mut row = vec![0u8; 48];
        res.feed(1.0, &mut row).unwrap();
        let expect: [[u8; 12]; 4] = [
            [0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0, 1],
            [0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0],
            [1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0],
            [0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0],
        ];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(&row[k * 12..(k + 1) * 12], e, "step {}", k + 1);
        }
        assert_eq!(res.state(), &expect[3]);
    }

    #[test]
    fn identity_rule_constant_input() {
        let mut cfg = ModelConfig::new(rule(4, &[0, 1, 0]));
        cfg.rows = 2;
        cfg.cols = 3;
        cfg.iterations = 2;
        let map = make_mapping(2, 3, 1).unwrap();
        let rows = reservoir_features(&[0.3; 6], &cfg, &map).unwrap();
        assert!(rows.windows(2).all(|w| w[0] == w[1]));
        assert!(reservoir_features(&[], &cfg, &map).unwrap().is_empty());
    }

    #[test]
    fn replacement_overwrites_mapped_cells() {
        let mut cfg = ModelConfig::new(rule(4, &[1, 2, 3]));
        cfg.rows = 2;
        cfg.cols = 4;
        cfg.iterations = 1;
        let map = make_mapping(2, 4, 3).unwrap();
        let mut res = Reservoir::new(&cfg, &map).unwrap();
        let mut row = vec![0u8; 8];
        for &x in &[0.2, -0.7, 0.9] {
            res.feed(x, &mut row).unwrap();
        }
        let before = res.state().to_vec();
        let mut other = before.clone();
        for &i in map.indices() {
            other[i] = (other[i] + 1) % 4;
        }
        let mut row2 = vec![0u8; 8];
        res.feed(0.4, &mut row).unwrap();
        res.set_state(&other).unwrap();
        res.feed(0.4, &mut row2).unwrap();
        assert_eq!(row, row2);
    }

    #[test]
    fn ridge_examples() {
        let r = vec![vec![1.0, 1.0], vec![2.0, 1.0]];
        let y = vec![vec![1.0], vec![2.0]];
        let u = train_readout(&r, &y, 0.0, Some(1)).unwrap();
        assert!((u.weights[0][0] - 1.0).abs() < 1e-12);
        assert!(u.weights[0][1].abs() < 1e-12);

        let r: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i % 7) as f64, 1.0]).collect();
        let y: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 5) as f64]).collect();
        let u = train_readout(&r, &y, 1e9, Some(2)).unwrap();
        let mean = y.iter().map(|v| v[0]).sum::<f64>() / 20.0;
        assert!(u.weights[0][0].abs() < 1e-3 && u.weights[0][1].abs() < 1e-3);
        assert!((u.weights[0][2] - mean).abs() < 1e-3);

        let r = vec![vec![1.0, 2.0, 1.0], vec![2.0, 4.0, 1.0], vec![3.0, 6.0, 1.0]];
        let y = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(train_readout(&r, &y, 0.0, Some(2)), Err(Error::RankDeficient));
    }

    #[test]
    fn metric_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(nmse(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(mse(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(nmse(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(nmse(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::ZeroVariance));
        assert_eq!(mse(&[], &[]), Err(Error::EmptyInput));
    }

    #[test]
    fn exact_chunks() {
        assert_eq!(exact_chunk_rows(2), 1024);
        assert_eq!(exact_chunk_rows(256), (1 << 24) / (255 * 255));
        for m in 2..=256u32 {
            let rows = exact_chunk_rows(m) as u64;
            assert!(rows * ((m - 1) as u64).pow(2) <= 1 << 24);
        }
    }
}
