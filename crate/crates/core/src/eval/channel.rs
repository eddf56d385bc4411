use serde::{Deserialize, Serialize};

use super::EvalError;

/// Tolerance on each conditional row sum of a channel.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// A discrete memoryless channel `P(y_1..y_R | x_1..x_T)` as a dense table.
///
/// Rows are input tuples in row-major order (`x_1` slowest); within a row,
/// output tuples are row-major (`y_1` slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_alphabets: Vec<usize>,
    output_alphabets: Vec<usize>,
    transition: Vec<f64>,
}

/// On-disk channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub n_tx: usize,
    pub n_rx: usize,
    pub input_alphabets: Vec<usize>,
    pub output_alphabets: Vec<usize>,
    pub transition: Vec<f64>,
}

pub(crate) fn product(sizes: &[usize]) -> usize {
    sizes.iter().product()
}

/// Decodes a flat row-major index into per-axis symbols.
pub(crate) fn unflatten(mut index: usize, sizes: &[usize], out: &mut [usize]) {
    for (slot, &size) in out.iter_mut().zip(sizes).rev() {
        *slot = index % size;
        index /= size;
    }
}

impl Channel {
    pub fn new(
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        transition: Vec<f64>,
    ) -> Result<Self, EvalError> {
        if input_alphabets.is_empty() || output_alphabets.is_empty() {
            return Err(EvalError::InvalidChannel("needs at least one input and one output".into()));
        }
        if input_alphabets.iter().chain(&output_alphabets).any(|&a| a == 0) {
            return Err(EvalError::InvalidChannel("alphabet sizes must be positive".into()));
        }
        let rows = product(&input_alphabets);
        let cols = product(&output_alphabets);
        if transition.len() != rows * cols {
            return Err(EvalError::InvalidChannel(format!(
                "transition has {} entries, expected {} ({} input tuples x {} output tuples)",
                transition.len(),
                rows * cols,
                rows,
                cols
            )));
        }
        for (r, row) in transition.chunks(cols).enumerate() {
            if let Some((c, &p)) = row.iter().enumerate().find(|(_, p)| !(**p >= 0.0) || !p.is_finite()) {
                return Err(EvalError::InvalidChannel(format!(
                    "row {r}, column {c}: entry {p} is not a finite nonnegative probability"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(EvalError::InvalidChannel(format!("row {r} sums to {sum}, expected 1")));
            }
        }
        Ok(Channel {
            input_alphabets,
            output_alphabets,
            transition,
        })
    }

    /// Builds a channel from `p(x, y)` evaluated on every input/output tuple.
    pub fn from_fn(
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        p: impl Fn(&[usize], &[usize]) -> f64,
    ) -> Result<Self, EvalError> {
        let rows = product(&input_alphabets);
        let cols = product(&output_alphabets);
        let mut x = vec![0; input_alphabets.len()];
        let mut y = vec![0; output_alphabets.len()];
        let mut transition = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            unflatten(r, &input_alphabets, &mut x);
            for c in 0..cols {
                unflatten(c, &output_alphabets, &mut y);
                transition.push(p(&x, &y));
            }
        }
        Channel::new(input_alphabets, output_alphabets, transition)
    }

    /// Noiseless channel whose outputs are a function of the inputs.
    pub fn deterministic(
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self, EvalError> {
        Channel::from_fn(input_alphabets, output_alphabets, |x, y| {
            if f(x) == y {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn from_file(file: ChannelFile) -> Result<Self, EvalError> {
        if file.input_alphabets.len() != file.n_tx {
            return Err(EvalError::InvalidChannel(format!(
                "input_alphabets has {} entries but n_tx = {}",
                file.input_alphabets.len(),
                file.n_tx
            )));
        }
        if file.output_alphabets.len() != file.n_rx {
            return Err(EvalError::InvalidChannel(format!(
                "output_alphabets has {} entries but n_rx = {}",
                file.output_alphabets.len(),
                file.n_rx
            )));
        }
        Channel::new(file.input_alphabets, file.output_alphabets, file.transition)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            n_tx: self.n_tx(),
            n_rx: self.n_rx(),
            input_alphabets: self.input_alphabets.clone(),
            output_alphabets: self.output_alphabets.clone(),
            transition: self.transition.clone(),
        }
    }

    pub fn parse_json(text: &str) -> Result<Self, EvalError> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| EvalError::Parse(e.to_string()))?;
        Channel::from_file(file)
    }

    pub fn n_tx(&self) -> usize {
        self.input_alphabets.len()
    }

    pub fn n_rx(&self) -> usize {
        self.output_alphabets.len()
    }

    pub fn input_alphabets(&self) -> &[usize] {
        &self.input_alphabets
    }

    pub fn output_alphabets(&self) -> &[usize] {
        &self.output_alphabets
    }

    pub fn output_tuples(&self) -> usize {
        product(&self.output_alphabets)
    }

    /// `P(· | x)` for the input tuple with flat index `x`.
    pub fn row(&self, x: usize) -> &[f64] {
        let cols = self.output_tuples();
        &self.transition[x * cols..(x + 1) * cols]
    }

    /// The channel seen by receiver `z` alone (1-based).
    pub fn marginal(&self, z: usize) -> Channel {
        let cols = self.output_tuples();
        let size = self.output_alphabets[z - 1];
        let mut y = vec![0; self.n_rx()];
        let mut transition = Vec::with_capacity(product(&self.input_alphabets) * size);
        for row in self.transition.chunks(cols) {
            let mut m = vec![0.0; size];
            for (c, &p) in row.iter().enumerate() {
                unflatten(c, &self.output_alphabets, &mut y);
                m[y[z - 1]] += p;
            }
            transition.extend(m);
        }
        Channel {
            input_alphabets: self.input_alphabets.clone(),
            output_alphabets: vec![size],
            transition,
        }
    }

    /// Channel where every receiver observes the output of `single`.
    pub fn duplicated(single: &Channel, receivers: usize) -> Result<Channel, EvalError> {
        if single.n_rx() != 1 {
            return Err(EvalError::InvalidChannel("duplicated() expects a single-output channel".into()));
        }
        let size = single.output_alphabets[0];
        let rows = product(&single.input_alphabets);
        let alphabets = vec![size; receivers];
        let cols = product(&alphabets);
        let mut transition = vec![0.0; rows * cols];
        let mut y = vec![0; receivers];
        for r in 0..rows {
            for c in 0..cols {
                unflatten(c, &alphabets, &mut y);
                if y.iter().all(|&v| v == y[0]) {
                    transition[r * cols + c] = single.row(r)[y[0]];
                }
            }
        }
        Channel::new(single.input_alphabets.clone(), alphabets, transition)
    }
}
