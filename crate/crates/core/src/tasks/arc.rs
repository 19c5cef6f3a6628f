//! 1D-ARC "move k pixels": a single contiguous object slides k cells right.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pair_template;
use crate::converters::format_sequence;
use crate::error::{Error, Result};
use crate::problem::{Problem, SymbolKind, SymbolSpan};

const INSTRUCTION: &str = "Each input sequence is transformed into its output sequence by the same rule. \
Find the rule and give the output for the last input.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcInstance {
    pub pairs: Vec<(Vec<u8>, Vec<u8>)>,
    pub target_input: Vec<u8>,
    pub gold_output: Vec<u8>,
    pub k: usize,
}

/// Shift every cell `k` positions to the right, filling with zeros.
///
/// The last `k` cells must be zero so nothing leaves the grid.
pub fn shift_oracle(seq: &[u8], k: usize) -> Result<Vec<u8>> {
    if seq.len() < k {
        return Err(Error::arg(format!("cannot shift a length-{} sequence by {k}", seq.len())));
    }
    if let Some(i) = seq[seq.len() - k..].iter().position(|&v| v != 0) {
        return Err(Error::arg(format!(
            "cell {} is nonzero and would leave the grid when shifted by {k}",
            seq.len() - k + i
        )));
    }
    let mut out = vec![0; seq.len()];
    out[k..].copy_from_slice(&seq[..seq.len() - k]);
    Ok(out)
}

fn check_cells(seq: &[u8]) -> Result<()> {
    match seq.iter().find(|&&v| v > 9) {
        Some(v) => Err(Error::arg(format!("cell value {v} outside 0..=9"))),
        None => Ok(()),
    }
}

impl ArcInstance {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// Builds an instance, inferring k when it is not given.
    pub fn new(pairs: Vec<(Vec<u8>, Vec<u8>)>, target_input: Vec<u8>, gold_output: Vec<u8>, k: Option<usize>) -> Result<Self> {
        let k = match k {
            Some(k) => k,
            None => (1..=3)
                .find(|&k| {
                    pairs
                        .iter()
                        .chain(std::iter::once(&(target_input.clone(), gold_output.clone())))
                        .all(|(i, o)| shift_oracle(i, k).is_ok_and(|s| &s == o))
                })
                .ok_or_else(|| Error::arg("no shift of 1, 2 or 3 explains every pair"))?,
        };
        let instance = ArcInstance {
            pairs,
            target_input,
            gold_output,
            k,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.k) {
            return Err(Error::arg(format!("shift {} outside 1..=3", self.k)));
        }
        if !(3..=4).contains(&self.pairs.len()) {
            return Err(Error::arg(format!("{} demonstration pairs, expected 3 or 4", self.pairs.len())));
        }
        let len = self.target_input.len();
        if len == 0 {
            return Err(Error::arg("empty target sequence"));
        }
        let all = self
            .pairs
            .iter()
            .chain(std::iter::once(&(self.target_input.clone(), self.gold_output.clone())))
            .cloned()
            .collect::<Vec<_>>();
        for (i, (input, output)) in all.iter().enumerate() {
            if input.len() != len || output.len() != len {
                return Err(Error::arg(format!("pair {i} has a different length from the target")));
            }
            check_cells(input)?;
            check_cells(output)?;
            if shift_oracle(input, self.k)? != *output {
                return Err(Error::arg(format!("pair {i} is not a shift by {}", self.k)));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let mut spans = Vec::with_capacity(2 * self.pairs.len() + 1);
        for (i, (input, output)) in self.pairs.iter().enumerate() {
            spans.push(SymbolSpan::at(format!("s{}", 2 * i + 1), format_sequence(input), SymbolKind::Sequence)?);
            spans.push(SymbolSpan::at(format!("s{}", 2 * i + 2), format_sequence(output), SymbolKind::Sequence)?);
        }
        spans.push(SymbolSpan::at(
            format!("s{}", 2 * self.pairs.len() + 1),
            format_sequence(&self.target_input),
            SymbolKind::Sequence,
        )?);
        Problem::new(
            "arc",
            pair_template(INSTRUCTION, self.pairs.len()),
            spans,
            Some(format_sequence(&self.gold_output)),
        )
    }
}

/// Seeded Move-kp instance with `n` distinct demonstrations and a distinct target.
pub fn gen_arc(seed: u64, k: usize, n: usize, length: usize) -> Result<ArcInstance> {
    if !(1..=3).contains(&k) {
        return Err(Error::arg(format!("shift {k} outside 1..=3")));
    }
    if !(3..=4).contains(&n) {
        return Err(Error::arg(format!("{n} demonstration pairs, expected 3 or 4")));
    }
    if length < k + 1 {
        return Err(Error::arg(format!("length {length} leaves no room for an object shifted by {k}")));
    }
    if length > 64 {
        return Err(Error::arg(format!("length {length} above 64")));
    }
    let room = length - k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs: Vec<Vec<u8>> = Vec::with_capacity(n + 1);
    // 9 * room * (room + 1) / 2 >= 9 distinct grids, so n + 1 <= 5 always fit
    while inputs.len() < n + 1 {
        let size = rng.random_range(1..=room);
        let start = rng.random_range(0..=room - size);
        let value = rng.random_range(1..=9u8);
        let mut grid = vec![0u8; length];
        grid[start..start + size].fill(value);
        if !inputs.contains(&grid) {
            inputs.push(grid);
        }
    }
    let target_input = inputs.pop().expect("n + 1 grids");
    let pairs = inputs
        .into_iter()
        .map(|i| {
            let o = shift_oracle(&i, k)?;
            Ok((i, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let gold_output = shift_oracle(&target_input, k)?;
    ArcInstance::new(pairs, target_input, gold_output, Some(k))
}

/// A corpus cycling k through 1, 2, 3 with `n` pairs per instance.
pub fn synthetic_arc(seed: u64, count: usize, n: usize, length: usize) -> Result<Vec<ArcInstance>> {
    (0..count)
        .map(|i| gen_arc(crate::runner::mix_seed(seed, i as u64), i % 3 + 1, n, length))
        .collect()
}
