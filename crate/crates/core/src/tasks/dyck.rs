//! Dyck language completion over four bracket pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pair_template;
use crate::converters::brackets::{closer_for, is_bracket, is_opener};
use crate::error::{Error, Result};
use crate::problem::{Problem, SymbolKind, SymbolSpan};

const INSTRUCTION: &str = "Complete the rest of the sequence, making sure that the parentheses are closed properly.";
const OPENERS: [char; 4] = ['(', '[', '{', '<'];

/// Longest prefix `gen_dyck` accepts; weighted path counts stay inside u128.
pub const MAX_PREFIX_LEN: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyckInstance {
    pub pairs: Vec<(String, String)>,
    pub target_prefix: String,
    pub gold_closing: String,
}

/// Closers for the unmatched openers of `prefix`, innermost first.
pub fn dyck_oracle(prefix: &str) -> Result<String> {
    let mut stack = Vec::new();
    for (i, c) in prefix.chars().enumerate() {
        if !is_bracket(c) {
            return Err(Error::arg(format!("character {i} ({c:?}) is not a bracket")));
        }
        if is_opener(c) {
            stack.push(c);
        } else if stack.pop().and_then(closer_for) != Some(c) {
            return Err(Error::arg(format!("closer {c:?} at index {i} has no matching opener")));
        }
    }
    Ok(stack.iter().rev().filter_map(|&o| closer_for(o)).collect())
}

impl DyckInstance {
    pub fn new(pairs: Vec<(String, String)>, target_prefix: String) -> Result<Self> {
        let gold_closing = dyck_oracle(&target_prefix)?;
        let instance = DyckInstance {
            pairs,
            target_prefix,
            gold_closing,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.pairs.len()) {
            return Err(Error::arg(format!("{} demonstration pairs, expected 1 to 5", self.pairs.len())));
        }
        let target = (self.target_prefix.clone(), self.gold_closing.clone());
        for (i, (prefix, closing)) in self.pairs.iter().chain(std::iter::once(&target)).enumerate() {
            if closing.is_empty() {
                return Err(Error::arg(format!("pair {i} has an empty closing")));
            }
            if dyck_oracle(prefix)? != *closing {
                return Err(Error::arg(format!("pair {i}: {closing:?} does not close {prefix:?}")));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let mut spans = Vec::with_capacity(2 * self.pairs.len() + 1);
        for (i, (prefix, closing)) in self.pairs.iter().enumerate() {
            spans.push(SymbolSpan::at(format!("s{}", 2 * i + 1), prefix.as_str(), SymbolKind::Brackets)?);
            spans.push(SymbolSpan::at(format!("s{}", 2 * i + 2), closing.as_str(), SymbolKind::Brackets)?);
        }
        spans.push(SymbolSpan::at(
            format!("s{}", 2 * self.pairs.len() + 1),
            self.target_prefix.as_str(),
            SymbolKind::Brackets,
        )?);
        Problem::new(
            "dyck",
            pair_template(INSTRUCTION, self.pairs.len()),
            spans,
            Some(self.gold_closing.clone()),
        )
    }
}

/// `ways[r][c]`: strings of `r` more steps from depth `c` ending at depth `target`,
/// each open step counted four times.
fn completions(len: usize, target: usize) -> Vec<Vec<u128>> {
    let mut ways = vec![vec![0u128; len + 2]; len + 1];
    ways[0][target] = 1;
    for r in 1..=len {
        for c in 0..=len {
            let up = 4 * ways[r - 1][c + 1];
            let down = if c > 0 { ways[r - 1][c - 1] } else { 0 };
            ways[r][c] = up + down;
        }
    }
    ways
}

fn sample_prefix(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    // reach[l][d]: weighted strings of length l from depth 0 to depth d
    let mut reach = vec![vec![0u128; max_len + 2]; max_len + 1];
    reach[0][0] = 1;
    for l in 1..=max_len {
        for d in 0..=l {
            let up = if d > 0 { 4 * reach[l - 1][d - 1] } else { 0 };
            reach[l][d] = up + reach[l - 1][d + 1];
        }
    }
    let mut weights = Vec::new();
    for (len, row) in reach.iter().enumerate().skip(1) {
        for (depth, &w) in row.iter().enumerate().skip(1) {
            if w > 0 {
                weights.push((len, depth, w));
            }
        }
    }
    let total: u128 = weights.iter().map(|w| w.2).sum();
    let mut pick = rng.random_range(0..total);
    let (len, depth) = weights
        .iter()
        .find_map(|&(l, d, w)| {
            if pick < w {
                Some((l, d))
            } else {
                pick -= w;
                None
            }
        })
        .expect("pick below total");
    let ways = completions(len, depth);
    let mut stack: Vec<char> = Vec::new();
    let mut out = String::with_capacity(len);
    for remaining in (1..=len).rev() {
        let c = stack.len();
        let up = 4 * ways[remaining - 1][c + 1];
        let down = if c > 0 { ways[remaining - 1][c - 1] } else { 0 };
        if rng.random_range(0..up + down) < up {
            let o = OPENERS[rng.random_range(0..4)];
            stack.push(o);
            out.push(o);
        } else {
            let o = stack.pop().expect("positive depth");
            out.push(closer_for(o).expect("opener"));
        }
    }
    out
}

/// Seeded instance: `n` demonstrations and a target, each a uniformly drawn
/// prefix of length at most `max_len` with at least one open bracket.
pub fn gen_dyck(seed: u64, n: usize, max_len: usize) -> Result<DyckInstance> {
    if !(1..=5).contains(&n) {
        return Err(Error::arg(format!("{n} demonstration pairs, expected 1 to 5")));
    }
    if !(2..=MAX_PREFIX_LEN).contains(&max_len) {
        return Err(Error::arg(format!("max_len {max_len} outside 2..={MAX_PREFIX_LEN}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let p = sample_prefix(&mut rng, max_len);
        let c = dyck_oracle(&p)?;
        pairs.push((p, c));
    }
    let target = sample_prefix(&mut rng, max_len);
    DyckInstance::new(pairs, target)
}

pub fn synthetic_dyck(seed: u64, count: usize, n: usize, max_len: usize) -> Result<Vec<DyckInstance>> {
    (0..count)
        .map(|i| gen_dyck(crate::runner::mix_seed(seed, i as u64), n, max_len))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        assert_eq!(dyck_oracle("([]").unwrap(), ")");
        assert_eq!(dyck_oracle("{(<>)").unwrap(), "}");
        assert_eq!(dyck_oracle("").unwrap(), "");
        assert_eq!(dyck_oracle("{}[").unwrap(), "]");
        assert_eq!(dyck_oracle("<{[(").unwrap(), ")]}>");
    }

    #[test]
    fn oracle_reports_index() {
        let err = dyck_oracle("([)]").unwrap_err().to_string();
        assert!(err.contains("index 2"), "{err}");
        assert!(dyck_oracle(")").is_err());
        assert!(dyck_oracle("(a").is_err());
    }

    #[test]
    fn completion_counts() {
        // length 2 ending at depth 2: 16 strings; at depth 0: 4 strings "()" etc.
        assert_eq!(completions(2, 2)[2][0], 16);
        assert_eq!(completions(2, 0)[2][0], 4);
        assert_eq!(completions(1, 1)[1][0], 4);
        assert!(completions(MAX_PREFIX_LEN, 2)[MAX_PREFIX_LEN][0] > 0);
    }

    #[test]
    fn generator_counts_and_determinism() {
        let inst = gen_dyck(7, 5, 20).unwrap();
        assert_eq!(inst.n(), 5);
        assert_eq!(gen_dyck(7, 5, 20).unwrap(), inst);
        for (p, c) in &inst.pairs {
            assert!(p.chars().count() <= 20);
            assert_eq!(&dyck_oracle(p).unwrap(), c);
            assert!(!c.is_empty());
        }
        assert!(gen_dyck(0, 0, 10).is_err());
        assert!(gen_dyck(0, 6, 10).is_err());
        assert!(gen_dyck(0, 1, 1).is_err());
        assert!(gen_dyck(0, 1, MAX_PREFIX_LEN).is_ok());
    }

    #[test]
    fn short_prefixes_are_uniform() {
        // max_len 2: 4 one-char prefixes and 16 two-char prefixes at depth 2
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut singles = 0;
        let trials = 20_000;
        for _ in 0..trials {
            if sample_prefix(&mut rng, 2).len() == 1 {
                singles += 1;
            }
        }
        let share = singles as f64 / trials as f64;
        assert!((share - 0.2).abs() < 0.02, "{share}");
    }
}
