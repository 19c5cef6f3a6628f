//! Accuracy, exact match, token F1, Pearson correlation and macro F1.
//!
//! Answer normalization for EM/F1: lowercase, drop ASCII punctuation,
//! collapse whitespace, then drop a leading article (a, an, the).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub task_id: String,
    pub method: String,
    pub metric: String,
    pub value: f64,
    pub n: usize,
    pub repeat_index: usize,
}

pub fn accuracy<T: PartialEq>(preds: &[T], golds: &[T]) -> Result<f64> {
    if preds.len() != golds.len() {
        return Err(Error::arg(format!(
            "accuracy over {} predictions and {} golds",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::arg("accuracy over an empty list"));
    }
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

pub fn normalize_answer(text: &str) -> String {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    let mut words: Vec<&str> = lowered.split_whitespace().collect();
    if words.len() > 1 && matches!(words[0], "a" | "an" | "the") {
        words.remove(0);
    }
    words.join(" ")
}

pub fn exact_match<S: AsRef<str>>(pred: &str, gold_set: &[S]) -> u8 {
    let pred = normalize_answer(pred);
    gold_set
        .iter()
        .any(|g| normalize_answer(g.as_ref()) == pred) as u8
}

/// Token-level F1 with multiset overlap.
pub fn token_f1(pred: &str, gold: &str) -> f64 {
    let pred = normalize_answer(pred);
    let gold = normalize_answer(gold);
    let pred_tokens: Vec<&str> = pred.split_whitespace().collect();
    let gold_tokens: Vec<&str> = gold.split_whitespace().collect();
    match (pred_tokens.is_empty(), gold_tokens.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in &gold_tokens {
        *gold_counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &pred_tokens {
        if let Some(c) = gold_counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred_tokens.len() as f64;
    let recall = common as f64 / gold_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Best token F1 against any acceptable answer.
pub fn max_token_f1<S: AsRef<str>>(pred: &str, gold_set: &[S]) -> f64 {
    gold_set
        .iter()
        .map(|g| token_f1(pred, g.as_ref()))
        .fold(0.0, f64::max)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::arg(format!("pearson over lengths {} and {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::arg("pearson needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::arg("pearson input contains a non-finite value"));
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(Error::Degenerate("zero variance input to pearson".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance input to pearson".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of per-class F1 over `classes`; a missing prediction counts against
/// its gold class.
pub fn macro_f1<T: PartialEq>(preds: &[Option<T>], golds: &[T], classes: &[T]) -> Result<f64> {
    if preds.len() != golds.len() || preds.is_empty() {
        return Err(Error::arg("macro F1 needs equal, non-empty prediction and gold lists"));
    }
    if classes.is_empty() {
        return Err(Error::arg("macro F1 needs at least one class"));
    }
    let mut total = 0.0;
    for class in classes {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (p, g) in preds.iter().zip(golds) {
            let predicted = p.as_ref() == Some(class);
            let actual = g == class;
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        // a class absent from both sides is perfectly handled
        total += if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
    }
    Ok(total / classes.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(accuracy(&["a", "b", "c", "d"], &["a", "b", "c", "x"]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 2]).is_err());
        assert!(accuracy::<u8>(&[], &[]).is_err());
    }

    #[test]
    fn exact_match_normalization() {
        assert_eq!(exact_match("SWE", &["swe"]), 1);
        assert_eq!(exact_match("the 1st", &["1st"]), 1);
        assert_eq!(exact_match("Sweden", &["SWE"]), 0);
        assert_eq!(exact_match("  Jack,  Smith! ", &["jack smith"]), 1);
        assert_eq!(exact_match("x", &["y", "X."]), 1);
    }

    #[test]
    fn token_f1_cases() {
        assert_eq!(token_f1("jack smith", "jack smith"), 1.0);
        assert!((token_f1("jack smith", "jack") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(token_f1("apples", "oranges"), 0.0);
        assert_eq!(token_f1("", ""), 1.0);
        assert_eq!(token_f1("", "x"), 0.0);
        assert_eq!(token_f1("x", ""), 0.0);
        // repeated tokens count once per occurrence
        assert!((token_f1("x x y", "x y y") - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_cases() {
        let x = [0.1, 0.5, 0.2, 0.9];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() <= 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() <= 1e-12);
        // co-deviation sum 3, squared deviation sums 2 and 14/3
        let expected = 3.0 / (2.0f64 * 14.0 / 3.0).sqrt();
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.98198).abs() < 1e-5, "{r}");
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn pearson_degenerate() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::Degenerate(_))));
        assert!(matches!(pearson(&[0.1, 0.1], &[0.3, 0.2]), Err(Error::Degenerate(_))));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn macro_f1_cases() {
        let classes = ["favor", "against"];
        let golds = ["favor", "against", "favor", "against"];
        let perfect: Vec<Option<&str>> = golds.iter().map(|g| Some(*g)).collect();
        assert_eq!(macro_f1(&perfect, &golds, &classes).unwrap(), 1.0);
        // favor: tp1 fp0 fn1 -> 2/3; against: tp1 fp1 fn1 -> 2/4
        let preds = [Some("favor"), Some("against"), Some("against"), None];
        let golds = ["favor", "against", "favor", "against"];
        let f = macro_f1(&preds, &golds, &classes).unwrap();
        assert!((f - (2.0 / 3.0 + 0.5) / 2.0).abs() < 1e-12, "{f}");
    }
}
