use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Stratified by class over individual windows.
    Window,
    /// Whole subjects are held out.
    Subject,
}

fn check_fraction(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Config(format!("test fraction must lie in (0, 1), got {f}")));
    }
    Ok(())
}

/// Holds out `max(1, round(n_c * test_fraction))` windows of every class
/// (at most `n_c - 1`). Both index lists come back sorted.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(test_fraction)?;
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for (class, mut idx) in by_class {
        if idx.len() < 2 {
            return Err(Error::Eval(format!(
                "class {class} has {} window(s); stratified splitting needs at least 2",
                idx.len()
            )));
        }
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Holds out `max(1, round(n_subjects * test_fraction))` whole subjects.
pub fn subject_split(subjects: &[String], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_fraction(test_fraction)?;
    let mut names: Vec<&String> = subjects.iter().collect();
    names.sort();
    names.dedup();
    if names.len() < 2 {
        return Err(Error::Eval(format!(
            "subject-wise split needs at least 2 subjects, found {}",
            names.len()
        )));
    }
    let n_test = ((names.len() as f64 * test_fraction).round() as usize).clamp(1, names.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    names.shuffle(&mut rng);
    let held: Vec<&String> = names[..n_test].to_vec();
    let (test, train): (Vec<usize>, Vec<usize>) = (0..subjects.len()).partition(|&i| held.contains(&&subjects[i]));
    Ok((train, test))
}
