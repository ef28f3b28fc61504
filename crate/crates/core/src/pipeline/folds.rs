use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Index sets of one cross-validation fold, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn by_class(labels: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
        .into_iter()
        .map(|c| (c, (0..labels.len()).filter(|&i| labels[i] == c).collect()))
        .collect()
}

/// Stratified `k`-fold partition.
///
/// Each class (ascending) is shuffled with the seeded generator and dealt
/// round-robin over the folds, the fold pointer carrying on from one class to
/// the next; fold sizes therefore differ by at most one, as do the per-class
/// counts. The non-test part of every fold is split 4:1 into training and
/// validation, again per class: `round(n_c / 5)` shuffled members of each
/// class go to validation.
pub fn kfold_split(n_samples: usize, k: usize, labels: &[usize], seed: u64) -> Result<Vec<FoldSplit>> {
    if labels.len() != n_samples {
        return Err(Error::dims(format!("{n_samples} samples but {} labels", labels.len())));
    }
    if k < 2 || k > n_samples {
        return Err(Error::invalid(format!("fold count must be in 2..={n_samples}, got {k}")));
    }
    let classes = by_class(labels);
    if let Some((c, members)) = classes.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::invalid(format!(
            "class {c} has {} members, fewer than the {k} folds",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut pointer = 0;
    for (_, members) in &classes {
        let mut m = members.clone();
        m.shuffle(&mut rng);
        for i in m {
            tests[pointer].push(i);
            pointer = (pointer + 1) % k;
        }
    }
    let mut out = Vec::with_capacity(k);
    for (f, mut test) in tests.into_iter().enumerate() {
        test.sort_unstable();
        let mut in_test = vec![false; n_samples];
        test.iter().for_each(|&i| in_test[i] = true);
        let mut split_rng = ChaCha8Rng::seed_from_u64(seed);
        split_rng.set_stream(f as u64 + 1);
        let mut train = Vec::new();
        let mut validation = Vec::new();
        for (_, members) in &classes {
            let mut rest: Vec<usize> = members.iter().copied().filter(|&i| !in_test[i]).collect();
            rest.shuffle(&mut split_rng);
            let n_val = (rest.len() as f64 / 5.0).round() as usize;
            validation.extend_from_slice(&rest[..n_val]);
            train.extend_from_slice(&rest[n_val..]);
        }
        train.sort_unstable();
        validation.sort_unstable();
        out.push(FoldSplit { train, validation, test });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_hundred() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let folds = kfold_split(100, 10, &labels, 1).unwrap();
        let mut seen = vec![0; 100];
        for f in &folds {
            assert_eq!(f.test.len(), 10);
            assert_eq!(f.test.iter().filter(|&&i| labels[i] == 1).count(), 5);
            assert_eq!(f.train.len() + f.validation.len(), 90);
            assert_eq!(f.validation.len(), 18);
            f.test.iter().for_each(|&i| seen[i] += 1);
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn uneven_sizes() {
        let labels: Vec<usize> = (0..23).map(|i| usize::from(i >= 12)).collect();
        let folds = kfold_split(23, 10, &labels, 5).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn too_few_members_rejected() {
        let labels = vec![0, 0, 0, 1, 1, 0, 0, 0];
        assert!(kfold_split(8, 3, &labels, 0).is_err());
        assert!(kfold_split(8, 2, &labels, 0).is_ok());
        assert!(kfold_split(8, 2, &labels[..7], 0).is_err());
    }
}
