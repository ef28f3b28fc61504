use super::features::FeatureVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Majority vote among the `k` nearest training vectors (Euclidean).
///
/// Neighbours are ranked by `(distance, label)` and a tied vote goes to the
/// label with the smallest summed distance, then to the lowest label, so the
/// result does not depend on training order.
pub fn knn_classify<T: Scalar>(train: &[FeatureVector<T>], k: usize, query: &[T]) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::invalid("KNN needs a non-empty training set"));
    }
    if k == 0 || k > train.len() {
        return Err(Error::invalid(format!("k must be in 1..={}, got {k}", train.len())));
    }
    let mut dist: Vec<(T, usize)> = Vec::with_capacity(train.len());
    for f in train {
        if f.values.len() != query.len() {
            return Err(Error::dims(format!(
                "query has {} features, training vector has {}",
                query.len(),
                f.values.len()
            )));
        }
        let d = f
            .values
            .iter()
            .zip(query)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        dist.push((d, f.label));
    }
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));

    let mut votes: Vec<(usize, usize, T)> = Vec::new();
    for &(d, label) in &dist[..k] {
        match votes.iter_mut().find(|v| v.0 == label) {
            Some(v) => {
                v.1 += 1;
                v.2 += d;
            }
            None => votes.push((label, 1, d)),
        }
    }
    votes.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });
    Ok(votes[0].0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64], l: usize) -> FeatureVector<f64> {
        FeatureVector::new(v.to_vec(), l).unwrap()
    }

    #[test]
    fn majority_and_ties() {
        let train = vec![fv(&[0.0, 0.0], 0), fv(&[0.1, 0.0], 0), fv(&[5.0, 5.0], 1)];
        assert_eq!(knn_classify(&train, 3, &[0.05, 0.0]).unwrap(), 0);
        assert_eq!(knn_classify(&train, 1, &[5.0, 5.0]).unwrap(), 1);

        // one vote each: the nearer label wins
        let pair = vec![fv(&[0.0], 3), fv(&[3.0], 1)];
        assert_eq!(knn_classify(&pair, 2, &[1.0]).unwrap(), 3);
        // equidistant: lowest label wins
        assert_eq!(knn_classify(&pair, 2, &[1.5]).unwrap(), 1);
        let rev: Vec<_> = pair.iter().rev().cloned().collect();
        assert_eq!(knn_classify(&rev, 2, &[1.5]).unwrap(), 1);
    }

    #[test]
    fn invalid_inputs() {
        let train = vec![fv(&[0.0], 0)];
        assert!(knn_classify::<f64>(&[], 1, &[0.0]).is_err());
        assert!(knn_classify(&train, 2, &[0.0]).is_err());
        assert!(knn_classify(&train, 1, &[0.0, 1.0]).is_err());
    }
}
