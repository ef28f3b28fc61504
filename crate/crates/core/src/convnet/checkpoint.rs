use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arch::Architecture;
use super::network::{Parameters, TrainedNetwork};
use super::train::{EpochStats, Hyperparameters};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MANIFEST: &str = "model.json";
const BLOB: &str = "params.bin";

/// JSON half of a checkpoint. The parameters live in `params.bin` as
/// little-endian `f64` values, tensor after tensor in the order of
/// [`Parameters`], with `tensor_sizes` giving each length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub architecture: Architecture,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    pub tensor_sizes: Vec<usize>,
    pub history: Vec<EpochStats>,
}

pub fn save_checkpoint<T: Scalar>(dir: impl AsRef<Path>, net: &TrainedNetwork<T>, hyper: &Hyperparameters) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let manifest = CheckpointManifest {
        architecture: net.arch.clone(),
        hyperparameters: hyper.clone(),
        seed: hyper.seed,
        tensor_sizes: net.params.tensors.iter().map(Vec::len).collect(),
        history: net.history.clone(),
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    let mut blob = Vec::with_capacity(8 * net.params.len());
    for v in net.params.tensors.iter().flatten() {
        blob.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    fs::write(dir.join(BLOB), blob)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(dir: impl AsRef<Path>) -> Result<(TrainedNetwork<T>, CheckpointManifest)> {
    let dir = dir.as_ref();
    let manifest: CheckpointManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    manifest.architecture.validate()?;
    let expected = Parameters::<T>::sizes(&manifest.architecture);
    if expected != manifest.tensor_sizes {
        return Err(Error::Format("checkpoint tensor sizes disagree with its architecture".into()));
    }
    let blob = fs::read(dir.join(BLOB))?;
    let total: usize = expected.iter().sum();
    if blob.len() != 8 * total {
        return Err(Error::Format(format!(
            "parameter blob has {} bytes, expected {}",
            blob.len(),
            8 * total
        )));
    }
    let mut values = blob
        .chunks_exact(8)
        .map(|c| T::c(f64::from_le_bytes(c.try_into().unwrap())));
    let tensors = expected.iter().map(|&n| values.by_ref().take(n).collect()).collect();
    let net = TrainedNetwork {
        arch: manifest.architecture.clone(),
        params: Parameters { tensors },
        history: manifest.history.clone(),
    };
    Ok((net, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convnet::init_network;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let arch = Architecture::with_layer_count(8, (2, 8, 8), 2, &[3, 5], 6, 3).unwrap();
        let net = init_network::<f64>(&arch, 4).unwrap();
        let hyper = Hyperparameters { seed: 4, ..Default::default() };
        save_checkpoint(dir.path(), &net, &hyper).unwrap();
        let (back, man) = load_checkpoint::<f64>(dir.path()).unwrap();
        assert_eq!(back, net);
        assert_eq!(man.seed, 4);
        let blob = std::fs::read(dir.path().join(BLOB)).unwrap();
        std::fs::write(dir.path().join(BLOB), &blob[..blob.len() - 8]).unwrap();
        assert!(load_checkpoint::<f64>(dir.path()).is_err());
    }
}
