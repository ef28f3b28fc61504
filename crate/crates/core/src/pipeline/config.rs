use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{Extension, PcaSelection, SvmOptions, Wavelet};
use crate::convnet::Hyperparameters;
use crate::error::{Error, Result};
use crate::signal::SynthSpec;
use crate::tensor::AlsOptions;
use crate::tfr::{default_n_fft, KernelSpec, TfdMethod};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSource {
    /// Samples, one row per sample and one column per channel.
    pub csv: PathBuf,
    /// JSON sidecar with `fs`, `channels` and `labels`.
    pub meta: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synth(SynthSpec),
    Records(Vec<RecordSource>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// CP super-slices stacked as CNN input channels.
    #[default]
    TensorCnn,
    /// All K channel images as CNN input channels.
    TfCnnNoReduction,
    /// Per-image PCA scores (time frames × components) as CNN input channels.
    PcaCnn,
    DwtKnn,
    DwtSvm,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::TensorCnn => "tensor-cnn",
            Variant::TfCnnNoReduction => "tf-cnn-no-reduction",
            Variant::PcaCnn => "pca-cnn",
            Variant::DwtKnn => "dwt-knn",
            Variant::DwtSvm => "dwt-svm",
        }
    }

    pub fn uses_cnn(self) -> bool {
        matches!(self, Variant::TensorCnn | Variant::TfCnnNoReduction | Variant::PcaCnn)
    }

    pub fn uses_images(self) -> bool {
        self.uses_cnn()
    }
}

/// Where the channel factor `C` behind the projector comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorScope {
    /// Every segment is decomposed on its own.
    #[default]
    PerSegment,
    /// One decomposition of the training segments (concatenated along time)
    /// per fold; its projector is applied to every segment of that fold.
    TrainFit,
}

/// How the `R` super-slices of a segment reach the classifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceInput {
    /// One network with the slices as `R` input channels.
    #[default]
    Stacked,
    /// One single-channel network per slice; class probabilities are
    /// averaged over the slices.
    Vote,
}

/// Unit kept together when assigning folds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    #[default]
    Segment,
    /// All segments of a record land in the same fold; the record's majority
    /// segment class is used for stratification.
    Record,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwtOptions {
    pub levels: usize,
    pub wavelet: Wavelet,
    pub extension: Extension,
}

impl Default for DwtOptions {
    fn default() -> Self {
        Self {
            levels: 5,
            wavelet: Wavelet::Db4,
            extension: Extension::Symmetric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub segment_seconds: f64,
    pub overlap: f64,
    pub tfd: TfdMethod,
    /// Kernel parameters; defaults are derived from `tfd` and the sampling rate.
    pub kernel: Option<KernelSpec>,
    pub n_fft: Option<usize>,
    /// `(time, frequency)` size of every image.
    pub image_dims: (usize, usize),
    pub rank: usize,
    pub projector_scope: ProjectorScope,
    pub slice_input: SliceInput,
    pub variant: Variant,
    pub als: AlsOptions,
    /// Total CNN layer count, 6 to 12.
    pub layers: usize,
    pub filter: usize,
    pub hyper: Hyperparameters,
    pub pca: PcaSelection,
    pub dwt: DwtOptions,
    pub knn_k: usize,
    /// Standardize DWT features with training-fold statistics before KNN.
    pub knn_standardize: bool,
    pub svm: SvmOptions,
    pub folds: usize,
    pub repeats: usize,
    pub grouping: Grouping,
    pub seed: u64,
    /// Segments used by the rank sweep (all when absent).
    pub sweep_segments: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synth(SynthSpec::two_tone_bursts(200, 4.0, 256.0, 8, 42)),
            segment_seconds: 4.0,
            overlap: 0.0,
            tfd: TfdMethod::Swv,
            kernel: None,
            n_fft: None,
            image_dims: (64, 64),
            rank: 3,
            projector_scope: ProjectorScope::PerSegment,
            slice_input: SliceInput::Stacked,
            variant: Variant::TensorCnn,
            als: AlsOptions::default(),
            layers: 6,
            filter: 3,
            hyper: Hyperparameters::default(),
            pca: PcaSelection::default(),
            dwt: DwtOptions::default(),
            knn_k: 3,
            knn_standardize: true,
            svm: SvmOptions::default(),
            folds: 10,
            repeats: 10,
            grouping: Grouping::Segment,
            seed: 0,
            sweep_segments: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without touching the data.
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("folds must be at least 2"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if !(self.segment_seconds > 0.0) {
            return Err(Error::invalid("segment_seconds must be positive"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::invalid("overlap must lie in [0, 1)"));
        }
        if self.image_dims.0 == 0 || self.image_dims.1 == 0 {
            return Err(Error::invalid("image_dims must be positive"));
        }
        if self.rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if let Some(n) = self.n_fft {
            if n < 4 || n % 2 == 1 {
                return Err(Error::invalid("n_fft must be even and at least 4"));
            }
        }
        if let Some(k) = &self.kernel {
            k.validate()?;
            if k.method != self.tfd {
                return Err(Error::invalid(format!(
                    "kernel method {} disagrees with tfd {}",
                    k.method, self.tfd
                )));
            }
        }
        self.als.validate()?;
        self.hyper.validate()?;
        if !matches!(self.filter, 2 | 3) {
            return Err(Error::invalid("filter must be 2 or 3"));
        }
        if !(6..=12).contains(&self.layers) {
            return Err(Error::invalid("layers must be in 6..=12"));
        }
        if self.knn_k == 0 {
            return Err(Error::invalid("knn_k must be at least 1"));
        }
        if self.dwt.levels == 0 {
            return Err(Error::invalid("dwt.levels must be at least 1"));
        }
        match self.pca {
            PcaSelection::Count(0) => return Err(Error::invalid("pca count must be positive")),
            PcaSelection::Variance(_) if self.variant == Variant::PcaCnn => {
                return Err(Error::invalid(
                    "pca-cnn needs a fixed component count so every sample has the same shape",
                ))
            }
            PcaSelection::Variance(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::invalid("pca variance fraction must be in (0, 1]"))
            }
            _ => {}
        }
        if let DataSource::Synth(s) = &self.data {
            if s.n_records == 0 {
                return Err(Error::invalid("synthetic dataset needs at least one record"));
            }
        }
        Ok(())
    }

    pub fn kernel_for(&self, fs: f64) -> KernelSpec {
        self.kernel.unwrap_or_else(|| KernelSpec::with_defaults(self.tfd, fs))
    }

    pub fn n_fft_for(&self, fs: f64) -> usize {
        self.n_fft.unwrap_or_else(|| default_n_fft(fs))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
