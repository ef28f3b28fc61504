use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvBlock {
    pub out_maps: usize,
    /// Square filter side, 2 or 3.
    pub filter: usize,
    /// Whether a 2×2 stride-2 max pool follows the ReLU.
    pub pool: bool,
}

/// Network layout. The layer count treats conv, ReLU, pool and each fully
/// connected layer (and the ReLU between them) as one layer each, so a
/// pooled block counts 3, an unpooled block 2, and the head 3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// `(channels, height, width)`.
    pub input: (usize, usize, usize),
    pub blocks: Vec<ConvBlock>,
    pub fc_neurons: usize,
    pub n_classes: usize,
}

pub const MIN_LAYERS: usize = 6;
pub const MAX_LAYERS: usize = 12;

impl Architecture {
    /// Builds the body for a total layer count in `6..=12` using as many
    /// pooled blocks as fit; pooled blocks come first. Feature maps are
    /// spread over the blocks in ascending order, e.g. `[32, 64]` over three
    /// blocks gives `32, 32, 64`.
    pub fn with_layer_count(
        n_layers: usize,
        input: (usize, usize, usize),
        filter: usize,
        feature_maps: &[usize],
        fc_neurons: usize,
        n_classes: usize,
    ) -> Result<Self> {
        if !(MIN_LAYERS..=MAX_LAYERS).contains(&n_layers) {
            return Err(Error::invalid(format!(
                "layer count must be in {MIN_LAYERS}..={MAX_LAYERS}, got {n_layers}"
            )));
        }
        if feature_maps.is_empty() {
            return Err(Error::invalid("feature_maps must not be empty"));
        }
        let body = n_layers - 3;
        // body = 3p + 2u with p as large as possible
        let (pooled, unpooled) = (0..=body / 3)
            .rev()
            .find_map(|p| {
                let rest = body - 3 * p;
                rest.is_multiple_of(2).then_some((p, rest / 2))
            })
            .expect("every body size from 3 to 9 decomposes");
        let n_blocks = pooled + unpooled;
        let blocks = (0..n_blocks)
            .map(|i| ConvBlock {
                out_maps: feature_maps[(i * feature_maps.len() / n_blocks).min(feature_maps.len() - 1)],
                filter,
                pool: i < pooled,
            })
            .collect();
        let arch = Self {
            input,
            blocks,
            fc_neurons,
            n_classes,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn layer_count(&self) -> usize {
        self.blocks.iter().map(|b| if b.pool { 3 } else { 2 }).sum::<usize>() + 3
    }

    pub fn validate(&self) -> Result<()> {
        let (c, h, w) = self.input;
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::invalid("input dims must be positive"));
        }
        if self.fc_neurons == 0 || self.n_classes < 2 {
            return Err(Error::invalid("need fc_neurons >= 1 and n_classes >= 2"));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if !matches!(b.filter, 2 | 3) {
                return Err(Error::invalid(format!("block {i}: filter must be 2 or 3, got {}", b.filter)));
            }
            if b.out_maps == 0 {
                return Err(Error::invalid(format!("block {i}: out_maps must be positive")));
            }
        }
        let mut hh = h;
        let mut ww = w;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.pool {
                hh /= 2;
                ww /= 2;
                if hh == 0 || ww == 0 {
                    return Err(Error::invalid(format!(
                        "block {i}: pooling shrinks the {h}x{w} input below 1x1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Volume shapes entering each block, plus the final one.
    ///
    /// Convolutions keep `H × W`; each pool maps `H → ⌊H/2⌋` and `W → ⌊W/2⌋`.
    pub fn shapes(&self) -> Vec<(usize, usize, usize)> {
        let mut out = vec![self.input];
        let (_, mut h, mut w) = self.input;
        for b in &self.blocks {
            if b.pool {
                h /= 2;
                w /= 2;
            }
            out.push((b.out_maps, h, w));
        }
        out
    }

    /// Length of the flattened volume fed to the first dense layer.
    pub fn fc_input_len(&self) -> usize {
        let (c, h, w) = *self.shapes().last().unwrap();
        c * h * w
    }

    pub fn input_len(&self) -> usize {
        self.input.0 * self.input.1 * self.input.2
    }
}
