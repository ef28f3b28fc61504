//! Three-way tensors over (time, frequency, channel) and the CP machinery
//! that compresses the channel mode into super-slices.

mod als;
mod dense;
mod factors;
mod io;
mod projector;

pub use als::{cp_als, cp_als_from, AlsInit, AlsOptions, CpResult};
pub use dense::{fold, mode_n_product, stack_images, unfold, Mode, Tensor3};
pub use factors::{normalized_error, CpFactors};
pub use io::{read_factors, read_tensor, tensor_from_bytes, tensor_to_bytes, write_factors, write_tensor, FactorManifest};
pub use projector::{build_projector, super_slices, Projector, CONDITION_CAP};
