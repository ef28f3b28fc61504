//! Multichannel records, fixed-length segmentation, synthetic datasets and
//! the windowing / analytic-signal primitives used by the TFD engine.

mod analytic;
mod io;
mod record;
mod synth;
mod window;

pub use analytic::{analytic_signal, negative_frequency_energy_ratio};
pub use io::{load_record, parse_record, write_record, RecordMetadata};
pub use record::{segment_record, LabelInterval, MultiChannelRecord, Segment, SegmentOrigin};
pub use synth::{synthesize_dataset, ClassSpec, Component, ComponentKind, Mixing, SynthSpec};
pub use window::{make_window, WindowKind, WindowSpec};
