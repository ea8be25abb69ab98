//! Measurement pipelines: strong measurement with Born sampling,
//! protective and generalized protective measurement, pointer readout.

mod config;
mod frame;
mod protective;
mod result;
mod strong;

pub use config::{ApparatusConfig, MeasurementConfig, Mode, PacketSpec, SystemConfig, AUTO_START_STEPS};
pub use frame::{readout, ConjugateFrame, PointerFrame, Readout, EDGE_MARGIN_WIDTHS, EDGE_MASS_LIMIT};
pub use protective::{construct_y_operator, run, run_generalized, run_protective, run_sequential, run_with_state, MAX_GENERALIZED_DIM};
pub use result::RunResult;
pub use strong::{collapse_sample, run_strong, strong_result, CollapseOutcome, CollapseSampler, StrongOutcome};
