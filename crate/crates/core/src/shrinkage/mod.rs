//! Generalized cumulative shrinkage process (CUSP) priors built from beta
//! stick-breaking sequences, exchangeable shrinkage process (ESP) priors,
//! and the order-statistics map taking the latter to the former.

mod esp;
mod stick;
mod verify;

pub use esp::{
    decreasing_order, esp_to_cusp, hstar_prior_moments, onepb_stick_law, sample_esp, AlphaPrior, EspDraw,
    EspFamily, EspSpec,
};
pub use stick::{sample_sticks, sticks_to_cusp, CuspDraw, StickBreakingSpec, StickFamily};
pub use verify::{
    order_statistic_ratios, verify_increasing_shrinkage, ComponentLaw, ShrinkagePrior, ShrinkageReport,
    ShrinkageRow, SpikeSlabSpec,
};
