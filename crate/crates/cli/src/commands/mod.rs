//! One module per subcommand, plus shared plumbing.

mod common;
mod estimate;
mod map;
mod mediate;
mod moran;
mod synth;

pub use estimate::{run_gwr, run_mgwr, run_ols};
pub use map::run_map;
pub use mediate::{run_mediate, run_mediate_spatial};
pub use moran::run_moran;
pub use synth::run_synth;
