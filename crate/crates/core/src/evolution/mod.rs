//! Single-excitation evolution on finite periodic lattices.

mod lattice;
mod packet;
mod snapshot;
mod spectral;
mod tiling;

pub use lattice::{FieldState, LatticeSpec};
pub use packet::{
    branch_projector, circular_moments, make_packet, measure_packet_velocity, Branch, WavePacketSpec, ZONE_LEAK_TOL,
};
pub use snapshot::{read_snapshot, write_snapshot, MAGIC, VERSION};
pub use spectral::{fft_nd, step_direct, step_spectral, SpectralPropagator};
pub use tiling::{apply_tiling, coarse_lattice, coarse_presentation, tile_descriptor, undo_tiling};
