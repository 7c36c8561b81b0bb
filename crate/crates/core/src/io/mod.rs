mod atomic;
mod config;
mod trajectory;

pub use atomic::write_atomic;
pub use config::ConfigDocument;
pub use trajectory::{
    decode_trajectory, encode_trajectory, load_trajectory, persist_trajectory, sidecar_path, TrajectoryMetadata,
    FORMAT_VERSION, MAGIC,
};
