pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod protocol;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Level, Operator, QuantumState, Slot, SpaceLayout};
