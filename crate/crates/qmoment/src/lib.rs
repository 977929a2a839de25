pub mod amplifier;
pub mod error;
pub mod math;
pub mod moments;
pub mod oracle;
pub mod states;
pub mod tomography;
