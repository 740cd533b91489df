//! Library half of the `swingdiff` binary: the HTTP API, CSV export and
//! exit-code mapping, kept here so integration tests can drive them
//! in-process.

pub mod api;
pub mod export;

use std::fmt;

use swingdiff_core::ErrorKind;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

/// The requested listening port is already bound.
#[derive(Debug)]
pub struct PortInUse(pub u16);

impl fmt::Display for PortInUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "port {} is already in use", self.0)
    }
}

impl std::error::Error for PortInUse {}

/// Exit status for a failed command: 2 validation, 3 I/O, 4 internal.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<swingdiff_core::Error>() {
            return match e.kind() {
                ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Internal => EXIT_INTERNAL,
            };
        }
        if cause.is::<PortInUse>() || cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_INTERNAL
}
