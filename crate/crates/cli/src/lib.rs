//! Library surface of the `peakq` binary: CLI subcommand implementations and
//! the serving gateway. Split out so integration tests can drive the gateway
//! router without binding sockets.

pub mod commands;
pub mod gateway;
