//! One module per subcommand. Each `run` validates the invocation fully
//! before its first write, so a usage error never leaves partial outputs.

pub mod compare;
pub mod evaluate;
pub mod forecast;
pub mod preprocess;
pub mod synth;
pub mod train;
