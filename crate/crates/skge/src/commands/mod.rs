//! One module per subcommand.

pub mod eval_cmd;
pub mod gen_kg;
pub mod neighbors;
pub mod project;
pub mod similar;
pub mod stats;
pub mod train;
