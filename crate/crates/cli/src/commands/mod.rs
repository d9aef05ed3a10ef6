//! One module per subcommand. Each takes the resolved configuration and
//! plain argument values; flag parsing stays in `main`.

mod evaluate;
mod gen_data;
mod generate;
mod mine;
mod train;

pub use evaluate::evaluate;
pub use gen_data::gen_data;
pub use generate::generate;
pub use mine::mine_templates;
pub use train::train;
