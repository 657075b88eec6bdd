pub mod bench;
pub mod construct;
pub mod gen;
pub mod mlca;
pub mod train;
pub mod wdp;
