pub mod oracles;
pub mod toy;
