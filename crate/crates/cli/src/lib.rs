pub mod check;
pub mod sweep;
