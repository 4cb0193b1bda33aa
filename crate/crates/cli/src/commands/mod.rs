pub mod compare;
pub mod eval;
pub mod fit;
pub mod summarize;
pub mod sweep;
pub mod synth;
