mod determinism;
mod minimizer;
mod properties;
