pub mod fft;
pub mod grid;
pub mod kernel;
pub mod martingale;
pub mod noise;
pub mod propagator;
pub mod solver;
pub mod stats;
