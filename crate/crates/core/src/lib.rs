//! Spectral generating bands of the Sturmian Schrödinger operator
//! `(Hψ)_n = ψ_{n-1} + ψ_{n+1} + V χ_{[1-α,1)}(nα mod 1) ψ_n`,
//! with pre-dimensions, Gibbs-like measures, large-coupling asymptotics
//! and a numerical audit of the band-length estimates.

pub mod asymptotics;
pub mod audit;
pub mod bandtree;
pub mod bisect;
pub mod cfrac;
pub mod dimension;
pub mod dump;
pub mod error;
pub mod floquet;
pub mod gibbs;
pub mod ladder;
pub mod numerics;
pub mod tracemap;

pub use bandtree::{Band, BandKind, BandTree, CharPath, EnumerationSettings, IndexWindow, PathSymbol};
pub use cfrac::{parse_cf, ContinuedFraction, Convergent};
pub use dimension::{DimensionReport, PreDimension};
pub use error::{Error, Result};
pub use gibbs::GibbsMeasure;
pub use ladder::Ladder;
pub use tracemap::{Real, SpectralParams, TraceLabel, TraceState};
