//! Occupation-representation tensors of Slater determinants and their superpositions,
//! singular values of their matricizations, and orbital orderings that shape those
//! spectra.
//!
//! Sites and orbitals are labelled from 0. An [`Ordering`] maps a new position to the old
//! label it carries.

pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod ordering;
pub mod plot;
pub mod rdm;
pub mod selftest;
pub mod spectra;
pub mod tensor;

pub use error::{Error, Result};
pub use experiments::{build_state, random_partial_isometry, run_ensemble, EnsembleStats, ExperimentConfig, Family};
pub use linalg::Matrix;
pub use ordering::{AnnealConfig, Method, OrderingResult};
pub use rdm::{mutual_information, MutualInfoGraph};
pub use spectra::{cut_spectrum_dense, cut_spectrum_sectors, prefactor, CutSpectrum};
pub use tensor::{
    apply_ordering, correlated_tensor, slater_coefficients, CorrelatedState, OccupationTensor, Ordering,
    PartialIsometry, Term,
};
