//! Local conserved charges of the periodic XXZ chain written in the
//! Temperley–Lieb algebra, with exact symbolic and numeric verification.

pub mod charges;
pub mod diagram;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod linalg;
pub mod matrep;
pub mod oracle;
pub mod poly;
pub mod verify;
pub mod words;

pub use charges::ChargeDensity;
pub use diagram::{Diagram, LinComb};
pub use error::{Error, Result};
pub use poly::{Rational, TauPoly};
pub use words::{EnvCode, GeneralWord, MonoidIndex, TL1Word, WordParams};
