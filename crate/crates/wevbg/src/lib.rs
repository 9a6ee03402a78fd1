//! Block eigenspace background modeling.
//!
//! The crate trains per-block eigenbases from a frame history and estimates a
//! static background by projecting frames onto a selected subset of
//! eigenvectors. Both the classic strongest-eigenvector selection and the
//! weakest-eigenvector alternative are first-class: the strongest directions
//! absorb whatever moves during training, so reconstructing from them copies
//! foreground ghosts into the background estimate, while the weakest
//! directions are nearly orthogonal to the moving content and yield cleaner
//! estimates on scenes whose training history contains objects.
//!
//! Alongside the model/segment pipeline the crate carries a small numerical
//! experiment kit ([`theory`], [`evalkit`]) that measures how far a dominant
//! eigenvector moves under rank-one scatter updates and checks the measured
//! drift against closed-form bounds.

pub mod cli;
pub mod eigenmodel;
pub mod error;
pub mod evalkit;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod scene;
pub mod segmenter;
pub mod streamstats;
pub mod theory;

pub use error::{Error, Result};
