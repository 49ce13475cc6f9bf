// SPDX-License-Identifier: Apache-2.0

//! Magnetic graph convolution for directed graphs: magnetic Laplacians,
//! cycle-based charge selection, diffusion filters and a complex-valued classifier.

pub mod cache;
pub mod charge;
pub mod cycles;
pub mod dataset;
pub mod dense;
pub mod denoise;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod filters;
pub mod generate;
pub mod graph;
pub mod homophily;
pub mod magnetic;
pub mod model;
pub mod response;
pub mod sparse;
pub mod split;

pub use charge::Charge;
pub use error::{Error, Result};
pub use graph::{DirectedGraph, Symmetrization};
