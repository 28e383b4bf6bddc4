//! Threefold tensors over finite fields in the cyclic model, and the
//! geometry of PG(3,q²) they induce.

#![allow(clippy::needless_range_loop)]

pub mod cyclic;
pub mod error;
pub mod fourfold;
pub mod geom;
pub mod gf;
pub mod hermcount;
pub mod linalg;
pub mod proj;
pub mod qh;

pub use cyclic::{CyclicTensor, LinearizedMap};
pub use error::{Error, Result};
pub use gf::{Elem, FieldTower, ModulusSpec, SquareClass};
pub use linalg::Mat;
