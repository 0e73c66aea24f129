//! Guide chapters, compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod chapter1 {}

#[doc = include_str!("../../../book/src/scheme.md")]
pub mod chapter2 {}

#[doc = include_str!("../../../book/src/chemoattractant.md")]
pub mod chapter3 {}

#[doc = include_str!("../../../book/src/residual.md")]
pub mod chapter4 {}

#[doc = include_str!("../../../book/src/certification.md")]
pub mod chapter5 {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod chapter6 {}
