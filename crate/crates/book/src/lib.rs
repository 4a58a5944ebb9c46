//! Guide chapters compiled as doctests.
// Each chapter is its own module so a failing snippet points at its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}
#[doc = include_str!("../../../book/src/regularization.md")]
pub mod regularization {}
#[doc = include_str!("../../../book/src/heat_kernel.md")]
pub mod heat_kernel {}
#[doc = include_str!("../../../book/src/cutoffs.md")]
pub mod cutoffs {}
#[doc = include_str!("../../../book/src/certifier.md")]
pub mod certifier {}
#[doc = include_str!("../../../book/src/reference_models.md")]
pub mod reference_models {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
