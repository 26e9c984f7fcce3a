//! Float intrinsics that core does not provide without std.

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("lilypond-core needs either the `std` or the `libm` feature");

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
