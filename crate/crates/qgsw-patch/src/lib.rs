pub mod bessel;
pub mod cantor;
pub mod contour;
pub mod dynamics;
pub mod fourier;
pub mod kam;
pub mod par;
pub mod spectrum;
