//! Heterogeneous-PSK physical-layer network coding for two-way relaying.
//!
//! Users A and B send `M1`-PSK and `M2`-PSK symbols (`M1 >= M2`) to a relay in
//! one multiple-access channel use. The relay jointly decodes the pair, maps it
//! through a fade-state dependent Latin rectangle to a cluster label and
//! broadcasts the label back over `N_t` channel uses of the weaker user's
//! constellation.
//!
//! * [`psk`]: constellations, bit labelling, difference constellations.
//! * [`sfs`]: singular fade states in closed form and by brute force.
//! * [`clustering`]: Latin-rectangle relay maps, built-in and constructed libraries.
//! * [`quantizer`]: map selection and the analytic partition of the fade-state plane.
//! * [`sim`]: Monte-Carlo simulation of both relaying phases.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod fmt;
pub mod psk;
pub mod quantizer;
pub mod sfs;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
