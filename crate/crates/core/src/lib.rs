pub mod acceptance;
pub mod amoeba;
pub mod builder;
pub mod calculus;
pub mod error;
pub mod flows;
pub mod numerics;
pub mod random;
pub mod scalar;
pub mod torus;
pub mod zoo;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use torus::{AlgebraConfig, Classification, LSection, TorusFn, TwoFormSection};

pub type TorusFunction = TorusFn<f64>;
pub type TorusFunction32 = TorusFn<f32>;
pub type Section = LSection<f64>;
pub type TwoForm = TwoFormSection<f64>;
