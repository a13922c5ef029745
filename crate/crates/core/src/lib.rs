pub mod casimir;
pub mod expr;
pub mod lie_algebra;
pub mod matrix;
pub mod models;
pub mod split;
pub mod tensor;
