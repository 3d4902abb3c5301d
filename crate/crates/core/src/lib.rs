pub mod special;
pub mod quadrature;
pub mod fredholm;
pub mod tracy_widom;
pub mod sampler;
pub mod stats;
pub mod bounds;
