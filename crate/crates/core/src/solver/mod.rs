pub mod cartesian;
pub mod radial;
