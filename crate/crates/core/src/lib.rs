pub mod cosets;
pub mod denominators;
pub mod error;
pub mod exact;
pub mod expansion;
pub mod formal_group;
pub mod qseries;
pub mod quaternion;
pub mod recover;
pub mod series;
