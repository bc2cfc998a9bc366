pub mod boxdim;
pub mod cover;
pub mod describe;
pub mod doubling;
pub mod netaudit;
pub mod percolate;
pub mod visibility;
