pub mod buildmap;
pub mod eval;
pub mod matchseq;
pub mod placedb;
pub mod stitch;
