pub mod qseries;
pub mod modforms;
pub mod exactlinalg;
pub mod newton;
pub mod slopes;
pub mod theta;
pub mod record;
pub mod store;
pub mod fixtures;
pub mod cli;
