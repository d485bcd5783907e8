pub mod imaging;
pub mod link;
pub mod mission;
pub mod sim;
pub mod store;
