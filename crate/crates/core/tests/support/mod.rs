pub mod mailbox;
pub mod synthetic;
pub mod mate;
