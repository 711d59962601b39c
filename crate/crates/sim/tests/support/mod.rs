pub mod oracle;
pub mod wire;
