pub use moc_core;
