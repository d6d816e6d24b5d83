#![allow(dead_code)]

pub mod classify;
pub mod qrm;
