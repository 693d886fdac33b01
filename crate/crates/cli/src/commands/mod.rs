pub mod experiment;
pub mod scatter;
pub mod synth;

use std::str::FromStr;

use scatterlab::WaveletFamily;

/// Overwrites `dst` when a flag was given.
pub fn set<T>(dst: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *dst = v;
    }
}

pub fn parse_family(s: &str) -> Result<WaveletFamily, String> {
    WaveletFamily::from_str(s).map_err(|e| e.to_string())
}
