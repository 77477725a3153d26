//! Payload text files and the channel-output file shared by `encode` and
//! `decode`.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ellc::channel::ChannelOutput;
use ellc::codec::Codeword;
use ellc::gf2::BitVector;
use ellc::sim::ExperimentSpec;

/// Hex digits, most significant first; bit `i` of the payload is bit `i` of
/// the number. Shorter strings are zero-extended.
pub fn parse_payload(line: &str, bits: usize) -> Result<BitVector> {
    let digits = line.trim().trim_start_matches("0x");
    if digits.is_empty() {
        bail!("empty payload");
    }
    let mut out = vec![false; bits];
    for (k, c) in digits.chars().rev().enumerate() {
        let v = c.to_digit(16).with_context(|| format!("not a hex digit: {c:?}"))?;
        for i in 0..4 {
            if (v >> i) & 1 == 1 {
                let at = 4 * k + i;
                if at >= bits {
                    bail!("payload {line:?} is longer than {bits} bits");
                }
                out[at] = true;
            }
        }
    }
    Ok(BitVector::from_bits(out))
}

pub fn format_payload(p: &BitVector) -> String {
    let digits = p.len().div_ceil(4).max(1);
    (0..digits)
        .rev()
        .map(|k| {
            let v = (0..4)
                .filter(|i| 4 * k + i < p.len() && p.get(4 * k + i))
                .fold(0u32, |acc, i| acc | 1 << i);
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}

pub fn parse_payloads(text: &str, bits: usize) -> Result<Vec<BitVector>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| parse_payload(l, bits).with_context(|| format!("line {}", n + 1)))
        .collect()
}

/// What `encode` writes.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub spec: ExperimentSpec,
    pub pe: f64,
    pub codewords: Vec<Codeword>,
    pub output: ChannelOutput,
}
