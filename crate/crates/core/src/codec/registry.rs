//! Named outer-code schemes.
//!
//! Each scheme turns a common parameter set into a [`CodeConfig`] and a
//! [`DecodePolicy`]. The simulator looks schemes up by name, so new variants
//! only need an [`OuterCode`] impl and a call to [`CodeRegistry::register`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelKind;

use super::decoder::{DecodePolicy, RootPolicy};
use super::{CodeConfig, CodeError, Family};

const DEFAULT_WINDOW: usize = 2;

/// Scheme-independent code parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub payload_bits: usize,
    pub sections: usize,
    pub section_bits: usize,
    /// Parity window; schemes without one reject `Some`.
    pub window: Option<usize>,
    pub max_erasures: usize,
}

impl Default for CodeParams {
    fn default() -> Self {
        CodeParams {
            payload_bits: 128,
            sections: 16,
            section_bits: 16,
            window: None,
            max_erasures: 1,
        }
    }
}

pub trait OuterCode: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn config(&self, params: &CodeParams) -> Result<CodeConfig, CodeError>;

    /// `sic` is the caller's explicit choice, `None` for the scheme default.
    fn policy(&self, channel: ChannelKind, sic: Option<bool>, list_cap: usize) -> Result<DecodePolicy, CodeError>;
}

fn window_config(params: &CodeParams) -> Result<CodeConfig, CodeError> {
    let window = params.window.unwrap_or(DEFAULT_WINDOW);
    CodeConfig::new(
        Family::TailBitingWindow { window },
        params.payload_bits,
        params.sections,
        params.section_bits,
        params.max_erasures,
    )
}

/// Enhanced linked-loop code: adaptive root, SIC on the B-channel.
#[derive(Debug, Default, Clone, Copy)]
pub struct Ellc;

impl OuterCode for Ellc {
    fn name(&self) -> &'static str {
        "ellc"
    }

    fn summary(&self) -> &'static str {
        "tail-biting window code, adaptive root, multi-round SIC"
    }

    fn config(&self, params: &CodeParams) -> Result<CodeConfig, CodeError> {
        window_config(params)
    }

    fn policy(&self, channel: ChannelKind, sic: Option<bool>, list_cap: usize) -> Result<DecodePolicy, CodeError> {
        Ok(DecodePolicy {
            root: RootPolicy::Adaptive,
            sic: sic.unwrap_or(channel == ChannelKind::BChannel),
            erasure_recovery: true,
            list_cap,
        })
    }
}

/// The original linked-loop decoder: root fixed at section 0, no SIC.
#[derive(Debug, Default, Clone, Copy)]
pub struct Llc;

impl OuterCode for Llc {
    fn name(&self) -> &'static str {
        "llc"
    }

    fn summary(&self) -> &'static str {
        "tail-biting window code, root section 0, no SIC"
    }

    fn config(&self, params: &CodeParams) -> Result<CodeConfig, CodeError> {
        window_config(params)
    }

    fn policy(&self, _channel: ChannelKind, sic: Option<bool>, list_cap: usize) -> Result<DecodePolicy, CodeError> {
        if sic == Some(true) {
            return Err(CodeError::Unsupported("llc decodes without SIC".into()));
        }
        Ok(DecodePolicy {
            root: RootPolicy::Fixed(0),
            sic: false,
            erasure_recovery: true,
            list_cap,
        })
    }
}

/// Tree code with parity on all earlier sections, decoded from section 0
/// with SIC rounds and no erasure filling.
#[derive(Debug, Default, Clone, Copy)]
pub struct TreeCode;

impl OuterCode for TreeCode {
    fn name(&self) -> &'static str {
        "tree"
    }

    fn summary(&self) -> &'static str {
        "full-history tree code, root section 0, SIC, no erasure recovery"
    }

    fn config(&self, params: &CodeParams) -> Result<CodeConfig, CodeError> {
        if params.window.is_some() {
            return Err(CodeError::Unsupported("tree codes take no window size".into()));
        }
        CodeConfig::new(
            Family::FullHistoryTree,
            params.payload_bits,
            params.sections,
            params.section_bits,
            params.max_erasures,
        )
    }

    fn policy(&self, channel: ChannelKind, sic: Option<bool>, list_cap: usize) -> Result<DecodePolicy, CodeError> {
        Ok(DecodePolicy {
            root: RootPolicy::Fixed(0),
            sic: sic.unwrap_or(channel == ChannelKind::BChannel),
            erasure_recovery: false,
            list_cap,
        })
    }
}

pub struct CodeRegistry {
    schemes: BTreeMap<&'static str, Box<dyn OuterCode>>,
}

impl CodeRegistry {
    pub fn empty() -> Self {
        CodeRegistry {
            schemes: BTreeMap::new(),
        }
    }

    /// `ellc`, `llc` and `tree`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Ellc));
        r.register(Box::new(Llc));
        r.register(Box::new(TreeCode));
        r
    }

    /// Adds a scheme, replacing any scheme with the same name.
    pub fn register(&mut self, scheme: Box<dyn OuterCode>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<&dyn OuterCode, CodeError> {
        self.schemes
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| CodeError::UnknownScheme(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }
}

impl Default for CodeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
