// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

pub mod bessel;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod moment;
pub mod par;
pub mod spectral;

pub use error::{Error, Result};
