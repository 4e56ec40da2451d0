// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::fault::FaultError;
use crate::graph::GraphError;
use crate::neuro::NeuroError;
use crate::protocol::ProtocolError;
use crate::rb::RbError;
use crate::specs::SpecError;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error(transparent)]
    Rb(#[from] RbError),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
