// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Bakry-Émery curvature of weighted graphs and doubly warped graph products.
//!
//! The crate is organised bottom-up: [`graph`] holds the data model and the
//! operators `Δ`, `Γ`, `Γ₂`; [`curvature`] computes exact curvature functions
//! from them; [`warped`] builds doubly warped (and twisted) products and
//! evaluates the product curvature bounds; [`metrics`] implements the path,
//! degree-path and resistance metrics. [`io`], [`corpus`] and [`verify`]
//! serve the command-line front end.

pub mod corpus;
pub mod curvature;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod verify;
pub mod warped;

pub use curvature::{CurvatureError, CurvatureResult, LocalForms, Saturation};
pub use graph::{Dim, GraphError, VertexFunction, WeightedGraph};
