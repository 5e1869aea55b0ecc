//! Event-basis detection for thematic information flows.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`corpus`]: load a timestamped document collection and form a thematic
//!    flow with a boolean query.
//! 2. [`flowseries`]: count documents per day, smooth the dynamics and
//!    correlate windows of the series against a lifecycle template over a
//!    grid of shifts and scales (the correlogram).
//! 3. Narrow the time frame to the strongest correlogram peak.
//! 4. [`termbase`]: rank terms by TF-IDF, intersect with an event lexicon and
//!    augment the flow query; [`sourcegraph`] links the publishing sources
//!    through a horizontal visibility graph.
//! 5. [`eventcluster`]: keyword-seeded spherical k-means over the event
//!    documents.
//!
//! [`synthflow`] generates corpora and series with planted ground truth.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases below name the concrete instantiations.

pub mod corpus;
pub mod error;
pub mod eventcluster;
pub mod flowseries;
pub mod scalar;
pub mod sourcegraph;
pub mod synthflow;
pub mod termbase;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use corpus::{Corpus, Document, FlowQuery, TokenizedDoc};
pub use eventcluster::{Assignments, Centroid, Clustering, DocVector, SparseVector};
pub use flowseries::{ControlPoint, Correlogram, DailySeries, LifecycleTemplate, Peak};
pub use sourcegraph::{SourceGraph, VisibilityGraph};
pub use synthflow::{BurstSpec, ClusterSpec, PlantedCluster};
pub use termbase::{EventLexicon, EventTerm, TermWeight};

pub type DailySeriesF64 = DailySeries<f64>;
pub type DailySeriesF32 = DailySeries<f32>;
pub type LifecycleTemplateF64 = LifecycleTemplate<f64>;
pub type LifecycleTemplateF32 = LifecycleTemplate<f32>;
pub type CorrelogramF64 = Correlogram<f64>;
pub type CorrelogramF32 = Correlogram<f32>;
pub type PeakF64 = Peak<f64>;
pub type TermWeightF64 = TermWeight<f64>;
pub type TermWeightF32 = TermWeight<f32>;
pub type DocVectorF64 = DocVector<f64>;
pub type DocVectorF32 = DocVector<f32>;
pub type CentroidF64 = Centroid<f64>;
pub type CentroidF32 = Centroid<f32>;
pub type ClusteringF64 = Clustering<f64>;
pub type ClusteringF32 = Clustering<f32>;
