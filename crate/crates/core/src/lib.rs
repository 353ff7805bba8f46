//! Direct temporal relation datasets from standoff-annotated clinical text.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`corpus`] parses `{id}.txt` / `{id}.ann` pairs into [`corpus::Document`]s.
//! 2. [`closure`] computes the transitive closure of each document's TLINKs.
//! 3. [`candidates`] enumerates intra-sentential (event, timex) pairs and labels
//!    them from the closed link set, using `NOREL` for unrelated pairs.
//! 4. [`emitter`] tags each pair's sentence with `<e> … </e>` / `<t> … </t>`
//!    markers, and [`sampling`] balances the training instances.
//! 5. [`scorer`] compares gold candidates with a predictions file and reports
//!    per-type and micro precision, recall and F.
//!
//! With the default `parallel` feature, per-document stages run on rayon.
//! Without it they run sequentially. Output is identical either way.

pub mod candidates;
pub mod cli;
pub mod closure;
pub mod corpus;
pub mod emitter;
pub mod parallel;
pub mod sampling;
pub mod scorer;
pub mod synth;

pub use candidates::{generate_candidates, CandidateOptions, CandidatePair, CandidateSet};
pub use closure::{close, close_links, normalize, Closure, Conflict, ConflictKind, NormalizedLinkSet};
pub use corpus::{Corpus, Document, Event, RelationType, Span, TemporalLink, Timex};
pub use emitter::{tag_sentence, Instance, Prediction};
pub use sampling::{AugmenterKind, AugmenterSpec, SamplingConfig, Strategy};
pub use scorer::{error_reduction, f_measure, score, MetricsReport};
