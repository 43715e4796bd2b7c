//! File readers and writers for traces, phase-event logs, and scenario
//! catalogs, plus the seeded synthetic corpus generator used for desk-scale
//! verification.

mod adapter;
mod catalog;
mod csv;
mod segments;
mod synth;

pub use adapter::{adapt_csv, ColumnMapSpec};
pub use catalog::{load_catalog, write_catalog, ScenarioMeta, CATALOG_VERSION};
pub use csv::{
    read_phase_events_csv, read_trace_csv, read_trace_samples, write_phase_events_csv,
    write_trace_csv, EVENT_HEADER, TRACE_HEADER,
};
pub use segments::{read_segments, write_segments, SEGMENTS_MANIFEST};
pub use synth::{
    generate_corpus, synth_generate, BatchSpec, CoreSpec, CorpusSpec, LabelEffect, LabelSpec,
    PhaseShape, PhaseTemplate, SynthScenario, SynthSpec,
};
