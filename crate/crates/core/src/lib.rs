//! Outcome-oriented predictive process monitoring with explanation-driven
//! retraining.
//!
//! The crate covers the full loop: parse or simulate an event log, label
//! and prefix its traces, encode the prefixes (positional, attribute-aware
//! or constraint-based feature vectors), train a random-forest outcome
//! classifier, explain its errors with exact Shapley attributions, mine and
//! rank the frequent explanation itemsets that characterize each confusion
//! quadrant, shuffle the implicated feature values in the training data
//! (realigning traces where constraint features depend on each other), and
//! retrain.
//!
//! See the `book/` guide for a narrative walkthrough with runnable
//! examples; every snippet there compiles as a doc-test of this crate.

pub mod classifier;
pub mod declare;
pub mod encoding;
pub mod eventlog;
pub mod explainer;
pub mod fei;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod shuffle;
pub mod simulation;
pub mod value;

pub use eventlog::{EventLog, Label, Trace};
pub use value::Value;

// Compile and run the guide's code blocks as doc-tests so the book and the
// library cannot drift apart.
#[cfg(doctest)]
mod book {
    macro_rules! book_page {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            struct $name;
        };
    }

    book_page!(Introduction, "../../../book/src/introduction.md");
    book_page!(EventLogs, "../../../book/src/event-logs.md");
    book_page!(Declare, "../../../book/src/declare.md");
    book_page!(Encodings, "../../../book/src/encodings.md");
    book_page!(Classifier, "../../../book/src/classifier.md");
    book_page!(Explanations, "../../../book/src/explanations.md");
    book_page!(FeiSelection, "../../../book/src/fei-selection.md");
    book_page!(Shuffling, "../../../book/src/shuffling.md");
    book_page!(Pipeline, "../../../book/src/pipeline.md");
}
