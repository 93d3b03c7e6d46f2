//! Fixtures shared by the benchmarks.

use outcomes_core::demo::{seed_demo, DemoSummary, DEMO_SEED};
use outcomes_core::Store;

/// A store in a temporary directory holding the demo cohort. Keep the
/// returned directory alive for as long as the store is used.
pub fn demo_store() -> (tempfile::TempDir, Store, DemoSummary) {
    let dir = tempfile::tempdir().expect("tempdir");
    let store = Store::open(dir.path()).expect("open store");
    let summary = seed_demo(&store, DEMO_SEED, 1).expect("seed demo");
    (dir, store, summary)
}
