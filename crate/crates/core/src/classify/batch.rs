//! Batch classification: per-record independence, input-order output,
//! per-record failures that never abort the batch.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::ingest::AppRecord;
use crate::ontology::ActivitySnapshot;
use crate::search::Embedder;

use super::pipeline::{Classifier, ClassifyOptions};
use super::{ClassificationResult, ClassifyError, ModelClient, Strategy};

/// A record that could not be classified.
#[derive(Debug)]
pub struct ClassifyFailure {
    /// Index of the record in the input order.
    pub index: usize,
    pub record: String,
    pub error: ClassifyError,
}

/// Batch results in input order plus the failure ledger.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub results: Vec<ClassificationResult>,
    pub failures: Vec<ClassifyFailure>,
}

/// Classify every record. Output order equals input order regardless of
/// completion order; failures are recorded per record. The batch-level
/// call itself only fails on setup errors (bad `k`).
pub fn batch_classify(
    snapshot: &ActivitySnapshot,
    records: &[AppRecord],
    strategy: Strategy,
    model: &dyn ModelClient,
    embedder: &dyn Embedder,
    k: Option<usize>,
    parallelism: usize,
) -> Result<BatchOutcome, ClassifyError> {
    let mut options = ClassifyOptions::new(strategy);
    options.k = k;
    let classifier = Classifier::new(snapshot, model, embedder, options)?;
    let workers = if model.serial_only() {
        1
    } else {
        parallelism.max(1).min(records.len().max(1))
    };

    let mut slots: Vec<Option<Result<ClassificationResult, ClassifyError>>> = Vec::new();
    slots.resize_with(records.len(), || None);

    if workers <= 1 {
        for (i, record) in records.iter().enumerate() {
            slots[i] = Some(classifier.classify(record));
        }
    } else {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let classifier = &classifier;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= records.len() {
                        break;
                    }
                    let outcome = classifier.classify(&records[i]);
                    if tx.send((i, outcome)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        for (i, outcome) in rx {
            slots[i] = Some(outcome);
        }
    }

    let mut outcome = BatchOutcome::default();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.expect("every record was processed") {
            Ok(result) => outcome.results.push(result),
            Err(error) => outcome.failures.push(ClassifyFailure {
                index: i,
                record: records[i].name.clone(),
                error,
            }),
        }
    }
    Ok(outcome)
}
