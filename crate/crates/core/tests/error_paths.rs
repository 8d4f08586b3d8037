//! Every failure surfaces as a typed error with a stable kind.

mod common;

use common::checks::extraction_bound;
use common::{generate, options, quiet, replay, workspace};
use factflow::agent::ReplayTransport;
use factflow::ingest::IngestError;
use factflow::sheet::server::classify_error;
use factflow::sheet::{add_fact_nl, generate_sheet, EditOp, SheetError};

fn kind(e: &SheetError) -> &'static str {
    classify_error(e).1
}

#[test]
fn extraction_gives_up_after_three_attempts() {
    assert_eq!(extraction_bound().unwrap(), 3);
}

#[test]
fn missing_fixture_names_its_digest() {
    let (_dir, ws) = workspace();
    let empty = tempfile::tempdir().unwrap();
    let err = generate_sheet(&ws, "carsales", None, &options(), &ReplayTransport::new(empty.path()), &quiet).unwrap_err();
    let digest = err.fixture_missing().expect("fixture error").to_string();
    assert_eq!(digest.len(), 64);
    assert!(err.to_string().contains(&digest));
    assert_eq!(kind(&err), "fixture_missing");
}

#[test]
fn unknown_ids_are_not_found() {
    let (_dir, ws) = workspace();
    assert_eq!(kind(&ws.load_sheet(uuid::Uuid::new_v4()).unwrap_err()), "not_found");
    assert_eq!(kind(&ws.load_dataset("no-such-dataset").unwrap_err()), "not_found");
    let e = generate(&ws, "no-such-dataset", None).unwrap_err();
    assert_eq!(kind(&e), "not_found");
}

#[test]
fn stale_revision_conflicts_and_changes_nothing() {
    let (_dir, ws) = workspace();
    let sheet = generate(&ws, "carsales", None).unwrap();
    let op = EditOp::RenameSection { section_id: "s1".into(), topic: "First".into() };
    let after = ws.apply_edit(sheet.id, Some(0), std::slice::from_ref(&op)).unwrap();
    let e = ws.apply_edit(sheet.id, Some(0), &[op]).unwrap_err();
    assert_eq!(kind(&e), "conflict");
    assert_eq!(ws.load_sheet(sheet.id).unwrap(), after);
}

#[test]
fn invalid_edits_are_validation_errors() {
    let (_dir, ws) = workspace();
    let sheet = generate(&ws, "carsales", None).unwrap();
    let bad = [
        EditOp::MoveSection { section_id: "s1".into(), position: 0 },
        EditOp::DeleteSection { section_id: "intro".into() },
        EditOp::MoveFact { fact_id: "f1".into(), section_id: "intro".into(), position: None },
        EditOp::DeleteFact { fact_id: "f99".into() },
    ];
    for op in bad {
        let e = ws.apply_edit(sheet.id, Some(0), std::slice::from_ref(&op)).unwrap_err();
        assert!(matches!(kind(&e), "validation" | "not_found"), "{op:?}: {e}");
    }
    assert_eq!(ws.load_sheet(sheet.id).unwrap(), sheet);
}

#[test]
fn forecasting_is_an_unsupported_capability() {
    let (_dir, ws) = workspace();
    let transport = replay();
    let forecast = "Predict the future trends of car sales";
    let e = generate_sheet(&ws, "carsales", Some(forecast), &options(), &transport, &quiet).unwrap_err();
    assert_eq!(kind(&e), "unsupported_capability");
    let sheet = generate(&ws, "carsales", None).unwrap();
    let e = add_fact_nl(&ws, sheet.id, forecast, &transport).unwrap_err();
    assert_eq!(kind(&e), "unsupported_capability");
    assert_eq!(ws.load_sheet(sheet.id).unwrap(), sheet);
}

#[test]
fn empty_fact_request_is_rejected() {
    let (_dir, ws) = workspace();
    let sheet = generate(&ws, "carsales", None).unwrap();
    let e = add_fact_nl(&ws, sheet.id, "   ", &replay()).unwrap_err();
    assert_eq!(kind(&e), "validation");
}

#[test]
fn malformed_csv_is_an_invalid_dataset() {
    let (_dir, ws) = workspace();
    type Case = (&'static [u8], fn(&IngestError) -> bool);
    let cases: [Case; 4] = [
        (b"", |e| matches!(e, IngestError::Empty)),
        (b"a,b\n1,2,3\n", |e| matches!(e, IngestError::Ragged { row: 2, expected: 2, found: 3 })),
        (b"a,a\n1,2\n", |e| matches!(e, IngestError::DuplicateColumn(_))),
        (b"a,b\n\"1,2\n", |e| matches!(e, IngestError::UnterminatedQuote { .. })),
    ];
    for (bytes, expected) in cases {
        let e = ws.ingest_csv(bytes, "bad", None).unwrap_err();
        assert_eq!(kind(&e), "invalid_dataset", "{e}");
        match &e {
            SheetError::Ingest(inner) => assert!(expected(inner), "{inner}"),
            other => panic!("{other}"),
        }
    }
}
