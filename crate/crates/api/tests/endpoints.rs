mod common;

use std::sync::Arc;

use axum::http::{Method, StatusCode};
use capstone_api::{router, AppState};
use capstone_core::store::{self, to_canonical_json};
use capstone_core::workflow::Phase;
use capstone_core::Semester;
use serde_json::json;
use tempfile::tempdir;

use common::*;

#[tokio::test]
async fn reads_pass_module_results_through() {
    let snap = load("semester.json");
    let sem = Semester::from_snapshot(snap.clone()).unwrap();
    let app = app_for(snap.clone());

    let r = get(&app, "/balance").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.text, to_canonical_json(&sem.balance()).unwrap());
    assert_eq!(r.version(), Some(snap.version));

    assert_eq!(
        get(&app, "/demand").await.text,
        to_canonical_json(&sem.demand()).unwrap()
    );
    assert_eq!(
        get(&app, "/allocation").await.text,
        to_canonical_json(sem.allocation().unwrap()).unwrap()
    );
    assert_eq!(
        get(&app, "/state").await.text,
        to_canonical_json(&snap).unwrap()
    );
    assert_eq!(
        get(&app, "/surveys/summary").await.text,
        to_canonical_json(&sem.survey_summary()).unwrap()
    );
    assert_eq!(
        get(&app, "/balance/required").await.json()["total"]["necessary_projects"],
        3
    );
    assert_eq!(
        get(&app, "/allocation/export").await.text,
        store::export_allocation(&snap).unwrap()
    );
    // reads are idempotent
    assert_eq!(
        get(&app, "/state").await.text,
        get(&app, "/state").await.text
    );
}

#[tokio::test]
async fn move_outside_allocation_phase_is_gated() {
    let mut snap = load("cohort100.json");
    snap.phase = Phase::BallotWindow;
    let app = app_for(snap.clone());
    let r = post(
        &app,
        "/allocation/moves",
        Some(snap.version),
        json!({"student_id": "S000", "to": "P00"}),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    let body = r.json();
    assert_eq!(body["code"], "phase_gate");
    assert_eq!(
        body["details"],
        json!({"action": "apply_move", "phase": "ballot_window"})
    );
}

#[tokio::test]
async fn versions_are_enforced() {
    let snap = load("cohort100.json");
    let v = snap.version;
    let app = app_for(snap);

    let r = post(&app, "/allocate", None, json!({})).await;
    assert_eq!(r.status, StatusCode::PRECONDITION_REQUIRED);
    assert_eq!(r.json()["code"], "version_required");

    let r = post(&app, "/allocate", Some(v), json!({})).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.version(), Some(v + 1));

    // a second client still holding the old version loses
    let r = post(
        &app,
        "/allocation/moves",
        Some(v),
        json!({"student_id": "S000", "to": null}),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["code"], "version_conflict");
    assert_eq!(r.json()["details"], json!({"expected": v, "found": v + 1}));
    assert_eq!(get(&app, "/state").await.json()["version"], v + 1);

    let r = call(&app, Method::POST, "/allocate", None, None).await;
    assert_eq!(r.status, StatusCode::PRECONDITION_REQUIRED);
    let mut req = axum::http::Request::builder()
        .method("POST")
        .uri("/allocate")
        .header("x-semester-version", "abc");
    req = req.header("content-type", "application/json");
    let resp =
        tower::ServiceExt::oneshot(app.clone(), req.body(axum::body::Body::empty()).unwrap())
            .await
            .unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn mutation_bodies_equal_module_results() {
    let snap = load("cohort100.json");
    let v = snap.version;
    let mut sem = Semester::from_snapshot(snap.clone()).unwrap();
    let app = app_for(snap);

    let expected = sem.allocate(Some(3)).unwrap();
    let r = post(&app, "/allocate", Some(v), json!({"seed": 3})).await;
    assert_eq!(r.text, to_canonical_json(&expected).unwrap());

    let student = expected
        .groups
        .values()
        .next()
        .unwrap()
        .iter()
        .next()
        .unwrap()
        .clone();
    let target = expected.groups.keys().nth(1).unwrap().clone();

    let preview = sem.what_if(&student, Some(&target)).unwrap();
    let r = post(
        &app,
        "/allocation/whatif",
        None,
        json!({"student_id": student, "to": target}),
    )
    .await;
    assert_eq!(r.text, to_canonical_json(&preview).unwrap());
    assert_eq!(r.version(), Some(v + 1), "previews do not bump the version");

    let moved = sem.apply_move(&student, Some(&target)).unwrap();
    let r = post(
        &app,
        "/allocation/moves",
        Some(v + 1),
        json!({"student_id": student, "to": target}),
    )
    .await;
    assert_eq!(r.text, to_canonical_json(&moved).unwrap());
    assert_eq!(
        moved.objective.total - expected.objective.total,
        preview.objective_delta
    );

    let r = post(
        &app,
        "/allocation/whatif",
        Some(v),
        json!({"student_id": student, "to": null}),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn client_errors_use_api_error_shape() {
    let app = app_for(load("cohort100.json"));
    let r = post(
        &app,
        "/allocation/whatif",
        None,
        json!({"student_id": "S000"}),
    )
    .await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["code"], "no_allocation");

    let r = call(
        &app,
        Method::POST,
        "/allocate",
        Some(0),
        Some(json!("not an object")),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "schema");

    let r = get(&app, "/nowhere").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    let body = r.json();
    assert!(body["message"].is_string() && body.get("details").is_some());
}

#[tokio::test]
async fn mutations_are_persisted() {
    let tmp = tempdir().unwrap();
    let path = tmp.path().join("semester.json");
    store::save(&load("cohort100.json"), &path).unwrap();
    let v = store::load(&path).unwrap().version;
    let app = router(Arc::new(AppState::load(&path).unwrap()));

    let r = post(&app, "/allocate", Some(v), json!({})).await;
    assert_eq!(r.status, StatusCode::OK);
    let on_disk = store::load(&path).unwrap();
    assert_eq!(on_disk.version, v + 1);
    assert_eq!(
        to_canonical_json(&on_disk.allocation.unwrap()).unwrap(),
        r.text
    );

    // failed mutation leaves the file alone
    let before = std::fs::read(&path).unwrap();
    let r = post(
        &app,
        "/phase/advance",
        Some(v + 1),
        json!({"to": "execution"}),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["code"], "phase_transition");
    assert_eq!(std::fs::read(&path).unwrap(), before);
}

/// Drives a whole semester through the HTTP surface.
#[tokio::test]
async fn full_semester_over_http() {
    let app = app_for(store::SemesterSnapshot::new(Default::default()));
    let mut v = 0;
    macro_rules! ok {
        ($method:expr, $uri:expr, $body:expr) => {{
            let r = call(&app, $method, $uri, Some(v), Some($body)).await;
            assert_eq!(r.status, StatusCode::OK, "{} {}", $uri, r.text);
            v = r.version().unwrap();
            r.json()
        }};
    }

    for i in 0..4 {
        ok!(
            Method::POST,
            "/organizations",
            json!({"id": format!("O{i}"), "name": format!("Org {i}"), "category": "company"})
        );
    }
    let programs = ["EC", "EX", "EM", "CS"];
    for i in 0..8 {
        let mut s = json!({"id": format!("S{i}"), "name": format!("Student {i}"), "program": programs[i % 4], "gpa": 7.0 + i as f64 / 4.0, "interests": ["robotics"]});
        if i == 0 {
            s["work_history"] = json!([{"organization": "org 1", "kind": "job", "status": "past"}]);
        }
        ok!(Method::POST, "/students", s);
    }
    let updated = ok!(Method::PATCH, "/students/S7", json!({"gpa": 9.5}));
    assert_eq!(updated["gpa"], 9.5);
    ok!(
        Method::POST,
        "/advisors",
        json!({"id": "A1", "name": "One"})
    );
    ok!(Method::POST, "/phase/advance", json!({"to": "sourcing"}));

    let checklist = json!({"items": vec![true; 10]});
    for i in 0..6 {
        let p = ok!(
            Method::POST,
            "/proposals",
            json!({"title": format!("Project {i}"), "description": "d", "deliverables": "x", "areas": ["robotics"], "org_id": format!("O{}", i % 4)})
        );
        let id = p["id"].as_str().unwrap().to_owned();
        if i == 5 {
            ok!(
                Method::POST,
                &format!("/proposals/{id}/withdraw"),
                json!({})
            );
            continue;
        }
        ok!(
            Method::POST,
            &format!("/proposals/{id}/review"),
            json!({"checklist": checklist, "notes": "fine"})
        );
        let p = ok!(
            Method::POST,
            &format!("/proposals/{id}/profile"),
            json!({"seats": [["EC", "EX", "EM", "CS"], ["EC", "EX", "EM", "CS"], ["EC", "EX", "EM", "CS"], ["EC", "EX", "EM", "CS"]]})
        );
        assert_eq!(p["status"], "approved");
    }
    for to in ["conformity_review", "catalog_published", "ballot_window"] {
        ok!(Method::POST, "/phase/advance", json!({"to": to}));
    }
    let r = post(
        &app,
        "/ballots",
        Some(v),
        json!({"student_id": "S0", "choices": ["P001", "P002", "P003", "P004"]}),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "ballot_below_minimum");
    let r = post(
        &app,
        "/ballots",
        Some(v),
        json!({"student_id": "S0", "choices": ["P001", "P002", "P003", "P004", "P006"]}),
    )
    .await;
    assert_eq!(r.json()["code"], "ballot_unapproved");
    for i in 0..8 {
        let order = if i < 4 {
            ["P001", "P002", "P003", "P004", "P005"]
        } else {
            ["P002", "P001", "P003", "P004", "P005"]
        };
        ok!(
            Method::POST,
            "/ballots",
            json!({"student_id": format!("S{i}"), "choices": order})
        );
    }
    let demand = get(&app, "/demand").await.json();
    assert_eq!(demand[0]["first_choice_count"], 4);
    assert_eq!(demand[1]["first_choice_count"], 4);

    ok!(Method::POST, "/phase/advance", json!({"to": "allocation"}));
    let a = ok!(Method::POST, "/allocate", json!({}));
    assert_eq!(a["groups"]["P001"].as_array().unwrap().len(), 4);
    assert_eq!(a["conflicts"][0]["status"], "open");
    let a = ok!(
        Method::POST,
        "/allocation/conflicts",
        json!({"student_id": "S0", "proposal_id": "P002", "status": "waived"})
    );
    assert_eq!(a["conflicts"][0]["status"], "waived");
    let a = ok!(Method::POST, "/allocation/finalize", json!({}));
    assert_eq!(a["finalized"], true);
    let r = post(
        &app,
        "/allocation/moves",
        Some(v),
        json!({"student_id": "S0", "to": "P002"}),
    )
    .await;
    assert_eq!(r.json()["code"], "finalized");

    ok!(
        Method::POST,
        "/phase/advance",
        json!({"to": "advisor_assignment"})
    );
    let map = ok!(Method::POST, "/advisors/assign", json!({}));
    assert_eq!(map, json!({"P001": "A1", "P002": "A1"}));
    ok!(Method::POST, "/phase/advance", json!({"to": "execution"}));
    let stored = ok!(
        Method::POST,
        "/surveys",
        json!({"kind": "partner", "org_id": "O0", "proposal_id": "P001", "progressed_as_expected": true, "recommend_score": 9, "phase": "pulse"})
    );
    assert_eq!(stored["key"], "partner/P001/pulse");
    ok!(
        Method::POST,
        "/surveys",
        json!({"kind": "student", "student_id": "S1", "proposal_id": "P001", "recommend_company": "strongly_recommend", "top_choice_employer": true, "phase": "pulse"})
    );
    let summary = get(&app, "/surveys/summary").await.json();
    assert_eq!(summary["partner_pulse"]["mean_score"], 9.0);
    assert_eq!(
        summary["student_pulse"]["percentages"]["strongly_recommend"],
        100.0
    );
    assert_eq!(summary["partner_final"]["responses"], 0);

    let state = get(&app, "/state").await.json();
    assert_eq!(state["version"], v);
    assert_eq!(state["phase"], "execution");
}
