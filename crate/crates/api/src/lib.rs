//! HTTP/JSON service over one semester snapshot.
//!
//! Reads are served from the in-memory semester. Every mutation must carry
//! the `X-Semester-Version` header with the version the client last saw; a
//! stale value is answered with 409 and nothing changes. Accepted mutations
//! bump the version, are written back to the snapshot file and return the
//! operation's result as canonical JSON with the new version in the same
//! header.

mod error;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::Router;
use capstone_core::advisors::Advisor;
use capstone_core::allocator::ConflictStatus;
use capstone_core::intake::{ConformityChecklist, ProposalForm, SeatProfile, StudentPatch};
use capstone_core::model::{AdvisorId, Organization, ProposalId, Student, StudentId};
use capstone_core::store::{self, to_canonical_json};
use capstone_core::surveys::SurveySubmission;
use capstone_core::workflow::Phase;
use capstone_core::Semester;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

pub use error::ApiError;

pub const VERSION_HEADER: &str = "x-semester-version";

pub struct AppState {
    semester: RwLock<Semester>,
    path: Option<PathBuf>,
}

impl AppState {
    /// Loads and validates the snapshot; mutations are written back to `path`.
    pub fn load(path: impl AsRef<Path>) -> capstone_core::Result<Self> {
        let snap = store::load(path.as_ref())?;
        Ok(AppState {
            semester: RwLock::new(Semester::from_snapshot(snap)?),
            path: Some(path.as_ref().to_path_buf()),
        })
    }

    /// Keeps state in memory only.
    pub fn ephemeral(semester: Semester) -> Self {
        AppState {
            semester: RwLock::new(semester),
            path: None,
        }
    }

    pub async fn snapshot(&self) -> store::SemesterSnapshot {
        self.semester.read().await.snapshot().clone()
    }
}

type Shared = Arc<AppState>;
type ApiResult = Result<Response, ApiError>;

fn json_response<T: Serialize>(value: &T, version: u64) -> ApiResult {
    let body = to_canonical_json(value).map_err(ApiError::from)?;
    Ok((
        StatusCode::OK,
        [
            (header::CONTENT_TYPE, "application/json".to_owned()),
            (
                header::HeaderName::from_static(VERSION_HEADER),
                version.to_string(),
            ),
        ],
        body,
    )
        .into_response())
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| capstone_core::Error::Schema(e).into())
}

/// Empty bodies read as `{}`.
fn parse_or_default<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse(body)
    }
}

fn header_version(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    match headers.get(VERSION_HEADER) {
        None => Ok(None),
        Some(v) => v
            .to_str()
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(Some)
            .ok_or_else(|| ApiError::bad_header(v)),
    }
}

fn check_version(expected: u64, current: u64) -> Result<(), ApiError> {
    if expected != current {
        return Err(capstone_core::Error::VersionConflict {
            expected,
            found: current,
        }
        .into());
    }
    Ok(())
}

/// Runs one mutation under the writer lock: version check, operation,
/// persistence. The in-memory state is only replaced once the file write
/// succeeds.
async fn mutate<T, F>(state: &AppState, headers: &HeaderMap, op: F) -> ApiResult
where
    T: Serialize,
    F: FnOnce(&mut Semester) -> capstone_core::Result<T>,
{
    let expected = header_version(headers)?.ok_or_else(ApiError::version_required)?;
    let mut guard = state.semester.write().await;
    check_version(expected, guard.version())?;
    let mut next = guard.clone();
    let out = op(&mut next)?;
    if let Some(path) = &state.path {
        store::save(next.snapshot(), path)?;
    }
    *guard = next;
    json_response(&out, guard.version())
}

async fn get_state(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(sem.snapshot(), sem.version())
}

async fn get_balance(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(&sem.balance(), sem.version())
}

async fn get_required(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(&sem.required_projects(), sem.version())
}

async fn get_gaps(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(&sem.sourcing_gaps(), sem.version())
}

async fn get_demand(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(&sem.demand(), sem.version())
}

async fn get_allocation(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(sem.allocation()?, sem.version())
}

async fn get_export(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    let text = store::export_allocation(sem.snapshot())?;
    let value: serde_json::Value = parse(&Bytes::from(text))?;
    json_response(&value, sem.version())
}

async fn get_survey_summary(State(s): State<Shared>) -> ApiResult {
    let sem = s.semester.read().await;
    json_response(&sem.survey_summary(), sem.version())
}

async fn post_student(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let record: Student = parse(&body)?;
    mutate(&s, &headers, |sem| sem.register_student(record)).await
}

async fn patch_student(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let patch: StudentPatch = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.update_student(&StudentId(id), patch)
    })
    .await
}

async fn post_organization(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let org: Organization = parse(&body)?;
    mutate(&s, &headers, |sem| sem.register_organization(org)).await
}

#[derive(Deserialize)]
struct ProposalRequest {
    #[serde(default)]
    id: Option<ProposalId>,
    #[serde(flatten)]
    form: ProposalForm,
}

async fn post_proposal(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: ProposalRequest = parse(&body)?;
    mutate(&s, &headers, |sem| sem.submit_proposal(req.form, req.id)).await
}

#[derive(Deserialize)]
struct ReviewRequest {
    checklist: ConformityChecklist,
    #[serde(default)]
    notes: String,
}

async fn post_review(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: ReviewRequest = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.review_conformity(&ProposalId(id), req.checklist, &req.notes)
    })
    .await
}

async fn post_profile(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let profile: SeatProfile = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.set_seat_profile(&ProposalId(id), profile)
    })
    .await
}

#[derive(Default, Deserialize)]
struct NotesRequest {
    #[serde(default)]
    notes: String,
}

async fn post_reject(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: NotesRequest = parse_or_default(&body)?;
    mutate(&s, &headers, |sem| {
        sem.reject_proposal(&ProposalId(id), &req.notes)
    })
    .await
}

async fn post_withdraw(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> ApiResult {
    mutate(&s, &headers, |sem| sem.withdraw_proposal(&ProposalId(id))).await
}

async fn post_advisor(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let advisor: Advisor = parse(&body)?;
    mutate(&s, &headers, |sem| sem.register_advisor(advisor)).await
}

#[derive(Deserialize)]
struct BallotRequest {
    student_id: StudentId,
    choices: Vec<ProposalId>,
}

async fn post_ballot(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: BallotRequest = parse(&body)?;
    let now = chrono::Utc::now();
    mutate(&s, &headers, |sem| {
        sem.submit_ballot(&req.student_id, req.choices, now)
    })
    .await
}

#[derive(Default, Deserialize)]
struct AllocateRequest {
    #[serde(default)]
    seed: Option<u64>,
}

async fn post_allocate(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: AllocateRequest = parse_or_default(&body)?;
    mutate(&s, &headers, |sem| sem.allocate(req.seed)).await
}

/// `to: null` (or absent) means unassigned.
#[derive(Deserialize)]
struct MoveRequest {
    student_id: StudentId,
    #[serde(default)]
    to: Option<ProposalId>,
}

async fn post_whatif(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: MoveRequest = parse(&body)?;
    let sem = s.semester.read().await;
    // previews do not need a version, but a stale one is still refused
    if let Some(v) = header_version(&headers)? {
        check_version(v, sem.version())?;
    }
    json_response(
        &sem.what_if(&req.student_id, req.to.as_ref())?,
        sem.version(),
    )
}

async fn post_move(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: MoveRequest = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.apply_move(&req.student_id, req.to.as_ref())
    })
    .await
}

#[derive(Deserialize)]
struct ConflictRequest {
    student_id: StudentId,
    proposal_id: ProposalId,
    status: ConflictStatus,
}

async fn post_conflict(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: ConflictRequest = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.set_conflict_status(&req.student_id, &req.proposal_id, req.status)
    })
    .await
}

async fn post_finalize(State(s): State<Shared>, headers: HeaderMap) -> ApiResult {
    mutate(&s, &headers, Semester::finalize).await
}

async fn post_assign_advisors(State(s): State<Shared>, headers: HeaderMap) -> ApiResult {
    mutate(&s, &headers, Semester::assign_advisors).await
}

#[derive(Deserialize)]
struct ReassignRequest {
    group: ProposalId,
    advisor: AdvisorId,
}

async fn post_reassign_advisor(
    State(s): State<Shared>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: ReassignRequest = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.reassign_advisor(&req.group, &req.advisor)
    })
    .await
}

#[derive(Serialize)]
struct SurveyStored {
    key: String,
}

async fn post_survey(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let submission: SurveySubmission = parse(&body)?;
    mutate(&s, &headers, |sem| {
        sem.record_survey(submission)
            .map(|key| SurveyStored { key })
    })
    .await
}

#[derive(Deserialize)]
struct AdvanceRequest {
    to: Phase,
}

async fn post_advance(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: AdvanceRequest = parse(&body)?;
    mutate(&s, &headers, |sem| sem.advance(req.to)).await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/balance", get(get_balance))
        .route("/balance/required", get(get_required))
        .route("/balance/gaps", get(get_gaps))
        .route("/demand", get(get_demand))
        .route("/allocation", get(get_allocation))
        .route("/allocation/export", get(get_export))
        .route("/students", post(post_student))
        .route("/students/{id}", patch(patch_student))
        .route("/organizations", post(post_organization))
        .route("/proposals", post(post_proposal))
        .route("/proposals/{id}/review", post(post_review))
        .route("/proposals/{id}/profile", post(post_profile))
        .route("/proposals/{id}/reject", post(post_reject))
        .route("/proposals/{id}/withdraw", post(post_withdraw))
        .route("/advisors", post(post_advisor))
        .route("/ballots", post(post_ballot))
        .route("/allocate", post(post_allocate))
        .route("/allocation/whatif", post(post_whatif))
        .route("/allocation/moves", post(post_move))
        .route("/allocation/conflicts", post(post_conflict))
        .route("/allocation/finalize", post(post_finalize))
        .route("/advisors/assign", post(post_assign_advisors))
        .route("/advisors/reassign", post(post_reassign_advisor))
        .route("/surveys", post(post_survey))
        .route("/surveys/summary", get(get_survey_summary))
        .route("/phase/advance", post(post_advance))
        .fallback(not_found)
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot load snapshot: {0}")]
    Load(capstone_core::Error),
    #[error("cannot serve: {0}")]
    Bind(std::io::Error),
}

/// Loads the snapshot and serves until the process is stopped.
pub async fn serve(snapshot: impl AsRef<Path>, bind: SocketAddr) -> Result<(), ServeError> {
    let state = Arc::new(AppState::load(snapshot).map_err(ServeError::Load)?);
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(ServeError::Bind)?;
    axum::serve(listener, router(state))
        .await
        .map_err(ServeError::Bind)
}
