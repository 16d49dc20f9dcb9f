use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use specmerge::{merge_spectral, read_pgm, write_pgm, ImagePlane, MergeConfig, PgmDepth};
use specmerge_tuner::router;
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Vec<u8>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn pgm(rows: usize, cols: usize, f: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for x in 0..rows {
        for y in 0..cols {
            out.push(f(x, y));
        }
    }
    out
}

fn gradient() -> Vec<u8> {
    pgm(16, 12, |x, y| ((x * 13 + y * 7) % 256) as u8)
}

fn checker() -> Vec<u8> {
    pgm(
        16,
        12,
        |x, y| if (x / 3 + y / 2) % 2 == 0 { 200 } else { 30 },
    )
}

async fn new_session(app: &Router) -> String {
    let (status, body) = call(app, Method::POST, "/sessions", vec![]).await;
    assert_eq!(status, StatusCode::CREATED);
    json(&body)["id"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn single_image_merge_is_identity() {
    let app = router();
    let id = new_session(&app).await;
    let image = gradient();
    let (status, body) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        image.clone(),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(
        json(&body),
        serde_json::json!({"index": 0, "rows": 16, "cols": 12})
    );

    let (status, merged) = call(
        &app,
        Method::GET,
        &format!("/sessions/{id}/merged.pgm"),
        vec![],
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(merged, image);
}

#[tokio::test]
async fn threshold_reduces_retained_units() {
    let app = router();
    let id = new_session(&app).await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        gradient(),
    )
    .await;

    let (_, body) = call(&app, Method::GET, &format!("/sessions/{id}/report"), vec![]).await;
    let full = json(&body);
    assert_eq!(full["retained_units"], full["total_units"]);
    assert!(full["psnr_vs_full_db"].is_null());

    let params = br#"{"coeffs":[1.0],"threshold_frac":0.5}"#.to_vec();
    let (status, echoed) = call(&app, Method::PUT, &format!("/sessions/{id}/params"), params).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&echoed)["threshold_frac"], 0.5);
    assert_eq!(json(&echoed)["renorm"], "divide_by_max");

    let (_, body) = call(&app, Method::GET, &format!("/sessions/{id}/report"), vec![]).await;
    let reduced = json(&body);
    assert!(reduced["retained_units"].as_u64().unwrap() < reduced["total_units"].as_u64().unwrap());
    assert_eq!(reduced["total_units"], 192);
}

#[tokio::test]
async fn repeated_gets_are_byte_identical() {
    let app = router();
    let id = new_session(&app).await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        gradient(),
    )
    .await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        checker(),
    )
    .await;
    let uri = format!("/sessions/{id}/merged.pgm");
    let (_, first) = call(&app, Method::GET, &uri, vec![]).await;
    let (_, second) = call(&app, Method::GET, &uri, vec![]).await;
    assert_eq!(first, second);
    let uri = format!("/sessions/{id}/spectrum.pgm");
    let (status, first) = call(&app, Method::GET, &uri, vec![]).await;
    assert_eq!(status, StatusCode::OK);
    let (_, second) = call(&app, Method::GET, &uri, vec![]).await;
    assert_eq!(first, second);
    assert_eq!(read_pgm(&first).unwrap().max(), 1.0);
}

#[tokio::test]
async fn merged_image_matches_library_merge() {
    let app = router();
    let id = new_session(&app).await;
    let images = [gradient(), checker()];
    for image in &images {
        call(
            &app,
            Method::POST,
            &format!("/sessions/{id}/images"),
            image.clone(),
        )
        .await;
    }
    let params =
        br#"{"coeffs":[0.7,1.3],"threshold_frac":0.02,"renorm":"clamp","align":"topleft_pad"}"#;
    let (status, _) = call(
        &app,
        Method::PUT,
        &format!("/sessions/{id}/params"),
        params.to_vec(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (_, served) = call(
        &app,
        Method::GET,
        &format!("/sessions/{id}/merged.pgm"),
        vec![],
    )
    .await;

    let planes: Vec<ImagePlane> = images.iter().map(|b| read_pgm(b).unwrap()).collect();
    let cfg = MergeConfig::default()
        .with_coefficients(vec![0.7, 1.3])
        .with_threshold_fraction(0.02)
        .with_renorm(specmerge::Renorm::Clamp)
        .with_alignment(specmerge::AlignMode::TopleftPad.into());
    let expected = write_pgm(
        &merge_spectral(&planes, &cfg).unwrap().merged,
        PgmDepth::Eight,
    );
    assert_eq!(served, expected);
}

#[tokio::test]
async fn zero_coefficient_removes_an_image() {
    let app = router();
    let id = new_session(&app).await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        gradient(),
    )
    .await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        checker(),
    )
    .await;
    let params = br#"{"coeffs":[1.0,0.0]}"#.to_vec();
    call(&app, Method::PUT, &format!("/sessions/{id}/params"), params).await;
    let (_, served) = call(
        &app,
        Method::GET,
        &format!("/sessions/{id}/merged.pgm"),
        vec![],
    )
    .await;
    assert_eq!(served, gradient());
}

#[tokio::test]
async fn invalid_params_are_rejected_with_field() {
    let app = router();
    let id = new_session(&app).await;
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        gradient(),
    )
    .await;
    let uri = format!("/sessions/{id}/params");

    let (status, body) = call(
        &app,
        Method::PUT,
        &uri,
        br#"{"threshold_frac":1.0}"#.to_vec(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["field"], "threshold_frac");

    let (status, body) = call(&app, Method::PUT, &uri, br#"{"coeffs":[1,1]}"#.to_vec()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["field"], "coeffs");

    let (status, _) = call(&app, Method::PUT, &uri, b"not json".to_vec()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    // A rejected PUT leaves the previous params in place.
    let (_, body) = call(&app, Method::GET, &uri, vec![]).await;
    assert_eq!(json(&body)["threshold_frac"], 0.0);
}

#[tokio::test]
async fn malformed_upload_and_unknown_session() {
    let app = router();
    let id = new_session(&app).await;
    let (status, body) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/images"),
        b"P7 junk".to_vec(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(json(&body)["error"].as_str().unwrap().contains("PGM"));

    let (status, _) = call(&app, Method::GET, "/sessions/nope/report", vec![]).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::POST, "/sessions/nope/images", gradient()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _) = call(
        &app,
        Method::GET,
        &format!("/sessions/{id}/merged.pgm"),
        vec![],
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn delete_removes_session() {
    let app = router();
    let id = new_session(&app).await;
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), vec![]).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), vec![]).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = router();
    let a = new_session(&app).await;
    let b = new_session(&app).await;
    assert_ne!(a, b);
    call(
        &app,
        Method::POST,
        &format!("/sessions/{a}/images"),
        gradient(),
    )
    .await;
    let (status, _) = call(
        &app,
        Method::GET,
        &format!("/sessions/{b}/merged.pgm"),
        vec![],
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn cors_headers_are_permissive() {
    let app = router();
    let request = Request::builder()
        .method(Method::OPTIONS)
        .uri("/sessions")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "PUT")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert!(response
        .headers()
        .contains_key("access-control-allow-origin"));
}
