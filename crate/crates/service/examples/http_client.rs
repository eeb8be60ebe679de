//! Starts the HTTP service on a local port and drives it with raw HTTP/1.1
//! requests over a TCP stream.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use dpsig_service::http::serve;
use dpsig_service::VerificationService;
use serde_json::{json, Value};

fn request(addr: &str, method: &str, path: &str, content_type: &str, body: &[u8]) -> Value {
    let mut stream = TcpStream::connect(addr).expect("connect");
    let head = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).unwrap();
    stream.write_all(body).unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    let body = reply.split("\r\n\r\n").nth(1).unwrap_or("");
    serde_json::from_str(body).unwrap_or(Value::String(body.to_string()))
}

fn main() {
    let addr = "127.0.0.1:38217";
    let runtime = tokio::runtime::Runtime::new().unwrap();
    runtime.spawn(async move {
        serve(Arc::new(VerificationService::new()), addr)
            .await
            .unwrap();
    });
    std::thread::sleep(std::time::Duration::from_millis(200));

    let mut csv = String::from("x,y\n");
    for i in 0..1_000u64 {
        let x = (i % 50) as f64 / 10.0;
        csv.push_str(&format!(
            "{x},{}\n",
            1.0 + 0.3 * x + ((i * 37) % 17) as f64 / 8.0
        ));
    }
    let boundary = "dpsigboundary";
    let form = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"d.csv\"\r\n\r\n{csv}\r\n--{boundary}--\r\n"
    );
    let uploaded = request(
        addr,
        "POST",
        "/datasets",
        &format!("multipart/form-data; boundary={boundary}"),
        form.as_bytes(),
    );
    println!("upload  -> {uploaded}");
    let dataset_id = uploaded["dataset_id"].as_str().unwrap();

    let opened = request(
        addr,
        "POST",
        "/sessions",
        "application/json",
        json!({ "dataset_id": dataset_id, "epsilon_total": 1.0 })
            .to_string()
            .as_bytes(),
    );
    println!("session -> {opened}");
    let session = opened["session_id"].as_str().unwrap();

    let query = json!({
        "dataset_id": dataset_id, "response_column": "y", "predictor_columns": ["x"],
        "coefficient": "x", "epsilon": 0.5, "M": 20, "a": 2.0, "n_mc": 20000, "seed": 1
    });
    let verify = format!("/sessions/{session}/verify");
    for _ in 0..3 {
        let reply = request(
            addr,
            "POST",
            &verify,
            "application/json",
            query.to_string().as_bytes(),
        );
        println!("verify  -> {reply}");
    }
    let budget = request(
        addr,
        "GET",
        &format!("/sessions/{session}/budget"),
        "application/json",
        b"",
    );
    println!("budget  -> remaining {}", budget["epsilon_remaining"]);
}
