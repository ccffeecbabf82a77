//! Start the JSON service on a free port, query it once and exit.
//! With `--forever ADDR` it keeps serving on ADDR instead.

use std::io::{Read, Write};
use std::net::TcpStream;

fn request(addr: &str, method: &str, path: &str, body: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).unwrap();
    out
}

#[tokio::main]
async fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some("--forever") {
        let addr = args.get(2).cloned().unwrap_or_else(|| "127.0.0.1:8080".into());
        println!("listening on http://{addr}");
        polyflex::service::serve(&addr).await.unwrap();
        return;
    }
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    tokio::spawn(async move { axum::serve(listener, polyflex::service::router()).await.unwrap() });

    let addr2 = addr.clone();
    let (health, build, bad) = tokio::task::spawn_blocking(move || {
        let params = r#"{"params":{"l":[3.6,3.9,1,3.9,2.9],"h":[6.5,6.5,6.1]}}"#;
        let bad = r#"{"params":{"l":[3.6,3.9,0,3.9,2.9],"h":[6.5,6.5,6.1]}}"#;
        (request(&addr2, "GET", "/health", ""), request(&addr2, "POST", "/build", params), request(&addr2, "POST", "/build", bad))
    })
    .await
    .unwrap();
    for (name, resp) in [("GET /health", health), ("POST /build", build), ("POST /build (l3 = 0)", bad)] {
        let status = resp.lines().next().unwrap_or_default().to_string();
        let body = resp.split("\r\n\r\n").nth(1).unwrap_or_default();
        let preview: String = body.chars().take(120).collect();
        println!("{name}: {status}\n  {preview}...");
    }
}
