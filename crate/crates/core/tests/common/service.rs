use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use cano_core::candidates::{Candidate, CandidateFlags, CandidateSet, CandidateTag, Diagnostics};
use cano_core::config::ServiceSection;
use cano_core::geometry::{LabeledCloud, NormalizationTransform, Rotation};
use cano_core::io::CandidateRecord;
use cano_core::service::{Catalog, Clock, Service, ServiceObject, TemplatePreview};
use nalgebra::Point3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tokio::task::JoinHandle;

pub fn cloud(rng: &mut ChaCha8Rng, n: usize) -> LabeledCloud {
    let pts = (0..n)
        .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let labels = (0..n as u32).map(|i| i % 2).collect();
    LabeledCloud::new(pts)
        .unwrap()
        .with_labels(labels, vec!["body".into(), "handle".into()])
        .unwrap()
}

pub fn catalog(n: usize) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let objects = (0..n)
        .map(|i| {
            let id = format!("obj-{i:03}");
            let set = CandidateSet {
                object_id: id.clone(),
                candidates: CandidateTag::ALL
                    .into_iter()
                    .map(|tag| Candidate {
                        tag,
                        rotation: Rotation::random(&mut rng),
                        diagnostics: Diagnostics::default(),
                    })
                    .collect(),
                flags: CandidateFlags::default(),
            };
            ServiceObject {
                id,
                category: "mug".into(),
                record: CandidateRecord::new("mug", &set, &NormalizationTransform::identity()),
                preview: cloud(&mut rng, 32),
            }
        })
        .collect();
    let template = TemplatePreview {
        template_id: "mug-t".into(),
        axis_convention: "z up".into(),
        cloud: cloud(&mut rng, 48),
    };
    Catalog::new(objects, HashMap::from([("mug".to_string(), template)])).unwrap()
}

pub struct Server {
    pub base: String,
    pub handle: JoinHandle<()>,
}

pub async fn start(n: usize, log: &Path, clock: Arc<dyn Clock>) -> Server {
    let service = Service::start(catalog(n), log, clock, ServiceSection::default()).unwrap();
    let router = service.router(None);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = tokio::spawn(async move {
        axum::serve(listener, router).await.unwrap();
    });
    Server { base, handle }
}

pub async fn next(c: &reqwest::Client, base: &str, annotator: &str) -> Value {
    c.get(format!("{base}/api/next?annotator={annotator}"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap()
}

pub async fn submit(c: &reqwest::Client, base: &str, body: Value) -> (u16, Value) {
    let r = c.post(format!("{base}/api/submit")).json(&body).send().await.unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

/// Issuances seen by clients: (object, annotator).
pub type Issued = Arc<Mutex<Vec<(String, String)>>>;

/// Runs `clients` annotators until the service reports completion or `stop_after`
/// acknowledged submissions. Returns the acknowledged object ids.
pub async fn annotate(base: &str, clients: usize, stop_after: usize, issued: Issued) -> Vec<String> {
    let acked = Arc::new(Mutex::new(Vec::new()));
    let count = Arc::new(AtomicUsize::new(0));
    let mut tasks = Vec::new();
    for k in 0..clients {
        let (base, acked, count, issued) = (base.to_string(), acked.clone(), count.clone(), issued.clone());
        tasks.push(tokio::spawn(async move {
            let c = reqwest::Client::new();
            let me = format!("ann-{k:02}");
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            while count.load(Ordering::SeqCst) < stop_after {
                let v = next(&c, &base, &me).await;
                if v["status"] == "none-remaining" {
                    if v["complete"].as_bool().unwrap() {
                        break;
                    }
                    tokio::time::sleep(std::time::Duration::from_millis(5)).await;
                    continue;
                }
                let id = v["item"]["object_id"].as_str().unwrap().to_string();
                issued.lock().unwrap().push((id.clone(), me.clone()));
                let decision = match rng.random_range(0..6) {
                    5 => json!({"decision": "discard", "reason": "misclassified"}),
                    t => json!({"decision": CandidateTag::ALL[t].as_str()}),
                };
                let mut body = json!({"annotator_id": me, "object_id": id, "elapsed_ms": rng.random_range(100..5000)});
                body.as_object_mut().unwrap().extend(decision.as_object().unwrap().clone());
                let (status, resp) = submit(&c, &base, body).await;
                assert_eq!(status, 200, "{resp}");
                count.fetch_add(1, Ordering::SeqCst);
                acked.lock().unwrap().push(id);
            }
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    Arc::try_unwrap(acked).unwrap().into_inner().unwrap()
}

pub fn assert_exclusive(issued: &Issued) {
    let mut holders: HashMap<String, HashSet<String>> = HashMap::new();
    for (obj, ann) in issued.lock().unwrap().iter() {
        holders.entry(obj.clone()).or_default().insert(ann.clone());
    }
    let shared: Vec<_> = holders.iter().filter(|(_, a)| a.len() > 1).collect();
    assert!(shared.is_empty(), "objects leased to several annotators: {shared:?}");
}
