//! Annotation service: leases objects to annotators and records their decisions.

mod catalog;
mod clock;
mod dispatch;
mod http;

pub use catalog::{Catalog, CloudPayload, ObjectPayload, ServiceObject, TemplatePayload, TemplatePreview};
pub use clock::{Clock, ManualClock, SystemClock};
pub use dispatch::{Dispatcher, Lease, NextOutcome};
pub use http::{serve, Service, ServiceStats, SubmitRequest};
