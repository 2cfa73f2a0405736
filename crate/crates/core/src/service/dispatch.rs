//! The lease table. Pure bookkeeping; the HTTP layer holds it behind a mutex.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::AnnotationRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lease {
    pub annotator_id: String,
    pub issued_ms: u64,
    pub expires_ms: u64,
    /// A submission for this lease is being written; it cannot expire.
    #[serde(skip)]
    pub pinned: bool,
}

impl Lease {
    fn live(&self, now_ms: u64) -> bool {
        self.pinned || self.expires_ms > now_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextOutcome {
    Leased { object_id: String, lease: Lease },
    /// Nothing to hand out. `retry_after_ms` is the time until the earliest
    /// live lease expires, `None` once every object has a decision.
    NoneRemaining { retry_after_ms: Option<u64> },
}

#[derive(Debug)]
pub struct Dispatcher {
    order: Vec<String>,
    known: HashSet<String>,
    done: HashSet<String>,
    leases: HashMap<String, Lease>,
    records: Vec<AnnotationRecord>,
    lease_ms: u64,
    issued: u64,
}

impl Dispatcher {
    /// `order` is the dispatch order; `records` are the decisions already on
    /// disk, whose objects are never dispatched again.
    pub fn new(order: Vec<String>, records: Vec<AnnotationRecord>, lease_ms: u64) -> Self {
        let known: HashSet<String> = order.iter().cloned().collect();
        let done = records
            .iter()
            .filter(|r| known.contains(&r.object_id))
            .map(|r| r.object_id.clone())
            .collect();
        Dispatcher {
            order,
            known,
            done,
            leases: HashMap::new(),
            records,
            lease_ms,
            issued: 0,
        }
    }

    pub fn next(&mut self, annotator_id: &str, now_ms: u64) -> NextOutcome {
        self.leases.retain(|_, l| l.live(now_ms));
        if let Some((id, lease)) = self
            .order
            .iter()
            .find_map(|id| self.leases.get(id).filter(|l| l.annotator_id == annotator_id).map(|l| (id, l)))
        {
            return NextOutcome::Leased {
                object_id: id.clone(),
                lease: lease.clone(),
            };
        }
        let free = self
            .order
            .iter()
            .find(|id| !self.done.contains(*id) && !self.leases.contains_key(*id));
        match free {
            Some(id) => {
                let lease = Lease {
                    annotator_id: annotator_id.to_string(),
                    issued_ms: now_ms,
                    expires_ms: now_ms + self.lease_ms,
                    pinned: false,
                };
                self.leases.insert(id.clone(), lease.clone());
                self.issued += 1;
                NextOutcome::Leased {
                    object_id: id.clone(),
                    lease,
                }
            }
            None => NextOutcome::NoneRemaining {
                retry_after_ms: self
                    .leases
                    .values()
                    .map(|l| if l.pinned { 1000 } else { l.expires_ms - now_ms })
                    .min(),
            },
        }
    }

    /// Checks that `annotator_id` holds a live lease on `object_id` and pins it
    /// until [`Dispatcher::complete`] or [`Dispatcher::abort`].
    pub fn begin_submit(&mut self, annotator_id: &str, object_id: &str, now_ms: u64) -> Result<()> {
        if !self.known.contains(object_id) {
            return Err(Error::InvalidInput(format!("unknown object `{object_id}`")));
        }
        let stale = || Error::StaleLease {
            object_id: object_id.to_string(),
            annotator_id: annotator_id.to_string(),
        };
        match self.leases.get_mut(object_id) {
            Some(l) if l.annotator_id == annotator_id && !l.pinned && l.live(now_ms) => {
                l.pinned = true;
                Ok(())
            }
            _ => Err(stale()),
        }
    }

    pub fn complete(&mut self, record: AnnotationRecord) {
        self.leases.remove(&record.object_id);
        self.done.insert(record.object_id.clone());
        self.records.push(record);
    }

    pub fn abort(&mut self, object_id: &str) {
        if let Some(l) = self.leases.get_mut(object_id) {
            l.pinned = false;
        }
    }

    pub fn lease(&self, object_id: &str, now_ms: u64) -> Option<&Lease> {
        self.leases.get(object_id).filter(|l| l.live(now_ms))
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn total(&self) -> usize {
        self.order.len()
    }

    pub fn completed(&self) -> usize {
        self.done.len()
    }

    pub fn live_leases(&self, now_ms: u64) -> usize {
        self.leases.values().filter(|l| l.live(now_ms)).count()
    }

    /// Leases handed out since startup.
    pub fn issued(&self) -> u64 {
        self.issued
    }
}
