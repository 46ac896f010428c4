use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::domain::{DeviceKind, Fleet, Placement, Query, QueuePlan};

#[derive(Debug, Error, PartialEq)]
pub enum DispatchError {
    #[error("release without a matching admit on the {0:?} queue")]
    UnderflowRelease(DeviceKind),
    #[error("no queue exists for placement {0:?}")]
    NoSuchQueue(Placement),
    #[error("fleet has no usable devices")]
    NoDevices,
}

/// One bounded admission counter.
#[derive(Debug)]
pub struct DeviceQueue {
    depth_limit: u32,
    current: AtomicU32,
    kind: DeviceKind,
}

impl DeviceQueue {
    pub fn new(kind: DeviceKind, depth_limit: u32) -> Self {
        Self {
            depth_limit,
            current: AtomicU32::new(0),
            kind,
        }
    }

    pub fn kind(&self) -> DeviceKind {
        self.kind
    }

    pub fn depth_limit(&self) -> u32 {
        self.depth_limit
    }

    pub fn len(&self) -> u32 {
        self.current.load(Ordering::Acquire)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Atomically admits one query unless the queue is full. On success
    /// returns the new length; on failure the observed (full) length. The
    /// check and the increment are one step, so the counter can never pass
    /// `depth_limit`.
    fn try_admit(&self) -> Result<u32, u32> {
        self.current
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |len| {
                (len < self.depth_limit).then_some(len + 1)
            })
            .map(|prev| prev + 1)
    }

    fn try_release(&self) -> Result<u32, DispatchError> {
        self.current
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |len| len.checked_sub(1))
            .map(|prev| prev - 1)
            .map_err(|_| DispatchError::UnderflowRelease(self.kind))
    }
}

/// The queue topology produced by device detection: a priority queue plus an
/// optional CPU overflow queue, and the effective heterogeneous flag.
#[derive(Debug)]
pub struct QueueSet {
    primary: DeviceQueue,
    overflow: Option<DeviceQueue>,
    heterogeneous: bool,
}

impl QueueSet {
    pub fn primary(&self) -> &DeviceQueue {
        &self.primary
    }

    pub fn overflow(&self) -> Option<&DeviceQueue> {
        self.overflow.as_ref()
    }

    /// Whether overflow routing to the CPU queue is in effect.
    pub fn heterogeneous(&self) -> bool {
        self.heterogeneous
    }

    fn queue_for(&self, placement: Placement) -> Option<&DeviceQueue> {
        match placement {
            Placement::Busy => None,
            Placement::Accelerator => {
                (self.primary.kind == DeviceKind::Accelerator).then_some(&self.primary)
            }
            Placement::Cpu => {
                if self.primary.kind == DeviceKind::Cpu {
                    Some(&self.primary)
                } else {
                    self.overflow.as_ref()
                }
            }
        }
    }

    /// Queue lengths as `(primary-or-accelerator, cpu-overflow)`.
    pub fn lengths(&self) -> (u32, u32) {
        (
            self.primary.len(),
            self.overflow.as_ref().map_or(0, |q| q.len()),
        )
    }
}

/// Builds the queue topology for a validated fleet.
///
/// One device kind present: a single queue for it and heterogeneous dispatch
/// forced off. Both kinds present with the flag off: accelerator queue only.
/// Both present with the flag on: both queues, depths from the plan.
pub fn detect_and_plan(
    fleet: &Fleet,
    plan: QueuePlan,
    heterogeneous_requested: bool,
) -> Result<QueueSet, DispatchError> {
    if fleet.is_empty() {
        return Err(DispatchError::NoDevices);
    }
    let has_accel = fleet.accelerator().is_some();
    let has_cpu = fleet.offload_cpu().is_some();
    match (has_accel, has_cpu) {
        (true, true) if heterogeneous_requested => Ok(QueueSet {
            primary: DeviceQueue::new(DeviceKind::Accelerator, plan.accelerator_depth),
            overflow: Some(DeviceQueue::new(DeviceKind::Cpu, plan.cpu_depth)),
            heterogeneous: true,
        }),
        (true, _) => Ok(QueueSet {
            primary: DeviceQueue::new(DeviceKind::Accelerator, plan.accelerator_depth),
            overflow: None,
            heterogeneous: false,
        }),
        (false, true) => Ok(QueueSet {
            // Single-kind deployment: the lone queue takes the primary depth.
            primary: DeviceQueue::new(DeviceKind::Cpu, plan.accelerator_depth),
            overflow: None,
            heterogeneous: false,
        }),
        (false, false) => Err(DispatchError::NoDevices),
    }
}

/// Admission decision and the queue lengths observed while making it, for the
/// decision log. Lengths are the values seen atomically by the admit attempts
/// themselves, so invariants over them hold exactly even under concurrency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub placement: Placement,
    pub primary_len: u32,
    pub overflow_len: u32,
}

/// Routes one query: the priority queue first, then — only when heterogeneous
/// dispatch is in effect — the CPU overflow queue, otherwise `Busy` with no
/// state change.
pub fn dispatch(query: &Query, queues: &QueueSet, heterogeneous_enabled: bool) -> Placement {
    dispatch_observed(query, queues, heterogeneous_enabled).placement
}

pub(crate) fn dispatch_observed(
    _query: &Query,
    queues: &QueueSet,
    heterogeneous_enabled: bool,
) -> Decision {
    match queues.primary.try_admit() {
        Ok(new_len) => {
            let placement = match queues.primary.kind {
                DeviceKind::Accelerator => Placement::Accelerator,
                DeviceKind::Cpu => Placement::Cpu,
            };
            Decision {
                placement,
                primary_len: new_len,
                overflow_len: queues.overflow.as_ref().map_or(0, |q| q.len()),
            }
        }
        Err(primary_full) => {
            if heterogeneous_enabled && queues.heterogeneous {
                if let Some(cpu) = &queues.overflow {
                    return match cpu.try_admit() {
                        Ok(new_len) => Decision {
                            placement: Placement::Cpu,
                            primary_len: primary_full,
                            overflow_len: new_len,
                        },
                        Err(cpu_full) => Decision {
                            placement: Placement::Busy,
                            primary_len: primary_full,
                            overflow_len: cpu_full,
                        },
                    };
                }
            }
            Decision {
                placement: Placement::Busy,
                primary_len: primary_full,
                overflow_len: queues.overflow.as_ref().map_or(0, |q| q.len()),
            }
        }
    }
}

/// Completion side of admission: decrements the counter the query was
/// admitted to. Releasing `Busy` or an empty queue is an underflow error.
pub fn release(placement: Placement, queues: &QueueSet) -> Result<(), DispatchError> {
    match queues.queue_for(placement) {
        Some(queue) => queue.try_release().map(|_| ()),
        None if placement == Placement::Busy => Err(DispatchError::UnderflowRelease(
            queues.primary.kind,
        )),
        None => Err(DispatchError::NoSuchQueue(placement)),
    }
}
