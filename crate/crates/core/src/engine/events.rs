use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

/// What happens at an event. The declaration order is the processing
/// priority among events sharing a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    VehicleArrives,
    PickupComplete,
    DropoffComplete,
    ShiftEnd,
    ShiftStart,
    RequestArrival,
    BatchDispatch,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::VehicleArrives => "vehicle_arrives",
            EventKind::PickupComplete => "pickup_complete",
            EventKind::DropoffComplete => "dropoff_complete",
            EventKind::ShiftEnd => "shift_end",
            EventKind::ShiftStart => "shift_start",
            EventKind::RequestArrival => "request_arrival",
            EventKind::BatchDispatch => "batch_dispatch",
        }
    }
}

/// A processed event as it appears in the run's event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub kind: EventKind,
    /// Vehicle id, request id, or 0 for batch ticks.
    pub entity: u32,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Scheduled {
    pub event: SimEvent,
    /// Leg version for arrivals; stale arrivals are dropped.
    pub version: u64,
    seq: u64,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let a = &self.event;
        let b = &other.event;
        b.time_s
            .total_cmp(&a.time_s)
            .then_with(|| b.kind.cmp(&a.kind))
            .then_with(|| b.entity.cmp(&a.entity))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue ordered by (time, kind priority, entity id, insertion order).
#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time_s: f64, kind: EventKind, entity: u32, version: u64) {
        self.seq += 1;
        self.heap.push(Scheduled { event: SimEvent { time_s, kind, entity }, version, seq: self.seq });
    }

    pub fn pop(&mut self) -> Option<Scheduled> {
        self.heap.pop()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        let mut q = EventQueue::default();
        q.push(5.0, EventKind::RequestArrival, 2, 0);
        q.push(5.0, EventKind::VehicleArrives, 9, 0);
        q.push(1.0, EventKind::BatchDispatch, 0, 0);
        q.push(5.0, EventKind::RequestArrival, 1, 0);
        let order: alloc::vec::Vec<_> = core::iter::from_fn(|| q.pop()).map(|s| (s.event.kind, s.event.entity)).collect();
        assert_eq!(
            order,
            alloc::vec![
                (EventKind::BatchDispatch, 0),
                (EventKind::VehicleArrives, 9),
                (EventKind::RequestArrival, 1),
                (EventKind::RequestArrival, 2)
            ]
        );
    }
}
