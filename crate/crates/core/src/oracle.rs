//! Discrete-event reference simulation of the warp-specialized protocol.
//!
//! One DMA warp and one MATH warp share a ring of `capacity` tile-pair slots.
//! The DMA warp claims a free slot, loads `a`, then `b`, and signals the MATH
//! warp; the MATH warp waits for a signalled slot, multiplies, and releases the
//! slot when done. Nothing here evaluates the closed recurrences, so its
//! timeline is an independent check on [`crate::simulator::simulate_wave`].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::TileTimes;
use crate::simulator::EventTimeline;
use crate::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
/// Completion of a load or multiply.
enum Event {
    LoadA,
    LoadB,
    Math,
}

#[derive(Debug, PartialEq, Eq)]
enum Warp {
    Idle,
    Busy,
}

/// Runs the protocol for `stages` stages. `capacity` is the number of slots
/// in the ring and may be any value `>= 1`.
pub fn simulate_protocol(stages: usize, tt: &TileTimes<Nanos>, capacity: usize) -> EventTimeline<Nanos> {
    assert!(capacity >= 1, "ring needs at least one slot");

    let mut queue: BinaryHeap<Reverse<(Nanos, u64, Event)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |q: &mut BinaryHeap<_>, at: Nanos, ev: Event| {
        q.push(Reverse((at, seq, ev)));
        seq += 1;
    };

    let mut s_a = Vec::with_capacity(stages);
    let mut s_b = Vec::with_capacity(stages);
    let mut s_m = Vec::with_capacity(stages);

    let mut free_slots = capacity;
    // semaphore: tile pairs fully loaded but not yet taken by MATH
    let mut filled = 0usize;
    let mut dma = Warp::Idle;
    let mut math = Warp::Idle;
    let mut next_load = 0usize;
    let mut next_math = 0usize;
    let mut now: Nanos = 0;

    loop {
        if dma == Warp::Idle && next_load < stages && free_slots > 0 {
            free_slots -= 1;
            dma = Warp::Busy;
            s_a.push(now);
            push(&mut queue, now + tt.t_load_a, Event::LoadA);
        }
        if math == Warp::Idle && filled > 0 {
            filled -= 1;
            math = Warp::Busy;
            s_m.push(now);
            next_math += 1;
            push(&mut queue, now + tt.t_math, Event::Math);
        }

        let Some(Reverse((at, _, ev))) = queue.pop() else {
            break;
        };
        now = at;
        match ev {
            Event::LoadA => {
                s_b.push(now);
                push(&mut queue, now + tt.t_load_b, Event::LoadB);
            }
            Event::LoadB => {
                filled += 1;
                next_load += 1;
                dma = Warp::Idle;
            }
            Event::Math => {
                free_slots += 1;
                math = Warp::Idle;
            }
        }
    }

    debug_assert_eq!(next_math, stages);
    EventTimeline { s_a, s_b, s_m }
}
