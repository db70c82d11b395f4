use alloc::collections::VecDeque;
use alloc::vec::Vec;

/// Lower and upper envelopes of a sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Centered sliding-window minimum and maximum over `window` samples
/// (clipped at the ends), in O(n) with monotone deques.
pub fn sliding_envelope(values: &[f64], window: usize) -> Envelope {
    let n = values.len();
    let half = window.max(1) / 2;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut min_q: VecDeque<usize> = VecDeque::new();
    let mut max_q: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            let v = values[next];
            while min_q.back().is_some_and(|&j| values[j] >= v) {
                min_q.pop_back();
            }
            min_q.push_back(next);
            while max_q.back().is_some_and(|&j| values[j] <= v) {
                max_q.pop_back();
            }
            max_q.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while min_q.front().is_some_and(|&j| j < lo) {
            min_q.pop_front();
        }
        while max_q.front().is_some_and(|&j| j < lo) {
            max_q.pop_front();
        }
        lower.push(values[*min_q.front().unwrap()]);
        upper.push(values[*max_q.front().unwrap()]);
    }
    Envelope { lower, upper }
}
