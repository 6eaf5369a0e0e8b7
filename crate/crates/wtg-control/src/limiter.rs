//! Current-magnitude limiter with axis priority.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    Active,
    Reactive,
}

/// Limits `(i_d, i_q)` to magnitude `i_max`. Inside the circle the pair
/// passes through; otherwise the prioritized axis keeps up to `i_max` and the
/// other axis gets what is left. Signs are preserved.
pub fn current_limit(i_d: f64, i_q: f64, i_max: f64, priority: Priority) -> (f64, f64) {
    if i_d.hypot(i_q) <= i_max {
        return (i_d, i_q);
    }
    let (first, second) = match priority {
        Priority::Active => (i_d, i_q),
        Priority::Reactive => (i_q, i_d),
    };
    let kept = first.abs().min(i_max);
    let room = (i_max * i_max - kept * kept).max(0.0).sqrt();
    let a = kept.copysign(first);
    let b = second.abs().min(room).copysign(second);
    match priority {
        Priority::Active => (a, b),
        Priority::Reactive => (b, a),
    }
}
