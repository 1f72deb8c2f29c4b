//! Arithmetic-operation counter.
//!
//! Counts are bulk-incremented by the algorithms themselves (one tick per
//! field or rational add/sub/mul/inv performed), per thread. Measurements
//! must therefore run the counted work on the calling thread.

use std::cell::Cell;

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn tick(n: u64) {
    OPS.with(|c| c.set(c.get().wrapping_add(n)));
}

pub fn current() -> u64 {
    OPS.with(|c| c.get())
}

/// Runs `f` and returns its result with the number of operations it ticked.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = current();
    let r = f();
    (r, current().wrapping_sub(before))
}

/// Runs `f` without letting its ticks reach the caller's count.
pub fn untracked<R>(f: impl FnOnce() -> R) -> R {
    let before = current();
    let r = f();
    OPS.with(|c| c.set(before));
    r
}
