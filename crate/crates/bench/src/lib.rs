//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use levylab_core::group::{ball_enumerate, regular_action_on, Letter};
use levylab_core::rng::sample_rng;
use levylab_core::{Field, Frame, ReducedWord, UnitaryAction};

/// Two independent random rank-`n` frames in `R^d`.
pub fn frame_pair(d: usize, n: usize, seed: u64) -> (Frame, Frame) {
    let mut r = sample_rng(seed, 0, 0);
    let f1 = Frame::random(&mut r, d, n, Field::Real).expect("valid rank");
    let f2 = Frame::random(&mut r, d, n, Field::Real).expect("valid rank");
    (f1, f2)
}

/// Regular actions of `a` and `b` on the ball of the given radius.
pub fn free_generators(radius: usize) -> Vec<UnitaryAction> {
    let ball = Arc::new(ball_enumerate(radius).expect("small radius"));
    [Letter::A, Letter::B]
        .into_iter()
        .map(|l| regular_action_on(&ReducedWord::letter(l), ball.clone()))
        .collect()
}
