//! Neighbourhood moves on activity lists. Both keep every list-precedence
//! edge pointing forward and report whether the list changed.

use rand::Rng;

use crate::model::ActivityId;
use crate::problem::Problem;
use crate::schedule::ActivityList;

/// Moves `failing` to a uniformly chosen earlier position that still follows
/// all of its list predecessors.
pub fn shift_ahead_move<R: Rng + ?Sized>(
    problem: &Problem,
    list: &ActivityList,
    failing: ActivityId,
    rng: &mut R,
) -> (ActivityList, bool) {
    let Some(pos) = list.position(failing) else {
        return (list.clone(), false);
    };
    let preds = problem.list_predecessors(failing);
    let lowest = list.order[..pos]
        .iter()
        .rposition(|x| preds.contains(x))
        .map_or(0, |p| p + 1);
    if lowest >= pos {
        return (list.clone(), false);
    }
    let target = rng.random_range(lowest..pos);
    let mut order = list.order.clone();
    let a = order.remove(pos);
    order.insert(target, a);
    (ActivityList::new(order), true)
}

/// Whether exchanging positions `i < j` keeps the list valid.
pub fn swap_is_valid(problem: &Problem, list: &ActivityList, i: usize, j: usize) -> bool {
    let (b, c) = (list.order[i], list.order[j]);
    let c_preds = problem.list_predecessors(c);
    let b_succs = problem.list_successors(b);
    list.order[i..j].iter().all(|x| !c_preds.contains(x))
        && list.order[i + 1..=j].iter().all(|y| !b_succs.contains(y))
}

/// Swaps a uniformly chosen valid pair, found by rejection sampling with at
/// most `len²` attempts.
pub fn swap_move<R: Rng + ?Sized>(problem: &Problem, list: &ActivityList, rng: &mut R) -> (ActivityList, bool) {
    let n = list.len();
    if n < 2 {
        return (list.clone(), false);
    }
    for _ in 0..n * n {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n - 1);
        let y = if y >= x { y + 1 } else { y };
        let (i, j) = (x.min(y), x.max(y));
        if swap_is_valid(problem, list, i, j) {
            let mut order = list.order.clone();
            order.swap(i, j);
            return (ActivityList::new(order), true);
        }
    }
    (list.clone(), false)
}
