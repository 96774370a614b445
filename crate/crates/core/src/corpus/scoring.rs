//! Winner determination for a single vote and for a whole debate.
//!
//! Criterion 1 sums weighted dimension points, criterion 2 counts voters who
//! moved their stance toward a side.

use std::cmp::Ordering;

use super::model::{Dimension, PointWeights, Stance, Vote};

/// Points a single vote awards to (PRO, CON). TIE allocations award nothing.
pub fn total_points(vote: &Vote, weights: &PointWeights) -> (u32, u32) {
    let mut pro = 0;
    let mut con = 0;
    for dimension in Dimension::ALL {
        match vote.allocations.get(dimension) {
            Stance::Pro => pro += weights.weight(dimension),
            Stance::Con => con += weights.weight(dimension),
            Stance::Tie => {}
        }
    }
    (pro, con)
}

/// The side a single voter gave more total points to, TIE on equal points.
pub fn points_winner(vote: &Vote, weights: &PointWeights) -> Stance {
    let (pro, con) = total_points(vote, weights);
    compare(pro as u64, con as u64)
}

fn compare(pro: u64, con: u64) -> Stance {
    match pro.cmp(&con) {
        Ordering::Greater => Stance::Pro,
        Ordering::Less => Stance::Con,
        Ordering::Equal => Stance::Tie,
    }
}

/// Criterion 1: the side with the greater point total over all votes cast on
/// `debate_id`. Votes on other debates are ignored.
pub fn winner_by_points<'a>(
    debate_id: &str,
    votes: impl IntoIterator<Item = &'a Vote>,
    weights: &PointWeights,
) -> Stance {
    let (pro, con) = votes
        .into_iter()
        .filter(|v| v.debate_id == debate_id)
        .map(|v| total_points(v, weights))
        .fold((0u64, 0u64), |(p, c), (vp, vc)| (p + vp as u64, c + vc as u64));
    compare(pro, con)
}

pub fn stance_changed(vote: &Vote) -> bool {
    vote.pre_stance != vote.post_stance
}

/// The side this voter moved toward, if any. A move to TIE credits nobody.
pub fn convinced_toward(vote: &Vote) -> Option<Stance> {
    if stance_changed(vote) && vote.post_stance != Stance::Tie {
        Some(vote.post_stance)
    } else {
        None
    }
}

/// Criterion 2: the side that more voters changed their stance toward.
pub fn convinced_winner<'a>(debate_id: &str, votes: impl IntoIterator<Item = &'a Vote>) -> Stance {
    let (pro, con) = votes
        .into_iter()
        .filter(|v| v.debate_id == debate_id)
        .filter_map(convinced_toward)
        .fold((0u64, 0u64), |(p, c), s| match s {
            Stance::Pro => (p + 1, c),
            Stance::Con => (p, c + 1),
            Stance::Tie => (p, c),
        });
    compare(pro, con)
}
