//! Staged retrograde analysis, used to check value iteration.
//!
//! Works backwards from mates over the predecessor graph, settling states
//! in order of distance to mate: a state is won in d+1 once some move
//! reaches a loss in d, and lost in d+1 once every move reaches a win and
//! the slowest of them is a win in d.

use super::{step, Graph, Target, Terminal, MATE};

enum Pending {
    Win,
    Loss,
}

pub(super) fn solve(g: &Graph, child_score: impl Fn(u16, u32) -> i32) -> Vec<i32> {
    let n = g.terminal.len();
    let mut preds_off = vec![0u32; n + 1];
    for t in &g.targets {
        if let Target::Local(i) = t {
            preds_off[*i as usize + 1] += 1;
        }
    }
    for i in 0..n {
        preds_off[i + 1] += preds_off[i];
    }
    let mut preds = vec![0u32; preds_off[n] as usize];
    let mut fill = preds_off.clone();
    for s in 0..n {
        for t in g.edges(s) {
            if let Target::Local(i) = *t {
                preds[fill[i as usize] as usize] = s as u32;
                fill[i as usize] += 1;
            }
        }
    }

    let mut value: Vec<Option<i32>> = vec![None; n];
    // per state: local moves not yet known to reach an opponent win
    let mut open = vec![0u32; n];
    // slowest opponent win seen so far, in plies
    let mut slowest = vec![0u32; n];
    // a capture that draws or wins means the state can never be lost
    let mut escape = vec![false; n];
    let mut buckets: Vec<Vec<(u32, Pending)>> = Vec::new();
    let push = |buckets: &mut Vec<Vec<(u32, Pending)>>, d: u32, s: usize, p: Pending| {
        if buckets.len() <= d as usize {
            buckets.resize_with(d as usize + 1, Vec::new);
        }
        buckets[d as usize].push((s as u32, p));
    };

    for s in 0..n {
        match g.terminal[s] {
            Some(Terminal::Mated) => push(&mut buckets, 0, s, Pending::Loss),
            Some(Terminal::Drawn) => value[s] = Some(0),
            None => {
                for t in g.edges(s) {
                    match *t {
                        Target::Local(_) => open[s] += 1,
                        Target::Child(c, i) => {
                            let mine = step(child_score(c, i));
                            if mine > 0 {
                                escape[s] = true;
                                push(&mut buckets, (MATE - mine) as u32, s, Pending::Win);
                            } else if mine < 0 {
                                slowest[s] = slowest[s].max((MATE + mine) as u32 - 1);
                            } else {
                                escape[s] = true;
                            }
                        }
                    }
                }
                if open[s] == 0 && !escape[s] {
                    push(&mut buckets, slowest[s] + 1, s, Pending::Loss);
                }
            }
        }
    }

    let mut d = 0;
    while d < buckets.len() {
        let batch = std::mem::take(&mut buckets[d]);
        for (s, kind) in batch {
            let s = s as usize;
            if value[s].is_some() {
                continue;
            }
            match kind {
                Pending::Win => {
                    value[s] = Some(MATE - d as i32);
                    for &p in &preds[preds_off[s] as usize..preds_off[s + 1] as usize] {
                        let p = p as usize;
                        if value[p].is_some() {
                            continue;
                        }
                        open[p] -= 1;
                        slowest[p] = slowest[p].max(d as u32);
                        if open[p] == 0 && !escape[p] {
                            push(&mut buckets, slowest[p] + 1, p, Pending::Loss);
                        }
                    }
                }
                Pending::Loss => {
                    value[s] = Some(d as i32 - MATE);
                    for &p in &preds[preds_off[s] as usize..preds_off[s + 1] as usize] {
                        if value[p as usize].is_none() {
                            push(&mut buckets, d as u32 + 1, p as usize, Pending::Win);
                        }
                    }
                }
            }
        }
        d += 1;
    }
    value.into_iter().map(|v| v.unwrap_or(0)).collect()
}
