//! Exact values for small pawnless endgames.
//!
//! Every legal placement of the material is enumerated and valued by
//! synchronous (Jacobi) value iteration to the Bellman fixed point:
//!
//! ```text
//! V(s) = u(s)                      s terminal
//! V(s) = max_a  step(-V(s'))       adversarial opponent
//! V(s) = mean_a V(s')              stochastic defender to move
//! ```
//!
//! Utilities are terminal only: checkmate loses, stalemate and dead
//! material draw. The fifty-move rule is not modelled.
//!
//! Exact values are integers in the side to move's view: a win in `d`
//! plies is `MATE - d`, a loss in `d` plies `d - MATE`, a draw `0`, so
//! `max` prefers faster wins and slower losses. Stochastic values are
//! expected outcomes in `[-1, 1]` from white's view.

mod io;
mod retro;
mod space;

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::chess::{Color, Move, Position, Role};
use crate::par::{self, Parallelism};

pub use io::{read_table, write_table, Records, StoredTable, TableFormatError, TABLE_MAGIC};
pub use space::{transform, EndgameSpec, SpecError, StateSpace};

/// Score of being mated now.
pub const MATE: i32 = 30000;

/// Who the side to move is up against.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OpponentModel {
    /// Both sides play perfectly.
    Adversarial,
    /// `defender` picks uniformly among its legal moves; the other side
    /// maximizes its expected outcome.
    Stochastic { defender: Color },
}

impl OpponentModel {
    /// Uniform-random play by the side with less material.
    pub fn uniform_defender(spec: &EndgameSpec) -> OpponentModel {
        let worth = |roles: &[Role]| roles.iter().map(|r| r.value()).sum::<i32>();
        let defender = if worth(&spec.white) < worth(&spec.black) {
            Color::White
        } else {
            Color::Black
        };
        OpponentModel::Stochastic { defender }
    }
}

/// Game-theoretic result from the side to move's view, with distance to
/// mate in plies.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Win(u32),
    Draw,
    Loss(u32),
}

impl Outcome {
    pub fn from_score(score: i32) -> Outcome {
        match score {
            s if s > 0 => Outcome::Win((MATE - s) as u32),
            s if s < 0 => Outcome::Loss((MATE + s) as u32),
            _ => Outcome::Draw,
        }
    }

    pub fn score(self) -> i32 {
        match self {
            Outcome::Win(d) => MATE - d as i32,
            Outcome::Loss(d) => d as i32 - MATE,
            Outcome::Draw => 0,
        }
    }

    /// +1, 0 or -1.
    pub fn sign(self) -> i32 {
        self.score().signum()
    }

    pub fn dtm(self) -> Option<u32> {
        match self {
            Outcome::Win(d) | Outcome::Loss(d) => Some(d),
            Outcome::Draw => None,
        }
    }
}

/// A child's score seen from the parent, one ply further from mate.
#[inline]
pub fn step(child: i32) -> i32 {
    let v = -child;
    v - v.signum()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Exact(Vec<i32>),
    Expected(Vec<f64>),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("no fixed point after {0} sweeps")]
    NoConvergence(u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("position {0} is not covered by this table")]
    Coverage(String),
    #[error("move {0} is not legal here")]
    Illegal(String),
    #[error("position is terminal")]
    Terminal,
    #[error("this query needs an adversarial table")]
    NotExact,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Limit on non-king pieces.
    pub max_pieces: usize,
    /// Store one representative per board symmetry class.
    pub symmetry: bool,
    pub max_sweeps: u32,
    /// Stochastic sweeps stop once no value moves by more than this.
    pub tolerance: f64,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            max_pieces: 2,
            symmetry: true,
            max_sweeps: 100_000,
            tolerance: 1e-13,
            parallelism: Parallelism::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EndgameValueTable {
    pub spec: EndgameSpec,
    pub model: OpponentModel,
    pub space: StateSpace,
    pub values: Values,
    pub iterations: u32,
    children: Vec<Arc<EndgameValueTable>>,
}

/// Where a move leads: a state of the same table, a state of a capture
/// table, or nowhere (terminal).
#[derive(Copy, Clone, Debug)]
enum Target {
    Local(u32),
    Child(u16, u32),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Terminal {
    Mated,
    Drawn,
}

/// Successor structure of a state space in compressed rows.
struct Graph {
    terminal: Vec<Option<Terminal>>,
    stm: Vec<Color>,
    offsets: Vec<u32>,
    targets: Vec<Target>,
}

impl Graph {
    fn edges(&self, s: usize) -> &[Target] {
        &self.targets[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }
}

fn build_graph(space: &StateSpace, children: &[Arc<EndgameValueTable>], parallelism: Parallelism) -> Graph {
    let rows = par::map_range(space.len(), parallelism, |s| {
        let pos = space.position(s);
        let stm = pos.side_to_move();
        if pos.is_insufficient_material() {
            return (Some(Terminal::Drawn), stm, Vec::new());
        }
        let moves = pos.legal_moves();
        if moves.is_empty() {
            let t = if pos.in_check() { Terminal::Mated } else { Terminal::Drawn };
            return (Some(t), stm, Vec::new());
        }
        let targets = moves
            .iter()
            .map(|m| {
                let next = pos.play_unchecked(m);
                match pos.captured_piece(m) {
                    None => Target::Local(space.index_of(&next).expect("successor in state space") as u32),
                    Some(_) => {
                        let spec = EndgameSpec::of_position(&next);
                        let c = children.iter().position(|t| t.spec == spec).expect("capture table solved");
                        let i = children[c].space.index_of(&next).expect("successor in capture table");
                        Target::Child(c as u16, i as u32)
                    }
                }
            })
            .collect::<Vec<_>>();
        (None, stm, targets)
    });
    let mut g = Graph {
        terminal: Vec::with_capacity(rows.len()),
        stm: Vec::with_capacity(rows.len()),
        offsets: vec![0],
        targets: Vec::new(),
    };
    for (t, stm, targets) in rows {
        g.terminal.push(t);
        g.stm.push(stm);
        g.targets.extend(targets);
        g.offsets.push(g.targets.len() as u32);
    }
    g
}

impl EndgameValueTable {
    fn child_score(&self, c: u16, i: u32) -> i32 {
        match &self.children[c as usize].values {
            Values::Exact(v) => v[i as usize],
            Values::Expected(_) => unreachable!("children share the model"),
        }
    }

    fn child_white(&self, c: u16, i: u32) -> f64 {
        self.children[c as usize].white_value_at(i as usize)
    }

    /// Bellman right-hand side for state `s` given current exact values.
    fn exact_backup(&self, g: &Graph, s: usize, v: &[i32]) -> i32 {
        match g.terminal[s] {
            Some(Terminal::Mated) => -MATE,
            Some(Terminal::Drawn) => 0,
            None => g
                .edges(s)
                .iter()
                .map(|t| match *t {
                    Target::Local(i) => step(v[i as usize]),
                    Target::Child(c, i) => step(self.child_score(c, i)),
                })
                .max()
                .expect("non-terminal state has moves"),
        }
    }

    fn expected_backup(&self, g: &Graph, s: usize, v: &[f64], defender: Color) -> f64 {
        let stm = g.stm[s];
        match g.terminal[s] {
            Some(Terminal::Mated) => -(stm.sign() as f64),
            Some(Terminal::Drawn) => 0.0,
            None => {
                let vals = g.edges(s).iter().map(|t| match *t {
                    Target::Local(i) => v[i as usize],
                    Target::Child(c, i) => self.child_white(c, i),
                });
                if stm == defender {
                    let n = g.edges(s).len() as f64;
                    vals.sum::<f64>() / n
                } else {
                    // the attacker maximizes its own view
                    let sign = stm.sign() as f64;
                    vals.map(|x| x * sign).fold(f64::NEG_INFINITY, f64::max) * sign
                }
            }
        }
    }

    fn white_value_at(&self, i: usize) -> f64 {
        match &self.values {
            Values::Exact(v) => {
                let stm_sign = if self.space.position(i).side_to_move() == Color::White { 1 } else { -1 };
                (v[i].signum() * stm_sign) as f64
            }
            Values::Expected(v) => v[i],
        }
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact(_))
    }

    /// The table holding positions with `spec`'s material: this one or a
    /// capture table below it.
    fn table_for(&self, spec: &EndgameSpec) -> Option<&EndgameValueTable> {
        if &self.spec == spec {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.table_for(spec))
    }

    fn locate(&self, pos: &Position) -> Result<(&EndgameValueTable, usize), TableError> {
        let spec = EndgameSpec::of_position(pos);
        let t = self.table_for(&spec).ok_or_else(|| TableError::Coverage(pos.to_string()))?;
        let i = t.space.index_of(pos).ok_or_else(|| TableError::Coverage(pos.to_string()))?;
        Ok((t, i))
    }

    /// Exact score of `pos` for the side to move.
    pub fn score(&self, pos: &Position) -> Result<i32, TableError> {
        let (t, i) = self.locate(pos)?;
        match &t.values {
            Values::Exact(v) => Ok(v[i]),
            Values::Expected(_) => Err(TableError::NotExact),
        }
    }

    pub fn outcome(&self, pos: &Position) -> Result<Outcome, TableError> {
        self.score(pos).map(Outcome::from_score)
    }

    /// Value from white's view: +1, 0, -1 for exact tables, an expectation
    /// for stochastic ones.
    pub fn white_value(&self, pos: &Position) -> Result<f64, TableError> {
        let (t, i) = self.locate(pos)?;
        Ok(match &t.values {
            Values::Exact(v) => (v[i].signum() * pos.side_to_move().sign()) as f64,
            Values::Expected(v) => v[i],
        })
    }

    /// Q(s, a) for the mover: the successor's value after `a`, on the same
    /// scale as [`white_value`](Self::white_value) but from the mover's side.
    pub fn q_value(&self, pos: &Position, a: &Move) -> Result<f64, TableError> {
        if !pos.is_legal(a) {
            return Err(TableError::Illegal(a.to_uci()));
        }
        let next = pos.play_unchecked(a);
        Ok(self.white_value(&next)? * pos.side_to_move().sign() as f64)
    }

    /// Exact Q(s, a) as a mover-view score, one ply further from mate.
    pub fn q_score(&self, pos: &Position, a: &Move) -> Result<i32, TableError> {
        if !pos.is_legal(a) {
            return Err(TableError::Illegal(a.to_uci()));
        }
        Ok(step(self.score(&pos.play_unchecked(a))?))
    }

    /// The best move for the side to move. Exact tables prefer faster wins
    /// and slower losses; remaining ties go to the smallest UCI string.
    pub fn optimal_policy(&self, pos: &Position) -> Result<Move, TableError> {
        let mut moves = pos.legal_moves();
        if moves.is_empty() {
            return Err(TableError::Terminal);
        }
        moves.sort_by_key(|m| m.to_uci());
        let mut best: Option<(Move, f64)> = None;
        for m in moves {
            let q = if self.is_exact() { self.q_score(pos, &m)? as f64 } else { self.q_value(pos, &m)? };
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((m, q));
            }
        }
        Ok(best.expect("at least one move").0)
    }

    fn graph(&self, parallelism: Parallelism) -> Graph {
        build_graph(&self.space, &self.children, parallelism)
    }

    /// max_s |V(s) − backup(s)|: zero at the exact fixed point. Exact
    /// tables measure it in score units.
    pub fn bellman_residual(&self) -> f64 {
        let g = self.graph(Parallelism::Parallel);
        let per_state = par::map_range(self.len(), Parallelism::Parallel, |s| match (&self.values, self.model) {
            (Values::Exact(v), _) => (v[s] - self.exact_backup(&g, s, v)).abs() as f64,
            (Values::Expected(v), OpponentModel::Stochastic { defender }) => {
                (v[s] - self.expected_backup(&g, s, v, defender)).abs()
            }
            (Values::Expected(_), OpponentModel::Adversarial) => unreachable!("adversarial tables are exact"),
        });
        per_state.into_iter().fold(0.0, f64::max)
    }

    /// Overwrites one stored exact score; for fault-injection checks.
    pub fn set_score(&mut self, index: usize, score: i32) -> Result<(), TableError> {
        match &mut self.values {
            Values::Exact(v) => {
                v[index] = score;
                Ok(())
            }
            Values::Expected(_) => Err(TableError::NotExact),
        }
    }

    /// Re-derives every exact score with a staged retrograde solver and
    /// returns the indices where it disagrees with the table.
    pub fn retrograde_mismatches(&self) -> Result<Vec<usize>, TableError> {
        let Values::Exact(v) = &self.values else {
            return Err(TableError::NotExact);
        };
        let g = self.graph(Parallelism::Parallel);
        let r = retro::solve(&g, |c, i| self.child_score(c, i));
        Ok((0..v.len()).filter(|&s| v[s] != r[s]).collect())
    }

    pub fn summary(&self) -> TableSummary {
        let mut s = TableSummary {
            spec: self.spec.to_string(),
            model: self.model,
            states: self.len(),
            white_to_move: self.space.count_to_move(Color::White),
            black_to_move: self.space.count_to_move(Color::Black),
            white_wins: 0,
            draws: 0,
            black_wins: 0,
            max_dtm: 0,
            mean_white_value: 0.0,
            iterations: self.iterations,
        };
        let mut total = 0.0;
        for i in 0..self.len() {
            let w = self.white_value_at(i);
            total += w;
            match w {
                w if w > 0.0 => s.white_wins += 1,
                w if w < 0.0 => s.black_wins += 1,
                _ => s.draws += 1,
            }
            if let Values::Exact(v) = &self.values {
                if let Some(d) = Outcome::from_score(v[i]).dtm() {
                    s.max_dtm = s.max_dtm.max(d);
                }
            }
        }
        s.mean_white_value = if self.is_empty() { 0.0 } else { total / self.len() as f64 };
        s
    }
}

/// Counts over a solved table. For stochastic tables the win and loss
/// columns count states with positive and negative expectation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableSummary {
    pub spec: String,
    pub model: OpponentModel,
    pub states: usize,
    pub white_to_move: usize,
    pub black_to_move: usize,
    pub white_wins: usize,
    pub draws: usize,
    pub black_wins: usize,
    pub max_dtm: u32,
    pub mean_white_value: f64,
    pub iterations: u32,
}

/// All legal states of `spec`, both sides to move.
pub fn enumerate_states(spec: &EndgameSpec, opts: &SolveOptions) -> Result<StateSpace, SpecError> {
    spec.check_size(opts.max_pieces)?;
    Ok(StateSpace::enumerate(spec, opts.symmetry, opts.parallelism))
}

/// Solves `spec` and, first, every material it can reach by captures.
pub fn value_iteration(spec: &EndgameSpec, model: OpponentModel, opts: &SolveOptions) -> Result<EndgameValueTable, SolveError> {
    spec.check_size(opts.max_pieces)?;
    let mut memo = HashMap::new();
    solve_rec(spec, model, opts, &mut memo).map(Arc::unwrap_or_clone)
}

fn capture_specs(spec: &EndgameSpec) -> Vec<EndgameSpec> {
    let mut out: Vec<EndgameSpec> = Vec::new();
    for (color, roles) in [(Color::White, &spec.white), (Color::Black, &spec.black)] {
        for &r in roles {
            let s = spec.without(color, r).expect("role present");
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

fn solve_rec(
    spec: &EndgameSpec,
    model: OpponentModel,
    opts: &SolveOptions,
    memo: &mut HashMap<String, Arc<EndgameValueTable>>,
) -> Result<Arc<EndgameValueTable>, SolveError> {
    if let Some(t) = memo.get(&spec.to_string()) {
        return Ok(t.clone());
    }
    let children = capture_specs(spec)
        .iter()
        .map(|c| solve_rec(c, model, opts, memo))
        .collect::<Result<Vec<_>, _>>()?;
    let space = StateSpace::enumerate(spec, opts.symmetry, opts.parallelism);
    let n = space.len();
    let mut table = EndgameValueTable {
        spec: spec.clone(),
        model,
        space,
        values: Values::Exact(Vec::new()),
        iterations: 0,
        children,
    };
    let g = table.graph(opts.parallelism);

    match model {
        OpponentModel::Adversarial => {
            let mut v = vec![0i32; n];
            loop {
                if table.iterations >= opts.max_sweeps {
                    return Err(SolveError::NoConvergence(table.iterations));
                }
                let next = par::map_range(n, opts.parallelism, |s| table.exact_backup(&g, s, &v));
                table.iterations += 1;
                if next == v {
                    break;
                }
                v = next;
            }
            table.values = Values::Exact(v);
        }
        OpponentModel::Stochastic { defender } => {
            let mut v = vec![0f64; n];
            loop {
                if table.iterations >= opts.max_sweeps {
                    return Err(SolveError::NoConvergence(table.iterations));
                }
                let next = par::map_range(n, opts.parallelism, |s| table.expected_backup(&g, s, &v, defender));
                table.iterations += 1;
                let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                v = next;
                if delta <= opts.tolerance {
                    break;
                }
            }
            table.values = Values::Expected(v);
        }
    }
    let table = Arc::new(table);
    memo.insert(spec.to_string(), table.clone());
    Ok(table)
}

/// Depth-limited expectimax from white's view. Unresolved leaves score 0.
/// Under [`OpponentModel::Adversarial`] this is plain minimax.
pub fn expectimax_value(pos: &Position, model: OpponentModel, depth: u32) -> f64 {
    let mut memo = HashMap::new();
    expectimax_rec(pos, model, depth, &mut memo)
}

fn expectimax_rec(
    pos: &Position,
    model: OpponentModel,
    depth: u32,
    memo: &mut HashMap<(crate::chess::position::RepetitionKey, u32), f64>,
) -> f64 {
    let stm = pos.side_to_move();
    let moves = pos.legal_moves();
    if moves.is_empty() {
        return if pos.in_check() { -(stm.sign() as f64) } else { 0.0 };
    }
    if pos.is_insufficient_material() || depth == 0 {
        return 0.0;
    }
    let key = (pos.repetition_key(), depth);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let vals: Vec<f64> = moves
        .iter()
        .map(|m| expectimax_rec(&pos.play_unchecked(m), model, depth - 1, memo))
        .collect();
    let v = match model {
        OpponentModel::Stochastic { defender } if defender == stm => vals.iter().sum::<f64>() / vals.len() as f64,
        _ => {
            let sign = stm.sign() as f64;
            vals.iter().map(|x| x * sign).fold(f64::NEG_INFINITY, f64::max) * sign
        }
    };
    memo.insert(key, v);
    v
}
