//! Closed forms behind the probabilistic crash-tolerant analysis: balance and increase
//! probabilities of castle multiplicities, and the castle-count Markov chain.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("multiplicity must be at least 2, got {0}")]
    MultiplicityTooSmall(usize),
    #[error("x = {x} exceeds the {i} incoming robots")]
    TooManyArrivals { x: usize, i: usize },
    #[error("p must lie strictly between 0 and 1, got {0}")]
    BadProbability(f64),
    #[error("the chain needs n ≥ 3, got {0}")]
    TooFewRobots(usize),
    #[error("singular absorption system")]
    Singular,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that `i` incoming and `o` outgoing robots, each moving with probability
/// `1/m`, cancel out exactly (same number arrive and depart).
pub fn balance_probability(i: usize, o: usize, m: usize) -> Result<f64, AnalyticError> {
    if m < 2 {
        return Err(AnalyticError::MultiplicityTooSmall(m));
    }
    let stay = 1.0 - 1.0 / m as f64;
    let ratio = 1.0 / (m - 1) as f64;
    let sum: f64 = (1..=i.min(o)).map(|k| binomial(i, k) * binomial(o, k) * ratio.powi(2 * k as i32)).sum();
    Ok(stay.powi((i + o) as i32) * (1.0 + sum))
}

/// `C(i,x)·(1/m)^x·Balance(i−x, o)`: a chosen set of `x` incoming robots arrives while the
/// rest balance out.
pub fn increase_probability(i: usize, o: usize, x: usize, m: usize) -> Result<f64, AnalyticError> {
    if x > i {
        return Err(AnalyticError::TooManyArrivals { x, i });
    }
    Ok(binomial(i, x) * (1.0 / m as f64).powi(x as i32) * balance_probability(i - x, o, m)?)
}

/// Lower bound on the probability that exactly one castle grows by one while every other
/// castle does not grow by one or more. `castles` lists `(incoming, outgoing)` per castle.
///
/// A single castle returns 1.
pub fn single_castle_lower_bound(castles: &[(usize, usize)], m: usize) -> Result<f64, AnalyticError> {
    if castles.len() <= 1 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for (k, &(i, o)) in castles.iter().enumerate() {
        if i == 0 {
            continue;
        }
        let mut term = increase_probability(i, o, 1, m)?;
        for (j, &(ij, oj)) in castles.iter().enumerate() {
            if j == k {
                continue;
            }
            for x in 1..=ij {
                term *= 1.0 - increase_probability(ij, oj, x, m)?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// States of the castle-count chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainState {
    Distinct,
    AllDestroyed,
    Castles(usize),
    Gathered,
}

impl std::fmt::Display for ChainState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainState::Distinct => write!(f, "D"),
            ChainState::AllDestroyed => write!(f, "0"),
            ChainState::Castles(k) => write!(f, "{k}"),
            ChainState::Gathered => write!(f, "G"),
        }
    }
}

/// Castle-count chain for `n` robots and castle survival probability `p`.
#[derive(Debug, Clone)]
pub struct CastleChain {
    pub states: Vec<ChainState>,
    /// Row-stochastic transition matrix over `states`.
    pub transitions: DMatrix<f64>,
}

impl CastleChain {
    pub fn new(n: usize, p: f64) -> Result<Self, AnalyticError> {
        if n < 3 {
            return Err(AnalyticError::TooFewRobots(n));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(AnalyticError::BadProbability(p));
        }
        let half = n / 2;
        let mut states = vec![ChainState::Distinct, ChainState::AllDestroyed];
        states.extend((2..=half).rev().map(ChainState::Castles));
        states.push(ChainState::Castles(1));
        states.push(ChainState::Gathered);
        let index = |s: ChainState| states.iter().position(|&t| t == s).unwrap();
        let castles = |x: usize| if x == 0 { ChainState::AllDestroyed } else { ChainState::Castles(x) };
        let mut t = DMatrix::zeros(states.len(), states.len());
        let d = index(ChainState::Distinct);
        for x in 0..=half {
            let to = if x == 0 { d } else { index(ChainState::Castles(x)) };
            t[(d, to)] += binomial(half, x) / 2f64.powi(half as i32);
        }
        t[(index(ChainState::AllDestroyed), index(ChainState::Castles(half)))] = 1.0;
        for k in 2..=half {
            let from = index(ChainState::Castles(k));
            for x in 0..=k {
                t[(from, index(castles(x)))] += binomial(k, x) * p.powi(x as i32) * (1.0 - p).powi((k - x) as i32);
            }
        }
        t[(index(ChainState::Castles(1)), index(ChainState::Gathered))] = 1.0;
        let g = index(ChainState::Gathered);
        t[(g, g)] = 1.0;
        Ok(CastleChain { states, transitions: t })
    }

    pub fn index_of(&self, s: ChainState) -> Option<usize> {
        self.states.iter().position(|&t| t == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Absorption {
    /// Probability of eventually reaching the gathered state from the distinct state.
    pub probability: f64,
    /// Expected transitions from the distinct state to the gathered state.
    pub expected_steps: f64,
    /// Expected transitions to absorption from every transient state, in chain order.
    pub expected_by_state: Vec<(ChainState, f64)>,
}

/// Solves the castle-count chain for absorption probability and expected hitting time.
pub fn markov_absorption(n: usize, p: f64) -> Result<Absorption, AnalyticError> {
    let chain = CastleChain::new(n, p)?;
    let g = chain.index_of(ChainState::Gathered).unwrap();
    let transient: Vec<usize> = (0..chain.states.len()).filter(|&s| s != g).collect();
    let k = transient.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut to_g = DVector::<f64>::zeros(k);
    for (r, &s) in transient.iter().enumerate() {
        for (c, &t) in transient.iter().enumerate() {
            a[(r, c)] -= chain.transitions[(s, t)];
        }
        to_g[r] = chain.transitions[(s, g)];
    }
    let lu = a.lu();
    let absorb = lu.solve(&to_g).ok_or(AnalyticError::Singular)?;
    let steps = lu.solve(&DVector::from_element(k, 1.0)).ok_or(AnalyticError::Singular)?;
    let d = transient.iter().position(|&s| chain.states[s] == ChainState::Distinct).unwrap();
    Ok(Absorption {
        probability: absorb[d],
        expected_steps: steps[d],
        expected_by_state: transient.iter().enumerate().map(|(r, &s)| (chain.states[s], steps[r])).collect(),
    })
}
