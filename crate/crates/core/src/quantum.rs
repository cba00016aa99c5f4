//! Dense simulation of the four source qubits.
//!
//! Basis index convention, used everywhere in the crate: the flat index of
//! basis state `|b1 b2 b3 b4>` is `b1·8 + b2·4 + b3·2 + b4`, i.e. qubit 1 is the
//! most significant bit. Alice holds qubits 1 and 3, Bob holds 2 and 4.

use std::fmt;

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOLERANCE;

pub const NUM_QUBITS: usize = 4;
pub const DIM: usize = 1 << NUM_QUBITS;

/// Operator on the full four-qubit space.
pub type Operator = SMatrix<Complex64, DIM, DIM>;
/// Unnormalized vector in the full four-qubit space.
pub type Amplitudes = SVector<Complex64, DIM>;
/// Operator on one party's two-qubit space (local index `2·first + second`).
pub type LocalOperator = Matrix4<Complex64>;
pub type LocalState = Vector4<Complex64>;

/// Projections below this norm are treated as impossible branches.
const COLLAPSE_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bit position of qubit `q` (1-based) inside a flat basis index.
#[inline]
pub fn qubit_shift(q: usize) -> usize {
    debug_assert!((1..=NUM_QUBITS).contains(&q));
    NUM_QUBITS - q
}

#[inline]
fn bit(index: usize, q: usize) -> usize {
    (index >> qubit_shift(q)) & 1
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix2<Complex64> {
        match self {
            Pauli::I => Matrix2::new(ONE, ZERO, ZERO, ONE),
            Pauli::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Matrix2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Two single-qubit Paulis anticommute iff both are non-identity and differ.
    pub fn anticommutes_with(self, other: Pauli) -> bool {
        !self.is_identity() && !other.is_identity() && self != other
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Pauli::I => "1",
            Pauli::X => "σx",
            Pauli::Y => "σy",
            Pauli::Z => "σz",
        }
    }
}

/// One of the two observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::Alice, Party::Bob];

    /// The party's (first, second) qubits, 1-based.
    pub fn qubits(self) -> (usize, usize) {
        match self {
            Party::Alice => (1, 3),
            Party::Bob => (2, 4),
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    /// Flat index of the party's local two-qubit label, 0..4.
    pub fn local_index(self, index: usize) -> usize {
        let (a, b) = self.qubits();
        (bit(index, a) << 1) | bit(index, b)
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => f.write_str("Alice"),
            Party::Bob => f.write_str("Bob"),
        }
    }
}

/// Overall ±1 factor on an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A measured eigenvalue, exactly +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Option<Outcome> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn as_sign(self) -> Sign {
        match self {
            Outcome::Plus => Sign::Plus,
            Outcome::Minus => Sign::Minus,
        }
    }
}

impl std::ops::Mul for Outcome {
    type Output = Outcome;

    fn mul(self, rhs: Outcome) -> Outcome {
        if self == rhs {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// A signed two-qubit Pauli product acting on one party's qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observable {
    pub first: Pauli,
    pub second: Pauli,
    pub sign: Sign,
    pub party: Party,
}

impl Observable {
    pub fn new(first: Pauli, second: Pauli, party: Party) -> Self {
        Observable {
            first,
            second,
            sign: Sign::Plus,
            party,
        }
    }

    pub fn with_sign(self, sign: Sign) -> Self {
        Observable { sign, ..self }
    }

    pub fn identity(party: Party) -> Self {
        Observable::new(Pauli::I, Pauli::I, party)
    }

    /// The same cell assigned to the other party.
    pub fn for_party(self, party: Party) -> Self {
        Observable { party, ..self }
    }

    /// 4×4 matrix on the party's own two qubits.
    pub fn local_matrix(&self) -> LocalOperator {
        let m = self.first.matrix().kronecker(&self.second.matrix());
        let s = f64::from(self.sign.value());
        let mut out = LocalOperator::zeros();
        out.copy_from(&(m * Complex64::new(s, 0.0)));
        out
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Minus {
            f.write_str("-")?;
        }
        write!(f, "{}⊗{}", self.first.symbol(), self.second.symbol())
    }
}

/// Embed an observable into the four-qubit space under the global index convention.
pub fn embed_observable(obs: &Observable) -> Operator {
    let (qa, qb) = obs.party.qubits();
    let (oa, ob) = obs.party.other().qubits();
    let spectator_mask = (1 << qubit_shift(oa)) | (1 << qubit_shift(ob));
    let p1 = obs.first.matrix();
    let p2 = obs.second.matrix();
    let s = Complex64::new(f64::from(obs.sign.value()), 0.0);
    Operator::from_fn(|i, j| {
        if i & spectator_mask != j & spectator_mask {
            return ZERO;
        }
        s * p1[(bit(i, qa), bit(j, qa))] * p2[(bit(i, qb), bit(j, qb))]
    })
}

/// A normalized four-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Amplitudes,
}

impl StateVector {
    /// Validates finiteness and unit norm.
    pub fn from_amplitudes(amps: Amplitudes) -> Result<Self> {
        if let Some(i) = amps
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidNorm(norm));
        }
        Ok(StateVector { amps })
    }

    /// Normalizes `amps`; fails if the vector is (numerically) zero.
    pub fn normalized(amps: Amplitudes) -> Result<Self> {
        let n = amps.norm();
        if !n.is_finite() || n < COLLAPSE_FLOOR {
            return Err(Error::DegenerateCollapse(n));
        }
        StateVector::from_amplitudes(amps / Complex64::new(n, 0.0))
    }

    /// Computational basis state with qubit `q` holding `bits[q-1]`.
    pub fn basis(bits: [u8; NUM_QUBITS]) -> Self {
        let index = bits.iter().enumerate().fold(0usize, |acc, (k, &b)| {
            acc | (usize::from(b & 1) << qubit_shift(k + 1))
        });
        let mut amps = Amplitudes::zeros();
        amps[index] = ONE;
        StateVector { amps }
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amps
    }

    pub fn amplitude(&self, bits: [u8; NUM_QUBITS]) -> Complex64 {
        let index = bits.iter().enumerate().fold(0usize, |acc, (k, &b)| {
            acc | (usize::from(b & 1) << qubit_shift(k + 1))
        });
        self.amps[index]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// Euclidean distance between amplitude vectors (no phase alignment).
    pub fn distance(&self, other: &StateVector) -> f64 {
        (self.amps - other.amps).norm()
    }
}

/// The source state: one Bell pair on qubits (1,2) and one on (3,4).
pub fn source_state() -> StateVector {
    let half = Complex64::new(0.5, 0.0);
    let mut amps = Amplitudes::zeros();
    for b12 in 0..2u8 {
        for b34 in 0..2u8 {
            let bits = [b12, b12, b34, b34];
            let index = bits.iter().enumerate().fold(0usize, |acc, (k, &b)| {
                acc | (usize::from(b) << qubit_shift(k + 1))
            });
            amps[index] = half;
        }
    }
    StateVector { amps }
}

/// `<state|M|state>`, with the rounding-level imaginary part dropped.
pub fn expectation(state: &StateVector, obs: &Observable) -> f64 {
    let m = embed_observable(obs);
    let v = state.amplitudes();
    let value = v.dotc(&(m * v));
    debug_assert!(value.im.abs() < TOLERANCE, "non-real expectation {value}");
    value.re
}

/// Applies the projector `(I ± M)/2` for `outcome` without renormalizing.
pub fn project(amps: &Amplitudes, obs: &Observable, outcome: Outcome) -> Amplitudes {
    let mv = embed_observable(obs) * amps;
    let s = Complex64::new(f64::from(outcome.value()), 0.0);
    (amps + mv * s) * Complex64::new(0.5, 0.0)
}

/// Clamps rounding noise out of a probability, rejecting anything worse.
pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !(-TOLERANCE..=1.0 + TOLERANCE).contains(&p) {
        return Err(Error::NegativeProbability(p));
    }
    // rounding-level weight on a branch is no weight at all
    if p < TOLERANCE {
        Ok(0.0)
    } else if p > 1.0 - TOLERANCE {
        Ok(1.0)
    } else {
        Ok(p)
    }
}

/// Projective measurement of a ±1-valued observable.
///
/// `draw` is a uniform sample in `[0, 1)`; the outcome is +1 iff `draw < p₊`.
pub fn measure(state: &StateVector, obs: &Observable, draw: f64) -> Result<(Outcome, StateVector)> {
    let p_plus = clamp_probability(0.5 * (1.0 + expectation(state, obs)))?;
    let outcome = if draw < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let projected = project(state.amplitudes(), obs, outcome);
    let norm = projected.norm();
    if norm < COLLAPSE_FLOOR {
        return Err(Error::DegenerateCollapse(norm));
    }
    let collapsed = StateVector::from_amplitudes(projected / Complex64::new(norm, 0.0))?;
    Ok((outcome, collapsed))
}

/// Pauli-product commutation: observables on disjoint qubits always commute;
/// otherwise they commute iff an even number of factor pairs anticommute.
pub fn commutes(a: &Observable, b: &Observable) -> bool {
    let by_count = if a.party != b.party {
        true
    } else {
        let anti = usize::from(a.first.anticommutes_with(b.first))
            + usize::from(a.second.anticommutes_with(b.second));
        anti % 2 == 0
    };
    debug_assert_eq!(by_count, commutes_by_matrix(a, b));
    by_count
}

/// Commutator test on the embedded matrices.
pub fn commutes_by_matrix(a: &Observable, b: &Observable) -> bool {
    let ma = embed_observable(a);
    let mb = embed_observable(b);
    (ma * mb - mb * ma).norm() < TOLERANCE
}
