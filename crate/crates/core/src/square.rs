//! The 3×3 grid of two-qubit observables and the facts the experiment rests on:
//! commuting rows and columns, scalar row/column products, real joint
//! eigenbases, and the pairing of Alice's eigenbasis with Bob's.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    commutes, embed_observable, source_state, Amplitudes, LocalOperator, LocalState, Observable,
    Operator, Outcome, Party, Pauli, Sign,
};
use crate::TOLERANCE;

/// A detector switch position: one row or one column of panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    R1,
    R2,
    R3,
    C1,
    C2,
    C3,
}

impl Setting {
    pub const ALL: [Setting; 6] = [
        Setting::R1,
        Setting::R2,
        Setting::R3,
        Setting::C1,
        Setting::C2,
        Setting::C3,
    ];
    pub const ROWS: [Setting; 3] = [Setting::R1, Setting::R2, Setting::R3];
    pub const COLUMNS: [Setting; 3] = [Setting::C1, Setting::C2, Setting::C3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_row(self) -> bool {
        self.index() < 3
    }

    /// Zero-based row or column number.
    pub fn line(self) -> usize {
        self.index() % 3
    }

    /// Zero-based (row, col) positions in measurement order: rows left to
    /// right, columns top to bottom.
    pub fn cells(self) -> [(usize, usize); 3] {
        let k = self.line();
        if self.is_row() {
            [(k, 0), (k, 1), (k, 2)]
        } else {
            [(0, k), (1, k), (2, k)]
        }
    }

    /// Position of `(row, col)` within this setting's triple, if lit.
    pub fn slot_of(self, cell: (usize, usize)) -> Option<usize> {
        self.cells().iter().position(|&c| c == cell)
    }

    /// Panels lit by both settings.
    pub fn shared_cells(self, other: Setting) -> Vec<(usize, usize)> {
        self.cells()
            .into_iter()
            .filter(|c| other.slot_of(*c).is_some())
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Setting::R1 => "R1",
            Setting::R2 => "R2",
            Setting::R3 => "R3",
            Setting::C1 => "C1",
            Setting::C2 => "C2",
            Setting::C3 => "C3",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSetting(s.to_string()))
    }
}

impl Serialize for Setting {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which sign pattern the square carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Standard,
    /// Rows multiply to +I and every column to -I.
    #[serde(rename = "signed")]
    SignedSymmetric,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Standard, Variant::SignedSymmetric];

    /// Sign of the row/column product for `setting`; red-count parity of a
    /// lit line is even for `Plus` and odd for `Minus`.
    pub fn setting_sign(self, setting: Setting) -> Sign {
        match (self, setting) {
            (Variant::Standard, Setting::C3) => Sign::Minus,
            (Variant::Standard, _) => Sign::Plus,
            (Variant::SignedSymmetric, s) if s.is_row() => Sign::Plus,
            (Variant::SignedSymmetric, _) => Sign::Minus,
        }
    }

    pub fn mask(self) -> SignMask {
        match self {
            Variant::Standard => SignMask::standard(),
            Variant::SignedSymmetric => SignMask::symmetric(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::SignedSymmetric => "signed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Variant::Standard),
            "signed" | "signed_symmetric" | "signedsymmetric" => Ok(Variant::SignedSymmetric),
            _ => Err(Error::InvalidVariant(s.to_string())),
        }
    }
}

/// Per-cell signs applied on top of the unsigned grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignMask(pub [[Sign; 3]; 3]);

impl SignMask {
    pub fn standard() -> Self {
        SignMask([[Sign::Plus; 3]; 3])
    }

    /// Negates the listed zero-based cells.
    pub fn negating(cells: &[(usize, usize)]) -> Self {
        let mut mask = SignMask::standard();
        for &(r, c) in cells {
            mask.0[r][c] = mask.0[r][c].flip();
        }
        mask
    }

    /// Negates two cells of the bottom row, given as zero-based columns.
    pub fn last_row_pair(a: usize, b: usize) -> Self {
        SignMask::negating(&[(2, a), (2, b)])
    }

    /// The mask under which every row multiplies to +I and every column to -I:
    /// the first two cells of the bottom row negated. Negating the second and
    /// third instead leaves C1 and C3 at +I (see [`last_row_pair_report`]).
    pub fn symmetric() -> Self {
        SignMask::last_row_pair(0, 1)
    }

    pub fn sign(&self, row: usize, col: usize) -> Sign {
        self.0[row][col]
    }
}

const GRID: [[(Pauli, Pauli); 3]; 3] = [
    [
        (Pauli::I, Pauli::Z),
        (Pauli::Z, Pauli::I),
        (Pauli::Z, Pauli::Z),
    ],
    [
        (Pauli::X, Pauli::I),
        (Pauli::I, Pauli::X),
        (Pauli::X, Pauli::X),
    ],
    [
        (Pauli::X, Pauli::Z),
        (Pauli::Z, Pauli::X),
        (Pauli::Y, Pauli::Y),
    ],
];

/// One party's 3×3 grid of observables.
#[derive(Debug, Clone, PartialEq)]
pub struct MagicSquare {
    party: Party,
    mask: SignMask,
    cells: [[Observable; 3]; 3],
}

/// The grid for `variant`, assigned to `party`'s qubits.
///
/// The square is validated once per process: its product signs must match
/// [`Variant::setting_sign`].
pub fn square(variant: Variant, party: Party) -> MagicSquare {
    static BUILT: OnceLock<[[MagicSquare; 2]; 2]> = OnceLock::new();
    let built = BUILT.get_or_init(|| {
        Variant::ALL.map(|v| {
            Party::BOTH.map(|p| {
                let sq = MagicSquare::with_mask(v.mask(), p);
                let check = sq
                    .product_check()
                    .expect("built-in square must have scalar products");
                for s in Setting::ALL {
                    assert_eq!(
                        check.sign(s),
                        v.setting_sign(s),
                        "{v} square has wrong sign on {s}"
                    );
                }
                sq
            })
        })
    });
    let vi = Variant::ALL
        .iter()
        .position(|v| *v == variant)
        .expect("known variant");
    let pi = Party::BOTH
        .iter()
        .position(|p| *p == party)
        .expect("known party");
    built[vi][pi].clone()
}

impl MagicSquare {
    /// Builds the grid under an arbitrary sign mask. Not validated; run
    /// [`MagicSquare::product_check`] to find out what the mask does.
    pub fn with_mask(mask: SignMask, party: Party) -> Self {
        let cells = std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let (first, second) = GRID[r][c];
                Observable::new(first, second, party).with_sign(mask.sign(r, c))
            })
        });
        MagicSquare { party, mask, cells }
    }

    /// Replaces one cell. Used to probe broken squares.
    pub fn with_cell(mut self, row: usize, col: usize, obs: Observable) -> Self {
        self.cells[row][col] = obs.for_party(self.party);
        self
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn mask(&self) -> SignMask {
        self.mask
    }

    /// The named variant whose mask this square carries, if any.
    pub fn variant(&self) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.mask() == self.mask)
    }

    pub fn cell(&self, row: usize, col: usize) -> Observable {
        self.cells[row][col]
    }

    pub fn setting_observables(&self, s: Setting) -> [Observable; 3] {
        s.cells().map(|(r, c)| self.cells[r][c])
    }

    /// Pairwise commutation of every row and column triple.
    pub fn all_settings_commute(&self) -> bool {
        Setting::ALL.into_iter().all(|s| {
            let obs = self.setting_observables(s);
            (0..3).all(|i| (i + 1..3).all(|j| commutes(&obs[i], &obs[j])))
        })
    }

    /// Multiplies each row and column and checks the product is ±I.
    pub fn product_check(&self) -> Result<ProductCheck> {
        let mut signs = [Sign::Plus; 6];
        let mut max_residual = 0.0f64;
        for s in Setting::ALL {
            let product = self
                .setting_observables(s)
                .iter()
                .fold(Operator::identity(), |acc, o| acc * embed_observable(o));
            let plus = (product - Operator::identity()).norm();
            let minus = (product + Operator::identity()).norm();
            let (sign, residual) = if plus <= minus {
                (Sign::Plus, plus)
            } else {
                (Sign::Minus, minus)
            };
            if residual >= TOLERANCE {
                return Err(Error::NotScalar {
                    setting: s,
                    residual,
                });
            }
            signs[s.index()] = sign;
            max_residual = max_residual.max(residual);
        }
        Ok(ProductCheck {
            signs,
            max_residual,
        })
    }

    /// Joint eigenbasis of a setting's three observables, from products of
    /// projectors `(I ± M)/2` on the party's two-qubit space.
    pub fn simultaneous_eigenbasis(&self, s: Setting) -> SettingEigenbasis {
        let obs = self.setting_observables(s);
        let setting_sign =
            obs.iter().fold(Sign::Plus, |acc, o| acc * o.sign) * Variant::Standard.setting_sign(s);
        let locals = obs.map(|o| o.local_matrix());
        let identity = LocalOperator::identity();
        let half = Complex64::new(0.5, 0.0);

        let mut vectors = Vec::with_capacity(4);
        for o1 in Outcome::BOTH {
            for o2 in Outcome::BOTH {
                let o3 = Outcome::from_value(setting_sign.value() * o1.value() * o2.value())
                    .expect("product of ±1 values");
                let eigenvalues = [o1, o2, o3];
                let projector = locals
                    .iter()
                    .zip(eigenvalues)
                    .fold(identity, |acc, (m, o)| {
                        let sign = Complex64::new(f64::from(o.value()), 0.0);
                        acc * ((identity + m * sign) * half)
                    });
                debug_assert!((projector.trace() - Complex64::new(1.0, 0.0)).norm() < TOLERANCE);
                let column = (0..4)
                    .map(|j| projector.column(j).into_owned())
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .expect("four columns");
                let coefficients = fix_phase(column.normalize());
                vectors.push(JointEigenvector {
                    eigenvalues,
                    coefficients,
                });
            }
        }
        SettingEigenbasis {
            setting: s,
            party: self.party,
            vectors: vectors.try_into().expect("four eigenvectors"),
        }
    }
}

/// Rotates a vector so its first non-negligible coefficient is real and positive.
fn fix_phase(v: LocalState) -> LocalState {
    match v.iter().find(|c| c.norm() > TOLERANCE) {
        Some(lead) => {
            let phase = lead / lead.norm();
            v / phase
        }
        None => v,
    }
}

/// Result of multiplying out every row and column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCheck {
    signs: [Sign; 6],
    /// Largest `‖product ∓ I‖` seen.
    pub max_residual: f64,
}

impl ProductCheck {
    pub fn sign(&self, s: Setting) -> Sign {
        self.signs[s.index()]
    }

    pub fn signs(&self) -> impl Iterator<Item = (Setting, Sign)> + '_ {
        Setting::ALL.into_iter().map(|s| (s, self.sign(s)))
    }

    pub fn rows_plus_columns_minus(&self) -> bool {
        self.signs()
            .all(|(s, sign)| (sign == Sign::Plus) == s.is_row())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenvector {
    /// Eigenvalue of each observable in the setting's measurement order.
    pub eigenvalues: [Outcome; 3],
    /// Coefficients on the party's |00>, |01>, |10>, |11>.
    pub coefficients: LocalState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingEigenbasis {
    pub setting: Setting,
    pub party: Party,
    pub vectors: [JointEigenvector; 4],
}

impl SettingEigenbasis {
    pub fn gram(&self) -> LocalOperator {
        LocalOperator::from_fn(|i, j| {
            self.vectors[i]
                .coefficients
                .dotc(&self.vectors[j].coefficients)
        })
    }

    /// `Σ |v><v|`, which should be the identity.
    pub fn projector_sum(&self) -> LocalOperator {
        self.vectors
            .iter()
            .map(|v| v.coefficients * v.coefficients.adjoint())
            .fold(LocalOperator::zeros(), |acc, p| acc + p)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.vectors
            .iter()
            .flat_map(|v| v.coefficients.iter())
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// Partner states on the other party's qubits: conjugated coefficients.
    pub fn partners(&self) -> [LocalState; 4] {
        std::array::from_fn(|i| self.vectors[i].coefficients.map(|c| c.conj()))
    }

    /// `½ Σ |ψᵢ>|φᵢ>` laid out on the four-qubit index convention.
    pub fn biorthogonal_state(&self) -> Amplitudes {
        let partners = self.partners();
        let own = self.party;
        Amplitudes::from_fn(|index, _| {
            let a = own.local_index(index);
            let b = own.other().local_index(index);
            self.vectors
                .iter()
                .zip(&partners)
                .map(|(v, phi)| v.coefficients[a] * phi[b])
                .sum::<Complex64>()
                * Complex64::new(0.5, 0.0)
        })
    }
}

/// Distance between the source state and `½ Σ |ψᵢ>|φᵢ>` built from Alice's
/// joint eigenbasis for `s`.
pub fn biorthogonal_decomposition_check(variant: Variant, s: Setting) -> f64 {
    let basis = square(variant, Party::Alice).simultaneous_eigenbasis(s);
    let rebuilt = basis.biorthogonal_state();
    (rebuilt - source_state().amplitudes()).norm()
}

/// What negating one pair of bottom-row cells does to the row/column products.
#[derive(Debug, Clone, PartialEq)]
pub struct LastRowPairReport {
    /// Zero-based columns of the negated bottom-row cells.
    pub columns: (usize, usize),
    pub check: ProductCheck,
}

impl LastRowPairReport {
    pub fn symmetric(&self) -> bool {
        self.check.rows_plus_columns_minus()
    }
}

/// Product signs for every choice of two negated bottom-row cells.
pub fn last_row_pair_report() -> Vec<LastRowPairReport> {
    [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|(a, b)| LastRowPairReport {
            columns: (a, b),
            check: MagicSquare::with_mask(SignMask::last_row_pair(a, b), Party::Alice)
                .product_check()
                .expect("sign masks preserve scalar products"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(check: &ProductCheck) -> Vec<i8> {
        check.signs().map(|(_, s)| s.value()).collect()
    }

    #[test]
    fn corner_cells() {
        let a = square(Variant::Standard, Party::Alice);
        assert_eq!(
            a.cell(0, 0),
            Observable::new(Pauli::I, Pauli::Z, Party::Alice)
        );
        let b = square(Variant::Standard, Party::Bob);
        assert_eq!(
            b.cell(2, 2),
            Observable::new(Pauli::Y, Pauli::Y, Party::Bob)
        );
        assert_eq!(Party::Bob.qubits(), (2, 4));
    }

    #[test]
    fn setting_triples() {
        let sq = square(Variant::Standard, Party::Alice);
        let pairs = |s| sq.setting_observables(s).map(|o| (o.first, o.second));
        assert_eq!(
            pairs(Setting::R1),
            [
                (Pauli::I, Pauli::Z),
                (Pauli::Z, Pauli::I),
                (Pauli::Z, Pauli::Z)
            ]
        );
        assert_eq!(
            pairs(Setting::C3),
            [
                (Pauli::Z, Pauli::Z),
                (Pauli::X, Pauli::X),
                (Pauli::Y, Pauli::Y)
            ]
        );
        assert_eq!(
            pairs(Setting::C1),
            [
                (Pauli::I, Pauli::Z),
                (Pauli::X, Pauli::I),
                (Pauli::X, Pauli::Z)
            ]
        );
    }

    #[test]
    fn standard_products() {
        for party in Party::BOTH {
            let check = square(Variant::Standard, party).product_check().unwrap();
            assert_eq!(signs(&check), vec![1, 1, 1, 1, 1, -1]);
            assert!(check.max_residual < TOLERANCE);
        }
    }

    #[test]
    fn signed_products() {
        let check = square(Variant::SignedSymmetric, Party::Alice)
            .product_check()
            .unwrap();
        assert_eq!(signs(&check), vec![1, 1, 1, -1, -1, -1]);
    }

    #[test]
    fn last_row_pairs() {
        let report = last_row_pair_report();
        let by_cols: Vec<_> = report
            .iter()
            .map(|r| (r.columns, signs(&r.check)))
            .collect();
        assert_eq!(
            by_cols,
            vec![
                ((0, 1), vec![1, 1, 1, -1, -1, -1]),
                ((0, 2), vec![1, 1, 1, -1, 1, 1]),
                ((1, 2), vec![1, 1, 1, 1, -1, 1]),
            ]
        );
        assert_eq!(report.iter().filter(|r| r.symmetric()).count(), 1);
    }

    #[test]
    fn broken_square_is_not_scalar() {
        let sq = square(Variant::Standard, Party::Alice).with_cell(
            0,
            0,
            Observable::identity(Party::Alice),
        );
        assert!(matches!(
            sq.product_check(),
            Err(Error::NotScalar {
                setting: Setting::R1,
                ..
            })
        ));
    }

    #[test]
    fn every_setting_commutes() {
        for v in Variant::ALL {
            for p in Party::BOTH {
                assert!(square(v, p).all_settings_commute());
            }
        }
        // the square as a whole does not: R1 and C1 share σz⊗1 ... but σz⊗1 and σx⊗1 clash
        let sq = square(Variant::Standard, Party::Alice);
        assert!(!commutes(&sq.cell(0, 1), &sq.cell(1, 0)));
    }

    #[test]
    fn r1_eigenbasis_is_computational() {
        let basis = square(Variant::Standard, Party::Alice).simultaneous_eigenbasis(Setting::R1);
        let mut found = [false; 4];
        for v in &basis.vectors {
            let k = v
                .coefficients
                .iter()
                .position(|c| (c - Complex64::new(1.0, 0.0)).norm() < TOLERANCE);
            let k = k.expect("standard basis vector");
            assert!(!found[k]);
            found[k] = true;
        }
        // (+,+) -> 1⊗σz=+1 and σz⊗1=+1 -> |00>
        assert!((basis.vectors[0].coefficients[0] - Complex64::new(1.0, 0.0)).norm() < TOLERANCE);
    }

    #[test]
    fn eigenvalue_order_is_lexicographic() {
        let basis = square(Variant::Standard, Party::Alice).simultaneous_eigenbasis(Setting::C3);
        let triples: Vec<_> = basis
            .vectors
            .iter()
            .map(|v| v.eigenvalues.map(Outcome::value))
            .collect();
        assert_eq!(
            triples,
            vec![[1, 1, -1], [1, -1, 1], [-1, 1, 1], [-1, -1, -1]]
        );
    }

    #[test]
    fn eigenbases_are_orthonormal_real_and_complete() {
        for v in Variant::ALL {
            let sq = square(v, Party::Alice);
            for s in Setting::ALL {
                let basis = sq.simultaneous_eigenbasis(s);
                assert!(
                    (basis.gram() - LocalOperator::identity()).norm() < TOLERANCE,
                    "{s}"
                );
                assert!((basis.projector_sum() - LocalOperator::identity()).norm() < TOLERANCE);
                assert!(basis.max_imaginary() < TOLERANCE, "{s}");
                let obs = sq.setting_observables(s);
                for vec in &basis.vectors {
                    for (o, e) in obs.iter().zip(vec.eigenvalues) {
                        let lhs = o.local_matrix() * vec.coefficients;
                        let rhs = vec.coefficients * Complex64::new(f64::from(e.value()), 0.0);
                        assert!((lhs - rhs).norm() < TOLERANCE);
                    }
                }
            }
        }
    }

    #[test]
    fn biorthogonal_reconstruction_all_settings() {
        for v in Variant::ALL {
            for s in Setting::ALL {
                assert!(
                    biorthogonal_decomposition_check(v, s) < TOLERANCE,
                    "{v} {s}"
                );
            }
        }
    }

    #[test]
    fn parses_settings_and_variants() {
        assert_eq!("c3".parse::<Setting>().unwrap(), Setting::C3);
        assert!(matches!("R4".parse::<Setting>(), Err(Error::InvalidSetting(t)) if t == "R4"));
        assert_eq!(
            "signed".parse::<Variant>().unwrap(),
            Variant::SignedSymmetric
        );
        assert!("weird".parse::<Variant>().is_err());
    }

    #[test]
    fn shared_cells_geometry() {
        assert_eq!(Setting::R2.shared_cells(Setting::C1), vec![(1, 0)]);
        assert_eq!(Setting::R1.shared_cells(Setting::R1).len(), 3);
        assert!(Setting::R1.shared_cells(Setting::R2).is_empty());
        assert!(Setting::C1.shared_cells(Setting::C3).is_empty());
    }
}
