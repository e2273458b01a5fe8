//! Pauli strings, weighted Pauli observables, and Pauli rotation gates.
//!
//! Qubit 0 is the leftmost Kronecker factor, i.e. the most significant bit
//! of a basis-state index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{map_slice, Execution};
use crate::qcore::{kron, Complex, ComplexMatrix, DensityMatrix, I, ONE, ZERO};

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> ComplexMatrix {
        let d = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_vec(2, 2, d.to_vec()).expect("2x2")
    }

    /// `self · other = phase · result`.
    pub fn product(self, other: Pauli) -> (Complex, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (a, b) if a == b => (ONE, I),
            (X, Y) => (I_UNIT, Z),
            (Y, X) => (-I_UNIT, Z),
            (Y, Z) => (I_UNIT, X),
            (Z, Y) => (-I_UNIT, X),
            (Z, X) => (I_UNIT, Y),
            (X, Z) => (-I_UNIT, Y),
            _ => unreachable!(),
        }
    }

    fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

const I_UNIT: Complex = I;

/// Tensor product of single-qubit Paulis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; qubits],
        }
    }

    /// String with `letter` on qubit `q` and identity elsewhere.
    pub fn single(qubits: usize, q: usize, letter: Pauli) -> Result<Self> {
        Self::with_letters(qubits, &[q], &[letter])
    }

    /// String with the given letters on `targets` and identity elsewhere.
    pub fn with_letters(qubits: usize, targets: &[usize], letters: &[Pauli]) -> Result<Self> {
        if targets.len() != letters.len() {
            return Err(Error::InvalidArgument(
                "one letter per target required".into(),
            ));
        }
        let mut s = Self::identity(qubits);
        for (&q, &l) in targets.iter().zip(letters) {
            if q >= qubits {
                return Err(Error::InvalidArgument(format!(
                    "target qubit {q} out of range for {qubits} qubits"
                )));
            }
            s.letters[q] = l;
        }
        Ok(s)
    }

    /// The `index`-th string in base-4 order (`I, X, Y, Z` digits, qubit 0 most significant).
    pub fn from_index(qubits: usize, mut index: usize) -> Self {
        let mut letters = vec![Pauli::I; qubits];
        for q in (0..qubits).rev() {
            letters[q] = Pauli::ALL[index % 4];
            index /= 4;
        }
        Self { letters }
    }

    pub fn index(&self) -> usize {
        self.letters.iter().fold(0, |acc, l| acc * 4 + l.index())
    }

    /// All `4^n` strings in base-4 order; the identity comes first.
    pub fn all(qubits: usize) -> Vec<PauliString> {
        (0..1usize << (2 * qubits))
            .map(|k| Self::from_index(qubits, k))
            .collect()
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Pauli::I).count()
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.qubits())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn matrix(&self) -> ComplexMatrix {
        self.letters
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, l| kron(&acc, &l.matrix()))
    }

    /// `self · other = phase · result`.
    pub fn product(&self, other: &PauliString) -> (Complex, PauliString) {
        assert_eq!(self.qubits(), other.qubits());
        let mut phase = ONE;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.product(b);
                phase *= p;
                l
            })
            .collect();
        (phase, Self { letters })
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters }
    }

    /// Splits a `2n`-qubit string into its two `n`-qubit halves.
    pub fn split_half(&self) -> (PauliString, PauliString) {
        let n = self.qubits() / 2;
        (
            Self::new(self.letters[..n].to_vec()),
            Self::new(self.letters[n..].to_vec()),
        )
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    pub(crate) fn sparse(&self) -> SparsePauli {
        let n = self.qubits();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0usize;
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if l.has_x() {
                x |= bit;
            }
            if l.has_z() {
                z |= bit;
            }
            if l == Pauli::Y {
                ny += 1;
            }
        }
        let base = [ONE, I, -ONE, -I][ny % 4];
        SparsePauli { x, z, base }
    }

    /// `Tr(σ m)`.
    pub fn trace_with(&self, m: &ComplexMatrix) -> Complex {
        self.sparse().trace_with(m)
    }

    /// `Re Tr(σ ρ)` for a Hermitian `ρ`.
    pub fn expectation(&self, rho: &ComplexMatrix) -> f64 {
        self.trace_with(rho).re
    }

    /// `σ m`.
    pub fn left_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.sparse().left_mul(m)
    }

    /// `m σ`.
    pub fn right_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.sparse().right_mul(m)
    }

    /// `σ m σ`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.sparse().conjugate(m)
    }
}

/// Dense matrix of a Pauli string.
pub fn string_matrix(s: &PauliString) -> ComplexMatrix {
    s.matrix()
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        s.chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bit-mask form of a Pauli string: `σ|j⟩ = base · (−1)^{|j ∧ z|} |j ⊕ x⟩`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SparsePauli {
    pub x: usize,
    pub z: usize,
    pub base: Complex,
}

impl SparsePauli {
    /// `σ[j ⊕ x, j]`.
    #[inline]
    pub fn phase(&self, j: usize) -> Complex {
        if (j & self.z).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }

    pub fn trace_with(&self, m: &ComplexMatrix) -> Complex {
        let d = m.rows();
        let data = m.data();
        (0..d)
            .map(|c| self.phase(c) * data[c * d + (c ^ self.x)])
            .sum()
    }

    pub fn left_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = m.rows();
        let cols = m.cols();
        ComplexMatrix::from_fn(d, cols, |r, c| {
            let k = r ^ self.x;
            self.phase(k) * m[(k, c)]
        })
    }

    pub fn right_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let rows = m.rows();
        let d = m.cols();
        ComplexMatrix::from_fn(rows, d, |r, c| m[(r, c ^ self.x)] * self.phase(c))
    }

    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = m.rows();
        ComplexMatrix::from_fn(d, d, |r, c| {
            let k = r ^ self.x;
            self.phase(k) * m[(k, c ^ self.x)] * self.phase(c)
        })
    }
}

/// A rotation `exp(iθσ/2) = cos(θ/2)·I + i·sin(θ/2)·σ` compiled to bit masks.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CompiledRotation {
    pub pauli: SparsePauli,
    pub cos: f64,
    pub sin: f64,
}

impl CompiledRotation {
    pub fn new(pauli: SparsePauli, angle: f64) -> Self {
        let (sin, cos) = (angle / 2.0).sin_cos();
        Self { pauli, cos, sin }
    }

    /// `G m G†`, or `G† m G` when `inverse` is set.
    pub fn conjugate(&self, m: &ComplexMatrix, inverse: bool) -> ComplexMatrix {
        let d = m.rows();
        let p = &self.pauli;
        let c2 = self.cos * self.cos;
        let s2 = self.sin * self.sin;
        let cs = if inverse {
            -self.cos * self.sin
        } else {
            self.cos * self.sin
        };
        let ics = Complex::new(0.0, cs);
        let data = m.data();
        let mut out = ComplexMatrix::zeros(d, d);
        let od = out.data_mut();
        for r in 0..d {
            let k = r ^ p.x;
            let pk = p.phase(k);
            for c in 0..d {
                let cx = c ^ p.x;
                let pc = p.phase(c);
                let sm = pk * data[k * d + c];
                let ms = data[r * d + cx] * pc;
                let sms = pk * data[k * d + cx] * pc;
                od[r * d + c] = data[r * d + c] * c2 + sms * s2 + ics * (sm - ms);
            }
        }
        out
    }

    /// `G m`.
    pub fn left(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let is = Complex::new(0.0, self.sin);
        let sm = self.pauli.left_mul(m);
        let mut out = m.scale_real(self.cos);
        out.add_scaled(is, &sm);
        out
    }
}

/// Real-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliObservable {
    qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliObservable {
    pub fn new(qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (c, s) in &terms {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {s}")));
            }
            if s.qubits() != qubits {
                return Err(Error::DimensionMismatch {
                    expected: qubits,
                    found: s.qubits(),
                });
            }
        }
        Ok(Self { qubits, terms })
    }

    /// The empty (zero) observable.
    pub fn zero(qubits: usize) -> Self {
        Self {
            qubits,
            terms: vec![],
        }
    }

    /// Full Pauli basis expansion with one coefficient per string, in [`PauliString::all`] order.
    pub fn from_basis_coefficients(qubits: usize, coefficients: &[f64]) -> Result<Self> {
        let basis = PauliString::all(qubits);
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coefficients.len(),
            });
        }
        Self::new(qubits, coefficients.iter().copied().zip(basis).collect())
    }

    /// Pauli expansion `Σ Tr(σ m)/d · σ` of a Hermitian matrix, dropping zero terms.
    pub fn decompose(m: &ComplexMatrix) -> Result<Self> {
        let qubits = crate::qcore::qubit_count(m.rows())
            .filter(|_| m.is_square())
            .ok_or_else(|| {
                Error::InvalidShape("Pauli decomposition needs a 2^n square matrix".into())
            })?;
        let d = m.rows() as f64;
        let terms = PauliString::all(qubits)
            .into_iter()
            .filter_map(|s| {
                let c = s.trace_with(m).re / d;
                (c != 0.0).then_some((c, s))
            })
            .collect();
        Self::new(qubits, terms)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(c, _)| *c).collect()
    }

    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.iter().map(|(_, s)| s.clone()).collect()
    }

    /// Replaces all coefficients, keeping the strings.
    pub fn set_coefficients(&mut self, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                found: coefficients.len(),
            });
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {bad}")));
        }
        for ((c, _), &v) in self.terms.iter_mut().zip(coefficients) {
            *c = v;
        }
        Ok(())
    }

    /// Merges duplicate strings and drops zero coefficients.
    pub fn simplified(&self) -> Self {
        let mut acc: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, s) in &self.terms {
            *acc.entry(s.clone()).or_default() += c;
        }
        Self {
            qubits: self.qubits,
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(s, c)| (c, s))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            qubits: self.qubits,
            terms: self
                .terms
                .iter()
                .map(|(c, s)| (c * factor, s.clone()))
                .collect(),
        }
    }

    /// Dense Hermitian matrix `Σ c_k σ_k`.
    pub fn dense(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (c, s) in &self.terms {
            let sp = s.sparse();
            let data = m.data_mut();
            for j in 0..d {
                data[(j ^ sp.x) * d + j] += sp.phase(j) * *c;
            }
        }
        m
    }

    /// `Σ c_k Tr(ρ σ_k)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(self.expectation_matrix(rho.matrix()))
    }

    pub(crate) fn expectation_matrix(&self, m: &ComplexMatrix) -> f64 {
        self.terms.iter().map(|(c, s)| c * s.expectation(m)).sum()
    }

    /// `Σ c_k²`.
    pub fn coefficient_norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c * c).sum()
    }
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0*{}", PauliString::identity(self.qubits));
        }
        for (k, (c, s)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{s}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliObservable {
    type Err = Error;

    /// Parses `"0.5*ZZI + -0.25*XIX"`; whitespace is ignored.
    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty observable".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            let exponent_sign = i > 0 && matches!(bytes[i - 1], b'e' | b'E');
            if b == b'+' && i > start && !exponent_sign {
                pieces.push(&compact[start..i]);
                start = i + 1;
            }
        }
        pieces.push(&compact[start..]);

        let mut terms = Vec::with_capacity(pieces.len());
        for piece in pieces {
            let (coef, letters) = match piece.split_once('*') {
                Some((c, l)) => {
                    let v: f64 = c.parse().map_err(|_| {
                        Error::Parse(format!("invalid coefficient \"{c}\" in term \"{piece}\""))
                    })?;
                    (v, l)
                }
                None => match piece.strip_prefix('-') {
                    Some(l) => (-1.0, l),
                    None => (1.0, piece),
                },
            };
            terms.push((coef, letters.parse::<PauliString>()?));
        }
        let qubits = terms[0].1.qubits();
        if let Some((_, s)) = terms.iter().find(|(_, s)| s.qubits() != qubits) {
            return Err(Error::Parse(format!(
                "term {s} has {} qubits, expected {qubits}",
                s.qubits()
            )));
        }
        Self::new(qubits, terms)
    }
}

/// `Re Tr(σ_k m)` for every string in `basis`.
pub fn trace_projections(m: &ComplexMatrix, basis: &[PauliString], exec: Execution) -> Vec<f64> {
    map_slice(exec, basis, |s| s.trace_with(m).re)
}

/// A Pauli rotation `exp(iθσ/2)` acting on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationGate {
    targets: Vec<usize>,
    axis: Vec<Pauli>,
    angle: f64,
}

impl RotationGate {
    pub fn new(targets: Vec<usize>, axis: Vec<Pauli>, angle: f64) -> Result<Self> {
        validate_targets(&targets, &axis)?;
        if axis.contains(&Pauli::I) {
            return Err(Error::InvalidArgument(
                "rotation axis must act non-trivially on every target".into(),
            ));
        }
        if !angle.is_finite() {
            return Err(Error::NonFinite("rotation angle".into()));
        }
        Ok(Self {
            targets,
            axis,
            angle,
        })
    }

    pub fn single(q: usize, letter: Pauli, angle: f64) -> Result<Self> {
        Self::new(vec![q], vec![letter], angle)
    }

    pub fn pair(q0: usize, q1: usize, l0: Pauli, l1: Pauli, angle: f64) -> Result<Self> {
        Self::new(vec![q0, q1], vec![l0, l1], angle)
    }

    /// Builds the rotation generated by a weight-1 or weight-2 Pauli string.
    pub fn from_string(s: &PauliString, angle: f64) -> Result<Self> {
        let targets = s.support();
        let axis = targets.iter().map(|&q| s.letters()[q]).collect();
        Self::new(targets, axis, angle)
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn axis(&self) -> &[Pauli] {
        &self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn set_angle(&mut self, angle: f64) {
        self.angle = angle;
    }

    pub fn with_angle(&self, angle: f64) -> Self {
        Self {
            angle,
            ..self.clone()
        }
    }

    pub fn template(&self) -> GateTemplate {
        GateTemplate {
            targets: self.targets.clone(),
            axis: self.axis.clone(),
        }
    }

    /// The axis embedded into `n` qubits.
    pub fn string(&self, n: usize) -> Result<PauliString> {
        PauliString::with_letters(n, &self.targets, &self.axis)
    }

    pub(crate) fn compile(&self, n: usize) -> Result<CompiledRotation> {
        Ok(CompiledRotation::new(self.string(n)?.sparse(), self.angle))
    }
}

fn validate_targets(targets: &[usize], axis: &[Pauli]) -> Result<()> {
    if targets.is_empty() || targets.len() > 2 {
        return Err(Error::InvalidArgument(format!(
            "gates act on 1 or 2 qubits, got {}",
            targets.len()
        )));
    }
    if targets.len() != axis.len() {
        return Err(Error::InvalidArgument(
            "one axis letter per target required".into(),
        ));
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(Error::InvalidArgument(
            "gate targets must be distinct".into(),
        ));
    }
    Ok(())
}

/// Dense `n`-qubit unitary `cos(θ/2)·I + i·sin(θ/2)·σ`.
pub fn gate_unitary(g: &RotationGate, n: usize) -> Result<ComplexMatrix> {
    let sigma = g.string(n)?.matrix();
    let (s, c) = (g.angle / 2.0).sin_cos();
    let mut u = ComplexMatrix::identity(1 << n).scale_real(c);
    u.add_scaled(Complex::new(0.0, s), &sigma);
    Ok(u)
}

/// `dU/dθ = (iσ/2)·U`.
pub fn gate_derivative(g: &RotationGate, n: usize) -> Result<ComplexMatrix> {
    let u = gate_unitary(g, n)?;
    Ok(g.string(n)?.left_mul(&u).scale(Complex::new(0.0, 0.5)))
}

/// A gate position in a layout: targets and axis letters, angle unbound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateTemplate {
    pub targets: Vec<usize>,
    pub axis: Vec<Pauli>,
}

impl GateTemplate {
    pub fn new(targets: Vec<usize>, axis: Vec<Pauli>) -> Result<Self> {
        validate_targets(&targets, &axis)?;
        Ok(Self { targets, axis })
    }

    /// Templates containing an identity letter are phase-only or lower-weight gates.
    pub fn is_trainable(&self) -> bool {
        !self.axis.contains(&Pauli::I)
    }

    pub fn bind(&self, angle: f64) -> Result<RotationGate> {
        RotationGate::new(self.targets.clone(), self.axis.clone(), angle)
    }

    pub fn axis_string(&self) -> String {
        self.axis.iter().map(|l| l.as_char()).collect()
    }
}

/// All one- and two-qubit gate templates on `n` qubits.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    pub one_qubit: Vec<GateTemplate>,
    pub two_qubit: Vec<GateTemplate>,
}

/// Four letters per qubit and sixteen letter pairs per unordered qubit pair.
pub fn gate_vocabulary(n: usize) -> Vocabulary {
    let mut one_qubit = Vec::with_capacity(4 * n);
    for q in 0..n {
        for l in Pauli::ALL {
            one_qubit.push(GateTemplate {
                targets: vec![q],
                axis: vec![l],
            });
        }
    }
    let mut two_qubit = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for la in Pauli::ALL {
                for lb in Pauli::ALL {
                    two_qubit.push(GateTemplate {
                        targets: vec![a, b],
                        axis: vec![la, lb],
                    });
                }
            }
        }
    }
    Vocabulary {
        one_qubit,
        two_qubit,
    }
}
