//! Parameterized rotation circuits, generator ensembles, and named layouts.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{CompiledRotation, GateTemplate, Pauli, RotationGate};
use crate::qcore::{Complex, ComplexMatrix, DensityMatrix, PureState};

/// Ordered list of rotation gates on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<RotationGate>,
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<RotationGate>) -> Result<Self> {
        for g in &gates {
            if let Some(&q) = g.targets().iter().find(|&&q| q >= qubits) {
                return Err(Error::InvalidArgument(format!(
                    "gate target {q} out of range for {qubits} qubits"
                )));
            }
        }
        Ok(Self { qubits, gates })
    }

    pub fn empty(qubits: usize) -> Self {
        Self {
            qubits,
            gates: vec![],
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates(&self) -> &[RotationGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: RotationGate) -> Result<()> {
        if let Some(&q) = gate.targets().iter().find(|&&q| q >= self.qubits) {
            return Err(Error::InvalidArgument(format!(
                "gate target {q} out of range for {} qubits",
                self.qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn angles(&self) -> Vec<f64> {
        self.gates.iter().map(RotationGate::angle).collect()
    }

    pub fn set_angles(&mut self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.gates.len() {
            return Err(Error::DimensionMismatch {
                expected: self.gates.len(),
                found: angles.len(),
            });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("circuit angle".into()));
        }
        for (g, &a) in self.gates.iter_mut().zip(angles) {
            g.set_angle(a);
        }
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: other.qubits,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Ok(Self {
            qubits: self.qubits,
            gates,
        })
    }

    /// The same gates on a larger register; new qubits are left idle.
    pub fn widen(&self, qubits: usize) -> Result<Circuit> {
        if qubits < self.qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot widen a {}-qubit circuit to {qubits} qubits",
                self.qubits
            )));
        }
        Circuit::new(qubits, self.gates.clone())
    }

    /// The same gates on a smaller register; fails if a gate touches a dropped qubit.
    pub fn restrict(&self, qubits: usize) -> Result<Circuit> {
        Circuit::new(qubits, self.gates.clone())
    }

    pub(crate) fn compiled(&self) -> Vec<CompiledRotation> {
        self.gates
            .iter()
            .map(|g| {
                g.compile(self.qubits)
                    .expect("targets validated on construction")
            })
            .collect()
    }

    /// Composite unitary `G_m ⋯ G_2 G_1` for gates applied in list order.
    pub fn unitary(&self) -> ComplexMatrix {
        self.compiled()
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |u, g| g.left(&u))
    }

    /// `U ρ U†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(rho.rows(), self.dim());
        self.compiled()
            .iter()
            .fold(rho.clone(), |m, g| g.conjugate(&m, false))
    }
}

/// Composite unitary of a circuit.
pub fn circuit_unitary(c: &Circuit) -> ComplexMatrix {
    c.unitary()
}

/// Named gate template sequence with unbound angles.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    name: String,
    qubits: usize,
    templates: Vec<GateTemplate>,
}

impl Layout {
    pub fn new(
        name: impl Into<String>,
        qubits: usize,
        templates: Vec<GateTemplate>,
    ) -> Result<Self> {
        for t in &templates {
            if let Some(&q) = t.targets.iter().find(|&&q| q >= qubits) {
                return Err(Error::InvalidArgument(format!(
                    "template target {q} out of range for {qubits} qubits"
                )));
            }
            if !t.is_trainable() {
                return Err(Error::InvalidArgument(format!(
                    "template {} on {:?} contains an identity letter",
                    t.axis_string(),
                    t.targets
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            qubits,
            templates,
        })
    }

    /// `depth` repetitions of X, Y, Z rotations on every qubit followed by
    /// XX, YY, ZZ rotations on every nearest-neighbour pair of an open chain.
    pub fn generic(qubits: usize, depth: usize) -> Result<Self> {
        if qubits == 0 || depth == 0 {
            return Err(Error::InvalidArgument(
                "generic layout needs at least one qubit and one layer".into(),
            ));
        }
        let mut templates = Vec::new();
        for _ in 0..depth {
            for q in 0..qubits {
                for l in [Pauli::X, Pauli::Y, Pauli::Z] {
                    templates.push(GateTemplate::new(vec![q], vec![l])?);
                }
            }
            for q in 0..qubits.saturating_sub(1) {
                for l in [Pauli::X, Pauli::Y, Pauli::Z] {
                    templates.push(GateTemplate::new(vec![q, q + 1], vec![l, l])?);
                }
            }
        }
        Self::new("generic", qubits, templates)
    }

    /// The 4-qubit trapped-ion layout: Z, X, Z layers on every qubit, then
    /// XX couplings on (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
    pub fn ionq(qubits: usize) -> Result<Self> {
        if qubits != 4 {
            return Err(Error::InvalidArgument(format!(
                "the ion-trap layout is defined for 4 qubits, got {qubits}"
            )));
        }
        let mut templates = Vec::new();
        for l in [Pauli::Z, Pauli::X, Pauli::Z] {
            for q in 0..4 {
                templates.push(GateTemplate::new(vec![q], vec![l])?);
            }
        }
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            templates.push(GateTemplate::new(vec![a, b], vec![Pauli::X, Pauli::X])?);
        }
        Self::new("ionq", 4, templates)
    }

    /// Looks up a layout by name (`generic` or `ionq`).
    pub fn by_name(name: &str, qubits: usize, depth: usize) -> Result<Self> {
        match name {
            "generic" => Self::generic(qubits, depth),
            "ionq" => Self::ionq(qubits),
            other => Err(Error::InvalidArgument(format!(
                "unknown layout \"{other}\""
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn templates(&self) -> &[GateTemplate] {
        &self.templates
    }

    pub fn parameter_count(&self) -> usize {
        self.templates.len()
    }

    /// Same templates on a larger register.
    pub fn widen(&self, qubits: usize) -> Result<Self> {
        if qubits < self.qubits {
            return Err(Error::InvalidArgument("cannot shrink a layout".into()));
        }
        Self::new(self.name.clone(), qubits, self.templates.clone())
    }

    pub fn bind(&self, angles: &[f64]) -> Result<Circuit> {
        if angles.len() != self.templates.len() {
            return Err(Error::DimensionMismatch {
                expected: self.templates.len(),
                found: angles.len(),
            });
        }
        let gates = self
            .templates
            .iter()
            .zip(angles)
            .map(|(t, &a)| t.bind(a))
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(self.qubits, gates)
    }

    pub fn zero_circuit(&self) -> Circuit {
        self.bind(&vec![0.0; self.templates.len()])
            .expect("valid templates")
    }

    /// Uniform random angles on `[0, 2π)`.
    pub fn random_circuit<R: Rng + ?Sized>(&self, rng: &mut R) -> Circuit {
        let angles: Vec<f64> = (0..self.templates.len())
            .map(|_| rng.gen_range(0.0..TAU))
            .collect();
        self.bind(&angles).expect("valid templates")
    }

    /// Layout of an existing circuit.
    pub fn from_circuit(name: impl Into<String>, c: &Circuit) -> Result<Self> {
        Self::new(
            name,
            c.qubits(),
            c.gates().iter().map(RotationGate::template).collect(),
        )
    }

    pub fn to_toml(&self) -> String {
        let file = LayoutFile {
            name: self.name.clone(),
            qubits: self.qubits,
            gates: self
                .templates
                .iter()
                .map(|t| GateEntry {
                    targets: t.targets.clone(),
                    axis: t.axis_string(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("layout serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: LayoutFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let templates = file
            .gates
            .into_iter()
            .map(|g| {
                let axis = g
                    .axis
                    .chars()
                    .map(|c| {
                        Pauli::from_char(c)
                            .ok_or_else(|| Error::Parse(format!("invalid axis letter '{c}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GateTemplate::new(g.targets, axis)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.name, file.qubits, templates)
    }
}

/// The trapped-ion generator layout.
pub fn ionq_layout(n: usize) -> Result<Layout> {
    Layout::ionq(n)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    name: String,
    qubits: usize,
    gates: Vec<GateEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateEntry {
    targets: Vec<usize>,
    axis: String,
}

/// Writes angles as CSV rows `circuit,gate,angle`.
pub fn angles_to_csv(circuits: &[Circuit]) -> String {
    let mut out = String::from("circuit,gate,angle\n");
    for (i, c) in circuits.iter().enumerate() {
        for (j, a) in c.angles().iter().enumerate() {
            writeln!(out, "{i},{j},{a}").expect("write to string");
        }
    }
    out
}

/// Parses `circuit,gate,angle` rows into per-circuit angle vectors.
pub fn angles_from_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "circuit,gate,angle" => {}
        _ => return Err(Error::Parse("missing header circuit,gate,angle".into())),
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || {
            Error::Parse(format!(
                "line {}: expected circuit,gate,angle, got \"{line}\"",
                n + 2
            ))
        };
        if fields.len() != 3 {
            return Err(bad());
        }
        let i: usize = fields[0].parse().map_err(|_| bad())?;
        let j: usize = fields[1].parse().map_err(|_| bad())?;
        let a: f64 = fields[2].parse().map_err(|_| bad())?;
        if i > out.len() || (i == out.len() && j != 0) {
            return Err(bad());
        }
        if i == out.len() {
            out.push(Vec::new());
        }
        if out[i].len() != j {
            return Err(bad());
        }
        out[i].push(a);
    }
    Ok(out)
}

/// Fixed input state fed to every generator circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// `|0…0⟩`.
    Zero,
    /// `Σ_i e_i ⊗ e_i / √d` across the two halves of the register.
    MaximallyEntangled,
}

impl InitialState {
    pub fn density(&self, qubits: usize) -> Result<ComplexMatrix> {
        let v = match self {
            InitialState::Zero => PureState::zero_state(qubits),
            InitialState::MaximallyEntangled => {
                if !qubits.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!(
                        "maximally entangled input needs an even register, got {qubits} qubits"
                    )));
                }
                PureState::maximally_entangled(1 << (qubits / 2))
            }
        };
        Ok(ComplexMatrix::outer(v.amplitudes()))
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mixture `Σ p_i U_i ρ₀ U_i†` with `p = softmax(logits)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorEnsemble {
    logits: Vec<f64>,
    circuits: Vec<Circuit>,
    initial: InitialState,
}

impl GeneratorEnsemble {
    pub fn new(logits: Vec<f64>, circuits: Vec<Circuit>, initial: InitialState) -> Result<Self> {
        if circuits.is_empty() {
            return Err(Error::InvalidArgument(
                "an ensemble needs at least one circuit".into(),
            ));
        }
        if logits.len() != circuits.len() {
            return Err(Error::DimensionMismatch {
                expected: circuits.len(),
                found: logits.len(),
            });
        }
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("logit".into()));
        }
        let n = circuits[0].qubits();
        if let Some(c) = circuits.iter().find(|c| c.qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.qubits(),
            });
        }
        initial.density(n)?;
        Ok(Self {
            logits,
            circuits,
            initial,
        })
    }

    /// `rank` copies of `layout` with uniform random angles and zero logits.
    pub fn random<R: Rng + ?Sized>(
        layout: &Layout,
        rank: usize,
        initial: InitialState,
        rng: &mut R,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        let circuits = (0..rank).map(|_| layout.random_circuit(rng)).collect();
        Self::new(vec![0.0; rank], circuits, initial)
    }

    pub fn rank(&self) -> usize {
        self.circuits.len()
    }

    pub fn qubits(&self) -> usize {
        self.circuits[0].qubits()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn set_logits(&mut self, logits: &[f64]) -> Result<()> {
        if logits.len() != self.logits.len() {
            return Err(Error::DimensionMismatch {
                expected: self.logits.len(),
                found: logits.len(),
            });
        }
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("logit".into()));
        }
        self.logits.copy_from_slice(logits);
        Ok(())
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn circuit_mut(&mut self, i: usize) -> &mut Circuit {
        &mut self.circuits[i]
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn initial_matrix(&self) -> ComplexMatrix {
        self.initial
            .density(self.qubits())
            .expect("validated on construction")
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    /// All angles, circuit-major.
    pub fn flat_angles(&self) -> Vec<f64> {
        self.circuits.iter().flat_map(Circuit::angles).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.circuits.iter().map(Circuit::len).sum()
    }

    pub fn set_flat_angles(&mut self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                found: angles.len(),
            });
        }
        let mut offset = 0;
        for c in &mut self.circuits {
            let len = c.len();
            c.set_angles(&angles[offset..offset + len])?;
            offset += len;
        }
        Ok(())
    }

    /// `U_i ρ₀ U_i†` for every component.
    pub fn component_states(&self) -> Vec<ComplexMatrix> {
        let rho0 = self.initial_matrix();
        self.circuits.iter().map(|c| c.apply(&rho0)).collect()
    }

    pub fn generate_state(&self) -> DensityMatrix {
        mix_components(&self.probabilities(), &self.component_states())
    }
}

pub(crate) fn mix_components(probs: &[f64], states: &[ComplexMatrix]) -> DensityMatrix {
    let d = states[0].rows();
    let mut m = ComplexMatrix::zeros(d, d);
    for (p, s) in probs.iter().zip(states) {
        m.add_scaled(Complex::new(*p, 0.0), s);
    }
    DensityMatrix::from_trusted(m)
}

/// Output state of a generator ensemble.
pub fn generate_state(g: &GeneratorEnsemble) -> DensityMatrix {
    g.generate_state()
}

/// Random target produced by `layout` with hidden parameters drawn from `seed`.
///
/// Angles are uniform on `[0, 2π)`; for `rank > 1` the logits are uniform on
/// `[−1, 1]` so the mixture weights are unequal.
pub fn random_target(
    layout: &Layout,
    rank: usize,
    seed: u64,
) -> Result<(DensityMatrix, GeneratorEnsemble)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = GeneratorEnsemble::random(layout, rank, InitialState::Zero, &mut rng)?;
    if rank > 1 {
        let logits: Vec<f64> = (0..rank).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        g.set_logits(&logits)?;
    }
    Ok((g.generate_state(), g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::gate_unitary;
    use crate::qcore::trace_distance;

    #[test]
    fn unitary_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = Layout::generic(3, 2).unwrap();
        let c = layout.random_circuit(&mut rng);
        let dense = c.gates().iter().fold(ComplexMatrix::identity(8), |u, g| {
            gate_unitary(g, 3).unwrap().matmul(&u)
        });
        assert!((&c.unitary() - &dense).max_abs() < 1e-12);
        assert!(c.unitary().unitarity_error() < 1e-9);
    }

    #[test]
    fn empty_and_cancelling_circuits() {
        assert_eq!(Circuit::empty(2).unitary(), ComplexMatrix::identity(4));
        let g = RotationGate::pair(0, 1, Pauli::X, Pauli::Y, 0.9).unwrap();
        let c = Circuit::new(2, vec![g.clone(), g.with_angle(-0.9)]).unwrap();
        assert!((&c.unitary() - &ComplexMatrix::identity(4)).max_abs() < 1e-14);
        assert!(Circuit::new(2, vec![RotationGate::single(2, Pauli::X, 0.1).unwrap()]).is_err());
    }

    #[test]
    fn layout_parameter_counts() {
        for (n, want) in [(1, 9), (2, 27), (4, 63), (8, 135)] {
            assert_eq!(Layout::generic(n, 3).unwrap().parameter_count(), want);
        }
        let ion = Layout::ionq(4).unwrap();
        assert_eq!(ion.parameter_count(), 18);
        assert_eq!(ion, Layout::ionq(4).unwrap());
        assert!(Layout::ionq(3).is_err());
        assert_eq!(ion.zero_circuit().unitary(), ComplexMatrix::identity(16));
    }

    #[test]
    fn layout_toml_round_trip() {
        let l = Layout::ionq(4).unwrap();
        assert_eq!(Layout::from_toml(&l.to_toml()).unwrap(), l);
        assert!(Layout::from_toml("name = \"x\"\nqubits = 1\nbogus = 2\ngates = []").is_err());
    }

    #[test]
    fn angles_csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = Layout::generic(2, 1).unwrap();
        let cs = vec![l.random_circuit(&mut rng), l.random_circuit(&mut rng)];
        let parsed = angles_from_csv(&angles_to_csv(&cs)).unwrap();
        assert_eq!(parsed, cs.iter().map(Circuit::angles).collect::<Vec<_>>());
        assert!(angles_from_csv("circuit,gate,angle\n0,1,0.5\n").is_err());
        assert!(angles_from_csv("a,b\n").is_err());
    }

    #[test]
    fn ensemble_examples() {
        let g =
            GeneratorEnsemble::new(vec![0.0], vec![Circuit::empty(2)], InitialState::Zero).unwrap();
        assert_eq!(g.generate_state(), DensityMatrix::basis(4, 0).unwrap());

        let flip = Circuit::new(
            1,
            vec![RotationGate::single(0, Pauli::X, std::f64::consts::PI).unwrap()],
        )
        .unwrap();
        let g = GeneratorEnsemble::new(
            vec![0.3, 0.3],
            vec![Circuit::empty(1), flip],
            InitialState::Zero,
        )
        .unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!((g.generate_state().matrix() - half.matrix()).max_abs() < 1e-15);

        assert!(GeneratorEnsemble::new(vec![], vec![], InitialState::Zero).is_err());
        assert!(GeneratorEnsemble::new(
            vec![0.0],
            vec![Circuit::empty(1)],
            InitialState::MaximallyEntangled
        )
        .is_err());
    }

    #[test]
    fn targets_are_deterministic_and_distinct() {
        let l = Layout::generic(2, 3).unwrap();
        let (a, _) = random_target(&l, 1, 11).unwrap();
        let (b, _) = random_target(&l, 1, 11).unwrap();
        assert_eq!(a, b);
        let ev = a.eigenvalues();
        assert!(ev[..3].iter().all(|x| x.abs() < 1e-9));
        let (c, _) = random_target(&l, 1, 12).unwrap();
        assert!(trace_distance(&a, &c).unwrap() > 1e-3);
    }

    #[test]
    fn softmax_is_stable() {
        let p = softmax(&[1000.0, 1000.0]);
        assert_eq!(p, vec![0.5, 0.5]);
        assert!((softmax(&[0.1, -2.0, 3.0]).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
