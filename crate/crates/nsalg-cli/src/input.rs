//! Operator-file parsing: a JSON document listing named operators (explicit
//! re/im matrices, Pauli strings, or permutation words) with optional kind
//! tags, plus named state vectors. Errors name the offending entry.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use serde::Deserialize;

use nsalg::codes::PauliString;
use nsalg::collective::{perm_rep, Permutation};
use nsalg::dynamics::{KrausMap, LindbladChannel, LindbladModel};
use nsalg::operator::Operator;
use nsalg::symmetry::GroupRep;
use nsalg::{C64, CVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Plain,
    Hamiltonian,
    Lindblad,
    Kraus,
    GroupElement,
}

impl OperatorKind {
    fn parse(tag: Option<&str>) -> Result<Self> {
        Ok(match tag {
            None | Some("operator") | Some("generator") => Self::Plain,
            Some("hamiltonian") => Self::Hamiltonian,
            Some("lindblad") => Self::Lindblad,
            Some("kraus") => Self::Kraus,
            Some("group-element") => Self::GroupElement,
            // The matrix source tags are handled separately; accept them
            // as plain operators when used as a kind.
            Some("pauli-string") | Some("permutation") => Self::Plain,
            Some(other) => bail!("unknown operator kind '{other}'"),
        })
    }
}

#[derive(Deserialize)]
struct OperatorFileRepr {
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    operators: Vec<OperatorEntryRepr>,
    #[serde(default)]
    states: Vec<StateEntryRepr>,
}

#[derive(Deserialize)]
struct OperatorEntryRepr {
    name: String,
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    rate: Option<f64>,
    #[serde(default)]
    string: Option<String>,
    #[serde(default)]
    perm: Option<String>,
    #[serde(default)]
    qubits: Option<usize>,
}

#[derive(Deserialize)]
struct StateEntryRepr {
    name: String,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct NamedOperator {
    pub name: String,
    pub kind: OperatorKind,
    pub op: Operator,
    pub rate: Option<f64>,
}

/// Parsed and validated model inputs.
pub struct ParsedInputs {
    pub dim: usize,
    pub operators: Vec<NamedOperator>,
    pub states: Vec<(String, CVector)>,
}

pub fn parse_operator_file(path: &str) -> Result<ParsedInputs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let repr: OperatorFileRepr =
        serde_json::from_str(&text).with_context(|| format!("parsing {path} as JSON"))?;
    let mut operators = Vec::new();
    let mut dim = repr.dim;

    for (idx, entry) in repr.operators.iter().enumerate() {
        let label = format!("operators[{idx}] ('{}')", entry.name);
        let kind = OperatorKind::parse(entry.kind.as_deref())
            .with_context(|| label.clone())?;
        let op = build_operator(entry, &label)?;
        match dim {
            None => dim = Some(op.dim()),
            Some(d) if d != op.dim() => {
                bail!("{label}: dimension {} conflicts with {d}", op.dim())
            }
            _ => {}
        }
        if kind == OperatorKind::Hamiltonian && !op.is_hermitian(1e-10 * (1.0 + op.hs_norm())) {
            bail!(
                "{label}: operator tagged 'hamiltonian' is not hermitian (residual {:.3e})",
                op.hermiticity_residual()
            );
        }
        if kind == OperatorKind::Lindblad {
            let rate = entry.rate.unwrap_or(1.0);
            if !(rate >= 0.0) {
                bail!("{label}: negative rate {rate}");
            }
        }
        operators.push(NamedOperator {
            name: entry.name.clone(),
            kind,
            op,
            rate: entry.rate,
        });
    }

    let mut states = Vec::new();
    for (idx, entry) in repr.states.iter().enumerate() {
        let label = format!("states[{idx}] ('{}')", entry.name);
        let n = entry.re.len();
        if let Some(im) = &entry.im {
            if im.len() != n {
                bail!("{label}: re has {n} entries but im has {}", im.len());
            }
        }
        if let Some(d) = dim {
            if n != d {
                bail!("{label}: state length {n} conflicts with dimension {d}");
            }
        }
        let v = DVector::from_fn(n, |i, _| {
            C64::new(entry.re[i], entry.im.as_ref().map_or(0.0, |im| im[i]))
        });
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            bail!("{label}: non-finite entries");
        }
        states.push((entry.name.clone(), v));
    }

    let dim = dim.ok_or_else(|| anyhow!("{path}: no operators or dimension given"))?;
    Ok(ParsedInputs {
        dim,
        operators,
        states,
    })
}

fn build_operator(entry: &OperatorEntryRepr, label: &str) -> Result<Operator> {
    let sources = [
        entry.re.is_some() || entry.im.is_some(),
        entry.string.is_some(),
        entry.perm.is_some(),
    ];
    if sources.iter().filter(|&&b| b).count() != 1 {
        bail!("{label}: give exactly one of re/im arrays, a Pauli 'string', or a 'perm' word");
    }
    if let Some(s) = &entry.string {
        let p: PauliString = s
            .parse()
            .map_err(|e| anyhow!("{label}: {e}"))?;
        if let Some(q) = entry.qubits {
            if q != p.num_qubits() {
                bail!(
                    "{label}: string '{s}' has {} qubits, 'qubits' says {q}",
                    p.num_qubits()
                );
            }
        }
        return Ok(p.to_operator());
    }
    if let Some(w) = &entry.perm {
        let q = entry
            .qubits
            .ok_or_else(|| anyhow!("{label}: permutation entries need 'qubits'"))?;
        let perm = Permutation::from_cycles(q, w).map_err(|e| anyhow!("{label}: {e}"))?;
        return Ok(perm_rep(q, &perm).map_err(|e| anyhow!("{label}: {e}"))?);
    }
    let re = entry
        .re
        .as_ref()
        .ok_or_else(|| anyhow!("{label}: missing 're' array"))?;
    let rows = re.len();
    let zeros = vec![vec![0.0; rows]; rows];
    let im = entry.im.as_ref().unwrap_or(&zeros);
    for (r, row) in re.iter().enumerate() {
        if row.len() != rows {
            bail!("{label}: re row {r} has {} entries, expected {rows}", row.len());
        }
    }
    if im.len() != rows {
        bail!("{label}: im has {} rows, expected {rows}", im.len());
    }
    for (r, row) in im.iter().enumerate() {
        if row.len() != rows {
            bail!("{label}: im row {r} has {} entries, expected {rows}", row.len());
        }
    }
    Operator::from_re_im(re, im).map_err(|e| anyhow!("{label}: {e}"))
}

impl ParsedInputs {
    pub fn operators_of_kind(&self, kind: OperatorKind) -> Vec<&NamedOperator> {
        self.operators.iter().filter(|o| o.kind == kind).collect()
    }

    /// Operators used as algebra generators: everything except group
    /// elements.
    pub fn generator_ops(&self) -> Vec<Operator> {
        self.operators
            .iter()
            .filter(|o| o.kind != OperatorKind::GroupElement)
            .map(|o| o.op.clone())
            .collect()
    }

    pub fn operator_by_name(&self, name: &str) -> Result<&NamedOperator> {
        self.operators
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| anyhow!("no operator named '{name}'"))
    }

    pub fn state_by_name(&self, name: &str) -> Result<&CVector> {
        self.states
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| anyhow!("no state named '{name}'"))
    }

    /// Assemble a Lindblad model from hamiltonian/lindblad-tagged entries.
    pub fn lindblad_model(&self) -> Result<LindbladModel> {
        let hams = self.operators_of_kind(OperatorKind::Hamiltonian);
        let h = match hams.len() {
            0 => Operator::zeros(self.dim),
            1 => hams[0].op.clone(),
            n => bail!("{n} operators tagged 'hamiltonian'; at most one is allowed"),
        };
        let channels: Vec<LindbladChannel> = self
            .operators_of_kind(OperatorKind::Lindblad)
            .iter()
            .map(|o| LindbladChannel {
                op: o.op.clone(),
                rate: o.rate.unwrap_or(1.0),
            })
            .collect();
        Ok(LindbladModel::new(h, channels)?)
    }

    /// Assemble a single Kraus map from kraus-tagged entries.
    pub fn kraus_map(&self) -> Result<Option<KrausMap>> {
        let ops: Vec<Operator> = self
            .operators_of_kind(OperatorKind::Kraus)
            .iter()
            .map(|o| o.op.clone())
            .collect();
        if ops.is_empty() {
            return Ok(None);
        }
        Ok(Some(KrausMap::new(ops)?))
    }

    /// Build a group from group-element entries (validated) or by closing
    /// the listed elements under multiplication when `close` is set.
    pub fn group(&self, close: bool, max_order: usize) -> Result<GroupRep> {
        let elems: Vec<Operator> = {
            let tagged = self.operators_of_kind(OperatorKind::GroupElement);
            if tagged.is_empty() {
                self.generator_ops()
            } else {
                tagged.iter().map(|o| o.op.clone()).collect()
            }
        };
        if elems.is_empty() {
            bail!("no group elements in input file");
        }
        if close {
            return Ok(nsalg::symmetry::close_group(&elems, max_order)?);
        }
        let g = GroupRep::new(self.dim, elems, None)?;
        g.validate(1e-8)?;
        Ok(g)
    }
}
