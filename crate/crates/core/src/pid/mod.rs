//! Partial information decompositions of `I(Y; X,Z)`.
//!
//! Two decompositions are provided: the classical one built on the unique
//! information `UI(Y;X\Z)`, and the one induced by the deficiencies of the
//! reverse channels `P_{Y|X}` and `P_{Y|Z}`.

mod unique;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prob::{Axis, Channel, Joint3};
use crate::projection::{deficiency, DeficiencyResult, ProjectionOptions};

pub use unique::{unique_information, CouplingFamily, UiOptions, UniqueInformation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PidKind {
    Classical,
    DeficiencyInduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PidWitness {
    Coupling(CouplingFamily),
    /// `(δ^X, δ^Z)` computations.
    Deficiencies(Box<(DeficiencyResult, DeficiencyResult)>),
}

/// One `(UI_X, UI_Z, SI, CI)` quadruple, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidTerms {
    pub ui_x: f64,
    pub ui_z: f64,
    pub si: f64,
    pub ci: f64,
    pub kind: PidKind,
    pub witness: Option<PidWitness>,
    /// Set when a deficiency was infinite; the terms are then not meaningful.
    #[serde(default)]
    pub degenerate: bool,
}

impl PidTerms {
    pub fn total(&self) -> f64 {
        self.ui_x + self.ui_z + self.si + self.ci
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ui_x, self.ui_z, self.si, self.ci]
    }
}

/// Mutual informations that every decomposition is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub i_yx: f64,
    pub i_yz: f64,
    pub i_yx_given_z: f64,
    pub i_yz_given_x: f64,
    pub i_y_xz: f64,
}

impl InfoSummary {
    pub fn of(p: &Joint3) -> Self {
        Self {
            i_yx: p.mi(&[Axis::Y], &[Axis::X]),
            i_yz: p.mi(&[Axis::Y], &[Axis::Z]),
            i_yx_given_z: p.cmi(Axis::Y, Axis::X, Axis::Z),
            i_yz_given_x: p.cmi(Axis::Y, Axis::Z, Axis::X),
            i_y_xz: p.mi(&[Axis::Y], &[Axis::X, Axis::Z]),
        }
    }

    /// Largest violation of the four decomposition identities.
    pub fn consistency_error(&self, t: &PidTerms) -> f64 {
        [
            t.ui_x + t.si - self.i_yx,
            t.ui_z + t.si - self.i_yz,
            t.ui_x + t.ci - self.i_yx_given_z,
            t.total() - self.i_y_xz,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Exchanges `X` and `Z`.
pub fn swap_xz(p: &Joint3) -> Joint3 {
    p.swap_xz()
}

/// Classical decomposition from `UI(Y;X\Z)`.
pub fn classical_decomposition(p: &Joint3, opts: &UiOptions) -> PidTerms {
    let info = InfoSummary::of(p);
    let ui = unique_information(p, opts);
    let si = info.i_yx - ui.value;
    PidTerms {
        ui_x: ui.value,
        ui_z: info.i_yz - si,
        si,
        ci: info.i_yx_given_z - ui.value,
        kind: PidKind::Classical,
        witness: Some(PidWitness::Coupling(ui.witness)),
        degenerate: false,
    }
}

/// `P_{Y|Z}` restricted to the `z` with positive mass, so that no
/// placeholder rows enter the decoder hull.
fn supported_reverse_channel(p: &Joint3, axis: Axis) -> Result<Channel> {
    let full = p.y_given(axis);
    let mass = p.marginal(axis);
    let keep: Vec<usize> = (0..full.n_inputs()).filter(|&z| mass[z] > 0.0).collect();
    let rows = keep.iter().map(|&z| full.row(z).to_vec()).collect();
    Channel::new(rows)?
        .with_input_labels(keep.iter().map(|&z| full.input_labels()[z].clone()).collect())?
        .with_output_labels(full.output_labels().to_vec())
}

/// `δ^X = δ^{P_X}(P_{Y|Z}, P_{Y|X})`.
pub fn deficiency_x(p: &Joint3, opts: &ProjectionOptions) -> Result<DeficiencyResult> {
    let d = supported_reverse_channel(p, Axis::Z)?;
    deficiency(&d, &p.y_given(Axis::X), &p.marginal(Axis::X), opts)
}

/// Decomposition whose unique terms are lower bounds built from `δ^X`, `δ^Z`.
pub fn deficiency_decomposition(p: &Joint3, opts: &ProjectionOptions) -> Result<PidTerms> {
    let info = InfoSummary::of(p);
    let dx = deficiency_x(p, opts)?;
    let dz = deficiency_x(&p.swap_xz(), opts)?;
    let degenerate = dx.is_degenerate() || dz.is_degenerate();
    let (a, b) = (dx.value, dz.value);
    let terms = PidTerms {
        ui_x: a.max(b + info.i_yx - info.i_yz),
        ui_z: b.max(a + info.i_yz - info.i_yx),
        si: (info.i_yx - a).min(info.i_yz - b),
        ci: (info.i_yx_given_z - a).min(info.i_yz_given_x - b),
        kind: PidKind::DeficiencyInduced,
        witness: Some(PidWitness::Deficiencies(Box::new((dx, dz)))),
        degenerate,
    };
    Ok(terms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOptions {
    pub ui: UiOptions,
    pub projection: ProjectionOptions,
    /// Slack below which an inequality is reported as an equality.
    pub equality_tol: f64,
}

impl Default for PidOptions {
    fn default() -> Self {
        Self {
            ui: UiOptions::default(),
            projection: ProjectionOptions::default(),
            equality_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    /// Nonnegative when the inequality holds.
    pub slack: f64,
    pub near_equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub classical: PidTerms,
    pub deficiency_induced: PidTerms,
    /// `ŨI_X ≤ UI_X`, `ŨI_Z ≤ UI_Z`, `S̃I ≥ SI`, `C̃I ≥ CI`, in that order.
    pub inequalities: [Inequality; 4],
}

impl ComparisonReport {
    pub fn min_slack(&self) -> f64 {
        self.inequalities.iter().map(|i| i.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Computes both decompositions and the slacks between them.
pub fn compare_decompositions(p: &Joint3, opts: &PidOptions) -> Result<ComparisonReport> {
    let classical = classical_decomposition(p, &opts.ui);
    let tilde = deficiency_decomposition(p, &opts.projection)?;
    let ineq = |name: &str, slack: f64| Inequality {
        name: name.to_string(),
        slack,
        near_equality: slack.abs() < opts.equality_tol,
    };
    let inequalities = [
        ineq("ui_x", classical.ui_x - tilde.ui_x),
        ineq("ui_z", classical.ui_z - tilde.ui_z),
        ineq("si", tilde.si - classical.si),
        ineq("ci", tilde.ci - classical.ci),
    ];
    Ok(ComparisonReport {
        classical,
        deficiency_induced: tilde,
        inequalities,
    })
}
