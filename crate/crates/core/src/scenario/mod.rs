//! Scenario files: a small INI-like text format.
//!
//! ```text
//! # comments start with '#'
//! [scenario]
//! name = stern_gerlach
//! axis = z
//!
//! [particle e]
//! type = electron
//! row = 0.7071067811865476 0 | pos 0 0 0 mom 0 0 0 spin +1/2 z
//! row = 0.7071067811865476 0 | pos 0 0 0 mom 0 0 0 spin -1/2 z
//!
//! [harness]
//! trials = 100000
//! seed = 42
//! ```
//!
//! Sections: `[scenario]`, `[particle NAME]`, `[joint]`, `[stage N]`,
//! `[detector]`, `[engine]`, `[harness]`, `[constants]`. Rows are
//! `RE IM | state [| state ...]`, states are sequences of `pos X Y Z`,
//! `mom PX PY PZ` and `spin LABEL AXIS`.

mod syntax;

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use syntax::{render_row, sections, Cursor, Entry, Section};

use crate::constants::{Constants, ParticleType};
use crate::engine::{ChannelPolicy, ExitGrid, InteractionConfig};
use crate::harness::{Experiment, Family, Setup};
use crate::pathspace::{Amplitude, Axis, PathRow, PathState};
use crate::pipeline::{
    beam_scenario, epr_scenario, repeated_field_scenario, spin_input, stern_gerlach_scenario, Apparatus, Detector,
    DetectorBin, FieldObject, LeptonStage, Observable, ScreenMapping, Stage,
};
use crate::qft::{Channel, ChannelQuadrature, Couplings};
use crate::harness::SweepParameter;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

fn invalid(m: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(m.into())
}

/// Named scenario builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Born sampling of one declared particle.
    Born,
    /// Field and screen, read out in halves.
    SternGerlach,
    /// Entangled pair, one Stern-Gerlach apparatus per member.
    Epr,
    /// Head-on lepton beams through one interaction.
    Bhabha,
    /// A chain of soft fields read out by accumulated momentum.
    RepeatedField,
    /// Stages and detector declared explicitly.
    Pipeline,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Born,
        ScenarioKind::SternGerlach,
        ScenarioKind::Epr,
        ScenarioKind::Bhabha,
        ScenarioKind::RepeatedField,
        ScenarioKind::Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Born => "born",
            ScenarioKind::SternGerlach => "stern_gerlach",
            ScenarioKind::Epr => "epr",
            ScenarioKind::Bhabha => "bhabha",
            ScenarioKind::RepeatedField => "repeated_field",
            ScenarioKind::Pipeline => "pipeline",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Builder parameters from `[scenario]`. Only what the file states is kept,
/// so rendering reproduces the file's content.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuilderParams {
    pub axis: Option<Axis>,
    pub axis_b: Option<Axis>,
    pub strength: Option<f64>,
    pub sharpness: Option<f64>,
    pub repetitions: Option<usize>,
    pub projectile: Option<ParticleType>,
    pub target: Option<ParticleType>,
    pub p_projectile: Option<f64>,
    pub p_target: Option<f64>,
    pub detector_bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleDecl {
    pub name: String,
    pub ptype: ParticleType,
    pub rows: Vec<(PathState, Amplitude)>,
}

/// An entangled initial table; `types` gives the member order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDecl {
    pub types: Vec<ParticleType>,
    pub rows: Vec<PathRow>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineSection {
    pub cos_bins: Option<usize>,
    pub phi_bins: Option<usize>,
    pub cos_max: Option<f64>,
    pub spin_axis: Option<Axis>,
    pub nodes: Option<usize>,
    pub forward_cutoff: Option<f64>,
    pub channel: Option<ChannelPolicy>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HarnessSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    /// How many times a single particle passes the same apparatus.
    pub repeats: Option<usize>,
    /// Measure the second EPR member first.
    pub b_first: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantOverrides {
    pub electron_mass: Option<f64>,
    pub muon_mass: Option<f64>,
    pub tau_mass: Option<f64>,
    pub alpha: Option<f64>,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub kind: ScenarioKind,
    pub params: BuilderParams,
    pub particles: Vec<ParticleDecl>,
    pub joint: Option<JointDecl>,
    pub stages: Vec<Stage>,
    pub detector: Option<Detector>,
    pub engine: EngineSection,
    pub harness: HarnessSection,
    pub constants: ConstantOverrides,
}

/// Rejects a key that appears twice in one section.
struct Seen(BTreeSet<String>);

impl Seen {
    fn new() -> Self {
        Seen(BTreeSet::new())
    }

    fn check(&mut self, e: &Entry) -> Result<(), ScenarioError> {
        if e.key != "row" && e.key != "bin" && !self.0.insert(e.key.clone()) {
            return Err(ScenarioError::Parse {
                line: e.line,
                column: e.key_col,
                message: format!("duplicate key `{}`", e.key),
            });
        }
        Ok(())
    }
}

fn unknown_key(e: &Entry, section: &str) -> ScenarioError {
    ScenarioError::Parse {
        line: e.line,
        column: e.key_col,
        message: format!("unknown key `{}` in [{section}]", e.key),
    }
}

fn one<T>(e: &Entry, f: impl FnOnce(&mut Cursor) -> Result<T, ScenarioError>) -> Result<T, ScenarioError> {
    let mut c = Cursor::new(e);
    let v = f(&mut c)?;
    c.finish()?;
    Ok(v)
}

fn header_error(s: &Section, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line: s.line,
        column: 1,
        message: message.into(),
    }
}

fn parse_bool(c: &mut Cursor) -> Result<bool, ScenarioError> {
    match c.peek() {
        Some("true") => {
            c.word("")?;
            Ok(true)
        }
        Some("false") => {
            c.word("")?;
            Ok(false)
        }
        _ => Err(c.error_here("expected `true` or `false`")),
    }
}

fn parse_policy(c: &mut Cursor) -> Result<ChannelPolicy, ScenarioError> {
    if c.peek() == Some("dynamic") {
        c.word("")?;
        return Ok(ChannelPolicy::Dynamic);
    }
    Ok(ChannelPolicy::Fixed(c.parse::<Channel>("a channel")?))
}

fn parse_observable(c: &mut Cursor) -> Result<Observable, ScenarioError> {
    let here = c.error_here("expected `position`, `momentum` or `direction`");
    let kind = c.word("an observable")?;
    let axis = c.axis()?;
    match kind {
        "position" => Ok(Observable::Position(axis)),
        "momentum" => Ok(Observable::Momentum(axis)),
        "direction" => Ok(Observable::Direction(axis)),
        _ => Err(here),
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let secs = sections(text)?;
    let mut kind = None;
    let mut params = BuilderParams::default();
    let mut particles: Vec<ParticleDecl> = Vec::new();
    let mut joint = None;
    let mut stages: Vec<(usize, Stage)> = Vec::new();
    let mut detector = None;
    let mut engine = EngineSection::default();
    let mut harness = HarnessSection::default();
    let mut constants = ConstantOverrides::default();
    let mut seen_sections = BTreeSet::new();

    for s in &secs {
        let tag = match &s.arg {
            Some(a) => format!("{} {a}", s.name),
            None => s.name.clone(),
        };
        if !seen_sections.insert(tag.clone()) {
            return Err(header_error(s, format!("duplicate section [{tag}]")));
        }
        let takes_arg = matches!(s.name.as_str(), "particle" | "stage");
        if takes_arg != s.arg.is_some() {
            return Err(header_error(
                s,
                if takes_arg {
                    format!("[{}] needs a name", s.name)
                } else {
                    format!("[{}] takes no argument", s.name)
                },
            ));
        }
        let mut seen = Seen::new();
        match s.name.as_str() {
            "scenario" => {
                for e in &s.entries {
                    seen.check(e)?;
                    let p = &mut params;
                    match e.key.as_str() {
                        "name" => kind = Some(one(e, |c| c.parse::<ScenarioKind>("a scenario name"))?),
                        "axis" => p.axis = Some(one(e, |c| c.axis())?),
                        "axis_b" => p.axis_b = Some(one(e, |c| c.axis())?),
                        "strength" => p.strength = Some(one(e, |c| c.number())?),
                        "sharpness" => p.sharpness = Some(one(e, |c| c.number())?),
                        "repetitions" => p.repetitions = Some(one(e, |c| c.integer())?),
                        "projectile" => p.projectile = Some(one(e, |c| c.parse("a particle type"))?),
                        "target" => p.target = Some(one(e, |c| c.parse("a particle type"))?),
                        "p_projectile" => p.p_projectile = Some(one(e, |c| c.number())?),
                        "p_target" => p.p_target = Some(one(e, |c| c.number())?),
                        "detector_bins" => p.detector_bins = Some(one(e, |c| c.integer())?),
                        _ => return Err(unknown_key(e, "scenario")),
                    }
                }
            }
            "particle" => {
                let mut ptype = None;
                let mut rows = Vec::new();
                for e in &s.entries {
                    seen.check(e)?;
                    match e.key.as_str() {
                        "type" => ptype = Some(one(e, |c| c.parse::<ParticleType>("a particle type"))?),
                        "row" => {
                            let r = Cursor::new(e).row(1)?;
                            rows.push((r.states.into_iter().next().expect("one state"), r.amplitude));
                        }
                        _ => return Err(unknown_key(e, "particle")),
                    }
                }
                let name = s.arg.clone().expect("checked");
                let ptype = ptype.ok_or_else(|| invalid(format!("particle `{name}` has no type")))?;
                particles.push(ParticleDecl { name, ptype, rows });
            }
            "joint" => {
                let mut types: Option<Vec<ParticleType>> = None;
                let mut raw = Vec::new();
                for e in &s.entries {
                    seen.check(e)?;
                    match e.key.as_str() {
                        "types" => {
                            let mut c = Cursor::new(e);
                            let mut v = Vec::new();
                            while c.peek().is_some() {
                                v.push(c.parse::<ParticleType>("a particle type")?);
                            }
                            types = Some(v);
                        }
                        "row" => raw.push(e),
                        _ => return Err(unknown_key(e, "joint")),
                    }
                }
                let types = types.ok_or_else(|| invalid("[joint] needs `types`"))?;
                if types.len() < 2 {
                    return Err(invalid("[joint] needs at least two types"));
                }
                let rows = raw
                    .into_iter()
                    .map(|e| Cursor::new(e).row(types.len()))
                    .collect::<Result<Vec<_>, _>>()?;
                joint = Some(JointDecl { types, rows });
            }
            "stage" => {
                let arg = s.arg.as_deref().expect("checked");
                let index: usize = arg
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| header_error(s, format!("stage index `{arg}` is not a positive integer")))?;
                stages.push((index, parse_stage(s)?));
            }
            "detector" => {
                let mut observable = None;
                let mut bins = Vec::new();
                for e in &s.entries {
                    seen.check(e)?;
                    match e.key.as_str() {
                        "observable" => observable = Some(one(e, parse_observable)?),
                        "bins" => {
                            let obs = observable.ok_or_else(|| ScenarioError::Parse {
                                line: e.line,
                                column: e.key_col,
                                message: "`observable` must precede `bins`".into(),
                            })?;
                            let d = one(e, |c| match c.word("`halves` or `uniform`")? {
                                "halves" => Ok(Detector::halves(obs)),
                                "uniform" => {
                                    let (lo, hi) = (c.number()?, c.number()?);
                                    let n: usize = c.integer()?;
                                    Ok(Detector::uniform(obs, lo, hi, n))
                                }
                                other => Err(ScenarioError::Parse {
                                    line: e.line,
                                    column: e.value_col,
                                    message: format!("expected `halves` or `uniform`, found `{other}`"),
                                }),
                            })?;
                            bins.extend(d.bins);
                        }
                        "bin" => bins.push(one(e, |c| {
                            Ok(DetectorBin {
                                label: c.word("a bin label")?.to_string(),
                                lo: c.bound()?,
                                hi: c.bound()?,
                            })
                        })?),
                        _ => return Err(unknown_key(e, "detector")),
                    }
                }
                let observable = observable.ok_or_else(|| invalid("[detector] needs `observable`"))?;
                detector = Some(Detector { observable, bins });
            }
            "engine" => {
                for e in &s.entries {
                    seen.check(e)?;
                    let g = &mut engine;
                    match e.key.as_str() {
                        "cos_bins" => g.cos_bins = Some(one(e, |c| c.integer())?),
                        "phi_bins" => g.phi_bins = Some(one(e, |c| c.integer())?),
                        "cos_max" => g.cos_max = Some(one(e, |c| c.number())?),
                        "spin_axis" => g.spin_axis = Some(one(e, |c| c.axis())?),
                        "nodes" => g.nodes = Some(one(e, |c| c.integer())?),
                        "forward_cutoff" => g.forward_cutoff = Some(one(e, |c| c.number())?),
                        "channel" => g.channel = Some(one(e, parse_policy)?),
                        "tolerance" => g.tolerance = Some(one(e, |c| c.number())?),
                        _ => return Err(unknown_key(e, "engine")),
                    }
                }
            }
            "harness" => {
                for e in &s.entries {
                    seen.check(e)?;
                    let h = &mut harness;
                    match e.key.as_str() {
                        "trials" => h.trials = Some(one(e, |c| c.integer())?),
                        "seed" => h.seed = Some(one(e, |c| c.integer())?),
                        "alpha" => h.alpha = Some(one(e, |c| c.number())?),
                        "repeats" => h.repeats = Some(one(e, |c| c.integer())?),
                        "b_first" => h.b_first = Some(one(e, parse_bool)?),
                        _ => return Err(unknown_key(e, "harness")),
                    }
                }
            }
            "constants" => {
                for e in &s.entries {
                    seen.check(e)?;
                    let k = &mut constants;
                    match e.key.as_str() {
                        "electron_mass" => k.electron_mass = Some(one(e, |c| c.number())?),
                        "muon_mass" => k.muon_mass = Some(one(e, |c| c.number())?),
                        "tau_mass" => k.tau_mass = Some(one(e, |c| c.number())?),
                        "alpha" => k.alpha = Some(one(e, |c| c.number())?),
                        _ => return Err(unknown_key(e, "constants")),
                    }
                }
            }
            other => return Err(header_error(s, format!("unknown section [{other}]"))),
        }
    }

    stages.sort_by_key(|(i, _)| *i);
    let file = ScenarioFile {
        kind: kind.ok_or_else(|| invalid("[scenario] needs `name`"))?,
        params,
        particles,
        joint,
        stages: stages.into_iter().map(|(_, s)| s).collect(),
        detector,
        engine,
        harness,
        constants,
    };
    file.validate()?;
    Ok(file)
}

fn parse_stage(s: &Section) -> Result<Stage, ScenarioError> {
    let mut seen = Seen::new();
    let mut kind = None;
    let mut axis = None;
    let mut strength = None;
    let mut sharpness = None;
    let mut weight = None;
    let mut peak_threshold = None;
    let mut distance = None;
    let mut partner = None;
    let mut rows = Vec::new();
    for e in &s.entries {
        seen.check(e)?;
        match e.key.as_str() {
            "kind" => kind = Some((e, one(e, |c| Ok(c.word("a stage kind")?.to_string()))?)),
            "axis" => axis = Some(one(e, |c| c.axis())?),
            "strength" => strength = Some(one(e, |c| c.number())?),
            "sharpness" => sharpness = Some(one(e, |c| c.number())?),
            "weight" => weight = Some(one(e, |c| c.number())?),
            "peak_threshold" => peak_threshold = Some(one(e, |c| c.number())?),
            "distance" => distance = Some(one(e, |c| c.number())?),
            "partner" => partner = Some(one(e, |c| c.parse::<ParticleType>("a particle type"))?),
            "row" => {
                let r = Cursor::new(e).row(1)?;
                rows.push((r.states.into_iter().next().expect("one state"), r.amplitude));
            }
            _ => return Err(unknown_key(e, "stage")),
        }
    }
    let arg = s.arg.as_deref().unwrap_or("");
    let (kind_entry, kind) = kind.ok_or_else(|| invalid(format!("[stage {arg}] needs `kind`")))?;
    let need_axis = || axis.ok_or_else(|| invalid(format!("[stage {arg}] needs `axis`")));
    let stray = |present: bool, key: &str| {
        if present {
            Err(invalid(format!("[stage {arg}]: `{key}` does not apply to a {kind} stage")))
        } else {
            Ok(())
        }
    };
    match kind.as_str() {
        "field" => {
            stray(distance.is_some(), "distance")?;
            stray(partner.is_some() || !rows.is_empty(), "partner")?;
            let mut f = FieldObject::soft(
                need_axis()?,
                strength.ok_or_else(|| invalid(format!("[stage {arg}] needs `strength`")))?,
                sharpness.unwrap_or(1.0),
            );
            if let Some(w) = weight {
                f.weight = w;
            }
            if let Some(t) = peak_threshold {
                f.peak_threshold = t;
            }
            Ok(Stage::Field(f))
        }
        "screen" => {
            stray(strength.is_some() || sharpness.is_some() || weight.is_some(), "strength")?;
            stray(peak_threshold.is_some(), "peak_threshold")?;
            stray(partner.is_some() || !rows.is_empty(), "partner")?;
            Ok(Stage::Screen(ScreenMapping {
                axis: need_axis()?,
                distance: distance.ok_or_else(|| invalid(format!("[stage {arg}] needs `distance`")))?,
            }))
        }
        "lepton" => {
            stray(axis.is_some() || distance.is_some(), "axis")?;
            stray(strength.is_some() || sharpness.is_some() || weight.is_some(), "strength")?;
            stray(peak_threshold.is_some(), "peak_threshold")?;
            Ok(Stage::Lepton(LeptonStage {
                partner: partner.ok_or_else(|| invalid(format!("[stage {arg}] needs `partner`")))?,
                partner_rows: rows,
            }))
        }
        other => Err(ScenarioError::Parse {
            line: kind_entry.line,
            column: kind_entry.value_col,
            message: format!("unknown stage kind `{other}` (field, screen or lepton)"),
        }),
    }
}

fn check_rows<'a>(what: &str, amplitudes: impl Iterator<Item = &'a Amplitude>) -> Result<(), ScenarioError> {
    let mut n = 0;
    let mut total = 0.0;
    for a in amplitudes {
        n += 1;
        total += a.norm_sqr();
    }
    if n == 0 {
        return Err(invalid(format!("{what} has no rows")));
    }
    if total == 0.0 {
        return Err(invalid(format!("{what}: all amplitudes zero")));
    }
    Ok(())
}

impl ScenarioFile {
    /// Checks the named constraints that the grammar alone cannot.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut names = BTreeSet::new();
        for p in &self.particles {
            if !names.insert(p.name.as_str()) {
                return Err(invalid(format!("particle `{}` is declared twice", p.name)));
            }
            check_rows(&format!("particle `{}`", p.name), p.rows.iter().map(|r| &r.1))?;
        }
        if let Some(j) = &self.joint {
            check_rows("[joint]", j.rows.iter().map(|r| &r.amplitude))?;
        }
        for (i, s) in self.stages.iter().enumerate() {
            if let Stage::Lepton(l) = s {
                check_rows(&format!("stage {}", i + 1), l.partner_rows.iter().map(|r| &r.1))?;
            }
        }
        let c = self.constants();
        for (name, v) in [
            ("electron_mass", c.electron_mass),
            ("muon_mass", c.muon_mass),
            ("tau_mass", c.tau_mass),
            ("alpha", c.alpha),
        ] {
            if !(v > 0.0) {
                return Err(invalid(format!("constant `{name}` must be positive")));
            }
        }
        if let Some(a) = self.harness.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid("harness alpha must lie in (0, 1)"));
            }
        }
        if self.harness.trials == Some(0) {
            return Err(invalid("harness trials must be positive"));
        }
        if self.harness.repeats == Some(0) {
            return Err(invalid("harness repeats must be positive"));
        }

        let p = &self.params;
        let k = self.kind;
        let forbid = |present: bool, what: &str| {
            if present {
                Err(invalid(format!("{what} does not apply to a {k} scenario")))
            } else {
                Ok(())
            }
        };
        let field_params = p.axis.is_some() || p.strength.is_some();
        let beam_params = p.projectile.is_some()
            || p.target.is_some()
            || p.p_projectile.is_some()
            || p.p_target.is_some()
            || p.detector_bins.is_some();
        let explicit_apparatus = !self.stages.is_empty() || self.detector.is_some();
        match k {
            ScenarioKind::Born => {
                forbid(field_params || beam_params || p.axis_b.is_some(), "a builder parameter")?;
                forbid(p.sharpness.is_some() || p.repetitions.is_some(), "a builder parameter")?;
                forbid(explicit_apparatus || self.joint.is_some(), "an apparatus")?;
                if self.particles.len() != 1 {
                    return Err(invalid("a born scenario declares exactly one particle"));
                }
            }
            ScenarioKind::SternGerlach | ScenarioKind::RepeatedField => {
                forbid(beam_params || p.axis_b.is_some(), "a beam or pair parameter")?;
                forbid(explicit_apparatus || self.joint.is_some(), "an explicit apparatus")?;
                if k == ScenarioKind::SternGerlach {
                    forbid(p.sharpness.is_some() || p.repetitions.is_some(), "sharpness/repetitions")?;
                    if self.particles.len() != 1 {
                        return Err(invalid("a stern_gerlach scenario declares exactly one particle"));
                    }
                } else if self.particles.len() > 1 {
                    return Err(invalid("a repeated_field scenario declares at most one particle"));
                }
            }
            ScenarioKind::Epr => {
                forbid(beam_params || p.sharpness.is_some() || p.repetitions.is_some(), "a beam parameter")?;
                forbid(explicit_apparatus || !self.particles.is_empty(), "a [particle] or apparatus")?;
                if let Some(j) = &self.joint {
                    if j.types.len() != 2 {
                        return Err(invalid("an epr [joint] has exactly two types"));
                    }
                }
            }
            ScenarioKind::Bhabha => {
                forbid(field_params || p.axis_b.is_some(), "a field parameter")?;
                forbid(p.sharpness.is_some() || p.repetitions.is_some(), "a field parameter")?;
                forbid(explicit_apparatus || self.joint.is_some() || !self.particles.is_empty(), "a declared state")?;
                if p.p_projectile.is_none() {
                    return Err(invalid("a bhabha scenario needs `p_projectile`"));
                }
                if p.detector_bins == Some(0) {
                    return Err(invalid("detector_bins must be positive"));
                }
            }
            ScenarioKind::Pipeline => {
                forbid(field_params || beam_params || p.axis_b.is_some(), "a builder parameter")?;
                forbid(p.sharpness.is_some() || p.repetitions.is_some(), "a builder parameter")?;
                forbid(self.joint.is_some(), "[joint]")?;
                if self.particles.len() != 1 {
                    return Err(invalid("a pipeline scenario declares exactly one particle"));
                }
                if self.stages.is_empty() {
                    return Err(invalid("a pipeline scenario needs at least one [stage N]"));
                }
                if self.detector.is_none() {
                    return Err(invalid("a pipeline scenario needs a [detector]"));
                }
            }
        }
        if k != ScenarioKind::Epr {
            forbid(self.harness.b_first.is_some(), "b_first")?;
        }
        self.experiment()?;
        Ok(())
    }

    pub fn constants(&self) -> Constants {
        let mut c = Constants::default();
        let o = &self.constants;
        c.electron_mass = o.electron_mass.unwrap_or(c.electron_mass);
        c.muon_mass = o.muon_mass.unwrap_or(c.muon_mass);
        c.tau_mass = o.tau_mass.unwrap_or(c.tau_mass);
        c.alpha = o.alpha.unwrap_or(c.alpha);
        c
    }

    /// Engine configuration with defaults filled in; the coupling follows the
    /// (possibly overridden) fine-structure constant.
    pub fn config(&self) -> InteractionConfig {
        let d = InteractionConfig::default();
        let e = &self.engine;
        InteractionConfig {
            grid: ExitGrid {
                cos_bins: e.cos_bins.unwrap_or(d.grid.cos_bins),
                phi_bins: e.phi_bins.unwrap_or(d.grid.phi_bins),
                cos_max: e.cos_max.unwrap_or(d.grid.cos_max),
                spin_axis: e.spin_axis.unwrap_or(d.grid.spin_axis),
            },
            couplings: Couplings::from_constants(&self.constants()),
            quadrature: ChannelQuadrature {
                nodes: e.nodes.unwrap_or(d.quadrature.nodes),
                forward_cutoff: e.forward_cutoff.unwrap_or(d.quadrature.forward_cutoff),
            },
            channel_policy: e.channel.unwrap_or(d.channel_policy),
            tolerance: e.tolerance.unwrap_or(d.tolerance),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.harness.alpha.unwrap_or(0.01)
    }

    fn axis(&self) -> Axis {
        self.params.axis.unwrap_or(Axis::Z)
    }

    fn strength(&self) -> f64 {
        self.params.strength.unwrap_or(1.0)
    }

    fn with_config(&self, mut a: Apparatus) -> Apparatus {
        a.config = self.config();
        a
    }

    fn beam(&self) -> (ParticleType, f64, ParticleType, f64, usize) {
        let p = &self.params;
        let pp = p.p_projectile.unwrap_or(0.0);
        (
            p.projectile.unwrap_or(ParticleType::Electron),
            pp,
            p.target.unwrap_or(ParticleType::Positron),
            p.p_target.unwrap_or(pp),
            p.detector_bins.unwrap_or(8),
        )
    }

    /// The experiment this scenario describes.
    pub fn experiment(&self) -> Result<Experiment, ScenarioError> {
        let repeats = self.harness.repeats.unwrap_or(1);
        let single = |p: &ParticleDecl, apparatus: Apparatus| Setup::Single {
            ptype: p.ptype,
            input: p.rows.clone(),
            apparatus,
            repeats,
        };
        let setup = match self.kind {
            ScenarioKind::Born => {
                let p = &self.particles[0];
                Setup::Born {
                    ptype: p.ptype,
                    rows: p.rows.clone(),
                }
            }
            ScenarioKind::SternGerlach => single(
                &self.particles[0],
                self.with_config(stern_gerlach_scenario(self.axis(), self.strength())),
            ),
            ScenarioKind::RepeatedField => {
                let apparatus = self.with_config(repeated_field_scenario(
                    self.axis(),
                    self.strength(),
                    self.params.sharpness.unwrap_or(1.0),
                    self.params.repetitions.unwrap_or(1),
                ));
                match self.particles.first() {
                    Some(p) => single(p, apparatus),
                    None => Setup::Single {
                        ptype: ParticleType::Electron,
                        input: spin_input(self.axis(), self.axis()),
                        apparatus,
                        repeats,
                    },
                }
            }
            ScenarioKind::Epr => {
                let axis = self.axis();
                let mut setup = epr_scenario(axis, self.params.axis_b.unwrap_or(axis), self.strength());
                setup.apparatus_a.config = self.config();
                setup.apparatus_b.config = self.config();
                if let Some(j) = &self.joint {
                    setup.ptypes = [j.types[0], j.types[1]];
                    setup.rows = j.rows.clone();
                }
                Setup::Epr {
                    setup,
                    b_first: self.harness.b_first.unwrap_or(false),
                }
            }
            ScenarioKind::Bhabha => {
                let (proj, pp, target, pt, bins) = self.beam();
                let b = beam_scenario(proj, pp, target, pt, self.config(), bins);
                Setup::Single {
                    ptype: b.projectile,
                    input: b.input_rows,
                    apparatus: b.apparatus,
                    repeats,
                }
            }
            ScenarioKind::Pipeline => single(
                &self.particles[0],
                Apparatus {
                    stages: self.stages.clone(),
                    detector: self.detector.clone().expect("validated"),
                    config: self.config(),
                },
            ),
        };
        let exp = Experiment {
            constants: self.constants(),
            setup,
        };
        exp.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(exp)
    }

    /// The sweep family for `parameter`, built from this scenario's settings.
    pub fn sweep_family(&self, parameter: SweepParameter) -> Result<Family, ScenarioError> {
        match (parameter, self.kind) {
            (SweepParameter::RepetitionCount, ScenarioKind::RepeatedField) => Ok(Family::Repeated {
                axis: self.axis(),
                strength: self.strength(),
                sharpness: self.params.sharpness.unwrap_or(1.0),
            }),
            (SweepParameter::MassRatio, ScenarioKind::Bhabha) => {
                let (_, pp, _, _, bins) = self.beam();
                Ok(Family::MassRatio {
                    p_projectile: pp,
                    detector_bins: bins,
                    config: self.config(),
                })
            }
            (SweepParameter::EnergyRatio, ScenarioKind::Bhabha) => {
                let (_, pp, _, _, bins) = self.beam();
                Ok(Family::EnergyRatio {
                    p_projectile: pp,
                    detector_bins: bins,
                    config: self.config(),
                })
            }
            (p, k) => Err(invalid(format!("cannot sweep {p} over a {k} scenario"))),
        }
    }

    /// Canonical text; `parse_scenario(&render(f)) == f`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let p = &self.params;
        let _ = writeln!(w, "[scenario]\nname = {}", self.kind);
        opt(w, "axis", &p.axis);
        opt(w, "axis_b", &p.axis_b);
        opt(w, "strength", &p.strength);
        opt(w, "sharpness", &p.sharpness);
        opt(w, "repetitions", &p.repetitions);
        opt(w, "projectile", &p.projectile);
        opt(w, "target", &p.target);
        opt(w, "p_projectile", &p.p_projectile);
        opt(w, "p_target", &p.p_target);
        opt(w, "detector_bins", &p.detector_bins);
        for d in &self.particles {
            let _ = writeln!(w, "\n[particle {}]\ntype = {}", d.name, d.ptype);
            for (s, a) in &d.rows {
                let _ = writeln!(w, "row = {}", render_row(&PathRow::single(s.clone(), *a)));
            }
        }
        if let Some(j) = &self.joint {
            let types: Vec<&str> = j.types.iter().map(|t| t.name()).collect();
            let _ = writeln!(w, "\n[joint]\ntypes = {}", types.join(" "));
            for r in &j.rows {
                let _ = writeln!(w, "row = {}", render_row(r));
            }
        }
        for (i, s) in self.stages.iter().enumerate() {
            let _ = writeln!(w, "\n[stage {}]\nkind = {}", i + 1, s.kind());
            match s {
                Stage::Field(f) => {
                    let _ = writeln!(
                        w,
                        "axis = {}\nstrength = {}\nsharpness = {}\nweight = {}\npeak_threshold = {}",
                        f.axis, f.strength, f.sharpness, f.weight, f.peak_threshold
                    );
                }
                Stage::Screen(m) => {
                    let _ = writeln!(w, "axis = {}\ndistance = {}", m.axis, m.distance);
                }
                Stage::Lepton(l) => {
                    let _ = writeln!(w, "partner = {}", l.partner);
                    for (s, a) in &l.partner_rows {
                        let _ = writeln!(w, "row = {}", render_row(&PathRow::single(s.clone(), *a)));
                    }
                }
            }
        }
        if let Some(d) = &self.detector {
            let _ = writeln!(
                w,
                "\n[detector]\nobservable = {} {}",
                d.observable.keyword(),
                d.observable.axis()
            );
            for b in &d.bins {
                let _ = writeln!(w, "bin = {} {} {}", b.label, b.lo, b.hi);
            }
        }
        let e = &self.engine;
        if *e != EngineSection::default() {
            let _ = writeln!(w, "\n[engine]");
            opt(w, "cos_bins", &e.cos_bins);
            opt(w, "phi_bins", &e.phi_bins);
            opt(w, "cos_max", &e.cos_max);
            opt(w, "spin_axis", &e.spin_axis);
            opt(w, "nodes", &e.nodes);
            opt(w, "forward_cutoff", &e.forward_cutoff);
            if let Some(c) = &e.channel {
                let _ = match c {
                    ChannelPolicy::Dynamic => writeln!(w, "channel = dynamic"),
                    ChannelPolicy::Fixed(ch) => writeln!(w, "channel = {ch}"),
                };
            }
            opt(w, "tolerance", &e.tolerance);
        }
        let h = &self.harness;
        if *h != HarnessSection::default() {
            let _ = writeln!(w, "\n[harness]");
            opt(w, "trials", &h.trials);
            opt(w, "seed", &h.seed);
            opt(w, "alpha", &h.alpha);
            opt(w, "repeats", &h.repeats);
            opt(w, "b_first", &h.b_first);
        }
        let c = &self.constants;
        if *c != ConstantOverrides::default() {
            let _ = writeln!(w, "\n[constants]");
            opt(w, "electron_mass", &c.electron_mass);
            opt(w, "muon_mass", &c.muon_mass);
            opt(w, "tau_mass", &c.tau_mass);
            opt(w, "alpha", &c.alpha);
        }
        out
    }
}

fn opt<T: fmt::Display>(w: &mut String, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        let _ = writeln!(w, "{key} = {v}");
    }
}
