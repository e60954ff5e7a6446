//! Rewriting and rewiring attacks on composite systems.
//!
//! A rewrite changes one component machine and leaves the wiring alone. A
//! rewire precomposes the wiring with an endomorphism of one inner box and
//! leaves every machine alone. Scripts apply steps left to right and log a
//! fingerprint of every intermediate system.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::moore::{apply_algebra, check_components, lift_hom, MachineHom, MooreError, MooreMachine};
use crate::oracle::{find_distinguishing_word, EquivError};
use crate::probes::{compare_outcomes, run_test, Test};
use crate::wiring::{boundary_mismatch, compose, identity_wiring, tensor, BoxShape, Wiring, WiringError};
use crate::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("no component {0}")]
    Target(String),
    #[error("component name `{0}` is ambiguous")]
    AmbiguousName(String),
    #[error("component {index}: replacement does not fit box `{boxname}`: {detail}")]
    Box {
        index: usize,
        boxname: String,
        detail: String,
    },
    #[error("component {index}: homomorphism source is not the current machine")]
    HomSource { index: usize },
    #[error("component {index}: endomorphism does not fit box `{boxname}`: {detail}")]
    Endo {
        index: usize,
        boxname: String,
        detail: String,
    },
    #[error("no correspondence for view component `{0}`")]
    Correspondence(String),
    #[error("outer boxes differ: {0}")]
    OuterMismatch(String),
    #[error(transparent)]
    Moore(#[from] MooreError),
    #[error(transparent)]
    Wiring(#[from] WiringError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
}

/// Hex SHA-256 of a string.
pub fn fingerprint(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A wiring together with one machine per inner box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSystem {
    wiring: Wiring,
    components: Vec<MooreMachine>,
}

impl CompositeSystem {
    pub fn new(wiring: Wiring, components: Vec<MooreMachine>) -> Result<Self, AttackError> {
        check_components(&wiring, &components)?;
        Ok(CompositeSystem { wiring, components })
    }

    pub fn wiring(&self) -> &Wiring {
        &self.wiring
    }

    pub fn components(&self) -> &[MooreMachine] {
        &self.components
    }

    /// Component names, taken from the inner boxes.
    pub fn names(&self) -> Vec<&str> {
        self.wiring.inner().iter().map(|b| b.name()).collect()
    }

    pub fn outer(&self) -> Result<BoxShape, AttackError> {
        Ok(BoxShape::tensor(self.wiring.outer())?)
    }

    pub fn resolve(&self, target: &Target) -> Result<usize, AttackError> {
        match target {
            Target::Index(i) if *i < self.components.len() => Ok(*i),
            Target::Index(i) => Err(AttackError::Target(i.to_string())),
            Target::Name(name) => {
                let mut hits = self.names().into_iter().enumerate().filter(|(_, n)| n == name);
                match (hits.next(), hits.next()) {
                    (Some((i, _)), None) => Ok(i),
                    (Some(_), Some(_)) => Err(AttackError::AmbiguousName(name.clone())),
                    (None, _) => Err(AttackError::Target(format!("`{name}`"))),
                }
            }
        }
    }

    /// The composite machine `Fw(S_1, …, S_n)`.
    pub fn composite(&self) -> Result<MooreMachine, MooreError> {
        apply_algebra(&self.wiring, &self.components)
    }

    pub fn wiring_fingerprint(&self) -> String {
        fingerprint(&self.wiring.canonical_text())
    }

    pub fn fingerprint(&self) -> String {
        let mut text = self.wiring.canonical_text();
        for m in &self.components {
            text.push_str(&m.canonical_text());
        }
        fingerprint(&text)
    }
}

/// Which component a step acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Index(usize),
    Name(String),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Index(i) => write!(f, "#{i}"),
            Target::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteMode {
    Replace(MooreMachine),
    /// Rewrite along a homomorphism out of the current component.
    Hom(MachineHom),
}

impl RewriteMode {
    pub fn replacement(&self) -> &MooreMachine {
        match self {
            RewriteMode::Replace(m) => m,
            RewriteMode::Hom(h) => h.target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub target: Target,
    pub mode: RewriteMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewireStep {
    pub target: Target,
    /// An endomorphism `X_i → X_i` of the target's box.
    pub endo: Wiring,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum AttackStep {
    Rewrite(RewriteStep),
    Rewire(RewireStep),
}

impl AttackStep {
    pub fn target(&self) -> &Target {
        match self {
            AttackStep::Rewrite(s) => &s.target,
            AttackStep::Rewire(s) => &s.target,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            AttackStep::Rewrite(RewriteStep {
                mode: RewriteMode::Replace(_),
                ..
            }) => "rewrite",
            AttackStep::Rewrite(_) => "rewrite-hom",
            AttackStep::Rewire(_) => "rewire",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttackScript {
    pub name: String,
    pub steps: Vec<AttackStep>,
}

impl AttackScript {
    pub fn new(name: impl Into<String>, steps: Vec<AttackStep>) -> Self {
        AttackScript {
            name: name.into(),
            steps,
        }
    }
}

/// Result of a rewrite. `witness` is the lifted homomorphism in `Hom` mode.
#[derive(Debug, Clone)]
pub struct RewriteOutcome {
    pub system: CompositeSystem,
    pub witness: Option<MachineHom>,
}

pub fn apply_rewrite(sys: &CompositeSystem, step: &RewriteStep) -> Result<RewriteOutcome, AttackError> {
    let i = sys.resolve(&step.target)?;
    let current = &sys.components[i];
    let expected = &sys.wiring.inner()[i];
    let replacement = step.mode.replacement();
    if let Some((port, detail)) = expected.interface_mismatch(replacement.shape()) {
        return Err(AttackError::Box {
            index: i,
            boxname: expected.name().to_string(),
            detail: format!("{port}: {detail}"),
        });
    }
    let mut components = sys.components.clone();
    components[i] = replacement.clone();
    let system = CompositeSystem {
        wiring: sys.wiring.clone(),
        components,
    };
    let witness = match &step.mode {
        RewriteMode::Replace(_) => None,
        RewriteMode::Hom(h) => {
            if h.source() != current {
                return Err(AttackError::HomSource { index: i });
            }
            let homs: Vec<MachineHom> = sys
                .components
                .iter()
                .enumerate()
                .map(|(j, m)| if j == i { h.clone() } else { MachineHom::identity(m) })
                .collect();
            Some(lift_hom(&sys.wiring, &homs)?)
        }
    };
    Ok(RewriteOutcome { system, witness })
}

pub fn apply_rewire(sys: &CompositeSystem, step: &RewireStep) -> Result<CompositeSystem, AttackError> {
    let i = sys.resolve(&step.target)?;
    let x = &sys.wiring.inner()[i];
    let endo_err = |e: WiringError| AttackError::Endo {
        index: i,
        boxname: x.name().to_string(),
        detail: e.to_string(),
    };
    let own = std::slice::from_ref(x);
    if let Some(e) = boundary_mismatch(own, step.endo.inner()) {
        return Err(endo_err(e));
    }
    if let Some(e) = boundary_mismatch(own, step.endo.outer()) {
        return Err(endo_err(e));
    }
    let parts: Vec<Wiring> = sys
        .wiring
        .inner()
        .iter()
        .enumerate()
        .map(|(j, b)| if j == i { step.endo.clone() } else { identity_wiring(b) })
        .collect();
    let wiring = compose(&sys.wiring, &tensor(&parts)?)?;
    Ok(CompositeSystem {
        wiring,
        components: sys.components.clone(),
    })
}

pub fn apply_step(sys: &CompositeSystem, step: &AttackStep) -> Result<CompositeSystem, AttackError> {
    match step {
        AttackStep::Rewrite(s) => Ok(apply_rewrite(sys, s)?.system),
        AttackStep::Rewire(s) => apply_rewire(sys, s),
    }
}

/// One line of a script's provenance log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub step: usize,
    pub kind: &'static str,
    pub index: usize,
    pub component: String,
    pub wiring_sha256: String,
    pub component_sha256: String,
    pub system_sha256: String,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {} {} {}#{}: wiring {} component {} system {}",
            self.step,
            self.kind,
            self.component,
            self.index,
            &self.wiring_sha256[..12],
            &self.component_sha256[..12],
            &self.system_sha256[..12],
        )
    }
}

#[derive(Debug, Clone, Error)]
#[error("step {step} failed: {error}")]
pub struct ScriptFailure {
    pub step: usize,
    pub error: AttackError,
    /// Entries for the steps that succeeded.
    pub log: Vec<LogEntry>,
}

/// Folds a script over a system.
pub fn apply_script(
    sys: &CompositeSystem,
    script: &AttackScript,
) -> Result<(CompositeSystem, Vec<LogEntry>), Box<ScriptFailure>> {
    let mut current = sys.clone();
    let mut log = Vec::with_capacity(script.steps.len());
    for (n, step) in script.steps.iter().enumerate() {
        let applied = current
            .resolve(step.target())
            .and_then(|i| Ok((i, apply_step(&current, step)?)));
        let (index, next) = match applied {
            Ok(v) => v,
            Err(error) => return Err(Box::new(ScriptFailure { step: n, error, log })),
        };
        log.push(LogEntry {
            step: n,
            kind: step.kind(),
            index,
            component: next.names()[index].to_string(),
            wiring_sha256: next.wiring_fingerprint(),
            component_sha256: fingerprint(&next.components[index].canonical_text()),
            system_sha256: next.fingerprint(),
        });
        current = next;
    }
    Ok((current, log))
}

/// Behavioral comparison of a baseline and an attacked system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub depth: usize,
    pub equivalent: bool,
    /// Shortest, then least, distinguishing input word.
    pub witness: Option<Word>,
    pub baseline_outputs: Option<Word>,
    pub attacked_outputs: Option<Word>,
    /// `(test, agree)` for the diff battery.
    pub battery: Vec<(String, bool)>,
}

/// Tests run by [`attack_diff`] besides the word search.
pub fn diff_battery(depth: usize) -> Vec<Test> {
    vec![
        Test::terminal(),
        Test::state_set(),
        Test::output_image(depth),
        Test::trace_set(depth),
    ]
}

pub fn attack_diff(
    baseline: &CompositeSystem,
    attacked: &CompositeSystem,
    depth: usize,
) -> Result<DiffReport, AttackError> {
    let a = baseline.composite()?;
    let b = attacked.composite()?;
    if let Some((port, detail)) = a.shape().interface_mismatch(b.shape()) {
        return Err(AttackError::OuterMismatch(format!("{port}: {detail}")));
    }
    let witness = find_distinguishing_word(&a, &b, depth)?;
    let (baseline_outputs, attacked_outputs) = match &witness {
        Some(w) => (Some(a.run(w)?), Some(b.run(w)?)),
        None => (None, None),
    };
    let battery = diff_battery(depth)
        .iter()
        .map(|t| {
            let cmp = compare_outcomes(t, &run_test(t, &a), &run_test(t, &b)).expect("same test on both sides");
            (t.name.clone(), cmp.agree)
        })
        .collect();
    Ok(DiffReport {
        depth,
        equivalent: witness.is_none(),
        witness,
        baseline_outputs,
        attacked_outputs,
        battery,
    })
}

/// View component name to the real component names it stands for.
pub type Correspondence = BTreeMap<String, Vec<String>>;

/// Carries a step on the attacker's view over to the real system. A view
/// component standing for several real ones yields one step per real
/// component.
pub fn transport_step(
    step: &AttackStep,
    view: &CompositeSystem,
    real: &CompositeSystem,
    correspondence: &Correspondence,
) -> Result<Vec<AttackStep>, AttackError> {
    let i = view.resolve(step.target())?;
    let name = view.names()[i].to_string();
    let images = correspondence
        .get(&name)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| AttackError::Correspondence(name.clone()))?;
    images
        .iter()
        .map(|real_name| {
            let j = real.resolve(&Target::Name(real_name.clone()))?;
            let target = Target::Name(real_name.clone());
            Ok(match step {
                AttackStep::Rewrite(s) => {
                    let mode = match &s.mode {
                        RewriteMode::Replace(m) => RewriteMode::Replace(m.clone()),
                        RewriteMode::Hom(h) => RewriteMode::Hom(MachineHom::new(
                            real.components[j].clone(),
                            h.target().clone(),
                            h.state_map().to_vec(),
                        )?),
                    };
                    AttackStep::Rewrite(RewriteStep { target, mode })
                }
                AttackStep::Rewire(s) => AttackStep::Rewire(RewireStep {
                    target,
                    endo: s.endo.clone(),
                }),
            })
        })
        .collect()
}

pub fn transport_script(
    script: &AttackScript,
    view: &CompositeSystem,
    real: &CompositeSystem,
    correspondence: &Correspondence,
) -> Result<AttackScript, AttackError> {
    let mut steps = vec![];
    for step in &script.steps {
        steps.extend(transport_step(step, view, real, correspondence)?);
    }
    Ok(AttackScript::new(script.name.clone(), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::trace_equivalent;
    use crate::wiring::{SourceExpr, Wiring};

    fn shape() -> BoxShape {
        BoxShape::binary("A", &["a", "b"], &["y"])
    }

    fn latch_first(name: &str, invert: bool) -> MooreMachine {
        MooreMachine::from_fn(
            name,
            shape(),
            vec!["0".into(), "1".into()],
            0,
            |_, x| x[0],
            move |s| vec![s ^ invert as usize],
        )
        .unwrap()
    }

    /// Outer box `(a, b) -> y` around a single `A`.
    fn single() -> CompositeSystem {
        CompositeSystem::new(identity_wiring(&shape()), vec![latch_first("A", false)]).unwrap()
    }

    fn swap() -> Wiring {
        Wiring::new(
            vec![shape()],
            vec![shape()],
            vec![vec![SourceExpr::outer_in(0, 1), SourceExpr::outer_in(0, 0)]],
            vec![vec![SourceExpr::inner_out(0, 0)]],
        )
        .unwrap()
    }

    fn rewire(endo: Wiring) -> AttackStep {
        AttackStep::Rewire(RewireStep {
            target: Target::Index(0),
            endo,
        })
    }

    #[test]
    fn replace_with_itself_is_a_no_op() {
        let s = single();
        let out = apply_rewrite(
            &s,
            &RewriteStep {
                target: Target::Name("A".into()),
                mode: RewriteMode::Replace(latch_first("A", false)),
            },
        )
        .unwrap();
        assert_eq!(out.system, s);
        assert!(out.witness.is_none());
    }

    #[test]
    fn swap_twice_is_baseline() {
        let s = single();
        let once = apply_rewire(&s, &RewireStep { target: Target::Index(0), endo: swap() }).unwrap();
        let twice = apply_rewire(&once, &RewireStep { target: Target::Index(0), endo: swap() }).unwrap();
        let base = s.composite().unwrap();
        assert!(!trace_equivalent(&base, &once.composite().unwrap(), 6).unwrap());
        assert!(trace_equivalent(&base, &twice.composite().unwrap(), 6).unwrap());
        assert_eq!(twice.components(), s.components());
    }

    #[test]
    fn endo_on_wrong_box_is_rejected() {
        let other = BoxShape::binary("B", &["a"], &["y"]);
        let err = apply_rewire(
            &single(),
            &RewireStep {
                target: Target::Index(0),
                endo: identity_wiring(&other),
            },
        )
        .unwrap_err();
        assert!(matches!(err, AttackError::Endo { index: 0, .. }));
    }

    #[test]
    fn hom_from_another_machine_is_rejected() {
        let h = MachineHom::identity(&latch_first("other", true));
        let err = apply_rewrite(
            &single(),
            &RewriteStep {
                target: Target::Index(0),
                mode: RewriteMode::Hom(h),
            },
        )
        .unwrap_err();
        assert_eq!(err, AttackError::HomSource { index: 0 });
    }

    #[test]
    fn failing_script_keeps_partial_log() {
        let script = AttackScript::new(
            "bad",
            vec![rewire(swap()), rewire(identity_wiring(&BoxShape::binary("B", &["a"], &["y"])))],
        );
        let fail = apply_script(&single(), &script).unwrap_err();
        assert_eq!(fail.step, 1);
        assert_eq!(fail.log.len(), 1);
        assert_eq!(fail.log[0].kind, "rewire");
    }

    #[test]
    fn empty_script_is_identity() {
        let (out, log) = apply_script(&single(), &AttackScript::default()).unwrap();
        assert_eq!(out, single());
        assert!(log.is_empty());
    }

    #[test]
    fn diff_reports_witness() {
        let hacked = apply_rewrite(
            &single(),
            &RewriteStep {
                target: Target::Index(0),
                mode: RewriteMode::Replace(latch_first("A", true)),
            },
        )
        .unwrap()
        .system;
        let d = attack_diff(&single(), &hacked, 6).unwrap();
        assert!(!d.equivalent);
        assert_eq!(d.witness.as_ref().map(Vec::len), Some(1));
        assert!(d.battery.iter().any(|(t, agree)| t == "trace6" && !agree));
        let same = attack_diff(&single(), &single(), 6).unwrap();
        assert!(same.equivalent && same.witness.is_none());
    }

    #[test]
    fn fingerprints_are_hex_sha256() {
        assert_eq!(
            fingerprint(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
