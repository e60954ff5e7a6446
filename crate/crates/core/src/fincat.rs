//! Finite categories given by explicit tables, functors into finite sets and
//! natural transformations between them.
//!
//! Objects, morphisms and set elements are named by strings. Enumerations
//! walk names in lexicographic order, so results are deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub id: String,
    pub source: String,
    pub target: String,
}

impl Morphism {
    pub fn new(id: &str, source: &str, target: &str) -> Self {
        Morphism {
            id: id.into(),
            source: source.into(),
            target: target.into(),
        }
    }
}

/// A category as raw tables. Nothing is checked on construction; see
/// [`validate_category`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinCategory {
    pub objects: Vec<String>,
    pub morphisms: Vec<Morphism>,
    pub identity: BTreeMap<String, String>,
    /// `(g, f) ↦ g ∘ f`.
    pub composition: BTreeMap<(String, String), String>,
}

/// A table that does not even describe a graph with partial composition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StructuralError {
    DuplicateObject(String),
    DuplicateMorphism(String),
    DanglingEndpoint { morphism: String, object: String },
    MissingIdentity(String),
    BadIdentity { object: String, morphism: String },
    MissingComposite { g: String, f: String },
    UnexpectedComposite { g: String, f: String },
    CompositeType { g: String, f: String, result: String },
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralError::DuplicateObject(o) => write!(f, "object `{o}` listed twice"),
            StructuralError::DuplicateMorphism(m) => write!(f, "morphism `{m}` listed twice"),
            StructuralError::DanglingEndpoint { morphism, object } => {
                write!(f, "morphism `{morphism}` refers to unknown object `{object}`")
            }
            StructuralError::MissingIdentity(o) => write!(f, "object `{o}` has no identity"),
            StructuralError::BadIdentity { object, morphism } => {
                write!(f, "identity `{morphism}` of `{object}` is not an endomorphism of it")
            }
            StructuralError::MissingComposite { g, f: ff } => write!(f, "composite {g}∘{ff} is missing"),
            StructuralError::UnexpectedComposite { g, f: ff } => {
                write!(f, "composite {g}∘{ff} is given but the pair is not composable")
            }
            StructuralError::CompositeType { g, f: ff, result } => {
                write!(f, "composite {g}∘{ff} = `{result}` has the wrong source or target")
            }
        }
    }
}

/// A failed category equation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LawViolation {
    LeftIdentity { f: String, found: String },
    RightIdentity { f: String, found: String },
    Associativity { h: String, g: String, f: String, left: String, right: String },
}

impl fmt::Display for LawViolation {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawViolation::LeftIdentity { f, found } => write!(fm, "id∘{f} = {found}, expected {f}"),
            LawViolation::RightIdentity { f, found } => write!(fm, "{f}∘id = {found}, expected {f}"),
            LawViolation::Associativity { h, g, f, left, right } => {
                write!(fm, "({h}∘{g})∘{f} = {left} but {h}∘({g}∘{f}) = {right}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CategoryReport {
    pub structural: Vec<StructuralError>,
    pub laws: Vec<LawViolation>,
}

impl CategoryReport {
    pub fn is_valid(&self) -> bool {
        self.structural.is_empty() && self.laws.is_empty()
    }
}

impl fmt::Display for CategoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid category");
        }
        for e in &self.structural {
            writeln!(f, "structural: {e}")?;
        }
        for l in &self.laws {
            writeln!(f, "law: {l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FincatError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("not a category:\n{0}")]
    InvalidCategory(CategoryReport),
    #[error("functor `{name}` is invalid: {issues}")]
    InvalidFunctor { name: String, issues: String },
    #[error("functors are over different categories")]
    BaseMismatch,
    #[error("Yoneda correspondence fails: {0}")]
    YonedaFailure(String),
}

/// Checks every structural condition, then (if those hold) every identity
/// and associativity instance.
pub fn validate_category(cat: &FinCategory) -> CategoryReport {
    let mut report = CategoryReport::default();
    let mut objects = BTreeSet::new();
    for o in &cat.objects {
        if !objects.insert(o.as_str()) {
            report.structural.push(StructuralError::DuplicateObject(o.clone()));
        }
    }
    let mut arrows: BTreeMap<&str, &Morphism> = BTreeMap::new();
    for m in &cat.morphisms {
        if arrows.insert(m.id.as_str(), m).is_some() {
            report.structural.push(StructuralError::DuplicateMorphism(m.id.clone()));
        }
        for end in [&m.source, &m.target] {
            if !objects.contains(end.as_str()) {
                report.structural.push(StructuralError::DanglingEndpoint {
                    morphism: m.id.clone(),
                    object: end.clone(),
                });
            }
        }
    }
    for o in &objects {
        match cat.identity.get(*o) {
            None => report.structural.push(StructuralError::MissingIdentity(o.to_string())),
            Some(id) => match arrows.get(id.as_str()) {
                Some(m) if m.source == *o && m.target == *o => {}
                _ => report.structural.push(StructuralError::BadIdentity {
                    object: o.to_string(),
                    morphism: id.clone(),
                }),
            },
        }
    }
    for (g, f) in cat.composition.keys() {
        let composable = match (arrows.get(g.as_str()), arrows.get(f.as_str())) {
            (Some(g), Some(f)) => f.target == g.source,
            _ => false,
        };
        if !composable {
            report.structural.push(StructuralError::UnexpectedComposite {
                g: g.clone(),
                f: f.clone(),
            });
        }
    }
    for f in arrows.values() {
        for g in arrows.values().filter(|g| g.source == f.target) {
            match cat.composition.get(&(g.id.clone(), f.id.clone())) {
                None => report.structural.push(StructuralError::MissingComposite {
                    g: g.id.clone(),
                    f: f.id.clone(),
                }),
                Some(r) => match arrows.get(r.as_str()) {
                    Some(gf) if gf.source == f.source && gf.target == g.target => {}
                    _ => report.structural.push(StructuralError::CompositeType {
                        g: g.id.clone(),
                        f: f.id.clone(),
                        result: r.clone(),
                    }),
                },
            }
        }
    }
    report.structural.sort();
    report.structural.dedup();
    if !report.structural.is_empty() {
        return report;
    }

    let comp = |g: &str, f: &str| cat.composition[&(g.to_string(), f.to_string())].clone();
    for f in arrows.values() {
        let left = comp(&cat.identity[&f.target], &f.id);
        if left != f.id {
            report.laws.push(LawViolation::LeftIdentity {
                f: f.id.clone(),
                found: left,
            });
        }
        let right = comp(&f.id, &cat.identity[&f.source]);
        if right != f.id {
            report.laws.push(LawViolation::RightIdentity {
                f: f.id.clone(),
                found: right,
            });
        }
    }
    for f in arrows.values() {
        for g in arrows.values().filter(|g| g.source == f.target) {
            for h in arrows.values().filter(|h| h.source == g.target) {
                let left = comp(&comp(&h.id, &g.id), &f.id);
                let right = comp(&h.id, &comp(&g.id, &f.id));
                if left != right {
                    report.laws.push(LawViolation::Associativity {
                        h: h.id.clone(),
                        g: g.id.clone(),
                        f: f.id.clone(),
                        left,
                        right,
                    });
                }
            }
        }
    }
    report.laws.sort();
    report
}

impl FinCategory {
    /// Builds and validates.
    pub fn new(
        objects: &[&str],
        morphisms: &[(&str, &str, &str)],
        identity: &[(&str, &str)],
        composition: &[(&str, &str, &str)],
    ) -> Result<Self, FincatError> {
        let cat = FinCategory::from_tables(objects, morphisms, identity, composition);
        let report = validate_category(&cat);
        if report.is_valid() {
            Ok(cat)
        } else {
            Err(FincatError::InvalidCategory(report))
        }
    }

    /// Builds without validating. Composition rows are `(g, f, g∘f)`.
    pub fn from_tables(
        objects: &[&str],
        morphisms: &[(&str, &str, &str)],
        identity: &[(&str, &str)],
        composition: &[(&str, &str, &str)],
    ) -> Self {
        FinCategory {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            morphisms: morphisms.iter().map(|(m, s, t)| Morphism::new(m, s, t)).collect(),
            identity: identity
                .iter()
                .map(|(o, m)| (o.to_string(), m.to_string()))
                .collect(),
            composition: composition
                .iter()
                .map(|(g, f, r)| ((g.to_string(), f.to_string()), r.to_string()))
                .collect(),
        }
    }

    pub fn has_object(&self, o: &str) -> bool {
        self.objects.iter().any(|x| x == o)
    }

    fn check_object(&self, o: &str) -> Result<(), FincatError> {
        if self.has_object(o) {
            Ok(())
        } else {
            Err(FincatError::UnknownObject(o.to_string()))
        }
    }

    pub fn morphism(&self, id: &str) -> Option<&Morphism> {
        self.morphisms.iter().find(|m| m.id == id)
    }

    /// `Hom(a, b)`, sorted by id.
    pub fn hom(&self, a: &str, b: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .morphisms
            .iter()
            .filter(|m| m.source == a && m.target == b)
            .map(|m| m.id.clone())
            .collect();
        out.sort();
        out
    }

    pub fn compose(&self, g: &str, f: &str) -> Option<&str> {
        self.composition
            .get(&(g.to_string(), f.to_string()))
            .map(String::as_str)
    }

    pub fn identity_of(&self, o: &str) -> Option<&str> {
        self.identity.get(o).map(String::as_str)
    }

    fn sorted_objects(&self) -> Vec<String> {
        let mut o = self.objects.clone();
        o.sort();
        o
    }
}

/// A functor into finite sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinSetFunctor {
    pub name: String,
    pub objects: BTreeMap<String, Vec<String>>,
    pub morphisms: BTreeMap<String, BTreeMap<String, String>>,
}

impl FinSetFunctor {
    /// The functor sending every object to `elements` and every morphism to
    /// the identity.
    pub fn constant(cat: &FinCategory, elements: &[&str]) -> Self {
        let set: Vec<String> = elements.iter().map(|s| s.to_string()).collect();
        FinSetFunctor {
            name: format!("const{{{}}}", elements.join(",")),
            objects: cat.objects.iter().map(|o| (o.clone(), set.clone())).collect(),
            morphisms: cat
                .morphisms
                .iter()
                .map(|m| (m.id.clone(), set.iter().map(|e| (e.clone(), e.clone())).collect()))
                .collect(),
        }
    }

    pub fn set(&self, o: &str) -> &[String] {
        self.objects.get(o).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn apply(&self, m: &str, x: &str) -> Option<&str> {
        self.morphisms.get(m)?.get(x).map(String::as_str)
    }
}

/// Checks that `f` is a functor `cat → FinSet`. Returns human-readable issues.
pub fn validate_functor(cat: &FinCategory, f: &FinSetFunctor) -> Vec<String> {
    let mut issues = vec![];
    let cat_objects: BTreeSet<&String> = cat.objects.iter().collect();
    for o in f.objects.keys() {
        if !cat_objects.contains(o) {
            issues.push(format!("maps unknown object `{o}`"));
        }
    }
    for o in &cat.objects {
        match f.objects.get(o) {
            None => issues.push(format!("object `{o}` is not mapped")),
            Some(set) => {
                if set.iter().collect::<BTreeSet<_>>().len() != set.len() {
                    issues.push(format!("set at `{o}` repeats an element"));
                }
            }
        }
    }
    for id in f.morphisms.keys() {
        if cat.morphism(id).is_none() {
            issues.push(format!("maps unknown morphism `{id}`"));
        }
    }
    for m in &cat.morphisms {
        let Some(func) = f.morphisms.get(&m.id) else {
            issues.push(format!("morphism `{}` is not mapped", m.id));
            continue;
        };
        let (dom, cod) = (f.set(&m.source), f.set(&m.target));
        for x in dom {
            match func.get(x) {
                None => issues.push(format!("F({}) is undefined at `{x}`", m.id)),
                Some(y) if !cod.contains(y) => {
                    issues.push(format!("F({})(`{x}`) = `{y}` is not in F({})", m.id, m.target))
                }
                _ => {}
            }
        }
        if func.keys().any(|x| !dom.contains(x)) {
            issues.push(format!("F({}) is defined outside F({})", m.id, m.source));
        }
    }
    if !issues.is_empty() {
        return issues;
    }
    for o in &cat.objects {
        if let Some(id) = cat.identity_of(o) {
            for x in f.set(o) {
                if f.apply(id, x) != Some(x.as_str()) {
                    issues.push(format!("F({id}) moves `{x}`"));
                }
            }
        }
    }
    for ((g, h), gh) in &cat.composition {
        let Some(src) = cat.morphism(h).map(|m| m.source.clone()) else {
            continue;
        };
        for x in f.set(&src) {
            let two_step = f.apply(h, x).and_then(|y| f.apply(g, y));
            if two_step != f.apply(gh, x) {
                issues.push(format!("F({g}∘{h}) ≠ F({g})∘F({h}) at `{x}`"));
            }
        }
    }
    issues
}

fn require_functor(cat: &FinCategory, f: &FinSetFunctor) -> Result<(), FincatError> {
    let issues = validate_functor(cat, f);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(FincatError::InvalidFunctor {
            name: f.name.clone(),
            issues: issues.join("; "),
        })
    }
}

fn require_category(cat: &FinCategory) -> Result<(), FincatError> {
    let report = validate_category(cat);
    if report.is_valid() {
        Ok(())
    } else {
        Err(FincatError::InvalidCategory(report))
    }
}

/// `Hom(a, −)`: `b ↦ Hom(a, b)`, `g ↦ g ∘ −`.
pub fn hom_functor(cat: &FinCategory, a: &str) -> Result<FinSetFunctor, FincatError> {
    cat.check_object(a)?;
    require_category(cat)?;
    Ok(FinSetFunctor {
        name: format!("Hom({a},-)"),
        objects: cat.objects.iter().map(|b| (b.clone(), cat.hom(a, b))).collect(),
        morphisms: cat
            .morphisms
            .iter()
            .map(|g| {
                let post = cat
                    .hom(a, &g.source)
                    .into_iter()
                    .map(|f| {
                        let gf = cat.compose(&g.id, &f).expect("validated").to_string();
                        (f, gf)
                    })
                    .collect();
                (g.id.clone(), post)
            })
            .collect(),
    })
}

/// A family of functions `η_A : FA → GA`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NatTransformation {
    pub components: BTreeMap<String, BTreeMap<String, String>>,
}

impl NatTransformation {
    pub fn at(&self, o: &str, x: &str) -> Option<&str> {
        self.components.get(o)?.get(x).map(String::as_str)
    }

    /// Every component is a bijection.
    pub fn is_iso(&self, g: &FinSetFunctor) -> bool {
        self.components.iter().all(|(o, c)| {
            let image: BTreeSet<&String> = c.values().collect();
            image.len() == c.len() && image.len() == g.set(o).len()
        })
    }
}

/// The first morphism whose naturality square fails, if any.
pub fn naturality_failure(
    cat: &FinCategory,
    f: &FinSetFunctor,
    g: &FinSetFunctor,
    eta: &NatTransformation,
) -> Option<(String, String)> {
    for m in &cat.morphisms {
        for x in f.set(&m.source) {
            let down_right = f.apply(&m.id, x).and_then(|y| eta.at(&m.target, y));
            let right_down = eta.at(&m.source, x).and_then(|y| g.apply(&m.id, y));
            if down_right.is_none() || down_right != right_down {
                return Some((m.id.clone(), x.clone()));
            }
        }
    }
    None
}

/// All natural transformations `F ⇒ G`, in lexicographic order of their
/// components (objects by name, then elements by name).
pub fn enumerate_nat(
    cat: &FinCategory,
    f: &FinSetFunctor,
    g: &FinSetFunctor,
) -> Result<Vec<NatTransformation>, FincatError> {
    require_category(cat)?;
    require_functor(cat, f).map_err(|_| FincatError::BaseMismatch)?;
    require_functor(cat, g).map_err(|_| FincatError::BaseMismatch)?;

    // Slots are (object, element of F object), in the output order.
    let objects = cat.sorted_objects();
    let mut slot_of: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut slots: Vec<(&str, &str)> = vec![];
    let mut targets: Vec<Vec<&str>> = vec![];
    for o in &objects {
        let mut elems: Vec<&str> = f.set(o).iter().map(String::as_str).collect();
        elems.sort();
        let mut cod: Vec<&str> = g.set(o).iter().map(String::as_str).collect();
        cod.sort();
        for x in elems {
            slot_of.insert((o.as_str(), x), slots.len());
            slots.push((o.as_str(), x));
            targets.push(cod.clone());
        }
    }
    // Squares touching each slot: (morphism, slot of x, slot of Ff(x)).
    let mut squares: Vec<Vec<(&str, usize, usize)>> = vec![vec![]; slots.len()];
    for m in &cat.morphisms {
        for x in f.set(&m.source) {
            let fx = f.apply(&m.id, x).expect("validated");
            let a = slot_of[&(m.source.as_str(), x.as_str())];
            let b = slot_of[&(m.target.as_str(), fx)];
            let last = a.max(b);
            squares[last].push((m.id.as_str(), a, b));
        }
    }

    let mut out = vec![];
    let mut choice: Vec<usize> = vec![0; slots.len()];
    fn search(
        depth: usize,
        choice: &mut Vec<usize>,
        targets: &[Vec<&str>],
        squares: &[Vec<(&str, usize, usize)>],
        g: &FinSetFunctor,
        found: &mut Vec<Vec<usize>>,
    ) {
        if depth == targets.len() {
            found.push(choice.clone());
            return;
        }
        for c in 0..targets[depth].len() {
            choice[depth] = c;
            let ok = squares[depth].iter().all(|&(m, a, b)| {
                g.apply(m, targets[a][choice[a]]) == Some(targets[b][choice[b]])
            });
            if ok {
                search(depth + 1, choice, targets, squares, g, found);
            }
        }
    }
    let mut found = vec![];
    search(0, &mut choice, &targets, &squares, g, &mut found);
    for ch in found {
        let mut components: BTreeMap<String, BTreeMap<String, String>> =
            objects.iter().map(|o| (o.clone(), BTreeMap::new())).collect();
        for (i, &(o, x)) in slots.iter().enumerate() {
            components
                .get_mut(o)
                .expect("object listed")
                .insert(x.to_string(), targets[i][ch[i]].to_string());
        }
        out.push(NatTransformation { components });
    }
    Ok(out)
}

/// The Yoneda correspondence `Nat(Hom(A,−), F) ≅ FA`, computed and checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YonedaWitness {
    pub object: String,
    /// Each transformation with its image `η_A(id_A)`.
    pub pairs: Vec<(NatTransformation, String)>,
    pub set_size: usize,
}

impl YonedaWitness {
    pub fn nat_count(&self) -> usize {
        self.pairs.len()
    }
}

/// `η^x`, the transformation determined by `x ∈ FA`: `η^x_B(f) = F(f)(x)`.
pub fn yoneda_inverse(cat: &FinCategory, a: &str, f: &FinSetFunctor, x: &str) -> NatTransformation {
    NatTransformation {
        components: cat
            .objects
            .iter()
            .map(|b| {
                let comp = cat
                    .hom(a, b)
                    .into_iter()
                    .map(|m| {
                        let image = f.apply(&m, x).unwrap_or_default().to_string();
                        (m, image)
                    })
                    .collect();
                (b.clone(), comp)
            })
            .collect(),
    }
}

/// Enumerates `Nat(Hom(A,−), F)` and checks that `η ↦ η_A(id_A)` is a
/// bijection onto `FA` whose inverse is [`yoneda_inverse`].
pub fn yoneda_check(cat: &FinCategory, a: &str, f: &FinSetFunctor) -> Result<YonedaWitness, FincatError> {
    let h = hom_functor(cat, a)?;
    require_functor(cat, f)?;
    let id = cat.identity_of(a).expect("validated").to_string();
    let nats = enumerate_nat(cat, &h, f)?;
    let fa: BTreeSet<&str> = f.set(a).iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(nats.len());
    for eta in nats {
        let x = eta.at(a, &id).expect("total component").to_string();
        if !seen.insert(x.clone()) {
            return Err(FincatError::YonedaFailure(format!("two transformations send id to `{x}`")));
        }
        if yoneda_inverse(cat, a, f, &x) != eta {
            return Err(FincatError::YonedaFailure(format!("transformation at `{x}` is not η^{x}")));
        }
        pairs.push((eta, x));
    }
    if seen.len() != fa.len() {
        let missing: Vec<&&str> = fa.iter().filter(|x| !seen.contains(**x)).collect();
        return Err(FincatError::YonedaFailure(format!("elements {missing:?} have no transformation")));
    }
    Ok(YonedaWitness {
        object: a.to_string(),
        pairs,
        set_size: fa.len(),
    })
}

/// Result of comparing two representables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoCheck {
    pub iso: bool,
    /// `(f : A → B, g : B → A)` with `g∘f = id_A` and `f∘g = id_B`.
    pub witness: Option<(String, String)>,
}

/// Decides `Hom(A,−) ≅ Hom(B,−)` and, when it holds, extracts the
/// isomorphism `A ≅ B` through Yoneda.
pub fn representable_iso_check(cat: &FinCategory, a: &str, b: &str) -> Result<IsoCheck, FincatError> {
    cat.check_object(a)?;
    cat.check_object(b)?;
    let ha = hom_functor(cat, a)?;
    let hb = hom_functor(cat, b)?;
    let id_a = cat.identity_of(a).expect("validated");
    let id_b = cat.identity_of(b).expect("validated");
    let Some(eta) = enumerate_nat(cat, &ha, &hb)?.into_iter().find(|e| e.is_iso(&hb)) else {
        return Ok(IsoCheck {
            iso: false,
            witness: None,
        });
    };
    // η corresponds to g = η_A(id_A) : B → A; its inverse at B gives f : A → B.
    let g = eta.at(a, id_a).expect("total").to_string();
    let f = eta.components[b]
        .iter()
        .find(|(_, v)| v.as_str() == id_b)
        .map(|(k, _)| k.clone())
        .expect("bijective component");
    if cat.compose(&g, &f) != Some(id_a) || cat.compose(&f, &g) != Some(id_b) {
        return Err(FincatError::YonedaFailure(format!("{f} and {g} are not inverse")));
    }
    Ok(IsoCheck {
        iso: true,
        witness: Some((f, g)),
    })
}

/// Small categories and functors used by tests and fixtures.
pub mod examples {
    use super::*;

    fn named(mut f: FinSetFunctor, name: &str) -> FinSetFunctor {
        f.name = name.to_string();
        f
    }

    fn functor(name: &str, objects: &[(&str, &[&str])], morphisms: &[(&str, &[(&str, &str)])]) -> FinSetFunctor {
        FinSetFunctor {
            name: name.to_string(),
            objects: objects
                .iter()
                .map(|(o, s)| (o.to_string(), s.iter().map(|x| x.to_string()).collect()))
                .collect(),
            morphisms: morphisms
                .iter()
                .map(|(m, pairs)| {
                    (
                        m.to_string(),
                        pairs.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect(),
                    )
                })
                .collect(),
        }
    }

    /// `{*}` with only its identity.
    pub fn one_object() -> FinCategory {
        FinCategory::new(&["*"], &[("id", "*", "*")], &[("*", "id")], &[("id", "id", "id")]).unwrap()
    }

    /// One generator `a` with `a∘a` left undefined.
    pub fn truncated_monoid() -> FinCategory {
        FinCategory::from_tables(
            &["*"],
            &[("e", "*", "*"), ("a", "*", "*")],
            &[("*", "e")],
            &[("e", "e", "e"), ("e", "a", "a"), ("a", "e", "a")],
        )
    }

    /// `{e, a, z}` with `a∘a = z` and `z` absorbing.
    pub fn monoid3() -> FinCategory {
        let elems = ["e", "a", "z"];
        let mul = |g: &str, f: &str| match (g, f) {
            ("e", x) | (x, "e") => x.to_string(),
            _ => "z".to_string(),
        };
        let rows: Vec<(String, String, String)> = elems
            .iter()
            .flat_map(|g| elems.iter().map(move |f| (g.to_string(), f.to_string(), mul(g, f))))
            .collect();
        let rows: Vec<(&str, &str, &str)> = rows.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
        FinCategory::new(
            &["*"],
            &[("e", "*", "*"), ("a", "*", "*"), ("z", "*", "*")],
            &[("*", "e")],
            &rows,
        )
        .unwrap()
    }

    /// `Z/2` as a one-object category.
    pub fn z2() -> FinCategory {
        FinCategory::new(
            &["*"],
            &[("e", "*", "*"), ("s", "*", "*")],
            &[("*", "e")],
            &[("e", "e", "e"), ("e", "s", "s"), ("s", "e", "s"), ("s", "s", "e")],
        )
        .unwrap()
    }

    /// The poset `0 ≤ 1`.
    pub fn poset01() -> FinCategory {
        FinCategory::new(
            &["0", "1"],
            &[("id0", "0", "0"), ("id1", "1", "1"), ("le", "0", "1")],
            &[("0", "id0"), ("1", "id1")],
            &[
                ("id0", "id0", "id0"),
                ("id1", "id1", "id1"),
                ("le", "id0", "le"),
                ("id1", "le", "le"),
            ],
        )
        .unwrap()
    }

    /// Two objects, identities only.
    pub fn discrete2() -> FinCategory {
        FinCategory::new(
            &["A", "B"],
            &[("idA", "A", "A"), ("idB", "B", "B")],
            &[("A", "idA"), ("B", "idB")],
            &[("idA", "idA", "idA"), ("idB", "idB", "idB")],
        )
        .unwrap()
    }

    /// Two objects and an inverse pair `f : A → B`, `g : B → A`.
    pub fn iso_pair() -> FinCategory {
        FinCategory::new(
            &["A", "B"],
            &[("idA", "A", "A"), ("idB", "B", "B"), ("f", "A", "B"), ("g", "B", "A")],
            &[("A", "idA"), ("B", "idB")],
            &[
                ("idA", "idA", "idA"),
                ("idB", "idB", "idB"),
                ("f", "idA", "f"),
                ("idB", "f", "f"),
                ("g", "idB", "g"),
                ("idA", "g", "g"),
                ("g", "f", "idA"),
                ("f", "g", "idB"),
            ],
        )
        .unwrap()
    }

    /// Named valid categories, each with at least three functors.
    pub fn suite() -> Vec<(&'static str, FinCategory, Vec<FinSetFunctor>)> {
        let one = one_object();
        let m3 = monoid3();
        let z = z2();
        let p = poset01();
        let d = discrete2();
        let iso = iso_pair();
        vec![
            (
                "one_object",
                one.clone(),
                vec![
                    named(FinSetFunctor::constant(&one, &["*"]), "point"),
                    named(FinSetFunctor::constant(&one, &["p", "q"]), "two"),
                    named(FinSetFunctor::constant(&one, &[]), "empty"),
                ],
            ),
            (
                "monoid3",
                m3.clone(),
                vec![
                    named(FinSetFunctor::constant(&m3, &["*"]), "point"),
                    hom_functor(&m3, "*").unwrap(),
                    functor(
                        "collapse",
                        &[("*", &["0", "1"])],
                        &[
                            ("e", &[("0", "0"), ("1", "1")]),
                            ("a", &[("0", "0"), ("1", "0")]),
                            ("z", &[("0", "0"), ("1", "0")]),
                        ],
                    ),
                ],
            ),
            (
                "z2",
                z.clone(),
                vec![
                    named(FinSetFunctor::constant(&z, &["*"]), "point"),
                    hom_functor(&z, "*").unwrap(),
                    functor(
                        "flip_pair",
                        &[("*", &["l", "m", "r"])],
                        &[
                            ("e", &[("l", "l"), ("m", "m"), ("r", "r")]),
                            ("s", &[("l", "r"), ("m", "m"), ("r", "l")]),
                        ],
                    ),
                ],
            ),
            (
                "poset01",
                p.clone(),
                vec![
                    named(FinSetFunctor::constant(&p, &["*"]), "point"),
                    functor(
                        "pq_to_r",
                        &[("0", &["p", "q"]), ("1", &["r"])],
                        &[
                            ("id0", &[("p", "p"), ("q", "q")]),
                            ("id1", &[("r", "r")]),
                            ("le", &[("p", "r"), ("q", "r")]),
                        ],
                    ),
                    functor(
                        "inclusion",
                        &[("0", &["x"]), ("1", &["x", "y"])],
                        &[
                            ("id0", &[("x", "x")]),
                            ("id1", &[("x", "x"), ("y", "y")]),
                            ("le", &[("x", "x")]),
                        ],
                    ),
                ],
            ),
            (
                "discrete2",
                d.clone(),
                vec![
                    functor(
                        "ab_c",
                        &[("A", &["a", "b"]), ("B", &["c"])],
                        &[("idA", &[("a", "a"), ("b", "b")]), ("idB", &[("c", "c")])],
                    ),
                    functor(
                        "x_yz",
                        &[("A", &["x"]), ("B", &["y", "z"])],
                        &[("idA", &[("x", "x")]), ("idB", &[("y", "y"), ("z", "z")])],
                    ),
                    named(FinSetFunctor::constant(&d, &["*"]), "point"),
                ],
            ),
            (
                "iso_pair",
                iso.clone(),
                vec![
                    named(FinSetFunctor::constant(&iso, &["*"]), "point"),
                    hom_functor(&iso, "A").unwrap(),
                    functor(
                        "swap2",
                        &[("A", &["0", "1"]), ("B", &["0", "1"])],
                        &[
                            ("idA", &[("0", "0"), ("1", "1")]),
                            ("idB", &[("0", "0"), ("1", "1")]),
                            ("f", &[("0", "1"), ("1", "0")]),
                            ("g", &[("0", "1"), ("1", "0")]),
                        ],
                    ),
                ],
            ),
        ]
    }
}
