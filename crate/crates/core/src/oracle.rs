//! Brute-force behavioral equivalence, written against raw machine tables.
//!
//! Nothing here builds a composite machine: [`stagewise_simulate`] runs a
//! wired network by evaluating the wiring and stepping each component every
//! tick, which gives an independent check on
//! [`apply_algebra`](crate::moore::apply_algebra).

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::moore::MooreMachine;
use crate::wiring::{TupleSpace, Wiring, WiringError};
use crate::{Tuple, Word};

/// Default exhaustive depth.
pub const DEFAULT_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("machines live on different boxes ({0})")]
    InterfaceMismatch(String),
    #[error("component {index} does not fit inner box {boxname}")]
    Alignment { index: usize, boxname: String },
    #[error(transparent)]
    Wiring(#[from] WiringError),
}

fn same_box(a: &MooreMachine, b: &MooreMachine) -> Result<usize, EquivError> {
    if let Some((port, detail)) = a.shape().interface_mismatch(b.shape()) {
        return Err(EquivError::InterfaceMismatch(format!("{port}: {detail}")));
    }
    Ok(TupleSpace::of_ports(a.shape().inputs()).count())
}

/// True iff `a` and `b` produce the same outputs on every input word of
/// length at most `depth`.
pub fn trace_equivalent(a: &MooreMachine, b: &MooreMachine, depth: usize) -> Result<bool, EquivError> {
    let n = same_box(a, b)?;
    let (ua, ub) = (a.update_table(), b.update_table());
    let (ra, rb) = (a.readout_table(), b.readout_table());
    // every word of length `depth` covers its prefixes; walk the word tree
    let mut stack = vec![(a.init(), b.init(), 0usize)];
    while let Some((sa, sb, level)) = stack.pop() {
        if level >= depth {
            continue;
        }
        if ra[sa] != rb[sb] {
            return Ok(false);
        }
        for x in 0..n {
            stack.push((ua[sa * n + x], ub[sb * n + x], level + 1));
        }
    }
    Ok(true)
}

/// The shortest, then lexicographically least, input word of length at most
/// `depth` on which the two machines' outputs differ.
type Pair = (usize, usize);

pub fn find_distinguishing_word(
    a: &MooreMachine,
    b: &MooreMachine,
    depth: usize,
) -> Result<Option<Word>, EquivError> {
    let n = same_box(a, b)?;
    let space = TupleSpace::of_ports(a.shape().inputs());
    let (ua, ub) = (a.update_table(), b.update_table());
    let (ra, rb) = (a.readout_table(), b.readout_table());
    // breadth-first over state pairs, inputs expanded in increasing order, so
    // the first path to each pair is its shortest lex-least prefix
    let mut parent: BTreeMap<Pair, Option<(Pair, usize)>> = BTreeMap::new();
    let start = (a.init(), b.init());
    parent.insert(start, None);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((pair, level)) = queue.pop_front() {
        if level >= depth {
            break;
        }
        if ra[pair.0] != rb[pair.1] {
            let mut word = vec![space.decode(0)];
            let mut at = pair;
            while let Some(Some((prev, x))) = parent.get(&at) {
                word.push(space.decode(*x));
                at = *prev;
            }
            word.reverse();
            return Ok(Some(word));
        }
        for x in 0..n {
            let next = (ua[pair.0 * n + x], ub[pair.1 * n + x]);
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((pair, x)));
                queue.push_back((next, level + 1));
            }
        }
    }
    Ok(None)
}

/// Runs a wired network tick by tick without building the composite: read
/// every component, evaluate the wiring, then step every component.
pub fn stagewise_simulate(w: &Wiring, machines: &[MooreMachine], word: &[Tuple]) -> Result<Word, EquivError> {
    if machines.len() != w.inner().len() {
        return Err(EquivError::Alignment {
            index: machines.len().min(w.inner().len()),
            boxname: "(count)".to_string(),
        });
    }
    for (i, (m, b)) in machines.iter().zip(w.inner()).enumerate() {
        if !m.shape().same_interface(b) {
            return Err(EquivError::Alignment {
                index: i,
                boxname: b.name().to_string(),
            });
        }
    }
    let spaces: Vec<TupleSpace> = machines
        .iter()
        .map(|m| TupleSpace::of_ports(m.shape().inputs()))
        .collect();
    let mut states: Vec<usize> = machines.iter().map(|m| m.init()).collect();
    let mut out = Vec::with_capacity(word.len());
    for y in word {
        let inner_outs: Tuple = machines
            .iter()
            .zip(&states)
            .flat_map(|(m, &s)| m.readout_table()[s].iter().copied())
            .collect();
        let (inner_ins, outer_outs) = w.eval(&inner_outs, y)?;
        out.push(outer_outs);
        let mut offset = 0;
        for ((m, s), space) in machines.iter().zip(states.iter_mut()).zip(&spaces) {
            let x = space.encode(&inner_ins[offset..offset + space.len()]);
            offset += space.len();
            *s = m.update_table()[*s * space.count() + x];
        }
    }
    Ok(out)
}

/// Bisimilarity of the initial states by partition refinement on the
/// disjoint union of both machines. Implies trace equivalence at every depth.
pub fn bisimilar(a: &MooreMachine, b: &MooreMachine) -> Result<bool, EquivError> {
    let n = same_box(a, b)?;
    let offset = a.num_states();
    let total = offset + b.num_states();
    let next = |s: usize, x: usize| -> usize {
        if s < offset {
            a.update_table()[s * n + x]
        } else {
            offset + b.update_table()[(s - offset) * n + x]
        }
    };
    let readout = |s: usize| -> &Tuple {
        if s < offset {
            &a.readout_table()[s]
        } else {
            &b.readout_table()[s - offset]
        }
    };
    let mut block = relabel((0..total).map(|s| readout(s).clone()).collect());
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..total)
            .map(|s| (block[s], (0..n).map(|x| block[next(s, x)]).collect()))
            .collect();
        let refined = relabel(signatures);
        let before = block.iter().max().map_or(0, |m| m + 1);
        let after = refined.iter().max().map_or(0, |m| m + 1);
        block = refined;
        if after == before {
            break;
        }
    }
    Ok(block[a.init()] == block[offset + b.init()])
}

/// Dense block numbers in order of first appearance.
fn relabel<K: Ord>(keys: Vec<K>) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.into_iter()
        .map(|k| {
            let fresh = ids.len();
            *ids.entry(k).or_insert(fresh)
        })
        .collect()
}

/// All input words of exactly `len` steps over a machine's input box, in
/// lexicographic order.
pub fn words(space: &TupleSpace, len: usize) -> Vec<Word> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Word| {
                space.iter().map(move |x| {
                    let mut w = w.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiring::BoxShape;

    fn delay() -> MooreMachine {
        MooreMachine::from_fn(
            "delay",
            BoxShape::binary("Z", &["x"], &["y"]),
            vec!["0".into(), "1".into()],
            0,
            |_, x| x[0],
            |s| vec![s],
        )
        .unwrap()
    }

    fn constant() -> MooreMachine {
        MooreMachine::from_fn("zero", BoxShape::binary("Z", &["x"], &["y"]), vec!["k".into()], 0, |_, _| 0, |_| vec![0])
            .unwrap()
    }

    /// Outputs 1 exactly once, after `n` inputs; otherwise 0.
    fn counter(n: usize, fires: bool) -> MooreMachine {
        MooreMachine::from_fn(
            "counter",
            BoxShape::binary("Z", &["x"], &["y"]),
            (0..=n + 1).map(|i| format!("c{i}")).collect(),
            0,
            move |s, _| (s + 1).min(n + 1),
            move |s| vec![usize::from(fires && s == n)],
        )
        .unwrap()
    }

    #[test]
    fn machine_equals_itself() {
        let d = delay();
        assert!(trace_equivalent(&d, &d, 6).unwrap());
        assert_eq!(find_distinguishing_word(&d, &d, 6).unwrap(), None);
        assert!(bisimilar(&d, &d).unwrap());
    }

    #[test]
    fn delay_differs_from_constant() {
        let (d, c) = (delay(), constant());
        assert!(!trace_equivalent(&d, &c, 2).unwrap());
        assert!(trace_equivalent(&d, &c, 1).unwrap());
        assert_eq!(find_distinguishing_word(&d, &c, 2).unwrap(), Some(vec![vec![1], vec![0]]));
        assert!(!bisimilar(&d, &c).unwrap());
    }

    #[test]
    fn search_is_bounded() {
        // the two differ only in the output at step 5
        let (a, b) = (counter(5, true), counter(5, false));
        assert_eq!(find_distinguishing_word(&a, &b, 3).unwrap(), None);
        assert!(trace_equivalent(&a, &b, 5).unwrap());
        let w = find_distinguishing_word(&a, &b, 6).unwrap().unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w, vec![vec![0]; 6]);
        assert!(!trace_equivalent(&a, &b, 6).unwrap());
    }

    #[test]
    fn box_mismatch_is_an_error() {
        let other = MooreMachine::from_fn("o", BoxShape::binary("W", &["x", "z"], &["y"]), vec!["k".into()], 0, |_, _| 0, |_| vec![0])
            .unwrap();
        assert!(matches!(trace_equivalent(&delay(), &other, 2), Err(EquivError::InterfaceMismatch(_))));
    }

    #[test]
    fn words_enumerate_lexicographically() {
        let ws = words(&TupleSpace::new(vec![2]), 2);
        assert_eq!(ws, vec![vec![vec![0], vec![0]], vec![vec![0], vec![1]], vec![vec![1], vec![0]], vec![vec![1], vec![1]]]);
    }
}
