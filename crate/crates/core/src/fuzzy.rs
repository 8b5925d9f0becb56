//! Fuzzy evaluation of a shrimp's physiological state from the dissolved
//! oxygen, pH and temperature of its cell.
//!
//! Each parameter has two fuzzy sets, *optimal* and *bad* (the complement).
//! Eight rules combine the three parameters with a min t-norm; each rule
//! points at an output singleton and the crisp state is the weighted average
//! of the fired singletons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{TolerancePair, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    Oxygen,
    PH,
    Temperature,
}

/// A parameter universe and its species optimal set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamUniverse {
    pub kind: ParamKind,
    pub lo: f64,
    pub hi: f64,
    pub opt_lo: f64,
    pub opt_hi: f64,
}

pub const OXYGEN: ParamUniverse = ParamUniverse {
    kind: ParamKind::Oxygen,
    lo: 0.0,
    hi: 14.0,
    opt_lo: 5.0,
    opt_hi: 12.0,
};

pub const PH: ParamUniverse = ParamUniverse {
    kind: ParamKind::PH,
    lo: 0.0,
    hi: 14.0,
    opt_lo: 6.5,
    opt_hi: 8.5,
};

pub const TEMPERATURE: ParamUniverse = ParamUniverse {
    kind: ParamKind::Temperature,
    lo: 18.0,
    hi: 36.0,
    opt_lo: 22.0,
    opt_hi: 30.0,
};

/// Ramp half-width as a fraction of the species optimal range.
pub const RAMP_FRACTION: f64 = 0.1;

impl ParamUniverse {
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Half-width of the linear ramps around each optimal bound. It is fixed
    /// per species, so an agent's tolerance genes shift the ramps but never
    /// change their slope.
    pub fn ramp_half_width(&self) -> f64 {
        RAMP_FRACTION * (self.opt_hi - self.opt_lo)
    }

    pub fn optimal_pair(&self) -> TolerancePair {
        TolerancePair { min: self.opt_lo, max: self.opt_hi }
    }
}

/// Membership of `x` in the optimal set of `u` (trapezoid). With an override
/// the agent's own (min, max) replaces the species optimal bounds.
pub fn membership_optimal(
    u: &ParamUniverse,
    x: f64,
    opt_override: Option<TolerancePair>,
) -> Result<f64> {
    let (lo, hi) = match opt_override {
        Some(p) if p.min > p.max => return Err(Error::InvalidTolerance { min: p.min, max: p.max }),
        Some(p) => (p.min, p.max),
        None => (u.opt_lo, u.opt_hi),
    };
    let x = u.clamp(x);
    let w = u.ramp_half_width();
    let rise = if w > 0.0 {
        ((x - (lo - w)) / (2.0 * w)).clamp(0.0, 1.0)
    } else if x >= lo {
        1.0
    } else {
        0.0
    };
    let fall = if w > 0.0 {
        (((hi + w) - x) / (2.0 * w)).clamp(0.0, 1.0)
    } else if x <= hi {
        1.0
    } else {
        0.0
    };
    Ok(rise.min(fall))
}

/// Membership degrees of one parameter in its two sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Degrees {
    pub optimal: f64,
    pub bad: f64,
}

impl Degrees {
    pub fn from_optimal(optimal: f64) -> Self {
        Self { optimal, bad: 1.0 - optimal }
    }

    fn of(&self, term: Term) -> f64 {
        match term {
            Term::Optimal => self.optimal,
            Term::Bad => self.bad,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Term {
    Optimal,
    Bad,
}

/// Rule consequents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consequent {
    Normal,
    Tolerable,
    Bad,
    /// Death is never simulated; it only contributes crisp mass.
    Death,
}

impl Consequent {
    pub fn singleton(self) -> f64 {
        match self {
            Consequent::Normal => 1.0,
            Consequent::Tolerable => 0.6,
            Consequent::Bad => 0.2,
            Consequent::Death => 0.0,
        }
    }
}

/// (oxygen, pH, temperature) → consequent, R1..R8.
pub const RULES: [(Term, Term, Term, Consequent); 8] = {
    use Consequent as C;
    use Term::{Bad as M, Optimal as O};
    [
        (O, O, O, C::Normal),
        (O, O, M, C::Tolerable),
        (O, M, O, C::Tolerable),
        (M, O, O, C::Tolerable),
        (M, M, O, C::Bad),
        (M, O, M, C::Bad),
        (O, M, M, C::Bad),
        (M, M, M, C::Death),
    ]
};

pub fn rule_strengths(o2: Degrees, ph: Degrees, temp: Degrees) -> [f64; 8] {
    RULES.map(|(a, b, c, _)| o2.of(a).min(ph.of(b)).min(temp.of(c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    Normal,
    Tolerable,
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrimpState {
    pub label: StateLabel,
    pub crisp: f64,
}

pub const BAD_BELOW: f64 = 0.4;
pub const NORMAL_FROM: f64 = 0.8;

pub fn label_for_crisp(crisp: f64) -> StateLabel {
    if crisp < BAD_BELOW {
        StateLabel::Bad
    } else if crisp < NORMAL_FROM {
        StateLabel::Tolerable
    } else {
        StateLabel::Normal
    }
}

pub fn defuzzify(strengths: &[f64; 8]) -> Result<ShrimpState> {
    let total: f64 = strengths.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoRuleFired);
    }
    let weighted: f64 = strengths
        .iter()
        .zip(RULES.iter())
        .map(|(s, r)| s * r.3.singleton())
        .sum();
    let crisp = (weighted / total).clamp(0.0, 1.0);
    Ok(ShrimpState { label: label_for_crisp(crisp), crisp })
}

pub fn evaluate(o2: f64, ph: f64, temp: f64, tolerance: Option<&Tolerances>) -> Result<ShrimpState> {
    let d = |u: &ParamUniverse, x: f64, p: Option<TolerancePair>| {
        membership_optimal(u, x, p).map(Degrees::from_optimal)
    };
    let strengths = rule_strengths(
        d(&OXYGEN, o2, tolerance.map(|t| t.o2))?,
        d(&PH, ph, tolerance.map(|t| t.ph))?,
        d(&TEMPERATURE, temp, tolerance.map(|t| t.temp))?,
    );
    defuzzify(&strengths)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn membership_anchors() {
        assert_eq!(membership_optimal(&OXYGEN, 8.5, None).unwrap(), 1.0);
        assert!((membership_optimal(&OXYGEN, 5.0, None).unwrap() - 0.5).abs() < EPS);
        assert!((OXYGEN.ramp_half_width() - 0.7).abs() < EPS);
        assert_eq!(membership_optimal(&TEMPERATURE, 35.0, None).unwrap(), 0.0);
        // clamped below the universe
        assert_eq!(membership_optimal(&TEMPERATURE, -100.0, None).unwrap(), 0.0);
    }

    #[test]
    fn override_validation() {
        let bad = TolerancePair { min: 9.0, max: 3.0 };
        assert!(matches!(
            membership_optimal(&OXYGEN, 5.0, Some(bad)),
            Err(Error::InvalidTolerance { .. })
        ));
        let zero = TolerancePair { min: 7.0, max: 7.0 };
        assert!((membership_optimal(&OXYGEN, 7.0, Some(zero)).unwrap() - 0.5).abs() < EPS);
    }

    #[test]
    fn rule_strength_anchors() {
        let one = Degrees::from_optimal(1.0);
        let zero = Degrees::from_optimal(0.0);
        let half = Degrees::from_optimal(0.5);
        assert_eq!(rule_strengths(one, one, one), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rule_strengths(one, one, zero), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rule_strengths(half, half, half), [0.5; 8]);
    }

    #[test]
    fn defuzzify_anchors() {
        let mut s = [0.0; 8];
        s[0] = 1.0;
        let st = defuzzify(&s).unwrap();
        assert_eq!((st.label, st.crisp), (StateLabel::Normal, 1.0));

        let mut s = [0.0; 8];
        s[4] = 0.7;
        let st = defuzzify(&s).unwrap();
        assert!((st.crisp - 0.2).abs() < EPS);
        assert_eq!(st.label, StateLabel::Bad);

        let mut s = [0.0; 8];
        s[7] = 1.0;
        let st = defuzzify(&s).unwrap();
        assert_eq!((st.label, st.crisp), (StateLabel::Bad, 0.0));

        assert!(matches!(defuzzify(&[0.0; 8]), Err(Error::NoRuleFired)));
    }

    #[test]
    fn thresholds_partition_unit_interval() {
        assert_eq!(label_for_crisp(0.0), StateLabel::Bad);
        assert_eq!(label_for_crisp(0.3999), StateLabel::Bad);
        assert_eq!(label_for_crisp(0.4), StateLabel::Tolerable);
        assert_eq!(label_for_crisp(0.7999), StateLabel::Tolerable);
        assert_eq!(label_for_crisp(0.8), StateLabel::Normal);
        assert_eq!(label_for_crisp(1.0), StateLabel::Normal);
    }

    #[test]
    fn evaluate_anchors() {
        assert_eq!(evaluate(8.0, 7.5, 26.0, None).unwrap().label, StateLabel::Normal);
        assert_eq!(evaluate(8.0, 7.5, 34.0, None).unwrap().label, StateLabel::Tolerable);
        assert_eq!(evaluate(3.0, 5.5, 26.0, None).unwrap().label, StateLabel::Bad);
    }

    #[test]
    fn widened_tolerance_rescues_state() {
        let mut t = Tolerances::species_optimal();
        assert_eq!(evaluate(8.0, 7.5, 33.0, Some(&t)).unwrap().label, StateLabel::Tolerable);
        t.temp.max = 35.0;
        assert_eq!(evaluate(8.0, 7.5, 33.0, Some(&t)).unwrap().label, StateLabel::Normal);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn universe() -> impl Strategy<Value = ParamUniverse> {
        prop_oneof![Just(OXYGEN), Just(PH), Just(TEMPERATURE)]
    }

    proptest! {
        #[test]
        fn complement_is_exact(u in universe(), x in -5.0f64..40.0) {
            let d = Degrees::from_optimal(membership_optimal(&u, x, None).unwrap());
            prop_assert!((0.0..=1.0).contains(&d.optimal));
            prop_assert_eq!(d.optimal + d.bad, 1.0);
        }

        #[test]
        fn crisp_in_unit_interval(o2 in -1.0f64..15.0, ph in -1.0f64..15.0, t in 15.0f64..40.0) {
            let a = evaluate(o2, ph, t, None).unwrap();
            let b = evaluate(o2, ph, t, None).unwrap();
            prop_assert!((0.0..=1.0).contains(&a.crisp));
            prop_assert_eq!(a, b);
            prop_assert_eq!(a.label, label_for_crisp(a.crisp));
        }

        #[test]
        fn widening_never_lowers_membership(
            u in universe(),
            x in -1.0f64..40.0,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
            grow_lo in 0.0f64..3.0,
            grow_hi in 0.0f64..3.0,
        ) {
            let span = u.hi - u.lo;
            let (p, q) = (u.lo + a * span, u.lo + b * span);
            let narrow = TolerancePair { min: p.min(q), max: p.max(q) };
            let wide = TolerancePair {
                min: (narrow.min - grow_lo).max(u.lo),
                max: (narrow.max + grow_hi).min(u.hi),
            };
            let mn = membership_optimal(&u, x, Some(narrow)).unwrap();
            let mw = membership_optimal(&u, x, Some(wide)).unwrap();
            prop_assert!(mw >= mn, "narrow {mn} wide {mw}");
        }
    }
}
