use serde::Serialize;

use super::Interval;
use crate::error::{Error, Result};

/// Nested compact boxes `K_1 ⊂ K_2 ⊂ ...`, each in the interior of the next.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactExhaustion {
    boxes: Vec<Interval>,
}

/// `K_n = [-base n, base n]` for `n = 1..=count`.
pub fn compact_exhaustion(count: usize, base: f64) -> Result<CompactExhaustion> {
    if count == 0 {
        return Err(Error::InvalidInput("an exhaustion needs at least one box".into()));
    }
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::InvalidInput(format!("base must be positive, got {}", base)));
    }
    let boxes = (1..=count)
        .map(|n| Interval {
            lo: -base * n as f64,
            hi: base * n as f64,
        })
        .collect();
    Ok(CompactExhaustion { boxes })
}

impl CompactExhaustion {
    /// Validates strict interior nesting.
    pub fn from_boxes(boxes: Vec<Interval>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidInput("an exhaustion needs at least one box".into()));
        }
        if let Some(n) = boxes
            .windows(2)
            .position(|w| !w[1].contains_in_interior(&w[0]))
        {
            return Err(Error::InvalidInput(format!(
                "box {} is not contained in the interior of box {}",
                n + 1,
                n + 2
            )));
        }
        Ok(CompactExhaustion { boxes })
    }

    pub fn boxes(&self) -> &[Interval] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// `K_n` for the 1-based index `n`.
    pub fn get(&self, n: usize) -> Option<&Interval> {
        n.checked_sub(1).and_then(|i| self.boxes.get(i))
    }

    pub fn outermost(&self) -> &Interval {
        &self.boxes[self.boxes.len() - 1]
    }

    /// Smallest 1-based `n` with `query ⊆ K_n`, if any box absorbs it.
    pub fn first_containing(&self, query: &Interval) -> Option<usize> {
        self.boxes
            .iter()
            .position(|k| k.contains_interval(query))
            .map(|i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_boxes() {
        let ex = compact_exhaustion(3, 1.0).unwrap();
        let want: Vec<_> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&r| Interval { lo: -r, hi: r })
            .collect();
        assert_eq!(ex.boxes(), want.as_slice());
        let ex = compact_exhaustion(1, 0.5).unwrap();
        assert_eq!(ex.boxes(), &[Interval { lo: -0.5, hi: 0.5 }]);
    }

    #[test]
    fn containment_queries() {
        let ex = compact_exhaustion(3, 1.0).unwrap();
        let q = Interval::new(-2.5, 2.5).unwrap();
        assert!(ex.get(3).unwrap().contains_interval(&q));
        assert!(!ex.get(2).unwrap().contains_interval(&q));
        assert_eq!(ex.first_containing(&q), Some(3));
        assert_eq!(ex.first_containing(&Interval::new(0.0, 7.0).unwrap()), None);
    }

    #[test]
    fn nesting_is_strict() {
        let ex = compact_exhaustion(6, 0.25).unwrap();
        for w in ex.boxes().windows(2) {
            assert!(w[1].contains_in_interior(&w[0]));
        }
        let same = vec![Interval { lo: -1.0, hi: 1.0 }, Interval { lo: -1.0, hi: 2.0 }];
        assert!(CompactExhaustion::from_boxes(same).is_err());
    }

    #[test]
    fn every_bounded_interval_is_absorbed() {
        for (a, b) in [(-0.1, 0.1), (-7.3, 2.0), (3.0, 9.99), (-19.5, -19.0)] {
            let q = Interval::new(a, b).unwrap();
            let need = (a.abs().max(b.abs()) / 0.5).ceil() as usize;
            let ex = compact_exhaustion(need + 3, 0.5).unwrap();
            let n = ex.first_containing(&q).expect("absorbed");
            assert!(n <= need.max(1));
            for m in n..=ex.len() {
                assert!(ex.get(m).unwrap().contains_interval(&q));
            }
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(compact_exhaustion(0, 1.0).is_err());
        assert!(compact_exhaustion(2, 0.0).is_err());
    }
}
