//! Piecewise Hermite interpolation through integrator nodes, evaluable on jets.

use crate::calculus::Jet;
use crate::error::{Error, Result};

/// Knots with the value and the first one or two derivatives at each.
/// Two derivatives give quintic pieces, one gives cubic pieces.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HermiteTrack {
    knots: Vec<f64>,
    /// `data[i][d]` is the `d`-th derivative vector at knot `i`.
    data: Vec<Vec<Vec<f64>>>,
}

impl HermiteTrack {
    pub fn new(mut knots: Vec<f64>, mut data: Vec<Vec<Vec<f64>>>) -> Self {
        assert!(knots.len() >= 2 && knots.len() == data.len());
        let depth = data[0].len();
        assert!(depth == 2 || depth == 3, "cubic or quintic only");
        if knots[0] > knots[knots.len() - 1] {
            knots.reverse();
            data.reverse();
        }
        HermiteTrack { knots, data }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn dim(&self) -> usize {
        self.data[0][0].len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }


    pub fn eval(&self, t: &Jet) -> Result<Vec<Jet>> {
        let t0 = t.value();
        let (a, b) = self.interval();
        let slack = 1e-12 * (b - a).max(1.0);
        if !(t0 >= a - slack && t0 <= b + slack) {
            return Err(Error::Domain(format!("t = {t0} outside [{a}, {b}]")));
        }
        let i = match self.knots.partition_point(|&k| k <= t0) {
            0 => 0,
            p => (p - 1).min(self.knots.len() - 2),
        };
        let (ta, tb) = (self.knots[i], self.knots[i + 1]);
        let h = tb - ta;
        let s = (t - ta) * (1.0 / h);
        let (l, r) = (&self.data[i], &self.data[i + 1]);
        let s2 = &s * &s;
        let s3 = &s2 * &s;
        let one = Jet::constant(t.space(), 1.0);
        let basis: Vec<(Jet, f64, usize, bool)> = if l.len() == 2 {
            vec![
                (&(&s3 * 2.0 - &s2 * 3.0) + &one, 1.0, 0, false),
                (&(&s3 - &s2 * 2.0) + &s, h, 1, false),
                (&s2 * 3.0 - &s3 * 2.0, 1.0, 0, true),
                (&s3 - &s2, h, 1, true),
            ]
        } else {
            let s4 = &s3 * &s;
            let s5 = &s4 * &s;
            vec![
                (&(&(&s5 * -6.0 + &s4 * 15.0) - &s3 * 10.0) + &one, 1.0, 0, false),
                (&(&(&s5 * -3.0 + &s4 * 8.0) - &s3 * 6.0) + &s, h, 1, false),
                ((&(&(&s2 - &s3 * 3.0) + &s4 * 3.0) - &s5) * 0.5, h * h, 2, false),
                (&(&s5 * 6.0 - &s4 * 15.0) + &s3 * 10.0, 1.0, 0, true),
                (&(&s5 * -3.0 + &s4 * 7.0) - &s3 * 4.0, h, 1, true),
                ((&(&s3 - &s4 * 2.0) + &s5) * 0.5, h * h, 2, true),
            ]
        };
        Ok((0..self.dim())
            .map(|c| {
                let mut acc = Jet::zero(t.space());
                for (phi, scale, d, right) in &basis {
                    let coef = if *right { r[*d][c] } else { l[*d][c] };
                    acc += &(phi * (coef * scale));
                }
                acc
            })
            .collect())
    }
}
