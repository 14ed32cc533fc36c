//! Exact marginal-calibration counterexamples for conformal predictive
//! systems with one training observation.
//!
//! Two object values `x = -1` and `x = 1` and responses `-1` and `1`; the
//! conformity measure scores an observation by its own value only:
//! `y` when `x = 1` and `3y + 2` when `x = -1`. Everything is computed in
//! exact rationals by enumerating the equiprobable data sequences.

use num_rational::Ratio;

pub type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// Score of the observation `(x, y)`.
fn score(x: i8, y: Q) -> Q {
    if x == 1 {
        y
    } else {
        q(3) * y + q(2)
    }
}

/// Position of the jump of `Q((x1, y1), (x2, y))` in `y`, where the two
/// scores coincide.
pub fn jump_position(train: (i8, Q), test_x: i8) -> Q {
    let target = score(train.0, train.1);
    if test_x == 1 {
        target
    } else {
        (target - q(2)) / q(3)
    }
}

/// `E_tau Q((x1, y1), (x2, y), tau)`, the conformal predictive
/// distribution with `n = 1` averaged over `tau`.
pub fn mean_over_tau(train: (i8, Q), test: (i8, Q)) -> Q {
    let a1 = score(train.0, train.1);
    let a2 = score(test.0, test.1);
    let lt = if a1 < a2 { q(1) } else { q(0) };
    let eq = if a1 == a2 { q(1) } else { q(0) };
    // ties include the test point itself; E[tau] = 1/2
    (lt + (eq + q(1)) / q(2)) / q(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeableDemo {
    pub lhs: Q,
    pub rhs: Q,
    /// Jump positions for the sequences `((-1,-1),(1,y))` and `((1,1),(-1,y))`.
    pub jumps: (Q, Q),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IidDemo {
    pub lhs: Q,
    pub rhs: Q,
    /// Averages at `y = 0` for the sequences
    /// `((-1,-1),(1,1))`, `((1,1),(-1,-1))`, `((-1,-1),(-1,-1))`, `((1,1),(1,1))`.
    pub per_sequence: [Q; 4],
}

/// `(x, y)` with integer response.
type Point = (i8, i64);

const LOW: Point = (-1, -1);
const HIGH: Point = (1, 1);

fn both_sides(sequences: &[(Point, Point)], y: Q) -> (Q, Q, Vec<Q>) {
    let w = Q::new(1, sequences.len() as i64);
    let mut lhs = q(0);
    let mut rhs = q(0);
    let mut each = Vec::with_capacity(sequences.len());
    for &((x1, y1), (x2, y2)) in sequences {
        let m = mean_over_tau((x1, q(y1)), (x2, y));
        each.push(m);
        lhs += w * m;
        if q(y2) <= y {
            rhs += w;
        }
    }
    (lhs, rhs, each)
}

/// Two-point exchangeable distribution on sequences of length 2.
pub fn marginal_calibration_exchangeable() -> ExchangeableDemo {
    let (lhs, rhs, _) = both_sides(&[(LOW, HIGH), (HIGH, LOW)], q(0));
    ExchangeableDemo {
        lhs,
        rhs,
        jumps: (
            jump_position((LOW.0, q(LOW.1)), HIGH.0),
            jump_position((HIGH.0, q(HIGH.1)), LOW.0),
        ),
    }
}

/// Two independent draws from the uniform distribution on `{(-1,-1), (1,1)}`.
pub fn marginal_calibration_iid() -> IidDemo {
    let (lhs, rhs, each) = both_sides(&[(LOW, HIGH), (HIGH, LOW), (LOW, LOW), (HIGH, HIGH)], q(0));
    IidDemo {
        lhs,
        rhs,
        per_sequence: [each[0], each[1], each[2], each[3]],
    }
}
