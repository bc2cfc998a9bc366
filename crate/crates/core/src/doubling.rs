//! Ternary Bernoulli measures and digit-restricted sets: exact interval
//! masses, doubling-constant estimation on triadic grids, big-integer
//! interval counts with box-dimension bounds, and measure lower bounds.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DoublingError {
    #[error("digit weight parameter {0} outside (0, 1/3]")]
    BadDelta(String),
    #[error("product power must be at least 1")]
    ZeroPower,
    #[error("depth {depth} outside 1..={max} for product power {d}")]
    BadDepth { d: usize, depth: u32, max: u32 },
    #[error("doubling scan supports product powers 1 and 2; got {0}")]
    PowerTooLarge(usize),
    #[error("{0} is not a ternary digit")]
    InvalidDigit(u8),
    #[error("block bound 3*delta*n1 = {0} is not an integer")]
    NonIntegralBound(String),
    #[error("block seed n1 must be positive")]
    ZeroBlock,
    #[error("block index must be at least 1")]
    ZeroLevel,
    #[error("block range {lo}..={hi} is empty")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("level {m} precedes the first block boundary {s1}")]
    LevelBeforeFirstBlock { m: u64, s1: u64 },
    #[error("rule weight {rule} and measure weight {mu} differ")]
    WeightMismatch { rule: String, mu: String },
    #[error("point {0} outside [0, 1]")]
    PointOutOfRange(String),
    #[error("cannot parse {0:?} as a rational number")]
    BadNumber(String),
}

/// Parses `"p/q"` or a plain decimal such as `"0.01"` into an exact
/// rational. Decimal inputs stay exact (`0.01` becomes `1/100`), which
/// matters for integrality checks downstream.
pub fn parse_rational(s: &str) -> Result<BigRational, DoublingError> {
    let bad = || DoublingError::BadNumber(s.to_owned());
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (int, frac) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    Ok(BigRational::new(num, den))
}

/// Converts an exact nonnegative rational to f64 through 53-bit mantissa
/// extraction, which stays finite and accurate even when numerator and
/// denominator individually exceed the f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    assert!(!r.is_negative(), "negative ratio");
    if r.numer().is_zero() {
        return 0.0;
    }
    let split = |x: &BigInt| -> (f64, i64) {
        let mag = x.magnitude();
        let bits = mag.bits();
        if bits <= 53 {
            (mag.to_f64().unwrap(), 0)
        } else {
            ((mag >> (bits - 53)).to_f64().unwrap(), (bits - 53) as i64)
        }
    };
    let (mn, en) = split(r.numer());
    let (md, ed) = split(r.denom());
    (mn / md) * 2f64.powi((en - ed) as i32)
}

fn log3_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero());
    let bits = n.bits();
    let (mant, exp) = if bits <= 53 {
        (n.to_f64().unwrap(), 0u64)
    } else {
        ((n >> (bits - 53)).to_f64().unwrap(), bits - 53)
    };
    (mant.ln() + exp as f64 * std::f64::consts::LN_2) / 3f64.ln()
}

fn check_digits(digits: &[u8]) -> Result<(), DoublingError> {
    match digits.iter().find(|&&d| d > 2) {
        Some(&d) => Err(DoublingError::InvalidDigit(d)),
        None => Ok(()),
    }
}

/// Parses a string over `{'0','1','2'}` into digit values.
pub fn parse_ternary(s: &str) -> Result<Vec<u8>, DoublingError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            '2' => Ok(2),
            other => Err(DoublingError::BadNumber(other.to_string())),
        })
        .collect()
}

/// Ternary digits of `x` in [0,1], lexicographically smallest expansion:
/// boundary points with two expansions take the one ending in 2s, so
/// `1/3 = 0.0222...` rather than `0.1000...`.
pub fn ternary_digits(x: &BigRational, m: usize) -> Result<Vec<u8>, DoublingError> {
    if x.is_negative() || *x > BigRational::one() {
        return Err(DoublingError::PointOutOfRange(x.to_string()));
    }
    if x.is_zero() {
        return Ok(vec![0; m]);
    }
    // d_i = ceil(3^i x) - 3 ceil(3^{i-1} x) + 2 for x in (0, 1].
    let three = BigRational::from_integer(3.into());
    let mut scaled = x.clone();
    let mut prev_ceil = BigInt::one();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        scaled *= &three;
        let c = scaled.ceil().to_integer();
        let d = &c - BigInt::from(3) * &prev_ceil + BigInt::from(2);
        out.push(d.to_u8().expect("digit in 0..=2"));
        prev_ceil = c;
    }
    Ok(out)
}

/// Self-similar measure on [0,1] giving ternary digits 0, 1, 2 the weights
/// `(delta, 1-2delta, delta)`, together with the power `d` of the product
/// measure on the cube. `delta = 1/3` is Lebesgue.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryBernoulli {
    delta: BigRational,
    d: usize,
}

impl TernaryBernoulli {
    pub fn new(delta: BigRational, d: usize) -> Result<Self, DoublingError> {
        let third = BigRational::new(1.into(), 3.into());
        if delta <= BigRational::zero() || delta > third {
            return Err(DoublingError::BadDelta(delta.to_string()));
        }
        if d == 0 {
            return Err(DoublingError::ZeroPower);
        }
        Ok(Self { delta, d })
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn power(&self) -> usize {
        self.d
    }

    /// Weights of digits 0, 1, 2; they sum to 1.
    pub fn weights(&self) -> [BigRational; 3] {
        let mid = BigRational::one() - BigRational::from_integer(2.into()) * &self.delta;
        [self.delta.clone(), mid, self.delta.clone()]
    }

    /// Exact mass of the ternary interval addressed by the digit string.
    pub fn interval_measure(&self, digits: &[u8]) -> Result<BigRational, DoublingError> {
        check_digits(digits)?;
        let w = self.weights();
        Ok(digits
            .iter()
            .fold(BigRational::one(), |acc, &d| acc * &w[d as usize]))
    }
}

/// Largest ratio `nu(B(x,2r)) / nu(B(x,r))` over triadic centers
/// `x = k 3^{-depth}` and radii `r = 3^{-j}`, `1 <= j <= depth`, with the
/// maximizing center and radius. Exact arithmetic throughout; an estimator
/// of the doubling constant, not the full supremum over all balls.
#[derive(Debug, Clone)]
pub struct DoublingEstimate {
    pub constant: f64,
    pub constant_exact: BigRational,
    pub center: Vec<f64>,
    pub radius: f64,
    pub depth: u32,
}

struct BestRatio {
    num: BigUint,
    den: BigUint,
    j: u32,
    k: usize,
}

impl BestRatio {
    /// Larger ratio wins; ties go to the smaller (j, k) so parallel
    /// reduction is order independent.
    fn better(self, other: BestRatio) -> BestRatio {
        let lhs = &self.num * &other.den;
        let rhs = &other.num * &self.den;
        match lhs.cmp(&rhs).then(other.j.cmp(&self.j)).then(other.k.cmp(&self.k)) {
            std::cmp::Ordering::Less => other,
            _ => self,
        }
    }
}

pub fn doubling_constant_estimate(
    mu: &TernaryBernoulli,
    depth: u32,
) -> Result<DoublingEstimate, DoublingError> {
    let max = match mu.d {
        1 => 12,
        2 => 7,
        d => return Err(DoublingError::PowerTooLarge(d)),
    };
    if depth < 1 || depth > max {
        return Err(DoublingError::BadDepth {
            d: mu.d,
            depth,
            max,
        });
    }
    // Interval masses at the working depth share the denominator q^depth,
    // so prefix sums of the BigUint numerators give exact ball masses:
    // every ball endpoint x +- r is itself a level-depth grid point.
    let p = mu.delta.numer().magnitude().clone();
    let q = mu.delta.denom().magnitude();
    let mid = q - BigUint::from(2u32) * &p;
    let mut nums = vec![BigUint::one()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(nums.len() * 3);
        for m in &nums {
            next.push(m * &p);
            next.push(m * &mid);
            next.push(m * &p);
        }
        nums = next;
    }
    let n = nums.len();
    let mut pre = Vec::with_capacity(n + 1);
    pre.push(BigUint::zero());
    for m in &nums {
        let last = pre.last().unwrap().clone();
        pre.push(last + m);
    }

    let ball = |k: usize, half: usize| -> BigUint {
        &pre[(k + half).min(n)] - &pre[k.saturating_sub(half)]
    };
    let best = (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut local: Option<BestRatio> = None;
            for j in 1..=depth {
                let half = 3usize.pow(depth - j);
                let cand = BestRatio {
                    num: ball(k, 2 * half),
                    den: ball(k, half),
                    j,
                    k,
                };
                local = Some(match local {
                    None => cand,
                    Some(b) => b.better(cand),
                });
            }
            local.unwrap()
        })
        .reduce_with(BestRatio::better)
        .expect("nonempty center grid");

    // Sup-norm product balls factor per axis, so the 2d maximum is the
    // square of the 1d maximum, attained on the diagonal.
    let one_d = BigRational::new(
        BigInt::from(best.num.clone()),
        BigInt::from(best.den.clone()),
    );
    let constant_exact = match mu.d {
        1 => one_d,
        _ => &one_d * &one_d,
    };
    let x = best.k as f64 / n as f64;
    Ok(DoublingEstimate {
        constant: ratio_to_f64(&constant_exact),
        constant_exact,
        center: vec![x; mu.d],
        radius: 3f64.powi(-(best.j as i32)),
        depth,
    })
}

/// Digit-count rule: block `L` covers ternary digit positions
/// `S_{L-1}+1 ..= S_L` (length `n1 L`, `S_L = n1 L(L+1)/2`) and allows at
/// most `k_L = L k1` digits in {0, 2}, where `k1 = 3 delta n1` must be a
/// nonnegative integer.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitRule {
    n1: u64,
    k1: u64,
    delta: BigRational,
}

impl DigitRule {
    pub fn new(n1: u64, delta: BigRational) -> Result<Self, DoublingError> {
        if n1 == 0 {
            return Err(DoublingError::ZeroBlock);
        }
        let third = BigRational::new(1.into(), 3.into());
        if delta <= BigRational::zero() || delta > third {
            return Err(DoublingError::BadDelta(delta.to_string()));
        }
        let k1_exact = BigRational::from_integer((3 * n1).into()) * &delta;
        if !k1_exact.is_integer() {
            return Err(DoublingError::NonIntegralBound(k1_exact.to_string()));
        }
        let k1 = k1_exact
            .to_integer()
            .to_u64()
            .expect("bound fits in u64 for valid inputs");
        Ok(Self { n1, k1, delta })
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn k1(&self) -> u64 {
        self.k1
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn block_len(&self, l: u64) -> u64 {
        self.n1 * l
    }

    pub fn block_bound(&self, l: u64) -> u64 {
        self.k1 * l
    }

    /// Total digits through block `l`.
    pub fn prefix_len(&self, l: u64) -> u64 {
        self.n1 * l * (l + 1) / 2
    }

    /// True iff every complete block within the string respects its bound
    /// on digits in {0, 2}. Trailing partial blocks are not checked.
    pub fn is_member(&self, digits: &[u8]) -> Result<bool, DoublingError> {
        check_digits(digits)?;
        let mut l = 1;
        while self.prefix_len(l) <= digits.len() as u64 {
            let lo = self.prefix_len(l - 1) as usize;
            let hi = self.prefix_len(l) as usize;
            let side = digits[lo..hi].iter().filter(|&&d| d != 1).count() as u64;
            if side > self.block_bound(l) {
                return Ok(false);
            }
            l += 1;
        }
        Ok(true)
    }

    /// Exact number of admissible digit strings of length `S_L`: per block,
    /// choose positions for the digits in {0, 2} and a side for each,
    /// multiplied across blocks.
    pub fn interval_count(&self, l: u64) -> Result<BigUint, DoublingError> {
        if l == 0 {
            return Err(DoublingError::ZeroLevel);
        }
        let mut total = BigUint::one();
        for block in 1..=l {
            let len = self.block_len(block);
            let bound = self.block_bound(block).min(len);
            let mut sum = BigUint::zero();
            let mut choose = BigUint::one();
            for j in 0..=bound {
                if j > 0 {
                    choose = choose * BigUint::from(len - j + 1) / BigUint::from(j);
                }
                sum += &choose << j;
            }
            total *= sum;
        }
        Ok(total)
    }
}

/// Per-block box-count exponents of the digit-restricted set alongside the
/// analytic limit `(3/ln 3)(delta + delta ln(1/delta))`.
#[derive(Debug, Clone)]
pub struct DimensionBound {
    pub levels: Vec<LevelBound>,
    pub analytic: f64,
}

#[derive(Debug, Clone)]
pub struct LevelBound {
    pub level: u64,
    pub prefix_len: u64,
    pub count: BigUint,
    /// `log3(count) / prefix_len`.
    pub exponent: f64,
}

pub fn dimension_bound(
    rule: &DigitRule,
    l_lo: u64,
    l_hi: u64,
) -> Result<DimensionBound, DoublingError> {
    if l_lo == 0 {
        return Err(DoublingError::ZeroLevel);
    }
    if l_lo > l_hi {
        return Err(DoublingError::EmptyRange { lo: l_lo, hi: l_hi });
    }
    let mut levels = Vec::new();
    for l in l_lo..=l_hi {
        let count = rule.interval_count(l)?;
        let s_l = rule.prefix_len(l);
        levels.push(LevelBound {
            level: l,
            prefix_len: s_l,
            exponent: log3_biguint(&count) / s_l as f64,
            count,
        });
    }
    let delta = ratio_to_f64(rule.delta());
    let analytic = (3.0 / 3f64.ln()) * (delta + delta * (1.0 / delta).ln());
    Ok(DimensionBound { levels, analytic })
}

/// Box-count exponent bound at an arbitrary ternary level `m`: counts at
/// the nearest block boundary `S_L <= m` ceil up by at most `3^{m - S_L}`,
/// so the exponent is `(log3 count + (m - S_L)) / m`.
pub fn level_exponent(rule: &DigitRule, m: u64) -> Result<f64, DoublingError> {
    let s1 = rule.prefix_len(1);
    if m < s1 {
        return Err(DoublingError::LevelBeforeFirstBlock { m, s1 });
    }
    let mut l = 1;
    while rule.prefix_len(l + 1) <= m {
        l += 1;
    }
    let count = rule.interval_count(l)?;
    let j = m - rule.prefix_len(l);
    Ok((log3_biguint(&count) + j as f64) / m as f64)
}

/// Lower bound on the measure the rule retains: per-block binomial tail
/// probabilities and their product, with the `d`-th power for the product
/// measure on the cube.
#[derive(Debug, Clone)]
pub struct MeasureBound {
    pub factors: Vec<f64>,
    pub product: f64,
    pub product_exact: BigRational,
    pub power_d: f64,
}

/// Under the measure, digits are i.i.d. with `P(digit in {0,2}) = 2 delta`,
/// so block side-digit counts are independent binomials and
/// `P(member through block Lmax) = prod_L P(Bin(n1 L, 2 delta) <= k_L)`,
/// an exact lower bound for the mass of the full set.
pub fn retained_measure_bound(
    rule: &DigitRule,
    mu: &TernaryBernoulli,
    lmax: u64,
) -> Result<MeasureBound, DoublingError> {
    if lmax == 0 {
        return Err(DoublingError::ZeroLevel);
    }
    if rule.delta() != mu.delta() {
        return Err(DoublingError::WeightMismatch {
            rule: rule.delta().to_string(),
            mu: mu.delta().to_string(),
        });
    }
    let p2 = BigUint::from(2u32) * mu.delta.numer().magnitude();
    let q = mu.delta.denom().magnitude();
    let mid = q - &p2;
    let factors_exact: Vec<BigRational> = (1..=lmax)
        .into_par_iter()
        .map(|l| {
            let len = rule.block_len(l);
            let bound = rule.block_bound(l).min(len);
            // sum_j C(len, j) (2p)^j (q - 2p)^{len - j} over q^len
            let mut choose = BigUint::one();
            let mut side_pow = BigUint::one();
            let mut mid_pow = mid.pow(len as u32);
            let mut sum = BigUint::zero();
            for j in 0..=bound {
                if j > 0 {
                    choose = choose * BigUint::from(len - j + 1) / BigUint::from(j);
                    side_pow *= &p2;
                    mid_pow /= &mid;
                }
                sum += &choose * &side_pow * &mid_pow;
            }
            BigRational::new(BigInt::from(sum), BigInt::from(q.pow(len as u32)))
        })
        .collect();
    let product_exact = factors_exact
        .iter()
        .fold(BigRational::one(), |acc, f| acc * f);
    let product = ratio_to_f64(&product_exact);
    Ok(MeasureBound {
        factors: factors_exact.iter().map(ratio_to_f64).collect(),
        product,
        product_exact,
        power_d: product.powi(mu.d as i32),
    })
}

/// Serializable snapshot of a digit-rule analysis, big integers rendered
/// as decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleReport {
    pub n1: u64,
    pub k1: u64,
    pub delta: String,
    pub counts: Vec<(u64, String)>,
    pub exponents: Vec<(u64, f64)>,
    pub analytic_bound: f64,
    pub measure_factors: Vec<f64>,
    pub measure_lower_bound: f64,
}

pub fn rule_report(
    rule: &DigitRule,
    mu: &TernaryBernoulli,
    lmax: u64,
) -> Result<RuleReport, DoublingError> {
    let dim = dimension_bound(rule, 1, lmax)?;
    let measure = retained_measure_bound(rule, mu, lmax)?;
    Ok(RuleReport {
        n1: rule.n1(),
        k1: rule.k1(),
        delta: rule.delta().to_string(),
        counts: dim
            .levels
            .iter()
            .map(|l| (l.level, l.count.to_string()))
            .collect(),
        exponents: dim.levels.iter().map(|l| (l.level, l.exponent)).collect(),
        analytic_bound: dim.analytic,
        measure_factors: measure.factors.clone(),
        measure_lower_bound: measure.power_d,
    })
}
