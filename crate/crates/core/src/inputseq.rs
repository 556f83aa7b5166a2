//! Index sequences `(s_n)` in Z_b that drive the digital construction.
//!
//! Sequence spec grammar (rationals as `u/v` or `u`, reduced automatically;
//! digits of every resulting b-adic integer are least significant first):
//!
//! ```text
//! natural | neg | alt | paper-ex2c
//! affine:a=<r>,c=<r>          s_n = a n + c          (c defaults to 0)
//! rat:v=<int>,alpha=<r>       s_n = n / v + alpha    (alpha defaults to 0)
//! quad:a=<r>,c=<r>,d=<r>      s_n = a n^2 + c n + d  (c, d default to 0)
//! beatty:p=<int>,q=<int>,nmax=<int>   s_n = floor(p n / q) for n <= nmax
//! ```

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use crate::arith::{factorize, gcd};
use crate::badic::BAdicStream;
use crate::error::{Error, Result};

type CustomFn = Arc<dyn Fn(u64) -> Result<BAdicStream> + Send + Sync>;

#[derive(Clone)]
pub enum SequenceKind {
    /// `s_n = n`
    Natural,
    /// `s_n = -n - 1`
    NegativeShifted,
    /// `s_n = (-1)^n floor((n + 1) / 2)`
    Alternating,
    /// `s_n = a n + c`
    Affine {
        a: BAdicStream,
        c: BAdicStream,
    },
    /// `s_n = n / v + alpha`, `gcd(v, b) = 1`
    RationalAffine {
        v: u64,
        alpha: BAdicStream,
    },
    /// `s_n = a n^2 + c n + d`
    Quadratic {
        a: BAdicStream,
        c: BAdicStream,
        d: BAdicStream,
    },
    /// `s_n = floor(p n / q)`, with `p / q` standing in for an irrational slope up to `n <= nmax`.
    Beatty {
        p: i64,
        q: u64,
        nmax: u64,
    },
    Custom(CustomFn),
}

/// An index sequence over Z_b.
#[derive(Clone)]
pub struct IndexSequence {
    base: u32,
    kind: SequenceKind,
    label: String,
}

impl fmt::Debug for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexSequence").field("base", &self.base).field("spec", &self.label).finish()
    }
}

/// Expected uniform distribution in Z_b, where a verdict is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum UdVerdict {
    UD,
    NotUD,
    Unknown,
}

fn same_base(base: u32, xs: &[&BAdicStream]) -> Result<()> {
    match xs.iter().find(|x| x.base() != base) {
        Some(x) => Err(Error::BaseMismatch(base, x.base())),
        None => Ok(()),
    }
}

fn stream_label(x: &BAdicStream) -> String {
    match x.to_rational() {
        Some(r) if r.is_integer() => r.numer().to_string(),
        Some(r) => format!("{}/{}", r.numer(), r.denom()),
        None => "<stream>".into(),
    }
}

fn is_int(x: &BAdicStream, value: i64) -> bool {
    x.to_rational().is_some_and(|r| r == BigRational::from_integer(BigInt::from(value)))
}

impl IndexSequence {
    pub fn natural(base: u32) -> Self {
        IndexSequence { base, kind: SequenceKind::Natural, label: "natural".into() }
    }

    pub fn negative_shifted(base: u32) -> Self {
        IndexSequence { base, kind: SequenceKind::NegativeShifted, label: "neg".into() }
    }

    pub fn alternating(base: u32) -> Self {
        IndexSequence { base, kind: SequenceKind::Alternating, label: "alt".into() }
    }

    pub fn affine(a: BAdicStream, c: BAdicStream) -> Result<Self> {
        let base = a.base();
        same_base(base, &[&c])?;
        let label = format!("affine:a={},c={}", stream_label(&a), stream_label(&c));
        Ok(IndexSequence { base, kind: SequenceKind::Affine { a, c }, label })
    }

    pub fn rational_affine(v: u64, alpha: BAdicStream) -> Result<Self> {
        let base = alpha.base();
        if v == 0 || gcd(v as u128, base as u128) != 1 {
            return Err(Error::NotBAdicInteger { u: "1".into(), v: v.to_string(), base });
        }
        let label = format!("rat:v={v},alpha={}", stream_label(&alpha));
        Ok(IndexSequence { base, kind: SequenceKind::RationalAffine { v, alpha }, label })
    }

    pub fn quadratic(a: BAdicStream, c: BAdicStream, d: BAdicStream) -> Result<Self> {
        let base = a.base();
        same_base(base, &[&c, &d])?;
        let label = format!("quad:a={},c={},d={}", stream_label(&a), stream_label(&c), stream_label(&d));
        Ok(IndexSequence { base, kind: SequenceKind::Quadratic { a, c, d }, label })
    }

    pub fn beatty(p: i64, q: u64, nmax: u64, base: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::SequenceSpec("beatty denominator q must be positive".into()));
        }
        let label = format!("beatty:p={p},q={q},nmax={nmax}");
        Ok(IndexSequence { base, kind: SequenceKind::Beatty { p, q, nmax }, label })
    }

    pub fn custom<F>(base: u32, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Result<BAdicStream> + Send + Sync + 'static,
    {
        IndexSequence { base, kind: SequenceKind::Custom(Arc::new(f)), label: label.into() }
    }

    /// `n -> s_{stride n + offset}`.
    pub fn subsequence(&self, stride: u64, offset: u64) -> IndexSequence {
        let inner = self.clone();
        let label = format!("{}[{stride}n+{offset}]", self.label);
        IndexSequence::custom(self.base, label, move |n| {
            let m = n
                .checked_mul(stride)
                .and_then(|x| x.checked_add(offset))
                .ok_or(Error::Overflow("subsequence index"))?;
            inner.eval(m)
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// Canonical spec string (built-in kinds parse back to an equal sequence).
    pub fn spec(&self) -> &str {
        &self.label
    }

    /// Exact digit stream of `s_n`.
    pub fn eval(&self, n: u64) -> Result<BAdicStream> {
        let b = self.base;
        let as_i64 = |x: u64| i64::try_from(x).map_err(|_| Error::Overflow("evaluating the index sequence"));
        match &self.kind {
            SequenceKind::Natural => Ok(BAdicStream::integer_digits(n, b)),
            SequenceKind::NegativeShifted => {
                let m = n.checked_add(1).ok_or(Error::Overflow("evaluating -n-1"))?;
                Ok(BAdicStream::integer_digits(m, b).negate())
            }
            SequenceKind::Alternating => {
                let k = BAdicStream::integer_digits(n / 2 + n % 2, b);
                Ok(if n % 2 == 0 { k } else { k.negate() })
            }
            SequenceKind::Affine { a, c } => a.mul_small(as_i64(n)?).add(c),
            SequenceKind::RationalAffine { v, alpha } => BAdicStream::rational_digits(as_i64(n)?, *v, b)?.add(alpha),
            SequenceKind::Quadratic { a, c, d } => {
                let n = as_i64(n)?;
                let sq = n.checked_mul(n).ok_or(Error::Overflow("evaluating n^2"))?;
                a.mul_small(sq).add(&c.mul_small(n))?.add(d)
            }
            SequenceKind::Beatty { p, q, nmax } => {
                if n > *nmax {
                    return Err(Error::PrecisionExhausted { n, nmax: *nmax });
                }
                let value = (*p as i128 * n as i128).div_euclid(*q as i128);
                let value = i64::try_from(value).map_err(|_| Error::Overflow("evaluating floor(alpha n)"))?;
                Ok(BAdicStream::from_int(value, b))
            }
            SequenceKind::Custom(f) => f(n),
        }
    }

    /// The known uniform-distribution verdict for this sequence, if any.
    pub fn is_ud_expected(&self) -> UdVerdict {
        let b = self.base;
        // |x|_b < 1 iff every prime dividing b divides the first digit
        let small = |x: &BAdicStream| {
            let a0 = x.digit(0) as u64;
            factorize(b as u64).iter().all(|&(p, _)| a0 % p == 0)
        };
        match &self.kind {
            SequenceKind::Natural => UdVerdict::UD,
            // a n + c with unit a: -n-1 and n/v + alpha are of this form
            SequenceKind::NegativeShifted | SequenceKind::RationalAffine { .. } => UdVerdict::UD,
            SequenceKind::Affine { a, .. } => {
                if a.is_unit() {
                    UdVerdict::UD
                } else {
                    UdVerdict::NotUD
                }
            }
            SequenceKind::Quadratic { a, c, d } => {
                if is_int(a, 1) && is_int(c, 0) && is_int(d, 0) {
                    UdVerdict::NotUD
                } else if small(a) && c.is_unit() {
                    UdVerdict::UD
                } else {
                    UdVerdict::Unknown
                }
            }
            SequenceKind::Alternating | SequenceKind::Beatty { .. } | SequenceKind::Custom(_) => UdVerdict::Unknown,
        }
    }
}

/// Distribution of `τ_k(s_n) mod b^k` over `n < N`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct UdReport {
    pub k: u32,
    pub samples: u64,
    pub histogram: Vec<u64>,
    /// max over classes of `|count / N - b^{-k}|`
    #[serde(skip)]
    pub max_deviation: Ratio<i128>,
}

impl UdReport {
    pub fn max_deviation_f64(&self) -> f64 {
        *self.max_deviation.numer() as f64 / *self.max_deviation.denom() as f64
    }
}

/// Largest residue table the empirical test will allocate.
pub const MAX_UD_CLASSES: u64 = 1_000_000;

/// Counts residue classes of the first `k` digits over the first `samples` terms.
pub fn empirical_ud_test(seq: &IndexSequence, k: u32, samples: u64) -> Result<UdReport> {
    let b = seq.base() as u64;
    let classes = b.checked_pow(k).filter(|&c| c <= MAX_UD_CLASSES).ok_or_else(|| Error::TooLarge {
        what: format!("{b}^{k} residue classes"),
        limit: MAX_UD_CLASSES.to_string(),
    })?;
    if samples == 0 {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let mut histogram = vec![0u64; classes as usize];
    for n in 0..samples {
        let x = seq.eval(n)?;
        let class = x.truncate_u128(k as usize).expect("below b^k");
        histogram[class as usize] += 1;
    }
    let denom = samples as i128 * classes as i128;
    let worst = histogram.iter().map(|&c| (c as i128 * classes as i128 - samples as i128).abs()).max().unwrap_or(0);
    Ok(UdReport { k, samples, histogram, max_deviation: Ratio::new(worst, denom) })
}

/// Parses `u/v` or `u` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::SequenceSpec(format!("bad rational '{text}'"));
    let (u, v) = match text.split_once('/') {
        Some((u, v)) => (u.trim(), v.trim()),
        None => (text.trim(), "1"),
    };
    let u: i64 = u.parse().map_err(|_| bad())?;
    let v: i64 = v.parse().map_err(|_| bad())?;
    if v <= 0 {
        return Err(bad());
    }
    Ok(BigRational::new(BigInt::from(u), BigInt::from(v)))
}

fn parse_params(body: &str) -> Result<Vec<(String, String)>> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::SequenceSpec(format!("expected key=value, got '{kv}'")))
        })
        .collect()
}

fn lookup<'a>(params: &'a [(String, String)], allowed: &[&str], key: &str) -> Result<Option<&'a str>> {
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::SequenceSpec(format!("unknown parameter '{k}'")));
    }
    Ok(params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()))
}

/// Parses the sequence spec grammar described in the module docs.
pub fn parse_sequence_spec(spec: &str, base: u32) -> Result<IndexSequence> {
    let spec = spec.trim();
    let (head, body) = spec.split_once(':').unwrap_or((spec, ""));
    let params = parse_params(body)?;
    let stream = |text: Option<&str>, default: i64| -> Result<BAdicStream> {
        match text {
            Some(t) => BAdicStream::from_ratio(&parse_rational(t)?, base),
            None => Ok(BAdicStream::from_int(default, base)),
        }
    };
    let int = |text: Option<&str>, name: &str| -> Result<i64> {
        text.ok_or_else(|| Error::SequenceSpec(format!("missing parameter '{name}'")))?
            .parse()
            .map_err(|_| Error::SequenceSpec(format!("parameter '{name}' must be an integer")))
    };
    let no_params = || {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::SequenceSpec(format!("'{head}' takes no parameters")))
        }
    };
    match head {
        "natural" => no_params().map(|_| IndexSequence::natural(base)),
        "neg" => no_params().map(|_| IndexSequence::negative_shifted(base)),
        "alt" => no_params().map(|_| IndexSequence::alternating(base)),
        "paper-ex2c" => {
            no_params()?;
            // (2n - 1) / 4 = n / 2 - 1 / 4
            let mut seq = IndexSequence::affine(stream(Some("1/2"), 0)?, stream(Some("-1/4"), 0)?)?;
            seq.label = "paper-ex2c".into();
            Ok(seq)
        }
        "affine" => {
            let allowed = ["a", "c"];
            let a =
                lookup(&params, &allowed, "a")?.ok_or_else(|| Error::SequenceSpec("missing parameter 'a'".into()))?;
            IndexSequence::affine(stream(Some(a), 0)?, stream(lookup(&params, &allowed, "c")?, 0)?)
        }
        "rat" => {
            let allowed = ["v", "alpha"];
            let v = int(lookup(&params, &allowed, "v")?, "v")?;
            let v = u64::try_from(v).map_err(|_| Error::SequenceSpec("v must be positive".into()))?;
            IndexSequence::rational_affine(v, stream(lookup(&params, &allowed, "alpha")?, 0)?)
        }
        "quad" => {
            let allowed = ["a", "c", "d"];
            let a =
                lookup(&params, &allowed, "a")?.ok_or_else(|| Error::SequenceSpec("missing parameter 'a'".into()))?;
            IndexSequence::quadratic(
                stream(Some(a), 0)?,
                stream(lookup(&params, &allowed, "c")?, 0)?,
                stream(lookup(&params, &allowed, "d")?, 0)?,
            )
        }
        "beatty" => {
            let allowed = ["p", "q", "nmax"];
            let p = int(lookup(&params, &allowed, "p")?, "p")?;
            let q = int(lookup(&params, &allowed, "q")?, "q")?;
            let nmax = int(lookup(&params, &allowed, "nmax")?, "nmax")?;
            if q <= 0 || nmax < 0 {
                return Err(Error::SequenceSpec("beatty needs q > 0 and nmax >= 0".into()));
            }
            IndexSequence::beatty(p, q as u64, nmax as u64, base)
        }
        other => Err(Error::SequenceSpec(format!("unknown sequence '{other}'"))),
    }
}
