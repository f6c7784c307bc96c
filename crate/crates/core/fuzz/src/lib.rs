//! Checks shared by the fuzz targets and by the corpus replay test.
//!
//! Each function takes raw input, must never panic on malformed data, and
//! asserts that whatever decodes successfully survives a round trip. The
//! return value says whether the input decoded.

use mmm_core::certify::aggregate;
use mmm_core::chain::replay_driving_list;
use mmm_core::fixtures::FixtureSet;
use mmm_core::journal::Journal;
use mmm_core::record::{parse_stream, PieceRecord};
use mmm_core::stream::{infer_direction, sigma_table};
use mmm_core::{AffineForm, CycleForm, Permutation, RInterval, Rational};

/// Symbolic replay is linear-logarithmic in the list length; longer lists
/// only slow the fuzzer down without reaching new code.
const MAX_REPLAY: usize = 4096;
const MAX_PERM: usize = 1 << 16;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

pub fn rational(data: &[u8]) -> bool {
    let Some(s) = text(data) else { return false };
    let Ok(x) = s.parse::<Rational>() else {
        return false;
    };
    let shown = x.to_string();
    let back: Rational = shown.parse().expect("display output parses");
    assert_eq!(back, x);
    assert_eq!(back.to_string(), shown);
    true
}

fn json_round_trip<T>(data: &[u8]) -> Option<T>
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let v: T = serde_json::from_slice(data).ok()?;
    let encoded = serde_json::to_string(&v).expect("decoded values encode");
    let back: T = serde_json::from_str(&encoded).expect("encoded values decode");
    assert_eq!(back, v);
    Some(v)
}

pub fn affine_json(data: &[u8]) -> bool {
    let Some(f) = json_round_trip::<AffineForm>(data) else {
        return false;
    };
    let _ = f.eval(&Rational::one());
    true
}

pub fn interval_json(data: &[u8]) -> bool {
    let Some(i) = json_round_trip::<RInterval>(data) else {
        return false;
    };
    assert!(i.lo() <= i.hi());
    assert_eq!(i.contains(i.lo()), i.lo_closed());
    true
}

pub fn piece_line(data: &[u8]) -> bool {
    let Some(s) = text(data) else { return false };
    let Ok(r) = PieceRecord::parse_line(s) else {
        return false;
    };
    let back = PieceRecord::parse_line(&r.to_line()).expect("encoded records decode");
    assert_eq!(back, r);
    if let Some(d) = r.driving() {
        if d.len() <= MAX_REPLAY {
            let _ = replay_driving_list(d);
        }
    }
    let _ = r.into_piece();
    true
}

pub fn piece_stream(data: &[u8]) -> bool {
    let Some(s) = text(data) else { return false };
    let Ok(records) = parse_stream(s) else {
        return false;
    };
    if records
        .iter()
        .any(|r| r.driving().is_some_and(|d| d.len() > MAX_REPLAY))
    {
        return true;
    }
    let _ = aggregate(&records, infer_direction(&records));
    let _ = sigma_table(&records, 1);
    true
}

pub fn journal(data: &[u8]) -> bool {
    let Some(s) = text(data) else { return false };
    let Ok(j) = Journal::parse(s) else {
        return false;
    };
    let encoded = serde_json::to_string(&j).expect("journals encode");
    assert_eq!(
        Journal::parse(&encoded).expect("encoded journals decode"),
        j
    );
    true
}

pub fn fixtures(data: &[u8]) -> bool {
    let Some(s) = text(data) else { return false };
    let Ok(set) = FixtureSet::parse(s) else {
        return false;
    };
    let encoded = toml::to_string(&set).expect("fixture sets encode");
    assert_eq!(
        FixtureSet::parse(&encoded).expect("encoded fixtures decode"),
        set
    );
    true
}

/// Bytes as 1-based images, one per byte.
pub fn permutation(data: &[u8]) -> bool {
    let images: Vec<usize> = data.iter().map(|&b| b as usize).collect();
    let Ok(p) = Permutation::from_images(&images) else {
        return false;
    };
    let c = p.cycles();
    assert_eq!(Permutation::from_cycles(p.len(), &c).unwrap(), p);
    assert!(p.inverse().compose(&p).unwrap().is_identity());
    assert_eq!(c.is_identity(), p.is_identity());
    true
}

pub fn cycles(data: &[u8]) -> bool {
    let Ok(c) = serde_json::from_slice::<CycleForm>(data) else {
        return false;
    };
    let n = c.0.iter().flatten().copied().max().unwrap_or(0);
    if n > MAX_PERM {
        return true;
    }
    let Ok(p) = Permutation::from_cycles(n, &c) else {
        return false;
    };
    let canonical = CycleForm::normalized(c.0.clone());
    assert_eq!(p.cycles(), canonical);
    assert_eq!(Permutation::from_cycles(n, &canonical).unwrap(), p);
    true
}
