//! File formats for laws and distributions.
//!
//! - law JSON: `{"atoms": [[value, mass], ...], "normalize": false}`
//! - law CSV: header `value,mass`, one atom per row
//! - distribution JSON: `{"probs": [p1, ..., pn]}`
//! - pair JSON: `{"p": {"probs": [...]}, "q": {"probs": [...]}}`
//! - rational law JSON: `{"atoms": [[["num","den"], ["num","den"]], ...]}`

use std::fs;
use std::io::Read;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::divergence::{DistributionPair, FiniteDistribution};
use crate::error::{Error, Result};
use crate::exact::RationalLaw;
use crate::law::DiscreteLaw;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LawFile {
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    normalize: bool,
}

pub fn parse_law_json(text: &str) -> Result<DiscreteLaw> {
    let file: LawFile = serde_json::from_str(text)?;
    DiscreteLaw::new(&file.atoms, file.normalize)
}

/// Reads `value,mass` rows. Masses must already sum to one.
pub fn parse_law_csv<R: Read>(reader: R) -> Result<DiscreteLaw> {
    #[derive(Deserialize)]
    struct Row {
        value: f64,
        mass: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut atoms = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        atoms.push((row.value, row.mass));
    }
    DiscreteLaw::new(&atoms, false)
}

/// Loads a law from JSON, or from CSV when the extension is `.csv`.
pub fn load_law(path: &Path) -> Result<DiscreteLaw> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_law_csv(fs::File::open(path).map_err(|e| io_error(path, e))?)
    } else {
        parse_law_json(&read(path)?)
    }
}

pub fn law_to_json(law: &DiscreteLaw) -> String {
    let file = LawFile {
        atoms: law.atoms().to_vec(),
        normalize: false,
    };
    serde_json::to_string(&file).expect("law serializes")
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    probs: Vec<f64>,
    #[serde(default)]
    epsilon_floor: bool,
}

impl DistributionFile {
    fn build(self) -> Result<FiniteDistribution> {
        if self.epsilon_floor {
            FiniteDistribution::with_epsilon_floor(self.probs)
        } else {
            FiniteDistribution::new(self.probs)
        }
    }
}

/// `{"probs": [...]}`; an optional `"epsilon_floor": true` admits zeros.
pub fn parse_distribution_json(text: &str) -> Result<FiniteDistribution> {
    serde_json::from_str::<DistributionFile>(text)?.build()
}

pub fn load_distribution(path: &Path) -> Result<FiniteDistribution> {
    parse_distribution_json(&read(path)?)
}

pub fn parse_pair_json(text: &str) -> Result<DistributionPair> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct PairFile {
        p: DistributionFile,
        q: DistributionFile,
    }
    let file: PairFile = serde_json::from_str(text)?;
    DistributionPair::new(file.p.build()?, file.q.build()?)
}

pub fn load_pair(p: &Path, q: &Path) -> Result<DistributionPair> {
    DistributionPair::new(load_distribution(p)?, load_distribution(q)?)
}

type RationalText = [String; 2];

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RationalLawFile {
    atoms: Vec<[RationalText; 2]>,
}

fn parse_rational(text: &RationalText) -> Result<BigRational> {
    let int = |s: &str| {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("`{s}` is not an integer")))
    };
    let (num, den) = (int(&text[0])?, int(&text[1])?);
    if den == BigInt::from(0) {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

pub fn parse_rational_law_json(text: &str) -> Result<RationalLaw> {
    let file: RationalLawFile = serde_json::from_str(text)?;
    let atoms = file
        .atoms
        .iter()
        .map(|[v, m]| Ok((parse_rational(v)?, parse_rational(m)?)))
        .collect::<Result<Vec<_>>>()?;
    RationalLaw::new(atoms)
}

pub fn load_rational_law(path: &Path) -> Result<RationalLaw> {
    parse_rational_law_json(&read(path)?)
}

pub fn rational_law_to_json(law: &RationalLaw) -> String {
    let text = |x: &BigRational| [x.numer().to_string(), x.denom().to_string()];
    let file = RationalLawFile {
        atoms: law
            .atoms()
            .iter()
            .map(|(v, m)| [text(v), text(m)])
            .collect(),
    };
    serde_json::to_string(&file).expect("rational law serializes")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}
