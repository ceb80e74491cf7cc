//! Substitution files and the `rauzy` command line.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::balanced::{aligned_letter_check, common_points, intersection_morphism, Caps, IntersectionStatus};
use crate::error::{Error, Result};
use crate::fractal::{rauzy_cloud, DEFAULT_POINTS};
use crate::render::{interior_heuristic, render_ppm, DEFAULT_SIZE};
use crate::spectral::{char_poly, classify, perron_data, DEFAULT_TOLERANCE};
use crate::word::{strong_coincidence, Alphabet, Substitution, Word};

/// Parses `<letter> -> <word>` rules. `#` starts a comment; blank lines
/// are skipped. The alphabet is ordered by first appearance on the left.
pub fn parse_substitution(text: &str) -> Result<Substitution> {
    let mut rules: Vec<(usize, char, &str)> = Vec::new();
    let mut seen = HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| Error::parse(line_no, "expected `<letter> -> <word>`"))?;
        let lhs = lhs.trim();
        let mut chars = lhs.chars();
        let letter = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => {
                return Err(Error::parse(
                    line_no,
                    format!("left side `{lhs}` must be a single letter"),
                ))
            }
        };
        if !seen.insert(letter) {
            return Err(Error::parse(line_no, format!("duplicate rule for '{letter}'")));
        }
        let rhs = rhs.trim();
        if rhs.is_empty() {
            return Err(Error::parse(line_no, format!("image of '{letter}' is empty")));
        }
        if rhs.chars().any(char::is_whitespace) {
            return Err(Error::parse(line_no, "image must not contain whitespace"));
        }
        rules.push((line_no, letter, rhs));
    }
    if rules.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "no substitution rules"));
    }
    let alphabet = Alphabet::new(rules.iter().map(|r| r.1).collect())
        .map_err(|e| Error::parse(rules[0].0, e.to_string()))?;
    let mut images = Vec::with_capacity(rules.len());
    for &(line_no, _, rhs) in &rules {
        let img: Word = rhs
            .chars()
            .map(|c| {
                alphabet
                    .index_of(c)
                    .ok_or_else(|| Error::parse(line_no, format!("letter '{c}' has no rule")))
            })
            .collect::<Result<Vec<_>>>()?
            .into();
        images.push(img);
    }
    Substitution::new(alphabet, images)
}

pub fn substitution_to_text(sigma: &Substitution) -> String {
    let a = sigma.alphabet();
    let mut out = String::new();
    for (i, img) in sigma.images().iter().enumerate() {
        out.push_str(&format!("{} -> {}\n", a.symbols()[i], a.spell(img)));
    }
    out
}

pub fn read_substitution(path: &Path) -> Result<Substitution> {
    let text = fs::read_to_string(path)?;
    parse_substitution(&text)
}

#[derive(Debug, Parser)]
#[command(
    name = "rauzy",
    version,
    about = "Rauzy fractals and common points of Pisot substitutions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Incidence matrix, characteristic polynomial and classification.
    Info {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Render the Rauzy fractal of a substitution.
    Render {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_POINTS, value_parser = positive)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        size: ImageSize,
        /// Color points by subtile.
        #[arg(long)]
        subtiles: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Compute the morphism generating the common points of two substitutions.
    Intersect {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out_morphism: Option<PathBuf>,
        /// Also render the common points, colored by block.
        #[arg(long)]
        render: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_POINTS, value_parser = positive)]
        points: usize,
        #[command(flatten)]
        size: ImageSize,
        #[arg(long, default_value_t = Caps::default().seed, value_parser = positive)]
        seed_cap: usize,
        #[arg(long, default_value_t = Caps::default().block_len, value_parser = positive)]
        blocklen_cap: usize,
        #[arg(long, default_value_t = Caps::default().block_count, value_parser = positive)]
        blockcount_cap: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Search for strong coincidence witnesses.
    CheckCoincidence {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_k: u32,
    },
    /// Positions where both fixed points carry the same given letter.
    Aligned {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        letter: char,
        #[arg(long, value_parser = positive)]
        length: usize,
    },
}

#[derive(Debug, Args)]
pub struct ImageSize {
    #[arg(long, default_value_t = DEFAULT_SIZE, value_parser = positive)]
    pub width: usize,
    #[arg(long, default_value_t = DEFAULT_SIZE, value_parser = positive)]
    pub height: usize,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit codes for outcomes that are not errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success = 0,
    CapExceeded = 3,
    EmptyIntersectionSuspected = 4,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Parse { .. } => 1,
        Error::Validation(_) | Error::Numeric(_) => 2,
        Error::Resource(_) => 3,
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("tolerance must be positive"))
    }
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<Outcome> {
    match &cli.command {
        Command::Info { file, tolerance } => {
            check_tolerance(*tolerance)?;
            info(&read_substitution(file)?, *tolerance, out)
        }
        Command::Render {
            file,
            points,
            out: path,
            size,
            subtiles,
            tolerance,
        } => {
            check_tolerance(*tolerance)?;
            let sigma = read_substitution(file)?;
            let pd = perron_data(&sigma.incidence_matrix(), *tolerance)?;
            let cloud = rauzy_cloud(&sigma, *points, &pd)?;
            let inner = interior_heuristic(&cloud, 64)?;
            let cloud = if *subtiles { cloud } else { cloud.unlabeled() };
            let img = render_ppm(&cloud, size.width, size.height)?;
            fs::write(path, img.to_ppm())?;
            writeln!(out, "points: {}", cloud.len())?;
            writeln!(out, "max_norm: {:.10}", cloud.max_norm())?;
            writeln!(out, "origin_looks_interior: {inner} (heuristic)")?;
            writeln!(out, "image: {} ({}x{})", path.display(), size.width, size.height)?;
            Ok(Outcome::Success)
        }
        Command::Intersect {
            first,
            second,
            out_morphism,
            render,
            points,
            size,
            seed_cap,
            blocklen_cap,
            blockcount_cap,
            tolerance,
        } => {
            check_tolerance(*tolerance)?;
            let s1 = read_substitution(first)?;
            let s2 = read_substitution(second)?;
            let caps = Caps {
                seed: *seed_cap,
                block_len: *blocklen_cap,
                block_count: *blockcount_cap,
            };
            let report = intersection_morphism(&s1, &s2, caps)?;
            let a = s1.alphabet();
            writeln!(
                out,
                "status: {}",
                match report.status {
                    IntersectionStatus::Success => "success",
                    IntersectionStatus::EmptyIntersectionSuspected => "empty-intersection-suspected",
                    IntersectionStatus::CapExceeded => "cap-exceeded",
                }
            )?;
            writeln!(out, "power: {}", report.power)?;
            writeln!(
                out,
                "seeds: {} {}",
                a.symbol(report.seeds.0),
                a.symbol(report.seeds.1)
            )?;
            writeln!(
                out,
                "caps: seed={} blocklen={} blockcount={}",
                caps.seed, caps.block_len, caps.block_count
            )?;
            writeln!(out, "blocks: {}", report.block_count)?;
            writeln!(out, "max_block_len: {}", report.max_block_len)?;
            writeln!(out, "message: {}", report.message)?;
            if let Some(m) = &report.morphism {
                write!(out, "{}", m.to_text())?;
                if let Some(path) = out_morphism {
                    fs::write(path, m.to_text())?;
                }
            }
            if let Some(path) = render {
                if report.status != IntersectionStatus::CapExceeded {
                    let pd = perron_data(&s1.incidence_matrix(), *tolerance)?;
                    let cloud = common_points(&s1, &s2, *points, &pd, report.morphism.as_ref())?;
                    let img = render_ppm(&cloud, size.width, size.height)?;
                    fs::write(path, img.to_ppm())?;
                    writeln!(out, "common_points: {}", cloud.len())?;
                    writeln!(out, "image: {}", path.display())?;
                }
            }
            Ok(match report.status {
                IntersectionStatus::Success => Outcome::Success,
                IntersectionStatus::CapExceeded => Outcome::CapExceeded,
                IntersectionStatus::EmptyIntersectionSuspected => Outcome::EmptyIntersectionSuspected,
            })
        }
        Command::CheckCoincidence { file, max_k } => {
            let sigma = read_substitution(file)?;
            let a = sigma.alphabet();
            let report = strong_coincidence(&sigma, *max_k);
            let verdict = if report.holds { "holds" } else { "inconclusive" };
            writeln!(out, "strong_coincidence: {verdict} (k <= {max_k})")?;
            for (&(b1, b2), w) in &report.witnesses {
                writeln!(
                    out,
                    "pair {}{}: k={} letter={} positions={},{} {}",
                    a.symbol(b1),
                    a.symbol(b2),
                    w.k,
                    a.symbol(w.letter),
                    w.first_position,
                    w.second_position,
                    match w.side {
                        crate::word::CoincidenceSide::Prefix => "prefix",
                        crate::word::CoincidenceSide::Suffix => "suffix",
                    }
                )?;
            }
            for &(b1, b2) in &report.unresolved {
                writeln!(out, "pair {}{}: no witness", a.symbol(b1), a.symbol(b2))?;
            }
            Ok(Outcome::Success)
        }
        Command::Aligned {
            first,
            second,
            letter,
            length,
        } => {
            let s1 = read_substitution(first)?;
            let s2 = read_substitution(second)?;
            let l = s1
                .alphabet()
                .index_of(*letter)
                .ok_or_else(|| Error::validation(format!("letter '{letter}' is not in the alphabet")))?;
            let positions = aligned_letter_check(&s1, &s2, l, *length)?;
            writeln!(out, "letter: {letter}")?;
            writeln!(out, "length: {length}")?;
            writeln!(out, "count: {}", positions.len())?;
            let list: Vec<String> = positions.iter().map(usize::to_string).collect();
            writeln!(out, "positions: {}", list.join(" "))?;
            Ok(Outcome::Success)
        }
    }
}

fn info<W: Write>(sigma: &Substitution, tol: f64, out: &mut W) -> Result<Outcome> {
    let m = sigma.incidence_matrix();
    let a = sigma.alphabet();
    let c = classify(&m);
    let primitive = m.is_primitive(m.wielandt_bound());
    let letters: Vec<String> = a.symbols().iter().map(char::to_string).collect();
    writeln!(out, "alphabet: {}", letters.join(" "))?;
    writeln!(out, "matrix: {m}")?;
    writeln!(out, "char_poly: {}", char_poly(&m))?;
    writeln!(out, "determinant: {}", c.determinant)?;
    match perron_data(&m, tol) {
        Ok(pd) => writeln!(out, "beta: {:.12}", pd.beta)?,
        Err(e) => writeln!(out, "beta: unavailable ({e})")?,
    }
    writeln!(out, "primitive: {primitive}")?;
    let exact = if c.irreducibility_exact {
        ""
    } else {
        " (heuristic)"
    };
    writeln!(out, "irreducible: {}{exact}", c.irreducible)?;
    writeln!(out, "unimodular: {}", c.unimodular)?;
    writeln!(out, "pisot: {}", c.pisot)?;
    if let Ok(mut u) = sigma.periodic_point(sigma.default_periodic_cap()) {
        let (k, seed) = (u.power(), u.seed());
        let prefix = a.spell(u.prefix(24));
        writeln!(
            out,
            "periodic_point: k={k} seed={} prefix={prefix}",
            a.symbol(seed)
        )?;
    } else {
        writeln!(out, "periodic_point: none")?;
    }
    for r in &c.reasons {
        writeln!(out, "note: {r}")?;
    }
    Ok(Outcome::Success)
}
