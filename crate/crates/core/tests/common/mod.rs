//! Independent oracles and random fixture builders shared by integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use prodskew::corpus::{AuthorIdentity, AuthorSlot, DocType, Publication, Researcher};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force characteristic scores: thresholds by plain loops, memberships
/// by direct comparison. Returns (mu, counts, degenerate label).
pub fn brute_force_css(x: &[f64]) -> ([f64; 3], [usize; 5], &'static str) {
    fn mean_above(x: &[f64], t: f64) -> Option<(f64, usize)> {
        let mut s = 0.0;
        let mut k = 0;
        for &v in x {
            if v > t {
                s += v;
                k += 1;
            }
        }
        (k > 0).then(|| (s / k as f64, k))
    }
    let mut total = 0.0;
    for &v in x {
        total += v;
    }
    let mu1 = total / x.len() as f64;
    let (mu2, mu3, label) = match mean_above(x, mu1) {
        None => (mu1, mu1, "mu2_undefined"),
        Some((mu2, _)) => match mean_above(x, mu2) {
            None => (mu2, mu2, "mu3_undefined"),
            Some((mu3, 1)) => (mu2, mu3, "mu3_singleton"),
            Some((mu3, _)) => (mu2, mu3, "none"),
        },
    };
    let mut counts = [0usize; 5];
    for &v in x {
        let c = if v == 0.0 {
            0
        } else if v <= mu1 {
            1
        } else if v <= mu2 {
            2
        } else if v <= mu3 {
            3
        } else {
            4
        };
        counts[c] += 1;
    }
    ([mu1, mu2, mu3], counts, label)
}

/// Raw byline weight class, written out from the position rules.
pub fn oracle_class(pos: u32, n: u32) -> &'static str {
    match pos {
        1 => "first",
        p if p == n => "last",
        2 => "second",
        p if p + 1 == n => "second_to_last",
        _ => "other",
    }
}

/// Direct evaluation of FSS = (1/t) * sum(c_i / cbar_i * f_i) where cbar_i is
/// the mean citations of cited reference publications sharing year and
/// category (averaged over the publication's categories, year mean when a
/// category has no cited reference publication).
pub fn oracle_fss(
    researcher_id: &str,
    years_active: f64,
    own: &[Publication],
    reference: &[Publication],
    weights: Option<&BTreeMap<&'static str, (f64, f64)>>,
) -> f64 {
    let cbar_cat = |year: i32, cat: &str| -> Option<f64> {
        let cited: Vec<u64> = reference
            .iter()
            .filter(|p| p.year == year && p.citations > 0 && p.categories.iter().any(|c| c == cat))
            .map(|p| p.citations)
            .collect();
        (!cited.is_empty()).then(|| cited.iter().sum::<u64>() as f64 / cited.len() as f64)
    };
    let cbar_year = |year: i32| -> f64 {
        let cited: Vec<u64> = reference
            .iter()
            .filter(|p| p.year == year && p.citations > 0)
            .map(|p| p.citations)
            .collect();
        cited.iter().sum::<u64>() as f64 / cited.len() as f64
    };
    let mut total = 0.0;
    for p in own {
        let factors: Vec<f64> = p
            .categories
            .iter()
            .map(|c| cbar_cat(p.year, c).unwrap_or_else(|| cbar_year(p.year)))
            .collect();
        let cbar = factors.iter().sum::<f64>() / factors.len() as f64;
        let n = p.authors.len() as u32;
        let share = match weights {
            None => 1.0 / n as f64,
            Some(w) => {
                let raw = |s: &AuthorSlot| {
                    let (intra, extra) = w
                        .get(oracle_class(s.position, n))
                        .copied()
                        .unwrap_or(w["other"]);
                    if s.intramural {
                        intra
                    } else {
                        extra
                    }
                };
                let me = p
                    .authors
                    .iter()
                    .find(|s| s.identity == AuthorIdentity::Internal(researcher_id.to_string()))
                    .expect("researcher on byline");
                raw(me) / p.authors.iter().map(raw).sum::<f64>()
            }
        };
        total += p.citations as f64 * share / cbar;
    }
    total / years_active
}

pub fn researcher(id: &str, field: &str, discipline: &str, years: f64) -> Researcher {
    Researcher {
        researcher_id: id.to_string(),
        field_code: field.to_string(),
        discipline_code: discipline.to_string(),
        years_active: years,
    }
}

/// A random byline of `n` slots; `me` (if any) sits at `my_pos`.
pub fn random_byline(r: &mut ChaCha8Rng, n: u32, me: Option<(&str, u32)>) -> Vec<AuthorSlot> {
    (1..=n)
        .map(|position| AuthorSlot {
            position,
            identity: match me {
                Some((id, p)) if p == position => AuthorIdentity::Internal(id.to_string()),
                _ => AuthorIdentity::External,
            },
            intramural: r.random_bool(0.5),
        })
        .collect()
}

pub const CATEGORIES: [&str; 5] = ["C1", "C2", "C3", "C4", "C5"];

pub fn random_categories(r: &mut ChaCha8Rng, pool: &[&str]) -> Vec<String> {
    let k = r.random_range(1..=2.min(pool.len()));
    let mut cats: Vec<String> = Vec::new();
    while cats.len() < k {
        let c = pool[r.random_range(0..pool.len())].to_string();
        if !cats.contains(&c) {
            cats.push(c);
        }
    }
    cats
}

pub fn random_citations(r: &mut ChaCha8Rng) -> u64 {
    if r.random_bool(0.3) {
        0
    } else {
        r.random_range(1..60)
    }
}

/// Reference publications covering every year of 2009..=2013 with at least
/// one cited publication per year.
pub fn random_reference(r: &mut ChaCha8Rng, n: usize) -> Vec<Publication> {
    let mut out = Vec::with_capacity(n + 5);
    for (i, year) in (2009..=2013).enumerate() {
        out.push(Publication {
            pub_id: format!("R-anchor-{i}"),
            year,
            doc_type: DocType::Article,
            categories: vec!["C1".to_string()],
            citations: r.random_range(1..20),
            authors: random_byline(r, 1, None),
        });
    }
    for i in 0..n {
        let n_auth = r.random_range(1..=6);
        out.push(Publication {
            pub_id: format!("R{i:05}"),
            year: r.random_range(2009..=2013),
            doc_type: DocType::Article,
            categories: random_categories(r, &CATEGORIES[..4]),
            citations: random_citations(r),
            authors: random_byline(r, n_auth, None),
        });
    }
    out
}

/// Publications authored by `id`; categories may include `C5`, which the
/// reference never uses, to exercise the year fallback.
pub fn random_own_publications(r: &mut ChaCha8Rng, id: &str, n: usize) -> Vec<Publication> {
    (0..n)
        .map(|i| {
            let n_auth = r.random_range(1..=8);
            let pos = r.random_range(1..=n_auth);
            Publication {
                pub_id: format!("O{i:04}"),
                year: r.random_range(2009..=2013),
                doc_type: DocType::Article,
                categories: random_categories(r, &CATEGORIES),
                citations: random_citations(r),
                authors: random_byline(r, n_auth, Some((id, pos))),
            }
        })
        .collect()
}

/// Zero-inflated lognormal-ish sample of size `n`.
pub fn random_scores(r: &mut ChaCha8Rng, n: usize, zero_share: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if r.random_bool(zero_share) {
                0.0
            } else {
                let u: f64 = r.random_range(-2.0..2.0);
                u.exp() * r.random_range(0.5..1.5)
            }
        })
        .collect()
}
