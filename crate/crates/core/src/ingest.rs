//! Yelp-format JSON-lines ingestion.
//!
//! `extract_corpus` runs in two streaming passes: the business file is reduced
//! to the set of restaurant ids, then the review file is streamed and every
//! review of a restaurant is written to the prepared corpus. Memory is bounded
//! by the number of businesses. Malformed lines are counted and skipped.

use std::collections::HashSet;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{atomic_write, open};
use crate::prepared::{write_row, LineReader};
use crate::star::Star;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusinessRecord {
    pub business_id: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewRecord {
    pub review_id: String,
    pub business_id: String,
    pub text: String,
    pub stars: Star,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub businesses_seen: u64,
    pub restaurants_kept: u64,
    pub reviews_seen: u64,
    pub reviews_kept: u64,
    /// Well-formed reviews whose business is not a restaurant.
    pub reviews_dropped: u64,
    /// Malformed lines across both input files.
    pub malformed_lines: u64,
    pub malformed_reviews: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCategories {
    Joined(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
struct RawBusiness {
    business_id: String,
    #[serde(default)]
    categories: Option<RawCategories>,
}

#[derive(Deserialize)]
struct RawReview {
    review_id: String,
    business_id: String,
    stars: f64,
    text: String,
}

/// `None` marks a malformed line.
pub fn parse_business_line(line: &str) -> Option<BusinessRecord> {
    let raw: RawBusiness = serde_json::from_str(line).ok()?;
    if raw.business_id.is_empty() {
        return None;
    }
    let categories = match raw.categories {
        None => Vec::new(),
        Some(RawCategories::Joined(s)) => s
            .split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(String::from)
            .collect(),
        Some(RawCategories::List(list)) => list
            .iter()
            .map(|c| c.trim())
            .filter(|c| !c.is_empty())
            .map(String::from)
            .collect(),
    };
    Some(BusinessRecord {
        business_id: raw.business_id,
        categories,
    })
}

/// Exact, case-insensitive match of one category against "restaurants".
pub fn is_restaurant(business: &BusinessRecord) -> bool {
    business
        .categories
        .iter()
        .any(|c| c.trim().eq_ignore_ascii_case("restaurants"))
}

/// `None` marks a malformed line, including non-integral or out-of-range stars.
pub fn parse_review_line(line: &str) -> Option<ReviewRecord> {
    let raw: RawReview = serde_json::from_str(line).ok()?;
    if raw.stars.fract() != 0.0 || !(1.0..=5.0).contains(&raw.stars) {
        return None;
    }
    Some(ReviewRecord {
        review_id: raw.review_id,
        business_id: raw.business_id,
        text: raw.text,
        stars: Star::new(raw.stars as u8)?,
    })
}

fn restaurant_ids(path: &Path, stats: &mut IngestStats) -> Result<HashSet<String>> {
    let mut lines = LineReader::new(BufReader::with_capacity(1 << 16, open(path)?));
    let mut ids = HashSet::new();
    while let Some(next) = lines.next_line() {
        let (_, line) = next.map_err(|e| Error::io(path, e))?;
        stats.businesses_seen += 1;
        match parse_business_line(line) {
            Some(b) if is_restaurant(&b) => {
                ids.insert(b.business_id);
            }
            Some(_) => {}
            None => stats.malformed_lines += 1,
        }
    }
    stats.restaurants_kept = ids.len() as u64;
    Ok(ids)
}

pub fn extract_corpus(business_path: &Path, review_path: &Path, out_path: &Path) -> Result<IngestStats> {
    let mut stats = IngestStats::default();
    let ids = restaurant_ids(business_path, &mut stats)?;
    log::info!(
        "{} of {} businesses are restaurants",
        stats.restaurants_kept,
        stats.businesses_seen
    );

    let reviews = open(review_path)?;
    atomic_write(out_path, |out| {
        let mut lines = LineReader::new(BufReader::with_capacity(1 << 16, reviews));
        while let Some(next) = lines.next_line() {
            let (_, line) = next.map_err(|e| Error::io(review_path, e))?;
            stats.reviews_seen += 1;
            match parse_review_line(line) {
                Some(r) if ids.contains(&r.business_id) => {
                    write_row(out, r.stars, &r.text).map_err(|e| Error::io(out_path, e))?;
                    stats.reviews_kept += 1;
                }
                Some(_) => stats.reviews_dropped += 1,
                None => {
                    stats.malformed_lines += 1;
                    stats.malformed_reviews += 1;
                }
            }
        }
        Ok(())
    })?;
    Ok(stats)
}
