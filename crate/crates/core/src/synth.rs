//! Deterministic generator of Yelp-shaped dumps for fixtures and benchmarks.
//!
//! Each review draws a latent sentiment from its star label plus Gaussian
//! noise, so neighbouring stars overlap the way real ratings do. Tokens are
//! a mix of function words, topical nouns (with per-review repetition), and
//! sentiment words picked from seven graded lexicon buckets around the
//! latent value. Lengths are log-normal, longer for low ratings.

use std::io::Write;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand_distr::{LogNormal, Normal};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::rng::SeededRng;
use crate::star::{Star, N_CLASSES};

const SENTIMENT_BUCKETS: [&[&str]; 7] = [
    &[
        "worst", "horrible", "disgusting", "terrible", "awful", "rude", "refund", "inedible", "nasty", "filthy",
        "unacceptable", "appalling", "insulting", "poisoning", "cockroach", "pathetic", "scam", "vomit", "moldy",
        "disrespectful", "ignored", "gross", "dirty", "lawsuit", "complaint", "yelled", "hair", "manager",
    ],
    &[
        "bland", "disappointing", "overpriced", "soggy", "greasy", "stale", "cold", "slow", "tasteless", "lukewarm",
        "underwhelming", "burnt", "overcooked", "forgot", "wrong", "unfortunately", "flavorless", "rubbery",
        "sloppy", "waited", "lacking", "salty", "dry", "disappointed", "mess", "frozen", "unfriendly",
    ],
    &[
        "meh", "mediocre", "lacked", "sadly", "expected", "inconsistent", "hoping", "chewy", "watery", "noisy",
        "crowded", "pricey", "tiny", "mixed", "however", "wish", "bit", "somewhat", "missing", "rushed",
    ],
    &[
        "okay", "decent", "average", "alright", "ok", "reasonable", "typical", "passable", "fair", "standard",
        "acceptable", "normal", "simple", "basic", "adequate", "plain", "filling", "usual", "mostly", "overall",
    ],
    &[
        "good", "nice", "tasty", "friendly", "enjoyed", "pleasant", "fresh", "quick", "solid", "generous",
        "cozy", "clean", "satisfying", "recommend", "helpful", "warm", "happy", "cute", "affordable", "worth",
    ],
    &[
        "great", "delicious", "excellent", "loved", "awesome", "fantastic", "perfect", "attentive", "flavorful",
        "definitely", "favorites", "love", "beautiful", "tender", "crispy", "highly", "glad", "yummy", "perfectly",
    ],
    &[
        "amazing", "best", "favorite", "incredible", "outstanding", "phenomenal", "gem", "wonderful", "superb",
        "exceptional", "perfection", "heaven", "divine", "impeccable", "obsessed", "mouthwatering", "blown",
        "unbelievable", "legendary", "spectacular", "hands", "wow", "exquisite", "stellar",
    ],
];

const FUNCTION_WORDS: &[&str] = &[
    "the", "and", "was", "we", "it", "to", "of", "for", "is", "in", "my", "with", "they", "this", "had", "that",
    "but", "were", "so", "very", "at", "our", "you", "on", "be", "there", "are", "have", "here", "me", "as",
    "their", "all", "when", "just", "which", "out", "an", "from", "if", "one", "up", "been", "what", "or",
    "would", "about", "some", "us", "will", "can", "by", "get", "got", "came", "go", "came", "time", "place",
    "food", "really", "order", "ordered", "also", "back", "again", "went", "try", "little",
];

const TOPIC_WORDS: &[&str] = &[
    "pizza", "burger", "sushi", "tacos", "pasta", "salad", "steak", "chicken", "fries", "ramen", "pho", "curry",
    "sandwich", "wings", "bbq", "brisket", "noodles", "rice", "soup", "dessert", "coffee", "beer", "wine",
    "cocktails", "brunch", "breakfast", "lunch", "dinner", "patio", "bar", "server", "waitress", "waiter",
    "staff", "menu", "table", "reservation", "appetizer", "entree", "portion", "sauce", "cheese", "bread",
    "shrimp", "salmon", "pork", "beef", "tofu", "dumplings", "burrito", "nachos", "bagel", "donut", "cake",
    "pie", "waffles", "pancakes", "eggs", "bacon", "lobster", "oysters", "crab", "lamb", "gyro", "falafel",
    "hummus", "kebab", "tea", "boba", "smoothie", "icecream", "gelato", "parking", "drive", "delivery",
    "takeout", "buffet", "kitchen", "chef", "owner", "hostess", "bill", "tip", "price", "decor", "music",
    "atmosphere", "vibe", "location", "downtown", "strip", "mall", "weekend", "friday", "night", "family",
    "kids", "friends", "date", "birthday", "husband", "wife", "minutes", "hour", "line", "seat", "booth",
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "to", "sen", "bel", "qui", "dor", "an", "ve", "zu", "pol", "tri", "mar", "ne", "sa",
    "gri", "fo", "lin", "cha", "ber", "tu", "mo", "shi", "pa", "co", "ri", "el", "den",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_reviews: usize,
    pub n_businesses: usize,
    /// Share of businesses tagged as restaurants; others' reviews get dropped.
    pub restaurant_fraction: f64,
    pub class_weights: [f64; N_CLASSES],
    /// Standard deviation of the per-review latent sentiment around its star.
    pub sentiment_noise: f64,
    /// Spread of each sentiment word's bucket around the latent value.
    pub word_noise: f64,
    /// Chance that a token is a sentiment word.
    pub sentiment_rate: f64,
    pub median_tokens: [f64; N_CLASSES],
    pub length_sigma: f64,
    /// Extra invented nouns added to the topical vocabulary.
    pub n_rare_words: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_reviews: 5_000,
            n_businesses: 400,
            restaurant_fraction: 0.7,
            class_weights: [0.1242, 0.0903, 0.1265, 0.2480, 0.4109],
            sentiment_noise: 0.32,
            word_noise: 0.6,
            sentiment_rate: 0.12,
            median_tokens: [105.0, 100.0, 92.0, 80.0, 68.0],
            length_sigma: 0.75,
            n_rare_words: 4_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SynthSummary {
    pub businesses: usize,
    pub restaurants: usize,
    pub reviews: usize,
    pub restaurant_reviews: usize,
}

/// Word tables built once per generator.
struct Lexicon {
    sentiment: Vec<(Vec<&'static str>, WeightedIndex<f64>)>,
    topic: Vec<String>,
    topic_pick: WeightedIndex<f64>,
    function_pick: WeightedIndex<f64>,
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).expect("non-empty table")
}

impl Lexicon {
    fn new(rng: &mut SeededRng, n_rare: usize) -> Self {
        let sentiment = SENTIMENT_BUCKETS
            .iter()
            .map(|words| (words.to_vec(), zipf(words.len())))
            .collect();
        let mut topic: Vec<String> = TOPIC_WORDS.iter().map(|w| w.to_string()).collect();
        for _ in 0..n_rare {
            let n_syll = 2 + rng.index(3);
            topic.push((0..n_syll).map(|_| SYLLABLES[rng.index(SYLLABLES.len())]).collect());
        }
        let topic_pick = zipf(topic.len());
        Self {
            sentiment,
            topic,
            topic_pick,
            function_pick: zipf(FUNCTION_WORDS.len()),
        }
    }
}

pub struct ReviewGenerator {
    cfg: SynthConfig,
    lex: Lexicon,
    rng: SeededRng,
    star_pick: WeightedIndex<f64>,
}

impl ReviewGenerator {
    pub fn new(cfg: SynthConfig) -> Result<Self> {
        if !(cfg.sentiment_rate >= 0.0 && cfg.sentiment_rate <= 1.0) || cfg.n_businesses == 0 {
            return Err(Error::InvalidParameter("sentiment_rate must be in [0,1] and n_businesses ≥ 1".into()));
        }
        let star_pick = WeightedIndex::new(cfg.class_weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = SeededRng::new(cfg.seed);
        let lex = Lexicon::new(&mut rng, cfg.n_rare_words);
        Ok(Self { cfg, lex, rng, star_pick })
    }

    pub fn draw_star(&mut self) -> Star {
        Star::from_index(self.star_pick.sample(&mut self.rng))
    }

    pub fn review_text(&mut self, star: Star) -> String {
        let cfg = &self.cfg;
        let rng = &mut self.rng;
        let lex = &self.lex;
        let center = (star.value() as f64 - 3.0) / 2.0;
        let latent = center + Normal::new(0.0, cfg.sentiment_noise).unwrap().sample(rng);
        let len_dist = LogNormal::new(cfg.median_tokens[star.index()].ln(), cfg.length_sigma).unwrap();
        let n_tokens = (len_dist.sample(rng).round() as usize).clamp(3, 1000);
        let word_noise = Normal::new(0.0, cfg.word_noise).unwrap();
        // A few nouns this review keeps coming back to.
        let favorites: Vec<usize> = (0..3).map(|_| lex.topic_pick.sample(rng)).collect();
        let exclaim = if star.value() == 5 { 0.35 } else if star.value() == 1 { 0.2 } else { 0.05 };

        let mut text = String::with_capacity(n_tokens * 6);
        let mut sentence_left = 0usize;
        for i in 0..n_tokens {
            let u = rng.unit();
            let word: &str = if u < cfg.sentiment_rate {
                let c = latent + word_noise.sample(rng);
                let bucket = ((c + 1.5) / 0.5).round().clamp(0.0, 6.0) as usize;
                let (words, pick) = &lex.sentiment[bucket];
                words[pick.sample(rng)]
            } else if u < cfg.sentiment_rate + 0.25 {
                if rng.unit() < 0.4 {
                    &lex.topic[favorites[rng.index(favorites.len())]]
                } else {
                    &lex.topic[lex.topic_pick.sample(rng)]
                }
            } else {
                FUNCTION_WORDS[lex.function_pick.sample(rng)]
            };
            if sentence_left == 0 {
                if i > 0 {
                    text.push(if rng.unit() < exclaim { '!' } else { '.' });
                    text.push(if rng.unit() < 0.1 { '\n' } else { ' ' });
                }
                sentence_left = 6 + rng.index(14);
                let mut chars = word.chars();
                if let Some(first) = chars.next() {
                    text.extend(first.to_uppercase());
                    text.push_str(chars.as_str());
                }
            } else {
                text.push(if rng.unit() < 0.06 { ',' } else { ' ' });
                if text.ends_with(',') {
                    text.push(' ');
                }
                text.push_str(word);
            }
            sentence_left -= 1;
        }
        text.push(if rng.unit() < exclaim { '!' } else { '.' });
        text
    }

    /// Writes `business.json` and `review.json` style JSON-lines files.
    pub fn write_dump(mut self, business_path: &Path, review_path: &Path) -> Result<SynthSummary> {
        let mut summary = SynthSummary {
            businesses: self.cfg.n_businesses,
            ..SynthSummary::default()
        };
        let mut is_restaurant = Vec::with_capacity(self.cfg.n_businesses);
        atomic_write(business_path, |w: &mut dyn Write| {
            for b in 0..self.cfg.n_businesses {
                let restaurant = self.rng.unit() < self.cfg.restaurant_fraction;
                is_restaurant.push(restaurant);
                let categories = if restaurant {
                    let extra = TOPIC_WORDS[self.rng.index(20)];
                    json!(format!("Restaurants, {}", capitalize(extra)))
                } else if b % 7 == 0 {
                    serde_json::Value::Null
                } else {
                    json!(["Shopping", "Home Services", "Beauty & Spas"][b % 3])
                };
                let line = json!({
                    "business_id": business_id(b),
                    "name": format!("Business {b}"),
                    "stars": 1.0 + (b % 9) as f64 / 2.0,
                    "categories": categories,
                });
                writeln!(w, "{line}").map_err(|e| Error::io(business_path, e))?;
            }
            Ok(())
        })?;
        summary.restaurants = is_restaurant.iter().filter(|&&r| r).count();

        atomic_write(review_path, |w: &mut dyn Write| {
            for r in 0..self.cfg.n_reviews {
                let b = self.rng.index(self.cfg.n_businesses);
                let star = self.draw_star();
                let text = self.review_text(star);
                if is_restaurant[b] {
                    summary.restaurant_reviews += 1;
                }
                let line = json!({
                    "review_id": format!("r{r:09}"),
                    "user_id": format!("u{:06}", self.rng.index(50_000)),
                    "business_id": business_id(b),
                    "stars": f64::from(star.value()),
                    "useful": self.rng.index(5),
                    "text": text,
                    "date": format!("2019-{:02}-{:02} 12:00:00", 1 + r % 12, 1 + r % 28),
                });
                writeln!(w, "{line}").map_err(|e| Error::io(review_path, e))?;
            }
            Ok(())
        })?;
        summary.reviews = self.cfg.n_reviews;
        Ok(summary)
    }
}

fn business_id(b: usize) -> String {
    format!("biz{b:06}")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn write_dump(cfg: &SynthConfig, business_path: &Path, review_path: &Path) -> Result<SynthSummary> {
    ReviewGenerator::new(cfg.clone())?.write_dump(business_path, review_path)
}

/// Writes a dump into `dir` and runs it through ingest, returning the
/// path of the prepared `corpus.tsv`.
pub fn prepared_corpus(cfg: &SynthConfig, dir: &Path) -> Result<std::path::PathBuf> {
    let (b, r, c) = (dir.join("business.json"), dir.join("review.json"), dir.join("corpus.tsv"));
    write_dump(cfg, &b, &r)?;
    crate::ingest::extract_corpus(&b, &r, &c)?;
    Ok(c)
}
