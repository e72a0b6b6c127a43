//! Seeded synthetic rated corpora.
//!
//! Each review is built from per-star sentence templates whose `{pool}`
//! placeholders draw from word pools (`{pool:cap}` capitalises the first
//! letter, `{pool:upper}` the whole fill). Star counts follow the requested
//! mix by largest remainder, so category shares are exact up to rounding.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, LoadMode, Review, StarRating, STAR_COUNT};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("bad synthetic spec: {0}")]
    BadSpec(String),
    #[error("n must be at least 1")]
    Empty,
}

/// Generator settings; every field has a built-in default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    /// Relative weight of each star, 1 to 5.
    pub mix: [f64; STAR_COUNT],
    pub apps: Vec<String>,
    /// Sentence templates per star, 1 to 5.
    pub templates: [Vec<String>; STAR_COUNT],
    /// Star-independent sentences mixed in as noise.
    pub filler: Vec<String>,
    pub pools: BTreeMap<String, Vec<String>>,
    /// Chance of a second sentence from the review's own star.
    pub second_sentence: f64,
    /// Chance of one filler sentence.
    pub filler_rate: f64,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for SynthSpec {
    fn default() -> Self {
        let templates = [
            strings(&[
                "{bad_adj:cap} app.",
                "Total {junk}.",
                "It keeps {failing} every time I open it.",
                "{warn:upper}!",
                "Why does it keep {failing}?",
                "Not {pos} at all.",
                "Do not {recommend}, it is {bad_adj}.",
                "Used to {love} it, now it is {bad_adj}.",
                "Stopped working after the update, {junk}.",
                "I want my money back, {bad_adj} {thing}.",
            ]),
            strings(&[
                "Not {pos}, {failing} too often.",
                "The {thing} is {bad_adj} since the update.",
                "Too many {annoyance}, it keeps {failing}.",
                "Why so many {annoyance}?",
                "It was {pos} before but now {failing} all the time.",
                "{bad_adj:cap} and full of {annoyance}.",
                "Hardly usable, {failing} constantly.",
                "Not worth it, {bad_adj} {thing}.",
            ]),
            strings(&[
                "It is {meh}.",
                "{meh:cap} {thing}, does the job.",
                "Not {pos}, not {neg} either.",
                "Works most of the time but sometimes {failing}.",
                "{pos:cap} idea but the {thing} is {meh}.",
                "Nothing special, just {meh}.",
                "Some features are {pos}, others are {neg}.",
                "Could be better, it is {meh} for now.",
            ]),
            strings(&[
                "{pos:cap} app! Wish we could {request}.",
                "{pos:cap} {thing} but please {request}.",
                "Would be {perfect} if you could {request}.",
                "Really {pos}, only missing a way to {request}.",
                "Pretty {praise}, hope you {request} soon.",
                "{praise:cap} overall, one request: {request}.",
                "Never {failing}, just wish it could {request}.",
            ]),
            strings(&[
                "{pos:cap} app!",
                "I {love} this {thing}.",
                "{praise:cap} and {praise}, {perfect}.",
                "Best {thing} I have ever used.",
                "Never {failing}, works {flawlessly}.",
                "{perfect:cap}! Highly {recommended}.",
                "Absolutely {praise}, no complaints.",
                "Not {neg} at all, {praise}!",
                "A real {gem} of an app.",
            ]),
        ];
        let mut pools = BTreeMap::new();
        let mut pool = |name: &str, words: &[&str]| {
            pools.insert(name.to_string(), strings(words));
        };
        pool(
            "pos",
            &[
                "great",
                "good",
                "nice",
                "awesome",
                "excellent",
                "amazing",
                "cool",
                "fantastic",
            ],
        );
        pool(
            "praise",
            &[
                "slick",
                "solid",
                "intuitive",
                "handy",
                "snappy",
                "polished",
                "seamless",
                "terrific",
                "neat",
                "stellar",
            ],
        );
        pool("perfect", &["perfect", "flawless", "spot on", "top notch", "brilliant"]);
        pool(
            "flawlessly",
            &["flawlessly", "like a charm", "perfectly", "without a hitch", "great"],
        );
        pool("love", &["love", "adore", "really like", "enjoy"]);
        pool("recommend", &["recommend", "download", "install", "buy"]);
        pool("recommended", &["recommended", "recommend it", "worth it"]);
        pool("gem", &["gem", "lifesaver", "winner", "keeper"]);
        pool(
            "thing",
            &["app", "game", "tool", "interface", "design", "update", "version"],
        );
        pool(
            "request",
            &[
                "delete old messages",
                "add a dark mode",
                "sync with the desktop",
                "export to pdf",
                "change the font size",
                "add widgets",
                "sort by date",
                "turn off sounds",
            ],
        );
        pool(
            "meh",
            &[
                "okay", "ok", "fine", "average", "mediocre", "so so", "alright", "decent",
            ],
        );
        pool("neg", &["bad", "terrible", "awful", "broken", "slow"]);
        pool(
            "bad_adj",
            &[
                "garbage", "unusable", "pathetic", "clunky", "glitchy", "horrible", "useless", "terrible", "awful",
                "rubbish",
            ],
        );
        pool("junk", &["junk", "trash", "waste of time", "ripoff", "scam", "garbage"]);
        pool(
            "failing",
            &[
                "crashing",
                "freezing",
                "closing itself",
                "logging me out",
                "draining my battery",
                "lagging",
                "not loading",
                "hanging",
            ],
        );
        pool("annoyance", &["ads", "popups", "notifications", "bugs", "glitches"]);
        pool(
            "warn",
            &["do not download", "worst app ever", "total waste", "uninstalled"],
        );
        let filler = strings(&[
            "Downloaded it last week.",
            "Using it on my phone.",
            "Just updated to the new version.",
            "My kids use it too.",
            "I use it every day.",
            "Tried it on my tablet.",
        ]);
        SynthSpec {
            mix: [2099.0, 1141.0, 1032.0, 1016.0, 3312.0],
            apps: (1..=10).map(|i| format!("app-{i:02}")).collect(),
            templates,
            filler,
            pools,
            second_sentence: 0.4,
            filler_rate: 0.3,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::BadSpec(m));
        if self.mix.iter().any(|w| !w.is_finite() || *w < 0.0) || self.mix.iter().sum::<f64>() <= 0.0 {
            return bad("mix weights must be non-negative with a positive sum".into());
        }
        if self.apps.is_empty() {
            return bad("at least one app is required".into());
        }
        for (s, list) in self.templates.iter().enumerate() {
            if list.is_empty() && self.mix[s] > 0.0 {
                return bad(format!("no templates for {} stars", s + 1));
            }
        }
        for p in [self.second_sentence, self.filler_rate] {
            if !(0.0..=1.0).contains(&p) {
                return bad("rates must be in [0, 1]".into());
            }
        }
        if self.filler_rate > 0.0 && self.filler.is_empty() {
            return bad("filler_rate > 0 without filler sentences".into());
        }
        for t in self.templates.iter().flatten().chain(&self.filler) {
            for (name, _) in placeholders(t)? {
                match self.pools.get(name) {
                    Some(p) if !p.is_empty() => {}
                    _ => return bad(format!("unknown or empty pool {name:?} in {t:?}")),
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Keep,
    Capital,
    Upper,
}

/// `(pool name, case)` for each placeholder in order.
fn placeholders(template: &str) -> Result<Vec<(&str, Case)>, SynthError> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| SynthError::BadSpec(format!("unclosed placeholder in {template:?}")))?;
        let inner = &rest[open + 1..open + close];
        let (name, case) = match inner.split_once(':') {
            None => (inner, Case::Keep),
            Some((n, "cap")) => (n, Case::Capital),
            Some((n, "upper")) => (n, Case::Upper),
            Some((_, other)) => return Err(SynthError::BadSpec(format!("unknown modifier {other:?}"))),
        };
        out.push((name, case));
        rest = &rest[open + close + 1..];
    }
    Ok(out)
}

fn fill<R: Rng>(template: &str, pools: &BTreeMap<String, Vec<String>>, rng: &mut R) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("validated");
        let inner = &rest[open + 1..close];
        let (name, case) = match inner.split_once(':') {
            None => (inner, Case::Keep),
            Some((n, "cap")) => (n, Case::Capital),
            Some((n, _)) => (n, Case::Upper),
        };
        let word = pools[name].choose(rng).expect("validated");
        match case {
            Case::Keep => out.push_str(word),
            Case::Upper => out.push_str(&word.to_uppercase()),
            Case::Capital => {
                let mut chars = word.chars();
                if let Some(first) = chars.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(chars.as_str());
                }
            }
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

/// Largest-remainder allocation of `n` items over the mix. When `n` is at
/// least the number of stars with positive weight, each of them gets one.
pub fn star_counts(mix: &[f64; STAR_COUNT], n: usize) -> [usize; STAR_COUNT] {
    let total: f64 = mix.iter().sum();
    let exact: Vec<f64> = mix.iter().map(|w| w / total * n as f64).collect();
    let mut counts = [0usize; STAR_COUNT];
    for s in 0..STAR_COUNT {
        counts[s] = libm::floor(exact[s]) as usize;
    }
    let mut order: Vec<usize> = (0..STAR_COUNT).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - libm::floor(exact[b]))
            .total_cmp(&(exact[a] - libm::floor(exact[a])))
            .then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for &s in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[s] += 1;
        left -= 1;
    }
    let active = mix.iter().filter(|w| **w > 0.0).count();
    if n >= active {
        for s in 0..STAR_COUNT {
            if mix[s] > 0.0 && counts[s] == 0 {
                let donor = (0..STAR_COUNT)
                    .max_by_key(|&d| (counts[d], core::cmp::Reverse(d)))
                    .expect("five");
                counts[donor] -= 1;
                counts[s] += 1;
            }
        }
    }
    counts
}

/// `n` reviews with ids `syn-00001…`, deterministic in `(spec, n, seed)`.
pub fn generate(spec: &SynthSpec, n: usize, seed: u64) -> Result<Corpus, SynthError> {
    if n == 0 {
        return Err(SynthError::Empty);
    }
    spec.validate()?;
    let counts = star_counts(&spec.mix, n);
    let mut stars: Vec<usize> = (0..STAR_COUNT)
        .flat_map(|s| core::iter::repeat_n(s, counts[s]))
        .collect();
    stars.shuffle(&mut seed::rng(seed, "synth-stars", 0));
    let width = format!("{n}").len().max(5);
    let mut reviews = Vec::with_capacity(n);
    for (i, &s) in stars.iter().enumerate() {
        let mut rng = seed::rng(seed, "synth-review", i as u64);
        let templates = &spec.templates[s];
        let mut sentences = alloc::vec![fill(
            templates.choose(&mut rng).expect("validated"),
            &spec.pools,
            &mut rng
        )];
        if rng.gen::<f64>() < spec.second_sentence {
            sentences.push(fill(
                templates.choose(&mut rng).expect("validated"),
                &spec.pools,
                &mut rng,
            ));
        }
        if rng.gen::<f64>() < spec.filler_rate {
            let f = fill(spec.filler.choose(&mut rng).expect("validated"), &spec.pools, &mut rng);
            let at = rng.gen_range(0..=sentences.len());
            sentences.insert(at, f);
        }
        let app = spec.apps.choose(&mut rng).expect("validated").clone();
        let rating = StarRating::from_index(s).expect("star index");
        reviews.push(Review::new(
            app,
            format!("syn-{:0width$}", i + 1),
            sentences.join(" "),
            Some(rating),
        ));
    }
    Ok(Corpus::from_reviews(reviews, LoadMode::default()).expect("generated ids are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RatingCategory;

    #[test]
    fn same_seed_same_corpus() {
        let spec = SynthSpec::default();
        let a = generate(&spec, 100, 7).unwrap();
        assert_eq!(a, generate(&spec, 100, 7).unwrap());
        assert_ne!(a, generate(&spec, 100, 8).unwrap());
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn all_stars_present_from_fifty() {
        for n in [50, 51, 77, 200] {
            let c = generate(&SynthSpec::default(), n, 3).unwrap();
            let mut seen = [false; 5];
            for r in c.reviews() {
                seen[r.rating.unwrap().index()] = true;
            }
            assert_eq!(seen, [true; 5], "n={n}");
        }
    }

    #[test]
    fn category_shares_follow_mix() {
        let spec = SynthSpec::default();
        let c = generate(&spec, 1000, 11).unwrap();
        let total: f64 = spec.mix.iter().sum();
        let want = [
            (spec.mix[0] + spec.mix[1]) / total,
            spec.mix[2] / total,
            (spec.mix[3] + spec.mix[4]) / total,
        ];
        let mut got = [0.0; 3];
        for r in c.reviews() {
            let slot = match r.rating.unwrap().category() {
                RatingCategory::Bad => 0,
                RatingCategory::Neutral => 1,
                RatingCategory::Good => 2,
            };
            got[slot] += 1.0 / 1000.0;
        }
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() <= 0.10 * want[k], "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn largest_remainder_counts() {
        assert_eq!(star_counts(&[1.0; 5], 7), [2, 2, 1, 1, 1]);
        assert_eq!(
            star_counts(&[2099.0, 1141.0, 1032.0, 1016.0, 3312.0], 8600),
            [2099, 1141, 1032, 1016, 3312]
        );
        assert_eq!(star_counts(&[100.0, 0.0, 0.0, 0.0, 1.0], 5), [4, 0, 0, 0, 1]);
        assert_eq!(star_counts(&[1.0, 0.0, 0.0, 0.0, 0.0], 3), [3, 0, 0, 0, 0]);
    }

    #[test]
    fn templates_fill_with_case() {
        let mut pools = BTreeMap::new();
        pools.insert("w".to_string(), alloc::vec!["nice app".to_string()]);
        let mut rng = seed::rng(0, "t", 0);
        assert_eq!(
            fill("{w:cap}! {w:upper}. {w}", &pools, &mut rng),
            "Nice app! NICE APP. nice app"
        );
        let mut spec = SynthSpec::default();
        spec.templates[0].push("{missing}".into());
        assert!(matches!(spec.validate(), Err(SynthError::BadSpec(_))));
        spec.templates[0].pop();
        spec.templates[0].push("{pos:lower}".into());
        assert!(matches!(spec.validate(), Err(SynthError::BadSpec(_))));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = SynthSpec::default();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SynthSpec>(&text).unwrap(), spec);
        let partial: SynthSpec = serde_json::from_str(r#"{"mix":[1,1,1,1,1]}"#).unwrap();
        assert_eq!(partial.apps, spec.apps);
    }
}
