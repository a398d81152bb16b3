//! The window-based comparison attack: window schedules, named ensemble
//! presets, and the per-record ensemble score.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LossRecord;
use crate::error::{Error, Result};
use crate::window::sign_statistic;

/// Window sizes used by the reference attack configuration.
pub const PUBLISHED_WINDOWS: [usize; 10] = [2, 3, 4, 6, 9, 13, 18, 25, 32, 40];

const LINEAR_WINDOWS: [usize; 10] = [2, 6, 11, 15, 19, 23, 27, 31, 36, 40];
const SINGLE_BEST_WINDOW: usize = 10;

/// Strictly increasing set of window sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub name: String,
    sizes: Vec<usize>,
}

impl WindowSchedule {
    /// Sorts and deduplicates `sizes`. Zero and empty sets are rejected.
    pub fn new(name: impl Into<String>, mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument("window schedule is empty".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("window sizes must be positive".into()));
        }
        sizes.sort_unstable();
        sizes.dedup();
        Ok(Self {
            name: name.into(),
            sizes,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.sizes.last().expect("schedule is non-empty")
    }
}

impl fmt::Display for WindowSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for w in &self.sizes {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
            first = false;
        }
        Ok(())
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// `w_k = round(w_min · (w_max / w_min)^((k − 1) / (count − 1)))`, `k = 1..count`,
/// rounding half up and collapsing duplicates.
pub fn geometric_schedule(w_min: usize, w_max: usize, count: usize) -> Result<WindowSchedule> {
    if w_min == 0 || count == 0 {
        return Err(Error::InvalidArgument(
            "geometric schedule needs w_min ≥ 1 and count ≥ 1".into(),
        ));
    }
    if w_min > w_max {
        return Err(Error::InvalidArgument(format!(
            "w_min ({w_min}) exceeds w_max ({w_max})"
        )));
    }
    let name = format!("geometric({w_min},{w_max},{count})");
    if count == 1 {
        return WindowSchedule::new(name, vec![w_min]);
    }
    let ratio = w_max as f64 / w_min as f64;
    let sizes = (0..count)
        .map(|k| {
            let exponent = k as f64 / (count - 1) as f64;
            round_half_up(w_min as f64 * ratio.powf(exponent))
        })
        .collect();
    WindowSchedule::new(name, sizes)
}

/// Named ensemble configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    SingleBest,
    SmallRange,
    LargeRange,
    FullEnsemble,
    Extended,
    LinearSpacing,
    Random,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::SingleBest,
        Preset::SmallRange,
        Preset::LargeRange,
        Preset::FullEnsemble,
        Preset::Extended,
        Preset::LinearSpacing,
        Preset::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SingleBest => "Single Best",
            Preset::SmallRange => "Small Range",
            Preset::LargeRange => "Large Range",
            Preset::FullEnsemble => "Full Ensemble",
            Preset::Extended => "Extended",
            Preset::LinearSpacing => "Linear Spacing",
            Preset::Random => "Random",
        }
    }

    /// Short command-line spelling.
    pub fn slug(self) -> &'static str {
        match self {
            Preset::SingleBest => "single",
            Preset::SmallRange => "small",
            Preset::LargeRange => "large",
            Preset::FullEnsemble => "full",
            Preset::Extended => "extended",
            Preset::LinearSpacing => "linear",
            Preset::Random => "random",
        }
    }

    /// Resolve the window set. Only [`Preset::Random`] uses `seed`.
    pub fn schedule(self, seed: u64) -> WindowSchedule {
        let sizes = match self {
            Preset::SingleBest => vec![SINGLE_BEST_WINDOW],
            Preset::SmallRange => PUBLISHED_WINDOWS.iter().copied().filter(|&w| w <= 9).collect(),
            Preset::LargeRange => PUBLISHED_WINDOWS.iter().copied().filter(|&w| w >= 13).collect(),
            Preset::FullEnsemble => PUBLISHED_WINDOWS.to_vec(),
            Preset::Extended => return named(geometric_schedule(2, 80, 12), self),
            Preset::LinearSpacing => LINEAR_WINDOWS.to_vec(),
            Preset::Random => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rand::seq::index::sample(&mut rng, 39, 10)
                    .into_iter()
                    .map(|i| i + 2)
                    .collect()
            }
        };
        WindowSchedule::new(self.name(), sizes).expect("preset sizes are valid")
    }
}

fn named(schedule: Result<WindowSchedule>, preset: Preset) -> WindowSchedule {
    let mut s = schedule.expect("preset sizes are valid");
    s.name = preset.name().to_string();
    s
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        let preset = match key.as_str() {
            "singlebest" | "single" => Preset::SingleBest,
            "smallrange" | "small" => Preset::SmallRange,
            "largerange" | "large" => Preset::LargeRange,
            "fullensemble" | "full" => Preset::FullEnsemble,
            "extended" => Preset::Extended,
            "linearspacing" | "linear" => Preset::LinearSpacing,
            "random" => Preset::Random,
            _ => {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                return Err(Error::InvalidArgument(format!(
                    "unknown preset `{s}`; expected one of: {}",
                    names.join(", ")
                )));
            }
        };
        Ok(preset)
    }
}

/// Resolve a preset by display name or slug.
pub fn preset(name: &str, seed: u64) -> Result<WindowSchedule> {
    Ok(name.parse::<Preset>()?.schedule(seed))
}

/// How a schedule is written on the command line: a preset name,
/// an explicit list `2,4,8`, or `geo:W_MIN:W_MAX:COUNT`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Preset(Preset),
    Explicit(Vec<usize>),
    Geometric { w_min: usize, w_max: usize, count: usize },
}

impl ScheduleSpec {
    pub fn resolve(&self, seed: u64) -> Result<WindowSchedule> {
        match self {
            ScheduleSpec::Preset(p) => Ok(p.schedule(seed)),
            ScheduleSpec::Explicit(sizes) => WindowSchedule::new("explicit", sizes.clone()),
            ScheduleSpec::Geometric { w_min, w_max, count } => {
                geometric_schedule(*w_min, *w_max, *count)
            }
        }
    }
}

fn parse_usize_list(s: &str, sep: char) -> Result<Vec<usize>> {
    s.split(sep)
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("`{t}` is not a window size")))
        })
        .collect()
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("geo:") {
            let parts = parse_usize_list(rest, ':')?;
            let [w_min, w_max, count] = parts[..] else {
                return Err(Error::InvalidArgument(format!(
                    "geometric schedule must be geo:W_MIN:W_MAX:COUNT, got `{s}`"
                )));
            };
            return Ok(ScheduleSpec::Geometric { w_min, w_max, count });
        }
        if s.starts_with(|c: char| c.is_ascii_digit()) {
            return Ok(ScheduleSpec::Explicit(parse_usize_list(s, ',')?));
        }
        s.parse().map(ScheduleSpec::Preset)
    }
}

/// Ensemble score for one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WbcScore {
    pub record_id: String,
    /// Sign statistic per usable window size.
    pub per_window: BTreeMap<usize, f64>,
    /// Mean of `per_window`, in `[0, 1]`; higher means more likely a member.
    pub total: f64,
    /// Schedule sizes longer than the record.
    pub skipped_windows: Vec<usize>,
}

/// Average sign statistic over every schedule size that fits in the record.
pub fn wbc_score(record: &LossRecord, schedule: &WindowSchedule) -> Result<WbcScore> {
    let n = record.len();
    let (usable, skipped): (Vec<usize>, Vec<usize>) =
        schedule.sizes().iter().partition(|&&w| w <= n);
    if usable.is_empty() {
        return Err(Error::NoUsableWindow {
            id: record.id().to_string(),
            n,
        });
    }
    let mut per_window = BTreeMap::new();
    let mut total = 0.0;
    for &w in &usable {
        let t = sign_statistic(record, w)?;
        per_window.insert(w, t);
        total += t;
    }
    Ok(WbcScore {
        record_id: record.id().to_string(),
        per_window,
        total: total / usable.len() as f64,
        skipped_windows: skipped,
    })
}
