//! World Bank API ingestion: paged JSON fetch with an on-disk CSV cache,
//! bounded retry, and explicit not-found reporting.
//!
//! The HTTP layer hides behind [`Transport`] so everything above it is
//! testable against recorded fixture responses.

use std::path::{Path, PathBuf};
use std::time::Duration;

use panelflux::panel::{write_observations_to_path, Observation};

use crate::error::{CliError, Result};

/// Minimal blocking HTTP GET abstraction.
pub trait Transport: Send + Sync {
    /// Fetch `url`, returning the response body as text.
    fn get(&self, url: &str) -> std::result::Result<String, String>;
}

/// Live transport over HTTPS.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new() -> Self {
        HttpTransport {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(30))
                .build(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<String, String> {
        let resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        resp.into_string().map_err(|e| e.to_string())
    }
}

const API_BASE: &str = "https://api.worldbank.org/v2";
const PER_PAGE: usize = 1000;
const MAX_ATTEMPTS: usize = 3;

/// World Bank fetcher: results are cached as interchange CSVs keyed by
/// (indicator, countries, span); cached files short-circuit the network
/// entirely unless `refresh` is set.
pub struct WorldBankClient<T: Transport> {
    transport: T,
    cache_dir: PathBuf,
    refresh: bool,
    /// First retry delay; doubles per attempt. Zero in tests.
    retry_base: Duration,
}

impl<T: Transport> WorldBankClient<T> {
    pub fn new(transport: T, cache_dir: impl Into<PathBuf>, refresh: bool) -> Self {
        WorldBankClient {
            transport,
            cache_dir: cache_dir.into(),
            refresh,
            retry_base: Duration::from_millis(500),
        }
    }

    pub fn with_retry_base(mut self, base: Duration) -> Self {
        self.retry_base = base;
        self
    }

    /// Cache file path for one (indicator, countries, span) request.
    pub fn cache_path(&self, countries: &[String], indicator: &str, years: (i32, i32)) -> PathBuf {
        let ind = indicator.replace('.', "-");
        let ctry = countries.join("-");
        self.cache_dir
            .join(format!("wb_{ind}_{ctry}_{}-{}.csv", years.0, years.1))
    }

    fn page_url(&self, countries: &[String], indicator: &str, years: (i32, i32), page: usize) -> String {
        format!(
            "{API_BASE}/country/{codes}/indicator/{indicator}?format=json&per_page={PER_PAGE}&date={from}:{to}&page={page}",
            codes = countries.join(";"),
            from = years.0,
            to = years.1,
        )
    }

    fn get_with_retry(&self, url: &str) -> Result<String> {
        let mut last = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            match self.transport.get(url) {
                Ok(body) => return Ok(body),
                Err(message) => {
                    last = message;
                    if attempt < MAX_ATTEMPTS {
                        std::thread::sleep(self.retry_base * 2u32.pow(attempt as u32 - 1));
                    }
                }
            }
        }
        Err(CliError::Http {
            url: url.to_string(),
            attempts: MAX_ATTEMPTS,
            message: last,
        })
    }

    /// Fetch one indicator for a set of countries over a year span and
    /// write the interchange CSV; returns the cache path. Cached results
    /// are reused verbatim unless the client was built with `refresh`.
    pub fn fetch(
        &self,
        countries: &[String],
        indicator: &str,
        years: (i32, i32),
    ) -> Result<PathBuf> {
        let path = self.cache_path(countries, indicator, years);
        if !self.refresh && path.is_file() {
            return Ok(path);
        }
        let observations = self.fetch_observations(countries, indicator, years)?;
        std::fs::create_dir_all(&self.cache_dir)?;
        let tmp = path.with_extension("csv.tmp");
        write_observations_to_path(&tmp, &observations).map_err(CliError::Core)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Paged fetch without touching the cache.
    pub fn fetch_observations(
        &self,
        countries: &[String],
        indicator: &str,
        years: (i32, i32),
    ) -> Result<Vec<Observation>> {
        let mut rows: Vec<WbRow> = Vec::new();
        let mut page = 1usize;
        loop {
            let url = self.page_url(countries, indicator, years, page);
            let body = self.get_with_retry(&url)?;
            let (pages, mut page_rows) = parse_page(&url, &body)?;
            rows.append(&mut page_rows);
            if page >= pages {
                break;
            }
            page += 1;
        }

        if rows.is_empty() {
            return Err(CliError::EmptyApiResult {
                indicator: indicator.to_string(),
                countries: countries.join(", "),
            });
        }
        let missing: Vec<&String> = countries
            .iter()
            .filter(|c| !rows.iter().any(|r| &r.country == *c))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::CountriesNotFound {
                indicator: indicator.to_string(),
                missing: missing
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            });
        }

        let mut observations: Vec<Observation> = rows
            .into_iter()
            .filter_map(|r| {
                r.value.map(|v| Observation {
                    country: r.country,
                    year: r.year,
                    quarter: None,
                    indicator: indicator.to_string(),
                    value: v,
                })
            })
            .collect();
        // The API returns newest-first; sort for a stable artifact.
        observations.sort_by(|a, b| (&a.country, a.year).cmp(&(&b.country, b.year)));
        Ok(observations)
    }
}

/// One parsed data row (null values preserved so "country present but no
/// data" is distinguishable from "country unknown").
struct WbRow {
    country: String,
    year: i32,
    value: Option<f64>,
}

/// Parse one response page: `[meta, rows]`. Error payloads come back as a
/// one-element array holding a `message` list.
fn parse_page(url: &str, body: &str) -> Result<(usize, Vec<WbRow>)> {
    let doc: serde_json::Value =
        serde_json::from_str(body).map_err(|e| malformed(url, body, &e))?;
    let arr = doc
        .as_array()
        .ok_or_else(|| malformed_at(url, 0, 1, 1, "top-level JSON array expected"))?;
    if let Some(first) = arr.first() {
        if let Some(msgs) = first.get("message").and_then(|m| m.as_array()) {
            let text = msgs
                .iter()
                .map(|m| {
                    format!(
                        "{}: {}",
                        m.get("key").and_then(|v| v.as_str()).unwrap_or("error"),
                        m.get("value").and_then(|v| v.as_str()).unwrap_or("")
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            return Err(CliError::Http {
                url: url.to_string(),
                attempts: 1,
                message: format!("API error payload: {text}"),
            });
        }
    }
    if arr.len() < 2 {
        return Ok((1, Vec::new()));
    }
    let pages = arr[0]
        .get("pages")
        .and_then(|v| v.as_u64())
        .unwrap_or(1)
        .max(1) as usize;
    let rows = match arr[1].as_array() {
        Some(rows) => rows,
        None => return Ok((pages, Vec::new())),
    };
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let country = row
            .get("countryiso3code")
            .and_then(|v| v.as_str())
            .filter(|s| !s.is_empty())
            .or_else(|| {
                row.get("country")
                    .and_then(|c| c.get("id"))
                    .and_then(|v| v.as_str())
            })
            .ok_or_else(|| malformed_at(url, 0, 1, 1, "row without country code"))?
            .to_string();
        let date = row
            .get("date")
            .and_then(|v| v.as_str())
            .ok_or_else(|| malformed_at(url, 0, 1, 1, "row without date"))?;
        let year: i32 = date.parse().map_err(|_| {
            malformed_at(url, 0, 1, 1, &format!("non-annual date `{date}`"))
        })?;
        let value = row.get("value").and_then(|v| v.as_f64());
        out.push(WbRow {
            country,
            year,
            value,
        });
    }
    Ok((pages, out))
}

fn malformed(url: &str, body: &str, e: &serde_json::Error) -> CliError {
    let (line, column) = (e.line(), e.column());
    CliError::MalformedResponse {
        url: url.to_string(),
        offset: byte_offset(body, line, column),
        line,
        column,
        message: e.to_string(),
    }
}

fn malformed_at(url: &str, offset: usize, line: usize, column: usize, msg: &str) -> CliError {
    CliError::MalformedResponse {
        url: url.to_string(),
        offset,
        line,
        column,
        message: msg.to_string(),
    }
}

/// Byte offset of (1-based line, 1-based column) in `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0usize;
    for (i, l) in text.split('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len() + 1;
    }
    text.len()
}

/// Load fixture text bundled with the crate (tests and offline demos).
pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/fixtures")
        .join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_path_encodes_request() {
        let client = WorldBankClient::new(NullTransport, "/tmp/cache", false);
        let p = client.cache_path(
            &["USA".to_string(), "CAN".to_string()],
            "NY.GDP.MKTP.CD",
            (2000, 2020),
        );
        assert_eq!(
            p,
            PathBuf::from("/tmp/cache/wb_NY-GDP-MKTP-CD_USA-CAN_2000-2020.csv")
        );
    }

    #[test]
    fn page_url_matches_documented_shape() {
        let client = WorldBankClient::new(NullTransport, "/tmp/cache", false);
        let url = client.page_url(
            &["USA".to_string(), "CAN".to_string()],
            "NY.GDP.MKTP.CD",
            (2000, 2020),
            2,
        );
        assert_eq!(
            url,
            "https://api.worldbank.org/v2/country/USA;CAN/indicator/NY.GDP.MKTP.CD?format=json&per_page=1000&date=2000:2020&page=2"
        );
    }

    #[test]
    fn byte_offset_counts_lines() {
        let text = "ab\ncdef\ng";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(byte_offset(text, 2, 1), 3);
        assert_eq!(byte_offset(text, 2, 3), 5);
        assert_eq!(byte_offset(text, 3, 1), 8);
    }

    struct NullTransport;
    impl Transport for NullTransport {
        fn get(&self, _url: &str) -> std::result::Result<String, String> {
            Err("no network in tests".to_string())
        }
    }
}
