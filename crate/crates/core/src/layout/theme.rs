use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ColorToken;

#[derive(Debug, thiserror::Error)]
pub enum ThemeError {
    #[error("theme is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("theme color `{token}` = `{value}` is not a #rrggbb hex value")]
    Hex { token: String, value: String },
    #[error("theme is missing color `{0}`")]
    Missing(&'static str),
    #[error("cannot read theme: {0}")]
    Io(#[from] std::io::Error),
}

/// Maps every [`ColorToken`] to a hex color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    colors: BTreeMap<ColorToken, String>,
}

impl Default for Theme {
    fn default() -> Self {
        Self::parse(Self::default_source()).expect("built-in theme is valid")
    }
}

impl Theme {
    pub fn default_source() -> &'static str {
        include_str!("../../theme/default.toml")
    }

    /// Parse a flat TOML table of `token = "#rrggbb"` lines. Unknown keys are
    /// rejected so a typo cannot silently keep a default.
    pub fn parse(src: &str) -> Result<Self, ThemeError> {
        let raw: BTreeMap<ColorToken, String> = toml::from_str(src)?;
        for token in ColorToken::ALL {
            let value = raw.get(&token).ok_or(ThemeError::Missing(token.name()))?;
            let hex = value.strip_prefix('#').unwrap_or("");
            if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                return Err(ThemeError::Hex {
                    token: token.name().to_string(),
                    value: value.clone(),
                });
            }
        }
        Ok(Self { colors: raw })
    }

    pub fn load(path: &Path) -> Result<Self, ThemeError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn color(&self, token: ColorToken) -> &str {
        &self.colors[&token]
    }
}
