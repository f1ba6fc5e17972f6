//! Post composition: representative selection, description, and the framed
//! square title image.

use std::collections::BTreeMap;
use std::path::Path;

use ab_glyph::FontArc;
use chrono::{DateTime, Utc};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, Rgb, RgbImage};
use imageproc::drawing::{draw_text_mut, text_size};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::Cluster;
use crate::embed::ArticleVector;
use crate::ingest::Article;
use crate::score::{PostCategory, Region};
use crate::util::digest_hex;

/// Hard cap on description length, in characters.
pub const DESCRIPTION_CHAR_CAP: usize = 2_000;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("image decode failed: {0}")]
    DecodeFailed(String),
    #[error("png encode failed: {0}")]
    EncodeFailed(String),
    #[error("crop {x},{y} side {side} exceeds image bounds {width}x{height}")]
    CropOutOfBounds {
        x: u32,
        y: u32,
        side: u32,
        width: u32,
        height: u32,
    },
    #[error("font unavailable at {path}: {reason}")]
    FontMissing { path: String, reason: String },
}

/// Frame colors for the three post categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    /// National news frame.
    pub blue: [u8; 3],
    /// International news frame.
    pub orange: [u8; 3],
    /// Essential news frame; overrides the region color.
    pub yellow: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            blue: [21, 101, 192],
            orange: [239, 108, 0],
            yellow: [253, 216, 53],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FontTier {
    Large,
    Small,
}

/// Title sizing: two point sizes relative to a reference canvas, picked by
/// title length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontRules {
    pub large_pt: f32,
    pub small_pt: f32,
    /// Titles at most this many characters use the large tier.
    pub title_char_threshold: usize,
    /// Canvas side the point sizes are calibrated for.
    pub reference_canvas: u32,
}

impl Default for FontRules {
    fn default() -> Self {
        Self {
            large_pt: 64.0,
            small_pt: 44.0,
            title_char_threshold: 60,
            reference_canvas: 1080,
        }
    }
}

/// Everything post composition needs besides the articles themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeConfig {
    #[serde(default)]
    pub palette: Palette,
    #[serde(default)]
    pub font_rules: FontRules,
    /// Frame width as percent of the square side.
    #[serde(default = "default_frame_width_pct")]
    pub frame_width_pct: u32,
    /// Image used when the representative article has no lead image.
    #[serde(default = "default_placeholder")]
    pub placeholder_image: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

fn default_frame_width_pct() -> u32 {
    4
}

fn default_placeholder() -> String {
    "assets/placeholder.png".to_string()
}

impl Default for ComposeConfig {
    fn default() -> Self {
        Self {
            palette: Palette::default(),
            font_rules: FontRules::default(),
            frame_width_pct: default_frame_width_pct(),
            placeholder_image: default_placeholder(),
            hashtags: Vec::new(),
        }
    }
}

/// Square crop region in source pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: u32,
    pub y: u32,
    pub side: u32,
}

/// Full recipe for the rendered post image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub source_image_url: String,
    pub crop: CropRect,
    pub frame_color: [u8; 3],
    pub frame_width: u32,
    pub title_text: String,
    pub font_tier: FontTier,
}

/// A publishable unit built from one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub representative_article_id: String,
    pub title: String,
    pub description: String,
    pub image: ImageSpec,
    pub category: PostCategory,
    pub link: String,
    pub hashtags: Vec<String>,
    pub created_at: DateTime<Utc>,
}

/// The member whose vector is closest (by cosine) to the unnormalized mean
/// of all member vectors; ties go to the lowest article id.
pub fn select_representative(vectors: &[ArticleVector]) -> &str {
    assert!(!vectors.is_empty(), "cluster has no vectors");
    let dim = vectors[0].v.len();
    let mut mean = vec![0.0f64; dim];
    for av in vectors {
        for (m, x) in mean.iter_mut().zip(&av.v) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= vectors.len() as f64;
    }
    let mean_norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut order: Vec<&ArticleVector> = vectors.iter().collect();
    order.sort_by(|a, b| a.article_id.cmp(&b.article_id));

    let mut best = order[0];
    let mut best_cos = f64::NEG_INFINITY;
    for av in order {
        let cos = cosine_to(&av.v, &mean, mean_norm);
        if cos > best_cos {
            best = av;
            best_cos = cos;
        }
    }
    &best.article_id
}

fn cosine_to(v: &[f64], mean: &[f64], mean_norm: f64) -> f64 {
    if mean_norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = v.iter().zip(mean).map(|(a, b)| a * b).sum();
    let v_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (v_norm * mean_norm)
}

/// The article text up to the first blank line (the whole body when there
/// is none), capped at [`DESCRIPTION_CHAR_CAP`] characters with whole-word
/// truncation and an ellipsis.
pub fn first_paragraph(body: &str) -> String {
    let paragraph = match blank_line_offset(body) {
        Some(offset) => &body[..offset],
        None => body,
    };
    let paragraph = paragraph.trim_end();
    let chars: Vec<char> = paragraph.chars().collect();
    if chars.len() <= DESCRIPTION_CHAR_CAP {
        return paragraph.to_string();
    }
    let mut cut = DESCRIPTION_CHAR_CAP;
    while cut > 0 && !chars[cut].is_whitespace() {
        cut -= 1;
    }
    if cut == 0 {
        // a single word longer than the cap: hard cut
        cut = DESCRIPTION_CHAR_CAP;
    }
    let prefix: String = chars[..cut].iter().collect();
    format!("{}…", prefix.trim_end())
}

/// Byte offset of the first blank line that follows some content.
fn blank_line_offset(body: &str) -> Option<usize> {
    let mut offset = 0;
    let mut seen_content = false;
    for line in body.split_inclusive('\n') {
        if line.trim().is_empty() && seen_content {
            return Some(offset);
        }
        if !line.trim().is_empty() {
            seen_content = true;
        }
        offset += line.len();
    }
    None
}

/// Builds the image recipe: centered square crop, category frame color
/// (important wins over region), width-scaled frame, and the title tier.
pub fn compose_image_spec(
    article: &Article,
    category: &PostCategory,
    image_dims: (u32, u32),
    cfg: &ComposeConfig,
) -> ImageSpec {
    let (width, height) = image_dims;
    assert!(width >= 1 && height >= 1, "image dimensions must be positive");
    let side = width.min(height);
    let crop = CropRect {
        x: (width - side) / 2,
        y: (height - side) / 2,
        side,
    };
    let frame_color = if category.important {
        cfg.palette.yellow
    } else {
        match category.region {
            Region::National => cfg.palette.blue,
            Region::International => cfg.palette.orange,
        }
    };
    let frame_width = (side * cfg.frame_width_pct / 100).max(1);
    let font_tier = if article.title.chars().count() <= cfg.font_rules.title_char_threshold {
        FontTier::Large
    } else {
        FontTier::Small
    };
    ImageSpec {
        source_image_url: article
            .image_url
            .clone()
            .unwrap_or_else(|| cfg.placeholder_image.clone()),
        crop,
        frame_color,
        frame_width,
        title_text: article.title.clone(),
        font_tier,
    }
}

/// Title typeface used on rendered images.
#[derive(Clone)]
pub struct TitleFont {
    font: FontArc,
}

impl TitleFont {
    /// The bundled sans face; always available.
    pub fn embedded() -> Self {
        let data: &'static [u8] = include_bytes!("../assets/fonts/DejaVuSans-Bold.ttf");
        Self {
            font: FontArc::try_from_slice(data).expect("bundled font parses"),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ComposeError> {
        let data = std::fs::read(path).map_err(|e| ComposeError::FontMissing {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let font = FontArc::try_from_vec(data).map_err(|e| ComposeError::FontMissing {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Self { font })
    }
}

/// Renders the post image: crop, inset frame, title in the bottom-left
/// corner. Deterministic for fixed inputs.
pub fn render_image(
    spec: &ImageSpec,
    image_bytes: &[u8],
    font: &TitleFont,
    rules: &FontRules,
) -> Result<Vec<u8>, ComposeError> {
    let decoded = image::load_from_memory(image_bytes)
        .map_err(|e| ComposeError::DecodeFailed(e.to_string()))?;
    let (width, height) = (decoded.width(), decoded.height());
    let CropRect { x, y, side } = spec.crop;
    if x.saturating_add(side) > width || y.saturating_add(side) > height || side == 0 {
        return Err(ComposeError::CropOutOfBounds {
            x,
            y,
            side,
            width,
            height,
        });
    }

    let mut canvas: RgbImage = decoded.crop_imm(x, y, side, side).to_rgb8();
    draw_frame(&mut canvas, spec.frame_width, spec.frame_color);
    draw_title(&mut canvas, spec, font, rules);

    let mut png = Vec::new();
    PngEncoder::new(&mut png)
        .write_image(canvas.as_raw(), side, side, ExtendedColorType::Rgb8)
        .map_err(|e| ComposeError::EncodeFailed(e.to_string()))?;
    Ok(png)
}

fn draw_frame(canvas: &mut RgbImage, frame_width: u32, color: [u8; 3]) {
    let side = canvas.width();
    let fw = frame_width.min(side / 2).max(1);
    let pixel = Rgb(color);
    for py in 0..side {
        for px in 0..side {
            let from_edge = px.min(py).min(side - 1 - px).min(side - 1 - py);
            if from_edge < fw {
                canvas.put_pixel(px, py, pixel);
            }
        }
    }
}

fn draw_title(canvas: &mut RgbImage, spec: &ImageSpec, font: &TitleFont, rules: &FontRules) {
    let side = canvas.width();
    let pt = match spec.font_tier {
        FontTier::Large => rules.large_pt,
        FontTier::Small => rules.small_pt,
    };
    let scale = (pt * side as f32 / rules.reference_canvas as f32).max(4.0);
    let margin = spec.frame_width as i32 + (side as f32 * 0.04).round() as i32;
    let max_width = side as i32 - 2 * margin;

    let lines = wrap_text(&spec.title_text, &font.font, scale, max_width.max(1) as u32);
    let line_height = (scale * 1.2).round() as i32;
    let total = lines.len() as i32 * line_height;
    let top = side as i32 - margin - total;

    let shadow = ((scale / 16.0).round() as i32).max(1);
    for (i, line) in lines.iter().enumerate() {
        let ly = top + i as i32 * line_height;
        draw_text_mut(
            canvas,
            Rgb([0, 0, 0]),
            margin + shadow,
            ly + shadow,
            scale,
            &font.font,
            line,
        );
        draw_text_mut(canvas, Rgb([255, 255, 255]), margin, ly, scale, &font.font, line);
    }
}

fn wrap_text(text: &str, font: &FontArc, scale: f32, max_width: u32) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        let candidate = if current.is_empty() {
            word.to_string()
        } else {
            format!("{current} {word}")
        };
        let (w, _) = text_size(scale, &font, &candidate);
        if w <= max_width || current.is_empty() {
            current = candidate;
        } else {
            lines.push(std::mem::take(&mut current));
            current = word.to_string();
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

/// Assembles the post for one published cluster: the representative's
/// title, link and image, the first-paragraph description, configured
/// hashtags, and a deterministic post id.
pub fn build_post(
    cluster: &Cluster,
    articles: &BTreeMap<String, &Article>,
    member_vectors: &[ArticleVector],
    category: PostCategory,
    cfg: &ComposeConfig,
    image_dims: (u32, u32),
    now: DateTime<Utc>,
) -> Post {
    assert!(
        cluster
            .members
            .iter()
            .all(|id| member_vectors.iter().any(|v| &v.article_id == id)),
        "every cluster member needs a vector"
    );
    let representative_id = select_representative(member_vectors).to_string();
    let representative = articles
        .get(&representative_id)
        .expect("representative article present");

    let image = compose_image_spec(representative, &category, image_dims, cfg);
    let region = match category.region {
        Region::National => "national",
        Region::International => "international",
    };
    // post identity derives from the story, not the clock; the delivery
    // ledger depends on this being stable across runs
    let important = if category.important { "important" } else { "regular" };
    let post_id = format!(
        "p{}",
        digest_hex(
            &[representative_id.as_bytes(), region.as_bytes(), important.as_bytes()],
            16,
        )
    );

    Post {
        post_id,
        representative_article_id: representative_id,
        title: representative.title.clone(),
        description: first_paragraph(&representative.body),
        image,
        category,
        link: representative.url.clone(),
        hashtags: cfg.hashtags.clone(),
        created_at: now,
    }
}
