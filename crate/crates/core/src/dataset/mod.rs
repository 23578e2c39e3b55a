//! Dataset reading and writing: COCO-style annotation JSON shared by the
//! synthetic generator, hand-annotated real datasets, and external
//! predictors, plus cross-validation fold splits.
//!
//! The JSON layout follows COCO: top-level `images`, `annotations`,
//! `categories`. Masks are stored either as polygon lists (rasterized on
//! demand with even-odd fill at pixel centers) or as uncompressed
//! column-major RLE. Depth images live next to the RGB files as 16-bit
//! millimeter PNGs (see [`depth_io`]). See `docs/FORMATS.md` in the repo
//! root for the field-by-field description.

mod depth_io;
pub mod rle;

pub use depth_io::{encode_depth, meters_to_code, read_depth, write_depth};
pub use rle::{decode_rle, encode_rle, Rle};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::mask::Mask;
use crate::rng::{rng_for, Stream};

/// Canonical keypoint names in their fixed order.
pub const KEYPOINT_NAMES: [&str; 5] =
    ["felling_cut", "diameter_left", "diameter_right", "inclination_mid", "inclination_top"];

/// Skeleton edges (1-indexed into the keypoint list, COCO convention).
pub const SKELETON: [[u32; 2]; 3] = [[2, 3], [1, 4], [4, 5]];

pub const TREE_CATEGORY: &str = "tree";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not valid JSON: {message}")]
    Json { path: String, message: String },
    #[error("invalid dataset: {}", format_issues(.issues))]
    Invalid { issues: Vec<RecordIssue> },
    #[error("image error: {message}")]
    Image { message: String },
    #[error("{path}: depth images must be 16-bit single-channel PNG, found {found}")]
    DepthFormat { path: String, found: String },
    #[error("RLE counts cover {actual} pixels, mask has {expected}")]
    RleLength { expected: u64, actual: u64 },
    #[error("need at least {needed} images for {folds} folds, have {have}")]
    TooFewImages { needed: usize, folds: usize, have: usize },
    #[error("fold count must be at least 3, got {0}")]
    BadFoldCount(usize),
}

fn format_issues(issues: &[RecordIssue]) -> String {
    let shown: Vec<String> = issues.iter().take(8).map(|i| i.to_string()).collect();
    let mut s = format!("{} issue(s): {}", issues.len(), shown.join("; "));
    if issues.len() > 8 {
        s.push_str("; ...");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Section {
    Images,
    Annotations,
    Categories,
    File,
}

/// One rejected or flagged record, with enough context to find it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordIssue {
    pub section: Section,
    pub index: usize,
    pub id: Option<u64>,
    pub reason: String,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            Some(id) => write!(f, "{:?}[{}] (id {}): {}", self.section, self.index, id, self.reason),
            None => write!(f, "{:?}[{}]: {}", self.section, self.index, self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: u64,
    pub file_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_file_name: Option<String>,
    pub width: u32,
    pub height: u32,
}

/// Mask geometry: COCO polygons or uncompressed RLE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle(Rle),
}

impl Segmentation {
    /// Rasterizes to a dense mask at the given image dimensions.
    pub fn to_mask(&self, width: u32, height: u32) -> Result<Mask, DatasetError> {
        match self {
            Segmentation::Polygons(polys) => Ok(Mask::from_polygons(width, height, polys)),
            Segmentation::Rle(rle) => decode_rle(rle, width, height),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// `[x, y, w, h]` in pixels, clipped to image bounds on write.
    pub bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<Segmentation>,
    pub area: f64,
    /// Flat `[u, v, flag]` triples for the 5 keypoints; flag 0 = unlabeled,
    /// 1 = labeled but occluded, 2 = visible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_keypoints: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occlusion_tree: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occlusion_base: Option<f64>,
    /// Camera-to-trunk-base distance in meters (synthetic data carries it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    #[serde(default)]
    pub iscrowd: u8,
}

impl AnnotationRecord {
    pub fn mask(&self, width: u32, height: u32) -> Result<Option<Mask>, DatasetError> {
        self.segmentation.as_ref().map(|s| s.to_mask(width, height)).transpose()
    }

    /// Keypoint at `index` as (u, v, flag), when keypoints are present.
    pub fn keypoint(&self, index: usize) -> Option<(f64, f64, u8)> {
        let kps = self.keypoints.as_ref()?;
        let base = index * 3;
        if base + 2 >= kps.len() {
            return None;
        }
        Some((kps[base], kps[base + 1], kps[base + 2] as u8))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDef {
    pub id: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keypoints: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skeleton: Vec<[u32; 2]>,
}

impl CategoryDef {
    pub fn tree() -> Self {
        CategoryDef {
            id: 1,
            name: TREE_CATEGORY.to_string(),
            keypoints: KEYPOINT_NAMES.iter().map(|s| s.to_string()).collect(),
            skeleton: SKELETON.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub images: Vec<ImageRecord>,
    pub annotations: Vec<AnnotationRecord>,
    pub categories: Vec<CategoryDef>,
}

impl DatasetIndex {
    pub fn image(&self, id: u64) -> Option<&ImageRecord> {
        self.images.iter().find(|i| i.id == id)
    }

    /// Category id of the "tree" class, if declared.
    pub fn tree_category_id(&self) -> Option<u32> {
        self.categories.iter().find(|c| c.name == TREE_CATEGORY).map(|c| c.id)
    }

    /// Annotations that evaluation should consider: the "tree" category when
    /// declared, everything otherwise. Extra categories parse fine but are
    /// ignored here.
    pub fn tree_annotations(&self) -> Vec<&AnnotationRecord> {
        match self.tree_category_id() {
            Some(cat) => self.annotations.iter().filter(|a| a.category_id == cat).collect(),
            None => self.annotations.iter().collect(),
        }
    }

    /// Semantic validation; used by both the strict parser and the writer.
    pub fn validation_issues(&self) -> Vec<RecordIssue> {
        let mut issues = Vec::new();
        let mut image_ids = HashSet::new();
        let mut image_dims: HashMap<u64, (u32, u32)> = HashMap::new();
        for (idx, img) in self.images.iter().enumerate() {
            let mut push = |reason: String| {
                issues.push(RecordIssue { section: Section::Images, index: idx, id: Some(img.id), reason })
            };
            if img.width == 0 || img.height == 0 {
                push(format!("non-positive dimensions {}x{}", img.width, img.height));
            }
            if !image_ids.insert(img.id) {
                push("duplicate image id".into());
            }
            image_dims.insert(img.id, (img.width, img.height));
        }

        let mut ann_ids = HashSet::new();
        for (idx, ann) in self.annotations.iter().enumerate() {
            let mut push = |reason: String| {
                issues.push(RecordIssue { section: Section::Annotations, index: idx, id: Some(ann.id), reason })
            };
            if !ann_ids.insert(ann.id) {
                push("duplicate annotation id".into());
            }
            let dims = image_dims.get(&ann.image_id).copied();
            if dims.is_none() {
                push(format!("dangling image_id {}", ann.image_id));
            }
            let [x, y, w, h] = ann.bbox;
            if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
                push("non-finite bbox".into());
            } else if w <= 0.0 || h <= 0.0 {
                push(format!("non-positive bbox extent {w}x{h}"));
            } else if let Some((iw, ih)) = dims {
                if x < 0.0 || y < 0.0 || x + w > iw as f64 + 1e-6 || y + h > ih as f64 + 1e-6 {
                    push(format!("bbox [{x}, {y}, {w}, {h}] outside image bounds {iw}x{ih}"));
                }
            }
            if let Some(kps) = &ann.keypoints {
                if kps.len() != 15 {
                    push(format!("keypoint arity: expected 15 numbers, got {}", kps.len()));
                } else {
                    let mut labeled = 0u32;
                    for k in 0..5 {
                        let flag = kps[k * 3 + 2];
                        if flag != 0.0 && flag != 1.0 && flag != 2.0 {
                            push(format!("keypoint {k} flag {flag} not in {{0,1,2}}"));
                        }
                        if flag > 0.0 {
                            labeled += 1;
                        }
                    }
                    if let Some(n) = ann.num_keypoints {
                        if n != labeled {
                            push(format!("num_keypoints {n} disagrees with {labeled} labeled flags"));
                        }
                    }
                }
            }
            if let Some(Segmentation::Rle(rle)) = &ann.segmentation {
                if let Some((iw, ih)) = dims {
                    if rle.size != [ih, iw] {
                        push(format!("RLE size {:?} disagrees with image {}x{}", rle.size, iw, ih));
                    } else {
                        let total: u64 = rle.counts.iter().map(|&c| c as u64).sum();
                        if total != (iw as u64) * (ih as u64) {
                            push(format!("RLE counts cover {total} of {} pixels", (iw as u64) * (ih as u64)));
                        } else if (rle.area() as f64 - ann.area).abs() > 0.5 {
                            push(format!("area {} disagrees with mask pixel count {}", ann.area, rle.area()));
                        }
                    }
                }
            }
            for (name, v) in [("occlusion_tree", ann.occlusion_tree), ("occlusion_base", ann.occlusion_base)] {
                if let Some(v) = v {
                    if !(0.0..=1.0).contains(&v) {
                        push(format!("{name} {v} outside [0,1]"));
                    }
                }
            }
            if ann.iscrowd > 1 {
                push(format!("iscrowd {} not in {{0,1}}", ann.iscrowd));
            }
        }

        let mut cat_ids = HashSet::new();
        for (idx, cat) in self.categories.iter().enumerate() {
            let mut push = |reason: String| {
                issues.push(RecordIssue { section: Section::Categories, index: idx, id: Some(cat.id as u64), reason })
            };
            if !cat_ids.insert(cat.id) {
                push("duplicate category id".into());
            }
            if cat.name == TREE_CATEGORY && cat.keypoints.len() != 5 {
                push(format!("category \"tree\" must declare 5 keypoint names, has {}", cat.keypoints.len()));
            }
        }
        issues
    }
}

/// Outcome of a lenient parse: the accepted index plus every rejected
/// record with its reason, so `accepted + rejected = input`.
#[derive(Debug)]
pub struct ParseReport {
    pub index: DatasetIndex,
    pub rejected: Vec<RecordIssue>,
}

#[derive(Deserialize)]
struct RawDataset {
    images: Option<Vec<Value>>,
    annotations: Option<Vec<Value>>,
    categories: Option<Vec<Value>>,
}

fn value_id(v: &Value) -> Option<u64> {
    v.get("id").and_then(Value::as_u64)
}

fn convert_section<T: serde::de::DeserializeOwned>(
    section: Section,
    raw: Vec<Value>,
    rejected: &mut Vec<RecordIssue>,
) -> Vec<(usize, T)> {
    let mut out = Vec::with_capacity(raw.len());
    for (index, value) in raw.into_iter().enumerate() {
        let id = value_id(&value);
        match serde_json::from_value::<T>(value) {
            Ok(rec) => out.push((index, rec)),
            Err(e) => rejected.push(RecordIssue { section, index, id, reason: e.to_string() }),
        }
    }
    out
}

/// Parses a dataset, keeping every well-formed record and collecting one
/// issue per malformed or invariant-violating record. Only file-level
/// failures (unreadable file, non-JSON content, missing top-level arrays)
/// are hard errors.
pub fn parse_dataset_lenient(path: &Path) -> Result<ParseReport, DatasetError> {
    let text =
        fs::read_to_string(path).map_err(|e| DatasetError::Io { path: path.display().to_string(), source: e })?;
    let raw: RawDataset = serde_json::from_str(&text)
        .map_err(|e| DatasetError::Json { path: path.display().to_string(), message: e.to_string() })?;

    let mut file_issues = Vec::new();
    for (key, present) in
        [("images", raw.images.is_some()), ("annotations", raw.annotations.is_some()), ("categories", raw.categories.is_some())]
    {
        if !present {
            file_issues.push(RecordIssue {
                section: Section::File,
                index: 0,
                id: None,
                reason: format!("missing top-level \"{key}\" array"),
            });
        }
    }
    if !file_issues.is_empty() {
        return Err(DatasetError::Invalid { issues: file_issues });
    }

    let mut rejected = Vec::new();
    let images = convert_section::<ImageRecord>(Section::Images, raw.images.unwrap(), &mut rejected);
    let categories = convert_section::<CategoryDef>(Section::Categories, raw.categories.unwrap(), &mut rejected);
    let annotations = convert_section::<AnnotationRecord>(Section::Annotations, raw.annotations.unwrap(), &mut rejected);

    // Stage 1: validate images and categories on their own, drop offenders.
    // Stage 2: validate annotations against the surviving images, so records
    // pointing at a dropped image are rejected as dangling rather than kept.
    fn drop_flagged<T: Clone>(
        section: Section,
        records: Vec<(usize, T)>,
        issues: &[RecordIssue],
        rejected: &mut Vec<RecordIssue>,
    ) -> Vec<(usize, T)> {
        let mut bad: HashSet<usize> = HashSet::new();
        for issue in issues.iter().filter(|i| i.section == section) {
            bad.insert(issue.index);
            rejected.push(RecordIssue { index: records[issue.index].0, ..issue.clone() });
        }
        records.into_iter().enumerate().filter(|(pos, _)| !bad.contains(pos)).map(|(_, r)| r).collect()
    }

    let stage1 = DatasetIndex {
        images: images.iter().map(|(_, r)| r.clone()).collect(),
        annotations: vec![],
        categories: categories.iter().map(|(_, r)| r.clone()).collect(),
    };
    let issues1 = stage1.validation_issues();
    let images = drop_flagged(Section::Images, images, &issues1, &mut rejected);
    let categories = drop_flagged(Section::Categories, categories, &issues1, &mut rejected);

    let stage2 = DatasetIndex {
        images: images.iter().map(|(_, r)| r.clone()).collect(),
        annotations: annotations.iter().map(|(_, r)| r.clone()).collect(),
        categories: categories.iter().map(|(_, r)| r.clone()).collect(),
    };
    let issues2 = stage2.validation_issues();
    let annotations = drop_flagged(Section::Annotations, annotations, &issues2, &mut rejected);

    let index = DatasetIndex {
        images: images.into_iter().map(|(_, r)| r).collect(),
        annotations: annotations.into_iter().map(|(_, r)| r).collect(),
        categories: categories.into_iter().map(|(_, r)| r).collect(),
    };
    rejected.sort_by_key(|i| (i.section as u8 as usize, i.index));
    rejected.dedup_by(|a, b| a.section == b.section && a.index == b.index && a.reason == b.reason);
    Ok(ParseReport { index, rejected })
}

/// Strict parse: any malformed record fails the whole file, reporting every
/// offense at once rather than stopping at the first.
pub fn parse_dataset(path: &Path) -> Result<DatasetIndex, DatasetError> {
    let report = parse_dataset_lenient(path)?;
    if report.rejected.is_empty() {
        Ok(report.index)
    } else {
        Err(DatasetError::Invalid { issues: report.rejected })
    }
}

/// Serializes an index with deterministic field order. The index is
/// validated first; bounding boxes are clipped to image bounds rather than
/// rejected, since clipping is the documented write behavior.
pub fn write_dataset(index: &DatasetIndex, path: &Path) -> Result<(), DatasetError> {
    let clipped = clip_boxes(index);
    let issues = clipped.validation_issues();
    if !issues.is_empty() {
        return Err(DatasetError::Invalid { issues });
    }
    let json = serde_json::to_string_pretty(&clipped)
        .map_err(|e| DatasetError::Json { path: path.display().to_string(), message: e.to_string() })?;
    fs::write(path, json).map_err(|e| DatasetError::Io { path: path.display().to_string(), source: e })
}

fn clip_boxes(index: &DatasetIndex) -> DatasetIndex {
    let dims: HashMap<u64, (u32, u32)> = index.images.iter().map(|i| (i.id, (i.width, i.height))).collect();
    let mut out = index.clone();
    for ann in &mut out.annotations {
        if let Some(&(iw, ih)) = dims.get(&ann.image_id) {
            let (iw, ih) = (iw as f64, ih as f64);
            let [x, y, w, h] = ann.bbox;
            let x0 = x.max(0.0).min(iw);
            let y0 = y.max(0.0).min(ih);
            let x1 = (x + w).max(0.0).min(iw);
            let y1 = (y + h).max(0.0).min(ih);
            ann.bbox = [x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0)];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train_ids: Vec<u64>,
    pub val_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
}

/// Five-fold (by default) cross-validation splits in 60/20/20 proportions:
/// images are shuffled once per seed, cut into `n_folds` balanced blocks,
/// and fold *k* takes block *k* as test, block *k+1* as validation, and the
/// rest as train. Every image appears in exactly one test set.
pub fn make_folds(index: &DatasetIndex, n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>, DatasetError> {
    if n_folds < 3 {
        return Err(DatasetError::BadFoldCount(n_folds));
    }
    let n = index.images.len();
    if n < n_folds {
        return Err(DatasetError::TooFewImages { needed: n_folds, folds: n_folds, have: n });
    }
    let mut ids: Vec<u64> = index.images.iter().map(|i| i.id).collect();
    ids.sort_unstable();
    use rand::seq::SliceRandom;
    ids.shuffle(&mut rng_for(seed, Stream::Fold, 0, 0));

    let boundary = |b: usize| b * n / n_folds;
    let block = |b: usize| &ids[boundary(b)..boundary(b + 1)];

    let mut folds = Vec::with_capacity(n_folds);
    for k in 0..n_folds {
        let val_block = (k + 1) % n_folds;
        let mut test_ids: Vec<u64> = block(k).to_vec();
        let mut val_ids: Vec<u64> = block(val_block).to_vec();
        let mut train_ids: Vec<u64> = (0..n_folds)
            .filter(|&b| b != k && b != val_block)
            .flat_map(|b| block(b).iter().copied())
            .collect();
        test_ids.sort_unstable();
        val_ids.sort_unstable();
        train_ids.sort_unstable();
        folds.push(FoldSplit { fold_index: k, train_ids, val_ids, test_ids });
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_index(n_images: usize) -> DatasetIndex {
        DatasetIndex {
            images: (0..n_images)
                .map(|i| ImageRecord {
                    id: i as u64 + 1,
                    file_name: format!("img_{i}.png"),
                    depth_file_name: None,
                    width: 64,
                    height: 48,
                })
                .collect(),
            annotations: vec![],
            categories: vec![CategoryDef::tree()],
        }
    }

    #[test]
    fn folds_100_images_are_60_20_20() {
        let folds = make_folds(&minimal_index(100), 5, 9).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(f.train_ids.len(), 60);
            assert_eq!(f.val_ids.len(), 20);
            assert_eq!(f.test_ids.len(), 20);
        }
    }

    #[test]
    fn folds_5_images_have_singleton_disjoint_tests() {
        let folds = make_folds(&minimal_index(5), 5, 3).unwrap();
        let mut seen = HashSet::new();
        for f in &folds {
            assert_eq!(f.test_ids.len(), 1);
            assert!(seen.insert(f.test_ids[0]));
        }
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn fold_test_sets_cover_all_images() {
        for n in [7usize, 23, 64, 101] {
            let index = minimal_index(n);
            let folds = make_folds(&index, 5, 17).unwrap();
            let mut covered: Vec<u64> = folds.iter().flat_map(|f| f.test_ids.iter().copied()).collect();
            covered.sort_unstable();
            let mut all: Vec<u64> = index.images.iter().map(|i| i.id).collect();
            all.sort_unstable();
            assert_eq!(covered, all, "n = {n}");
            for f in &folds {
                let mut union: HashSet<u64> = f.train_ids.iter().copied().collect();
                for id in f.val_ids.iter().chain(&f.test_ids) {
                    assert!(union.insert(*id), "overlap in fold {}", f.fold_index);
                }
                assert_eq!(union.len(), n);
            }
        }
    }

    #[test]
    fn too_few_images_rejected() {
        assert!(matches!(make_folds(&minimal_index(3), 5, 0), Err(DatasetError::TooFewImages { .. })));
    }

    #[test]
    fn folds_deterministic_per_seed() {
        let a = make_folds(&minimal_index(40), 5, 11).unwrap();
        let b = make_folds(&minimal_index(40), 5, 11).unwrap();
        let c = make_folds(&minimal_index(40), 5, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
