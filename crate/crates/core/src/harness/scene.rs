//! Scenes and their on-disk formats.
//!
//! JSONL holds one scene per line: `{"id": ..., "boxes": [...], "gts": [...]}`
//! plus any extra keys, which are kept in order. Writing a file that was read
//! reproduces it byte for byte when it used the canonical layout (compact
//! separators, shortest round-trip numbers).
//!
//! The KITTI layout is a directory of `<id>.txt` label files. A file may mix
//! ground-truth lines (15 fields) and detection lines (16 fields).

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::kitti::{parse_kitti_file, KittiObject};
use crate::boxes::{DetectionBox, GroundTruth};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    #[serde(default)]
    pub boxes: Vec<DetectionBox>,
    #[serde(default)]
    pub gts: Vec<GroundTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Scene {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            boxes: Vec::new(),
            gts: Vec::new(),
            camera: None,
            extra: Map::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    #[default]
    Jsonl,
    Kitti,
}

impl DataFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "jsonl" => Some(Self::Jsonl),
            "kitti" => Some(Self::Kitti),
            _ => None,
        }
    }
}

fn check_unique(scenes: &[Scene]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in scenes {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::InvalidConfig(format!("duplicate scene id {:?}", s.id)));
        }
    }
    Ok(())
}

/// Reads one scene per non-blank line. Errors carry the 1-based line number.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let scene = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?;
        scenes.push(scene);
    }
    check_unique(&scenes)?;
    Ok(scenes)
}

pub fn scene_to_json_line(scene: &Scene) -> String {
    serde_json::to_string(scene).expect("scenes always serialize")
}

pub fn write_jsonl(mut writer: impl Write, scenes: &[Scene]) -> Result<()> {
    for s in scenes {
        writer.write_all(scene_to_json_line(s).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

fn kitti_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::from(e).in_file(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn read_kitti_file(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let (boxes, gts) = parse_kitti_file(&text).map_err(|e| e.in_file(path))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Scene {
        boxes,
        gts,
        ..Scene::new(id)
    })
}

/// Reads a directory of label files (sorted by name) or a single file. The
/// scene id is the file stem.
pub fn read_kitti(path: &Path) -> Result<Vec<Scene>> {
    if path.is_dir() {
        kitti_files(path)?.iter().map(|p| read_kitti_file(p)).collect()
    } else {
        Ok(vec![read_kitti_file(path)?])
    }
}

/// Label file text for one scene: ground truths first, then detections.
pub fn scene_to_kitti(scene: &Scene) -> String {
    let mut out = String::new();
    let lines = scene
        .gts
        .iter()
        .map(KittiObject::from_ground_truth)
        .chain(scene.boxes.iter().map(KittiObject::from_detection));
    for o in lines {
        out.push_str(&o.to_line());
        out.push('\n');
    }
    out
}

pub fn write_kitti(dir: &Path, scenes: &[Scene]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    for s in scenes {
        let path = dir.join(format!("{}.txt", s.id));
        fs::write(&path, scene_to_kitti(s)).map_err(|e| Error::from(e).in_file(&path))?;
    }
    Ok(())
}

/// Reads scenes from a file (JSONL) or a directory or file (KITTI).
pub fn read_scenes(path: &Path, format: DataFormat) -> Result<Vec<Scene>> {
    match format {
        DataFormat::Jsonl => {
            let file = fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
            read_jsonl(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
        }
        DataFormat::Kitti => read_kitti(path),
    }
}

pub fn write_scenes(path: &Path, format: DataFormat, scenes: &[Scene]) -> Result<()> {
    match format {
        DataFormat::Jsonl => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::from(e).in_file(parent))?;
            }
            let file = fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
            write_jsonl(std::io::BufWriter::new(file), scenes).map_err(|e| e.in_file(path))
        }
        DataFormat::Kitti => write_kitti(path, scenes),
    }
}

/// Copies ground truths from `labels` into the scenes with the same id.
/// Scenes without a label entry keep their own ground truths.
pub fn attach_ground_truth(scenes: &mut [Scene], labels: Vec<Scene>) {
    let mut by_id: std::collections::HashMap<String, Vec<GroundTruth>> =
        labels.into_iter().map(|s| (s.id, s.gts)).collect();
    for s in scenes {
        if let Some(gts) = by_id.remove(&s.id) {
            s.gts = gts;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"000001","boxes":[{"x1":10.0,"y1":20.0,"x2":50.0,"y2":60.0,"cx":1.0,"cy":1.5,"cz":20.0,"w":1.6,"h":1.5,"l":3.9,"yaw":0.1,"score":0.9,"class_conf":0.95,"pred_conf":0.8,"tag":[1,2]}],"gts":[{"x1":11.0,"y1":20.0,"x2":50.0,"y2":61.0,"cx":1.0,"cy":1.5,"cz":20.2,"w":1.6,"h":1.5,"l":3.9,"yaw":0.1,"class":"Car","occluded":1}],"camera":"P2","weather":"sunny"}"#;

    #[test]
    fn jsonl_round_trip_is_byte_identical() {
        let text = format!("{LINE}\n{}\n", LINE.replace("000001", "000002"));
        let scenes = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(scenes.len(), 2);
        assert_eq!(scenes[0].boxes[0].class_conf, Some(0.95));
        assert_eq!(scenes[0].gts[0].occluded, 1);
        assert_eq!(scenes[0].extra["weather"], "sunny");
        assert_eq!(scenes[0].boxes[0].extra["tag"], serde_json::json!([1, 2]));
        let mut out = Vec::new();
        write_jsonl(&mut out, &scenes).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn bad_line_is_reported() {
        let text = format!("{LINE}\n{{\"id\": 3, oops}}\n");
        match read_jsonl(text.as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = format!("{LINE}\n{LINE}\n");
        assert!(matches!(read_jsonl(text.as_bytes()), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn kitti_text_round_trip() {
        let scene = read_jsonl(LINE.as_bytes()).unwrap().remove(0);
        let text = scene_to_kitti(&scene);
        let (boxes, gts) = parse_kitti_file(&text).unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(gts.len(), 1);
        assert_eq!(gts[0].cuboid, scene.gts[0].cuboid);
        assert_eq!(boxes[0].rect, scene.boxes[0].rect);
        assert_eq!(boxes[0].score, 0.9);
        let again = Scene { boxes, gts, ..Scene::new("x") };
        assert_eq!(scene_to_kitti(&again), text);
    }
}
