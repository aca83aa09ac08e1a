//! Clip stream files.
//!
//! A `.jsonl` stream holds one clip: the first line is the manifest header
//! (`clip_id`, `learner_id`, `lesson_id`, `recorded_at`, `fps`) and every
//! following line is one frame record. A `.json` file holds the full
//! manifest with an inline `frames` array, the same document the HTTP
//! ingestion endpoint accepts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clip::{ClipObservation, FramePrediction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipHeader {
    pub clip_id: String,
    pub learner_id: String,
    pub lesson_id: String,
    pub recorded_at: DateTime<Utc>,
    pub fps: f64,
}

pub fn write_clip_stream(clip: &ClipObservation, mut out: impl Write) -> Result<()> {
    let header = ClipHeader {
        clip_id: clip.clip_id.clone(),
        learner_id: clip.learner_id.clone(),
        lesson_id: clip.lesson_id.clone(),
        recorded_at: clip.recorded_at,
        fps: clip.fps,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for frame in &clip.frames {
        serde_json::to_writer(&mut out, frame)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_clip_stream(input: impl BufRead) -> Result<ClipObservation> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
        Ok(l) => !l.trim().is_empty(),
        Err(_) => true,
    });
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::validation("empty clip stream"))?;
    let header: ClipHeader = serde_json::from_str(&first?)
        .map_err(|e| Error::validation(format!("clip stream header: {e}")))?;
    let frames = lines
        .map(|(n, line)| {
            serde_json::from_str::<FramePrediction>(&line?)
                .map_err(|e| Error::validation(format!("clip stream line {}: {e}", n + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClipObservation {
        clip_id: header.clip_id,
        learner_id: header.learner_id,
        lesson_id: header.lesson_id,
        recorded_at: header.recorded_at,
        fps: header.fps,
        frames,
    })
}

pub fn read_clip_file(path: impl AsRef<Path>) -> Result<ClipObservation> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let clip = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_reader(reader)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?
    } else {
        read_clip_stream(reader)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?
    };
    Ok(clip)
}

pub fn write_clip_file(clip: &ClipObservation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    write_clip_stream(clip, BufWriter::new(File::create(path)?))
}

/// All `.jsonl` / `.json` clip files under `dir`, sorted by path.
pub fn find_clip_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        let path = entry.path();
        if entry.file_type().is_file()
            && path
                .extension()
                .is_some_and(|e| e == "jsonl" || e == "json")
        {
            out.push(path.to_path_buf());
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affect::{AffectPoint, HeadPose};
    use crate::clip::{FaceBox, FaceDetection};

    fn sample() -> ClipObservation {
        ClipObservation {
            clip_id: "c-7".into(),
            learner_id: "ana".into(),
            lesson_id: "s1-w1".into(),
            recorded_at: "2024-03-01T10:00:20Z".parse().unwrap(),
            fps: 15.0,
            frames: vec![
                FramePrediction {
                    frame_index: 0,
                    faces: vec![],
                    pose: None,
                    affect: None,
                },
                FramePrediction {
                    frame_index: 1,
                    faces: vec![FaceDetection {
                        bbox: FaceBox::from([0.25, 0.125, 0.5, 0.5]),
                        confidence: 0.93,
                    }],
                    pose: Some(HeadPose::new(3.5, -4.25, 0.5)),
                    affect: Some(AffectPoint::new(2.5, 1.75)),
                },
            ],
        }
    }

    #[test]
    fn stream_round_trip() {
        let clip = sample();
        let mut buf = Vec::new();
        write_clip_stream(&clip, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().contains("\"clip_id\":\"c-7\""));
        assert_eq!(read_clip_stream(&buf[..]).unwrap(), clip);
    }

    #[test]
    fn bad_frame_line_is_reported_with_line_number() {
        let mut buf = Vec::new();
        write_clip_stream(&sample(), &mut buf).unwrap();
        buf.extend_from_slice(b"{\"frame\": \"x\"}\n");
        let err = read_clip_stream(&buf[..]).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn files_in_both_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let clip = sample();
        write_clip_file(&clip, dir.path().join("a/b/c.jsonl")).unwrap();
        std::fs::write(
            dir.path().join("a/m.json"),
            serde_json::to_string(&clip).unwrap(),
        )
        .unwrap();
        std::fs::write(dir.path().join("a/notes.txt"), "ignored").unwrap();
        let files = find_clip_files(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        for f in files {
            assert_eq!(read_clip_file(f).unwrap(), clip);
        }
        assert!(find_clip_files(&dir.path().join("missing"))
            .unwrap()
            .is_empty());
    }
}
