//! Trajectory CSV (`entity_id,point_id,frame,x,y`) and manifest TSV
//! (`label<TAB>path`) readers and writers.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::traj::{EntityTrack, Sample, Scene, Trajectory};

pub const CSV_HEADER: [&str; 5] = ["entity_id", "point_id", "frame", "x", "y"];

#[derive(Debug, Deserialize)]
struct Row {
    entity_id: String,
    point_id: String,
    frame: i64,
    x: f64,
    y: f64,
}

pub fn read_scene_csv(path: &Path) -> Result<Scene> {
    let file = fs::File::open(path)
        .map_err(|e| Error::io(format!("cannot open {}", path.display()), e))?;
    read_scene(file, path)
}

/// Parse a scene from CSV. Rows may come in any order; samples are sorted by
/// frame per trajectory. `source` only labels error messages.
pub fn read_scene<R: Read>(reader: R, source: &Path) -> Result<Scene> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(parse_err(
            1,
            format!("expected header `{}`", CSV_HEADER.join(",")),
        ));
    }

    // entity -> point -> (first line, samples); insertion order kept separately
    let mut entity_order: Vec<String> = Vec::new();
    let mut points: HashMap<String, Vec<String>> = HashMap::new();
    let mut samples: HashMap<(String, String), (u64, Vec<(Sample, u64)>)> = HashMap::new();

    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;
        if !row.x.is_finite() || !row.y.is_finite() {
            return Err(parse_err(line, "non-finite coordinate".into()));
        }
        if !points.contains_key(&row.entity_id) {
            entity_order.push(row.entity_id.clone());
            points.insert(row.entity_id.clone(), Vec::new());
        }
        let key = (row.entity_id.clone(), row.point_id.clone());
        let entry = samples.entry(key).or_insert_with(|| {
            points
                .get_mut(&row.entity_id)
                .unwrap()
                .push(row.point_id.clone());
            (line, Vec::new())
        });
        entry.1.push((Sample::new(row.frame, row.x, row.y), line));
    }
    if entity_order.is_empty() {
        return Err(parse_err(1, "no samples".into()));
    }

    let mut tracks = Vec::with_capacity(entity_order.len());
    for entity in entity_order {
        let mut trajs = Vec::new();
        for point in &points[&entity] {
            let (first_line, mut rows) = samples.remove(&(entity.clone(), point.clone())).unwrap();
            rows.sort_by_key(|(s, _)| s.frame);
            if let Some(w) = rows.windows(2).find(|w| w[0].0.frame == w[1].0.frame) {
                return Err(parse_err(
                    w[0].1.max(w[1].1),
                    format!(
                        "duplicate frame {} for point `{point}` of entity `{entity}`",
                        w[0].0.frame
                    ),
                ));
            }
            let traj = Trajectory::new(point.clone(), rows.into_iter().map(|(s, _)| s).collect())
                .map_err(|e| parse_err(first_line, e.to_string()))?;
            trajs.push(traj);
        }
        tracks.push(EntityTrack::new(entity, trajs)?);
    }
    Scene::new(tracks)
}

pub fn write_scene<W: Write>(scene: &Scene, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::io("writing scene csv", std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for track in scene.tracks() {
        for traj in track.trajectories() {
            for s in traj.samples() {
                w.write_record([
                    track.entity_id(),
                    traj.point_id(),
                    &s.frame.to_string(),
                    &s.x.to_string(),
                    &s.y.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()
        .map_err(|e| Error::io("writing scene csv", e))
}

pub fn write_scene_csv(scene: &Scene, path: &Path) -> Result<()> {
    let file = fs::File::create(path)
        .map_err(|e| Error::io(format!("cannot create {}", path.display()), e))?;
    write_scene(scene, std::io::BufWriter::new(file))
}

/// One manifest line. `label` is `None` for unlabeled items.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub label: Option<String>,
    /// The path as written in the manifest; used as the item id.
    pub id: String,
    /// The path resolved against the manifest's directory.
    pub path: PathBuf,
}

/// Read a manifest: one item per line, `label<TAB>path` or a bare `path`.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, rel) = match line.split_once('\t') {
            Some((l, p)) => (Some(l.trim().to_string()).filter(|l| !l.is_empty()), p.trim()),
            None => (None, line.trim()),
        };
        if rel.is_empty() || rel.contains('\t') {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message: "expected `label<TAB>path`".into(),
            });
        }
        if entries.iter().any(|e| e.id == rel) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message: format!("duplicate item `{rel}`"),
            });
        }
        entries.push(ManifestEntry {
            label,
            id: rel.to_string(),
            path: base.join(rel),
        });
    }
    Ok(entries)
}

pub fn write_manifest(path: &Path, entries: &[(Option<&str>, &str)]) -> Result<()> {
    let mut out = String::new();
    for (label, rel) in entries {
        if let Some(l) = label {
            out.push_str(l);
            out.push('\t');
        }
        out.push_str(rel);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(format!("cannot write {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scene> {
        read_scene(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn groups_and_sorts_rows() {
        let s = parse(
            "entity_id,point_id,frame,x,y\n\
             b,p1,2,0.2,0.0\n\
             a,p0,1,1.0,1.0\n\
             b,p1,0,0.0,0.0\n\
             a,p0,0,0.5,0.5\n\
             b,p1,1,0.1,0.0\n",
        )
        .unwrap();
        assert_eq!(s.tracks().len(), 2);
        assert_eq!(s.tracks()[0].entity_id(), "b");
        let t = &s.tracks()[0].trajectories()[0];
        assert_eq!(
            t.samples().iter().map(|s| s.frame).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(s.frame_range(), (0, 2));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("entity_id,point_id,frame,x,y\na,p,0,0,0\na,p,one,1,1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn wrong_header_and_duplicate_frame() {
        assert!(matches!(
            parse("id,point,frame,x,y\na,p,0,0,0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("entity_id,point_id,frame,x,y\na,p,0,0,0\na,p,0,1,1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("entity_id,point_id,frame,x,y\na,p,0,0,0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let text = "entity_id,point_id,frame,x,y\na,p,0,0.125,3\na,p,5,1e-7,-2.5\n";
        let s = parse(text).unwrap();
        let mut buf = Vec::new();
        write_scene(&s, &mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), s);
    }

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        fs::write(&path, "# comment\nA\ta.csv\n\nb.csv\nB\tsub/c.csv\n").unwrap();
        let m = read_manifest(&path).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].label.as_deref(), Some("A"));
        assert_eq!(m[1].label, None);
        assert_eq!(m[2].path, dir.path().join("sub/c.csv"));

        fs::write(&path, "A\ta.csv\nB\ta.csv\n").unwrap();
        assert!(matches!(read_manifest(&path), Err(Error::Parse { line: 2, .. })));
    }
}
