"""Corpus file ingestion and emission.

Corpus file: JSON-lines, one object per video:
  {video_id, duration_s, segments:[{segment_id, start_s, end_s,
   caption: string, asr: [string], features_ref: string|null}]}

Feature file: 16-byte header (magic "CFWF", u32 rows, u32 cols, u32 reserved),
then row-major little-endian float32; one file per segment, named by
features_ref inside the features directory.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from .types import Corpus, FrameFeatureSet, Segment, TokenSequence, Video

FEATURE_MAGIC = b"CFWF"
_HEADER = struct.Struct("<4sIII")


def write_features(path: str | Path, matrix: np.ndarray) -> None:
    """Write one segment's frame feature matrix as a CFWF file."""
    mat = np.ascontiguousarray(np.asarray(matrix, dtype="<f4"))
    if mat.ndim != 2:
        raise ValidationError(f"feature matrix must be 2-D, got shape {mat.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, mat.shape[0], mat.shape[1], 0))
        fh.write(mat.tobytes())


def read_features(path: str | Path) -> np.ndarray:
    """Read a CFWF feature file into a (rows, cols) float32 matrix."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParseError(f"feature file {path}: truncated header")
    magic, rows, cols, _reserved = _HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        raise ParseError(f"feature file {path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * rows * cols
    if len(raw) != expected:
        raise ParseError(
            f"feature file {path}: expected {expected} bytes, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return data.reshape(rows, cols).astype(np.float32)


def _parse_video(record: dict, features_dir: Path | None, line: int) -> tuple[Video, dict[str, str]]:
    try:
        video_id = str(record["video_id"])
        duration_s = float(record["duration_s"])
        raw_segments = record["segments"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad video record: {exc}", line=line) from exc
    segments = []
    refs: dict[str, str] = {}
    for raw in raw_segments:
        try:
            seg_id = str(raw["segment_id"])
            start_s = float(raw["start_s"])
            end_s = float(raw["end_s"])
            caption = TokenSequence.from_text(str(raw["caption"]), "caption")
            asr = TokenSequence.from_tokens(list(raw["asr"]), "asr")
            ref = raw.get("features_ref")
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad segment record: {exc}", line=line) from exc
        if ref is not None:
            if features_dir is None:
                raise ValidationError(
                    f"segment {seg_id!r} references features {ref!r} "
                    "but no features_dir was given"
                )
            path = features_dir / str(ref)
            if not path.is_file():
                raise ValidationError(f"segment {seg_id!r}: missing feature file {path}")
            frames = FrameFeatureSet(read_features(path))
            refs[seg_id] = str(ref)
        else:
            frames = FrameFeatureSet.empty(0)
        segments.append(
            Segment(
                segment_id=seg_id,
                start_s=start_s,
                end_s=end_s,
                caption=caption,
                asr=asr,
                frames=frames,
            )
        )
    video = Video(
        video_id=video_id,
        duration_s=duration_s,
        segments=tuple(segments),
        language_hint=record.get("language_hint"),
    )
    return video, refs


def ingest(corpus_path: str | Path, features_dir: str | Path | None = None) -> Corpus:
    """Load and fully validate a JSON-lines corpus file.

    Raises ParseError (with the line number) on malformed records and
    ValidationError on invariant violations, including feature-dimension
    mismatches across segments.
    """
    corpus_path = Path(corpus_path)
    fdir = Path(features_dir) if features_dir is not None else None
    videos: list[Video] = []
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
            video, _ = _parse_video(record, fdir, line_no)
            videos.append(video)
    feature_dim = 0
    for video in videos:
        for seg in video.segments:
            if seg.frames.num_frames > 0:
                if feature_dim == 0:
                    feature_dim = seg.frames.dim
                elif seg.frames.dim != feature_dim:
                    raise ValidationError(
                        f"segment {seg.segment_id!r}: feature dim {seg.frames.dim} "
                        f"!= corpus dim {feature_dim}"
                    )
    return Corpus(videos=tuple(videos), feature_dim=feature_dim)


def emit(corpus: Corpus, corpus_path: str | Path, features_dir: str | Path | None = None) -> None:
    """Write a corpus back to the JSON-lines + CFWF on-disk layout.

    features_dir is required when any segment carries frames.
    """
    corpus_path = Path(corpus_path)
    fdir = Path(features_dir) if features_dir is not None else None
    lines = []
    for video in corpus.videos:
        segments = []
        for seg in video.segments:
            ref = None
            if seg.frames.num_frames > 0:
                if fdir is None:
                    raise ValidationError(
                        f"segment {seg.segment_id!r} has frames but no features_dir given"
                    )
                fdir.mkdir(parents=True, exist_ok=True)
                ref = f"{seg.segment_id}.cfwf"
                write_features(fdir / ref, seg.frames.matrix)
            segments.append(
                {
                    "segment_id": seg.segment_id,
                    "start_s": seg.start_s,
                    "end_s": seg.end_s,
                    "caption": seg.caption.text(),
                    "asr": list(seg.asr.tokens),
                    "features_ref": ref,
                }
            )
        record = {
            "video_id": video.video_id,
            "duration_s": video.duration_s,
            "segments": segments,
        }
        if video.language_hint is not None:
            record["language_hint"] = video.language_hint
        lines.append(json.dumps(record, sort_keys=True))
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
