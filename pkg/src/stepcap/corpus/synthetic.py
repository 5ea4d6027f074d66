"""Synthetic cooking-corpus generator.

Captions follow a fixed template (ACTION the [MODIFIER] INGREDIENT in the
COOKWARE). ASR is derived from the caption by word dropout, synonym noise and
filler insertion, with a configurable set of words (cookware by default) that
are never spoken. Frame features are sums of fixed random object-embedding
vectors for the objects visually present (true objects plus random
distractors) with Gaussian noise, so captions are recoverable from
ASR + frames but not from ASR alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ValidationError
from ..seeding import rng_for
from .types import Corpus, FrameFeatureSet, Segment, TokenSequence, Video

DEFAULT_FILLERS = (
    "um", "uh", "okay", "so", "now", "gonna", "like", "just",
    "well", "you", "know", "alright",
)


@dataclass(frozen=True)
class SynthSpec:
    """Declarative recipe for a synthetic corpus."""

    actions: tuple[str, ...]
    ingredients: tuple[str, ...]
    cookware: tuple[str, ...]
    modifiers: tuple[str, ...] = ()
    fillers: tuple[str, ...] = DEFAULT_FILLERS
    synonyms: dict[str, str] = field(default_factory=dict)
    num_videos: int = 200
    segments_per_video: int = 5
    p_drop: float = 0.3  # per-word caption->ASR dropout
    p_synonym: float = 0.2  # spoken ingredient replaced by its synonym
    p_modifier: float = 0.8  # caption carries a modifier slot
    filler_rate: float = 1.0  # expected fillers per caption token
    unspoken: tuple[str, ...] | None = None  # never in ASR; default: cookware
    visual_words: tuple[str, ...] | None = None  # encoded in frames; default: objects
    p_distractor: float = 0.5  # extra visually-present object of each kind
    feature_dim: int = 48
    frame_noise: float = 1.0  # per-component Gaussian std
    frames_min: int = 4
    frames_max: int = 10
    action_weights: tuple[float, ...] | None = None
    cookware_weights: tuple[float, ...] | None = None
    segment_duration_s: tuple[float, float] = (20.0, 40.0)

    def __post_init__(self):
        if not self.actions or not self.ingredients or not self.cookware:
            raise ValidationError("synthetic spec has an empty word list")
        if self.unspoken is None:
            object.__setattr__(self, "unspoken", tuple(self.cookware))
        if self.visual_words is None:
            object.__setattr__(
                self, "visual_words", tuple(self.ingredients) + tuple(self.cookware)
            )
        for name, weights, words in (
            ("action_weights", self.action_weights, self.actions),
            ("cookware_weights", self.cookware_weights, self.cookware),
        ):
            if weights is not None and len(weights) != len(words):
                raise ValidationError(f"{name} length does not match its word list")
        if self.feature_dim <= 0:
            raise ValidationError("feature_dim must be positive")
        if not 0 < self.frames_min <= self.frames_max:
            raise ValidationError("need 0 < frames_min <= frames_max")

    def object_words(self) -> tuple[str, ...]:
        """The preset's object labels (for the oracle detector)."""
        return tuple(self.ingredients) + tuple(self.cookware)


def _normalize(weights, n) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    arr = np.asarray(weights, dtype=float)
    return arr / arr.sum()


def object_embeddings(spec: SynthSpec, seed: int) -> dict[str, np.ndarray]:
    """Fixed random unit embedding per visually-encodable word."""
    out = {}
    for word in spec.visual_words:
        vec = rng_for("synth-objemb", seed, word).normal(size=spec.feature_dim)
        out[word] = vec / np.linalg.norm(vec)
    return out


def _make_asr(caption: list[str], spec: SynthSpec, rng: np.random.Generator) -> list[str]:
    unspoken = set(spec.unspoken)
    spoken: list[str] = []
    for tok in caption:
        if tok in unspoken:
            continue
        if rng.random() < spec.p_drop:
            continue
        if tok in spec.synonyms and rng.random() < spec.p_synonym:
            tok = spec.synonyms[tok]
        spoken.append(tok)
    n_fillers = int(rng.poisson(spec.filler_rate * len(caption))) if spec.fillers else 0
    for _ in range(n_fillers):
        filler = spec.fillers[int(rng.integers(len(spec.fillers)))]
        pos = int(rng.integers(len(spoken) + 1))
        spoken.insert(pos, filler)
    return spoken


def _make_frames(
    present: list[str],
    emb: dict[str, np.ndarray],
    spec: SynthSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    n_frames = int(rng.integers(spec.frames_min, spec.frames_max + 1))
    base = np.zeros(spec.feature_dim)
    for word in present:
        base = base + emb[word]
    noise = rng.normal(scale=spec.frame_noise, size=(n_frames, spec.feature_dim))
    return (base[None, :] + noise).astype(np.float32)


def generate_synthetic_corpus(spec: SynthSpec, seed: int) -> Corpus:
    """Deterministically generate a corpus from the spec and seed."""
    emb = object_embeddings(spec, seed)
    p_action = _normalize(spec.action_weights, len(spec.actions))
    p_cookware = _normalize(spec.cookware_weights, len(spec.cookware))
    videos = []
    for v in range(spec.num_videos):
        video_id = f"synth{v:04d}"
        rng = rng_for("synth-video", seed, video_id)
        segments = []
        cursor = rng.uniform(0.0, 5.0)
        for k in range(spec.segments_per_video):
            action = spec.actions[int(rng.choice(len(spec.actions), p=p_action))]
            ingredient = spec.ingredients[int(rng.integers(len(spec.ingredients)))]
            cookware = spec.cookware[int(rng.choice(len(spec.cookware), p=p_cookware))]
            caption = [action, "the"]
            if spec.modifiers and rng.random() < spec.p_modifier:
                caption.append(spec.modifiers[int(rng.integers(len(spec.modifiers)))])
            caption += [ingredient, "in", "the", cookware]

            asr = _make_asr(caption, spec, rng)

            present = [w for w in (ingredient, cookware) if w in emb]
            others_ing = [w for w in spec.ingredients if w != ingredient and w in emb]
            others_cook = [w for w in spec.cookware if w != cookware and w in emb]
            if others_ing and rng.random() < spec.p_distractor:
                present.append(others_ing[int(rng.integers(len(others_ing)))])
            if others_cook and rng.random() < spec.p_distractor:
                present.append(others_cook[int(rng.integers(len(others_cook)))])
            frames = _make_frames(present, emb, spec, rng)

            duration = rng.uniform(*spec.segment_duration_s)
            start = cursor
            end = start + duration
            cursor = end + rng.uniform(0.5, 3.0)
            segments.append(
                Segment(
                    segment_id=f"{video_id}_seg{k}",
                    start_s=round(start, 3),
                    end_s=round(end, 3),
                    caption=TokenSequence(tuple(caption), "caption"),
                    asr=TokenSequence(tuple(asr), "asr"),
                    frames=FrameFeatureSet(frames),
                )
            )
        videos.append(
            Video(
                video_id=video_id,
                duration_s=round(cursor + 2.0, 3),
                segments=tuple(segments),
            )
        )
    return Corpus(videos=tuple(videos), feature_dim=spec.feature_dim)


def acceptance_preset() -> SynthSpec:
    """The 1000-segment preset used by the acceptance suite.

    Sized so that ASR alone cannot recover cookware (never spoken), frames
    reveal objects imperfectly (distractors + noise), and the caption
    combination space (8 actions x 10 modifiers x 16 ingredients) is much
    larger than the training set, so verbatim retrieval cannot cover test
    combinations that a generator composes freely.
    """
    return SynthSpec(
        actions=("chop", "stir", "heat", "slice", "whisk", "rinse", "toss", "grate"),
        ingredients=(
            "onion", "carrot", "tomato", "garlic", "pepper", "mushroom",
            "potato", "eggplant", "spinach", "tofu", "leek", "zucchini",
            "ginger", "cabbage", "celery", "radish",
        ),
        cookware=("skillet", "saucepan", "wok", "griddle"),
        modifiers=(
            "fresh", "diced", "large", "crispy", "tender",
            "golden", "ripe", "small", "sliced", "whole",
        ),
        synonyms={
            "eggplant": "aubergine",
            "spinach": "greens",
            "tofu": "beancurd",
            "garlic": "cloves",
            "potato": "spuds",
            "zucchini": "courgette",
        },
        num_videos=200,
        segments_per_video=5,
        p_drop=0.35,
        p_synonym=0.2,
        p_modifier=0.9,
        filler_rate=1.0,
        p_distractor=0.6,
        feature_dim=48,
        frame_noise=1.0,
        action_weights=(0.22, 0.18, 0.15, 0.12, 0.10, 0.09, 0.08, 0.06),
        cookware_weights=(0.45, 0.30, 0.15, 0.10),
    )


def tiny_preset() -> SynthSpec:
    """A very small corpus for fast smoke tests."""
    base = acceptance_preset()
    return replace(base, num_videos=12, segments_per_video=3)
