"""Encoder-decoder Transformer with pluggable input modalities.

ASR token embeddings, projected frame features (per-frame linear map) and
oracle object-label embeddings are concatenated into one encoder sequence,
each slice carrying its own modality-type embedding and its own positional
indexing, so encoder self-attention is cross-modal. The decoder attends
causally to itself and to the joint encoder output. Pre-norm residual
blocks; the feed-forward width is tied to the model width.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..corpus.preprocess import PreparedExample
from ..corpus.vocab import BOS, EOS, PAD, Vocabulary
from ..errors import ValidationError
from ..seeding import derive_seed, rng_for
from . import autodiff as ad

MODALITIES = ("asr", "video", "asr+video", "oracle", "asr+oracle")
MOD_TOKEN, MOD_FRAME, MOD_OBJECT = 0, 1, 2


@dataclass(frozen=True)
class HyperParams:
    """Model and training settings; the paper-scale defaults live in
    profiles.paper_profile, desk-scale ones in profiles.desk_profile."""

    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4
    lambda_reg: float = 5e-4
    lr: float = 1e-3
    batch_size: int = 128
    train_steps: int = 2000
    k_frames: int = 10
    max_input_tokens: int = 80
    max_decode_len: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValidationError("d_model must be divisible by n_heads")

    @property
    def d_ffn(self) -> int:
        # feed-forward width tied to the model width
        return self.d_model

    def with_seed(self, seed: int) -> "HyperParams":
        return replace(self, seed=seed)


def sinusoidal_positions(max_len: int, d_model: int) -> np.ndarray:
    positions = np.arange(max_len)[:, None].astype(np.float64)
    dims = np.arange(d_model)[None, :].astype(np.float64)
    angles = positions / np.power(10000.0, 2.0 * (dims // 2) / d_model)
    enc = np.where(dims % 2 == 0, np.sin(angles), np.cos(angles))
    return enc


@dataclass(frozen=True)
class EncoderInputs:
    """Per-segment encoder ingredients, assembled deterministically."""

    token_ids: tuple[int, ...]
    frames: np.ndarray | None  # (k, D_features) sampled + temporally sorted
    object_ids: tuple[int, ...]

    @property
    def length(self) -> int:
        k = 0 if self.frames is None else self.frames.shape[0]
        return len(self.token_ids) + k + len(self.object_ids)


@dataclass
class Batch:
    """Padded numpy arrays for one training/eval batch."""

    token_ids: np.ndarray  # (B, Tt) int
    token_valid: np.ndarray  # (B, Tt) float
    frames: np.ndarray | None  # (B, k, Df)
    frame_valid: np.ndarray | None  # (B, k)
    object_ids: np.ndarray | None  # (B, To)
    object_valid: np.ndarray | None  # (B, To)
    decoder_in: np.ndarray  # (B, Td)
    target_ids: np.ndarray  # (B, Td)
    target_valid: np.ndarray  # (B, Td)
    segment_ids: tuple[str, ...] = ()


class TransformerModel:
    """Encoder-decoder Transformer over a caption vocabulary."""

    def __init__(
        self,
        vocab: Vocabulary,
        hparams: HyperParams,
        modality: str,
        feature_dim: int = 0,
    ):
        if modality not in MODALITIES:
            raise ValidationError(f"unknown modality {modality!r}")
        if "video" in modality and feature_dim <= 0:
            raise ValidationError("video modality requires a positive feature_dim")
        self.vocab = vocab
        self.hparams = hparams
        self.modality = modality
        self.feature_dim = feature_dim
        self.params: dict[str, ad.Tensor] = {}
        self._reg_names: set[str] = set()
        self._pe = sinusoidal_positions(
            max(hparams.max_input_tokens, hparams.max_decode_len, hparams.k_frames) + 8,
            hparams.d_model,
        )
        self._init_params()

    # -- parameters -----------------------------------------------------------

    def _add(self, name: str, shape: tuple[int, ...], kind: str) -> None:
        rng = rng_for("param", self.hparams.seed, name)
        if kind == "zeros":
            data = np.zeros(shape)
        elif kind == "ones":
            data = np.ones(shape)
        elif kind == "small":  # embeddings / output projection
            data = rng.normal(0.0, 0.02, size=shape)
        elif kind == "fan_in":
            data = rng.normal(0.0, 1.0 / np.sqrt(shape[0]), size=shape)
        else:
            raise ValueError(kind)
        self.params[name] = ad.parameter(data)
        if kind == "fan_in":
            self._reg_names.add(name)

    def _add_attention(self, prefix: str) -> None:
        d = self.hparams.d_model
        for proj in ("wq", "wk", "wv", "wo"):
            self._add(f"{prefix}.{proj}", (d, d), "fan_in")
            self._add(f"{prefix}.{proj}_b", (d,), "zeros")

    def _add_block(self, prefix: str, cross: bool) -> None:
        d = self.hparams.d_model
        self._add(f"{prefix}.ln1.g", (d,), "ones")
        self._add(f"{prefix}.ln1.b", (d,), "zeros")
        self._add_attention(f"{prefix}.attn")
        if cross:
            self._add(f"{prefix}.ln_cross.g", (d,), "ones")
            self._add(f"{prefix}.ln_cross.b", (d,), "zeros")
            self._add_attention(f"{prefix}.cross")
        self._add(f"{prefix}.ln2.g", (d,), "ones")
        self._add(f"{prefix}.ln2.b", (d,), "zeros")
        self._add(f"{prefix}.ffn.w1", (d, self.hparams.d_ffn), "fan_in")
        self._add(f"{prefix}.ffn.b1", (self.hparams.d_ffn,), "zeros")
        self._add(f"{prefix}.ffn.w2", (self.hparams.d_ffn, d), "fan_in")
        self._add(f"{prefix}.ffn.b2", (d,), "zeros")

    def _init_params(self) -> None:
        d = self.hparams.d_model
        self._add("token_emb", (len(self.vocab), d), "small")
        self._add("modality_emb", (3, d), "small")
        if "video" in self.modality:
            self._add("frame_proj.w", (self.feature_dim, d), "fan_in")
            self._add("frame_proj.b", (d,), "zeros")
        for i in range(self.hparams.n_layers):
            self._add_block(f"enc{i}", cross=False)
        self._add("enc_ln.g", (d,), "ones")
        self._add("enc_ln.b", (d,), "zeros")
        for i in range(self.hparams.n_layers):
            self._add_block(f"dec{i}", cross=True)
        self._add("dec_ln.g", (d,), "ones")
        self._add("dec_ln.b", (d,), "zeros")
        self._add("out.w", (d, len(self.vocab)), "small")
        self._add("out.b", (len(self.vocab),), "zeros")

    def parameter_snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_parameters(self, snapshot: dict[str, np.ndarray]) -> None:
        if set(snapshot) != set(self.params):
            missing = set(self.params) ^ set(snapshot)
            raise ValidationError(f"parameter name mismatch: {sorted(missing)}")
        for name, data in snapshot.items():
            if self.params[name].data.shape != data.shape:
                raise ValidationError(f"parameter {name!r} shape mismatch")
            self.params[name].data = np.array(data, dtype=np.float64)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    # -- input assembly ---------------------------------------------------------

    def encode_inputs(
        self,
        example: PreparedExample,
        seed: int,
        oracle_labels: tuple[str, ...] = (),
    ) -> EncoderInputs:
        """Assemble one segment's encoder inputs under a run seed.

        Video modalities sample exactly k frames with replacement (temporally
        sorted; zero vectors when the segment has none); oracle modalities
        embed the detected labels as tokens in seeded random order.
        """
        segment = example.segment
        token_ids: tuple[int, ...] = ()
        frames = None
        object_ids: tuple[int, ...] = ()
        if "asr" in self.modality:
            token_ids = example.input_ids
        if "video" in self.modality:
            k = self.hparams.k_frames
            mat = segment.frames.matrix
            if mat.shape[0] == 0:
                frames = np.zeros((k, self.feature_dim))
            else:
                rng = rng_for("frame-sample", seed, segment.segment_id)
                picks = np.sort(rng.integers(0, mat.shape[0], size=k))
                frames = mat[picks].astype(np.float64)
        if "oracle" in self.modality:
            ids = [self.vocab.id_of(w) for w in oracle_labels]
            rng = rng_for("oracle-order", seed, segment.segment_id)
            rng.shuffle(ids)
            object_ids = tuple(ids)
        return EncoderInputs(token_ids=token_ids, frames=frames, object_ids=object_ids)

    def build_batch(
        self,
        examples: list[PreparedExample],
        seed: int,
        oracle_labels: dict[str, tuple[str, ...]] | None = None,
        max_target_len: int | None = None,
    ) -> Batch:
        """Pad per-segment inputs into batch arrays."""
        oracle_labels = oracle_labels or {}
        inputs = [
            self.encode_inputs(ex, seed, oracle_labels.get(ex.segment_id, ()))
            for ex in examples
        ]
        B = len(examples)
        tt = max(1, max(len(i.token_ids) for i in inputs))
        token_ids = np.full((B, tt), PAD, dtype=np.int64)
        token_valid = np.zeros((B, tt))
        for b, inp in enumerate(inputs):
            n = len(inp.token_ids)
            token_ids[b, :n] = inp.token_ids
            token_valid[b, :n] = 1.0
        frames = frame_valid = None
        if "video" in self.modality:
            frames = np.stack([i.frames for i in inputs])
            frame_valid = np.ones((B, self.hparams.k_frames))
        object_ids = object_valid = None
        if "oracle" in self.modality:
            to = max(1, max(len(i.object_ids) for i in inputs))
            object_ids = np.full((B, to), PAD, dtype=np.int64)
            object_valid = np.zeros((B, to))
            for b, inp in enumerate(inputs):
                n = len(inp.object_ids)
                object_ids[b, :n] = inp.object_ids
                object_valid[b, :n] = 1.0
        targets = [ex.target_ids for ex in examples]
        td = max(len(t) for t in targets) - 1
        if max_target_len is not None:
            td = min(td, max_target_len)
        td = max(1, td)
        decoder_in = np.full((B, td), PAD, dtype=np.int64)
        target_ids = np.full((B, td), PAD, dtype=np.int64)
        target_valid = np.zeros((B, td))
        for b, t in enumerate(targets):
            t = t[: td + 1]
            n = len(t) - 1
            decoder_in[b, :n] = t[:-1]
            target_ids[b, :n] = t[1:]
            target_valid[b, :n] = 1.0
        return Batch(
            token_ids=token_ids,
            token_valid=token_valid,
            frames=frames,
            frame_valid=frame_valid,
            object_ids=object_ids,
            object_valid=object_valid,
            decoder_in=decoder_in,
            target_ids=target_ids,
            target_valid=target_valid,
            segment_ids=tuple(ex.segment_id for ex in examples),
        )

    # -- forward ------------------------------------------------------------------

    def _positions_by_rank(self, valid: np.ndarray) -> np.ndarray:
        """Positional encodings indexed by the non-pad rank of each slot, so
        padding placement cannot shift real-token positions."""
        ranks = np.maximum(np.cumsum(valid, axis=-1) - 1, 0).astype(int)
        return self._pe[ranks] * valid[..., None]

    def _attention(self, prefix: str, q_in, kv_in, key_valid, causal: bool):
        hp = self.hparams
        dh = hp.d_model // hp.n_heads
        p = self.params
        B, Tq = q_in.data.shape[0], q_in.data.shape[1]
        Tk = kv_in.data.shape[1]
        q = (q_in @ p[f"{prefix}.wq"] + p[f"{prefix}.wq_b"])
        k = (kv_in @ p[f"{prefix}.wk"] + p[f"{prefix}.wk_b"])
        v = (kv_in @ p[f"{prefix}.wv"] + p[f"{prefix}.wv_b"])
        q = q.reshape(B, Tq, hp.n_heads, dh).transpose(0, 2, 1, 3)
        k = k.reshape(B, Tk, hp.n_heads, dh).transpose(0, 2, 1, 3)
        v = v.reshape(B, Tk, hp.n_heads, dh).transpose(0, 2, 1, 3)
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(dh))
        mask = np.asarray(key_valid)[:, None, None, :]  # (B,1,1,Tk)
        if causal:
            tri = np.tril(np.ones((Tq, Tk)))[None, None, :, :]
            mask = mask * tri
        weights = ad.masked_softmax(scores, mask)
        ctx = (weights @ v).transpose(0, 2, 1, 3).reshape(B, Tq, hp.d_model)
        return ctx @ p[f"{prefix}.wo"] + p[f"{prefix}.wo_b"]

    def _ffn(self, prefix: str, x):
        p = self.params
        hidden = (x @ p[f"{prefix}.w1"] + p[f"{prefix}.b1"]).relu()
        return hidden @ p[f"{prefix}.w2"] + p[f"{prefix}.b2"]

    def _ln(self, prefix: str, x):
        return ad.layer_norm(x, self.params[f"{prefix}.g"], self.params[f"{prefix}.b"])

    def _encode_batch(self, batch: Batch):
        """Returns (encoder output Tensor (B,Te,d), encoder validity (B,Te))."""
        p = self.params
        pieces = []
        valids = []
        if "asr" in self.modality:
            emb = ad.embedding(p["token_emb"], batch.token_ids)
            emb = emb + ad.embedding(p["modality_emb"], np.zeros_like(batch.token_ids))
            emb = emb + ad.Tensor(self._positions_by_rank(batch.token_valid))
            pieces.append(emb)
            valids.append(batch.token_valid)
        if "video" in self.modality:
            proj = ad.Tensor(batch.frames) @ p["frame_proj.w"] + p["frame_proj.b"]
            idx = np.ones_like(batch.frame_valid, dtype=np.int64) * MOD_FRAME
            proj = proj + ad.embedding(p["modality_emb"], idx)
            proj = proj + ad.Tensor(self._positions_by_rank(batch.frame_valid))
            pieces.append(proj)
            valids.append(batch.frame_valid)
        if "oracle" in self.modality:
            emb = ad.embedding(p["token_emb"], batch.object_ids)
            idx = np.ones_like(batch.object_ids) * MOD_OBJECT
            emb = emb + ad.embedding(p["modality_emb"], idx)
            emb = emb + ad.Tensor(self._positions_by_rank(batch.object_valid))
            pieces.append(emb)
            valids.append(batch.object_valid)
        x = pieces[0] if len(pieces) == 1 else ad.concat(pieces, axis=1)
        enc_valid = np.concatenate(valids, axis=1)
        for i in range(self.hparams.n_layers):
            normed = self._ln(f"enc{i}.ln1", x)
            x = x + self._attention(f"enc{i}.attn", normed, normed, enc_valid, causal=False)
            x = x + self._ffn(f"enc{i}.ffn", self._ln(f"enc{i}.ln2", x))
        return self._ln("enc_ln", x), enc_valid

    def _decode_batch(self, batch: Batch, enc_out, enc_valid):
        p = self.params
        dec_valid = (batch.decoder_in != PAD).astype(np.float64)
        dec_valid[:, 0] = 1.0  # BOS slot
        x = ad.embedding(p["token_emb"], batch.decoder_in)
        x = x + ad.Tensor(self._positions_by_rank(dec_valid))
        for i in range(self.hparams.n_layers):
            normed = self._ln(f"dec{i}.ln1", x)
            x = x + self._attention(f"dec{i}.attn", normed, normed, dec_valid, causal=True)
            x = x + self._attention(
                f"dec{i}.cross", self._ln(f"dec{i}.ln_cross", x), enc_out,
                enc_valid, causal=False,
            )
            x = x + self._ffn(f"dec{i}.ffn", self._ln(f"dec{i}.ln2", x))
        x = self._ln("dec_ln", x)
        return x @ p["out.w"] + p["out.b"]

    def forward_logits(self, batch: Batch) -> ad.Tensor:
        enc_out, enc_valid = self._encode_batch(batch)
        return self._decode_batch(batch, enc_out, enc_valid)

    def forward(self, batch: Batch) -> tuple[ad.Tensor, ad.Tensor]:
        """Teacher-forced loss (cross-entropy over non-pad targets plus the
        L2 weight-matrix regularizer) and the raw logits."""
        logits = self.forward_logits(batch)
        loss = ad.softmax_cross_entropy(logits, batch.target_ids, batch.target_valid)
        if self.hparams.lambda_reg > 0:
            reg = None
            for name in sorted(self._reg_names):
                term = (self.params[name] ** 2.0).sum()
                reg = term if reg is None else reg + term
            if reg is not None:
                loss = loss + self.hparams.lambda_reg * reg
        if not np.isfinite(loss.data):
            raise ValidationError(
                f"non-finite loss ({loss.data}); modality={self.modality}, "
                f"d_model={self.hparams.d_model}"
            )
        return loss, logits

    def step_distributions(self, batch: Batch) -> np.ndarray:
        """Per-step next-token distributions (B, Td, V), softmax-normalized."""
        logits = self.forward_logits(batch).data
        shifted = logits - logits.max(axis=-1, keepdims=True)
        expd = np.exp(shifted)
        return expd / expd.sum(axis=-1, keepdims=True)

    # -- decoding ---------------------------------------------------------------

    def greedy_decode(
        self,
        examples: list[PreparedExample],
        seed: int,
        oracle_labels: dict[str, tuple[str, ...]] | None = None,
    ) -> list[tuple[str, ...]]:
        """Batched greedy decoding; deterministic in (parameters, inputs, seed).

        Ties break toward the lowest token id; generation stops at EOS or
        max_decode_len; BOS/EOS are stripped from the output tokens.
        """
        if not examples:
            return []
        max_len = self.hparams.max_decode_len
        batch = self.build_batch(examples, seed, oracle_labels)
        enc_out, enc_valid = self._encode_batch(batch)
        B = len(examples)
        if max_len <= 0:
            return [() for _ in range(B)]
        tokens = np.full((B, 1), BOS, dtype=np.int64)
        finished = np.zeros(B, dtype=bool)
        for _ in range(max_len):
            step = Batch(
                token_ids=batch.token_ids,
                token_valid=batch.token_valid,
                frames=batch.frames,
                frame_valid=batch.frame_valid,
                object_ids=batch.object_ids,
                object_valid=batch.object_valid,
                decoder_in=tokens,
                target_ids=np.zeros_like(tokens),
                target_valid=np.ones_like(tokens, dtype=np.float64),
                segment_ids=batch.segment_ids,
            )
            logits = self._decode_batch(step, enc_out, enc_valid).data
            nxt = np.argmax(logits[:, -1, :], axis=-1)
            nxt = np.where(finished, EOS, nxt)
            tokens = np.concatenate([tokens, nxt[:, None]], axis=1)
            finished |= nxt == EOS
            if finished.all():
                break
        outputs = []
        for b in range(B):
            ids = []
            for t in tokens[b, 1:]:
                if t == EOS:
                    break
                ids.append(int(t))
            outputs.append(tuple(self.vocab.decode(ids)))
        return outputs

    def decode_segment(
        self,
        example: PreparedExample,
        seed: int,
        oracle_labels: tuple[str, ...] = (),
    ) -> tuple[str, ...]:
        return self.greedy_decode([example], seed, {example.segment_id: oracle_labels})[0]


def decode_seed(run_seed: int, purpose: str) -> int:
    """Stable sub-seed for a decoding pass."""
    return derive_seed("decode", run_seed, purpose)
