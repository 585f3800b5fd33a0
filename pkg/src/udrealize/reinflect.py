"""Character-level encoder-decoder that inflects lemmas into surface forms.

A bidirectional LSTM reads the lemma's character embeddings; its final
states summarize the word.  The decoder LSTM consumes, per step, the
embedding of the lemma character aligned with that step (padding index 0
past the lemma's end), the encoder summary, and the binary morphological
feature vector, then a softmax layer predicts the output character.

Training runs on the package's own float64 autodiff kernel; no external
ML framework is involved, which keeps gradient checks exact and
checkpoints bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .morphmap import MorphTag, feature_vector

EMB_DIM = 64
PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED_CHARS = ("<pad>", "<bos>", "<eos>", "<unk>")

_CHECKPOINT_MAGIC = b"udrealize-reinflector-v1\n"


class GradientError(RuntimeError):
    """A parameter block produced a non-finite gradient."""


@dataclass(frozen=True)
class CharVocab:
    """Dense character index with reserved slots (PAD is always index 0)."""

    chars: tuple[str, ...]

    def __post_init__(self):
        if self.chars[: len(RESERVED_CHARS)] != RESERVED_CHARS:
            raise ValueError("reserved characters must occupy the first indices")

    @classmethod
    def build(cls, texts) -> "CharVocab":
        seen = sorted({ch for text in texts for ch in text})
        return cls(RESERVED_CHARS + tuple(seen))

    def __len__(self) -> int:
        return len(self.chars)

    def index(self, ch: str) -> int:
        try:
            return self.chars.index(ch)
        except ValueError:
            return UNK

    def encode(self, text: str, diagnostics: list[str] | None = None) -> list[int]:
        lookup = _vocab_lookup(self)
        out = []
        for ch in text:
            ix = lookup.get(ch, UNK)
            if ix == UNK and diagnostics is not None:
                diagnostics.append(f"character {ch!r} not in vocabulary, mapped to UNK")
            out.append(ix)
        return out


@lru_cache(maxsize=8)
def _vocab_lookup(vocab: CharVocab) -> dict[str, int]:
    return {ch: i for i, ch in enumerate(vocab.chars)}


@dataclass(frozen=True)
class TrainExample:
    lemma: str
    tag: MorphTag
    target: str


class Seq2SeqModel:
    """All parameters of the character encoder-decoder.

    Parameter blocks: character embedding (|vocab| x 64), forward and
    backward encoder LSTMs, decoder LSTM over 64 + 2H + F inputs, and the
    output projection onto the character vocabulary.
    """

    PARAM_NAMES = (
        "emb",
        "enc_f.wx", "enc_f.wh", "enc_f.b",
        "enc_b.wx", "enc_b.wh", "enc_b.b",
        "dec.wx", "dec.wh", "dec.b",
        "out.w", "out.b",
    )

    def __init__(
        self,
        vocab: CharVocab,
        inventory: tuple[str, ...],
        hidden_size: int = 128,
        max_len: int = 40,
        seed: int = 0,
    ):
        self.vocab = vocab
        self.inventory = tuple(inventory)
        self.hidden_size = hidden_size
        self.max_len = max_len
        h = hidden_size
        v = len(vocab)
        f = len(self.inventory)
        dec_in = EMB_DIM + 2 * h + f
        rng = np.random.default_rng(seed)
        k = 1.0 / np.sqrt(h)
        shapes = {
            "emb": (v, EMB_DIM),
            "enc_f.wx": (EMB_DIM, 4 * h), "enc_f.wh": (h, 4 * h), "enc_f.b": (4 * h,),
            "enc_b.wx": (EMB_DIM, 4 * h), "enc_b.wh": (h, 4 * h), "enc_b.b": (4 * h,),
            "dec.wx": (dec_in, 4 * h), "dec.wh": (h, 4 * h), "dec.b": (4 * h,),
            "out.w": (h, v), "out.b": (v,),
        }
        self.params: dict[str, Tensor] = {
            name: ad.parameter(shapes[name], rng=rng, scale=k) for name in self.PARAM_NAMES
        }

    @property
    def feature_size(self) -> int:
        return len(self.inventory)

    @property
    def decoder_input_size(self) -> int:
        return EMB_DIM + 2 * self.hidden_size + self.feature_size

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def check_finite(self) -> None:
        for name, p in self.params.items():
            if not np.all(np.isfinite(p.data)):
                raise GradientError(f"non-finite values in parameter block {name!r}")


def _lstm_step(prefix: str, params: dict[str, Tensor], x: Tensor, h: Tensor, c: Tensor):
    hid = params[f"{prefix}.wh"].data.shape[0]
    z = ad.add(ad.add(ad.matmul(x, params[f"{prefix}.wx"]), ad.matmul(h, params[f"{prefix}.wh"])), params[f"{prefix}.b"])
    i = ad.sigmoid(ad.cols(z, 0, hid))
    f = ad.sigmoid(ad.cols(z, hid, 2 * hid))
    g = ad.tanh(ad.cols(z, 2 * hid, 3 * hid))
    o = ad.sigmoid(ad.cols(z, 3 * hid, 4 * hid))
    c_new = ad.add(ad.mul(f, c), ad.mul(i, g))
    h_new = ad.mul(o, ad.tanh(c_new))
    return h_new, c_new


def _masked(new: Tensor, old: Tensor, mask: np.ndarray) -> Tensor:
    # mask is (B, 1) of 0/1: rows past their sequence end keep the old state
    return ad.add(ad.mul(new, mask), ad.mul(old, 1.0 - mask))


def _encode_batch(model: Seq2SeqModel, idx: np.ndarray, lengths: np.ndarray, keep_contexts: bool):
    """Run both encoder directions over padded index rows.

    Returns (per-position context tensors or None, summary tensor (B, 2H)).
    """
    b, max_t = idx.shape
    h = model.hidden_size
    params = model.params
    zero = Tensor(np.zeros((b, h)))

    fwd_states: list[Tensor] = []
    hf, cf = zero, zero
    for t in range(max_t):
        x = ad.rows(params["emb"], idx[:, t])
        hn, cn = _lstm_step("enc_f", params, x, hf, cf)
        m = (t < lengths).astype(np.float64)[:, None]
        hf, cf = _masked(hn, hf, m), _masked(cn, cf, m)
        if keep_contexts:
            fwd_states.append(hf)

    bwd_states: list[Tensor | None] = [None] * max_t
    hb, cb = zero, zero
    for t in range(max_t - 1, -1, -1):
        x = ad.rows(params["emb"], idx[:, t])
        hn, cn = _lstm_step("enc_b", params, x, hb, cb)
        m = (t < lengths).astype(np.float64)[:, None]
        hb, cb = _masked(hn, hb, m), _masked(cn, cb, m)
        if keep_contexts:
            bwd_states[t] = hb

    summary = ad.concat([hf, hb], axis=1)
    contexts = None
    if keep_contexts:
        contexts = [ad.concat([fwd_states[t], bwd_states[t]], axis=1) for t in range(max_t)]
    return contexts, summary


def encode(model: Seq2SeqModel, lemma_indices) -> tuple[np.ndarray, np.ndarray]:
    """Encode one index sequence; returns (contexts (L, 2H), summary (2H,))."""
    indices = list(lemma_indices)
    if not indices:
        raise ValueError("empty input")
    idx = np.asarray([indices], dtype=np.intp)
    lengths = np.asarray([len(indices)])
    contexts, summary = _encode_batch(model, idx, lengths, keep_contexts=True)
    stacked = np.stack([c.data[0] for c in contexts])
    return stacked, summary.data[0]


def decode_step(model: Seq2SeqModel, char_vec, summary, morph_vec, state=None):
    """One decoder LSTM step plus output projection.

    ``char_vec`` is a 64-dim character embedding (conventionally the lemma
    character aligned with this step), ``summary`` the 2H encoder summary,
    ``morph_vec`` the F-dim morphological feature vector.  Returns
    (logits over the vocabulary, new (h, c) state).
    """
    char_vec = np.asarray(char_vec, dtype=np.float64)
    summary = np.asarray(summary, dtype=np.float64)
    morph_vec = np.asarray(morph_vec, dtype=np.float64)
    h = model.hidden_size
    if char_vec.shape != (EMB_DIM,):
        raise ValueError(f"character embedding must have width {EMB_DIM}, got {char_vec.shape}")
    if summary.shape != (2 * h,):
        raise ValueError(f"encoder summary must have width {2 * h}, got {summary.shape}")
    if morph_vec.shape != (model.feature_size,):
        raise ValueError(
            f"morph vector must have width {model.feature_size}, got {morph_vec.shape}"
        )
    if state is None:
        state = (np.zeros(h), np.zeros(h))
    x = Tensor(np.concatenate([char_vec, summary, morph_vec])[None, :])
    h_t, c_t = _lstm_step("dec", model.params, x, Tensor(state[0][None, :]), Tensor(state[1][None, :]))
    logits = ad.add(ad.matmul(h_t, model.params["out.w"]), model.params["out.b"])
    return logits.data[0], (h_t.data[0], c_t.data[0])


def _make_batch(model: Seq2SeqModel, examples, diagnostics: list[str] | None = None):
    """Pad a list of examples into index matrices for the batched loss."""
    b = len(examples)
    enc_len = np.asarray([len(ex.lemma) for ex in examples])
    dec_len = np.asarray([len(ex.target) + 1 for ex in examples])  # +1 for EOS
    max_enc = int(enc_len.max())
    max_dec = int(dec_len.max())

    enc_idx = np.zeros((b, max_enc), dtype=np.intp)
    dec_idx = np.zeros((b, max_dec), dtype=np.intp)
    targets = np.zeros((b, max_dec), dtype=np.intp)
    mask = np.zeros((b, max_dec))
    morph = np.zeros((b, model.feature_size))
    for r, ex in enumerate(examples):
        lemma_ix = model.vocab.encode(ex.lemma, diagnostics)
        target_ix = model.vocab.encode(ex.target, diagnostics) + [EOS]
        enc_idx[r, : len(lemma_ix)] = lemma_ix
        # decoder input stream: lemma character at step t, PAD afterwards
        take = min(len(lemma_ix), max_dec)
        dec_idx[r, :take] = lemma_ix[:take]
        targets[r, : len(target_ix)] = target_ix
        mask[r, : len(target_ix)] = 1.0
        morph[r] = feature_vector(ex.tag, model.inventory, diagnostics)
    return enc_idx, enc_len, dec_idx, targets, mask, morph


def _batch_loss(model: Seq2SeqModel, examples, diagnostics: list[str] | None = None) -> Tensor:
    """Mean over examples of the per-example mean cross-entropy (teacher forced)."""
    enc_idx, enc_len, dec_idx, targets, mask, morph = _make_batch(model, examples, diagnostics)
    b, max_dec = targets.shape
    params = model.params
    _, summary = _encode_batch(model, enc_idx, enc_len, keep_contexts=False)
    morph_t = Tensor(morph)

    h = Tensor(np.zeros((b, model.hidden_size)))
    c = Tensor(np.zeros((b, model.hidden_size)))
    per_example = None
    for t in range(max_dec):
        x_char = ad.rows(params["emb"], dec_idx[:, t])
        x = ad.concat([x_char, summary, morph_t], axis=1)
        h, c = _lstm_step("dec", params, x, h, c)
        logits = ad.add(ad.matmul(h, params["out.w"]), params["out.b"])
        ce = ad.softmax_cross_entropy(logits, targets[:, t])
        step = ad.mul(ce, mask[:, t])
        per_example = step if per_example is None else ad.add(per_example, step)
    per_example = ad.mul(per_example, 1.0 / mask.sum(axis=1))
    return ad.scale(ad.sum_all(per_example), 1.0 / b)


def loss(model: Seq2SeqModel, example: TrainExample, diagnostics: list[str] | None = None) -> float:
    """Mean per-position cross-entropy of the gold target (with EOS) for one example."""
    if not example.lemma:
        raise ValueError("empty input")
    return float(_batch_loss(model, [example], diagnostics).data)


def grad(model: Seq2SeqModel, batch) -> dict[str, np.ndarray]:
    """Gradient of the batch loss for every parameter block."""
    if not batch:
        raise ValueError("empty batch")
    model.zero_grads()
    out = _batch_loss(model, list(batch))
    ad.backward(out)
    grads: dict[str, np.ndarray] = {}
    for name, p in model.params.items():
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise GradientError(f"non-finite gradient in parameter block {name!r}")
        grads[name] = g.copy()
    return grads


def _clip_gradients(model: Seq2SeqModel, max_norm: float) -> None:
    total = 0.0
    for p in model.params.values():
        if p.grad is not None:
            total += float((p.grad * p.grad).sum())
    norm = np.sqrt(total)
    if norm > max_norm:
        factor = max_norm / norm
        for p in model.params.values():
            if p.grad is not None:
                p.grad *= factor


def train(
    model: Seq2SeqModel,
    data,
    epochs: int = 20,
    lr: float = 1e-3,
    seed: int = 0,
    batch_size: int = 32,
    clip_norm: float = 5.0,
    log=None,
) -> tuple[Seq2SeqModel, list[float]]:
    """Adam training loop; deterministic for a fixed seed.

    Shuffles each epoch with the seeded RNG and records the mean batch
    loss per epoch.  If the loss goes non-finite the parameters roll back
    to the end of the last finished epoch and training stops.
    """
    data = list(data)
    if not data:
        raise ValueError("no training data")
    rng = np.random.default_rng(seed)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_state = {n: np.zeros_like(p.data) for n, p in model.params.items()}
    v_state = {n: np.zeros_like(p.data) for n, p in model.params.items()}
    step = 0
    trace: list[float] = []
    snapshot = {n: p.data.copy() for n, p in model.params.items()}
    for epoch in range(epochs):
        order = rng.permutation(len(data))
        epoch_losses: list[float] = []
        diverged = False
        for start in range(0, len(data), batch_size):
            batch = [data[i] for i in order[start : start + batch_size]]
            model.zero_grads()
            out = _batch_loss(model, batch)
            batch_loss = float(out.data)
            if not np.isfinite(batch_loss):
                diverged = True
                break
            ad.backward(out)
            _clip_gradients(model, clip_norm)
            step += 1
            bias1 = 1.0 - beta1**step
            bias2 = 1.0 - beta2**step
            for name, p in model.params.items():
                g = p.grad if p.grad is not None else np.zeros_like(p.data)
                m_state[name] = beta1 * m_state[name] + (1.0 - beta1) * g
                v_state[name] = beta2 * v_state[name] + (1.0 - beta2) * g * g
                p.data -= lr * (m_state[name] / bias1) / (np.sqrt(v_state[name] / bias2) + eps)
            epoch_losses.append(batch_loss)
        if diverged:
            for name, p in model.params.items():
                p.data = snapshot[name].copy()
            if log is not None:
                log(f"epoch {epoch + 1}: loss diverged, rolled back to last checkpoint")
            break
        mean_loss = float(np.mean(epoch_losses))
        trace.append(mean_loss)
        snapshot = {n: p.data.copy() for n, p in model.params.items()}
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs}: loss {mean_loss:.6f}")
    model.check_finite()
    return model, trace


def predict(model: Seq2SeqModel, lemma: str, tag: MorphTag) -> str:
    """Greedily decode the inflected form; stops at EOS or max_len."""
    if not lemma:
        raise ValueError("empty input")
    lemma_ix = model.vocab.encode(lemma)
    _, summary = _encode_batch(
        model, np.asarray([lemma_ix], dtype=np.intp), np.asarray([len(lemma_ix)]), keep_contexts=False
    )
    summary_vec = summary.data[0]
    morph_vec = feature_vector(tag, model.inventory)
    emb = model.params["emb"].data
    state = None
    out_chars: list[str] = []
    for t in range(model.max_len):
        char_ix = lemma_ix[t] if t < len(lemma_ix) else PAD
        logits, state = decode_step(model, emb[char_ix], summary_vec, morph_vec, state)
        logits = logits.copy()
        logits[[PAD, BOS, UNK]] = -np.inf  # reserved characters are never emitted
        best = int(np.argmax(logits))
        if best == EOS:
            break
        out_chars.append(model.vocab.chars[best])
    return "".join(out_chars)


def load_training_file(text: str) -> tuple[list[TrainExample], list[str]]:
    """Parse 'lemma<TAB>tag<TAB>target' lines; bad lines are skipped with a warning."""
    examples: list[TrainExample] = []
    warnings: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            warnings.append(f"line {lineno}: expected 3 tab-separated fields, skipped")
            continue
        lemma, tag_text, target = cols
        if not lemma or not target:
            warnings.append(f"line {lineno}: empty lemma or target, skipped")
            continue
        try:
            tag = MorphTag.parse(tag_text)
        except ValueError:
            warnings.append(f"line {lineno}: unparseable tag {tag_text!r}, skipped")
            continue
        examples.append(TrainExample(lemma=lemma, tag=tag, target=target))
    return examples, warnings


def build_model(
    examples,
    hidden_size: int = 128,
    max_len: int = 40,
    seed: int = 0,
) -> Seq2SeqModel:
    """Construct a fresh model whose vocab and tag inventory cover the training data."""
    examples = list(examples)
    vocab = CharVocab.build([ex.lemma for ex in examples] + [ex.target for ex in examples])
    inventory: set[str] = set()
    for ex in examples:
        inventory.update(ex.tag.tags)
    return Seq2SeqModel(
        vocab, tuple(sorted(inventory)), hidden_size=hidden_size, max_len=max_len, seed=seed
    )


def save_model(model: Seq2SeqModel, path) -> None:
    """Write a bit-reproducible checkpoint (JSON header + raw float64 blocks)."""
    header = {
        "chars": list(model.vocab.chars),
        "inventory": list(model.inventory),
        "hidden_size": model.hidden_size,
        "max_len": model.max_len,
        "emb_dim": EMB_DIM,
        "params": [[name, list(model.params[name].data.shape)] for name in model.PARAM_NAMES],
    }
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for name in model.PARAM_NAMES:
            fh.write(np.ascontiguousarray(model.params[name].data, dtype="<f8").tobytes())


def load_model(path) -> Seq2SeqModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CHECKPOINT_MAGIC))
        if magic != _CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a reinflector checkpoint")
        header = json.loads(fh.readline().decode("utf-8"))
        model = Seq2SeqModel(
            CharVocab(tuple(header["chars"])),
            tuple(header["inventory"]),
            hidden_size=header["hidden_size"],
            max_len=header["max_len"],
        )
        for name, shape in header["params"]:
            count = int(np.prod(shape))
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"{path}: truncated parameter block {name!r}")
            model.params[name].data = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return model
