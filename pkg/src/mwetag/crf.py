"""Linear-chain CRF: lattices, inference, and L2-regularized training.

The score of a label sequence is the sum of per-position unary feature
weights plus label-bigram transition weights; probabilities come from
normalizing over all sequences, computed in log space.  Training maximizes
the conditional log-likelihood minus sum(w^2)/(2*rho^2) by batch gradient
ascent with a backtracking (Armijo) line search from zero initialization,
so identical inputs always produce bit-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .features import LABELS, TokenRecord
from .templates import Template, expand_macros

WeightKey = tuple[str, str]  # (feature string, label) or (label_prev, label_cur)


@dataclass(frozen=True)
class LabelSet:
    labels: tuple[str, ...] = LABELS

    def __post_init__(self) -> None:
        if not self.labels:
            raise InputError("label set must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("label set has duplicates")
        if any(not lab for lab in self.labels):
            raise InputError("labels must be non-empty strings")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"label {label!r} not in label set {self.labels}") from None


@dataclass(frozen=True)
class TrainConfig:
    rho: float = 10.0
    max_iterations: int = 200
    gradient_tolerance: float = 1e-4

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise InputError(f"rho must be positive, got {self.rho}")
        if self.max_iterations < 1:
            raise InputError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.gradient_tolerance <= 0:
            raise InputError(
                f"gradient_tolerance must be positive, got {self.gradient_tolerance}"
            )


@dataclass(frozen=True)
class CrfModel:
    label_set: LabelSet
    template: Template
    weights: dict[WeightKey, float]
    rho: float = 10.0


@dataclass(frozen=True, eq=False)
class Lattice:
    """Per-sentence scores: log_unary is (T, L), log_transition is (L, L)."""

    log_unary: np.ndarray
    log_transition: np.ndarray

    def __post_init__(self) -> None:
        if self.log_unary.ndim != 2 or self.log_unary.shape[0] < 1:
            raise InputError("log_unary must be (T, L) with T >= 1")
        L = self.log_unary.shape[1]
        if self.log_transition.shape != (L, L):
            raise InputError("log_transition must be (L, L)")
        if not (np.isfinite(self.log_unary).all() and np.isfinite(self.log_transition).all()):
            raise InputError("lattice entries must be finite")


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def build_lattice(model: CrfModel, rows: Sequence[TokenRecord]) -> Lattice:
    """Sum unigram weights per (position, label); transitions come straight
    from the weight map, or stay zero when the template disables them."""
    if not rows:
        raise InputError("cannot build a lattice for an empty sentence")
    labels = model.label_set.labels
    L = len(labels)
    weights = model.weights
    unary = np.zeros((len(rows), L))
    for t in range(len(rows)):
        active = expand_macros(model.template, rows, t)
        for j, lab in enumerate(labels):
            unary[t, j] = sum(weights.get((s, lab), 0.0) for s in active)
    trans = np.zeros((L, L))
    if model.template.include_label_bigram:
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                trans[a, b] = weights.get((la, lb), 0.0)
    return Lattice(log_unary=unary, log_transition=trans)


def log_partition(lattice: Lattice) -> float:
    """Log of the sum of exp(score) over every label sequence."""
    alpha = lattice.log_unary[0]
    for t in range(1, lattice.log_unary.shape[0]):
        alpha = _lse(alpha[:, None] + lattice.log_transition, axis=0) + lattice.log_unary[t]
    return float(_lse(alpha, axis=0))


def sequence_score(lattice: Lattice, indices: Sequence[int]) -> float:
    T, L = lattice.log_unary.shape
    if len(indices) != T:
        raise InputError(f"expected {T} labels, got {len(indices)}")
    if any(not 0 <= i < L for i in indices):
        raise InputError("label index out of range")
    total = float(lattice.log_unary[np.arange(T), indices].sum())
    if T > 1:
        idx = np.asarray(indices)
        total += float(lattice.log_transition[idx[:-1], idx[1:]].sum())
    return total


def sequence_log_prob(
    model: CrfModel, rows: Sequence[TokenRecord], labels: Sequence[str]
) -> float:
    if len(labels) != len(rows):
        raise InputError(f"sentence has {len(rows)} tokens but {len(labels)} labels")
    lattice = build_lattice(model, rows)
    indices = [model.label_set.index(lab) for lab in labels]
    return sequence_score(lattice, indices) - log_partition(lattice)


def decode_lattice(lattice: Lattice) -> list[int]:
    """Viterbi path as label indices; ties resolve to the lowest index."""
    unary, trans = lattice.log_unary, lattice.log_transition
    T, L = unary.shape
    delta = unary[0].copy()
    back = np.zeros((T, L), dtype=np.int64)
    for t in range(1, T):
        scores = delta[:, None] + trans
        back[t] = np.argmax(scores, axis=0)  # first max = lowest label index
        delta = scores[back[t], np.arange(L)] + unary[t]
    path = [int(np.argmax(delta))]
    for t in range(T - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path


def viterbi_decode(model: CrfModel, rows: Sequence[TokenRecord]) -> list[str]:
    indices = decode_lattice(build_lattice(model, rows))
    return [model.label_set.labels[i] for i in indices]


def marginals(lattice: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Posterior node marginals (T, L) and edge marginals (T-1, L, L)."""
    unary, trans = lattice.log_unary, lattice.log_transition
    T, L = unary.shape
    alpha = np.empty((T, L))
    alpha[0] = unary[0]
    for t in range(1, T):
        alpha[t] = _lse(alpha[t - 1][:, None] + trans, axis=0) + unary[t]
    beta = np.zeros((T, L))
    for t in range(T - 2, -1, -1):
        beta[t] = _lse(trans + (unary[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = _lse(alpha[-1], axis=0)
    node = np.exp(alpha + beta - log_z)
    if T > 1:
        edge = np.exp(
            alpha[:-1, :, None]
            + trans[None, :, :]
            + (unary[1:] + beta[1:])[:, None, :]
            - log_z
        )
    else:
        edge = np.zeros((0, L, L))
    return node, edge


# ---------------------------------------------------------------------------
# Compiled batch path shared by training, objective, and gradient.


@dataclass
class _Compiled:
    vocab: dict[str, int]
    feats: np.ndarray  # (N, Tmax, M) int32 feature rows, pad positions zeroed
    gold: np.ndarray  # (N, Tmax) int32
    mask: np.ndarray  # (N, Tmax) bool
    lengths: np.ndarray  # (N,) int32


def _compile(
    template: Template,
    label_set: LabelSet,
    data: Sequence[Sequence[TokenRecord]],
    vocab: dict[str, int] | None,
) -> _Compiled:
    """Intern feature strings to integer rows.  With a frozen vocab, unseen
    strings map to the extra index len(vocab), which carries zero weight."""
    if not len(data):
        raise InputError("training data must contain at least one sentence")
    grow = vocab is None
    if grow:
        vocab = {}
    unk = len(vocab)
    n_sents = len(data)
    t_max = max(len(s) for s in data)
    n_macros = len(template.macros)
    feats = np.zeros((n_sents, t_max, n_macros), dtype=np.int32)
    gold = np.zeros((n_sents, t_max), dtype=np.int32)
    mask = np.zeros((n_sents, t_max), dtype=bool)
    lengths = np.zeros(n_sents, dtype=np.int32)
    for n, rows in enumerate(data):
        if not len(rows):
            raise InputError(f"sentence {n} is empty")
        lengths[n] = len(rows)
        for t in range(len(rows)):
            mask[n, t] = True
            gold[n, t] = label_set.index(rows[t].label)
            for m, s in enumerate(expand_macros(template, rows, t)):
                if grow:
                    feats[n, t, m] = vocab.setdefault(s, len(vocab))
                else:
                    feats[n, t, m] = vocab.get(s, unk)
    return _Compiled(vocab=vocab, feats=feats, gold=gold, mask=mask, lengths=lengths)


def _unary_batch(wu: np.ndarray, comp: _Compiled) -> np.ndarray:
    return wu[comp.feats].sum(axis=2)


def _forward_batch(e: np.ndarray, wt: np.ndarray, mask: np.ndarray) -> np.ndarray:
    n, t_max, L = e.shape
    alpha = np.empty((n, t_max, L))
    alpha[:, 0] = e[:, 0]
    for t in range(1, t_max):
        nxt = _lse(alpha[:, t - 1][:, :, None] + wt[None], axis=1) + e[:, t]
        # finished sentences keep their final alpha so alpha[:, -1] is usable
        alpha[:, t] = np.where(mask[:, t][:, None], nxt, alpha[:, t - 1])
    return alpha


def _backward_batch(e: np.ndarray, wt: np.ndarray, mask: np.ndarray) -> np.ndarray:
    n, t_max, L = e.shape
    beta = np.zeros((n, t_max, L))
    for t in range(t_max - 2, -1, -1):
        nxt = _lse(wt[None] + (e[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
        beta[:, t] = np.where(mask[:, t + 1][:, None], nxt, 0.0)
    return beta


def _log_z_batch(e: np.ndarray, wt: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return _lse(_forward_batch(e, wt, mask)[:, -1], axis=1)


def _gold_total(
    e: np.ndarray, wt: np.ndarray, gold: np.ndarray, mask: np.ndarray, use_trans: bool
) -> float:
    flat_e = e.reshape(-1, e.shape[2])[mask.ravel()]
    flat_gold = gold.ravel()[mask.ravel()]
    total = float(flat_e[np.arange(flat_e.shape[0]), flat_gold].sum())
    if use_trans and e.shape[1] > 1:
        valid = mask[:, 1:]
        total += float(wt[gold[:, :-1][valid], gold[:, 1:][valid]].sum())
    return total


def _count_gradient(
    comp: _Compiled, wu: np.ndarray, wt: np.ndarray, use_trans: bool
) -> tuple[np.ndarray, np.ndarray, float]:
    """(empirical - expected) counts and the data log-likelihood."""
    n, t_max, n_macros = comp.feats.shape
    n_feats, L = wu.shape
    e = _unary_batch(wu, comp)
    alpha = _forward_batch(e, wt, comp.mask)
    beta = _backward_batch(e, wt, comp.mask)
    log_z = _lse(alpha[:, -1], axis=1)

    node = np.exp(alpha + beta - log_z[:, None, None]) * comp.mask[:, :, None]

    flat_mask = comp.mask.ravel()
    flat_feats = comp.feats.reshape(-1, n_macros)[flat_mask]
    flat_node = node.reshape(-1, L)[flat_mask]
    flat_gold = comp.gold.ravel()[flat_mask]

    gu = np.zeros((n_feats, L))
    if n_macros:
        np.add.at(gu, (flat_feats.ravel(), np.repeat(flat_gold, n_macros)), 1.0)
        np.add.at(gu, flat_feats.ravel(), -np.repeat(flat_node, n_macros, axis=0))

    gt = np.zeros((L, L))
    if use_trans and t_max > 1:
        valid = comp.mask[:, 1:]
        np.add.at(gt, (comp.gold[:, :-1][valid], comp.gold[:, 1:][valid]), 1.0)
        edge = np.exp(
            alpha[:, :-1, :, None]
            + wt[None, None]
            + (e[:, 1:] + beta[:, 1:])[:, :, None, :]
            - log_z[:, None, None, None]
        )
        gt -= (edge * valid[:, :, None, None]).sum(axis=(0, 1))

    ll = _gold_total(e, wt, comp.gold, comp.mask, use_trans) - float(log_z.sum())
    return gu, gt, ll


def _ascend(
    comp: _Compiled, L: int, use_trans: bool, config: TrainConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ascent with backtracking line search from zero init."""
    n_feats = len(comp.vocab)
    wu = np.zeros((n_feats, L))
    wt = np.zeros((L, L))
    rho2 = config.rho**2

    def objective(wu_c: np.ndarray, wt_c: np.ndarray) -> float:
        e = _unary_batch(wu_c, comp)
        ll = _gold_total(e, wt_c, comp.gold, comp.mask, use_trans)
        ll -= float(_log_z_batch(e, wt_c, comp.mask).sum())
        penalty = float((wu_c**2).sum())
        if use_trans:
            penalty += float((wt_c**2).sum())
        return ll - penalty / (2.0 * rho2)

    obj = objective(wu, wt)
    step = 1.0
    for _ in range(config.max_iterations):
        gu, gt, _ = _count_gradient(comp, wu, wt, use_trans)
        gu -= wu / rho2
        if use_trans:
            gt -= wt / rho2
        else:
            gt = np.zeros((L, L))
        grad_norm = max(
            float(np.abs(gu).max()) if gu.size else 0.0, float(np.abs(gt).max())
        )
        if grad_norm < config.gradient_tolerance:
            break
        g2 = float((gu**2).sum() + (gt**2).sum())
        s = step * 2.0
        while True:
            wu_new = wu + s * gu
            wt_new = wt + s * gt if use_trans else wt
            obj_new = objective(wu_new, wt_new)
            if obj_new >= obj + 1e-4 * s * g2:  # Armijo sufficient increase
                break
            s *= 0.5
            if s < 1e-15:
                s = 0.0
                break
        if s == 0.0:
            break
        wu, wt, obj, step = wu_new, wt_new, obj_new, s
    return wu, wt


def regularized_objective(
    model: CrfModel, data: Sequence[Sequence[TokenRecord]]
) -> float:
    """Conditional log-likelihood of data minus sum(w^2)/(2*rho^2) over the
    model's stored weights."""
    comp = _compile(model.template, model.label_set, data, vocab=None)
    use_trans = model.template.include_label_bigram
    wu, wt = _weights_to_arrays(model, comp.vocab)
    e = _unary_batch(wu, comp)
    ll = _gold_total(e, wt, comp.gold, comp.mask, use_trans)
    ll -= float(_log_z_batch(e, wt, comp.mask).sum())
    penalty = sum(w * w for w in model.weights.values()) / (2.0 * model.rho**2)
    return ll - penalty


def gradient(
    model: CrfModel, data: Sequence[Sequence[TokenRecord]]
) -> dict[WeightKey, float]:
    """Partial derivatives of regularized_objective with respect to every
    weight touched by the data or present in the model."""
    comp = _compile(model.template, model.label_set, data, vocab=None)
    use_trans = model.template.include_label_bigram
    wu, wt = _weights_to_arrays(model, comp.vocab)
    gu, gt, _ = _count_gradient(comp, wu, wt, use_trans)
    rho2 = model.rho**2
    labels = model.label_set.labels
    out: dict[WeightKey, float] = {}
    for s, i in comp.vocab.items():
        for j, lab in enumerate(labels):
            key = (s, lab)
            out[key] = float(gu[i, j]) - model.weights.get(key, 0.0) / rho2
    if use_trans:
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                key = (la, lb)
                out[key] = float(gt[a, b]) - model.weights.get(key, 0.0) / rho2
    for key, w in model.weights.items():
        if key not in out:
            out[key] = -w / rho2
    return out


def _weights_to_arrays(
    model: CrfModel, vocab: Mapping[str, int]
) -> tuple[np.ndarray, np.ndarray]:
    labels = model.label_set.labels
    L = len(labels)
    wu = np.zeros((len(vocab), L))
    for s, i in vocab.items():
        for j, lab in enumerate(labels):
            wu[i, j] = model.weights.get((s, lab), 0.0)
    wt = np.zeros((L, L))
    if model.template.include_label_bigram:
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                wt[a, b] = model.weights.get((la, lb), 0.0)
    return wu, wt


def train(
    data: Sequence[Sequence[TokenRecord]],
    template: Template,
    config: TrainConfig | None = None,
    label_set: LabelSet | None = None,
) -> CrfModel:
    """Fit weights on labeled sentences.  Deterministic: zero initialization
    and a fixed line-search policy, no randomness anywhere."""
    config = config or TrainConfig()
    label_set = label_set or LabelSet()
    comp = _compile(template, label_set, data, vocab=None)
    use_trans = template.include_label_bigram
    wu, wt = _ascend(comp, len(label_set), use_trans, config)
    labels = label_set.labels
    weights: dict[WeightKey, float] = {}
    for s, i in comp.vocab.items():
        for j, lab in enumerate(labels):
            weights[(s, lab)] = float(wu[i, j])
    if use_trans:
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                weights[(la, lb)] = float(wt[a, b])
    return CrfModel(label_set=label_set, template=template, weights=weights, rho=config.rho)


def train_and_decode(
    train_sentences: Sequence[Sequence[TokenRecord]],
    test_sentences: Sequence[Sequence[TokenRecord]],
    template: Template,
    config: TrainConfig | None = None,
    label_set: LabelSet | None = None,
) -> list[list[str]]:
    """Train on one partition and decode another without materializing the
    weight map; feature strings unseen in training score zero."""
    config = config or TrainConfig()
    label_set = label_set or LabelSet()
    comp = _compile(template, label_set, train_sentences, vocab=None)
    use_trans = template.include_label_bigram
    wu, wt = _ascend(comp, len(label_set), use_trans, config)
    test = _compile(template, label_set, test_sentences, vocab=comp.vocab)
    wu_ext = np.vstack([wu, np.zeros((1, len(label_set)))])
    predictions: list[list[str]] = []
    for n in range(test.feats.shape[0]):
        t_n = int(test.lengths[n])
        unary = wu_ext[test.feats[n, :t_n]].sum(axis=1)
        path = decode_lattice(Lattice(log_unary=unary, log_transition=wt))
        predictions.append([label_set.labels[i] for i in path])
    return predictions
