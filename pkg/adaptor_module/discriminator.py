# adaptor_module/discriminator.py

from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .models import AdaptorError
from .params import DiscriminatorParams


@lru_cache(maxsize=256)
def window_indices(length: int, width: int) -> np.ndarray:
    """
    One row per sliding window: length - width + 1 rows. A sequence shorter
    than the window is edge-padded to a single full window.
    """
    if length < 1:
        raise AdaptorError("cannot score an empty sequence")
    if length < width:
        idx = np.minimum(np.arange(width), length - 1)[None, :]
    else:
        idx = sliding_window_view(np.arange(length), width).copy()
    idx.setflags(write=False)
    return idx


def _forward(disc: DiscriminatorParams, element: str, seq: np.ndarray):
    idx = window_indices(seq.size, disc.window)
    windows = seq[idx]
    hidden = np.tanh(windows @ disc[f"{element}.w1"] + disc[f"{element}.b1"])
    scores = hidden @ disc[f"{element}.w2"] + disc[f"{element}.b2"][0]
    return idx, windows, hidden, scores


def discriminator_score(disc: DiscriminatorParams, element: str, seq: np.ndarray) -> float:
    """Realness score of one prosody sequence: the mean window score."""
    _, _, _, scores = _forward(disc, element, np.asarray(seq, dtype=np.float64))
    return float(scores.mean())


def score_and_grad(
    disc: DiscriminatorParams,
    element: str,
    seq: np.ndarray,
    d_score: float,
    grads: Dict[str, np.ndarray],
) -> Tuple[float, np.ndarray]:
    """
    Score `seq`, add d_score * dD/dtheta into `grads` and return
    (score, d_score * dD/dseq).
    """
    idx, windows, hidden, scores = _forward(disc, element, seq)
    d_scores = np.full(scores.size, d_score / scores.size)
    grads[f"{element}.w2"] += hidden.T @ d_scores
    grads[f"{element}.b2"] += d_scores.sum()
    d_pre = np.outer(d_scores, disc[f"{element}.w2"]) * (1.0 - hidden ** 2)
    grads[f"{element}.w1"] += windows.T @ d_pre
    grads[f"{element}.b1"] += d_pre.sum(axis=0)
    d_seq = np.zeros(seq.size)
    np.add.at(d_seq, idx, d_pre @ disc[f"{element}.w1"].T)
    return float(scores.mean()), d_seq


def least_squares_terms(
    disc: DiscriminatorParams,
    element: str,
    real: Sequence[np.ndarray],
    fake: Sequence[np.ndarray],
) -> Tuple[float, float]:
    """
    (discriminator loss, generator loss) for one element:
    E[(D(real) - 1)^2] + E[D(fake)^2] and E[(D(fake) - 1)^2].
    """
    if not real or not fake:
        raise AdaptorError("least-squares terms need at least one real and one fake sequence")
    real_scores = np.array([discriminator_score(disc, element, r) for r in real])
    fake_scores = np.array([discriminator_score(disc, element, f) for f in fake])
    disc_loss = float(np.mean((real_scores - 1.0) ** 2) + np.mean(fake_scores ** 2))
    gen_loss = float(np.mean((fake_scores - 1.0) ** 2))
    return disc_loss, gen_loss


def discriminator_gradients(
    disc: DiscriminatorParams,
    element: str,
    real: Sequence[np.ndarray],
    fake: Sequence[np.ndarray],
    grads: Dict[str, np.ndarray],
) -> float:
    """Accumulate gradients of the discriminator loss; fakes are constants here."""
    total = 0.0
    for seqs, target in ((real, 1.0), (fake, 0.0)):
        for seq in seqs:
            score = discriminator_score(disc, element, seq)
            d_score = 2.0 * (score - target) / len(seqs)
            score_and_grad(disc, element, seq, d_score, grads)
            total += (score - target) ** 2 / len(seqs)
    return total


def generator_sequence_gradients(
    disc: DiscriminatorParams,
    element: str,
    fake: Sequence[np.ndarray],
) -> Tuple[float, List[np.ndarray]]:
    """Generator loss for one element and its gradient w.r.t. each fake sequence."""
    scratch = disc.zeros_like()
    loss, d_seqs = 0.0, []
    for seq in fake:
        score = discriminator_score(disc, element, seq)
        d_score = 2.0 * (score - 1.0) / len(fake)
        _, d_seq = score_and_grad(disc, element, seq, d_score, scratch)
        d_seqs.append(d_seq)
        loss += (score - 1.0) ** 2 / len(fake)
    return loss, d_seqs


def fit_discriminator(
    disc: DiscriminatorParams,
    element: str,
    real: Sequence[np.ndarray],
    fake: Sequence[np.ndarray],
    lr: float,
    steps: int,
) -> Tuple[DiscriminatorParams, float]:
    """Gradient descent on one discriminator against fixed real and fake sets."""
    for _ in range(steps):
        grads = disc.zeros_like()
        discriminator_gradients(disc, element, real, fake, grads)
        disc = disc.step(grads, lr)
    disc_loss, _ = least_squares_terms(disc, element, real, fake)
    return disc, disc_loss
