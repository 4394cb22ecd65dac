"""Training loss on observation events and the evaluation metric.

Each observation event contributes (a + b)^2 where a is the masked
Euclidean error of the post-jump prediction against the observed values.
Two choices of b are supported: "left_error" (default) measures the
pre-jump prediction against the same observed values, "jump_size" measures
the jump itself.  Both drive the model toward the conditional expectation;
they differ in gradient quality.  Events at t = 0 never enter the loss.

A sample's loss is the mean of its event terms; the batch loss is the mean
over samples.  Norms are not differentiable at zero, so a vanishing term
uses subgradient zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NjOdeModel, backward_batch, forward_batch

LOSS_KINDS = ("left_error", "jump_size")


@dataclass
class LossConfig:
    kind: str = "left_error"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")


def event_terms(x, mask, y_post, y_left, kind="left_error"):
    """Per-row loss terms (a + b)^2 for one observation event.

    All arguments are (rows, d); returns (rows,).
    """
    m = np.asarray(mask, dtype=np.float64)
    ep = m * (np.asarray(x) - np.asarray(y_post))
    a = np.sqrt(np.sum(ep * ep, axis=1))
    if kind == "jump_size":
        eb = m * (np.asarray(y_post) - np.asarray(y_left))
    elif kind == "left_error":
        eb = m * (np.asarray(x) - np.asarray(y_left))
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    b = np.sqrt(np.sum(eb * eb, axis=1))
    return (a + b) ** 2


def event_terms_and_grads(x, mask, y_post, y_left, kind="left_error"):
    """Terms plus their gradients in the two prediction arguments."""
    m = np.asarray(mask, dtype=np.float64)
    ep = m * (np.asarray(x) - np.asarray(y_post))
    a = np.sqrt(np.sum(ep * ep, axis=1))
    if kind == "jump_size":
        eb = m * (np.asarray(y_post) - np.asarray(y_left))
    elif kind == "left_error":
        eb = m * (np.asarray(x) - np.asarray(y_left))
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    b = np.sqrt(np.sum(eb * eb, axis=1))
    terms = (a + b) ** 2
    coef = 2.0 * (a + b)
    inv_a = np.where(a > 0.0, 1.0 / np.where(a > 0.0, a, 1.0), 0.0)
    inv_b = np.where(b > 0.0, 1.0 / np.where(b > 0.0, b, 1.0), 0.0)
    d_post = coef[:, None] * (-ep * inv_a[:, None])
    if kind == "jump_size":
        d_post = d_post + coef[:, None] * (eb * inv_b[:, None])
    d_left = coef[:, None] * (-eb * inv_b[:, None])
    return terms, d_post, d_left


def sample_loss(x_list, mask_list, y_post_list, y_left_list, kind="left_error"):
    """Loss of one sample from its per-event values (events after t = 0)."""
    n = len(x_list)
    if n == 0:
        return 0.0
    total = 0.0
    for x, m, yp, yl in zip(x_list, mask_list, y_post_list, y_left_list):
        t = event_terms(
            np.atleast_2d(x), np.atleast_2d(m), np.atleast_2d(yp), np.atleast_2d(yl), kind
        )
        total += float(t[0])
    return total / n


def batch_loss(fwd, kind="left_error"):
    """Batch loss from a completed forward pass (no gradients)."""
    B = fwd.n_post_obs.shape[0]
    weights = np.zeros(B)
    nz = fwd.n_post_obs > 0
    weights[nz] = 1.0 / (fwd.n_post_obs[nz] * B)
    total = 0.0
    for ev in fwd.events:
        terms = event_terms(ev.x, ev.mask, ev.y_post, ev.y_left, kind)
        total += float(np.sum(weights[ev.rows] * terms))
    return total


def batch_loss_and_grads(
    model: NjOdeModel,
    times,
    values,
    masks,
    kind: str = "left_error",
    train: bool = False,
    rng=None,
):
    """Forward, loss, and exact parameter gradients for one batch.

    Returns (loss, grads aligned with model.blocks(), forward record).
    """
    fwd = forward_batch(
        model, times, values, masks, train=train, rng=rng, taped=True
    )
    B = fwd.n_post_obs.shape[0]
    weights = np.zeros(B)
    nz = fwd.n_post_obs > 0
    weights[nz] = 1.0 / (fwd.n_post_obs[nz] * B)
    total = 0.0
    d_post, d_left = [], []
    for ev in fwd.events:
        terms, gp, gl = event_terms_and_grads(
            ev.x, ev.mask, ev.y_post, ev.y_left, kind
        )
        w = weights[ev.rows]
        total += float(np.sum(w * terms))
        d_post.append(w[:, None] * gp)
        d_left.append(w[:, None] * gl)
    grads = backward_batch(model, fwd, d_post, d_left)
    return total, grads, fwd


def evaluation_metric(pred_grid, ref_grid):
    """Grid MSE: squared error averaged over samples, grid points and
    coordinates.

    pred_grid, ref_grid: (B, K, d).  At observation times pred holds the
    post-jump value and ref the post-observation conditional expectation.
    """
    pred = np.asarray(pred_grid, dtype=np.float64)
    ref = np.asarray(ref_grid, dtype=np.float64)
    if pred.shape != ref.shape:
        raise ValueError("prediction and reference grids differ in shape")
    diff = pred - ref
    return float((diff * diff).mean())
