"""Independent reference implementations used by the test suite.

Everything here is written with plain Python loops so that it shares no code
path with the vectorized package internals.
"""

import itertools
import math

import numpy as np

from drmm.histogram import BinScheme, histogram, kmax_input
from drmm.model import NetworkConfig, QueryInputs, gradients, init_params, triple_loss


def loop_term_forward(z0, params):
    z = [float(v) for v in z0]
    l = 1
    while f"W{l}" in params:
        W, b = params[f"W{l}"], params[f"b{l}"]
        z = [math.tanh(sum(W[r][c] * z[c] for c in range(len(z))) + b[r]) for r in range(len(b))]
        l += 1
    return z[0]


def loop_score(inputs, params, gating):
    zs = [loop_term_forward(row, params) for row in inputs.Z0]
    M = len(zs)
    if gating == "UNI":
        gates = [1.0 / M] * M
    else:
        feats = [np.atleast_1d(x) for x in inputs.X]
        logits = [sum(params["wg"][k] * f[k] for k in range(len(f))) for f in feats]
        top = max(logits)
        e = [math.exp(v - top) for v in logits]
        gates = [v / sum(e) for v in e]
    return sum(g * z for g, z in zip(gates, zs))


def random_inputs(rng, mode, gating, bins, m, dim):
    rows = []
    for _ in range(m):
        vals = np.clip(rng.normal(0, 0.5, size=rng.integers(0, 25)), -1, 1)
        vals[: rng.integers(0, 3)] = 1.0
        rows.append(kmax_input(vals, bins) if mode == "KMAX" else histogram(vals, BinScheme(bins), mode))
    if gating == "TV":
        X = rng.normal(size=(m, dim))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
    else:
        X = rng.uniform(0.1, 5.0, size=m)
    return QueryInputs(np.vstack(rows), X)


def random_setup(seed, mode, gating, bins=6, hidden=(4,), dim=3):
    rng = np.random.default_rng(seed)
    config = NetworkConfig((bins, *hidden, 1), gating, mode, dim if gating == "TV" else None)
    params = init_params(config, seed)
    for k in params:
        # nonzero biases and gate weights so every partial is exercised
        params[k] = params[k] + rng.normal(0, 0.3, size=params[k].shape)
    m = int(rng.integers(1, 5))
    pos = random_inputs(rng, mode, gating, bins, m, dim)
    neg = random_inputs(rng, mode, gating, bins, m, dim)
    neg.X = pos.X  # same query, same gate features
    return config, params, pos, neg


def finite_difference_check(params, pos, neg, gating, step=1e-5, rel=1e-4, floor=1e-8):
    """Compare analytic partials against central differences; return mismatches."""
    _, grads = gradients(pos, neg, params, gating)
    bad = []
    for name, arr in params.items():
        for idx in itertools.product(*(range(n) for n in arr.shape)):
            orig = arr[idx]
            arr[idx] = orig + step
            up = triple_loss(pos, neg, params, gating)
            arr[idx] = orig - step
            down = triple_loss(pos, neg, params, gating)
            arr[idx] = orig
            numeric = (up - down) / (2 * step)
            analytic = grads[name][idx]
            if abs(analytic - numeric) > max(rel * max(abs(analytic), abs(numeric)), floor):
                bad.append((name, idx, analytic, numeric))
    return bad


# Metrics by definition, straight from the ranking.

def brute_ap(ranking, judged, cutoff=1000):
    R = sum(1 for r in judged.values() if r > 0)
    if R == 0:
        return 0.0
    total, hits = 0.0, 0
    for i, d in enumerate(ranking[:cutoff], start=1):
        if judged.get(d, 0) > 0:
            hits += 1
            total += hits / i
    return total / R


def brute_ndcg(ranking, judged, k=20):
    dcg = sum((2 ** judged.get(d, 0) - 1) / math.log2(i + 1) for i, d in enumerate(ranking[:k], start=1))
    ideal = sorted((r for r in judged.values() if r > 0), reverse=True)[:k]
    idcg = sum((2 ** r - 1) / math.log2(i + 1) for i, r in enumerate(ideal, start=1))
    return dcg / idcg if idcg > 0 else 0.0


def brute_precision(ranking, judged, k=20):
    return sum(1 for d in ranking[:k] if judged.get(d, 0) > 0) / k
