"""Independent brute-force oracles used to freeze expected test values.

These deliberately avoid the library's own code paths: alignment optima are
found by enumerating every monotone pairing, contact maps by scalar
pairwise distances, and ridge weights by plain gradient descent.
"""

import math

import numpy as np

MATCH, MISMATCH, GAP = 1, -1, -2


def enumerate_alignments(seq, sseq):
    """All monotone injective pairings, yielded as tuples of (i, j) pairs."""
    n, m = len(seq), len(sseq)

    def rec(i, j):
        if i == n or j == m:
            yield ()
            return
        # skip seq[i]
        for rest in rec(i + 1, j):
            yield rest
        # pair seq[i] with some sseq[j'] >= j
        for jj in range(j, m):
            for rest in rec(i + 1, jj + 1):
                yield ((i, jj),) + rest

    seen = set()
    for pairs in rec(0, 0):
        if pairs not in seen:
            seen.add(pairs)
            yield pairs


def score_alignment(seq, sseq, pairs):
    s = 0
    for i, j in pairs:
        s += MATCH if seq[i] == sseq[j] else MISMATCH
    s += GAP * (len(seq) - len(pairs))
    s += GAP * (len(sseq) - len(pairs))
    return s


def best_alignments(seq, sseq):
    """(best score, list of optimal seq->struct maps as tuples with None)."""
    best = -math.inf
    winners = []
    for pairs in enumerate_alignments(seq, sseq):
        s = score_alignment(seq, sseq, pairs)
        if s > best:
            best = s
            winners = [pairs]
        elif s == best:
            winners.append(pairs)
    maps = []
    for pairs in winners:
        mapping = [None] * len(seq)
        for i, j in pairs:
            mapping[i] = j
        maps.append(tuple(mapping))
    return best, maps


def brute_force_contacts(coords, resolved, tau):
    """Edge set {(i, j) : i < j, both resolved, scalar distance^2 <= tau^2}."""
    edges = set()
    n = len(coords)
    for i in range(n):
        if not resolved[i]:
            continue
        for j in range(i + 1, n):
            if not resolved[j]:
                continue
            dx = coords[i][0] - coords[j][0]
            dy = coords[i][1] - coords[j][1]
            dz = coords[i][2] - coords[j][2]
            d2 = (dx * dx + dy * dy) + dz * dz
            if d2 <= tau * tau:
                edges.add((i, j))
    return edges


def ridge_gradient_descent(X, y, alpha, iters=200_000, tol=1e-12):
    """Minimize ||Xs w - yc||^2 + alpha ||w||^2 by plain gradient descent.

    Features standardized by training statistics, intercept unpenalized;
    returns weights folded back to original feature space, intercept last.
    """
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    Xs = (X - mean) / scale
    y_mean = y.mean()
    yc = y - y_mean

    A = Xs.T @ Xs + alpha * np.eye(X.shape[1])
    lr = 1.0 / float(np.linalg.eigvalsh(A).max())
    w = np.zeros(X.shape[1])
    b = Xs.T @ yc
    for _ in range(iters):
        grad = A @ w - b
        if float(np.abs(grad).max()) < tol:
            break
        w = w - lr * grad
    w_orig = w / scale
    intercept = y_mean - mean @ w_orig
    return np.concatenate([w_orig, [intercept]])
