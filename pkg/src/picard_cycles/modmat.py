"""Small dense matrix arithmetic over Z/m (entries are Python ints)."""
from __future__ import annotations

import numpy as np

__all__ = ["as_modmat", "matmul", "matpow", "identity", "rank_mod_p", "inverse_mod", "is_unit_matrix"]


def as_modmat(rows, m: int) -> np.ndarray:
    a = np.array([[int(x) % m for x in row] for row in rows], dtype=object)
    return a.reshape(len(rows), -1) if len(rows) else a


def identity(n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=object)
    for i in range(n):
        a[i, i] = 1
    a[a == None] = 0  # noqa: E711
    return a


def matmul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    return (a.dot(b)) % m


def matpow(a: np.ndarray, e: int, m: int) -> np.ndarray:
    result = identity(a.shape[0]) % m
    base = a % m
    while e:
        if e & 1:
            result = matmul(result, base, m)
        e >>= 1
        if e:
            base = matmul(base, base, m)
    return result


def rank_mod_p(a: np.ndarray, p: int) -> int:
    rows = [[int(x) % p for x in row] for row in a]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(x - f * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def inverse_mod(a: np.ndarray, m: int, p: int) -> np.ndarray:
    """Inverse over Z/m where m is a power of the prime p."""
    n = a.shape[0]
    rows = [[int(a[i, j]) % m for j in range(n)] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] % p), None)
        if piv is None:
            raise ZeroDivisionError("matrix is not invertible mod p")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = pow(rows[col][col], -1, m)
        rows[col] = [x * inv % m for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(x - f * y) % m for x, y in zip(rows[r], rows[col])]
    return as_modmat([row[n:] for row in rows], m)


def is_unit_matrix(a: np.ndarray, p: int) -> bool:
    return rank_mod_p(a, p) == a.shape[0]
