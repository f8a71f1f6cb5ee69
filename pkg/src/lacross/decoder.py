"""Min-sum belief propagation with ordered-statistics post-processing.

BP runs flooding updates on the Tanner graph of the detector error model.
When the hard decision does not reproduce the syndrome, OSD ranks the
mechanisms by posterior log-likelihood ratio, grows an information set with
an incremental, fully reduced XOR basis over packed 64-bit columns and
solves on it.  The combination sweep then tries flipping single non-basis
mechanisms and pairs among the first ``2 * osd_order`` of them, keeping the
solution of lowest weight under the channel LLRs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .framesim import DetectorErrorModel, ShotBatch
from .gf2 import rank as gf2_rank

BIG = 1e9


@dataclass(frozen=True)
class DecoderConfig:
    bp_iterations: int = 4
    scaling_factor: float = 1.0
    osd_mode: str = "combinationSweep"  # off | osd0 | combinationSweep
    osd_order: int = 1
    cs_window: int | None = None  # single-flip candidates; None means all non-basis columns

    def __post_init__(self):
        if not 0 < self.scaling_factor <= 1:
            raise ValueError("scaling_factor must lie in (0, 1]")
        if self.osd_order < 0:
            raise ValueError("osd_order must be >= 0")
        if self.bp_iterations < 1:
            raise ValueError("bp_iterations must be >= 1")
        if self.osd_mode not in ("off", "osd0", "combinationSweep"):
            raise ValueError(f"unknown osd_mode {self.osd_mode!r}")

    @classmethod
    def surface(cls, **kw) -> "DecoderConfig":
        return cls(scaling_factor=0.625, **kw)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    predicted_observables: np.ndarray
    converged: bool
    correction: np.ndarray
    valid: bool = True


class InvalidSyndrome(ValueError):
    pass


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _bp(check_ptr, edge_var, var_ptr, var_edges, llr, syndrome, iters, scale):
    n = llr.shape[0]
    m = check_ptr.shape[0] - 1
    ne = edge_var.shape[0]
    v2c = np.empty(ne)
    c2v = np.zeros(ne)
    for e in range(ne):
        v2c[e] = llr[edge_var[e]]
    post = llr.copy()
    hard = np.zeros(n, dtype=np.uint8)
    if not syndrome.any():
        return post, hard, True
    for _ in range(iters):
        for c in range(m):
            lo, hi = check_ptr[c], check_ptr[c + 1]
            sgn = -1.0 if syndrome[c] else 1.0
            min1 = BIG
            min2 = BIG
            arg = -1
            for e in range(lo, hi):
                a = v2c[e]
                if a < 0:
                    sgn = -sgn
                    a = -a
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg = e
                elif a < min2:
                    min2 = a
            for e in range(lo, hi):
                mag = min2 if e == arg else min1
                s = sgn
                if v2c[e] < 0:
                    s = -s
                if mag < BIG:
                    mag *= scale
                c2v[e] = s * mag
        for v in range(n):
            total = llr[v]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                total += c2v[var_edges[k]]
            post[v] = total
            hard[v] = 1 if total < 0 else 0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edges[k]
                v2c[e] = total - c2v[e]
        ok = True
        for c in range(m):
            par = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                par ^= hard[edge_var[e]]
            if par != syndrome[c]:
                ok = False
                break
        if ok:
            return post, hard, True
    return post, hard, False


@njit(cache=True)
def _lowbit(x):
    return x & (~x + np.uint64(1))


@njit(cache=True)
def _popcount_weight(comb, bcol, weights):
    total = 0.0
    for w in range(comb.shape[0]):
        x = comb[w]
        while x:
            low = _lowbit(x)
            i = (w << 6) + _bitindex(low)
            total += weights[bcol[i]]
            x ^= low
    return total


_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _DEBRUIJN_TABLE[((1 << _i) * 0x03F79D71B4CB0A89 & 0xFFFFFFFFFFFFFFFF) >> 58] = _i


@njit(cache=True)
def _bitindex(low):
    """Index of the single set bit of ``low``."""
    return _DEBRUIJN_TABLE[(low * _DEBRUIJN) >> np.uint64(58)]


@njit(cache=True)
def _reduce_sparse(dets, pivot_of, comb, out):
    """Comb of a column given its detector support, against a fully reduced basis."""
    out[:] = 0
    for d in dets:
        i = pivot_of[d]
        if i >= 0:
            for w in range(out.shape[0]):
                out[w] ^= comb[i, w]


@njit(cache=True)
def _osd(colwords, col_ptr, col_dets, order, syn, weights, target_rank, lam, window):
    """Ordered-statistics decoding on an incremental, fully reduced XOR basis.

    Basis vectors are kept zero on every other basis vector's pivot, so a
    column in the span is the XOR of the basis vectors whose pivots it hits.
    ``comb[i]`` records which information-set columns make up basis vector i.
    """
    n, W = colwords.shape
    m = W * 64
    R = max(target_rank, 1)
    basis = np.zeros((R, W), dtype=np.uint64)
    comb = np.zeros((R, W), dtype=np.uint64)
    pivot_of = np.full(m, -1, dtype=np.int64)
    bcol = np.zeros(R, dtype=np.int64)
    nonbasis = np.empty(n, dtype=np.int64)
    nnb = 0
    r = 0
    pos = 0
    v = np.empty(W, dtype=np.uint64)
    cb = np.empty(W, dtype=np.uint64)
    while pos < n and r < target_rank:
        c = order[pos]
        pos += 1
        v[:] = colwords[c]
        cb[:] = 0
        for k in range(col_ptr[c], col_ptr[c + 1]):
            i = pivot_of[col_dets[k]]
            if i >= 0:
                for w in range(W):
                    v[w] ^= basis[i, w]
                    cb[w] ^= comb[i, w]
        lead = -1
        for w in range(W):
            if v[w] != 0:
                lead = w
                break
        if lead < 0:
            nonbasis[nnb] = c
            nnb += 1
            continue
        low = _lowbit(v[lead])
        pbit = (lead << 6) + _bitindex(low)
        cb[r >> 6] ^= np.uint64(1) << np.uint64(r & 63)
        for j in range(r):
            if basis[j, lead] & low:
                for w in range(W):
                    basis[j, w] ^= v[w]
                    comb[j, w] ^= cb[w]
        basis[r] = v
        comb[r] = cb
        pivot_of[pbit] = r
        bcol[r] = c
        r += 1
    while pos < n:
        nonbasis[nnb] = order[pos]
        nnb += 1
        pos += 1

    # OSD-0 solution on the information set
    s = syn.copy()
    cs = np.zeros(W, dtype=np.uint64)
    for w0 in range(W):
        x = syn[w0]
        while x:
            low = _lowbit(x)
            i = pivot_of[(w0 << 6) + _bitindex(low)]
            if i >= 0:
                for w in range(W):
                    s[w] ^= basis[i, w]
                    cs[w] ^= comb[i, w]
            x ^= low
    valid = True
    for w in range(W):
        if s[w] != 0:
            valid = False
    best = cs.copy()
    best_extra0 = -1
    best_extra1 = -1
    best_w = _popcount_weight(cs, bcol, weights)

    if valid and lam > 0 and nnb > 0:
        nsingle = nnb if window < 0 else min(window, nnb)
        npair = min(2 * lam, nnb)
        nkeep = max(nsingle, npair)
        ncomb = np.zeros((nkeep, W), dtype=np.uint64)
        cand = np.empty(W, dtype=np.uint64)
        for t in range(nkeep):
            c = nonbasis[t]
            _reduce_sparse(col_dets[col_ptr[c]:col_ptr[c + 1]], pivot_of, comb, cb)
            ncomb[t] = cb
        for t in range(nsingle):
            for w in range(W):
                cand[w] = cs[w] ^ ncomb[t, w]
            wt = weights[nonbasis[t]] + _popcount_weight(cand, bcol, weights)
            if wt < best_w:
                best_w = wt
                best[:] = cand
                best_extra0 = nonbasis[t]
                best_extra1 = -1
        for t1 in range(npair):
            for t2 in range(t1 + 1, npair):
                for w in range(W):
                    cand[w] = cs[w] ^ ncomb[t1, w] ^ ncomb[t2, w]
                wt = weights[nonbasis[t1]] + weights[nonbasis[t2]] + _popcount_weight(cand, bcol, weights)
                if wt < best_w:
                    best_w = wt
                    best[:] = cand
                    best_extra0 = nonbasis[t1]
                    best_extra1 = nonbasis[t2]

    corr = np.zeros(n, dtype=np.uint8)
    for w0 in range(W):
        x = best[w0]
        while x:
            low = _lowbit(x)
            corr[bcol[(w0 << 6) + _bitindex(low)]] ^= 1
            x ^= low
    if best_extra0 >= 0:
        corr[best_extra0] ^= 1
    if best_extra1 >= 0:
        corr[best_extra1] ^= 1
    return corr, valid


@njit(cache=True)
def _pack_syndrome(syndrome, W):
    out = np.zeros(W, dtype=np.uint64)
    for i in range(syndrome.shape[0]):
        if syndrome[i]:
            out[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
    return out


@njit(cache=True)
def _argsort_stable(x):
    return np.argsort(x, kind="mergesort")


@njit(cache=True)
def _decode_one(check_ptr, edge_var, var_ptr, var_edges, llr, colwords, col_ptr, col_dets,
                target_rank, syndrome, iters, scale, mode, lam, window):
    post, hard, conv = _bp(check_ptr, edge_var, var_ptr, var_edges, llr, syndrome, iters, scale)
    if conv or mode == 0:
        return hard, conv, True
    order = _argsort_stable(post)
    syn = _pack_syndrome(syndrome, colwords.shape[1])
    corr, valid = _osd(colwords, col_ptr, col_dets, order, syn, llr, target_rank,
                       lam if mode == 2 else 0, window)
    return corr, False, valid


@njit(cache=True)
def _decode_many(check_ptr, edge_var, var_ptr, var_edges, llr, colwords, col_ptr, col_dets,
                 target_rank, syndromes, iters, scale, mode, lam, window):
    shots = syndromes.shape[0]
    n = llr.shape[0]
    corrs = np.zeros((shots, n), dtype=np.uint8)
    conv = np.zeros(shots, dtype=np.bool_)
    valid = np.ones(shots, dtype=np.bool_)
    for s in range(shots):
        c, cv, ok = _decode_one(check_ptr, edge_var, var_ptr, var_edges, llr, colwords, col_ptr,
                                col_dets, target_rank, syndromes[s], iters, scale, mode, lam, window)
        corrs[s] = c
        conv[s] = cv
        valid[s] = ok
    return corrs, conv, valid


# ---------------------------------------------------------------- decoder


def _mode_code(cfg: DecoderConfig) -> int:
    return {"off": 0, "osd0": 1, "combinationSweep": 2}[cfg.osd_mode]


class BpOsdDecoder:
    """Decoder bound to one detector error model."""

    def __init__(self, dem: DetectorErrorModel, cfg: DecoderConfig | None = None):
        self.dem = dem
        self.cfg = cfg or DecoderConfig()
        h = dem.H.view()
        m, n = h.shape
        q = np.clip(np.asarray(dem.priors, dtype=np.float64), 1e-300, 0.5)
        self.llr = np.log((1 - q) / q)
        rows, cols = np.nonzero(h)  # sorted by row: edges grouped by check
        self.edge_var = cols.astype(np.int64)
        self.check_ptr = np.searchsorted(rows, np.arange(m + 1)).astype(np.int64)
        by_var = np.argsort(cols, kind="stable")
        self.var_edges = by_var.astype(np.int64)
        self.var_ptr = np.searchsorted(cols[by_var], np.arange(n + 1)).astype(np.int64)
        nwords = max(1, (m + 63) // 64)
        padded = np.zeros((n, nwords * 64), dtype=np.uint8)
        padded[:, :m] = h.T
        self.colwords = np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64)
        # detector support of each column, for sparse reductions in OSD
        self.col_ptr = self.var_ptr
        self.col_dets = np.searchsorted(self.check_ptr, self.var_edges, side="right").astype(np.int64) - 1
        self.rank = gf2_rank(h)
        self.L = dem.L.view()

    def _args(self):
        cfg = self.cfg
        window = -1 if cfg.cs_window is None else int(cfg.cs_window)
        return (cfg.bp_iterations, float(cfg.scaling_factor), _mode_code(cfg), int(cfg.osd_order), window)

    def bp(self, syndrome) -> tuple[np.ndarray, np.ndarray, bool]:
        """(posterior LLRs, hard decision, converged) after BP alone."""
        syn = self._syndrome(syndrome)
        post, hard, conv = _bp(self.check_ptr, self.edge_var, self.var_ptr, self.var_edges,
                               self.llr, syn, self.cfg.bp_iterations, float(self.cfg.scaling_factor))
        return post, hard, bool(conv)

    def osd(self, syndrome, posterior, order: int | None = None) -> DecodeResult:
        """OSD on given soft information, bypassing the BP convergence shortcut."""
        syn = self._syndrome(syndrome)
        lam = self.cfg.osd_order if order is None else order
        window = -1 if self.cfg.cs_window is None else int(self.cfg.cs_window)
        perm = np.argsort(np.asarray(posterior, dtype=np.float64), kind="stable").astype(np.int64)
        corr, valid = _osd(self.colwords, self.col_ptr, self.col_dets, perm,
                           _pack_syndrome(syn, self.colwords.shape[1]), self.llr, self.rank, lam, window)
        if not valid:
            raise InvalidSyndrome("syndrome is outside the column space of the detector matrix")
        return DecodeResult(self._predict(corr), False, corr, True)

    def decode(self, syndrome) -> DecodeResult:
        syn = self._syndrome(syndrome)
        corr, conv, valid = _decode_one(self.check_ptr, self.edge_var, self.var_ptr, self.var_edges,
                                        self.llr, self.colwords, self.col_ptr, self.col_dets, self.rank,
                                        syn, *self._args())
        if not valid:
            raise InvalidSyndrome("syndrome is outside the column space of the detector matrix")
        return DecodeResult(self._predict(corr), bool(conv), corr, True)

    def decode_many(self, syndromes) -> tuple[np.ndarray, np.ndarray]:
        """Observable predictions (shots x observables) and convergence flags.

        Repeated syndromes are decoded once.
        """
        syn = np.asarray(syndromes, dtype=np.uint8)
        if syn.ndim != 2 or syn.shape[1] != self.dem.num_detectors:
            raise ValueError(f"syndromes must be shots x {self.dem.num_detectors}")
        uniq, inverse = np.unique(syn, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        corrs, conv, valid = _decode_many(self.check_ptr, self.edge_var, self.var_ptr, self.var_edges,
                                          self.llr, self.colwords, self.col_ptr, self.col_dets, self.rank,
                                          np.ascontiguousarray(uniq), *self._args())
        if not valid.all():
            raise InvalidSyndrome(f"{int((~valid).sum())} syndromes outside the column space")
        pred = (corrs.astype(np.int64) @ self.L.T.astype(np.int64)) & 1
        return pred.astype(bool)[inverse], conv[inverse]

    def _syndrome(self, syndrome) -> np.ndarray:
        syn = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
        if syn.shape[0] != self.dem.num_detectors:
            raise ValueError(f"syndrome length {syn.shape[0]} != {self.dem.num_detectors} detectors")
        return syn & 1

    def _predict(self, corr) -> np.ndarray:
        return ((self.L.astype(np.int64) @ corr.astype(np.int64)) & 1).astype(bool)


def bp_minsum(dem: DetectorErrorModel, syndrome, cfg: DecoderConfig | None = None):
    return BpOsdDecoder(dem, cfg).bp(syndrome)


def decode_batch(dem: DetectorErrorModel, batch: ShotBatch, cfg: DecoderConfig | None = None,
                 decoder: BpOsdDecoder | None = None) -> tuple[int, np.ndarray]:
    """(failures, per-shot predictions); a shot fails if any observable is mispredicted."""
    dec = decoder or BpOsdDecoder(dem, cfg)
    pred, _ = dec.decode_many(batch.detector_bits)
    fails = np.any(pred != batch.observable_bits.astype(bool), axis=1)
    return int(fails.sum()), pred
