"""Pure-numpy Monte Carlo kernel, used when the compiled extension is absent.

Both kernels consume the counter stream with the same per-trial layout::

    [h: 2*M*K][thermal noise: 2*M][quantization noise: 2*M_l][symbols: K]

and add per-user sums into ``out[k, STAT]`` for trials ``t_start..t_stop-1``.
"""

from __future__ import annotations

import numpy as np

from . import _rng

STATS = (
    "fu2", "fu4", "lu2", "lu4", "fi2", "fi4", "li2", "li4",
    "qn2", "qn4", "n2", "n4", "sig", "sig2",
    "ful2", "ful4", "fil2", "fil4", "den", "den2",
    "dn_re", "dn_im", "dn2", "fl_re", "fl_im", "fl2",
    "fu1", "lu1",
)  # fmt: skip
N_STATS = len(STATS)
IDX = {name: i for i, name in enumerate(STATS)}


def trial_words(m_total: int, m_low: int, k_users: int) -> int:
    return 2 * m_total * k_users + 2 * m_total + 2 * m_low + k_users


def draw_trials(beta: np.ndarray, m_full: int, key: int, t_start: int, t_stop: int):
    """Random inputs of a block of trials: ``(g, thermal, wq_unit, x)``."""
    m, k = beta.shape
    m_low = m - m_full
    w = trial_words(m, m_low, k)
    n = t_stop - t_start
    words = _rng.raw_words(key, t_start * w, n * w).reshape(n, w)
    off = 2 * m * k
    h = _rng.complex_normals(words[:, :off]).reshape(n, m, k)
    thermal = _rng.complex_normals(words[:, off : off + 2 * m])
    off += 2 * m
    wq_unit = _rng.complex_normals(words[:, off : off + 2 * m_low])
    x = _rng.unit_phases(words[:, off + 2 * m_low :])
    return h * np.sqrt(beta), thermal, wq_unit, x


def _offdiag_gram(g: np.ndarray) -> np.ndarray:
    gram = np.einsum("nmk,nmi->nki", g.conj(), g)
    idx = np.arange(gram.shape[1])
    gram[:, idx, idx] = 0.0
    return gram


def terms(beta: np.ndarray, m_full: int, alpha: float, rho: float, key: int, t_start: int, t_stop: int):
    """Per-trial MRC output terms, each of shape ``(n_trials, K)``."""
    g, thermal, wq_unit, x = draw_trials(beta, m_full, key, t_start, t_stop)
    sr = np.sqrt(rho)
    gf, gl = g[:, :m_full], g[:, m_full:]
    bf, bl = beta[:m_full], beta[m_full:]
    pf, pl = (gf * gf.conj()).real, (gl * gl.conj()).real

    fu = sr * (pf - bf).sum(axis=1)
    lu = alpha * sr * (pl - bl).sum(axis=1)
    sig = sr * (pf.sum(axis=1) + alpha * pl.sum(axis=1))
    fi = sr * np.einsum("nki,ni->nk", _offdiag_gram(gf), x)
    li = alpha * sr * np.einsum("nki,ni->nk", _offdiag_gram(gl), x)
    noise = np.einsum("nmk,nm->nk", gf.conj(), thermal[:, :m_full]) + alpha * np.einsum(
        "nmk,nm->nk", gl.conj(), thermal[:, m_full:]
    )
    wq = np.sqrt(alpha * (1.0 - alpha) * (1.0 + rho * pl.sum(axis=2))) * wq_unit
    qn = np.einsum("nmk,nm->nk", gl.conj(), wq)
    amp = sr * (bf.sum(axis=0) + alpha * bl.sum(axis=0))
    return {
        "fu": fu, "lu": lu, "fi": fi, "li": li, "qn": qn, "n": noise,
        "sig": sig, "x": x, "amp": amp,
    }  # fmt: skip


def accumulate(beta, m_full, alpha, rho, key, t_start, t_stop, out):
    t = terms(np.asarray(beta), m_full, alpha, rho, key, t_start, t_stop)
    fu, lu, fi, li, qn, n_ = t["fu"], t["lu"], t["fi"], t["li"], t["qn"], t["n"]

    def a2(z):
        return z.real * z.real + z.imag * z.imag

    ful, fil = fu + lu, fi + li
    den = ful * ful + a2(fil) + a2(qn) + a2(n_)
    npi = ful * t["x"] + fil + qn + n_
    dn = t["amp"] * t["x"] * npi.conj()
    fl = fi * li.conj()

    cols = {
        "fu2": fu * fu, "lu2": lu * lu, "fi2": a2(fi), "li2": a2(li),
        "qn2": a2(qn), "n2": a2(n_), "ful2": ful * ful, "fil2": a2(fil),
    }  # fmt: skip
    for name, v in list(cols.items()):
        cols[name[:-1] + "4"] = v * v
    cols.update(
        sig=t["sig"], sig2=t["sig"] ** 2, den=den, den2=den * den,
        dn_re=dn.real, dn_im=dn.imag, dn2=a2(dn),
        fl_re=fl.real, fl_im=fl.imag, fl2=a2(fl), fu1=fu, lu1=lu,
    )  # fmt: skip
    for name, v in cols.items():
        out[:, IDX[name]] += v.sum(axis=0)
