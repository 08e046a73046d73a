"""Monte Carlo simulation of the quantized MRC receive chain.

Every trial draws its channel, noise, quantization noise and symbols from the
counter stream of ``base_seed`` at a position fixed by the trial index, so the
estimates do not depend on how trials are split across blocks or threads.
Blocks have a size fixed by the problem shape and are reduced in index order.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _fallback, _rng, backend
from .channel import LargeScaleMatrix
from .closed_form import SEReport, SinrBreakdown, SystemConfig, _check, _report, sinr_breakdown

IDX = _fallback.IDX
SECOND_MOMENT_TERMS = ("fu", "lu", "fi", "li", "qn", "n", "ful", "fil", "den")
TERM_FAMILIES = SinrBreakdown.TERMS


def block_size(m_total: int, k_users: int) -> int:
    # bounded memory for the numpy path; depends on shape only
    return int(max(64, min(4096, 2**19 // (m_total * k_users))))


@dataclass(frozen=True, eq=False)
class TrialSample:
    """One draw of every MRC output term, per user.

    ``fs_ls`` and the centred terms ``fu``, ``lu`` multiply the user's own
    symbol; ``fi`` and ``li`` already include the other users' symbols. Hence
    ``received == (fs_ls + fu + lu) * x + fi + li + qn + n``.
    """

    fs_ls: np.ndarray
    fu: np.ndarray
    lu: np.ndarray
    fi: np.ndarray
    li: np.ndarray
    qn: np.ndarray
    n: np.ndarray
    x: np.ndarray
    received: np.ndarray

    @property
    def npi(self) -> np.ndarray:
        return (self.fu + self.lu) * self.x + self.fi + self.li + self.qn + self.n


def simulate_mrc_trial(
    beta: LargeScaleMatrix, config: SystemConfig, trial_seed: int, trial_index: int = 0
) -> TrialSample:
    """Run trial ``trial_index`` of the stream ``trial_seed`` in matrix form.

    The received vector is built explicitly (full-resolution block, AQNM on
    the low-resolution block, MRC with perfect CSI) and each term is evaluated
    from its own definition. This path is deliberately independent of the
    batch kernels, which it is used to check.
    """
    _check(beta, config)
    b, mf = beta.beta, beta.m_full
    key = _rng.stream_key(trial_seed)
    g, thermal, wq_unit, x = (a[0] for a in _fallback.draw_trials(b, mf, key, trial_index, trial_index + 1))
    a, rho = config.alpha, config.rho
    sr = np.sqrt(rho)
    gf, gl = g[:mf], g[mf:]
    wf, wl = thermal[:mf], thermal[mf:]

    load = (np.abs(gl) ** 2).sum(axis=1)  # |conj(g) g| summed over users
    wq = np.sqrt(a * (1 - a) * (1 + rho * load)) * wq_unit
    y_f = sr * gf @ x + wf
    y_l = a * (sr * gl @ x + wl) + wq
    received = gf.conj().T @ y_f + gl.conj().T @ y_l

    k_users = b.shape[1]
    fs_ls = sr * (b[:mf].sum(axis=0) + a * b[mf:].sum(axis=0))
    fu = sr * (np.abs(gf) ** 2 - b[:mf]).sum(axis=0)
    lu = a * sr * (np.abs(gl) ** 2 - b[mf:]).sum(axis=0)
    fi = np.zeros(k_users, complex)
    li = np.zeros(k_users, complex)
    for k in range(k_users):
        for i in range(k_users):
            if i != k:
                fi[k] += sr * np.vdot(gf[:, k], gf[:, i]) * x[i]
                li[k] += a * sr * np.vdot(gl[:, k], gl[:, i]) * x[i]
    qn = gl.conj().T @ wq
    n = gf.conj().T @ wf + a * (gl.conj().T @ wl)
    return TrialSample(fs_ls, fu, lu, fi, li, qn, n, x, received)


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    """Per-user sums over trials with derived means and standard errors."""

    sums: np.ndarray  # (K, N_STATS)
    n_trials: int
    base_seed: int
    backend: str = ""

    def _mean_se(self, first: str, second: str):
        n = self.n_trials
        mean = self.sums[:, IDX[first]] / n
        var = np.maximum(self.sums[:, IDX[second]] / n - mean * mean, 0.0)
        return mean, np.sqrt(var / (n - 1))

    def second_moment(self, term: str):
        """``(E|T|^2, standard error)`` per user."""
        if term == "den":
            return self._mean_se("den", "den2")
        return self._mean_se(f"{term}2", f"{term}4")

    def mean(self, term: str):
        """Sample mean of a real per-trial quantity: ``fu``, ``lu`` or ``sig``."""
        first = {"fu": "fu1", "lu": "lu1", "sig": "sig"}[term]
        n = self.n_trials
        mean = self.sums[:, IDX[first]] / n
        sq = self.sums[:, IDX[{"fu": "fu2", "lu": "lu2", "sig": "sig2"}[term]]] / n
        return mean, np.sqrt(np.maximum(sq - mean * mean, 0.0) / (n - 1))

    def cross(self, name: str):
        """Complex mean of ``desired * conj(NPI)`` (``"dn"``) or ``FI * conj(LI)`` (``"fl"``)."""
        n = self.n_trials
        mean = (self.sums[:, IDX[f"{name}_re"]] + 1j * self.sums[:, IDX[f"{name}_im"]]) / n
        sq = self.sums[:, IDX[f"{name}2"]] / n
        return mean, np.sqrt(np.maximum(sq - np.abs(mean) ** 2, 0.0) / (n - 1))

    @property
    def npi_power(self) -> np.ndarray:
        return self.second_moment("den")[0]


def estimate_moments(
    beta: LargeScaleMatrix,
    config: SystemConfig,
    n_trials: int,
    base_seed: int,
    workers: int = 1,
    backend_name: str | None = None,
) -> MomentEstimate:
    _check(beta, config)
    if n_trials < 100:
        raise ValueError("n_trials must be at least 100")
    name, kernel = backend.get(backend_name)
    b = np.ascontiguousarray(beta.beta, dtype=float)
    key = _rng.stream_key(base_seed)
    step = block_size(*b.shape)
    blocks = [(t, min(t + step, n_trials)) for t in range(0, n_trials, step)]

    def run(block):
        out = np.zeros((b.shape[1], _fallback.N_STATS))
        kernel(b, beta.m_full, float(config.alpha), float(config.rho), key, block[0], block[1], out)
        return out

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(blk) for blk in blocks]
    total = np.zeros((b.shape[1], _fallback.N_STATS))
    for part in parts:
        total += part
    return MomentEstimate(total, n_trials, base_seed, name)


def empirical_se(moments, beta: LargeScaleMatrix, config: SystemConfig) -> SEReport:
    """Worst-case rate with the analytical signal power and measured NPI power.

    ``moments`` is a :class:`MomentEstimate` or anything exposing
    ``npi_power`` per user, such as a closed-form :class:`SinrBreakdown`.
    """
    signal = sinr_breakdown(beta, config).fs_ls_power
    seed = getattr(moments, "base_seed", None)
    trials = getattr(moments, "n_trials", None)
    return _report(signal / moments.npi_power, config, base_seed=seed, n_trials=trials)


def rate_ci_halfwidth(moments: MomentEstimate, beta: LargeScaleMatrix, config: SystemConfig, z: float = 1.96):
    """Delta-method half-width of the per-user rate confidence interval."""
    signal = sinr_breakdown(beta, config).fs_ls_power
    den, se = moments.second_moment("den")
    slope = signal / (den * (den + signal) * np.log(2.0))
    return z * slope * se


@dataclass(frozen=True)
class VerificationRow:
    user: int
    term: str
    closed_form: float
    empirical: float
    std_err: float
    z_score: float
    passed: bool


@dataclass(eq=False)
class VerificationReport:
    rows: list[VerificationRow]
    n_trials: int
    base_seed: int
    rel_tol: float
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[VerificationRow]:
        return [r for r in self.rows if not r.passed]

    def row(self, user: int, term: str) -> VerificationRow:
        return next(r for r in self.rows if r.user == user and r.term == term)

    def to_text(self) -> str:
        buf = io.StringIO()
        meta = " ".join(f"{k}={v!r}" for k, v in self.metadata.items())
        buf.write(
            f"# n_trials={self.n_trials} base_seed={self.base_seed} rel_tol={self.rel_tol!r} "
            f"passed={self.passed} {meta}".rstrip()
            + "\n"
        )
        buf.write("user\tterm\tclosed_form\tempirical\tstd_err\tz_score\tpass\n")
        for r in self.rows:
            buf.write(
                f"{r.user}\t{r.term}\t{r.closed_form!r}\t{r.empirical!r}\t{r.std_err!r}\t"
                f"{r.z_score!r}\t{int(r.passed)}\n"
            )
        return buf.getvalue()


def _compare(cf: float, emp: float, se: float, rel_tol: float) -> tuple[float, bool]:
    diff = emp - cf
    if diff == 0:
        return 0.0, True
    z = diff / se if se > 0 else np.copysign(np.inf, diff)
    return float(z), bool(abs(diff) <= 3 * se or abs(diff) <= rel_tol * abs(cf))


def compare_moments(
    moments: MomentEstimate, closed: SinrBreakdown, rel_tol: float = 1e-3
) -> list[VerificationRow]:
    rows = []
    sig, sig_se = moments.mean("sig")
    for k in range(len(sig)):
        for term in TERM_FAMILIES:
            cf = float(closed.term(term)[k])
            if term == "fs_ls":
                # signal amplitude is estimated; report its square
                emp = float(sig[k] ** 2)
                se = float(2 * abs(sig[k]) * sig_se[k])
            else:
                mean, err = moments.second_moment(term)
                emp, se = float(mean[k]), float(err[k])
            z, ok = _compare(cf, emp, se, rel_tol)
            rows.append(VerificationRow(k, term, cf, emp, se, z, ok))
    return rows


def verify_bound(
    beta: LargeScaleMatrix,
    config: SystemConfig,
    n_trials: int,
    base_seed: int,
    rel_tol: float = 1e-3,
    closed_form_alpha: float | None = None,
    workers: int = 1,
    backend_name: str | None = None,
) -> VerificationReport:
    """Check every closed-form term power against its Monte Carlo estimate.

    A row passes when the estimate lies within three standard errors of the
    closed form or within ``rel_tol`` of it. ``closed_form_alpha`` evaluates
    the closed form at a different gain than the simulation (negative control).
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    moments = estimate_moments(beta, config, n_trials, base_seed, workers, backend_name)
    cf_config = config if closed_form_alpha is None else config.replace(alpha=closed_form_alpha)
    rows = compare_moments(moments, sinr_breakdown(beta, cf_config), rel_tol)
    meta = {
        "m_full": config.m_full,
        "m_low": config.m_low,
        "k_users": config.k_users,
        "alpha": config.alpha,
        "rho": config.rho,
        "backend": moments.backend,
    }
    return VerificationReport(rows, n_trials, base_seed, rel_tol, meta)
