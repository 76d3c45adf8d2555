"""Bitwise Gibbs sampling machinery shared by the classic and excited detectors.

One scan visits every bit in natural order. At the step for bit k the
engine evaluates the two distances with bit k forced (d_plus, d_minus),
feeds both forced states into a merged sample list, and draws the new
bit from

    p(+1) = sigmoid((d_minus - d_plus) / (e_hat / N) + prior_k)

where e_hat is the error-energy estimate selected by ``mode``. The
classic sampler is the ``original`` mode, whose constant estimate
2*N*sigma_n2 makes the scale exactly 2*sigma_n2. Output LLRs come from
a max-log reduction over the sample list with an optionally conditioned
variance sigma_z2 = max(sigma_n2, min_d / 2N).

Distances are tracked incrementally through z = H^H (y - H s) and the
Gram matrix; flipping one symbol by delta changes the residual energy by
|delta|^2 G_nn - 2 Re(conj(delta) z_n). A unit test pins these against
direct recomputation.
"""

from __future__ import annotations

import math

import numpy as np

from ..model import LLR_CAP
from ..qam import Constellation
from .lut import ReciprocalLut
from .maxlog import bit_positions, keys_to_bits, state_distances
from .types import DetectorInput, DetectorOutput, GibbsTrace, make_output

ESTIMATOR_MODES = ("original", "min", "mean", "weighted", "oracle")
PSEUDO_MODES = ("off", "flip", "restart")
OUTPUT_MODES = ("exact", "running_min")

_WEIGHT_LOG_LIMIT = 60.0
_ENERGY_FLOOR = 1e-12  # scaled by 2N


def _weighted_energy(d_plus: float, d_minus: float, n_antennas: int) -> float:
    # (d+ + d- r^N) / (1 + r^N) with r = d+/d-, evaluated in log domain;
    # the large-|exponent| limit is the smaller distance
    if d_plus <= 0.0 or d_minus <= 0.0:
        return d_plus if d_plus < d_minus else d_minus
    t = n_antennas * (math.log(d_plus) - math.log(d_minus))
    if t > _WEIGHT_LOG_LIMIT:
        return d_minus
    if t < -_WEIGHT_LOG_LIMIT:
        return d_plus
    w = math.exp(t)
    return (d_plus + d_minus * w) / (1.0 + w)


def estimate_error_energy(
    d_plus: float,
    d_minus: float,
    n_antennas: int,
    mode: str,
    sigma_n2: float | None = None,
    d_true: float | None = None,
) -> float:
    """Estimate the residual energy of the bit-corrected state.

    Modes: ``original`` returns the classic constant 2*N*sigma_n2;
    ``min``/``mean``/``weighted`` combine the forced pair; ``oracle``
    passes through the distance at the true bit value (diagnostics
    only). Results are floored at 1e-12 * 2N.
    """
    if mode not in ESTIMATOR_MODES:
        raise ValueError(f"unknown estimator mode {mode!r}; expected one of {ESTIMATOR_MODES}")
    if d_plus < 0.0 or d_minus < 0.0:
        raise ValueError("distances must be non-negative")
    if mode == "original":
        if sigma_n2 is None:
            raise ValueError("original mode requires sigma_n2")
        e = 2.0 * n_antennas * sigma_n2
    elif mode == "min":
        e = d_plus if d_plus < d_minus else d_minus
    elif mode == "mean":
        e = 0.5 * (d_plus + d_minus)
    elif mode == "weighted":
        e = _weighted_energy(d_plus, d_minus, n_antennas)
    else:
        if d_true is None:
            raise ValueError("oracle mode requires d_true")
        e = d_true
    floor = _ENERGY_FLOOR * 2.0 * n_antennas
    return e if e > floor else floor


def gibbs_bit_llr(
    d_plus: float,
    d_minus: float,
    error_energy: float,
    n_antennas: int,
    prior_llr: float = 0.0,
):
    """Conditional LLR of the scanned bit given the rest of the state."""
    return (d_minus - d_plus) / (error_energy / n_antennas) + prior_llr


def gibbs_probability(llr):
    """P(bit = +1) = sigmoid(llr), numerically stable for any magnitude."""
    if isinstance(llr, np.ndarray):
        clipped = np.clip(llr, -700.0, 700.0)
        e = np.exp(clipped)
        return np.where(
            llr >= 0.0,
            1.0 / (1.0 + np.exp(-clipped)),
            np.where(llr > -700.0, e / (1.0 + e), 0.0),
        )
    if llr >= 0.0:
        return 1.0 / (1.0 + math.exp(-llr)) if llr < 700.0 else 1.0
    e = math.exp(llr) if llr > -700.0 else 0.0
    return e / (1.0 + e)


def determinism(p):
    """|2p - 1|: 0 for a coin toss, 1 for a frozen transition."""
    return abs(2.0 * p - 1.0)


class MotionMonitor:
    """Flags pseudo-convergence after ``n_motion`` bit-steps without motion."""

    def __init__(self, n_motion: int):
        if n_motion < 1:
            raise ValueError("n_motion must be >= 1")
        self.n_motion = n_motion
        self.count = 0

    def step(self, changed: bool) -> bool:
        """Record one bit-step; True when the no-motion threshold is hit."""
        if changed:
            self.count = 0
            return False
        self.count += 1
        if self.count >= self.n_motion:
            self.count = 0
            return True
        return False

    def reset(self) -> None:
        self.count = 0


def forced_flip(bits: np.ndarray, k: int) -> np.ndarray:
    """State after the escape transition: bit k negated, others kept."""
    bits = np.asarray(bits)
    if not 0 <= k < bits.size:
        raise IndexError(f"bit index {k} out of range for {bits.size} bits")
    out = bits.copy()
    out[k] = -out[k]
    return out


class SampleList:
    """Deduplicated visited states with cached distances.

    States are stored as packed label integers (antenna a occupies bits
    [bps*a, bps*a + bps) with the label MSB on top); revisits keep the
    smallest observed distance, so min_distance always equals the store
    minimum. The global minimum feeds output conditioning.
    """

    def __init__(self, n_antennas: int, const: Constellation):
        self.n_antennas = n_antennas
        self.const = const
        self.store: dict[int, float] = {}
        self.min_distance = math.inf
        self._pos = bit_positions(n_antennas, const)

    @property
    def n_states(self) -> int:
        return len(self.store)

    def add(self, key: int, dist: float) -> None:
        if dist < 0.0:
            raise ValueError("distance must be non-negative")
        prev = self.store.get(key)
        if prev is None or prev > dist:
            self.store[key] = dist
        if dist < self.min_distance:
            self.min_distance = dist

    def pack(self, bits: np.ndarray) -> int:
        key = 0
        for pos, b in zip(self._pos, np.asarray(bits)):
            if b > 0:
                key |= 1 << int(pos)
        return key

    def add_state(self, bits: np.ndarray, dist: float) -> None:
        self.add(self.pack(bits), dist)

    def keys_array(self) -> np.ndarray:
        return np.fromiter(self.store.keys(), dtype=np.uint64, count=len(self.store))

    def distances_array(self) -> np.ndarray:
        return np.fromiter(self.store.values(), dtype=np.float64, count=len(self.store))

    def bits_matrix(self) -> np.ndarray:
        return keys_to_bits(self.keys_array(), self.n_antennas, self.const)

    @classmethod
    def from_enumeration(
        cls, y: np.ndarray, h: np.ndarray, const: Constellation, state_cap: int = 2**20
    ) -> "SampleList":
        """Full-grid list (test hook for the max-log reduction)."""
        n = h.shape[0]
        total = const.m**n
        if total > state_cap:
            raise ValueError(f"enumeration of {total} states exceeds the cap {state_cap}")
        keys = np.arange(total, dtype=np.uint64)
        d = state_distances(keys, y, h, n, const)
        sl = cls(n, const)
        sl.store = dict(zip(keys.tolist(), d.tolist()))
        sl.min_distance = float(d.min())
        return sl


def conditioning_variance(
    samples: SampleList, sigma_n2: float, n_antennas: int, enabled: bool = True
) -> float:
    """Output variance sigma_z2 = max(sigma_n2, min_d / 2N); sigma_n2 when off."""
    if not enabled:
        return sigma_n2
    if samples.n_states == 0:
        raise ValueError("cannot condition on an empty sample list")
    return max(sigma_n2, samples.min_distance / (2.0 * n_antennas))


def list_output_llr(
    samples: SampleList, lambda_a: np.ndarray, variance: float
) -> tuple[np.ndarray, np.ndarray]:
    """Max-log extrinsic LLRs reduced over the sample list.

    For each bit the two side minima of d/variance - x . lambda_a are
    combined; the own-bit prior is removed so the result is extrinsic.
    Bits with list states on one side only saturate at +-LLR_CAP toward
    the observed side and are flagged in the returned mask.
    """
    if samples.n_states == 0:
        raise ValueError("cannot reduce an empty sample list")
    if variance <= 0.0:
        raise ValueError("variance must be positive")
    bits = samples.bits_matrix().astype(np.float64)
    d = samples.distances_array()
    base = d / variance - bits @ lambda_a
    plus = bits > 0
    m_plus = np.where(plus, base[:, None], np.inf).min(axis=0)
    m_minus = np.where(plus, np.inf, base[:, None]).min(axis=0)
    one_sided = np.isinf(m_plus) | np.isinf(m_minus)
    lambda_e = 0.5 * (m_minus - m_plus) - lambda_a
    if one_sided.any():
        lambda_e = np.where(np.isinf(m_minus), LLR_CAP, lambda_e)
        lambda_e = np.where(np.isinf(m_plus), -LLR_CAP, lambda_e)
    return np.clip(lambda_e, -LLR_CAP, LLR_CAP), one_sided


class _RunningMins:
    """Per-(bit, side) distance argmins, for the no-list output mode.

    Tracks, for every bit and both forced values, the smallest distance
    seen and the state that achieved it. With zero priors the reduction
    over these 2K states matches the exact list reduction, because the
    argmin under d/variance is the argmin under d for any variance.
    """

    def __init__(self, pos: np.ndarray):
        k = pos.size
        self.pos = pos
        self.m_plus = np.full(k, np.inf)
        self.m_minus = np.full(k, np.inf)
        self.key_plus = np.zeros(k, dtype=np.uint64)
        self.key_minus = np.zeros(k, dtype=np.uint64)

    def ingest(self, key: int, dist: float) -> None:
        kv = np.uint64(key)
        plus = ((kv >> self.pos) & np.uint64(1)).astype(bool)
        upd = plus & (dist < self.m_plus)
        self.m_plus[upd] = dist
        self.key_plus[upd] = kv
        upd = ~plus & (dist < self.m_minus)
        self.m_minus[upd] = dist
        self.key_minus[upd] = kv

    def to_sample_list(self, n_antennas: int, const: Constellation) -> SampleList:
        sl = SampleList(n_antennas, const)
        for keys, dists in ((self.key_plus, self.m_plus), (self.key_minus, self.m_minus)):
            for key, dist in zip(keys.tolist(), dists.tolist()):
                if math.isfinite(dist):
                    sl.add(key, dist)
        return sl


def run_gibbs(
    inp: DetectorInput,
    n_gibbs: int,
    n_iter: int,
    rng: np.random.Generator,
    *,
    mode: str = "min",
    pseudo: str = "off",
    conditioning: bool = False,
    lut_bits: int | None = None,
    n_motion: int | None = None,
    output_mode: str = "exact",
    trace: bool = False,
    init_labels: list | None = None,
    seed_samples: SampleList | None = None,
) -> tuple[DetectorOutput, list[tuple[int, ...]]]:
    """Run ``n_gibbs`` independent samplers for ``n_iter`` scans each.

    Samplers draw from per-sampler child streams spawned from ``rng``
    (sampler order therefore cannot change results). ``init_labels``
    optionally pins per-sampler starting states (None entries draw a
    uniform random start). Returns the detector output and the final
    per-sampler label tuples for turbo carry-over.
    """
    if n_gibbs < 1 or n_iter < 1:
        raise ValueError("n_gibbs and n_iter must be >= 1")
    if mode not in ESTIMATOR_MODES:
        raise ValueError(f"unknown estimator mode {mode!r}")
    if pseudo not in PSEUDO_MODES:
        raise ValueError(f"unknown pseudo-convergence mode {pseudo!r}")
    if output_mode not in OUTPUT_MODES:
        raise ValueError(f"unknown output mode {output_mode!r}")
    if mode == "oracle" and inp.tx_bits is None:
        raise ValueError("oracle mode requires tx_bits on the detector input")

    const = inp.constellation
    n_ant = inp.n_antennas
    bps = const.bits_per_symbol
    n_bits = inp.n_bits
    y = inp.y
    h = inp.h
    sigma_n2 = inp.sigma_n2

    # python-scalar tables keep the per-step cost flat
    table = [complex(v) for v in const.symbols]
    gram = h.conj().T @ h
    g_cols = [[complex(gram[r, c]) for r in range(n_ant)] for c in range(n_ant)]
    g_diag = [float(gram[i, i].real) for i in range(n_ant)]
    la = [float(v) for v in inp.lambda_a]
    tx_plus = [bool(b > 0) for b in inp.tx_bits] if inp.tx_bits is not None else None

    bit_ant = [k // bps for k in range(n_bits)]
    bit_msk = [1 << (bps - 1 - k % bps) for k in range(n_bits)]
    kmask = [bit_msk[k] << (bps * bit_ant[k]) for k in range(n_bits)]

    mode_code = ESTIMATOR_MODES.index(mode)
    pseudo_code = PSEUDO_MODES.index(pseudo)
    lut = ReciprocalLut(lut_bits) if lut_bits is not None else None
    two_nsig = 2.0 * n_ant * sigma_n2
    floor_eps = _ENERGY_FLOOR * 2.0 * n_ant
    motion_limit = n_motion if n_motion is not None else n_bits

    samples = SampleList(n_ant, const)
    if seed_samples is not None:
        samples.store = dict(seed_samples.store)
        samples.min_distance = seed_samples.min_distance
    store = samples.store
    g_min = samples.min_distance
    runmin = _RunningMins(samples._pos) if output_mode == "running_min" else None
    if runmin is not None and seed_samples is not None:
        for key, dist in store.items():
            runmin.ingest(key, dist)

    tracing = bool(trace)
    tr_s: list = []
    tr_it: list = []
    tr_k: list = []
    tr_p: list = []
    tr_det: list = []
    tr_err: list = []
    tr_forced: list = []
    tr_changed: list = []
    tr_dp: list = []
    tr_dm: list = []
    tr_dt: list = []

    children = rng.spawn(n_gibbs)
    final_labels: list[tuple[int, ...]] = []
    sampler_min_d = np.full(n_gibbs, np.inf)

    for si in range(n_gibbs):
        child = children[si]
        start = init_labels[si] if init_labels is not None else None
        if start is None:
            plus_bits = child.random(n_bits) < 0.5
            labels = _labels_from_plus(plus_bits, n_ant, bps)
        else:
            labels = list(start)
        buf = child.random(n_iter * n_bits).tolist()
        cursor = 0

        skey, z, d = _direct_state(labels, table, y, h, bps)
        monitor = MotionMonitor(motion_limit)
        forced_pending = False
        restart_pending = False
        s_min = math.inf
        nan = math.nan

        for it in range(n_iter):
            for k in range(n_bits):
                if restart_pending:
                    restart_pending = False
                    plus_bits = child.random(n_bits) < 0.5
                    labels = _labels_from_plus(plus_bits, n_ant, bps)
                    skey, z, d = _direct_state(labels, table, y, h, bps)
                    monitor.reset()

                a = bit_ant[k]
                msk = bit_msk[k]
                km = kmask[k]
                lbl = labels[a]
                flip = lbl ^ msk
                dsym = table[flip] - table[lbl]
                zn = z[a]
                dr = dsym.real
                di = dsym.imag
                d_other = d - 2.0 * (dr * zn.real + di * zn.imag) + (dr * dr + di * di) * g_diag[a]
                if d_other < 0.0:
                    d_other = 0.0
                if lbl & msk:
                    cur_plus = True
                    dp = d
                    dm = d_other
                    key_p = skey
                    key_m = skey ^ km
                else:
                    cur_plus = False
                    dp = d_other
                    dm = d
                    key_p = skey ^ km
                    key_m = skey
                prev = store.get(key_p)
                if prev is None or prev > dp:
                    store[key_p] = dp
                prev = store.get(key_m)
                if prev is None or prev > dm:
                    store[key_m] = dm
                if dp < g_min:
                    g_min = dp
                if dm < g_min:
                    g_min = dm
                if dp < s_min:
                    s_min = dp
                if dm < s_min:
                    s_min = dm
                if runmin is not None:
                    runmin.ingest(key_p, dp)
                    runmin.ingest(key_m, dm)

                if forced_pending:
                    # escape transition: negate the scanned bit, no draw
                    forced_pending = False
                    monitor.reset()
                    new_plus = not cur_plus
                    changed = True
                    forced = True
                    p = None
                else:
                    forced = False
                    if mode_code == 0:
                        eh = two_nsig
                    elif mode_code == 1:
                        eh = dp if dp < dm else dm
                    elif mode_code == 2:
                        eh = 0.5 * (dp + dm)
                    elif mode_code == 3:
                        eh = _weighted_energy(dp, dm, n_ant)
                    else:
                        eh = dp if tx_plus[k] else dm
                    if eh < floor_eps:
                        eh = floor_eps
                    if lut is None:
                        g = (dm - dp) / (eh / n_ant) + la[k]
                    else:
                        g = (dm - dp) * lut(eh / n_ant) + la[k]
                    if g >= 0.0:
                        p = 1.0 / (1.0 + math.exp(-g)) if g < 700.0 else 1.0
                    else:
                        e = math.exp(g) if g > -700.0 else 0.0
                        p = e / (1.0 + e)
                    u = buf[cursor]
                    cursor += 1
                    new_plus = u < p
                    changed = new_plus != cur_plus
                    if monitor.step(changed) and pseudo_code:
                        if pseudo_code == 1:
                            forced_pending = True
                        else:
                            restart_pending = True

                if changed:
                    labels[a] = flip
                    skey = key_p if new_plus else key_m
                    col = g_cols[a]
                    for r in range(n_ant):
                        z[r] = z[r] - col[r] * dsym
                    d = d_other

                if tracing:
                    tr_s.append(si)
                    tr_it.append(it)
                    tr_k.append(k)
                    if forced:
                        tr_p.append(nan)
                        tr_det.append(nan)
                    else:
                        tr_p.append(p)
                        tr_det.append(abs(2.0 * p - 1.0))
                    if tx_plus is None:
                        tr_err.append(-1)
                        tr_dt.append(nan)
                    else:
                        tr_err.append(1 if new_plus != tx_plus[k] else 0)
                        tr_dt.append(dp if tx_plus[k] else dm)
                    tr_forced.append(1 if forced else 0)
                    tr_changed.append(1 if changed else 0)
                    tr_dp.append(dp)
                    tr_dm.append(dm)

        final_labels.append(tuple(labels))
        sampler_min_d[si] = s_min

    samples.min_distance = g_min
    sigma_z2 = conditioning_variance(samples, sigma_n2, n_ant, enabled=conditioning)
    if runmin is not None:
        reduced = runmin.to_sample_list(n_ant, const)
        lambda_e, one_sided = list_output_llr(reduced, inp.lambda_a, sigma_z2)
    else:
        lambda_e, one_sided = list_output_llr(samples, inp.lambda_a, sigma_z2)

    trace_obj = None
    if tracing:
        trace_obj = GibbsTrace(
            n_gibbs=n_gibbs,
            n_iter=n_iter,
            n_bits=n_bits,
            sampler=np.array(tr_s, dtype=np.int16),
            iteration=np.array(tr_it, dtype=np.int32),
            k=np.array(tr_k, dtype=np.int32),
            p_gibbs=np.array(tr_p, dtype=np.float64),
            determinism=np.array(tr_det, dtype=np.float64),
            state_error=np.array(tr_err, dtype=np.int8),
            forced_flip=np.array(tr_forced, dtype=np.int8),
            changed=np.array(tr_changed, dtype=np.int8),
            d_plus=np.array(tr_dp, dtype=np.float64),
            d_minus=np.array(tr_dm, dtype=np.float64),
            d_true=np.array(tr_dt, dtype=np.float64),
        )

    out = make_output(
        lambda_e,
        inp.lambda_a,
        sigma_z2=sigma_z2,
        n_samples=samples.n_states,
        one_sided=one_sided,
        trace=trace_obj,
        sample_list=samples,
        sampler_min_d=sampler_min_d,
    )
    return out, final_labels


def _labels_from_plus(plus_bits, n_ant: int, bps: int) -> list[int]:
    labels = []
    for a in range(n_ant):
        v = 0
        for j in range(bps):
            v = (v << 1) | (1 if plus_bits[a * bps + j] else 0)
        labels.append(v)
    return labels


def _direct_state(labels, table, y, h, bps):
    """Packed key, z = H^H (y - H s), and direct distance for a label state."""
    s = np.array([table[l] for l in labels], dtype=np.complex128)
    r = y - h @ s
    z = [complex(v) for v in h.conj().T @ r]
    d = float(r.real @ r.real + r.imag @ r.imag)
    skey = 0
    for a, lbl in enumerate(labels):
        skey |= lbl << (bps * a)
    return skey, z, d
