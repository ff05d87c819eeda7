"""Shared test utilities for window alignment and random states."""

import numpy as np

from fequbit import LadderState


def aligned_pair(s1: LadderState, s2: LadderState) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude arrays of both states zero-padded onto their joint window."""
    lo = min(s1.l_min, s2.l_min)
    hi = max(s1.l_max, s2.l_max)
    return s1.padded(lo, hi).amplitudes, s2.padded(lo, hi).amplitudes


def state_distance(s1: LadderState, s2: LadderState) -> float:
    a, b = aligned_pair(s1, s2)
    return float(np.linalg.norm(a - b))


def state_fidelity(s1: LadderState, s2: LadderState) -> float:
    a, b = aligned_pair(s1, s2)
    return float(abs(np.vdot(a, b)) ** 2
                 / (np.vdot(a, a).real * np.vdot(b, b).real))


def random_interior_state(rng: np.random.Generator, support_half: int,
                          window_half: int) -> LadderState:
    """Normalized random state supported on [-support_half, support_half]
    inside the window [-window_half, window_half]."""
    assert support_half < window_half
    amps = np.zeros(2 * window_half + 1, dtype=np.complex128)
    n = 2 * support_half + 1
    block = rng.normal(size=n) + 1j * rng.normal(size=n)
    amps[window_half - support_half:window_half + support_half + 1] = block
    amps /= np.linalg.norm(amps)
    return LadderState(-window_half, amps)
